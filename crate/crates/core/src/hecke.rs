//! Hecke action matrices on the Eisenstein basis, their eigenvalues, and the
//! unitriangular change of basis to simultaneous eigenforms.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::characters::{CharacterPair, DirichletCharacter};
use crate::combinat::{beta, sym_chi_value, sym_count_value};
use crate::eisenstein::{action_scalar, is_nonzero, nonzero_basis, partition_matrix, ModularParams, Partition};
use crate::error::{Error, Result};
use crate::exactmath::arith::{gcd, inv_mod, is_prime, modulo, pow_mod};
use crate::exactmath::{rational_pow, CycloNumber, IntMatrix};
use crate::symplectic::chi_of_matrices;

/// A square matrix over Q(ζ) with rows and columns indexed by a partition basis.
/// Entry (σ, α) is the coefficient of E_α in E_σ | operator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ActionMatrix {
    pub label: String,
    pub basis: Vec<Partition>,
    pub entries: Vec<Vec<CycloNumber>>,
}

impl ActionMatrix {
    pub fn zero(label: impl Into<String>, basis: Vec<Partition>) -> Self {
        let n = basis.len();
        ActionMatrix { label: label.into(), basis, entries: vec![vec![CycloNumber::zero(); n]; n] }
    }

    pub fn identity(label: impl Into<String>, basis: Vec<Partition>) -> Self {
        let mut m = Self::zero(label, basis);
        for i in 0..m.dim() {
            m.entries[i][i] = CycloNumber::one();
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn index_of(&self, sigma: &Partition) -> Option<usize> {
        self.basis.binary_search(sigma).ok()
    }

    pub fn get(&self, i: usize, j: usize) -> &CycloNumber {
        &self.entries[i][j]
    }

    pub fn diagonal(&self) -> Vec<CycloNumber> {
        (0..self.dim()).map(|i| self.entries[i][i].clone()).collect()
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.dim()).all(|i| (0..self.dim()).all(|j| i == j || self.entries[i][j].is_zero()))
    }

    pub fn mul(&self, other: &ActionMatrix) -> ActionMatrix {
        let n = self.dim();
        let mut out = Self::zero(format!("{}*{}", self.label, other.label), self.basis.clone());
        for i in 0..n {
            for k in 0..n {
                if self.entries[i][k].is_zero() {
                    continue;
                }
                for j in 0..n {
                    if !other.entries[k][j].is_zero() {
                        out.entries[i][j] = out.entries[i][j].add(&self.entries[i][k].mul(&other.entries[k][j]));
                    }
                }
            }
        }
        out
    }

    pub fn add(&self, other: &ActionMatrix) -> ActionMatrix {
        let mut out = self.clone();
        for (row, orow) in out.entries.iter_mut().zip(&other.entries) {
            for (x, y) in row.iter_mut().zip(orow) {
                *x = x.add(y);
            }
        }
        out
    }

    pub fn scale(&self, c: &CycloNumber) -> ActionMatrix {
        let mut out = self.clone();
        for row in out.entries.iter_mut() {
            for x in row.iter_mut() {
                *x = x.mul(c);
            }
        }
        out
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn commutes_with(&self, other: &ActionMatrix) -> bool {
        self.basis == other.basis && self.mul(other).entries == other.mul(self).entries
    }

    /// A·self·A⁻¹ for a unitriangular A on the same basis.
    pub fn conjugate_by(&self, a: &ActionMatrix, a_inv: &ActionMatrix) -> ActionMatrix {
        a.mul(self).mul(a_inv).with_label(self.label.clone())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("action matrices serialize")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))
    }
}

fn rat(q: u64, e: i64) -> CycloNumber {
    CycloNumber::from_rational(rational_pow(q, e))
}

fn int(b: BigInt) -> CycloNumber {
    CycloNumber::from_int(b)
}

/// a^e modulo m for a unit a, negative exponents through the inverse.
pub fn unit_power(a: i64, e: i64, m: u64) -> Result<i64> {
    if m == 1 {
        return Ok(0);
    }
    let base = if e < 0 { inv_mod(a, m)? } else { modulo(a, m) };
    Ok(pow_mod(base, e.unsigned_abs(), m) as i64)
}

fn require_bad_prime(params: &ModularParams, q: u64) -> Result<()> {
    params.require_squarefree()?;
    params.require_valid()?;
    if !is_prime(q) || params.level % q != 0 {
        return Err(Error::PrimeLevel { p: q, level: params.level, rel: "must divide" });
    }
    Ok(())
}

fn require_good_prime(params: &ModularParams, p: u64) -> Result<()> {
    if !is_prime(p) || params.level % p == 0 {
        return Err(Error::PrimeLevel { p, level: params.level, rel: "must not divide" });
    }
    Ok(())
}

fn require_j(params: &ModularParams, j: usize) -> Result<()> {
    if j == 0 || j > params.degree {
        return Err(Error::invalid(format!("j must lie in 1..={}", params.degree)));
    }
    Ok(())
}

/// diag(a·I_r, b·I_{n−r}) as an integer matrix.
fn two_step_diag(n: usize, r: usize, a: i64, b: i64) -> IntMatrix {
    let d: Vec<i64> = (0..n).map(|i| if i < r { a } else { b }).collect();
    IntMatrix::diag(&d)
}

/// The character factor χ_{N/q}(q̄·X_d·M_σ, X_d) with X_d = diag(qI_d, I).
pub fn bad_prime_character(params: &ModularParams, sigma: &Partition, q: u64, d: usize) -> Result<CycloNumber> {
    let rest = params.level / q;
    let chi_rest = params.chi.factor_local(rest)?;
    if rest == 1 {
        return Ok(CycloNumber::one());
    }
    let qbar = inv_mod(q as i64, rest)? as i64;
    let n = params.degree;
    let xd = two_step_diag(n, d, q as i64, 1);
    let m = partition_matrix(sigma)?;
    let big_m = xd.mul(&m).scale(&BigInt::from(qbar));
    chi_of_matrices(&big_m, &xd, &chi_rest)
}

/// The same factor written as χ̄_{N/q}(q·X_d⁻¹·M_σ, X_d⁻¹), with 1/q read as q̄ mod N/q.
pub fn bad_prime_character_conjugate_form(
    params: &ModularParams,
    sigma: &Partition,
    q: u64,
    d: usize,
) -> Result<CycloNumber> {
    let rest = params.level / q;
    let chi_rest = params.chi.factor_local(rest)?;
    if rest == 1 {
        return Ok(CycloNumber::one());
    }
    let qbar = inv_mod(q as i64, rest)? as i64;
    let n = params.degree;
    let m = partition_matrix(sigma)?;
    let q_xinv = two_step_diag(n, d, 1, q as i64);
    let xinv = two_step_diag(n, d, qbar, 1);
    Ok(chi_of_matrices(&q_xinv.mul(&m), &xinv, &chi_rest)?.conj())
}

/// λ_σ(q) = q^{kd−d(d+1)/2}·χ_{N/q}(q̄X_dM_σ, X_d), d = rank_q M_σ.
pub fn lambda_q(params: &ModularParams, sigma: &Partition, q: u64) -> Result<CycloNumber> {
    require_bad_prime(params, q)?;
    if !is_nonzero(sigma, params) {
        return Err(Error::ZeroSeries);
    }
    let d = sigma.rank_at(q).unwrap() as i64;
    let k = params.weight;
    Ok(rat(q, k * d - d * (d + 1) / 2).mul(&bad_prime_character(params, sigma, q, d as usize)?))
}

/// The T(q) matrix for a prime q dividing the square-free level.
pub fn tq_action(params: &ModularParams, q: u64) -> Result<ActionMatrix> {
    require_bad_prime(params, q)?;
    let basis = nonzero_basis(params)?;
    let n = params.degree;
    let k = params.weight;
    let chi_q = params.chi.local_at(q)?;
    let mut out = ActionMatrix::zero(format!("T({})", q), basis.clone());
    for (i, sigma) in basis.iter().enumerate() {
        let d = sigma.rank_at(q).unwrap();
        let di = d as i64;
        let pre = rat(q, k * di - di * (di + 1) / 2).mul(&bad_prime_character(params, sigma, q, d)?);
        for t in 0..=(n - d) {
            let target = sigma.moved(q, d + t);
            let Some(j) = out.index_of(&target) else { continue };
            let ti = t as i64;
            let coeff = rat(q, -di * ti - ti * (ti + 1) / 2)
                .mul(&int(beta(q, di + ti, ti)))
                .mul(&sym_chi_value(q, &chi_q, t, 0)?);
            out.entries[i][j] = pre.mul(&coeff);
        }
    }
    Ok(out)
}

/// χ̄_{N/q}(X_{d1,r}⁻¹·M_σ·X_j, X_{d1,r}⁻¹·X_j⁻¹) with 1/q read as q̄ mod N/q.
fn tj_character(
    params: &ModularParams,
    m_sigma: &IntMatrix,
    q: u64,
    j: usize,
    d1: usize,
    r: usize,
) -> Result<CycloNumber> {
    let rest = params.level / q;
    if rest == 1 {
        return Ok(CycloNumber::one());
    }
    let chi_rest = params.chi.factor_local(rest)?;
    let n = params.degree;
    let qbar = inv_mod(q as i64, rest)? as i64;
    let qi = q as i64;
    // X_{d1,r}⁻¹ = diag(q̄ I_{d1}, I, q I_r)
    let xinv: Vec<i64> = (0..n)
        .map(|i| {
            if i < d1 {
                qbar
            } else if i >= n - r {
                qi
            } else {
                1
            }
        })
        .collect();
    let xinv = IntMatrix::diag(&xinv);
    let xj = two_step_diag(n, j, qi, 1);
    let xj_inv = two_step_diag(n, j, qbar, 1);
    Ok(chi_of_matrices(&xinv.mul(m_sigma).mul(&xj), &xinv.mul(&xj_inv), &chi_rest)?.conj())
}

/// A_j(d, t): the coefficient of E_{σ_{d+t}} in E_{σ_d} | T_j(q²).
pub fn tj_coefficient(params: &ModularParams, sigma: &Partition, q: u64, j: usize, t: usize) -> Result<CycloNumber> {
    let n = params.degree;
    let k = params.weight;
    let d = sigma.rank_at(q).ok_or_else(|| Error::invalid("q does not divide the level"))?;
    if d + t > n {
        return Ok(CycloNumber::zero());
    }
    let chi_q = params.chi.local_at(q)?;
    let m_sigma = partition_matrix(sigma)?;
    let (ni, di, ti, ji) = (n as i64, d as i64, t as i64, j as i64);
    let mut sum = CycloNumber::zero();
    for d1 in 0..=j {
        for d5 in 0..=(j - d1) {
            for d8 in 0..=d5 {
                let (d1i, d5i, d8i) = (d1 as i64, d5 as i64, d8 as i64);
                if d1 > d || d5 + d8 > t {
                    continue;
                }
                let betas = beta(q, di, d1i)
                    * beta(q, ti, d5i)
                    * beta(q, ni - di - ti, d1i + ni - di - ji - d8i)
                    * beta(q, ti - d5i, d8i);
                if betas.is_zero() {
                    continue;
                }
                let r = ji - d1i - d5i + d8i;
                if r < 0 || d1i + r > ni {
                    return Err(Error::Hypothesis(format!(
                        "nonzero summand with X_{{{},{}}} undefined (n={}, j={}, d={}, t={})",
                        d1, r, n, j, d, t
                    )));
                }
                let s1 = sym_chi_value(q, &chi_q, t - d5 - d8, 0)?;
                let s2 = sym_chi_value(q, &chi_q, d5, d8)?;
                if s1.is_zero() || s2.is_zero() {
                    continue;
                }
                let a = (k - di) * (2 * d1i + d5i - d8i) + d1i * (d1i - d8i - ji - 1) + d8i * (ji - d5i)
                    - d5i * (d5i + 1) / 2
                    + d8i * (d8i + 1) / 2;
                let chi_factor = tj_character(params, &m_sigma, q, j, d1, r as usize)?;
                let term = rat(q, a).mul(&chi_factor).mul(&int(betas)).mul(&s1).mul(&s2);
                sum = sum.add(&term);
            }
        }
    }
    Ok(rat(q, (ji - ti) * di - ti * (ti + 1) / 2).mul(&int(beta(q, di + ti, ti))).mul(&sum))
}

/// The T_j(q²) matrix for a prime q dividing the square-free level.
pub fn tjq2_action(params: &ModularParams, q: u64, j: usize) -> Result<ActionMatrix> {
    require_bad_prime(params, q)?;
    require_j(params, j)?;
    let basis = nonzero_basis(params)?;
    let n = params.degree;
    let mut out = ActionMatrix::zero(format!("Tj({}^2;{})", q, j), basis.clone());
    for (i, sigma) in basis.iter().enumerate() {
        let d = sigma.rank_at(q).unwrap();
        for t in 0..=(n - d) {
            let Some(c) = out.index_of(&sigma.moved(q, d + t)) else { continue };
            out.entries[i][c] = tj_coefficient(params, sigma, q, j, t)?;
        }
    }
    Ok(out)
}

/// λ_{j;σ}(q²) = q^{jd} Σ_ℓ q^{ℓ(2k−2d−j+ℓ−1)} χ_{N0'}(q^{2ℓ}) χ_{Nn'}(q^{2(j−ℓ)}) β(d,ℓ) β(n−d,j−ℓ).
pub fn lambda_j_q2(params: &ModularParams, sigma: &Partition, q: u64, j: usize) -> Result<CycloNumber> {
    require_bad_prime(params, q)?;
    require_j(params, j)?;
    if !is_nonzero(sigma, params) {
        return Err(Error::ZeroSeries);
    }
    let n = params.degree;
    let k = params.weight;
    let d = sigma.rank_at(q).unwrap() as i64;
    let strip = |x: u64| x / gcd(q, x);
    let chi0 = params.chi.factor_local(strip(sigma.part(0)))?;
    let chin = params.chi.factor_local(strip(sigma.part(n)))?;
    let (ni, ji) = (n as i64, j as i64);
    let qi = q as i64;
    let mut sum = CycloNumber::zero();
    for l in 0..=ji {
        let b = beta(q, d, l) * beta(q, ni - d, ji - l);
        if b.is_zero() {
            continue;
        }
        let c0 = chi0.eval(unit_power(qi, 2 * l, chi0.modulus())?);
        let cn = chin.eval(unit_power(qi, 2 * (ji - l), chin.modulus())?);
        sum = sum.add(&rat(q, l * (2 * k - 2 * d - ji + l - 1)).mul(&c0).mul(&cn).mul(&int(b)));
    }
    Ok(rat(q, ji * d).mul(&sum))
}

/// Change of basis a_{σ,α} to the simultaneous T(q)-eigenforms Ẽ_σ = Σ_α a_{σ,α} E_α.
#[derive(Clone, Debug)]
pub struct DiagonalizationData {
    pub params: ModularParams,
    pub primes: Vec<u64>,
    pub basis: Vec<Partition>,
    pub local: BTreeMap<u64, BTreeMap<(Partition, Partition), CycloNumber>>,
    pub coefficients: BTreeMap<(Partition, Partition), CycloNumber>,
}

impl DiagonalizationData {
    pub fn coefficient(&self, sigma: &Partition, alpha: &Partition) -> CycloNumber {
        self.coefficients.get(&(sigma.clone(), alpha.clone())).cloned().unwrap_or_else(CycloNumber::zero)
    }

    /// The matrix A with rows a_{σ,·}; A·T·A⁻¹ is diagonal.
    pub fn matrix(&self) -> ActionMatrix {
        let mut a = ActionMatrix::zero("A", self.basis.clone());
        for (i, s) in self.basis.iter().enumerate() {
            for (j, t) in self.basis.iter().enumerate() {
                a.entries[i][j] = self.coefficient(s, t);
            }
        }
        a
    }

    /// Inverse of the unitriangular change of basis.
    pub fn inverse_matrix(&self) -> ActionMatrix {
        unitriangular_inverse(&self.matrix())
    }

    pub fn to_json(&self) -> serde_json::Value {
        let coeffs: Vec<serde_json::Value> = self
            .coefficients
            .iter()
            .filter(|(_, v)| !v.is_zero())
            .map(|((s, a), v)| serde_json::json!({"sigma": s, "alpha": a, "a": v}))
            .collect();
        serde_json::json!({
            "level": self.params.level,
            "degree": self.params.degree,
            "weight": self.params.weight,
            "primes": self.primes,
            "basis": self.basis,
            "coefficients": coeffs,
        })
    }
}

/// Inverse of an upper unitriangular matrix by back substitution.
pub fn unitriangular_inverse(a: &ActionMatrix) -> ActionMatrix {
    let n = a.dim();
    let mut inv = ActionMatrix::identity("A^-1", a.basis.clone());
    for i in (0..n).rev() {
        for j in i + 1..n {
            // (A·X)_{ij} = X_{ij} + Σ_{i<k≤j} A_{ik} X_{kj} = 0
            let mut acc = CycloNumber::zero();
            for k in i + 1..=j {
                if !a.entries[i][k].is_zero() && !inv.entries[k][j].is_zero() {
                    acc = acc.add(&a.entries[i][k].mul(&inv.entries[k][j]));
                }
            }
            inv.entries[i][j] = acc.neg();
        }
    }
    inv
}

/// Per-prime back substitution on T(q), then the product across primes.
pub fn diagonalize(params: &ModularParams) -> Result<DiagonalizationData> {
    params.require_squarefree()?;
    params.require_valid()?;
    let basis = nonzero_basis(params)?;
    let primes = params.primes();
    let mut local = BTreeMap::new();
    for &q in &primes {
        let t = tq_action(params, q)?;
        let mut coeffs: BTreeMap<(Partition, Partition), CycloNumber> = BTreeMap::new();
        for (si, sigma) in basis.iter().enumerate() {
            let lam = t.get(si, si).clone();
            let d = sigma.rank_at(q).unwrap();
            // the chain σ = σ_d, σ_{d+1}, … that survives in the basis
            let chain: Vec<usize> = (d..=params.degree).filter_map(|e| t.index_of(&sigma.moved(q, e))).collect();
            let mut a: BTreeMap<usize, CycloNumber> = BTreeMap::new();
            a.insert(si, CycloNumber::one());
            for &b in chain.iter().skip(1) {
                let mut acc = CycloNumber::zero();
                for (&alpha, coeff) in a.iter() {
                    if !t.get(alpha, b).is_zero() {
                        acc = acc.add(&coeff.mul(t.get(alpha, b)));
                    }
                }
                let gap = lam.sub(t.get(b, b));
                if gap.is_zero() {
                    return Err(Error::EigenvalueTie(format!("λ_{}({}) = λ_{}({}) = {}", sigma, q, basis[b], q, lam)));
                }
                a.insert(b, acc.div(&gap)?);
            }
            for (b, v) in a {
                coeffs.insert((sigma.clone(), basis[b].clone()), v);
            }
        }
        local.insert(q, coeffs);
    }
    let mut coefficients = BTreeMap::new();
    for sigma in &basis {
        for alpha in &basis {
            if !alpha.dominates(sigma) {
                continue;
            }
            let mut prod = CycloNumber::one();
            for &q in &primes {
                if alpha.rank_at(q) == sigma.rank_at(q) {
                    continue;
                }
                // ρ agrees with α off q and with σ at q
                let rho = alpha.moved(q, sigma.rank_at(q).unwrap());
                let v = local[&q].get(&(rho, alpha.clone())).cloned().unwrap_or_else(CycloNumber::zero);
                prod = prod.mul(&v);
                if prod.is_zero() {
                    break;
                }
            }
            if !prod.is_zero() {
                coefficients.insert((sigma.clone(), alpha.clone()), prod);
            }
        }
    }
    Ok(DiagonalizationData { params: params.clone(), primes, basis, local, coefficients })
}

fn chi_at(chi: &DirichletCharacter, a: i64, e: i64) -> Result<CycloNumber> {
    Ok(chi.eval(unit_power(a, e, chi.modulus())?))
}

/// The T(p) matrix for p ∤ N; on the square-free basis it is diagonal.
pub fn tp_action(params: &ModularParams, p: u64) -> Result<ActionMatrix> {
    require_good_prime(params, p)?;
    params.require_squarefree()?;
    params.require_valid()?;
    let basis = nonzero_basis(params)?;
    let n = params.degree as i64;
    let k = params.weight;
    let pi = p as i64;
    let level = params.level;
    let mut out = ActionMatrix::zero(format!("T({})", p), basis.clone());
    for (i, sigma) in basis.iter().enumerate() {
        let mut acc = CycloNumber::zero();
        for r in 0..=n {
            let w = unit_power(pi, -r, level)?;
            let scalar = action_scalar(sigma, pi, w, params)?;
            let term = chi_at(&params.chi, pi, n - r)?
                .mul(&rat(p, k * (n - r) - (n - r) * (n + r + 1) / 2))
                .mul(&int(beta(p, n, r)))
                .mul(&scalar);
            acc = acc.add(&term);
        }
        out.entries[i][i] = acc;
    }
    Ok(out)
}

/// λ_{σ,ψ}(p) = ψ1(p)ψ̄2(p^n)·∏_{i=1}^n (ψ2χ(p)p^{k−i} + 1).
pub fn lambda_psi_p(params: &ModularParams, _sigma: &Partition, psi: &CharacterPair, p: u64) -> Result<CycloNumber> {
    require_good_prime(params, p)?;
    let n = params.degree as i64;
    let k = params.weight;
    let pi = p as i64;
    let level = params.level;
    let psi2chi = psi.psi2.eval(pi).mul(&params.chi.eval(pi));
    let mut prod = psi.psi1.eval(pi).mul(&psi.psi2.eval(unit_power(pi, n, level)?).conj());
    for i in 1..=n {
        prod = prod.mul(&psi2chi.mul(&rat(p, k - i)).add(&CycloNumber::one()));
    }
    Ok(prod)
}

/// The T_j(p²) matrix for p ∤ N.
pub fn tjp2_action(params: &ModularParams, p: u64, j: usize) -> Result<ActionMatrix> {
    require_good_prime(params, p)?;
    require_j(params, j)?;
    params.require_squarefree()?;
    params.require_valid()?;
    let basis = nonzero_basis(params)?;
    let n = params.degree as i64;
    let k = params.weight;
    let pi = p as i64;
    let ji = j as i64;
    let level = params.level;
    let mut out = ActionMatrix::zero(format!("Tj({}^2;{})", p, j), basis.clone());
    for (i, sigma) in basis.iter().enumerate() {
        let mut acc = CycloNumber::zero();
        for r in 0..=ji {
            for s in 0..=(ji - r) {
                let w = unit_power(pi, s - r, level)?;
                let term = chi_at(&params.chi, pi, ji - r + s)?
                    .mul(&rat(p, k * (ji - r + s) - (ji - r) * (n + 1)))
                    .mul(&int(beta(p, ji, r) * beta(p, ji - r, s) * sym_count_value(p, (ji - r - s) as usize)?))
                    .mul(&action_scalar(sigma, 1, w, params)?);
                acc = acc.add(&term);
            }
        }
        out.entries[i][i] = int(beta(p, n, ji)).mul(&acc);
    }
    Ok(out)
}

/// T̃_j(p²) = Σ_{ℓ≤j} χ(p^{j−ℓ}) p^{(j−ℓ)(k−n−1)} β(n−ℓ, j−ℓ) T_ℓ(p²), T_0 the identity.
pub fn t_tilde_action(params: &ModularParams, p: u64, j: usize) -> Result<ActionMatrix> {
    require_good_prime(params, p)?;
    params.require_squarefree()?;
    let basis = nonzero_basis(params)?;
    let n = params.degree as i64;
    let k = params.weight;
    let ji = j as i64;
    let mut out = ActionMatrix::zero(format!("Ttilde({}^2;{})", p, j), basis.clone());
    for l in 0..=j {
        let li = l as i64;
        let c = chi_at(&params.chi, p as i64, ji - li)?.mul(&rat(p, (ji - li) * (k - n - 1))).mul(&int(beta(
            p,
            n - li,
            ji - li,
        )));
        let t = if l == 0 { ActionMatrix::identity("I", basis.clone()) } else { tjp2_action(params, p, l)? };
        out = out.add(&t.scale(&c));
    }
    Ok(out)
}

/// R(u): E_σ ↦ E_{(1,u)·σ}, diagonal on the square-free basis.
pub fn r_action(params: &ModularParams, u: i64) -> Result<ActionMatrix> {
    params.require_squarefree()?;
    if gcd(modulo(u, params.level), params.level) != 1 {
        return Err(Error::NotCoprime(format!("{} is not a unit modulo {}", u, params.level)));
    }
    let basis = nonzero_basis(params)?;
    let mut out = ActionMatrix::zero(format!("R({})", u), basis.clone());
    for (i, sigma) in basis.iter().enumerate() {
        out.entries[i][i] = action_scalar(sigma, 1, u, params)?;
    }
    Ok(out)
}

/// T'_j(p²) = Σ_i (−1)^i p^{i(i−1)/2} β(n−j+i, i) T̃_{j−i}(p²) R(p̄^i).
pub fn tprime_action(params: &ModularParams, p: u64, j: usize) -> Result<ActionMatrix> {
    require_good_prime(params, p)?;
    params.require_squarefree()?;
    let basis = nonzero_basis(params)?;
    let n = params.degree as i64;
    let ji = j as i64;
    let mut out = ActionMatrix::zero(format!("Tprime({}^2;{})", p, j), basis.clone());
    for i in 0..=ji {
        let sign = if i % 2 == 0 { BigInt::one() } else { -BigInt::one() };
        let c = int(sign * beta(p, n - ji + i, i)).mul(&rat(p, i * (i - 1) / 2));
        if c.is_zero() {
            continue;
        }
        let tt = t_tilde_action(params, p, (ji - i) as usize)?;
        let r = r_action(params, unit_power(p as i64, -i, params.level)?)?;
        out = out.add(&tt.mul(&r).scale(&c));
    }
    Ok(out)
}

/// λ'_{j;σ,ψ}(p²) = β(n,j) p^{(k−n)j+j(j−1)/2} χ(p^j) ∏_{i=1}^j (ψ2χ(p)p^{k−i} + 1).
pub fn lambda_prime(
    params: &ModularParams,
    _sigma: &Partition,
    psi: &CharacterPair,
    p: u64,
    j: usize,
) -> Result<CycloNumber> {
    require_good_prime(params, p)?;
    let n = params.degree as i64;
    let k = params.weight;
    let ji = j as i64;
    let pi = p as i64;
    let psi2chi = psi.psi2.eval(pi).mul(&params.chi.eval(pi));
    let mut prod =
        int(beta(p, n, ji)).mul(&rat(p, (k - n) * ji + ji * (ji - 1) / 2)).mul(&chi_at(&params.chi, pi, ji)?);
    for i in 1..=ji {
        prod = prod.mul(&psi2chi.mul(&rat(p, k - i)).add(&CycloNumber::one()));
    }
    Ok(prod)
}

/// Eigenvalues of one Ẽ_σ keyed by operator label.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EigenSystem {
    pub sigma: Partition,
    pub entries: BTreeMap<String, CycloNumber>,
}

/// The {T(q) : q | N} eigenvalue systems of all nonzero Ẽ_σ.
pub fn bad_prime_systems(params: &ModularParams) -> Result<Vec<EigenSystem>> {
    let mut out = Vec::new();
    for sigma in nonzero_basis(params)? {
        let mut entries = BTreeMap::new();
        for q in params.primes() {
            entries.insert(format!("T({})", q), lambda_q(params, &sigma, q)?);
        }
        out.push(EigenSystem { sigma, entries });
    }
    Ok(out)
}

/// Distinct Ẽ_σ have distinct {λ_σ(q)} systems; checked exactly and through
/// the magnitude λλ̄ = q^{2kd−d(d+1)}.
pub fn multiplicity_one_check(params: &ModularParams) -> Result<bool> {
    let systems = bad_prime_systems(params)?;
    let k = params.weight;
    for s in &systems {
        for (q, d) in s.sigma.ranks() {
            let lam = &s.entries[&format!("T({})", q)];
            let d = d as i64;
            if lam.mul(&lam.conj()) != rat(q, 2 * k * d - d * (d + 1)) {
                return Ok(false);
            }
        }
    }
    for (i, a) in systems.iter().enumerate() {
        for b in &systems[i + 1..] {
            if a.entries == b.entries {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// n = 1 twisted divisor form χ_{N1}(p) + χ_{N0}(p)·p^{k−1}.
pub fn classical_eigenvalue(params: &ModularParams, sigma: &Partition, p: u64) -> Result<CycloNumber> {
    if params.degree != 1 {
        return Err(Error::invalid("the divisor-function form is for degree 1"));
    }
    let pi = p as i64;
    let chi1 = params.chi.factor_local(sigma.part(1))?;
    let chi0 = params.chi.factor_local(sigma.part(0))?;
    Ok(chi1.eval(pi).add(&chi0.eval(pi).mul(&rat(p, params.weight - 1))))
}
