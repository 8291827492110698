//! The Eisenstein basis E_σ: multiplicative partitions of the level, the
//! matrices M_σ, nonvanishing, and the U_N × U_N action.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::characters::{CharacterPair, DirichletCharacter};
use crate::error::{Error, Result};
use crate::exactmath::arith::{crt, gcd, is_squarefree, modulo, prime_divisors};
use crate::exactmath::{CycloNumber, IntMatrix};

/// Degree, weight, level and character of the space being acted on.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModularParams {
    pub degree: usize,
    pub weight: i64,
    pub level: u64,
    pub chi: DirichletCharacter,
}

impl ModularParams {
    pub fn new(degree: usize, weight: i64, chi: DirichletCharacter) -> Result<Self> {
        if degree == 0 || weight < 1 {
            return Err(Error::invalid("degree and weight must be positive"));
        }
        Ok(ModularParams { degree, weight, level: chi.modulus(), chi })
    }

    /// k > n + 1, the range where the series converge and the theory applies.
    pub fn weight_in_range(&self) -> bool {
        self.weight > self.degree as i64 + 1
    }

    /// χ(−1) = (−1)^k and (N > 2 or k even): the space can be nonzero.
    pub fn space_can_be_nonzero(&self) -> bool {
        let sign = if self.weight % 2 == 0 { 1 } else { -1 };
        self.chi.parity() == sign && (self.level > 2 || self.weight % 2 == 0)
    }

    pub fn validated(&self) -> bool {
        self.weight_in_range() && self.space_can_be_nonzero()
    }

    pub fn require_valid(&self) -> Result<()> {
        if !self.weight_in_range() {
            return Err(Error::invalid(format!("weight {} must exceed degree + 1 = {}", self.weight, self.degree + 1)));
        }
        Ok(())
    }

    pub fn require_squarefree(&self) -> Result<()> {
        if !is_squarefree(self.level) {
            return Err(Error::NotSquareFree(self.level));
        }
        Ok(())
    }

    pub fn primes(&self) -> Vec<u64> {
        prime_divisors(self.level)
    }
}

/// σ = (N_0, …, N_n) with N_0⋯N_n = N.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Partition {
    parts: Vec<u64>,
}

impl Partition {
    pub fn new(parts: Vec<u64>) -> Result<Self> {
        if parts.len() < 2 || parts.contains(&0) {
            return Err(Error::invalid("a partition needs n + 1 ≥ 2 positive parts"));
        }
        Ok(Partition { parts })
    }

    /// The partition of a square-free level putting prime q into slot ranks[q].
    pub fn from_ranks(degree: usize, ranks: &[(u64, usize)]) -> Self {
        let mut parts = vec![1u64; degree + 1];
        for &(q, d) in ranks {
            parts[d] *= q;
        }
        Partition { parts }
    }

    pub fn parts(&self) -> &[u64] {
        &self.parts
    }

    pub fn degree(&self) -> usize {
        self.parts.len() - 1
    }

    pub fn level(&self) -> u64 {
        self.parts.iter().product()
    }

    pub fn part(&self, d: usize) -> u64 {
        self.parts[d]
    }

    /// The slot d with q | N_d.
    pub fn rank_at(&self, q: u64) -> Option<usize> {
        self.parts.iter().position(|&x| x % q == 0)
    }

    /// (q, rank_q) for every prime of the level, primes ascending.
    pub fn ranks(&self) -> Vec<(u64, usize)> {
        prime_divisors(self.level()).into_iter().map(|q| (q, self.rank_at(q).unwrap())).collect()
    }

    fn rank_vector(&self) -> Vec<usize> {
        self.ranks().into_iter().map(|(_, d)| d).collect()
    }

    /// The partition with q moved to slot d.
    pub fn moved(&self, q: u64, d: usize) -> Partition {
        let mut r = self.ranks();
        for x in r.iter_mut() {
            if x.0 == q {
                x.1 = d;
            }
        }
        Partition::from_ranks(self.degree(), &r)
    }

    /// α ≥ σ at every prime.
    pub fn dominates(&self, other: &Partition) -> bool {
        self.ranks().iter().zip(other.ranks()).all(|(a, b)| a.1 >= b.1)
    }
}

impl Ord for Partition {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.level(), self.rank_vector()).cmp(&(other.level(), other.rank_vector()))
    }
}

impl PartialOrd for Partition {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p: Vec<String> = self.parts.iter().map(|x| x.to_string()).collect();
        write!(f, "({})", p.join(","))
    }
}

/// Every multiplicative partition of a square-free level, in canonical order.
pub fn all_partitions(level: u64, degree: usize) -> Result<Vec<Partition>> {
    if !is_squarefree(level) {
        return Err(Error::NotSquareFree(level));
    }
    let primes = prime_divisors(level);
    let mut out = Vec::new();
    let mut slots = vec![0usize; primes.len()];
    loop {
        let ranks: Vec<(u64, usize)> = primes.iter().copied().zip(slots.iter().copied()).collect();
        out.push(Partition::from_ranks(degree, &ranks));
        let mut i = primes.len();
        loop {
            if i == 0 {
                return Ok(out);
            }
            i -= 1;
            slots[i] += 1;
            if slots[i] <= degree {
                break;
            }
            slots[i] = 0;
        }
    }
}

/// Diagonal M_σ with M_σ ≡ diag(I_d, 0) mod N_d, least nonnegative residues.
pub fn partition_matrix(sigma: &Partition) -> Result<IntMatrix> {
    let level = sigma.level();
    if !is_squarefree(level) {
        return Err(Error::NotSquareFree(level));
    }
    let n = sigma.degree();
    let ranks = sigma.ranks();
    let mut diag = Vec::with_capacity(n);
    for i in 0..n {
        let congruences: Vec<(u64, u64)> = ranks.iter().map(|&(q, d)| (u64::from(i < d), q)).collect();
        diag.push(BigInt::from(crt(&congruences)?));
    }
    Ok(IntMatrix::diag(&diag))
}

/// Three-valued nonvanishing answer; `Unknown` only arises for non-square-free levels.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Nonvanishing {
    Yes,
    No,
    Unknown,
}

/// Whether E_σ ≠ 0. For square-free N this is decided exactly; otherwise only the
/// necessary conditions are checked and a pass reports `Unknown`.
pub fn nonvanishing(sigma: &Partition, params: &ModularParams) -> Nonvanishing {
    if !params.space_can_be_nonzero() {
        return Nonvanishing::No;
    }
    let n = params.degree;
    let level = params.level;
    if is_squarefree(level) {
        let ok = sigma
            .ranks()
            .iter()
            .all(|&(q, d)| d == 0 || d == n || params.chi.local_at(q).is_ok_and(|c| c.square_is_trivial()));
        return if ok { Nonvanishing::Yes } else { Nonvanishing::No };
    }
    // necessary condition only: for q | N_d with 0 < d < n and q ∥ N, χ_q² = 1
    for (d, &nd) in sigma.parts().iter().enumerate() {
        if d == 0 || d == n {
            continue;
        }
        for q in prime_divisors(nd) {
            if let Ok(c) = params.chi.factor_local(q_power_part(level, q)) {
                if !c.pow(2).is_trivial() {
                    return Nonvanishing::No;
                }
            }
        }
    }
    Nonvanishing::Unknown
}

fn q_power_part(n: u64, q: u64) -> u64 {
    let mut x = 1;
    let mut m = n;
    while m % q == 0 {
        m /= q;
        x *= q;
    }
    x
}

/// Boolean form for square-free levels.
pub fn is_nonzero(sigma: &Partition, params: &ModularParams) -> bool {
    nonvanishing(sigma, params) == Nonvanishing::Yes
}

/// The partitions with E_σ ≠ 0, in canonical order.
pub fn nonzero_basis(params: &ModularParams) -> Result<Vec<Partition>> {
    Ok(all_partitions(params.level, params.degree)?.into_iter().filter(|s| is_nonzero(s, params)).collect())
}

/// (v, w)·M = v·diag(w, I)·M·diag(w, I), exact integers.
pub fn act_on_matrix(v: i64, w: i64, m: &IntMatrix, level: u64) -> Result<IntMatrix> {
    if gcd(modulo(v, level), level) != 1 || gcd(modulo(w, level), level) != 1 {
        return Err(Error::NotCoprime(format!("({}, {}) is not a pair of units mod {}", v, w, level)));
    }
    let n = m.rows();
    let mut d = vec![BigInt::from(1); n];
    if n > 0 {
        d[0] = BigInt::from(w);
    }
    let dw = IntMatrix::diag(&d);
    Ok(dw.mul(m).mul(&dw).scale(&BigInt::from(v)))
}

/// The scalar with E_{(v,w)·σ} = scalar·E_σ:
/// χ̄_{N_n}(w²)·∏_{0<d≤n} χ̄_{N_d}(v^d).
pub fn action_scalar(sigma: &Partition, v: i64, w: i64, params: &ModularParams) -> Result<CycloNumber> {
    params.require_squarefree()?;
    let level = params.level;
    if gcd(modulo(v, level), level) != 1 || gcd(modulo(w, level), level) != 1 {
        return Err(Error::NotCoprime(format!("({}, {}) is not a pair of units mod {}", v, w, level)));
    }
    if !is_nonzero(sigma, params) {
        return Err(Error::ZeroSeries);
    }
    let n = params.degree;
    let chi_n = params.chi.factor_local(sigma.part(n))?;
    let mut acc = chi_n.eval(w).pow(2).conj();
    for d in 1..=n {
        let chi_d = params.chi.factor_local(sigma.part(d))?;
        acc = acc.mul(&chi_d.eval(v).pow(d as u32).conj());
    }
    Ok(acc)
}

/// ψ1 = ∏_{0<d≤n} χ̄_{N_d}^d and ψ2 = χ̄_{N_n}², lifted to modulus N.
pub fn compatible_psi(sigma: &Partition, params: &ModularParams) -> Result<CharacterPair> {
    params.require_squarefree()?;
    if !is_nonzero(sigma, params) {
        return Err(Error::ZeroSeries);
    }
    let level = params.level;
    let n = params.degree;
    let mut psi1 = DirichletCharacter::trivial(level)?;
    for d in 1..=n {
        let local = params.chi.factor_local(sigma.part(d))?.conj().pow(d as i64).extend_to(level)?;
        psi1 = psi1.mul(&local)?;
    }
    let psi2 = params.chi.factor_local(sigma.part(n))?.conj().pow(2).extend_to(level)?;
    CharacterPair::new(psi1, psi2)
}

/// A formal linear combination of basis symbols E_σ.
#[derive(Clone, Debug, PartialEq)]
pub struct FormalSeries {
    pub params: ModularParams,
    pub coeffs: BTreeMap<Partition, CycloNumber>,
}

impl FormalSeries {
    pub fn zero(params: ModularParams) -> Self {
        FormalSeries { params, coeffs: BTreeMap::new() }
    }

    pub fn basis(params: ModularParams, sigma: Partition) -> Result<Self> {
        if !is_nonzero(&sigma, &params) {
            return Err(Error::ZeroSeries);
        }
        let mut s = Self::zero(params);
        s.coeffs.insert(sigma, CycloNumber::one());
        Ok(s)
    }

    pub fn coeff(&self, sigma: &Partition) -> CycloNumber {
        self.coeffs.get(sigma).cloned().unwrap_or_else(CycloNumber::zero)
    }

    pub fn add_term(&mut self, sigma: Partition, c: CycloNumber) {
        let v = self.coeff(&sigma).add(&c);
        if v.is_zero() {
            self.coeffs.remove(&sigma);
        } else {
            self.coeffs.insert(sigma, v);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partition_counts() {
        assert_eq!(all_partitions(1, 3).unwrap().len(), 1);
        assert_eq!(all_partitions(6, 1).unwrap().len(), 4);
        assert_eq!(all_partitions(30, 2).unwrap().len(), 27);
        assert!(all_partitions(12, 1).is_err());
    }

    #[test]
    fn m_sigma_congruences() {
        let s = Partition::new(vec![2, 3, 1]).unwrap();
        let m = partition_matrix(&s).unwrap();
        assert!(m.mod_reduce(2).is_zero());
        assert_eq!(m.mod_reduce(3), IntMatrix::diag(&[1, 0]));
    }
}
