//! Explicit coset representatives for T(p) and T_j(p²) on Sp_n(Z), plus
//! brute-force lattice and coset counts that back the counting identities
//! used by the eigenvalue formulas.
//!
//! The representatives follow the block shapes
//! diag(X⁻¹, X)·(G⁻¹ Y·ᵗG; 0 ᵗG), with G ranging over lifts of echelon-form
//! subspace bases. Everything here is guarded to small degree and small
//! primes: the enumerations grow like p^{n²}.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::combinat::{beta, combinations, odometer, sym_count_value};
use crate::error::{Error, Result};
use crate::exactmath::arith::{crt, inv_mod, is_prime};
use crate::exactmath::matrix::{big_mod, rank_residues};
use crate::exactmath::{hermite_normal_form, invariant_factors, IntMatrix};
use crate::symplectic::lift_from_mod;

/// A rational 2n×2n matrix stored as numerator/denominator.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CosetRep {
    pub numerator: IntMatrix,
    pub denominator: u64,
}

impl CosetRep {
    pub fn degree(&self) -> usize {
        self.numerator.rows() / 2
    }

    /// μ with ᵗN·J·N = μ·J for the numerator N, if N is a similitude.
    pub fn numerator_multiplier(&self) -> Option<BigInt> {
        let n = self.degree();
        let j = IntMatrix::symplectic_j(n);
        let s = self.numerator.transpose().mul(&j).mul(&self.numerator);
        let mu = s.get(0, n).clone();
        (s == j.scale(&mu)).then_some(mu)
    }

    /// Row Hermite form of the numerator: two representatives with the same
    /// denominator span the same row lattice iff they differ by GL_{2n}(Z)
    /// on the left.
    pub fn lattice_key(&self) -> IntMatrix {
        hermite_normal_form(&self.numerator)
    }
}

/// Whether a·b⁻¹ lies in Sp_n(Z), i.e. Γa = Γb. For similitudes,
/// b⁻¹ = J⁻¹·ᵗb·J/μ(b), so the test is integrality of N_a·J⁻¹·ᵗN_b·J/μ(N_b)
/// together with equal multipliers.
pub fn equivalent(a: &CosetRep, b: &CosetRep) -> Result<bool> {
    if a.denominator != b.denominator || a.degree() != b.degree() {
        return Err(Error::invalid("representatives have different shapes"));
    }
    let (Some(mu_a), Some(mu_b)) = (a.numerator_multiplier(), b.numerator_multiplier()) else {
        return Err(Error::invalid("numerator is not a symplectic similitude"));
    };
    if mu_a != mu_b {
        return Ok(false);
    }
    Ok(is_divisible(&equivalence_product(a, b), &mu_b))
}

fn equivalence_product(a: &CosetRep, b: &CosetRep) -> IntMatrix {
    let j = IntMatrix::symplectic_j(a.degree());
    a.numerator.mul(&j.neg()).mul(&b.numerator.transpose()).mul(&j)
}

fn is_divisible(m: &IntMatrix, d: &BigInt) -> bool {
    m.entries().iter().all(|x| x.mod_floor(d).is_zero())
}

/// Pairwise product test over the whole list (quadratic).
pub fn pairwise_inequivalent(reps: &[CosetRep]) -> Result<bool> {
    let j = reps.first().map(|r| IntMatrix::symplectic_j(r.degree()));
    let mut mus = Vec::with_capacity(reps.len());
    let mut right = Vec::with_capacity(reps.len());
    for r in reps {
        let mu = r.numerator_multiplier().ok_or_else(|| Error::invalid("numerator is not a symplectic similitude"))?;
        mus.push(mu);
        right.push(r.numerator.transpose().mul(j.as_ref().unwrap()));
    }
    let jneg = j.map(|j| j.neg());
    for a in 0..reps.len() {
        let left = reps[a].numerator.mul(jneg.as_ref().unwrap());
        for b in a + 1..reps.len() {
            if reps[a].denominator != reps[b].denominator || mus[a] != mus[b] {
                continue;
            }
            if is_divisible(&left.mul(&right[b]), &mus[b]) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Linear-time companion to `pairwise_inequivalent`: distinct row lattices.
pub fn distinct_lattices(reps: &[CosetRep]) -> bool {
    let keys: HashSet<(u64, IntMatrix)> = reps.iter().map(|r| (r.denominator, r.lattice_key())).collect();
    keys.len() == reps.len()
}

pub fn reps_to_json(reps: &[CosetRep]) -> String {
    serde_json::to_string(reps).expect("coset reps serialize")
}

pub fn reps_from_json(s: &str) -> Result<Vec<CosetRep>> {
    serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))
}

// ---------------------------------------------------------------------------
// subspace bases and their unimodular lifts

/// Echelon bases (k rows) of every k-dimensional subspace of F_p^n.
fn echelon_subspaces(n: usize, k: usize, p: u64) -> Vec<Vec<Vec<u64>>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    for pivots in combinations(n, k) {
        let free: Vec<(usize, usize)> =
            (0..k).flat_map(|i| ((pivots[i] + 1)..n).filter(|j| !pivots.contains(j)).map(move |j| (i, j))).collect();
        let mut mat = vec![vec![0u64; n]; k];
        for (i, &pc) in pivots.iter().enumerate() {
            mat[i][pc] = 1;
        }
        let mut digits = vec![0u64; free.len()];
        loop {
            for (t, &(i, j)) in free.iter().enumerate() {
                mat[i][j] = digits[t];
            }
            out.push(mat.clone());
            if !odometer(&mut digits, p) {
                break;
            }
        }
    }
    out
}

/// Extend independent vectors by vectors from `pool`, keeping independence,
/// until `target` vectors are held; returns only the added vectors.
fn extend_from(current: &[Vec<u64>], pool: &[Vec<u64>], target: usize, p: u64) -> Vec<Vec<u64>> {
    let mut held = current.to_vec();
    let mut added = Vec::new();
    for v in pool {
        if held.len() == target {
            break;
        }
        held.push(v.clone());
        if rank_residues(&held, p) == held.len() {
            added.push(v.clone());
        } else {
            held.pop();
        }
    }
    added
}

fn unit_vectors(n: usize) -> Vec<Vec<u64>> {
    (0..n).map(|i| (0..n).map(|j| u64::from(i == j)).collect()).collect()
}

/// G ∈ SL_n(Z) whose columns reduce mod p to `cols`, after rescaling the
/// first column by a unit so the determinant is 1 mod p.
fn columns_to_sl(cols: &[Vec<u64>], p: u64) -> Result<IntMatrix> {
    let n = cols.len();
    let mut res = IntMatrix::from_fn(n, n, |i, j| BigInt::from(cols[j][i]));
    if n == 0 {
        return Ok(res);
    }
    let det = res.det_mod(p);
    let inv = inv_mod(det as i64, p)?;
    for i in 0..n {
        let v = cols[0][i] * inv % p;
        res.set(i, 0, v);
    }
    lift_from_mod(&res, p, 1)
}

fn symmetric_residues(t: usize, modulus: u64) -> Vec<Vec<Vec<u64>>> {
    let slots: Vec<(usize, usize)> = (0..t).flat_map(|i| (i..t).map(move |j| (i, j))).collect();
    let mut digits = vec![0u64; slots.len()];
    let mut out = Vec::new();
    loop {
        let mut y = vec![vec![0u64; t]; t];
        for (k, &(i, j)) in slots.iter().enumerate() {
            y[i][j] = digits[k];
            y[j][i] = digits[k];
        }
        out.push(y);
        if !odometer(&mut digits, modulus) {
            break;
        }
    }
    out
}

fn all_residues(rows: usize, cols: usize, modulus: u64) -> Vec<Vec<Vec<u64>>> {
    let mut digits = vec![0u64; rows * cols];
    let mut out = Vec::new();
    loop {
        out.push((0..rows).map(|i| digits[i * cols..(i + 1) * cols].to_vec()).collect());
        if !odometer(&mut digits, modulus) {
            break;
        }
    }
    out
}

fn to_int(r: &[Vec<u64>], rows: usize, cols: usize) -> IntMatrix {
    IntMatrix::from_fn(rows, cols, |i, j| BigInt::from(r[i][j]))
}

fn scaled_diag(blocks: &[(usize, u64)]) -> IntMatrix {
    let d: Vec<u64> = blocks.iter().flat_map(|&(size, v)| std::iter::repeat_n(v, size)).collect();
    IntMatrix::diag(&d)
}

/// Representatives of SL_n(Z)/K_r(p): the last n−r columns reduce to an
/// echelon basis of each (n−r)-dimensional subspace of F_p^n.
pub fn subspace_g_reps(n: usize, p: u64, r: usize) -> Result<Vec<IntMatrix>> {
    require_prime(p)?;
    let mut out = Vec::new();
    if r > n {
        return Ok(out);
    }
    for basis in echelon_subspaces(n, n - r, p) {
        let mut cols = extend_from(&basis, &unit_vectors(n), n, p);
        cols.extend(basis);
        out.push(columns_to_sl(&cols, p)?);
    }
    Ok(out)
}

/// Basis of the lattice spanned by the columns of G·diag(pI_r, I), in
/// row Hermite form.
pub fn subspace_lattice(g: &IntMatrix, p: u64, r: usize) -> IntMatrix {
    let n = g.rows();
    let x = scaled_diag(&[(r, p), (n - r, 1)]);
    hermite_normal_form(&g.mul(&x).transpose())
}

/// Representatives of SL_n(Z)/K_{d,r}(q): Ω = G·diag(q²I_d, qI, I_r)·Z^n
/// runs once over every lattice q²Λ ⊆ Ω ⊆ Λ with m_2 = d, m_0 = r.
pub fn flag_g_reps(n: usize, q: u64, d: usize, r: usize) -> Result<Vec<IntMatrix>> {
    require_prime(q)?;
    if d + r > n {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    let mid = n - d - r;
    for s1 in echelon_subspaces(n, n - d, q) {
        for coeffs in echelon_subspaces(n - d, r, q) {
            // S2 = span(coeffs · s1)
            let s2: Vec<Vec<u64>> = coeffs
                .iter()
                .map(|c| (0..n).map(|k| c.iter().zip(&s1).map(|(a, row)| a * row[k]).sum::<u64>() % q).collect())
                .collect();
            let b = extend_from(&s2, &s1, n - d, q);
            debug_assert_eq!(b.len(), mid);
            let mut held = s2.clone();
            held.extend(b.iter().cloned());
            let a = extend_from(&held, &unit_vectors(n), n, q);
            let mut cols = a;
            cols.extend(b);
            cols.extend(s2);
            let e = columns_to_sl(&cols, q)?;
            for t in all_residues(d, r, q) {
                // C += q·A·T leaves the flag alone and moves Ω within it
                let mut g = e.clone();
                for cj in 0..r {
                    for i in 0..n {
                        let mut v = g.get(i, d + mid + cj).clone();
                        for (k, trow) in t.iter().enumerate() {
                            v += e.get(i, k) * BigInt::from(q * trow[cj]);
                        }
                        g.set(i, d + mid + cj, v);
                    }
                }
                out.push(g);
            }
        }
    }
    Ok(out)
}

/// Row Hermite form of the lattice G·diag(q²I_d, qI, I_r)·Z^n.
pub fn flag_lattice(g: &IntMatrix, q: u64, d: usize, r: usize) -> IntMatrix {
    let n = g.rows();
    let x = scaled_diag(&[(d, q * q), (n - d - r, q), (r, 1)]);
    hermite_normal_form(&g.mul(&x).transpose())
}

/// Representatives of SL_n(Z)/ᵗK_j(p): the first j columns reduce to an
/// echelon basis of each j-dimensional subspace.
fn leading_g_reps(n: usize, p: u64, j: usize) -> Result<Vec<IntMatrix>> {
    let mut out = Vec::new();
    for basis in echelon_subspaces(n, j, p) {
        let mut cols = basis.clone();
        cols.extend(extend_from(&basis, &unit_vectors(n), n, p));
        out.push(columns_to_sl(&cols, p)?);
    }
    Ok(out)
}

fn require_prime(p: u64) -> Result<()> {
    if is_prime(p) {
        Ok(())
    } else {
        Err(Error::invalid(format!("{} is not prime", p)))
    }
}

// ---------------------------------------------------------------------------
// T(p)

/// One T(p) representative with the data it was built from.
#[derive(Clone, Debug)]
pub struct TpRepParts {
    pub r: usize,
    pub g: IntMatrix,
    /// The n×n symmetric matrix with Y_0 in its top-left r×r block.
    pub y: IntMatrix,
    pub rep: CosetRep,
}

fn tp_numerator(p: u64, r: usize, g: &IntMatrix, y: &IntMatrix) -> IntMatrix {
    let n = g.rows();
    let ginv = g.adjugate();
    let gt = g.transpose();
    let ul = scaled_diag(&[(r, 1), (n - r, p)]).mul(&ginv);
    let ur = y.mul(&gt);
    let lr = scaled_diag(&[(r, p), (n - r, 1)]).mul(&gt);
    IntMatrix::blocks(&ul, &ur, &IntMatrix::zeros(n, n), &lr)
}

/// Representatives of Γ\Γ·diag(I, pI)·Γ scaled by 1/p, one per (r, G, Y_0);
/// total Σ_r β(n,r)·p^{r(r+1)/2} = ∏(p^i + 1).
pub fn tp_reps(n: usize, p: u64) -> Result<Vec<CosetRep>> {
    Ok(tp_rep_parts(n, p, 1)?.into_iter().map(|t| t.rep).collect())
}

/// As `tp_reps`, but when `level > 1` every G is replaced by a lift with
/// G ≡ I (mod level) and every Y by one with Y ≡ 0 (mod level), keeping
/// the residues mod p. This is the choice that keeps the representatives
/// inside Γ_0(level)-friendly shapes.
pub fn tp_rep_parts(n: usize, p: u64, level: u64) -> Result<Vec<TpRepParts>> {
    require_prime(p)?;
    if n > 3 {
        return Err(Error::OracleOutOfRange(format!("T(p) representatives for n = {} > 3", n)));
    }
    if level % p == 0 {
        return Err(Error::NotCoprime(format!("level {} and p = {}", level, p)));
    }
    let mut out = Vec::new();
    for r in 0..=n {
        let gs = subspace_g_reps(n, p, r)?;
        let ys = symmetric_residues(r, p);
        for g0 in &gs {
            let g = if level > 1 { lift_from_mod(&g0.mod_reduce(p), p, level)? } else { g0.clone() };
            for y0 in &ys {
                let mut y = IntMatrix::zeros(n, n);
                for i in 0..r {
                    for k in 0..r {
                        y.set(i, k, crt(&[(y0[i][k], p), (0, level)])?);
                    }
                }
                let rep = CosetRep { numerator: tp_numerator(p, r, &g, &y), denominator: p };
                out.push(TpRepParts { r, g: g.clone(), y, rep });
            }
        }
    }
    Ok(out)
}

/// Σ_r β(n,r)·p^{r(r+1)/2}.
pub fn tp_count(n: usize, p: u64) -> BigInt {
    (0..=n as i64).map(|r| beta(p, n as i64, r) * BigInt::from(p).pow((r * (r + 1) / 2) as u32)).sum()
}

// ---------------------------------------------------------------------------
// T_j(p²)

/// Number of representatives contributed by the block (n_0, n_2).
pub fn tjp2_block_count(n: usize, p: u64, j: usize, n0: usize, n2: usize) -> Result<BigInt> {
    if n0 + n2 > j || j > n {
        return Ok(BigInt::zero());
    }
    let (ni, nn, jj) = (n as i64, (n - n0 - n2) as i64, (j - n0 - n2) as i64);
    let pp = BigInt::from(p);
    let g1 = pp.pow((n0 * n2) as u32) * beta(p, ni, n0 as i64) * beta(p, ni - n0 as i64, n2 as i64);
    let g2 = beta(p, nn, jj);
    let y = pp.pow((n0 * (n0 + 1) + n0 * nn as usize) as u32) * sym_count_value(p, jj as usize)?;
    Ok(g1 * g2 * y)
}

pub fn tjp2_count(n: usize, p: u64, j: usize) -> Result<BigInt> {
    let mut total = BigInt::zero();
    for n0 in 0..=j {
        for n2 in 0..=(j - n0) {
            total += tjp2_block_count(n, p, j, n0, n2)?;
        }
    }
    Ok(total)
}

/// Representatives for T_j(p²), block by block over (n_0, n_2). Coordinates
/// split as (n_0, j', n'−j', n_2); Y carries Y_0 (mod p²), Y_2 (n_0×j') and
/// Y_3 (n_0×(n'−j')) mod p, and Y_1/p with Y_1 symmetric and invertible
/// mod p. An n_0×n_2 corner would be absorbed by Γ: the translation
/// (I S; 0 I) with S supported there shifts X⁻¹Y by exactly that corner.
pub fn tjp2_reps(n: usize, p: u64, j: usize) -> Result<Vec<CosetRep>> {
    require_prime(p)?;
    if n > 2 || j > n {
        return Err(Error::OracleOutOfRange(format!("T_j(p²) representatives for n = {}, j = {}", n, j)));
    }
    let mut out = Vec::new();
    for n0 in 0..=j {
        for n2 in 0..=(j - n0) {
            let np = n - n0 - n2;
            let jp = j - n0 - n2;
            let g1s = flag_g_reps(n, p, n0, n2)?;
            let gps = leading_g_reps(np, p, jp)?;
            let y0s = symmetric_residues(n0, p * p);
            let y2s = all_residues(n0, jp, p);
            let y3s = all_residues(n0, np - jp, p);
            let y1s: Vec<_> =
                symmetric_residues(jp, p).into_iter().filter(|y| to_int(y, jp, jp).det_mod(p) != 0).collect();
            let upper = scaled_diag(&[(n0, 1), (np, p), (n2, p * p)]);
            let lower = scaled_diag(&[(n0, p * p), (np, p), (n2, 1)]);
            for g1 in &g1s {
                for gp in &gps {
                    let mut g2 = IntMatrix::identity(n);
                    for a in 0..np {
                        for b in 0..np {
                            g2.set(n0 + a, n0 + b, gp.get(a, b).clone());
                        }
                    }
                    let g = g1.mul(&g2);
                    let gt = g.transpose();
                    let ul = upper.mul(&g.adjugate());
                    let lr = lower.mul(&gt);
                    for y0 in &y0s {
                        for y2 in &y2s {
                            for y3 in &y3s {
                                for y1 in &y1s {
                                    let z = scaled_y(n, p, (n0, jp, np - jp), y0, y1, y2, y3);
                                    let num = IntMatrix::blocks(&ul, &z.mul(&gt), &IntMatrix::zeros(n, n), &lr);
                                    out.push(CosetRep { numerator: num, denominator: p });
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

/// p·X⁻¹·Y for the block layout of `tjp2_reps`; integral by construction.
fn scaled_y(
    n: usize,
    p: u64,
    (n0, jp, width3): (usize, usize, usize),
    y0: &[Vec<u64>],
    y1: &[Vec<u64>],
    y2: &[Vec<u64>],
    y3: &[Vec<u64>],
) -> IntMatrix {
    let mut z = IntMatrix::zeros(n, n);
    for i in 0..n0 {
        for k in 0..n0 {
            z.set(i, k, y0[i][k]);
        }
        for k in 0..jp {
            z.set(i, n0 + k, y2[i][k]);
            z.set(n0 + k, i, p * y2[i][k]);
        }
        for k in 0..width3 {
            z.set(i, n0 + jp + k, y3[i][k]);
            z.set(n0 + jp + k, i, p * y3[i][k]);
        }
    }
    for a in 0..jp {
        for b in 0..jp {
            z.set(n0 + a, n0 + b, y1[a][b]);
        }
    }
    z
}

/// Smith exponents of a T_j(p²) numerator: (0^j, 1^{2(n−j)}, 2^j).
pub fn tjp2_smith_exponents(n: usize, j: usize) -> Vec<u32> {
    let mut e = vec![0; j];
    e.extend(vec![1; 2 * (n - j)]);
    e.extend(vec![2; j]);
    e
}

/// Number of cosets Γ·M with M integral, ᵗM·J·M = p^mu·J and Smith form
/// diag(p^{e_i}). Each coset is one row lattice L = Z^{2n}·M, and these are
/// exactly the lattices of that Smith type on which the symplectic form is
/// ≡ 0 (mod p^mu). Walks every row Hermite form with the right determinant.
pub fn similitude_coset_oracle(n: usize, p: u64, exps: &[u32], mu: u32) -> Result<BigInt> {
    let dim = 2 * n;
    if !is_prime(p) || exps.len() != dim {
        return Err(Error::invalid("need a prime and 2n Smith exponents"));
    }
    let top = exps.iter().copied().max().unwrap_or(0);
    let walk: f64 = (0..dim).map(|j| (0..=top).map(|e| (p as f64).powi((e * j as u32) as i32)).sum::<f64>()).product();
    if dim > 6 || walk > 5e6 {
        return Err(Error::OracleOutOfRange(format!("similitude lattices for n = {}, p = {}", n, p)));
    }
    let mut want: Vec<BigInt> = exps.iter().map(|&e| BigInt::from(p).pow(e)).collect();
    want.sort();
    let total: u32 = exps.iter().sum();
    let modulus = p.pow(mu) as i64;
    let mut count = 0u64;
    let mut dig = vec![0u64; dim];
    loop {
        if dig.iter().sum::<u64>() == total as u64 {
            let diag: Vec<i64> = dig.iter().map(|&e| p.pow(e as u32) as i64).collect();
            let slots: Vec<(usize, usize)> = (0..dim).flat_map(|i| (i + 1..dim).map(move |j| (i, j))).collect();
            let radices: Vec<u64> = slots.iter().map(|&(_, j)| diag[j] as u64).collect();
            let mut free = vec![0u64; slots.len()];
            let mut b = vec![vec![0i64; dim]; dim];
            for i in 0..dim {
                b[i][i] = diag[i];
            }
            loop {
                for (k, &(i, j)) in slots.iter().enumerate() {
                    b[i][j] = free[k] as i64;
                }
                let isotropic = (0..dim).all(|a| {
                    (a + 1..dim).all(|c| {
                        let form: i64 = (0..n).map(|i| b[a][i] * b[c][n + i] - b[a][n + i] * b[c][i]).sum();
                        form % modulus == 0
                    })
                });
                if isotropic {
                    let mut f = invariant_factors(&IntMatrix::from_rows(&b));
                    f.sort();
                    if f == want {
                        count += 1;
                    }
                }
                if !mixed_odometer(&mut free, &radices) {
                    break;
                }
            }
        }
        if !odometer(&mut dig, top as u64 + 1) {
            break;
        }
    }
    Ok(BigInt::from(count))
}

// ---------------------------------------------------------------------------
// brute-force residue groups

type Flat = Vec<u8>;

fn flat_mul(a: &[u8], b: &[u8], n: usize, m: u64) -> Flat {
    let mut c = vec![0u8; n * n];
    for i in 0..n {
        for j in 0..n {
            let s: u64 = (0..n).map(|k| a[i * n + k] as u64 * b[k * n + j] as u64).sum();
            c[i * n + j] = (s % m) as u8;
        }
    }
    c
}

fn flat_det(a: &[u8], n: usize) -> i64 {
    match n {
        0 => 1,
        1 => a[0] as i64,
        _ => (0..n)
            .map(|c| {
                let minor: Flat =
                    (1..n).flat_map(|i| (0..n).filter(move |&j| j != c).map(move |j| a[i * n + j])).collect();
                let sign = if c % 2 == 0 { 1 } else { -1 };
                sign * a[c] as i64 * flat_det(&minor, n - 1)
            })
            .sum(),
    }
}

/// Inverse of a determinant-1 residue matrix: its adjugate.
fn flat_inverse(a: &[u8], n: usize, m: u64) -> Flat {
    if n == 1 {
        return vec![1];
    }
    let mut inv = vec![0u8; n * n];
    for i in 0..n {
        for j in 0..n {
            let minor: Flat = (0..n)
                .filter(|&r| r != j)
                .flat_map(|r| (0..n).filter(move |&c| c != i).map(move |c| a[r * n + c]))
                .collect();
            let sign = if (i + j) % 2 == 0 { 1 } else { -1 };
            inv[i * n + j] = (sign * flat_det(&minor, n - 1)).rem_euclid(m as i64) as u8;
        }
    }
    inv
}

/// SL_n(Z/m) element lists keyed by (n, m).
type GroupCache = Mutex<HashMap<(usize, u64), Arc<Vec<Flat>>>>;

fn special_linear(n: usize, m: u64) -> Arc<Vec<Flat>> {
    static CACHE: OnceLock<GroupCache> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(g) = cache.lock().unwrap().get(&(n, m)) {
        return g.clone();
    }
    let mut digits = vec![0u64; n * n];
    let mut out = Vec::new();
    loop {
        let a: Flat = digits.iter().map(|&d| d as u8).collect();
        if flat_det(&a, n).rem_euclid(m as i64) == 1 % m as i64 {
            out.push(a);
        }
        if !odometer(&mut digits, m) {
            break;
        }
    }
    let g = Arc::new(out);
    cache.lock().unwrap().insert((n, m), g.clone());
    g
}

fn sub_block(a: &[u8], n: usize, rows: std::ops::Range<usize>, cols: std::ops::Range<usize>, p: u64) -> Vec<Vec<u64>> {
    rows.map(|i| cols.clone().map(|j| a[i * n + j] as u64 % p).collect()).collect()
}

fn block_rank(a: &[u8], n: usize, rows: std::ops::Range<usize>, cols: std::ops::Range<usize>, p: u64) -> usize {
    rank_residues(&sub_block(a, n, rows, cols, p), p)
}

enum Side {
    Left,
    Right,
}

struct Tally {
    cosets: usize,
    any: usize,
    all: usize,
}

/// Split `group` into cosets of `sub` (left: K·g, right: g·K) and count the
/// cosets on which `pred` holds for some, resp. every, member.
fn tally_cosets(group: &[Flat], sub: &[Flat], n: usize, m: u64, side: Side, pred: impl Fn(&[u8]) -> bool) -> Tally {
    let mut seen: HashSet<Flat> = HashSet::with_capacity(group.len());
    let mut t = Tally { cosets: 0, any: 0, all: 0 };
    for g in group {
        if seen.contains(g) {
            continue;
        }
        let (mut any, mut all) = (false, true);
        for k in sub {
            let x = match side {
                Side::Left => flat_mul(k, g, n, m),
                Side::Right => flat_mul(g, k, n, m),
            };
            let hit = pred(&x);
            any |= hit;
            all &= hit;
            seen.insert(x);
        }
        t.cosets += 1;
        t.any += usize::from(any);
        t.all += usize::from(all);
    }
    t
}

fn residue_flat(m: &IntMatrix, modulus: u64) -> Flat {
    m.entries().iter().map(|x| big_mod(x, modulus) as u8).collect()
}

// ---------------------------------------------------------------------------
// lattice and coset counting oracles

/// Number of lattices pΛ ⊆ Ω ⊆ Λ of index p^r, found by collecting the
/// spans of all (n−r)-tuples of vectors in F_p^n as explicit vector sets.
pub fn lemma_6_2_oracle(n: usize, p: u64, r: usize) -> Result<BigInt> {
    if !is_prime(p) || p > 3 || n > 3 {
        return Err(Error::OracleOutOfRange(format!("subspace lattices for n = {}, p = {}", n, p)));
    }
    if r > n {
        return Ok(BigInt::zero());
    }
    let k = n - r;
    let want = p.pow(k as u32) as usize;
    let mut spans: HashSet<BTreeSet<Vec<u64>>> = HashSet::new();
    let mut gens = vec![0u64; n * k];
    loop {
        let mut span = BTreeSet::new();
        let mut coeffs = vec![0u64; k];
        loop {
            let v: Vec<u64> = (0..n).map(|c| (0..k).map(|i| coeffs[i] * gens[i * n + c]).sum::<u64>() % p).collect();
            span.insert(v);
            if !odometer(&mut coeffs, p) {
                break;
            }
        }
        if span.len() == want {
            spans.insert(span);
        }
        if !odometer(&mut gens, p) {
            break;
        }
    }
    Ok(BigInt::from(spans.len()))
}

/// β(n, r).
pub fn lemma_6_2_count(n: usize, p: u64, r: usize) -> BigInt {
    beta(p, n as i64, r as i64)
}

/// Number of lattices q²Λ ⊆ Ω ⊆ Λ with invariant-factor multiplicities
/// m_2 = d and m_0 = r, by walking every row Hermite form with diagonal
/// entries dividing q² and reading the Smith form of each.
pub fn lemma_6_3_oracle(n: usize, q: u64, d: usize, r: usize) -> Result<BigInt> {
    if !is_prime(q) || q > 3 || n > 3 {
        return Err(Error::OracleOutOfRange(format!("lattices mod q² for n = {}, q = {}", n, q)));
    }
    let m = q * q;
    let bm = BigInt::from(m);
    let mut count = 0u64;
    let mut dig = vec![0u64; n];
    loop {
        let diag: Vec<u64> = dig.iter().map(|&e| q.pow(e as u32)).collect();
        let slots: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
        let mut free = vec![0u64; slots.len()];
        loop {
            let mut h = IntMatrix::diag(&diag);
            for (s, &(i, j)) in slots.iter().enumerate() {
                h.set(i, j, free[s]);
            }
            // m·Λ ⊆ Ω  ⟺  m·H⁻¹ integral
            let det = h.det();
            if is_divisible(&h.adjugate().scale(&bm), &det) {
                let f = invariant_factors(&h);
                let m0 = f.iter().filter(|x| x.is_one()).count();
                let m2 = f.iter().filter(|x| **x == bm).count();
                if m0 == r && m2 == d {
                    count += 1;
                }
            }
            if !mixed_odometer(&mut free, &slots.iter().map(|&(_, j)| diag[j]).collect::<Vec<_>>()) {
                break;
            }
        }
        if !odometer(&mut dig, 3) {
            break;
        }
    }
    Ok(BigInt::from(count))
}

fn mixed_odometer(digits: &mut [u64], radices: &[u64]) -> bool {
    for (d, &r) in digits.iter_mut().zip(radices) {
        *d += 1;
        if *d < r {
            return true;
        }
        *d = 0;
    }
    false
}

/// q^{dr}·β(n,d)·β(n−d,r).
pub fn lemma_6_3_count(n: usize, q: u64, d: usize, r: usize) -> BigInt {
    if d + r > n {
        return BigInt::zero();
    }
    BigInt::from(q).pow((d * r) as u32) * beta(q, n as i64, d as i64) * beta(q, (n - d) as i64, r as i64)
}

fn check_square_guard(m: &IntMatrix, q: u64, max_n: usize) -> Result<usize> {
    if !m.is_square() {
        return Err(Error::invalid("M' must be square"));
    }
    let n = m.rows();
    if !is_prime(q) || q > 3 || n > max_n {
        return Err(Error::OracleOutOfRange(format!("coset count for n = {}, q = {}", n, q)));
    }
    Ok(n)
}

/// Number of E ∈ K_d\SL_n(Z) with the top d rows of E·M' independent mod q.
/// Cosets are walked as orbits of K̄_d inside SL_n(F_q).
pub fn lemma_6_4a_oracle(q: u64, m_prime: &IntMatrix, d: usize) -> Result<BigInt> {
    let n = check_square_guard(m_prime, q, 3)?;
    if d > n {
        return Err(Error::invalid("d exceeds the degree"));
    }
    let group = special_linear(n, q);
    let sub: Vec<Flat> = group.iter().filter(|k| (0..d).all(|i| (d..n).all(|j| k[i * n + j] == 0))).cloned().collect();
    let mp = residue_flat(m_prime, q);
    let t =
        tally_cosets(&group, &sub, n, q, Side::Left, |e| block_rank(&flat_mul(e, &mp, n, q), n, 0..d, 0..n, q) == d);
    if t.any != t.all {
        return Err(Error::invalid("rank condition is not constant on cosets"));
    }
    Ok(BigInt::from(t.all))
}

/// q^{d(n−d')}·β(d', d).
pub fn lemma_6_4a_count(q: u64, n: usize, d_prime: usize, d: usize) -> BigInt {
    if d > d_prime {
        return BigInt::zero();
    }
    BigInt::from(q).pow((d * (n - d_prime)) as u32) * beta(q, d_prime as i64, d as i64)
}

/// Number of E ∈ K_{m,r}\SL_n(Z) with q-rank m on the top m rows of E·M'
/// and q-rank m+s on the top n−r rows. Cosets are orbits of K̄_{m,r} in
/// SL_n(Z/q²Z); guarded to q = 2, n ≤ 3 and q = 3, n ≤ 2.
pub fn lemma_6_4b_oracle(q: u64, m_prime: &IntMatrix, m: usize, r: usize, s: usize) -> Result<BigInt> {
    let n = check_square_guard(m_prime, q, if q == 2 { 3 } else { 2 })?;
    if m + r > n {
        return Err(Error::invalid("m + r exceeds the degree"));
    }
    let qq = q * q;
    let group = special_linear(n, qq);
    let top = n - r;
    let sub: Vec<Flat> = group
        .iter()
        .filter(|k| {
            (0..m).all(|i| (m..top).all(|j| k[i * n + j] as u64 % q == 0) && (top..n).all(|j| k[i * n + j] == 0))
                && (m..top).all(|i| (top..n).all(|j| k[i * n + j] as u64 % q == 0))
        })
        .cloned()
        .collect();
    let mp = residue_flat(m_prime, qq);
    let t = tally_cosets(&group, &sub, n, qq, Side::Left, |e| {
        let em = flat_mul(e, &mp, n, qq);
        block_rank(&em, n, 0..m, 0..n, q) == m && block_rank(&em, n, 0..top, 0..n, q) == m + s
    });
    if t.any != t.all {
        return Err(Error::invalid("rank condition is not constant on cosets"));
    }
    Ok(BigInt::from(t.all))
}

/// β(n−d', n−r−m−s)·β(d', m+s)·β(m+s, m)·q^{m(n+r−d')+s(r+m+s−d')}, for
/// d'−r ≤ m+s ≤ d'.
pub fn lemma_6_4b_count(q: u64, n: usize, d_prime: usize, m: usize, r: usize, s: usize) -> Result<BigInt> {
    let (n, dp, m, r, s) = (n as i64, d_prime as i64, m as i64, r as i64, s as i64);
    if !(dp - r <= m + s && m + s <= dp) || m + r > n {
        return Err(Error::Hypothesis(format!("need d'−r ≤ m+s ≤ d' (d'={}, m={}, r={}, s={})", dp, m, r, s)));
    }
    let e = m * (n + r - dp) + s * (r + m + s - dp);
    Ok(beta(q, n - dp, n - r - m - s) * beta(q, dp, m + s) * beta(q, m + s, m) * BigInt::from(q).pow(e as u32))
}

/// The block sizes of a coprime symmetric pair in the normal form
/// M' ≡ (A_1 0 0 0; 0 C 0 0; 0 0 0 0; 0 0 C' 0) with C of size d_4+d_5 and
/// C' of size d_7+d_8, together with the column split j.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PairShape {
    pub n: usize,
    pub j: usize,
    pub d1: usize,
    pub d4: usize,
    pub d5: usize,
    pub d7: usize,
    pub d8: usize,
}

impl PairShape {
    pub fn rank(&self) -> usize {
        self.d1 + self.d4 + self.d5 + self.d7 + self.d8
    }

    /// r = j − d_1 − d_5 + d_8, after checking d_1+d_5+d_7 ≤ j ≤ n−d_4−d_8.
    pub fn r(&self) -> Result<usize> {
        let s = self;
        if s.rank() > s.n || s.d1 + s.d5 + s.d7 > s.j || s.j + s.d4 + s.d8 > s.n {
            return Err(Error::Hypothesis(format!("block sizes {:?} violate d1+d5+d7 ≤ j ≤ n−d4−d8", s)));
        }
        Ok(s.j + s.d8 - s.d1 - s.d5)
    }
}

/// A pair (M', N') = (P·D, P·(I−D)) with D = diag(I_{d'}, 0) and P the row
/// permutation producing the normal form; M'·ᵗN' = 0 and (M' N') is
/// primitive.
pub fn lemma_6_5_pair(shape: &PairShape) -> (IntMatrix, IntMatrix) {
    let n = shape.n;
    let dp = shape.rank();
    let head = shape.d1 + shape.d4 + shape.d5;
    let tail = shape.d7 + shape.d8;
    let src = |i: usize| -> usize {
        if i < head {
            i
        } else if i < n - tail {
            dp + (i - head)
        } else {
            head + (i - (n - tail))
        }
    };
    let mut m = IntMatrix::zeros(n, n);
    let mut nn = IntMatrix::zeros(n, n);
    for i in 0..n {
        let c = src(i);
        if c < dp {
            m.set(i, c, 1);
        } else {
            nn.set(i, c, 1);
        }
    }
    (m, nn)
}

/// β(d_4+d_5, d_4)·β(d_7+d_8, d_8)·q^{(d_4+d_8)(j−d_1−d_5)−d_7·d_8}.
pub fn lemma_6_5_count(q: u64, shape: &PairShape) -> Result<BigInt> {
    shape.r()?;
    let s = shape;
    let e = ((s.d4 + s.d8) * (s.j - s.d1 - s.d5)) as i64 - (s.d7 * s.d8) as i64;
    if e < 0 {
        return Err(Error::Hypothesis(format!("negative exponent for {:?}", s)));
    }
    Ok(beta(q, (s.d4 + s.d5) as i64, s.d4 as i64)
        * beta(q, (s.d7 + s.d8) as i64, s.d8 as i64)
        * BigInt::from(q).pow(e as u32))
}

/// Number of G ∈ SL_n(Z)/K_j(q) for which some member of the coset makes
/// M'·G and N'·ᵗG⁻¹ meet the block conditions: rank M_1 = d_1, M_2 ≡ 0,
/// rank M_4 = d_4, rank (M_4; M_6) = d_4+d_8, rank (M_1; M_3) = d_1+d_5,
/// the lower n−r−d_1−d_4−d_5 rows of N_3 vanish and the upper r−d_7−d_8
/// rows of N_5 have full rank. The pair is `lemma_6_5_pair(shape)`.
pub fn lemma_6_5_oracle(q: u64, shape: &PairShape) -> Result<BigInt> {
    let r = shape.r()?;
    let n = shape.n;
    if !is_prime(q) || q > 3 || n > 3 {
        return Err(Error::OracleOutOfRange(format!("coset count for n = {}, q = {}", n, q)));
    }
    let PairShape { j, d1, d4, d5, d7, d8, .. } = *shape;
    let (m, nn) = lemma_6_5_pair(shape);
    let (mf, nf) = (residue_flat(&m, q), residue_flat(&nn, q));
    let group = special_linear(n, q);
    let sub: Vec<Flat> = group.iter().filter(|k| (0..j).all(|a| (j..n).all(|b| k[a * n + b] == 0))).cloned().collect();
    let top = n - r;
    let t = tally_cosets(&group, &sub, n, q, Side::Right, |g| {
        let mg = flat_mul(&mf, g, n, q);
        let inv = flat_inverse(g, n, q);
        let inv_t: Flat = (0..n * n).map(|k| inv[(k % n) * n + k / n]).collect();
        let ng = flat_mul(&nf, &inv_t, n, q);
        block_rank(&mg, n, 0..d1, 0..j, q) == d1
            && sub_block(&mg, n, 0..d1, j..n, q).iter().flatten().all(|&x| x == 0)
            && block_rank(&mg, n, d1..top, j..n, q) == d4
            && block_rank(&mg, n, d1..n, j..n, q) == d4 + d8
            && block_rank(&mg, n, 0..top, 0..j, q) == d1 + d5
            && sub_block(&ng, n, d1 + d4 + d5..top, 0..j, q).iter().flatten().all(|&x| x == 0)
            && block_rank(&ng, n, top..n - d7 - d8, 0..j, q) == r - d7 - d8
    });
    Ok(BigInt::from(t.any))
}
