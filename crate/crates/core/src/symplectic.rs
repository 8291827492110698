//! Coprime symmetric pairs (M N), their reduction to the normal form (M'' I)
//! modulo Γ_0(N), congruence lifting in SL_n(Z), and the character χ(M, N).

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::characters::DirichletCharacter;
use crate::combinat::LocalCharacter;
use crate::eisenstein::Partition;
use crate::error::{Error, Result};
use crate::exactmath::arith::{crt, factorize, gcd, inv_mod, is_squarefree, prime_divisors};
use crate::exactmath::matrix::{big_mod, hermite_with_transform, rank_normalize};
use crate::exactmath::{rank_mod_p, smith_unit_check, CycloNumber, IntMatrix};

/// A pair (M N) of n×n integer matrices with M·ᵗN symmetric and (M N) primitive.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoprimeSymmetricPair {
    m: IntMatrix,
    n: IntMatrix,
}

impl CoprimeSymmetricPair {
    pub fn new(m: IntMatrix, n: IntMatrix) -> Result<Self> {
        if !m.is_square() || !n.is_square() || m.rows() != n.rows() {
            return Err(Error::InvalidPair("M and N must be square of the same size".into()));
        }
        if !m.mul(&n.transpose()).is_symmetric() {
            return Err(Error::InvalidPair("M·ᵗN is not symmetric".into()));
        }
        if !smith_unit_check(&m.hstack(&n)) {
            return Err(Error::InvalidPair("(M N) is not primitive".into()));
        }
        Ok(CoprimeSymmetricPair { m, n })
    }

    /// The bottom block row of a 2n×2n matrix.
    pub fn bottom_row_of(gamma: &IntMatrix) -> Result<Self> {
        let k = gamma.rows() / 2;
        Self::new(gamma.block(k, 2 * k, 0, k), gamma.block(k, 2 * k, k, 2 * k))
    }

    pub fn m(&self) -> &IntMatrix {
        &self.m
    }

    pub fn n(&self) -> &IntMatrix {
        &self.n
    }

    pub fn degree(&self) -> usize {
        self.m.rows()
    }

    /// (E·M, E·N) for any n×n integer E.
    pub fn left_mul(&self, e: &IntMatrix) -> Result<Self> {
        Self::new(e.mul(&self.m), e.mul(&self.n))
    }

    /// (M N)·γ for a 2n×2n matrix γ.
    pub fn right_mul(&self, gamma: &IntMatrix) -> Result<Self> {
        let row = self.m.hstack(&self.n).mul(gamma);
        let k = self.degree();
        Self::new(row.block(0, k, 0, k), row.block(0, k, k, 2 * k))
    }
}

/// Ranks of M at each prime of a square-free level.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairClass {
    pub level: u64,
    pub ranks: Vec<(u64, usize)>,
}

pub fn pair_class(pair: &CoprimeSymmetricPair, level: u64) -> PairClass {
    let ranks = prime_divisors(level).into_iter().map(|q| (q, rank_mod_p(pair.m(), q))).collect();
    PairClass { level, ranks }
}

fn row_add(m: &mut IntMatrix, i: usize, j: usize, c: &BigInt) {
    for col in 0..m.cols() {
        let v = m.get(i, col) + m.get(j, col) * c;
        m.set(i, col, v);
    }
}

/// Transvection I + c·E_ij.
pub fn transvection(n: usize, i: usize, j: usize, c: impl Into<BigInt>) -> IntMatrix {
    let mut e = IntMatrix::identity(n);
    e.set(i, j, c.into());
    e
}

/// Returns E ∈ SL_n(Z) with E ≡ A (mod n1) and E ≡ I (mod n2), where A has
/// determinant 1 mod n1. Built from transvections whose parameters are
/// ≡ 0 (mod n2), so every factor is already trivial mod n2.
pub fn lift_from_mod(a: &IntMatrix, n1: u64, n2: u64) -> Result<IntMatrix> {
    if gcd(n1, n2) != 1 {
        return Err(Error::NotCoprime(format!("moduli {} and {}", n1, n2)));
    }
    if !a.is_square() {
        return Err(Error::invalid("lift_from_mod needs a square matrix"));
    }
    let n = a.rows();
    if n1 == 1 || n == 0 {
        return Ok(IntMatrix::identity(n));
    }
    if a.det_mod(n1) != 1 {
        return Err(Error::invalid(format!("determinant is not 1 modulo {}", n1)));
    }
    let mut r: Vec<Vec<u64>> = a.residues(n1);
    let mut l = IntMatrix::identity(n);
    // row_i += c·row_j, mirrored on the residues and on L
    let op = |r: &mut Vec<Vec<u64>>, l: &mut IntMatrix, i: usize, j: usize, c: u64| -> Result<()> {
        let c = c % n1;
        if c == 0 {
            return Ok(());
        }
        for col in 0..n {
            r[i][col] = ((r[i][col] as u128 + c as u128 * r[j][col] as u128) % n1 as u128) as u64;
        }
        let lifted = crt(&[(c, n1), (0, n2)])?;
        row_add(l, i, j, &BigInt::from(lifted));
        Ok(())
    };
    for k in 0..n {
        // Euclid down column k
        loop {
            let nz: Vec<usize> = (k..n).filter(|&i| r[i][k] != 0).collect();
            if nz.len() <= 1 {
                break;
            }
            let b = *nz.iter().min_by_key(|&&i| r[i][k]).unwrap();
            for &i in &nz {
                if i != b {
                    let qt = r[i][k] / r[b][k];
                    op(&mut r, &mut l, i, b, n1 - qt % n1)?;
                }
            }
        }
        let b = (k..n).find(|&i| r[i][k] != 0).ok_or_else(|| Error::invalid("matrix is singular modulo n1"))?;
        if b != k {
            op(&mut r, &mut l, k, b, 1)?;
            op(&mut r, &mut l, b, k, n1 - 1)?;
        }
        if k + 1 < n && r[k][k] != 1 {
            let g = r[k][k];
            let ginv = inv_mod(g as i64, n1)?;
            op(&mut r, &mut l, k + 1, k, 1)?;
            let c = ((n1 + 1 - g % n1) as u128 * ginv as u128 % n1 as u128) as u64;
            op(&mut r, &mut l, k, k + 1, c)?;
            let t = r[k + 1][k];
            op(&mut r, &mut l, k + 1, k, (n1 - t) % n1)?;
        }
    }
    // back substitution above the unit diagonal
    for k in (0..n).rev() {
        for i in 0..k {
            let t = r[i][k];
            op(&mut r, &mut l, i, k, (n1 - t) % n1)?;
        }
    }
    debug_assert!(r.iter().enumerate().all(|(i, row)| row.iter().enumerate().all(|(j, &x)| x == u64::from(i == j))));
    Ok(l.adjugate())
}

/// E ∈ SL_n(Z) with E ≡ E' (mod N') and E ≡ I (mod N'').
pub fn sl_lift(e: &IntMatrix, n1: u64, n2: u64) -> Result<IntMatrix> {
    if !e.det().is_one() {
        return Err(Error::invalid("E' must have determinant 1"));
    }
    lift_from_mod(e, n1, n2)
}

fn block_diag_sp(a: &IntMatrix) -> Result<IntMatrix> {
    let k = a.rows();
    let inv_t = a.inverse_unimodular()?.transpose();
    Ok(IntMatrix::blocks(a, &IntMatrix::zeros(k, k), &IntMatrix::zeros(k, k), &inv_t))
}

/// [[I, S], [0, I]].
pub fn upper_translation(s: &IntMatrix) -> IntMatrix {
    let k = s.rows();
    IntMatrix::blocks(&IntMatrix::identity(k), s, &IntMatrix::zeros(k, k), &IntMatrix::identity(k))
}

/// [[I, 0], [S, I]].
pub fn lower_translation(s: &IntMatrix) -> IntMatrix {
    let k = s.rows();
    IntMatrix::blocks(&IntMatrix::identity(k), &IntMatrix::zeros(k, k), s, &IntMatrix::identity(k))
}

/// diag(A, ᵗA⁻¹) for A ∈ GL_n(Z).
pub fn levi(a: &IntMatrix) -> Result<IntMatrix> {
    block_diag_sp(a)
}

/// The 2×2 matrix [[a, b], [c, d]] placed on coordinates (i, n+i).
pub fn embedded_sl2(n: usize, i: usize, a: &BigInt, b: &BigInt, c: &BigInt, d: &BigInt) -> IntMatrix {
    let mut g = IntMatrix::identity(2 * n);
    g.set(i, i, a.clone());
    g.set(i, n + i, b.clone());
    g.set(n + i, i, c.clone());
    g.set(n + i, n + i, d.clone());
    g
}

/// A symplectic integer matrix with bottom block row (M N).
pub fn complete_pair(pair: &CoprimeSymmetricPair) -> Result<IntMatrix> {
    let (m, nn) = (pair.m(), pair.n());
    let k = pair.degree();
    let stacked = nn.transpose().vstack(&m.transpose());
    let (h, u, r) = hermite_with_transform(&stacked);
    if r != k || h.block(0, k, 0, k) != IntMatrix::identity(k) {
        return Err(Error::InvalidPair("(M N) is not primitive".into()));
    }
    let l = u.block(0, k, 0, 2 * k);
    let a0 = l.block(0, k, 0, k);
    let b0 = l.block(0, k, k, 2 * k).neg();
    let skew = a0.mul(&b0.transpose()).sub(&b0.mul(&a0.transpose()));
    let upper = IntMatrix::from_fn(k, k, |i, j| if i < j { skew.get(i, j).clone() } else { BigInt::zero() });
    let a = a0.add(&upper.mul(m));
    let b = b0.add(&upper.mul(nn));
    let gamma = IntMatrix::blocks(&a, &b, m, nn);
    debug_assert!(gamma.is_symplectic());
    Ok(gamma)
}

/// Result of reducing (M N): E·(M N)·γ = (C D) with D ≡ I and C·ᵗD ≡ M'' (mod N).
#[derive(Clone, Debug)]
pub struct Reduction {
    pub reduced: IntMatrix,
    pub left: IntMatrix,
    pub right: IntMatrix,
    pub final_pair: CoprimeSymmetricPair,
}

/// Symmetric M'' with (M N) ∈ SL_n(Z)(M'' I)Γ_0(N), entries in [0, N).
pub fn reduce_pair(pair: &CoprimeSymmetricPair, level: u64) -> Result<IntMatrix> {
    Ok(reduce_pair_with_witness(pair, level)?.reduced)
}

pub fn reduce_pair_with_witness(pair: &CoprimeSymmetricPair, level: u64) -> Result<Reduction> {
    if level == 0 {
        return Err(Error::invalid("level must be positive"));
    }
    let k = pair.degree();
    let mut c = pair.m().clone();
    let mut d = pair.n().clone();
    let mut left = IntMatrix::identity(k);
    let mut right = IntMatrix::identity(2 * k);
    let apply = |c: &mut IntMatrix, d: &mut IntMatrix, right: &mut IntMatrix, g: &IntMatrix| {
        let row = c.hstack(d).mul(g);
        *c = row.block(0, k, 0, k);
        *d = row.block(0, k, k, 2 * k);
        *right = right.mul(g);
    };
    let big_level = BigInt::from(level);
    for (q, t) in factorize(level) {
        let qt = q.pow(t);
        let rest = level / qt;
        // make D ≡ diag(D1, 0) mod q
        let (e0, e1, rank) = rank_normalize(&d, q);
        let e0 = lift_from_mod(&e0, q, rest)?;
        c = e0.mul(&c);
        d = e0.mul(&d);
        left = e0.mul(&left);
        let e1 = lift_from_mod(&e1, q, rest)?;
        // right factor diag(G, ᵗG⁻¹) with ᵗG⁻¹ = e1
        let g = e1.inverse_unimodular()?.transpose();
        apply(&mut c, &mut d, &mut right, &block_diag_sp(&g)?);
        if rank < k {
            let w = BigInt::from(crt(&[(1, q), (0, rest)])?);
            let diag: Vec<BigInt> = (0..k).map(|i| if i < rank { BigInt::zero() } else { w.clone() }).collect();
            apply(&mut c, &mut d, &mut right, &upper_translation(&IntMatrix::diag(&diag)));
        }
        let delta = d.det_mod(qt);
        if gcd(delta, q) != 1 {
            return Err(Error::InvalidPair(format!("pair is not primitive at {}", q)));
        }
        if k > 0 {
            // fix the determinant with an embedded SL_2 element of Γ_0(N)
            let cc = crt(&[(delta, qt), (1, rest)])?;
            let n2 = &big_level * &big_level;
            let cc_big = BigInt::from(cc);
            let u = modinv_big(&cc_big, &n2)?;
            let v = (&cc_big * &u - BigInt::one()) / &n2;
            let g = embedded_sl2(k, 0, &cc_big, &big_level, &(&v * &big_level), &u);
            apply(&mut c, &mut d, &mut right, &g);
            // now det D ≡ 1 mod q^t; diag(A, ᵗA⁻¹) with A ≡ ᵗD brings D to I
            let a = lift_from_mod(&d.transpose(), qt, rest)?;
            apply(&mut c, &mut d, &mut right, &block_diag_sp(&a)?);
        }
        debug_assert!(d.congruent(&IntMatrix::identity(k), qt));
    }
    let reduced = c.mul(&d.transpose()).mod_reduce(level);
    debug_assert!(reduced.is_symmetric());
    Ok(Reduction { reduced, left, right, final_pair: CoprimeSymmetricPair::new(c, d)? })
}

fn modinv_big(a: &BigInt, m: &BigInt) -> Result<BigInt> {
    let eg = a.extended_gcd(m);
    if !eg.gcd.is_one() {
        return Err(Error::NotCoprime(format!("{} modulo {}", a, m)));
    }
    Ok(eg.x.mod_floor(m))
}

/// σ with q | N_d exactly when rank_q M = d.
pub fn partition_of_pair(pair: &CoprimeSymmetricPair, level: u64) -> Result<Partition> {
    if !is_squarefree(level) {
        return Err(Error::NotSquareFree(level));
    }
    let class = pair_class(pair, level);
    Ok(Partition::from_ranks(pair.degree(), &class.ranks))
}

fn det_residue(m: &IntMatrix, q: u64) -> i64 {
    m.det_mod(q) as i64
}

/// χ_q(M, N) for a pair that is integral and primitive modulo the prime q.
/// With E0·M·E1 ≡ diag(M1, 0) (mod q), the value is χ_q(det M1)⁻¹·χ_q(det N4)
/// where N4 is the lower-right block of E0·N·ᵗE1⁻¹.
pub fn chi_local(m: &IntMatrix, n: &IntMatrix, chi_q: &LocalCharacter) -> Result<CycloNumber> {
    let q = chi_q.prime();
    let k = m.rows();
    let (e0, e1, d) = rank_normalize(m, q);
    if 0 < d && d < k && !chi_q.square_is_trivial() {
        return Err(Error::ZeroSeries);
    }
    let m1 = e0.mul(m).mul(&e1).block(0, d, 0, d);
    let n4 = e0.mul(n).mul(&e1.adjugate().transpose()).block(d, k, d, k);
    let dm = det_residue(&m1, q);
    let dn = det_residue(&n4, q);
    if dm == 0 || dn == 0 {
        return Err(Error::InvalidPair(format!("pair is not primitive modulo {}", q)));
    }
    Ok(chi_q.eval(dm).conj().mul(&chi_q.eval(dn)))
}

/// ∏_{q | modulus} χ_q(M, N) for a pair that is integral and primitive modulo each
/// prime of the square-free modulus of χ (the pair need not be integral globally
/// once reduced: callers pass integral representatives).
pub fn chi_of_matrices(m: &IntMatrix, n: &IntMatrix, chi: &DirichletCharacter) -> Result<CycloNumber> {
    let modulus = chi.modulus();
    if !is_squarefree(modulus) {
        return Err(Error::NotSquareFree(modulus));
    }
    let mut acc = CycloNumber::one();
    for q in prime_divisors(modulus) {
        acc = acc.mul(&chi_local(m, n, &chi.local_at(q)?)?);
    }
    Ok(acc)
}

/// χ(M, N) for a pair in the class of σ.
pub fn chi_of_pair(pair: &CoprimeSymmetricPair, chi: &DirichletCharacter, sigma: &Partition) -> Result<CycloNumber> {
    let level = chi.modulus();
    if !is_squarefree(level) {
        return Err(Error::NotSquareFree(level));
    }
    if sigma.level() != level || sigma.degree() != pair.degree() {
        return Err(Error::invalid(format!(
            "partition {} does not match level {} and degree {}",
            sigma,
            level,
            pair.degree()
        )));
    }
    let k = pair.degree();
    for (q, d) in sigma.ranks() {
        if rank_mod_p(pair.m(), q) != d {
            return Err(Error::InvalidPair(format!("rank mod {} differs from the partition {}", q, sigma)));
        }
        if 0 < d && d < k && !chi.local_at(q)?.square_is_trivial() {
            return Err(Error::ZeroSeries);
        }
    }
    chi_of_matrices(pair.m(), pair.n(), chi)
}

/// χ(GM, GN) = χ(det G)·χ(M, N) = χ(MG⁻¹, N·ᵗG) for unimodular G.
pub fn chi_transform_check(
    pair: &CoprimeSymmetricPair,
    g: &IntMatrix,
    chi: &DirichletCharacter,
    sigma: &Partition,
) -> Result<bool> {
    let base = chi_of_pair(pair, chi, sigma)?;
    let det = g.det().to_i64().ok_or_else(|| Error::invalid("G is not unimodular"))?;
    if det.abs() != 1 {
        return Err(Error::invalid("G is not unimodular"));
    }
    let expected = chi.eval(det).mul(&base);
    let left = chi_of_pair(&pair.left_mul(g)?, chi, sigma)?;
    let ginv = g.inverse_unimodular()?;
    let right =
        chi_of_pair(&CoprimeSymmetricPair::new(pair.m().mul(&ginv), pair.n().mul(&g.transpose()))?, chi, sigma)?;
    Ok(left == expected && right == expected)
}

/// A random word of transvections and signed swaps in SL_n(Z).
pub fn random_sl(rng: &mut ChaCha8Rng, n: usize, len: usize) -> IntMatrix {
    let mut e = IntMatrix::identity(n);
    if n < 2 {
        return e;
    }
    for _ in 0..len {
        let i = rng.gen_range(0..n);
        let mut j = rng.gen_range(0..n - 1);
        if j >= i {
            j += 1;
        }
        let c: i64 = rng.gen_range(-2..=2);
        e = transvection(n, i, j, c).mul(&e);
    }
    e
}

/// A random word in generators of Γ_0(N): upper and lower translations (the lower
/// ones by multiples of N), Levi blocks, and embedded SL_2 elements with C ≡ 0 (N).
pub fn random_gamma0(rng: &mut ChaCha8Rng, n: usize, level: u64, len: usize) -> IntMatrix {
    let mut g = IntMatrix::identity(2 * n);
    for _ in 0..len {
        let step = match rng.gen_range(0..4) {
            0 => upper_translation(&random_symmetric(rng, n, 1)),
            1 => lower_translation(&random_symmetric(rng, n, 1).scale(&BigInt::from(level))),
            2 => {
                let a = random_sl(rng, n, 1);
                block_diag_sp(&a).expect("transvections are unimodular")
            }
            _ => {
                let i = rng.gen_range(0..n);
                let c: i64 = rng.gen_range(1..=2);
                let nc = level as i64 * c;
                let d = loop {
                    let d: i64 = rng.gen_range(-7..=7);
                    if d != 0 && gcd(d.unsigned_abs(), nc as u64) == 1 {
                        break d;
                    }
                };
                let a = if nc == 1 { 0 } else { inv_mod(d, nc as u64).unwrap() as i64 };
                let b = (a * d - 1) / nc;
                embedded_sl2(n, i, &BigInt::from(a), &BigInt::from(b), &BigInt::from(nc), &BigInt::from(d))
            }
        };
        g = g.mul(&step);
    }
    g
}

/// A random symmetric matrix with entries in [−bound, bound].
pub fn random_symmetric(rng: &mut ChaCha8Rng, n: usize, bound: i64) -> IntMatrix {
    let mut s = IntMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v: i64 = rng.gen_range(-bound..=bound);
            s.set(i, j, v);
            s.set(j, i, v);
        }
    }
    s
}

/// E·(M_σ I)·γ for random E ∈ SL_n(Z) and γ ∈ Γ_0(N), together with γ.
pub fn random_pair_in_class(
    rng: &mut ChaCha8Rng,
    sigma: &Partition,
    m_sigma: &IntMatrix,
    len: usize,
) -> (CoprimeSymmetricPair, IntMatrix, IntMatrix) {
    let n = sigma.degree();
    let gamma = random_gamma0(rng, n, sigma.level(), len);
    let e = random_sl(rng, n, len);
    let base = CoprimeSymmetricPair::new(m_sigma.clone(), IntMatrix::identity(n))
        .expect("(M_σ I) is a coprime symmetric pair");
    let pair =
        base.right_mul(&gamma).and_then(|p| p.left_mul(&e)).expect("group action preserves coprime symmetric pairs");
    (pair, e, gamma)
}

/// Least nonnegative residue of det(D) for the lower-right block of γ.
pub fn det_d_block(gamma: &IntMatrix, modulus: u64) -> i64 {
    let k = gamma.rows() / 2;
    big_mod(&gamma.block(k, 2 * k, k, 2 * k).det(), modulus) as i64
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn lift_two_moduli() {
        let e = IntMatrix::from_rows(&[vec![0, -1], vec![1, 0]]);
        let l = sl_lift(&e, 3, 5).unwrap();
        assert!(l.det().is_one());
        assert!(l.congruent(&e, 3));
        assert!(l.congruent(&IntMatrix::identity(2), 5));
    }

    #[test]
    fn completion_n1() {
        let p = CoprimeSymmetricPair::new(IntMatrix::from_rows(&[vec![2]]), IntMatrix::from_rows(&[vec![3]])).unwrap();
        let g = complete_pair(&p).unwrap();
        assert!(g.is_symplectic());
        assert_eq!(g.det(), BigInt::one());
    }

    #[test]
    fn reduction_small() {
        let p = CoprimeSymmetricPair::new(IntMatrix::from_rows(&[vec![2]]), IntMatrix::from_rows(&[vec![3]])).unwrap();
        let r = reduce_pair(&p, 6).unwrap();
        assert_eq!(big_mod(r.get(0, 0), 2), 0);
        assert_ne!(big_mod(r.get(0, 0), 3), 0);
    }

    #[test]
    fn gamma0_sampler_lands_in_gamma0() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in 1..=3 {
            let g = random_gamma0(&mut rng, n, 15, 6);
            assert!(g.is_symplectic());
            assert!(g.block(n, 2 * n, 0, n).mod_reduce(15).is_zero());
        }
    }
}
