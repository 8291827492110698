//! Counting functions over finite fields: Gaussian binomials, symmetric
//! matrix counts and character sums, with brute-force enumeration oracles.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::exactmath::arith::{discrete_log, inv_mod, is_prime, primitive_root};
use crate::exactmath::{CycloNumber, RootOfUnity};

/// Largest search space an enumeration oracle will walk.
pub const ENUMERATION_LIMIT: u64 = 100_000_000;

/// A character of (Z/qZ)^× for a prime q, fixed by the image of the least
/// primitive root.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct LocalCharacter {
    q: u64,
    root: u64,
    gen_image: RootOfUnity,
}

impl LocalCharacter {
    pub fn new(q: u64, gen_image: RootOfUnity) -> Result<Self> {
        if !is_prime(q) {
            return Err(Error::invalid(format!("{} is not prime", q)));
        }
        if (q - 1) % gen_image.order() != 0 {
            return Err(Error::invalid(format!("character order {} does not divide {}", gen_image.order(), q - 1)));
        }
        Ok(LocalCharacter { q, root: primitive_root(q).unwrap(), gen_image })
    }

    pub fn trivial(q: u64) -> Self {
        Self::new(q, RootOfUnity::one()).expect("prime modulus")
    }

    /// All q−1 characters mod q, ordered by the exponent of the generator image.
    pub fn all(q: u64) -> Vec<Self> {
        (0..(q - 1).max(1)).map(|e| Self::new(q, RootOfUnity::new((q - 1).max(1), e as i64)).unwrap()).collect()
    }

    pub fn prime(&self) -> u64 {
        self.q
    }

    pub fn order(&self) -> u64 {
        self.gen_image.order()
    }

    pub fn gen_image(&self) -> RootOfUnity {
        self.gen_image
    }

    pub fn is_trivial(&self) -> bool {
        self.gen_image.is_one()
    }

    /// χ² = 1.
    pub fn square_is_trivial(&self) -> bool {
        self.order() <= 2
    }

    pub fn conj(&self) -> Self {
        LocalCharacter { gen_image: self.gen_image.conj(), ..*self }
    }

    /// Value on a as a root of unity; None when q | a.
    pub fn eval_root(&self, a: i64) -> Option<RootOfUnity> {
        let r = a.rem_euclid(self.q as i64) as u64;
        if r == 0 {
            return None;
        }
        let k = discrete_log(self.root, r, self.q).expect("unit has a discrete log");
        Some(self.gen_image.pow(k as i64))
    }

    pub fn eval(&self, a: i64) -> CycloNumber {
        self.eval_root(a).map_or_else(CycloNumber::zero, |r| r.to_cyclo())
    }
}

fn pow_big(p: u64, e: i64) -> BigInt {
    num_traits::pow(BigInt::from(p), e as usize)
}

/// μ_p(m, r) = ∏_{i<r} (p^{m−i} − 1); 1 for r = 0, 0 for r < 0 or r > m.
pub fn mu(p: u64, m: i64, r: i64) -> BigInt {
    if r == 0 {
        return BigInt::one();
    }
    if r < 0 || r > m {
        return BigInt::zero();
    }
    (0..r).map(|i| pow_big(p, m - i) - 1).product()
}

/// δ_p(m, r) = ∏_{i<r} (p^{m−i} + 1); 1 for r = 0, 0 for r < 0 or r > m.
pub fn delta(p: u64, m: i64, r: i64) -> BigInt {
    if r == 0 {
        return BigInt::one();
    }
    if r < 0 || r > m {
        return BigInt::zero();
    }
    (0..r).map(|i| pow_big(p, m - i) + 1).product()
}

/// Gaussian binomial β_p(m, r): the number of r-dimensional subspaces of F_p^m.
pub fn beta(p: u64, m: i64, r: i64) -> BigInt {
    if r < 0 || r > m {
        return BigInt::zero();
    }
    let (q, rem) = mu(p, m, r).div_rem(&mu(p, r, r));
    debug_assert!(rem.is_zero());
    q
}

/// Count r-dimensional subspaces of F_p^m by walking every reduced row-echelon
/// r×m matrix.
pub fn beta_oracle(p: u64, m: i64, r: i64) -> Result<BigInt> {
    if p > 7 || m > 5 || !is_prime(p) || m < 0 {
        return Err(Error::OracleOutOfRange(format!("beta_oracle(p={}, m={}, r={})", p, m, r)));
    }
    if r < 0 || r > m {
        return Ok(BigInt::zero());
    }
    let (m, r) = (m as usize, r as usize);
    let mut count = 0u64;
    for pivots in combinations(m, r) {
        // free slots: row i, column j > pivot_i not a pivot column
        let free: Vec<(usize, usize)> =
            (0..r).flat_map(|i| ((pivots[i] + 1)..m).filter(|j| !pivots.contains(j)).map(move |j| (i, j))).collect();
        let mut mat = vec![vec![0u64; m]; r];
        for (i, &pc) in pivots.iter().enumerate() {
            mat[i][pc] = 1;
        }
        let mut digits = vec![0u64; free.len()];
        loop {
            for (k, &(i, j)) in free.iter().enumerate() {
                mat[i][j] = digits[k];
            }
            debug_assert!(is_rref(&mat, &pivots));
            count += 1;
            if !odometer(&mut digits, p) {
                break;
            }
        }
    }
    Ok(BigInt::from(count))
}

fn is_rref(mat: &[Vec<u64>], pivots: &[usize]) -> bool {
    pivots.windows(2).all(|w| w[0] < w[1])
        && pivots.iter().enumerate().all(|(i, &pc)| {
            mat[i][pc] == 1 && (0..pc).all(|j| mat[i][j] == 0) && (0..mat.len()).all(|k| k == i || mat[k][pc] == 0)
        })
}

/// Increment a base-p digit vector; false once it wraps to all zeros.
pub(crate) fn odometer(digits: &mut [u64], p: u64) -> bool {
    for d in digits.iter_mut() {
        *d += 1;
        if *d < p {
            return true;
        }
        *d = 0;
    }
    false
}

/// All increasing r-subsets of 0..m, lexicographic.
pub(crate) fn combinations(m: usize, r: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, m: usize, r: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == r {
            out.push(cur.clone());
            return;
        }
        for i in start..m {
            cur.push(i);
            rec(i + 1, m, r, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, m, r, &mut Vec::new(), &mut out);
    out
}

/// Determinant of a small square residue matrix over F_p.
pub(crate) fn det_mod_prime(a: &mut [Vec<u64>], p: u64) -> u64 {
    let n = a.len();
    let mut det = 1u64;
    for c in 0..n {
        let Some(piv) = (c..n).find(|&i| a[i][c] != 0) else { return 0 };
        if piv != c {
            a.swap(piv, c);
            det = (p - det) % p;
        }
        det = det * a[c][c] % p;
        let inv = inv_mod(a[c][c] as i64, p).unwrap();
        for i in c + 1..n {
            if a[i][c] != 0 {
                let f = a[i][c] * inv % p;
                for j in c..n {
                    a[i][j] = (a[i][j] + p * p - f * a[c][j]) % p;
                }
            }
        }
    }
    det
}

/// Histogram of determinants (index = residue mod p) over all symmetric
/// t×t matrices with t = b + c whose lower-right c×c block is zero.
pub fn sym_det_histogram(p: u64, b: usize, c: usize) -> Result<Vec<u64>> {
    let t = b + c;
    let slots: Vec<(usize, usize)> =
        (0..t).flat_map(|i| (i..t).map(move |j| (i, j))).filter(|&(i, j)| !(i >= b && j >= b)).collect();
    let space = (p as f64).powi(slots.len() as i32);
    if !is_prime(p) || space > ENUMERATION_LIMIT as f64 {
        return Err(Error::OracleOutOfRange(format!("symmetric enumeration p={}, b={}, c={}", p, b, c)));
    }
    let mut hist = vec![0u64; p as usize];
    if t == 0 {
        hist[1 % p as usize] += 1;
        return Ok(hist);
    }
    let mut digits = vec![0u64; slots.len()];
    let mut mat = vec![vec![0u64; t]; t];
    loop {
        for row in mat.iter_mut() {
            row.iter_mut().for_each(|x| *x = 0);
        }
        for (k, &(i, j)) in slots.iter().enumerate() {
            mat[i][j] = digits[k];
            mat[j][i] = digits[k];
        }
        let d = det_mod_prime(&mut mat, p);
        hist[d as usize] += 1;
        if !odometer(&mut digits, p) {
            break;
        }
    }
    Ok(hist)
}

/// Number of invertible symmetric t×t matrices over F_p, by enumeration.
pub fn sym_count(p: u64, t: usize) -> Result<BigInt> {
    let h = sym_det_histogram(p, t, 0)?;
    Ok(BigInt::from(h.iter().skip(1).sum::<u64>()))
}

fn character_sum(chi: &LocalCharacter, hist: &[u64]) -> CycloNumber {
    let mut acc = CycloNumber::zero();
    for (a, &n) in hist.iter().enumerate().skip(1) {
        if n > 0 {
            acc = acc.add(&chi.eval(a as i64).scale(&BigRational::from_integer(n.into())));
        }
    }
    acc
}

/// Σ_U χ(det U) over symmetric t×t matrices U over F_q; 1 for t = 0.
pub fn sym_chi(q: u64, chi: &LocalCharacter, t: usize) -> Result<CycloNumber> {
    sym_chi_bc(q, chi, t, 0)
}

/// Σ χ(det [[U1, U2], [ᵗU2, 0]]) with U1 symmetric b×b and a zero c×c corner.
pub fn sym_chi_bc(q: u64, chi: &LocalCharacter, b: usize, c: usize) -> Result<CycloNumber> {
    check_prime_matches(q, chi)?;
    if b + c == 0 {
        return Ok(CycloNumber::one());
    }
    Ok(character_sum(chi, &sym_det_histogram(q, b, c)?))
}

fn check_prime_matches(q: u64, chi: &LocalCharacter) -> Result<()> {
    if chi.prime() != q {
        return Err(Error::invalid(format!("character is modulo {}, expected {}", chi.prime(), q)));
    }
    Ok(())
}

/// The closed-form table for sym_q^χ(b, c), read with μδ(x, y) = μ(x, y)·δ(x, y).
///
/// Returns None where the displayed expression divides by zero (this happens
/// in the p = 2 row). For c > b the matrix has rank at most 2b < b + c, so no
/// invertible matrices occur and the value is 0.
pub fn sym_closed_form(q: u64, chi: &LocalCharacter, b: usize, c: usize) -> Result<Option<CycloNumber>> {
    check_prime_matches(q, chi)?;
    let t = b + c;
    if t == 0 {
        return Ok(Some(CycloNumber::one()));
    }
    if c > b {
        return Ok(Some(CycloNumber::zero()));
    }
    let (bi, ci) = (b as i64, c as i64);
    let mudelta = |x: i64, y: i64| mu(q, x, y) * delta(q, x, y);
    let frac = |num: BigInt, den: BigInt| -> Option<BigRational> {
        if den.is_zero() {
            None
        } else {
            Some(BigRational::new(num, den))
        }
    };
    let value: Option<BigRational> = if q == 2 {
        if t % 2 == 1 {
            let m = (t as i64 - 1) / 2;
            frac(pow_big(2, m * (m + 1)) * mu(2, bi, bi), mudelta(m - ci, m - ci))
        } else {
            let m = t as i64 / 2;
            let lead = frac(pow_big(2, m * (m + 1)) * mu(2, bi, bi), mudelta(m - 1, m - 1));
            let inner = frac(mu(2, 2 * m - 1, 2 * ci), mudelta(m - 1, ci))
                .map(|x| x + BigRational::from_integer(mudelta(m, ci)));
            lead.zip(inner).map(|(a, b)| a * b)
        }
    } else {
        let eps: i64 = if q % 4 == 1 { 1 } else { -1 };
        if t % 2 == 0 {
            let m = t as i64 / 2;
            if chi.is_trivial() {
                frac(pow_big(q, m * m + m - ci) * mu(q, bi, bi), mudelta(m - ci, m - ci))
            } else if chi.square_is_trivial() {
                let sign = if m % 2 == 0 { 1 } else { eps };
                frac(pow_big(q, m * m) * mu(q, bi, bi) * sign, mudelta(m - ci, m - ci))
            } else {
                Some(BigRational::zero())
            }
        } else {
            let m = (t as i64 - 1) / 2;
            if chi.is_trivial() {
                frac(pow_big(q, m * m + m) * mu(q, bi, bi), mudelta(m - ci, m - ci))
            } else {
                Some(BigRational::zero())
            }
        }
    };
    Ok(value.map(CycloNumber::from_rational))
}

/// One row of the closed-form table checked against enumeration.
#[derive(Clone, Debug)]
pub struct SymComparison {
    pub q: u64,
    /// Order of the local character (1 or 2 on this grid).
    pub chi_order: u64,
    pub b: usize,
    pub c: usize,
    pub closed: Option<CycloNumber>,
    pub enumerated: CycloNumber,
}

impl SymComparison {
    pub fn agrees(&self) -> bool {
        self.closed.as_ref() == Some(&self.enumerated)
    }

    /// The q = 2 rows with b + c even and positive, c ≤ b: the product
    /// reading of the table does not reproduce the enumeration there.
    pub fn in_known_disagreement(&self) -> bool {
        let t = self.b + self.c;
        self.q == 2 && t >= 2 && t % 2 == 0 && self.c <= self.b
    }
}

/// Closed form against enumeration for every character with χ² = 1 and
/// every b + c ≤ max_t.
pub fn sym_closed_form_comparison(primes: &[u64], max_t: usize) -> Result<Vec<SymComparison>> {
    let mut out = Vec::new();
    for &q in primes {
        for chi in LocalCharacter::all(q).into_iter().filter(|c| c.square_is_trivial()) {
            for t in 0..=max_t {
                for c in 0..=t {
                    let b = t - c;
                    out.push(SymComparison {
                        q,
                        chi_order: chi.order(),
                        b,
                        c,
                        closed: sym_closed_form(q, &chi, b, c)?,
                        enumerated: sym_chi_bc(q, &chi, b, c)?,
                    });
                }
            }
        }
    }
    Ok(out)
}

/// sym_q^χ(b, c) for use inside operator formulas: the closed form for odd q
/// (checked against enumeration in the test suite), enumeration for q = 2 where
/// the closed-form reading does not hold for every even size.
pub fn sym_chi_value(q: u64, chi: &LocalCharacter, b: usize, c: usize) -> Result<CycloNumber> {
    if q != 2 {
        if let Some(v) = sym_closed_form(q, chi, b, c)? {
            return Ok(v);
        }
    }
    sym_chi_bc(q, chi, b, c)
}

/// sym_p(t), the number of invertible symmetric t×t matrices over F_p.
pub fn sym_count_value(p: u64, t: usize) -> Result<BigInt> {
    let v = sym_chi_value(p, &LocalCharacter::trivial(p), t, 0)?;
    let r = v.as_rational().ok_or_else(|| Error::invalid("symmetric count is not rational"))?;
    Ok(r.to_integer())
}

/// sym_q^χ(t) ≠ 0 exactly when χ is trivial, or χ² = 1 and t is even.
/// The empty sum at t = 0 is 1 for every χ.
pub fn lemma_6_6_nonzero(q: u64, chi: &LocalCharacter, t: usize) -> bool {
    debug_assert_eq!(q, chi.prime());
    t == 0 || chi.is_trivial() || (chi.square_is_trivial() && t % 2 == 0)
}

/// Σ_ℓ β_p(t, ℓ)·sym_p(ℓ), which should equal p^{t(t+1)/2}.
pub fn lemma_6_7_lhs(p: u64, t: usize) -> Result<BigInt> {
    let mut acc = BigInt::zero();
    for l in 0..=t {
        acc += beta(p, t as i64, l as i64) * sym_count(p, l)?;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counting_examples() {
        assert_eq!(mu(3, 2, 2), BigInt::from(16));
        assert_eq!(mu(2, 3, 1), BigInt::from(7));
        assert_eq!(delta(2, 3, 2), BigInt::from(45));
        assert_eq!(delta(3, 1, 1), BigInt::from(4));
        assert_eq!(beta(2, 2, 1), BigInt::from(3));
        assert_eq!(beta(2, 3, 2), BigInt::from(7));
        assert_eq!(beta(5, 2, 1), BigInt::from(6));
        assert_eq!(beta(3, 4, -1), BigInt::zero());
    }

    #[test]
    fn sym_examples() {
        assert_eq!(sym_count(2, 1).unwrap(), BigInt::from(1));
        assert_eq!(sym_count(2, 2).unwrap(), BigInt::from(4));
        assert_eq!(sym_count(3, 2).unwrap(), BigInt::from(18));
        assert_eq!(sym_count(5, 0).unwrap(), BigInt::from(1));
        let quad5 = LocalCharacter::new(5, RootOfUnity::new(2, 1)).unwrap();
        assert!(sym_chi(5, &quad5, 1).unwrap().is_zero());
        assert!(!sym_chi(5, &quad5, 2).unwrap().is_zero());
    }
}
