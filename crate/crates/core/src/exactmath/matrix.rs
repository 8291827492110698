//! Integer matrices with arbitrary-precision entries, plus the modular
//! elimination routines the reduction algorithms rely on.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::arith::{inv_mod, modulo};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<BigInt>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix { rows, cols, entries: vec![BigInt::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.entries[i * n + i] = BigInt::one();
        }
        m
    }

    pub fn diag<T: Into<BigInt> + Clone>(d: &[T]) -> Self {
        let n = d.len();
        let mut m = Self::zeros(n, n);
        for (i, x) in d.iter().enumerate() {
            m.entries[i * n + i] = x.clone().into();
        }
        m
    }

    pub fn from_rows<T: Into<BigInt> + Clone>(rows: &[Vec<T>]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        let entries = rows.iter().flat_map(|row| row.iter().cloned().map(Into::into)).collect();
        IntMatrix { rows: r, cols: c, entries }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> BigInt) -> Self {
        let mut entries = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                entries.push(f(i, j));
            }
        }
        IntMatrix { rows, cols, entries }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: impl Into<BigInt>) {
        self.entries[i * self.cols + j] = v.into();
    }

    pub fn entries(&self) -> &[BigInt] {
        &self.entries
    }

    pub fn to_rows(&self) -> Vec<Vec<BigInt>> {
        (0..self.rows).map(|i| self.entries[i * self.cols..(i + 1) * self.cols].to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch in product");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        out.entries[i * other.cols + j] += a * b;
                    }
                }
            }
        }
        out
    }

    pub fn add(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let entries = self.entries.iter().zip(&other.entries).map(|(a, b)| a + b).collect();
        IntMatrix { rows: self.rows, cols: self.cols, entries }
    }

    pub fn neg(&self) -> IntMatrix {
        IntMatrix { rows: self.rows, cols: self.cols, entries: self.entries.iter().map(|a| -a).collect() }
    }

    pub fn sub(&self, other: &IntMatrix) -> IntMatrix {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &BigInt) -> IntMatrix {
        IntMatrix { rows: self.rows, cols: self.cols, entries: self.entries.iter().map(|a| a * c).collect() }
    }

    /// Entries reduced to least nonnegative residues modulo `m`.
    pub fn mod_reduce(&self, m: u64) -> IntMatrix {
        let mb = BigInt::from(m);
        IntMatrix { rows: self.rows, cols: self.cols, entries: self.entries.iter().map(|a| a.mod_floor(&mb)).collect() }
    }

    pub fn congruent(&self, other: &IntMatrix, m: u64) -> bool {
        (self.rows, self.cols) == (other.rows, other.cols) && self.sub(other).mod_reduce(m).is_zero()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|a| a.is_zero())
    }

    pub fn is_symmetric(&self) -> bool {
        self.is_square() && (0..self.rows).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }

    /// Rows `r0..r1`, columns `c0..c1`.
    pub fn block(&self, r0: usize, r1: usize, c0: usize, c1: usize) -> IntMatrix {
        Self::from_fn(r1 - r0, c1 - c0, |i, j| self.get(r0 + i, c0 + j).clone())
    }

    pub fn hstack(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.rows, other.rows);
        Self::from_fn(self.rows, self.cols + other.cols, |i, j| {
            if j < self.cols {
                self.get(i, j).clone()
            } else {
                other.get(i, j - self.cols).clone()
            }
        })
    }

    pub fn vstack(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, other.cols);
        Self::from_fn(self.rows + other.rows, self.cols, |i, j| {
            if i < self.rows {
                self.get(i, j).clone()
            } else {
                other.get(i - self.rows, j).clone()
            }
        })
    }

    /// 2×2 block matrix [[a, b], [c, d]].
    pub fn blocks(a: &IntMatrix, b: &IntMatrix, c: &IntMatrix, d: &IntMatrix) -> IntMatrix {
        a.hstack(b).vstack(&c.hstack(d))
    }

    pub fn block_diag(a: &IntMatrix, b: &IntMatrix) -> IntMatrix {
        let z1 = IntMatrix::zeros(a.rows, b.cols);
        let z2 = IntMatrix::zeros(b.rows, a.cols);
        Self::blocks(a, &z1, &z2, b)
    }

    /// Exact determinant by fraction-free (Bareiss) elimination.
    pub fn det(&self) -> BigInt {
        assert!(self.is_square(), "determinant of a non-square matrix");
        let n = self.rows;
        if n == 0 {
            return BigInt::one();
        }
        let mut a = self.to_rows();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if a[k][k].is_zero() {
                match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                    Some(i) => {
                        a.swap(k, i);
                        sign = -sign;
                    }
                    None => return BigInt::zero(),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                    a[i][j] = v / &prev;
                }
            }
            prev = a[k][k].clone();
        }
        sign * &a[n - 1][n - 1]
    }

    /// Determinant modulo `m`, as a least nonnegative residue.
    pub fn det_mod(&self, m: u64) -> u64 {
        let d = self.det().mod_floor(&BigInt::from(m));
        d.to_u64().unwrap()
    }

    /// Inverse modulo `m`, for a matrix whose determinant is a unit mod `m`.
    pub fn inverse_mod(&self, m: u64) -> Result<IntMatrix> {
        assert!(self.is_square());
        if self.rows == 0 {
            return Ok(self.clone());
        }
        let dinv = inv_mod(self.det_mod(m) as i64, m)?;
        Ok(self.adjugate().scale(&BigInt::from(dinv)).mod_reduce(m))
    }

    /// Classical adjugate (transpose of the cofactor matrix).
    pub fn adjugate(&self) -> IntMatrix {
        let n = self.rows;
        if n == 1 {
            return IntMatrix::identity(1);
        }
        Self::from_fn(n, n, |i, j| {
            let minor = self.minor_matrix(j, i);
            let d = minor.det();
            if (i + j) % 2 == 0 {
                d
            } else {
                -d
            }
        })
    }

    fn minor_matrix(&self, r: usize, c: usize) -> IntMatrix {
        let n = self.rows;
        Self::from_fn(n - 1, n - 1, |i, j| {
            let ii = if i < r { i } else { i + 1 };
            let jj = if j < c { j } else { j + 1 };
            self.get(ii, jj).clone()
        })
    }

    /// Exact inverse of a unimodular matrix.
    pub fn inverse_unimodular(&self) -> Result<IntMatrix> {
        let d = self.det();
        if d.abs() != BigInt::one() {
            return Err(Error::invalid("matrix is not unimodular"));
        }
        Ok(self.adjugate().scale(&d))
    }

    /// Entries as small residues modulo `m`, row-major.
    pub fn residues(&self, m: u64) -> Vec<Vec<u64>> {
        let mb = BigInt::from(m);
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j).mod_floor(&mb).to_u64().unwrap()).collect())
            .collect()
    }

    pub fn from_residues(r: &[Vec<u64>]) -> IntMatrix {
        let rows: Vec<Vec<BigInt>> = r.iter().map(|row| row.iter().map(|&x| BigInt::from(x)).collect()).collect();
        if rows.is_empty() {
            return IntMatrix::zeros(0, 0);
        }
        IntMatrix::from_rows(&rows)
    }

    /// Symplectic form J = [[0, I], [-I, 0]] of size 2n.
    pub fn symplectic_j(n: usize) -> IntMatrix {
        let i = IntMatrix::identity(n);
        let z = IntMatrix::zeros(n, n);
        IntMatrix::blocks(&z, &i, &i.neg(), &z)
    }

    pub fn is_symplectic(&self) -> bool {
        if !self.is_square() || self.rows % 2 != 0 {
            return false;
        }
        let j = IntMatrix::symplectic_j(self.rows / 2);
        self.transpose().mul(&j).mul(self) == j
    }
}

impl fmt::Display for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = self
            .to_rows()
            .iter()
            .map(|r| format!("[{}]", r.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")))
            .collect();
        write!(f, "[{}]", rows.join(", "))
    }
}

// JSON form: array of rows; entries are numbers when they fit in i64, else decimal strings.
impl Serialize for IntMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Vec<serde_json::Value>> = self
            .to_rows()
            .iter()
            .map(|r| {
                r.iter()
                    .map(|x| match x.to_i64() {
                        Some(v) => serde_json::Value::from(v),
                        None => serde_json::Value::from(x.to_string()),
                    })
                    .collect()
            })
            .collect();
        rows.serialize(s)
    }
}

impl<'de> Deserialize<'de> for IntMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let rows = Vec::<Vec<serde_json::Value>>::deserialize(d)?;
        let parsed = rows
            .iter()
            .map(|r| {
                r.iter()
                    .map(|v| match v {
                        serde_json::Value::Number(n) => {
                            n.as_i64().map(BigInt::from).ok_or_else(|| D::Error::custom("non-integer entry"))
                        }
                        serde_json::Value::String(s) => s.parse::<BigInt>().map_err(D::Error::custom),
                        _ => Err(D::Error::custom("matrix entries must be integers")),
                    })
                    .collect::<std::result::Result<Vec<_>, _>>()
            })
            .collect::<std::result::Result<Vec<_>, _>>()?;
        if parsed.iter().any(|r| r.len() != parsed.first().map_or(0, |f| f.len())) {
            return Err(D::Error::custom("ragged matrix"));
        }
        Ok(IntMatrix::from_rows(&parsed))
    }
}

/// Rank of a residue matrix over the prime field F_p.
pub fn rank_residues(a: &[Vec<u64>], p: u64) -> usize {
    let mut a: Vec<Vec<u64>> = a.to_vec();
    let rows = a.len();
    if rows == 0 {
        return 0;
    }
    let cols = a[0].len();
    let mut rank = 0;
    for c in 0..cols {
        let Some(piv) = (rank..rows).find(|&i| a[i][c] % p != 0) else { continue };
        a.swap(rank, piv);
        let inv = inv_mod(a[rank][c] as i64, p).unwrap();
        for i in 0..rows {
            if i != rank && a[i][c] != 0 {
                let f = (a[i][c] * inv) % p;
                for j in 0..cols {
                    a[i][j] = (a[i][j] + p * p - f * a[rank][j] % p) % p;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Rank of an integer matrix over Z/pZ.
pub fn rank_mod_p(m: &IntMatrix, p: u64) -> usize {
    rank_residues(&m.residues(p), p)
}

/// Determinant-1 integer row/column operations that bring `M` mod `q` to
/// block form diag(M1, 0) with M1 invertible. Returns (E0, E1, d) with
/// E0·M·E1 ≡ diag(M1, 0) (mod q) and d = rank_q M.
pub fn rank_normalize(m: &IntMatrix, q: u64) -> (IntMatrix, IntMatrix, usize) {
    assert!(m.is_square(), "rank_normalize needs a square matrix");
    let n = m.rows();
    let mut a: Vec<Vec<i64>> = m.residues(q).iter().map(|r| r.iter().map(|&x| x as i64).collect()).collect();
    let mut e0 = Ops::new(n);
    let mut e1 = Ops::new(n);
    let qi = q as i64;
    let mut k = 0;
    while k < n {
        let found = (k..n).flat_map(|i| (k..n).map(move |j| (i, j))).find(|&(i, j)| a[i][j] != 0);
        let Some((pi, pj)) = found else { break };
        if pi != k {
            // rows: new_k = row_pi, new_pi = -row_k
            a.swap(k, pi);
            for x in a[pi].iter_mut() {
                *x = (qi - *x) % qi;
            }
            e0.row_swap(k, pi);
        }
        if pj != k {
            for row in a.iter_mut() {
                row.swap(k, pj);
                row[pj] = (qi - row[pj]) % qi;
            }
            e1.col_swap(k, pj);
        }
        let inv = inv_mod(a[k][k], q).unwrap() as i64;
        for i in k + 1..n {
            if a[i][k] != 0 {
                let c = (qi - a[i][k] * inv % qi) % qi;
                for j in 0..n {
                    a[i][j] = (a[i][j] + c * a[k][j]) % qi;
                }
                e0.row_add(i, k, c);
            }
        }
        for j in k + 1..n {
            if a[k][j] != 0 {
                let c = (qi - a[k][j] * inv % qi) % qi;
                for row in a.iter_mut() {
                    row[j] = (row[j] + c * row[k]) % qi;
                }
                e1.col_add(j, k, c);
            }
        }
        k += 1;
    }
    (e0.m, e1.m, k)
}

/// Accumulates a product of elementary determinant-1 operations.
struct Ops {
    m: IntMatrix,
}

impl Ops {
    fn new(n: usize) -> Self {
        Ops { m: IntMatrix::identity(n) }
    }

    // left-multiply: row_i += c * row_j
    fn row_add(&mut self, i: usize, j: usize, c: i64) {
        let c = BigInt::from(c);
        for col in 0..self.m.cols {
            let v = self.m.get(j, col) * &c;
            let w = self.m.get(i, col) + v;
            self.m.set(i, col, w);
        }
    }

    // left-multiply by the signed swap: row_i <- row_j, row_j <- -row_i
    fn row_swap(&mut self, i: usize, j: usize) {
        for col in 0..self.m.cols {
            let ri = self.m.get(i, col).clone();
            let rj = self.m.get(j, col).clone();
            self.m.set(i, col, rj);
            self.m.set(j, col, -ri);
        }
    }

    // right-multiply: col_i += c * col_j
    fn col_add(&mut self, i: usize, j: usize, c: i64) {
        let c = BigInt::from(c);
        for row in 0..self.m.rows {
            let v = self.m.get(row, j) * &c;
            let w = self.m.get(row, i) + v;
            self.m.set(row, i, w);
        }
    }

    // right-multiply by the signed swap: col_i <- col_j, col_j <- -col_i
    fn col_swap(&mut self, i: usize, j: usize) {
        for row in 0..self.m.rows {
            let ci = self.m.get(row, i).clone();
            let cj = self.m.get(row, j).clone();
            self.m.set(row, i, cj);
            self.m.set(row, j, -ci);
        }
    }
}

/// Invariant factors (Smith normal form diagonal, nonnegative) of an integer matrix.
pub fn invariant_factors(m: &IntMatrix) -> Vec<BigInt> {
    let mut a = m.to_rows();
    let (rows, cols) = (m.rows(), m.cols());
    let mut out = Vec::new();
    let mut t = 0;
    while t < rows.min(cols) {
        // pick the nonzero entry of least absolute value in the remaining block
        let mut best: Option<(usize, usize)> = None;
        for i in t..rows {
            for j in t..cols {
                if !a[i][j].is_zero() && best.is_none_or(|(bi, bj)| a[i][j].abs() < a[bi][bj].abs()) {
                    best = Some((i, j));
                }
            }
        }
        let Some((bi, bj)) = best else { break };
        a.swap(t, bi);
        for row in a.iter_mut() {
            row.swap(t, bj);
        }
        loop {
            let piv = a[t][t].clone();
            let mut done = true;
            for i in t + 1..rows {
                let qt = a[i][t].div_floor(&piv);
                if !qt.is_zero() {
                    for j in t..cols {
                        let v = &a[t][j] * &qt;
                        a[i][j] -= v;
                    }
                }
                if !a[i][t].is_zero() {
                    done = false;
                }
            }
            for j in t + 1..cols {
                let qt = a[t][j].div_floor(&piv);
                if !qt.is_zero() {
                    for row in a.iter_mut().skip(t) {
                        let v = &row[t] * &qt;
                        row[j] -= v;
                    }
                }
                if !a[t][j].is_zero() {
                    done = false;
                }
            }
            if done {
                // divisibility of the rest of the block
                let bad = (t + 1..rows)
                    .flat_map(|i| (t + 1..cols).map(move |j| (i, j)))
                    .find(|&(i, j)| !(&a[i][j] % &piv).is_zero());
                match bad {
                    None => break,
                    Some((i, _)) => {
                        for j in t..cols {
                            let v = a[i][j].clone();
                            a[t][j] += v;
                        }
                        continue;
                    }
                }
            }
            // move a smaller remainder into the pivot slot
            let mut best = (t, t);
            for i in t..rows {
                if !a[i][t].is_zero() && a[i][t].abs() < a[best.0][best.1].abs() {
                    best = (i, t);
                }
            }
            for j in t..cols {
                if !a[t][j].is_zero() && a[t][j].abs() < a[best.0][best.1].abs() {
                    best = (t, j);
                }
            }
            a.swap(t, best.0);
            for row in a.iter_mut() {
                row.swap(t, best.1);
            }
        }
        out.push(a[t][t].abs());
        t += 1;
    }
    while out.len() < rows.min(cols) {
        out.push(BigInt::zero());
    }
    out
}

/// True iff every invariant factor of the n×2n matrix is ±1.
pub fn smith_unit_check(a: &IntMatrix) -> bool {
    a.rows() <= a.cols() && invariant_factors(a).iter().all(|d| d.is_one())
}

/// Row-style Hermite normal form of the lattice spanned by the rows:
/// upper echelon, positive pivots, entries above pivots reduced.
pub fn hermite_normal_form(m: &IntMatrix) -> IntMatrix {
    let (h, _, r) = hermite_with_transform(m);
    h.block(0, r, 0, m.cols())
}

/// Returns (H, U, r) with U unimodular, U·M = H, H in row Hermite form whose
/// first r rows are nonzero.
pub fn hermite_with_transform(m: &IntMatrix) -> (IntMatrix, IntMatrix, usize) {
    let (rows, cols) = (m.rows(), m.cols());
    // work on [M | I] so the row operations are recorded
    let mut a = m.hstack(&IntMatrix::identity(rows)).to_rows();
    let total = cols + rows;
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        // Euclid down the column
        loop {
            let mut best: Option<usize> = None;
            for i in r..rows {
                if !a[i][c].is_zero() && best.is_none_or(|b| a[i][c].abs() < a[b][c].abs()) {
                    best = Some(i);
                }
            }
            let Some(b) = best else { break };
            a.swap(r, b);
            let mut clean = true;
            for i in r + 1..rows {
                let qt = a[i][c].div_floor(&a[r][c]);
                if !qt.is_zero() {
                    for j in 0..total {
                        let v = &a[r][j] * &qt;
                        a[i][j] -= v;
                    }
                }
                if !a[i][c].is_zero() {
                    clean = false;
                }
            }
            if clean {
                break;
            }
        }
        if a[r][c].is_zero() {
            continue;
        }
        if a[r][c].is_negative() {
            for x in a[r].iter_mut() {
                *x = -&*x;
            }
        }
        for i in 0..r {
            let qt = a[i][c].div_floor(&a[r][c]);
            if !qt.is_zero() {
                for j in 0..total {
                    let v = &a[r][j] * &qt;
                    a[i][j] -= v;
                }
            }
        }
        r += 1;
    }
    let full = IntMatrix::from_rows(&a);
    (full.block(0, rows, 0, cols), full.block(0, rows, cols, total), r)
}

/// Least nonnegative residue of a BigInt modulo m.
pub fn big_mod(a: &BigInt, m: u64) -> u64 {
    a.mod_floor(&BigInt::from(m)).to_u64().unwrap()
}

/// Convenience: residue of an i64 with the same convention.
pub fn small_mod(a: i64, m: u64) -> u64 {
    modulo(a, m)
}
