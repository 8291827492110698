//! Exact arithmetic in cyclotomic fields Q(ζ_m).
//!
//! An element is stored as its coefficient vector on the power basis
//! 1, ζ, …, ζ^{φ(m)-1}, i.e. reduced modulo the m-th cyclotomic polynomial.
//! Mixed-order arithmetic promotes both operands to the lcm of the orders.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::arith::{divisors, euler_phi, gcd, lcm};
use crate::error::{Error, Result};

/// A root of unity ζ_order^exponent, kept in lowest terms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RootOfUnity {
    order: u64,
    exponent: u64,
}

impl RootOfUnity {
    pub fn new(order: u64, exponent: i64) -> Self {
        assert!(order > 0, "root of unity needs a positive order");
        let e = exponent.rem_euclid(order as i64) as u64;
        let g = gcd(e, order);
        if e == 0 {
            RootOfUnity { order: 1, exponent: 0 }
        } else {
            RootOfUnity { order: order / g, exponent: e / g }
        }
    }

    pub fn one() -> Self {
        RootOfUnity { order: 1, exponent: 0 }
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn exponent(&self) -> u64 {
        self.exponent
    }

    pub fn is_one(&self) -> bool {
        self.order == 1
    }

    pub fn mul(&self, other: &RootOfUnity) -> RootOfUnity {
        let m = lcm(self.order, other.order);
        let e = self.exponent * (m / self.order) + other.exponent * (m / other.order);
        RootOfUnity::new(m, e as i64)
    }

    pub fn pow(&self, k: i64) -> RootOfUnity {
        let e = (self.exponent as i128 * k as i128).rem_euclid(self.order as i128);
        RootOfUnity::new(self.order, e as i64)
    }

    pub fn conj(&self) -> RootOfUnity {
        RootOfUnity::new(self.order, -(self.exponent as i64))
    }

    pub fn to_cyclo(&self) -> CycloNumber {
        let mut c = vec![BigRational::zero(); self.order as usize];
        c[self.exponent as usize] = BigRational::one();
        CycloNumber::from_power_coeffs(self.order, c)
    }
}

fn poly_cache() -> &'static Mutex<HashMap<u64, Arc<Vec<i64>>>> {
    static CACHE: OnceLock<Mutex<HashMap<u64, Arc<Vec<i64>>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Coefficients (ascending degree) of the m-th cyclotomic polynomial.
pub fn cyclotomic_polynomial(m: u64) -> Arc<Vec<i64>> {
    if let Some(p) = poly_cache().lock().unwrap().get(&m) {
        return p.clone();
    }
    // x^m - 1 divided by Φ_d for every proper divisor d
    let mut num = vec![0i64; m as usize + 1];
    num[0] = -1;
    num[m as usize] = 1;
    for d in divisors(m) {
        if d == m {
            continue;
        }
        let den = cyclotomic_polynomial(d);
        num = divide_monic(&num, &den);
    }
    let p = Arc::new(num);
    poly_cache().lock().unwrap().insert(m, p.clone());
    p
}

fn divide_monic(num: &[i64], den: &[i64]) -> Vec<i64> {
    let mut rem = num.to_vec();
    let dn = den.len() - 1;
    let qn = rem.len() - 1 - dn;
    let mut quo = vec![0i64; qn + 1];
    for i in (0..=qn).rev() {
        let c = rem[i + dn];
        quo[i] = c;
        if c != 0 {
            for (j, &dj) in den.iter().enumerate() {
                rem[i + j] -= c * dj;
            }
        }
    }
    debug_assert!(rem.iter().all(|&x| x == 0));
    quo
}

/// Exact element of Q(ζ_m).
#[derive(Clone, Debug)]
pub struct CycloNumber {
    order: u64,
    coeffs: Vec<BigRational>,
}

impl CycloNumber {
    pub fn zero() -> Self {
        CycloNumber { order: 1, coeffs: vec![BigRational::zero()] }
    }

    pub fn one() -> Self {
        Self::from_rational(BigRational::one())
    }

    pub fn from_rational(r: BigRational) -> Self {
        CycloNumber { order: 1, coeffs: vec![r] }
    }

    pub fn from_int(n: impl Into<BigInt>) -> Self {
        Self::from_rational(BigRational::from_integer(n.into()))
    }

    pub fn from_frac(num: i64, den: i64) -> Self {
        Self::from_rational(BigRational::new(num.into(), den.into()))
    }

    /// Build Σ c_a ζ_m^a from coefficients on ζ^0 … ζ^{len-1}; any length.
    pub fn from_power_coeffs(order: u64, coeffs: Vec<BigRational>) -> Self {
        assert!(order > 0);
        CycloNumber { order, coeffs: reduce(order, coeffs) }
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    /// Coefficients on the reduced power basis (length φ(order)).
    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn is_one(&self) -> bool {
        self.as_rational().is_some_and(|r| r.is_one())
    }

    /// The value as a rational number, if it is one.
    pub fn as_rational(&self) -> Option<BigRational> {
        if self.coeffs.iter().skip(1).all(|c| c.is_zero()) {
            Some(self.coeffs[0].clone())
        } else {
            None
        }
    }

    /// Rewrite in Q(ζ_m) for a multiple m of the current order.
    pub fn lift(&self, m: u64) -> CycloNumber {
        assert!(m % self.order == 0, "lift target must be a multiple of the order");
        if m == self.order {
            return self.clone();
        }
        let step = (m / self.order) as usize;
        let mut c = vec![BigRational::zero(); m as usize];
        for (i, a) in self.coeffs.iter().enumerate() {
            c[i * step] = a.clone();
        }
        CycloNumber::from_power_coeffs(m, c)
    }

    pub fn add(&self, other: &CycloNumber) -> CycloNumber {
        let m = lcm(self.order, other.order);
        let (a, b) = (self.lift(m), other.lift(m));
        let coeffs = a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| x + y).collect();
        CycloNumber { order: m, coeffs }
    }

    pub fn neg(&self) -> CycloNumber {
        CycloNumber { order: self.order, coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }

    pub fn sub(&self, other: &CycloNumber) -> CycloNumber {
        self.add(&other.neg())
    }

    pub fn scale(&self, r: &BigRational) -> CycloNumber {
        CycloNumber { order: self.order, coeffs: self.coeffs.iter().map(|c| c * r).collect() }
    }

    pub fn mul(&self, other: &CycloNumber) -> CycloNumber {
        if let Some(r) = other.as_rational() {
            return self.scale(&r);
        }
        if let Some(r) = self.as_rational() {
            return other.scale(&r);
        }
        let m = lcm(self.order, other.order);
        let (a, b) = (self.lift(m), other.lift(m));
        let mut prod = vec![BigRational::zero(); a.coeffs.len() + b.coeffs.len() - 1];
        for (i, x) in a.coeffs.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.coeffs.iter().enumerate() {
                if !y.is_zero() {
                    prod[i + j] += x * y;
                }
            }
        }
        CycloNumber::from_power_coeffs(m, prod)
    }

    /// Image under the automorphism ζ ↦ ζ^a, gcd(a, order) = 1.
    pub fn galois(&self, a: u64) -> CycloNumber {
        let m = self.order;
        let mut c = vec![BigRational::zero(); m as usize];
        for (i, x) in self.coeffs.iter().enumerate() {
            let idx = ((i as u64 * a) % m) as usize;
            c[idx] += x;
        }
        CycloNumber::from_power_coeffs(m, c)
    }

    /// Complex conjugation ζ ↦ ζ^{-1}.
    pub fn conj(&self) -> CycloNumber {
        self.galois(self.order - 1)
    }

    /// Field inverse via the norm: x^{-1} = (∏_{a≠1} σ_a(x)) / N(x).
    pub fn inv(&self) -> Result<CycloNumber> {
        if self.is_zero() {
            return Err(Error::invalid("division by zero in cyclotomic field"));
        }
        if let Some(r) = self.as_rational() {
            return Ok(CycloNumber::from_rational(r.recip()));
        }
        let m = self.order;
        let mut others = CycloNumber::one();
        for a in 2..m {
            if gcd(a, m) == 1 {
                others = others.mul(&self.galois(a));
            }
        }
        let norm = self.mul(&others).as_rational().expect("norm is rational");
        Ok(others.scale(&norm.recip()))
    }

    pub fn div(&self, other: &CycloNumber) -> Result<CycloNumber> {
        Ok(self.mul(&other.inv()?))
    }

    pub fn pow(&self, k: u32) -> CycloNumber {
        let mut acc = CycloNumber::one();
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    /// Same element written over the smallest possible cyclotomic field.
    pub fn minimal(&self) -> CycloNumber {
        if let Some(r) = self.as_rational() {
            return CycloNumber::from_rational(r);
        }
        for d in divisors(self.order) {
            if d == 1 || d == self.order {
                continue;
            }
            if let Some(c) = self.coords_in_subfield(d) {
                return CycloNumber { order: d, coeffs: c };
            }
        }
        self.clone()
    }

    // Solve Σ c_i ζ_d^i = self inside Q(ζ_m).
    fn coords_in_subfield(&self, d: u64) -> Option<Vec<BigRational>> {
        let m = self.order;
        let k = euler_phi(d) as usize;
        let rows = self.coeffs.len();
        let basis: Vec<CycloNumber> = (0..k)
            .map(|i| {
                let mut c = vec![BigRational::zero(); m as usize];
                c[(i as u64 * (m / d)) as usize] = BigRational::one();
                CycloNumber::from_power_coeffs(m, c)
            })
            .collect();
        // augmented rows x (k + 1)
        let mut a: Vec<Vec<BigRational>> = (0..rows)
            .map(|r| {
                let mut row: Vec<BigRational> = basis.iter().map(|b| b.coeffs[r].clone()).collect();
                row.push(self.coeffs[r].clone());
                row
            })
            .collect();
        let mut pivots = Vec::new();
        let mut r = 0;
        for col in 0..k {
            let Some(p) = (r..rows).find(|&i| !a[i][col].is_zero()) else { continue };
            a.swap(r, p);
            let inv = a[r][col].recip();
            for x in a[r].iter_mut() {
                *x = &*x * &inv;
            }
            for i in 0..rows {
                if i != r && !a[i][col].is_zero() {
                    let f = a[i][col].clone();
                    for j in 0..=k {
                        let v = &a[r][j] * &f;
                        a[i][j] -= v;
                    }
                }
            }
            pivots.push(col);
            r += 1;
        }
        if a[r..].iter().any(|row| !row[k].is_zero()) {
            return None;
        }
        let mut out = vec![BigRational::zero(); k];
        for (i, &col) in pivots.iter().enumerate() {
            out[col] = a[i][k].clone();
        }
        Some(out)
    }

    /// Coefficients of the minimal form as a length-m vector on ζ_m^0 … ζ_m^{m-1}.
    pub fn json_coeffs(&self) -> (u64, Vec<BigRational>) {
        let mn = self.minimal();
        let mut c = mn.coeffs.clone();
        c.resize(mn.order as usize, BigRational::zero());
        (mn.order, c)
    }
}

fn reduce(m: u64, raw: Vec<BigRational>) -> Vec<BigRational> {
    let mu = m as usize;
    let mut folded = vec![BigRational::zero(); mu];
    for (i, c) in raw.into_iter().enumerate() {
        if !c.is_zero() {
            folded[i % mu] += c;
        }
    }
    let phi = cyclotomic_polynomial(m);
    let deg = phi.len() - 1;
    for i in (deg..mu).rev() {
        let c = std::mem::replace(&mut folded[i], BigRational::zero());
        if c.is_zero() {
            continue;
        }
        // x^i = x^{i-deg} * (x^deg) and x^deg ≡ -(Φ - x^deg)
        for (j, &pj) in phi.iter().enumerate().take(deg) {
            if pj != 0 {
                folded[i - deg + j] -= &c * BigRational::from_integer(pj.into());
            }
        }
    }
    folded.truncate(deg);
    folded
}

impl PartialEq for CycloNumber {
    fn eq(&self, other: &Self) -> bool {
        let m = lcm(self.order, other.order);
        self.lift(m).coeffs == other.lift(m).coeffs
    }
}

impl Eq for CycloNumber {}

impl From<RootOfUnity> for CycloNumber {
    fn from(r: RootOfUnity) -> Self {
        r.to_cyclo()
    }
}

impl From<i64> for CycloNumber {
    fn from(n: i64) -> Self {
        CycloNumber::from_int(n)
    }
}

impl From<BigRational> for CycloNumber {
    fn from(r: BigRational) -> Self {
        CycloNumber::from_rational(r)
    }
}

impl fmt::Display for CycloNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mn = self.minimal();
        if let Some(r) = mn.as_rational() {
            return write!(f, "{}", r);
        }
        let mut first = true;
        for (i, c) in mn.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let sign = if c.is_negative() { "-" } else { "+" };
            let abs = c.abs();
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", sign)?;
            }
            first = false;
            match i {
                0 => write!(f, "{}", abs)?,
                _ => {
                    if !abs.is_one() {
                        write!(f, "{}*", abs)?;
                    }
                    if i == 1 {
                        write!(f, "ζ{}", mn.order)?;
                    } else {
                        write!(f, "ζ{}^{}", mn.order, i)?;
                    }
                }
            }
        }
        Ok(())
    }
}

fn fmt_rational(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n, d),
        None => (s, "1"),
    };
    let n: BigInt = n.trim().parse().map_err(|_| Error::Parse(format!("bad rational {:?}", s)))?;
    let d: BigInt = d.trim().parse().map_err(|_| Error::Parse(format!("bad rational {:?}", s)))?;
    if d.is_zero() {
        return Err(Error::Parse(format!("zero denominator in {:?}", s)));
    }
    Ok(BigRational::new(n, d))
}

#[derive(Serialize, Deserialize)]
struct CycloJson {
    order: u64,
    coeffs: Vec<String>,
}

impl Serialize for CycloNumber {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let (order, coeffs) = self.json_coeffs();
        CycloJson { order, coeffs: coeffs.iter().map(fmt_rational).collect() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for CycloNumber {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = CycloJson::deserialize(d)?;
        if j.order == 0 {
            return Err(serde::de::Error::custom("order must be positive"));
        }
        let coeffs =
            j.coeffs.iter().map(|s| parse_rational(s)).collect::<Result<Vec<_>>>().map_err(serde::de::Error::custom)?;
        Ok(CycloNumber::from_power_coeffs(j.order, coeffs))
    }
}

/// p^e as an exact rational (e may be negative).
pub fn rational_pow(p: u64, e: i64) -> BigRational {
    let base = BigInt::from(p);
    let mag = num_traits::pow(base, e.unsigned_abs() as usize);
    if e >= 0 {
        BigRational::from_integer(mag)
    } else {
        BigRational::new(BigInt::one(), mag)
    }
}
