//! Small-integer number theory: gcd, modular inverses, CRT, factoring,
//! primitive roots. Moduli in this crate are tiny, so `u64` is plenty here;
//! anything that can grow (matrix entries, powers) lives in `BigInt`.

use num_integer::Integer;

use crate::error::{Error, Result};

pub fn gcd(a: u64, b: u64) -> u64 {
    a.gcd(&b)
}

pub fn lcm(a: u64, b: u64) -> u64 {
    if a == 0 || b == 0 {
        0
    } else {
        a / gcd(a, b) * b
    }
}

/// Least nonnegative residue of `a` modulo `m` (m > 0).
pub fn modulo(a: i64, m: u64) -> u64 {
    let m = m as i64;
    (((a % m) + m) % m) as u64
}

pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Inverse of `a` modulo `m` as a canonical residue in `[1, m)`; `0` when `m == 1`.
pub fn inv_mod(a: i64, m: u64) -> Result<u64> {
    if m == 0 {
        return Err(Error::invalid("modulus must be positive"));
    }
    if m == 1 {
        return Ok(0);
    }
    let a = modulo(a, m) as i64;
    let eg = a.extended_gcd(&(m as i64));
    if eg.gcd != 1 {
        return Err(Error::NotCoprime(format!("{} is not a unit modulo {}", a, m)));
    }
    Ok(modulo(eg.x, m))
}

/// Chinese remainder: the unique `x` in `[0, m1*m2)` with `x ≡ a1 (m1)`, `x ≡ a2 (m2)`.
pub fn crt2(a1: u64, m1: u64, a2: u64, m2: u64) -> Result<u64> {
    if gcd(m1, m2) != 1 {
        return Err(Error::NotCoprime(format!("moduli {} and {}", m1, m2)));
    }
    let m = m1 * m2;
    if m == 1 {
        return Ok(0);
    }
    // x = a1 + m1 * ((a2 - a1) * m1^{-1} mod m2)
    let inv = inv_mod(m1 as i64, m2)?;
    let diff = modulo(a2 as i64 - (a1 % m2.max(1)) as i64, m2);
    let t = mul_mod(diff, inv, m2);
    Ok((a1 % m1.max(1) + m1 * t) % m)
}

/// Solve a system of congruences with pairwise coprime moduli.
pub fn crt(residues: &[(u64, u64)]) -> Result<u64> {
    let mut acc = (0u64, 1u64);
    for &(a, m) in residues {
        let x = crt2(acc.0, acc.1, a % m.max(1), m)?;
        acc = (x, acc.1 * m);
    }
    Ok(acc.0)
}

/// Prime factorization by trial division, primes ascending with exponents.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= n {
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn prime_divisors(n: u64) -> Vec<u64> {
    factorize(n).into_iter().map(|(p, _)| p).collect()
}

pub fn is_prime(n: u64) -> bool {
    n >= 2 && factorize(n) == vec![(n, 1)]
}

pub fn is_squarefree(n: u64) -> bool {
    n >= 1 && factorize(n).iter().all(|&(_, e)| e == 1)
}

pub fn euler_phi(n: u64) -> u64 {
    factorize(n).iter().fold(n, |acc, &(p, _)| acc / p * (p - 1))
}

pub fn divisors(n: u64) -> Vec<u64> {
    (1..=n).filter(|d| n % d == 0).collect()
}

/// Multiplicative order of a unit `a` modulo `m`.
pub fn mult_order(a: u64, m: u64) -> u64 {
    if m == 1 {
        return 1;
    }
    let mut x = a % m;
    let mut k = 1;
    while x != 1 {
        x = mul_mod(x, a, m);
        k += 1;
    }
    k
}

/// Least primitive root modulo an odd prime power (or 2, 4).
pub fn primitive_root(m: u64) -> Option<u64> {
    if m == 1 || m == 2 {
        return Some(1);
    }
    let phi = euler_phi(m);
    (2..m).find(|&g| gcd(g, m) == 1 && mult_order(g, m) == phi)
}

/// Discrete logarithm of `a` to base `g` modulo `m` by exhaustive search.
pub fn discrete_log(g: u64, a: u64, m: u64) -> Option<u64> {
    if m == 1 {
        return Some(0);
    }
    let a = a % m;
    let mut x = 1 % m;
    let ord = mult_order(g, m);
    for k in 0..ord {
        if x == a {
            return Some(k);
        }
        x = mul_mod(x, g, m);
    }
    None
}
