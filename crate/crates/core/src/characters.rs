//! Dirichlet characters with exact root-of-unity values.

use std::fmt;

use crate::combinat::LocalCharacter;
use crate::error::{Error, Result};
use crate::exactmath::arith::{crt, discrete_log, euler_phi, factorize, gcd, lcm, modulo, pow_mod, primitive_root};
use crate::exactmath::{CycloNumber, RootOfUnity};

pub use crate::exactmath::arith::inv_mod;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum GenKind {
    /// Least primitive root g modulo an odd prime power (or 3 mod 4).
    Cyclic(u64),
    /// −1 modulo 2^e, e ≥ 3.
    MinusOne,
    /// 5 modulo 2^e, e ≥ 3.
    Five,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Generator {
    /// Residue modulo N: the local generator in its component, 1 elsewhere.
    pub residue: u64,
    pub order: u64,
    /// Prime and prime-power modulus of the component it lives in.
    pub prime: u64,
    pub component: u64,
    kind: GenKind,
}

/// (Z/NZ)^× presented as a product of cyclic groups.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnitGroup {
    modulus: u64,
    generators: Vec<Generator>,
}

impl UnitGroup {
    pub fn new(modulus: u64) -> Result<Self> {
        if modulus == 0 {
            return Err(Error::invalid("modulus must be positive"));
        }
        let fac = factorize(modulus);
        let mut generators = Vec::new();
        for &(p, e) in &fac {
            let pe = p.pow(e);
            let lift = |g: u64| -> u64 {
                let parts: Vec<(u64, u64)> = fac
                    .iter()
                    .map(|&(q, f)| {
                        let qf = q.pow(f);
                        (if q == p { g % qf } else { 1 % qf }, qf)
                    })
                    .collect();
                crt(&parts).expect("coprime prime powers")
            };
            let mut push = |local: u64, order: u64, kind: GenKind| {
                generators.push(Generator { residue: lift(local), order, prime: p, component: pe, kind });
            };
            if p == 2 {
                match e {
                    1 => {}
                    2 => push(3, 2, GenKind::Cyclic(3)),
                    _ => {
                        push(pe - 1, 2, GenKind::MinusOne);
                        push(5, pe / 4, GenKind::Five);
                    }
                }
            } else {
                let g = primitive_root(pe).expect("odd prime powers have primitive roots");
                push(g, euler_phi(pe), GenKind::Cyclic(g));
            }
        }
        Ok(UnitGroup { modulus, generators })
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn generators(&self) -> &[Generator] {
        &self.generators
    }

    pub fn order(&self) -> u64 {
        self.generators.iter().map(|g| g.order).product()
    }

    /// Exponent vector of a unit against the generators.
    pub fn log(&self, a: i64) -> Option<Vec<u64>> {
        let a = modulo(a, self.modulus);
        if gcd(a, self.modulus) != 1 {
            return None;
        }
        let mut out = Vec::with_capacity(self.generators.len());
        for g in &self.generators {
            let pe = g.component;
            let x = a % pe;
            let l = match g.kind {
                GenKind::Cyclic(gen) => discrete_log(gen, x, pe).expect("unit in cyclic component"),
                GenKind::MinusOne => u64::from(x % 4 == 3),
                GenKind::Five => {
                    let y = if x % 4 == 3 { pe - x } else { x };
                    discrete_log(5, y, pe).expect("±5^t decomposition")
                }
            };
            out.push(l);
        }
        Some(out)
    }

    /// All units in increasing order.
    pub fn units(&self) -> Vec<u64> {
        (0..self.modulus.max(1)).filter(|&a| gcd(a, self.modulus) == 1).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DirichletCharacter {
    group: UnitGroup,
    exponents: Vec<u64>,
}

impl DirichletCharacter {
    pub fn new(modulus: u64, exponents: Vec<u64>) -> Result<Self> {
        let group = UnitGroup::new(modulus)?;
        if exponents.len() != group.generators.len() {
            return Err(Error::invalid(format!(
                "modulus {} needs {} exponents, got {}",
                modulus,
                group.generators.len(),
                exponents.len()
            )));
        }
        let exponents = exponents.iter().zip(&group.generators).map(|(e, g)| e % g.order).collect();
        Ok(DirichletCharacter { group, exponents })
    }

    pub fn trivial(modulus: u64) -> Result<Self> {
        let n = UnitGroup::new(modulus)?.generators.len();
        Self::new(modulus, vec![0; n])
    }

    pub fn modulus(&self) -> u64 {
        self.group.modulus
    }

    pub fn exponents(&self) -> &[u64] {
        &self.exponents
    }

    pub fn group(&self) -> &UnitGroup {
        &self.group
    }

    pub fn is_trivial(&self) -> bool {
        self.exponents.iter().all(|&e| e == 0)
    }

    /// Order of χ in the dual group.
    pub fn order(&self) -> u64 {
        self.exponents.iter().zip(&self.group.generators).fold(1, |acc, (&e, g)| lcm(acc, g.order / gcd(e, g.order)))
    }

    pub fn eval_root(&self, a: i64) -> Option<RootOfUnity> {
        let logs = self.group.log(a)?;
        let l = self.group.generators.iter().fold(1, |acc, g| lcm(acc, g.order));
        let mut e = 0u64;
        for ((x, g), &ex) in logs.iter().zip(&self.group.generators).zip(&self.exponents) {
            e = (e + (ex * x % g.order) * (l / g.order)) % l;
        }
        Some(RootOfUnity::new(l, e as i64))
    }

    pub fn eval(&self, a: i64) -> CycloNumber {
        self.eval_root(a).map_or_else(CycloNumber::zero, |r| r.to_cyclo())
    }

    /// χ(−1) as ±1.
    pub fn parity(&self) -> i64 {
        let r = self.eval_root(self.modulus() as i64 - 1).expect("−1 is a unit");
        if r.is_one() {
            1
        } else {
            -1
        }
    }

    pub fn conj(&self) -> Self {
        let exponents =
            self.exponents.iter().zip(&self.group.generators).map(|(&e, g)| (g.order - e) % g.order).collect();
        DirichletCharacter { group: self.group.clone(), exponents }
    }

    pub fn pow(&self, k: i64) -> Self {
        let exponents = self
            .exponents
            .iter()
            .zip(&self.group.generators)
            .map(|(&e, g)| (e as i128 * k as i128).rem_euclid(g.order as i128) as u64)
            .collect();
        DirichletCharacter { group: self.group.clone(), exponents }
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.modulus() != other.modulus() {
            return Err(Error::invalid("characters have different moduli"));
        }
        let exponents = self
            .exponents
            .iter()
            .zip(&other.exponents)
            .zip(&self.group.generators)
            .map(|((a, b), g)| (a + b) % g.order)
            .collect();
        Ok(DirichletCharacter { group: self.group.clone(), exponents })
    }

    /// The component χ_{N'} of χ = χ_{N'}·χ_{N/N'}.
    pub fn factor_local(&self, sub: u64) -> Result<Self> {
        let n = self.modulus();
        if sub == 0 || n % sub != 0 || gcd(sub, n / sub) != 1 {
            return Err(Error::NotCoprime(format!("{} is not a coprime divisor of {}", sub, n)));
        }
        let exps = self
            .group
            .generators
            .iter()
            .zip(&self.exponents)
            .filter(|(g, _)| sub % g.prime == 0)
            .map(|(_, &e)| e)
            .collect();
        Self::new(sub, exps)
    }

    /// Extend χ mod M to modulus N (M | N with gcd(M, N/M) = 1), trivial off M.
    pub fn extend_to(&self, n: u64) -> Result<Self> {
        let m = self.modulus();
        if n % m != 0 || gcd(m, n / m) != 1 {
            return Err(Error::NotCoprime(format!("cannot extend modulus {} to {}", m, n)));
        }
        let group = UnitGroup::new(n)?;
        let mut it = self.exponents.iter();
        let exps = group.generators.iter().map(|g| if m % g.prime == 0 { *it.next().unwrap() } else { 0 }).collect();
        Self::new(n, exps)
    }

    /// χ_q for a prime q exactly dividing the modulus.
    pub fn local_at(&self, q: u64) -> Result<LocalCharacter> {
        let n = self.modulus();
        if n % q != 0 || (n / q) % q == 0 {
            return Err(Error::invalid(format!("{} does not exactly divide {}", q, n)));
        }
        let local = self.factor_local(q)?;
        let image = match local.exponents.first() {
            None => RootOfUnity::one(),
            Some(&e) => RootOfUnity::new(q - 1, e as i64),
        };
        LocalCharacter::new(q, image)
    }
}

impl fmt::Display for DirichletCharacter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let e: Vec<String> = self.exponents.iter().map(|x| x.to_string()).collect();
        write!(f, "chi_{}[{}]", self.modulus(), e.join(","))
    }
}

/// Every character mod N, lexicographic in the exponent vector.
pub fn all_characters(modulus: u64) -> Result<Vec<DirichletCharacter>> {
    let group = UnitGroup::new(modulus)?;
    let orders: Vec<u64> = group.generators.iter().map(|g| g.order).collect();
    let mut out = Vec::new();
    let mut exps = vec![0u64; orders.len()];
    loop {
        out.push(DirichletCharacter { group: group.clone(), exponents: exps.clone() });
        // lexicographic: last position varies fastest
        let mut i = orders.len();
        loop {
            if i == 0 {
                return Ok(out);
            }
            i -= 1;
            exps[i] += 1;
            if exps[i] < orders[i] {
                break;
            }
            exps[i] = 0;
        }
    }
}

pub fn eval(chi: &DirichletCharacter, a: i64) -> CycloNumber {
    chi.eval(a)
}

pub fn parity(chi: &DirichletCharacter) -> i64 {
    chi.parity()
}

pub fn factor_local(chi: &DirichletCharacter, sub: u64) -> Result<DirichletCharacter> {
    chi.factor_local(sub)
}

/// A character of U_N × U_N: ψ(v, w) = ψ1(v)·ψ2(w).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CharacterPair {
    pub psi1: DirichletCharacter,
    pub psi2: DirichletCharacter,
}

impl CharacterPair {
    pub fn new(psi1: DirichletCharacter, psi2: DirichletCharacter) -> Result<Self> {
        if psi1.modulus() != psi2.modulus() {
            return Err(Error::invalid("ψ1 and ψ2 must share a modulus"));
        }
        Ok(CharacterPair { psi1, psi2 })
    }

    pub fn eval(&self, v: i64, w: i64) -> CycloNumber {
        self.psi1.eval(v).mul(&self.psi2.eval(w))
    }
}

/// a^k mod m, convenience for character arguments like p^{n−r}.
pub fn power_residue(a: u64, k: u64, m: u64) -> i64 {
    if m == 1 {
        return 0;
    }
    pow_mod(a, k, m) as i64
}
