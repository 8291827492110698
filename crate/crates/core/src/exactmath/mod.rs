//! Exact arithmetic: cyclotomic numbers, integer matrices, small number theory.

pub mod arith;
pub mod cyclo;
pub mod matrix;

pub use arith::{crt, euler_phi, factorize, gcd, inv_mod, is_prime, is_squarefree, lcm, prime_divisors};
pub use cyclo::{rational_pow, CycloNumber, RootOfUnity};
pub use matrix::{hermite_normal_form, invariant_factors, rank_mod_p, rank_normalize, smith_unit_check, IntMatrix};

/// Product of two cyclotomic numbers (orders merged to the lcm).
pub fn cyclo_mul(a: &CycloNumber, b: &CycloNumber) -> CycloNumber {
    a.mul(b)
}

/// Complex conjugate ζ ↦ ζ^{-1}.
pub fn cyclo_conj(a: &CycloNumber) -> CycloNumber {
    a.conj()
}
