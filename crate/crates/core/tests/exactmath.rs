use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;

use siegel_eis::exactmath::{
    cyclo_conj, cyclo_mul, rank_mod_p, rank_normalize, smith_unit_check, CycloNumber, IntMatrix, RootOfUnity,
};

fn zeta(m: u64, e: i64) -> CycloNumber {
    RootOfUnity::new(m, e).to_cyclo()
}

fn int(n: i64) -> CycloNumber {
    CycloNumber::from_int(n)
}

fn cyclo_in(m: u64) -> impl Strategy<Value = CycloNumber> {
    prop::collection::vec((-5i64..=5, 1i64..=3), m as usize).prop_map(move |cs| {
        let coeffs = cs.into_iter().map(|(n, d)| BigRational::new(n.into(), d.into())).collect();
        CycloNumber::from_power_coeffs(m, coeffs)
    })
}

/// Three elements of one cyclotomic field Q(ζ_m), m ≤ 24; the second is
/// written at a divisor order to exercise promotion.
fn cyclo_triple() -> impl Strategy<Value = (CycloNumber, CycloNumber, CycloNumber)> {
    (1u64..=24).prop_flat_map(|m| {
        let divisors: Vec<u64> = (1..=m).filter(|d| m % d == 0).collect();
        (cyclo_in(m), prop::sample::select(divisors).prop_flat_map(cyclo_in), cyclo_in(m))
    })
}

fn small_matrix(max: usize, range: i64) -> impl Strategy<Value = IntMatrix> {
    (1..=max, 1..=max).prop_flat_map(move |(r, c)| {
        prop::collection::vec(-range..=range, r * c)
            .prop_map(move |v| IntMatrix::from_fn(r, c, |i, j| BigInt::from(v[i * c + j])))
    })
}

fn combos(m: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    if m < k {
        return vec![];
    }
    let mut out = combos(m - 1, k);
    for mut c in combos(m - 1, k - 1) {
        c.push(m - 1);
        out.push(c);
    }
    out
}

fn minor(m: &IntMatrix, rows: &[usize], cols: &[usize]) -> BigInt {
    IntMatrix::from_fn(rows.len(), cols.len(), |i, j| m.get(rows[i], cols[j]).clone()).det()
}

/// Largest k with some k×k minor nonzero mod p.
fn rank_by_minors(m: &IntMatrix, p: u64) -> usize {
    let p = BigInt::from(p);
    (1..=m.rows().min(m.cols()))
        .rev()
        .find(|&k| {
            combos(m.rows(), k)
                .iter()
                .any(|r| combos(m.cols(), k).iter().any(|c| !minor(m, r, c).mod_floor(&p).is_zero()))
        })
        .unwrap_or(0)
}

#[test]
fn cyclotomic_examples() {
    assert_eq!(cyclo_mul(&zeta(4, 1), &zeta(4, 1)), int(-1));
    let x = zeta(12, 5).add(&CycloNumber::from_frac(2, 7));
    assert_eq!(cyclo_mul(&x, &CycloNumber::one()), x);
    let a = int(1).add(&zeta(3, 1));
    let b = int(1).add(&zeta(3, 2));
    assert_eq!(cyclo_mul(&a, &b), int(1));
    assert_eq!(cyclo_conj(&zeta(4, 1)), zeta(4, 3));
    assert_eq!(cyclo_conj(&CycloNumber::from_frac(-3, 5)), CycloNumber::from_frac(-3, 5));
    // 1 + ζ_3 = −ζ_3², and ζ_6 = −ζ_3²
    assert_eq!(a, zeta(3, 2).neg());
    assert_eq!(zeta(6, 1), zeta(3, 2).neg());
    // sum of all primitive 5th roots is −1
    let s = (1..5).fold(CycloNumber::zero(), |acc, e| acc.add(&zeta(5, e)));
    assert_eq!(s, int(-1));
}

#[test]
fn roots_of_unity_are_canonical() {
    assert_eq!(RootOfUnity::new(6, 2), RootOfUnity::new(3, 1));
    assert_eq!(RootOfUnity::new(4, -1), RootOfUnity::new(4, 3));
    assert!(RootOfUnity::new(7, 14).is_one());
    assert_eq!(RootOfUnity::new(12, 4).to_cyclo(), zeta(3, 1));
}

#[test]
fn embeddings_are_injective() {
    let mut seen: Vec<CycloNumber> = Vec::new();
    for m in 1..=12u64 {
        for e in 0..m as i64 {
            let z = zeta(m, e);
            if RootOfUnity::new(m, e).order() == m {
                assert!(!seen.contains(&z), "ζ_{}^{} collides", m, e);
                seen.push(z);
            }
        }
    }
    assert_ne!(CycloNumber::from_frac(1, 2), CycloNumber::from_frac(2, 3));
}

#[test]
fn cyclo_json_round_trip() {
    let x = zeta(15, 4).add(&CycloNumber::from_frac(-7, 3)).mul(&zeta(4, 1));
    let s = serde_json::to_string(&x).unwrap();
    let y: CycloNumber = serde_json::from_str(&s).unwrap();
    assert_eq!(x, y);
    assert_eq!(serde_json::to_string(&y).unwrap(), s);
}

#[test]
fn rank_examples() {
    assert_eq!(rank_mod_p(&IntMatrix::from_rows(&[vec![1, 1], vec![1, 1]]), 2), 1);
    for p in [2, 3, 5] {
        assert_eq!(rank_mod_p(&IntMatrix::identity(4), p), 4);
    }
    assert_eq!(rank_mod_p(&IntMatrix::from_rows(&[vec![2, 0], vec![0, 3]]), 3), 1);
}

fn check_rank_normalize(m: &IntMatrix, q: u64) {
    let (e0, e1, d) = rank_normalize(m, q);
    assert!(e0.det().is_one() && e1.det().is_one());
    assert_eq!(d, rank_mod_p(m, q));
    let n = m.rows();
    let r = e0.mul(m).mul(&e1).mod_reduce(q);
    for i in 0..n {
        for j in 0..n {
            if i >= d || j >= d {
                assert!(r.get(i, j).is_zero(), "nonzero outside the leading block of {}", r);
            }
        }
    }
    assert_eq!(rank_mod_p(&r.block(0, d, 0, d), q), d);
}

#[test]
fn rank_normalize_examples() {
    let (e0, e1, d) = rank_normalize(&IntMatrix::zeros(3, 3), 5);
    assert_eq!((e0, e1, d), (IntMatrix::identity(3), IntMatrix::identity(3), 0));
    let (e0, e1, d) = rank_normalize(&IntMatrix::identity(3), 5);
    assert_eq!((e0, e1, d), (IntMatrix::identity(3), IntMatrix::identity(3), 3));
    check_rank_normalize(&IntMatrix::from_rows(&[vec![0, 1], vec![1, 0]]), 3);
}

#[test]
fn smith_unit_examples() {
    for n in 1..=3 {
        let i = IntMatrix::identity(n);
        let z = IntMatrix::zeros(n, n);
        assert!(smith_unit_check(&i.hstack(&z)));
        assert!(!smith_unit_check(&i.scale(&BigInt::from(2)).hstack(&z)));
    }
    assert!(smith_unit_check(&IntMatrix::from_rows(&[vec![2, 3]])));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ring_axioms((a, b, c) in cyclo_triple()) {
        prop_assert_eq!(a.add(&b), b.add(&a));
        prop_assert_eq!(a.mul(&b), b.mul(&a));
        prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
        prop_assert_eq!(a.add(&b).add(&c), a.add(&b.add(&c)));
        prop_assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
        prop_assert_eq!(a.sub(&a), CycloNumber::zero());
        prop_assert_eq!(a.mul(&CycloNumber::one()), a.clone());
    }

    #[test]
    fn conjugation_is_an_involutive_automorphism((a, b, _) in cyclo_triple()) {
        prop_assert_eq!(cyclo_conj(&cyclo_conj(&a)), a.clone());
        prop_assert_eq!(cyclo_conj(&a.mul(&b)), cyclo_conj(&a).mul(&cyclo_conj(&b)));
        prop_assert_eq!(cyclo_conj(&a.add(&b)), cyclo_conj(&a).add(&cyclo_conj(&b)));
        let norm = a.mul(&cyclo_conj(&a));
        prop_assert_eq!(cyclo_conj(&norm), norm);
    }

    #[test]
    fn inverse_is_exact((a, _, _) in cyclo_triple()) {
        prop_assume!(!a.is_zero());
        prop_assert_eq!(a.mul(&a.inv().unwrap()), CycloNumber::one());
    }

    #[test]
    fn rank_matches_minor_scan(m in small_matrix(4, 6), p in prop::sample::select(vec![2u64, 3, 5])) {
        prop_assert_eq!(rank_mod_p(&m, p), rank_by_minors(&m, p));
    }

    #[test]
    fn rank_normalize_post(n in 1usize..=4, v in prop::collection::vec(-9i64..=9, 16), q in prop::sample::select(vec![2u64, 3, 5, 7])) {
        let m = IntMatrix::from_fn(n, n, |i, j| BigInt::from(v[i * 4 + j]));
        check_rank_normalize(&m, q);
    }

    #[test]
    fn unit_factors_iff_maximal_minors_coprime(n in 1usize..=2, v in prop::collection::vec(-4i64..=4, 8)) {
        let a = IntMatrix::from_fn(n, 2 * n, |i, j| BigInt::from(v[i * 4 + j]));
        let rows: Vec<usize> = (0..n).collect();
        let g = combos(2 * n, n).iter().fold(BigInt::zero(), |g, c| g.gcd(&minor(&a, &rows, c)));
        prop_assert_eq!(smith_unit_check(&a), g.is_one());
    }
}
