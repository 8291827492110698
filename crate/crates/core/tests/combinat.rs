use std::collections::BTreeSet;

use num_bigint::BigInt;
use proptest::prelude::*;

use siegel_eis::combinat::{
    beta, beta_oracle, delta, lemma_6_6_nonzero, lemma_6_7_lhs, mu, sym_chi, sym_chi_bc, sym_closed_form,
    sym_closed_form_comparison, sym_count, LocalCharacter,
};
use siegel_eis::exactmath::{CycloNumber, RootOfUnity};
use siegel_eis::Error;

fn big(n: i64) -> BigInt {
    BigInt::from(n)
}

fn int(n: i64) -> CycloNumber {
    CycloNumber::from_int(n)
}

/// Determinant mod p by cofactor expansion.
fn det_cofactor(m: &[Vec<i64>], p: i64) -> i64 {
    let n = m.len();
    if n == 0 {
        return 1;
    }
    let mut acc = 0;
    for j in 0..n {
        let sub: Vec<Vec<i64>> =
            m[1..].iter().map(|r| r.iter().enumerate().filter(|&(c, _)| c != j).map(|(_, &x)| x).collect()).collect();
        let sign = if j % 2 == 0 { 1 } else { -1 };
        acc += sign * m[0][j] * det_cofactor(&sub, p);
    }
    acc.rem_euclid(p)
}

/// Every symmetric (b+c)×(b+c) matrix over F_p with zero lower-right c×c block.
fn constrained_symmetric(p: i64, b: usize, c: usize) -> Vec<Vec<Vec<i64>>> {
    let t = b + c;
    let slots: Vec<(usize, usize)> =
        (0..t).flat_map(|i| (i..t).map(move |j| (i, j))).filter(|&(i, j)| i < b || j < b).collect();
    let total = (p as usize).pow(slots.len() as u32);
    (0..total)
        .map(|mut code| {
            let mut m = vec![vec![0; t]; t];
            for &(i, j) in &slots {
                let v = (code % p as usize) as i64;
                code /= p as usize;
                m[i][j] = v;
                m[j][i] = v;
            }
            m
        })
        .collect()
}

fn char_sum_oracle(q: i64, chi: &LocalCharacter, b: usize, c: usize) -> CycloNumber {
    constrained_symmetric(q, b, c).iter().fold(CycloNumber::zero(), |acc, m| acc.add(&chi.eval(det_cofactor(m, q))))
}

/// Subspaces of F_p^m as sets of vectors spanned by r chosen vectors.
fn subspace_count(p: u64, m: usize, r: usize) -> usize {
    let vectors: Vec<Vec<u64>> = (0..p.pow(m as u32))
        .map(|mut x| {
            (0..m)
                .map(|_| {
                    let d = x % p;
                    x /= p;
                    d
                })
                .collect()
        })
        .collect();
    let span = |gens: &[&Vec<u64>]| -> BTreeSet<Vec<u64>> {
        let mut out = BTreeSet::new();
        for mut code in 0..p.pow(gens.len() as u32) {
            let mut v = vec![0; m];
            for g in gens {
                let c = code % p;
                code /= p;
                for i in 0..m {
                    v[i] = (v[i] + c * g[i]) % p;
                }
            }
            out.insert(v);
        }
        out
    };
    let size = p.pow(r as u32) as usize;
    let mut found = BTreeSet::new();
    let mut stack: Vec<Vec<usize>> = vec![vec![]];
    while let Some(idx) = stack.pop() {
        let gens: Vec<&Vec<u64>> = idx.iter().map(|&i| &vectors[i]).collect();
        let s = span(&gens);
        if idx.len() == r {
            if s.len() == size {
                found.insert(s);
            }
            continue;
        }
        let start = idx.last().map_or(0, |&i| i + 1);
        for i in start..vectors.len() {
            if !s.contains(&vectors[i]) {
                let mut next = idx.clone();
                next.push(i);
                stack.push(next);
            }
        }
    }
    found.len()
}

fn quadratic(q: u64) -> LocalCharacter {
    LocalCharacter::new(q, RootOfUnity::new(2, 1)).unwrap()
}

#[test]
fn product_examples() {
    assert_eq!(mu(3, 2, 2), big(16));
    assert_eq!(mu(2, 3, 1), big(7));
    assert_eq!(delta(2, 3, 2), big(45));
    assert_eq!(delta(3, 1, 1), big(4));
    for p in [2, 3, 5] {
        for m in 0..4 {
            assert_eq!(mu(p, m, 0), big(1));
            assert_eq!(delta(p, m, 0), big(1));
            assert_eq!(beta(p, m, 0), big(1));
            assert_eq!(beta(p, m, -1), big(0));
            assert_eq!(beta(p, m, m + 1), big(0));
        }
    }
}

#[test]
fn beta_examples() {
    assert_eq!(beta(2, 2, 1), big(3));
    assert_eq!(beta(2, 3, 2), big(7));
    assert_eq!(beta_oracle(2, 2, 1).unwrap(), big(3));
    assert_eq!(beta_oracle(3, 3, 3).unwrap(), big(1));
    assert_eq!(beta_oracle(5, 2, 1).unwrap(), big(6));
    assert!(matches!(beta_oracle(11, 2, 1), Err(Error::OracleOutOfRange(_))));
    assert!(matches!(beta_oracle(2, 6, 1), Err(Error::OracleOutOfRange(_))));
}

#[test]
fn beta_matches_span_enumeration() {
    for p in [2u64, 3] {
        for m in 0..=3usize {
            for r in 0..=m {
                let spans = subspace_count(p, m, r);
                assert_eq!(beta(p, m as i64, r as i64), big(spans as i64), "p={} m={} r={}", p, m, r);
                assert_eq!(beta_oracle(p, m as i64, r as i64).unwrap(), big(spans as i64));
            }
        }
    }
}

#[test]
fn beta_matches_echelon_oracle() {
    for p in [2, 3, 5] {
        for m in 0..=4 {
            for r in 0..=m {
                assert_eq!(beta(p, m, r), beta_oracle(p, m, r).unwrap(), "p={} m={} r={}", p, m, r);
            }
        }
    }
}

#[test]
fn beta_symmetry_and_recursion() {
    for p in [2u64, 3, 5, 7] {
        for m in 0..=6i64 {
            for r in 0..=m {
                assert_eq!(beta(p, m, r), beta(p, m, m - r));
                if m >= 1 {
                    assert_eq!(
                        beta(p, m, r),
                        BigInt::from(p).pow(r as u32) * beta(p, m - 1, r) + beta(p, m - 1, r - 1)
                    );
                }
            }
        }
    }
}

#[test]
fn sym_count_examples() {
    assert_eq!(sym_count(2, 0).unwrap(), big(1));
    assert_eq!(sym_count(2, 1).unwrap(), big(1));
    assert_eq!(sym_count(2, 2).unwrap(), big(4));
    assert_eq!(sym_count(3, 2).unwrap(), big(18));
    assert!(matches!(sym_count(7, 5), Err(Error::OracleOutOfRange(_))));
}

#[test]
fn sym_count_matches_cofactor_oracle() {
    for (p, tmax) in [(2i64, 3usize), (3, 3), (5, 2)] {
        for t in 0..=tmax {
            let n = constrained_symmetric(p, t, 0).iter().filter(|m| det_cofactor(m, p) != 0).count();
            assert_eq!(sym_count(p as u64, t).unwrap(), big(n as i64), "p={} t={}", p, t);
        }
    }
}

#[test]
fn character_sum_examples() {
    assert_eq!(sym_chi(2, &LocalCharacter::trivial(2), 2).unwrap(), int(4));
    for chi in LocalCharacter::all(5) {
        assert_eq!(sym_chi(5, &chi, 0).unwrap(), int(1));
        if !chi.is_trivial() {
            assert!(sym_chi(5, &chi, 1).unwrap().is_zero());
        }
    }
    for q in [3, 5] {
        for chi in LocalCharacter::all(q) {
            for t in 0..=2 {
                assert_eq!(sym_chi_bc(q, &chi, t, 0).unwrap(), sym_chi(q, &chi, t).unwrap());
            }
        }
    }
}

#[test]
fn character_sums_match_cofactor_oracle() {
    for q in [2u64, 3, 5] {
        for chi in LocalCharacter::all(q) {
            for t in 0..=3usize {
                for c in 0..=t {
                    if q == 5 && t == 3 && c == 0 {
                        continue;
                    }
                    let want = char_sum_oracle(q as i64, &chi, t - c, c);
                    assert_eq!(
                        sym_chi_bc(q, &chi, t - c, c).unwrap(),
                        want,
                        "q={} order {} b={} c={}",
                        q,
                        chi.order(),
                        t - c,
                        c
                    );
                }
            }
        }
    }
}

#[test]
fn closed_form_examples() {
    let quartic = LocalCharacter::new(5, RootOfUnity::new(4, 1)).unwrap();
    for (b, c) in [(1, 0), (2, 0), (1, 1), (0, 2), (2, 1)] {
        assert_eq!(sym_closed_form(5, &quartic, b, c).unwrap(), Some(CycloNumber::zero()));
    }
    assert_eq!(sym_closed_form(3, &LocalCharacter::trivial(3), 1, 0).unwrap(), Some(int(2)));
    // the q = 2 row for even b + c does not reproduce the enumerated count
    assert_eq!(sym_count(2, 2).unwrap(), big(4));
    assert_ne!(sym_closed_form(2, &LocalCharacter::trivial(2), 2, 0).unwrap(), Some(int(4)));
}

#[test]
fn closed_form_agrees_for_odd_primes() {
    for row in sym_closed_form_comparison(&[3, 5], 4).unwrap() {
        assert!(row.agrees(), "q={} order {} b={} c={}", row.q, row.chi_order, row.b, row.c);
    }
}

#[test]
fn closed_form_disagreement_at_two_is_confined() {
    let rows = sym_closed_form_comparison(&[2], 4).unwrap();
    let bad: Vec<(usize, usize)> = rows.iter().filter(|r| !r.agrees()).map(|r| (r.b, r.c)).collect();
    assert_eq!(bad, vec![(2, 0), (1, 1), (4, 0), (3, 1), (2, 2)]);
    assert!(rows.iter().all(|r| r.agrees() || r.in_known_disagreement()));
}

#[test]
fn vanishing_predicate() {
    assert!(lemma_6_6_nonzero(5, &LocalCharacter::trivial(5), 3));
    assert!(!lemma_6_6_nonzero(5, &quadratic(5), 1));
    assert!(lemma_6_6_nonzero(5, &quadratic(5), 2));
    for q in [3, 5, 7] {
        for chi in LocalCharacter::all(q) {
            for t in 0..=3 {
                assert_eq!(
                    lemma_6_6_nonzero(q, &chi, t),
                    !sym_chi(q, &chi, t).unwrap().is_zero(),
                    "q={} order {} t={}",
                    q,
                    chi.order(),
                    t
                );
            }
        }
    }
}

#[test]
fn symmetric_count_identity() {
    assert_eq!(lemma_6_7_lhs(2, 2).unwrap(), big(8));
    assert_eq!(lemma_6_7_lhs(3, 2).unwrap(), big(27));
    assert_eq!(lemma_6_7_lhs(7, 0).unwrap(), big(1));
    for p in [2u64, 3, 5] {
        for t in 0..=3usize {
            assert_eq!(lemma_6_7_lhs(p, t).unwrap(), BigInt::from(p).pow((t * (t + 1) / 2) as u32));
        }
    }
    for p in [2u64, 3] {
        assert_eq!(lemma_6_7_lhs(p, 4).unwrap(), BigInt::from(p).pow(10));
    }
}

proptest! {
    #[test]
    fn local_characters_are_multiplicative(e in 0u64..6, a in 1i64..50, b in 1i64..50) {
        let chi = LocalCharacter::new(7, RootOfUnity::new(6, e as i64)).unwrap();
        prop_assert_eq!(chi.eval(a * b), chi.eval(a).mul(&chi.eval(b)));
        prop_assert_eq!(chi.eval(1), int(1));
    }

    #[test]
    fn conjugate_character_sums_agree(q in prop::sample::select(vec![3u64, 5, 7]), e in 0u64..6, b in 0usize..=2, c in 0usize..=1) {
        let chi = LocalCharacter::all(q)[(e % (q - 1)) as usize];
        prop_assert_eq!(sym_chi_bc(q, &chi.conj(), b, c).unwrap(), sym_chi_bc(q, &chi, b, c).unwrap());
    }
}
