//! Deterministic verification suites. Every check compares two independent
//! routes exactly and records one case per parameter group; the report is a
//! pure function of the suite, the bounds and the seed.

use std::fmt::Write as _;
use std::str::FromStr;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::characters::all_characters;
use crate::combinat::{
    beta, beta_oracle, lemma_6_6_nonzero, lemma_6_7_lhs, sym_chi, sym_chi_bc, sym_closed_form_comparison, sym_count,
    sym_count_value, LocalCharacter,
};
use crate::cosets::{
    distinct_lattices, lemma_6_2_count, lemma_6_2_oracle, lemma_6_3_count, lemma_6_3_oracle, lemma_6_4a_count,
    lemma_6_4a_oracle, lemma_6_4b_count, lemma_6_4b_oracle, lemma_6_5_count, lemma_6_5_oracle, pairwise_inequivalent,
    similitude_coset_oracle, tjp2_count, tjp2_reps, tjp2_smith_exponents, tp_count, tp_rep_parts, tp_reps, PairShape,
};
use crate::eisenstein::{all_partitions, compatible_psi, nonzero_basis, partition_matrix, ModularParams};
use crate::error::{Error, Result};
use crate::exactmath::arith::{is_squarefree, prime_divisors};
use crate::exactmath::{rational_pow, CycloNumber, IntMatrix};
use crate::hecke::{
    diagonalize, lambda_j_q2, lambda_prime, lambda_psi_p, lambda_q, tjq2_action, tp_action, tprime_action, tq_action,
    ActionMatrix,
};
use crate::symplectic::{chi_of_pair, det_d_block, random_pair_in_class};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

impl Status {
    fn label(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "FAIL",
            Status::Skipped => "skip",
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Case {
    pub id: String,
    pub status: Status,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub suite: String,
    pub seed: u64,
    pub max_n: usize,
    pub max_p: u64,
    pub cases: Vec<Case>,
    pub passed: usize,
    pub failed: usize,
    pub skipped: usize,
    /// Wall time; kept out of the rendered report so reruns compare equal.
    #[serde(skip)]
    pub elapsed: Duration,
}

impl VerificationReport {
    pub fn is_success(&self) -> bool {
        self.failed == 0
    }

    pub fn render_table(&self) -> String {
        let mut s = String::new();
        let width = self.cases.iter().map(|c| c.id.len()).max().unwrap_or(0);
        for c in &self.cases {
            let _ = writeln!(s, "{}  {:<width$}  {}", c.status.label(), c.id, c.detail, width = width);
        }
        let _ = writeln!(
            s,
            "suite {} (seed {}, max-n {}, max-p {}): {} passed, {} failed, {} skipped",
            self.suite, self.seed, self.max_n, self.max_p, self.passed, self.failed, self.skipped
        );
        s
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Combinat,
    Lemmas,
    Cosets,
    Hecke,
    All,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Combinat => "combinat",
            Suite::Lemmas => "lemmas",
            Suite::Cosets => "cosets",
            Suite::Hecke => "hecke",
            Suite::All => "all",
        }
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "combinat" => Suite::Combinat,
            "lemmas" => Suite::Lemmas,
            "cosets" => Suite::Cosets,
            "hecke" => Suite::Hecke,
            "all" => Suite::All,
            _ => return Err(Error::Parse(format!("unknown suite '{}'", s))),
        })
    }
}

#[derive(Clone, Copy, Debug)]
pub struct VerifyOptions {
    /// Largest degree n exercised (each check also has its own hard cap).
    pub max_n: usize,
    /// Largest prime exercised.
    pub max_p: u64,
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { max_n: 3, max_p: 7, seed: 0 }
    }
}

enum Outcome {
    Pass(String),
    Fail(String),
    Skip(String),
}

struct Recorder {
    cases: Vec<Case>,
}

impl Recorder {
    fn check(&mut self, id: impl Into<String>, f: impl FnOnce() -> Result<Outcome>) {
        let (status, detail) = match f() {
            Ok(Outcome::Pass(d)) => (Status::Pass, d),
            Ok(Outcome::Fail(d)) => (Status::Fail, d),
            Ok(Outcome::Skip(d)) => (Status::Skipped, d),
            Err(e) => (Status::Fail, format!("error: {}", e)),
        };
        self.cases.push(Case { id: id.into(), status, detail });
    }
}

/// Pass when `mismatches` is empty, otherwise fail listing the first few.
fn tally(compared: usize, mismatches: Vec<String>) -> Outcome {
    if mismatches.is_empty() {
        Outcome::Pass(format!("{} comparisons", compared))
    } else {
        let shown: Vec<_> = mismatches.iter().take(3).cloned().collect();
        Outcome::Fail(format!("{} of {} differ: {}", mismatches.len(), compared, shown.join("; ")))
    }
}

pub fn run(suite: Suite, opts: &VerifyOptions) -> VerificationReport {
    let start = Instant::now();
    let mut rec = Recorder { cases: Vec::new() };
    let suites: &[Suite] = match suite {
        Suite::All => &[Suite::Combinat, Suite::Lemmas, Suite::Cosets, Suite::Hecke],
        _ => std::slice::from_ref(&suite),
    };
    for s in suites {
        match s {
            Suite::Combinat => combinat_suite(&mut rec, opts),
            Suite::Lemmas => lemma_suite(&mut rec, opts),
            Suite::Cosets => coset_suite(&mut rec, opts),
            Suite::Hecke => hecke_suite(&mut rec, opts),
            Suite::All => unreachable!(),
        }
    }
    let count = |st| rec.cases.iter().filter(|c| c.status == st).count();
    VerificationReport {
        suite: suite.name().to_string(),
        seed: opts.seed,
        max_n: opts.max_n,
        max_p: opts.max_p,
        passed: count(Status::Pass),
        failed: count(Status::Fail),
        skipped: count(Status::Skipped),
        cases: rec.cases,
        elapsed: start.elapsed(),
    }
}

fn primes_upto(list: &[u64], max_p: u64) -> Vec<u64> {
    list.iter().copied().filter(|&p| p <= max_p).collect()
}

// ---------------------------------------------------------------------------

fn combinat_suite(rec: &mut Recorder, opts: &VerifyOptions) {
    for p in primes_upto(&[2, 3, 5], opts.max_p) {
        rec.check(format!("combinat.beta-vs-enumeration p={}", p), || {
            let mut bad = Vec::new();
            let mut n = 0;
            for m in 0..=4i64 {
                for r in 0..=m {
                    n += 1;
                    let (a, b) = (beta(p, m, r), beta_oracle(p, m, r)?);
                    if a != b {
                        bad.push(format!("β({},{}) = {} vs {}", m, r, a, b));
                    }
                }
            }
            Ok(tally(n, bad))
        });
    }
    for p in primes_upto(&[2, 3, 5, 7], opts.max_p) {
        rec.check(format!("combinat.beta-symmetry-recursion p={}", p), || {
            let mut bad = Vec::new();
            let mut n = 0;
            for m in 0..=6i64 {
                for r in 0..=m {
                    n += 1;
                    if beta(p, m, r) != beta(p, m, m - r) {
                        bad.push(format!("symmetry at ({},{})", m, r));
                    }
                    if m >= 1
                        && beta(p, m, r) != BigInt::from(p).pow(r as u32) * beta(p, m - 1, r) + beta(p, m - 1, r - 1)
                    {
                        bad.push(format!("recursion at ({},{})", m, r));
                    }
                }
            }
            Ok(tally(n, bad))
        });
    }
    for (p, t) in [
        (2u64, 0usize),
        (2, 1),
        (2, 2),
        (2, 3),
        (2, 4),
        (3, 0),
        (3, 1),
        (3, 2),
        (3, 3),
        (3, 4),
        (5, 0),
        (5, 1),
        (5, 2),
        (5, 3),
    ] {
        if p > opts.max_p {
            continue;
        }
        rec.check(format!("combinat.symmetric-count-identity p={} t={}", p, t), || {
            let lhs = lemma_6_7_lhs(p, t)?;
            let rhs = BigInt::from(p).pow((t * (t + 1) / 2) as u32);
            Ok(if lhs == rhs {
                Outcome::Pass(format!("{}", lhs))
            } else {
                Outcome::Fail(format!("{} vs {}", lhs, rhs))
            })
        });
    }
    for p in primes_upto(&[2, 3, 5], opts.max_p) {
        rec.check(format!("combinat.sym-count-closed-form p={}", p), || {
            let mut bad = Vec::new();
            let top = if p == 2 { 4 } else { 3 };
            for t in 0..=top {
                if sym_count(p, t)? != sym_count_value(p, t)? {
                    bad.push(format!("t={}", t));
                }
            }
            Ok(tally(top + 1, bad))
        });
    }
    for q in primes_upto(&[3, 5, 7], opts.max_p) {
        rec.check(format!("combinat.character-sum-vanishing q={}", q), || {
            let mut bad = Vec::new();
            let mut n = 0;
            for chi in LocalCharacter::all(q) {
                for t in 0..=3 {
                    n += 1;
                    if lemma_6_6_nonzero(q, &chi, t) != !sym_chi(q, &chi, t)?.is_zero() {
                        bad.push(format!("order {} t={}", chi.order(), t));
                    }
                }
            }
            Ok(tally(n, bad))
        });
    }
    for q in primes_upto(&[2, 3, 5], opts.max_p) {
        rec.check(format!("combinat.character-sum-conjugation q={}", q), || {
            let mut bad = Vec::new();
            let mut n = 0;
            for chi in LocalCharacter::all(q) {
                for t in 0..=3usize {
                    for c in 0..=t {
                        n += 1;
                        if sym_chi_bc(q, &chi.conj(), t - c, c)? != sym_chi_bc(q, &chi, t - c, c)? {
                            bad.push(format!("order {} b={} c={}", chi.order(), t - c, c));
                        }
                    }
                }
            }
            Ok(tally(n, bad))
        });
    }
    for q in primes_upto(&[2, 3, 5], opts.max_p) {
        rec.check(format!("combinat.sym-closed-form q={}", q), || {
            let rows = sym_closed_form_comparison(&[q], 4)?;
            let unexplained: Vec<String> = rows
                .iter()
                .filter(|r| !r.agrees() && !r.in_known_disagreement())
                .map(|r| format!("χ order {} b={} c={}", r.chi_order, r.b, r.c))
                .collect();
            let known: Vec<String> = rows
                .iter()
                .filter(|r| !r.agrees() && r.in_known_disagreement())
                .map(|r| {
                    let closed = r.closed.as_ref().map_or("undefined".to_string(), |c| c.to_string());
                    format!("(b={},c={}) closed {} vs enumerated {}", r.b, r.c, closed, r.enumerated)
                })
                .collect();
            if !unexplained.is_empty() {
                return Ok(tally(rows.len(), unexplained));
            }
            Ok(if known.is_empty() {
                Outcome::Pass(format!("{} comparisons", rows.len()))
            } else {
                Outcome::Pass(format!("even-size rows disagree with enumeration (documented): {}", known.join("; ")))
            })
        });
    }
}

// ---------------------------------------------------------------------------

fn rank_test_matrices(n: usize, d_prime: usize, q: u64) -> Vec<IntMatrix> {
    let d = IntMatrix::diag(&(0..n).map(|i| i64::from(i < d_prime)).collect::<Vec<_>>());
    let u = IntMatrix::from_fn(n, n, |i, j| BigInt::from(i64::from(i <= j)));
    let l = IntMatrix::from_fn(n, n, |i, j| BigInt::from(if i >= j { 1 + (i - j) as i64 } else { 0 }));
    let twisted = l.mul(&d).mul(&u);
    let junk = IntMatrix::from_fn(n, n, |i, j| BigInt::from((i * n + j) as i64 % 3));
    vec![d, twisted.add(&junk.scale(&BigInt::from(q)))]
}

fn pair_shapes(n: usize) -> Vec<PairShape> {
    let mut out = Vec::new();
    let r = 0..=n;
    for j in r.clone() {
        for d1 in r.clone() {
            for d4 in r.clone() {
                for d5 in r.clone() {
                    for d7 in r.clone() {
                        for d8 in r.clone() {
                            let s = PairShape { n, j, d1, d4, d5, d7, d8 };
                            if s.r().is_ok() {
                                out.push(s);
                            }
                        }
                    }
                }
            }
        }
    }
    out
}

fn lemma_suite(rec: &mut Recorder, opts: &VerifyOptions) {
    let max_n = opts.max_n.min(3);
    for q in primes_upto(&[2, 3], opts.max_p) {
        for n in 1..=max_n {
            rec.check(format!("lemmas.index-q-sublattices q={} n={}", q, n), || {
                let mut bad = Vec::new();
                for r in 0..=n {
                    let (a, b) = (lemma_6_2_oracle(n, q, r)?, lemma_6_2_count(n, q, r));
                    if a != b {
                        bad.push(format!("r={}: {} vs {}", r, a, b));
                    }
                }
                Ok(tally(n + 1, bad))
            });
            rec.check(format!("lemmas.q2-sublattices q={} n={}", q, n), || {
                let mut bad = Vec::new();
                let mut k = 0;
                for d in 0..=n {
                    for r in 0..=(n - d) {
                        k += 1;
                        let (a, b) = (lemma_6_3_oracle(n, q, d, r)?, lemma_6_3_count(n, q, d, r));
                        if a != b {
                            bad.push(format!("d={} r={}: {} vs {}", d, r, a, b));
                        }
                    }
                }
                Ok(tally(k, bad))
            });
            rec.check(format!("lemmas.row-rank-cosets q={} n={}", q, n), || {
                let mut bad = Vec::new();
                let mut k = 0;
                for dp in 0..=n {
                    for m in rank_test_matrices(n, dp, q) {
                        for d in 0..=n {
                            k += 1;
                            let (a, b) = (lemma_6_4a_oracle(q, &m, d)?, lemma_6_4a_count(q, n, dp, d));
                            if a != b {
                                bad.push(format!("d'={} d={}: {} vs {}", dp, d, a, b));
                            }
                        }
                    }
                }
                Ok(tally(k, bad))
            });
            if (q == 2 && n <= 3) || (q == 3 && n <= 2) {
                rec.check(format!("lemmas.two-step-rank-cosets q={} n={}", q, n), || {
                    let mut bad = Vec::new();
                    let mut k = 0;
                    for dp in 0..=n {
                        for mat in rank_test_matrices(n, dp, q) {
                            for m in 0..=n {
                                for r in 0..=(n - m) {
                                    for s in 0..=n {
                                        let Ok(closed) = lemma_6_4b_count(q, n, dp, m, r, s) else { continue };
                                        k += 1;
                                        let a = lemma_6_4b_oracle(q, &mat, m, r, s)?;
                                        if a != closed {
                                            bad.push(format!("d'={} m={} r={} s={}: {} vs {}", dp, m, r, s, a, closed));
                                        }
                                    }
                                }
                            }
                        }
                    }
                    Ok(tally(k, bad))
                });
            } else {
                rec.check(format!("lemmas.two-step-rank-cosets q={} n={}", q, n), || {
                    Ok(Outcome::Skip("outside the enumeration guard".into()))
                });
            }
            rec.check(format!("lemmas.pair-cosets q={} n={}", q, n), || {
                let mut bad = Vec::new();
                let shapes = pair_shapes(n);
                for s in &shapes {
                    let (a, b) = (lemma_6_5_oracle(q, s)?, lemma_6_5_count(q, s)?);
                    if a != b {
                        bad.push(format!("{:?}: {} vs {}", s, a, b));
                    }
                }
                Ok(tally(shapes.len(), bad))
            });
        }
    }
}

// ---------------------------------------------------------------------------

fn coset_suite(rec: &mut Recorder, opts: &VerifyOptions) {
    for p in primes_upto(&[2, 3], opts.max_p) {
        for n in 1..=opts.max_n.min(3) {
            rec.check(format!("cosets.tp-count p={} n={}", p, n), || {
                let reps = tp_reps(n, p)?;
                let product: BigInt = (1..=n as u32).map(|i| BigInt::from(p.pow(i) + 1)).product();
                let got = BigInt::from(reps.len());
                Ok(if got == product && got == tp_count(n, p) {
                    Outcome::Pass(format!("{} representatives", got))
                } else {
                    Outcome::Fail(format!("{} reps, product {}, block sum {}", got, product, tp_count(n, p)))
                })
            });
            rec.check(format!("cosets.tp-inequivalent p={} n={}", p, n), || {
                let reps = tp_reps(n, p)?;
                let lattices = distinct_lattices(&reps);
                if n > 2 {
                    return Ok(if lattices {
                        Outcome::Pass("distinct row lattices".into())
                    } else {
                        Outcome::Fail("two representatives share a row lattice".into())
                    });
                }
                Ok(if lattices && pairwise_inequivalent(&reps)? {
                    Outcome::Pass("pairwise products non-integral".into())
                } else {
                    Outcome::Fail("equivalent representatives found".into())
                })
            });
            if n <= 2 {
                rec.check(format!("cosets.tp-lattice-count p={} n={}", p, n), || {
                    let mut e = vec![0; n];
                    e.extend(vec![1; n]);
                    let (a, b) = (similitude_coset_oracle(n, p, &e, 1)?, tp_count(n, p));
                    Ok(if a == b { Outcome::Pass(format!("{}", a)) } else { Outcome::Fail(format!("{} vs {}", a, b)) })
                });
            }
        }
        for n in 1..=opts.max_n.min(2) {
            for j in 0..=n {
                rec.check(format!("cosets.tjp2 p={} n={} j={}", p, n, j), || {
                    let reps = tjp2_reps(n, p, j)?;
                    let got = BigInt::from(reps.len());
                    let blocks = tjp2_count(n, p, j)?;
                    let lattices = similitude_coset_oracle(n, p, &tjp2_smith_exponents(n, j), 2)?;
                    if got != blocks || got != lattices {
                        return Ok(Outcome::Fail(format!(
                            "{} reps, block sum {}, lattice count {}",
                            got, blocks, lattices
                        )));
                    }
                    let ok = distinct_lattices(&reps) && (p != 2 || pairwise_inequivalent(&reps)?);
                    Ok(if ok {
                        Outcome::Pass(format!("{} representatives", got))
                    } else {
                        Outcome::Fail("equivalent representatives found".into())
                    })
                });
            }
        }
        rec.check(format!("cosets.level-adjusted p={}", p), || {
            let level = if p == 2 { 15 } else { 10 };
            let parts = tp_rep_parts(2, p, level)?;
            let ok = parts.iter().all(|t| {
                t.g.congruent(&IntMatrix::identity(2), level) && t.y.congruent(&IntMatrix::zeros(2, 2), level)
            });
            let reps: Vec<_> = parts.into_iter().map(|t| t.rep).collect();
            Ok(if ok && pairwise_inequivalent(&reps)? {
                Outcome::Pass(format!("G ≡ I, Y ≡ 0 mod {}", level))
            } else {
                Outcome::Fail(format!("congruence adjustment mod {} failed", level))
            })
        });
    }
}

// ---------------------------------------------------------------------------

fn admissible(level: u64, n: usize) -> Result<Vec<ModularParams>> {
    let mut out = Vec::new();
    for chi in all_characters(level)? {
        for k in [n as i64 + 2, n as i64 + 3] {
            let p = ModularParams::new(n, k, chi.clone())?;
            if p.validated() && !nonzero_basis(&p)?.is_empty() {
                out.push(p);
            }
        }
    }
    Ok(out)
}

fn commuting(ops: &[ActionMatrix]) -> Vec<String> {
    let mut bad = Vec::new();
    for (i, a) in ops.iter().enumerate() {
        for b in &ops[i + 1..] {
            if !a.commutes_with(b) {
                bad.push(format!("{} vs {}", a.label, b.label));
            }
        }
    }
    bad
}

fn hecke_suite(rec: &mut Recorder, opts: &VerifyOptions) {
    let small_n = opts.max_n.min(2);
    for level in [6u64, 15] {
        for n in 1..=small_n {
            rec.check(format!("hecke.commutativity N={} n={}", level, n), || {
                let mut bad = Vec::new();
                let mut k = 0;
                for params in admissible(level, n)? {
                    let mut ops = Vec::new();
                    for q in prime_divisors(level) {
                        ops.push(tq_action(&params, q)?);
                        for j in 1..=n {
                            ops.push(tjq2_action(&params, q, j)?);
                        }
                    }
                    for p in primes_upto(&[2, 3, 5, 7], opts.max_p).into_iter().filter(|p| level % p != 0) {
                        ops.push(tp_action(&params, p)?);
                        for j in 1..=n {
                            ops.push(tprime_action(&params, p, j)?);
                        }
                    }
                    k += ops.len() * ops.len().saturating_sub(1) / 2;
                    bad.extend(
                        commuting(&ops).into_iter().map(|s| format!("{} (k={}, χ={})", s, params.weight, params.chi)),
                    );
                }
                Ok(tally(k, bad))
            });
            rec.check(format!("hecke.simultaneous-diagonalization N={} n={}", level, n), || {
                let mut bad = Vec::new();
                let mut k = 0;
                for params in admissible(level, n)? {
                    let data = diagonalize(&params)?;
                    let (a, a_inv) = (data.matrix(), data.inverse_matrix());
                    for q in prime_divisors(level) {
                        let mut ops = vec![(tq_action(&params, q)?, 0usize)];
                        for j in 1..=n {
                            ops.push((tjq2_action(&params, q, j)?, j));
                        }
                        for (op, j) in ops {
                            k += 1;
                            let d = op.conjugate_by(&a, &a_inv);
                            let mut ok = d.is_diagonal();
                            for (i, s) in d.basis.iter().enumerate() {
                                let want =
                                    if j == 0 { lambda_q(&params, s, q)? } else { lambda_j_q2(&params, s, q, j)? };
                                ok &= d.get(i, i) == &want;
                            }
                            if !ok {
                                bad.push(format!("{} at k={} χ={}", op.label, params.weight, params.chi));
                            }
                        }
                    }
                }
                Ok(tally(k, bad))
            });
        }
    }
    for level in (2u64..=15).filter(|&l| is_squarefree(l)) {
        rec.check(format!("hecke.bad-prime-diagonal N={}", level), || {
            let mut bad = Vec::new();
            let mut k = 0;
            for q in prime_divisors(level).into_iter().filter(|&q| q <= 3) {
                for n in 1..=opts.max_n.min(3) {
                    for params in admissible(level, n)? {
                        for j in 1..=n {
                            let t = tjq2_action(&params, q, j)?;
                            for (i, s) in t.basis.iter().enumerate() {
                                k += 1;
                                if t.get(i, i) != &lambda_j_q2(&params, s, q, j)? {
                                    bad.push(format!(
                                        "n={} k={} χ={} q={} j={} σ={}",
                                        n, params.weight, params.chi, q, j, s
                                    ));
                                }
                            }
                        }
                    }
                }
            }
            Ok(if k == 0 { Outcome::Skip("no prime 2 or 3 divides N".into()) } else { tally(k, bad) })
        });
    }
    for level in (1u64..=15).filter(|&l| is_squarefree(l)) {
        rec.check(format!("hecke.good-prime-assembly N={}", level), || {
            let mut bad = Vec::new();
            let mut k = 0;
            for n in 1..=small_n {
                for params in admissible(level, n)? {
                    for p in primes_upto(&[2, 3, 5, 7], opts.max_p).into_iter().filter(|p| level % p != 0) {
                        let t = tp_action(&params, p)?;
                        for (i, s) in t.basis.iter().enumerate() {
                            k += 1;
                            let psi = compatible_psi(s, &params)?;
                            if t.get(i, i) != &lambda_psi_p(&params, s, &psi, p)? {
                                bad.push(format!("T({}) n={} χ={} σ={}", p, n, params.chi, s));
                            }
                        }
                        for j in 1..=n {
                            let t = tprime_action(&params, p, j)?;
                            for (i, s) in t.basis.iter().enumerate() {
                                k += 1;
                                let psi = compatible_psi(s, &params)?;
                                if !t.is_diagonal() || t.get(i, i) != &lambda_prime(&params, s, &psi, p, j)? {
                                    bad.push(format!("T'_{}({}²) n={} χ={} σ={}", j, p, n, params.chi, s));
                                }
                            }
                        }
                    }
                }
            }
            Ok(tally(k, bad))
        });
    }
    rec.check("hecke.eigenvalue-magnitude", || {
        let mut bad = Vec::new();
        let mut k = 0;
        for level in (2u64..=30).filter(|&l| is_squarefree(l)) {
            for n in 1..=opts.max_n.min(3) {
                for params in admissible(level, n)? {
                    for sigma in nonzero_basis(&params)? {
                        for (q, d) in sigma.ranks() {
                            k += 1;
                            let lam = lambda_q(&params, &sigma, q)?;
                            let d = d as i64;
                            let want = CycloNumber::from_rational(rational_pow(q, 2 * params.weight * d - d * (d + 1)));
                            if lam.mul(&lam.conj()) != want {
                                bad.push(format!("N={} n={} σ={} q={}", level, n, sigma, q));
                            }
                        }
                    }
                }
            }
        }
        Ok(tally(k, bad))
    });
    rec.check(format!("hecke.pair-character-random seed={}", opts.seed), || {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        let mut bad = Vec::new();
        let mut k = 0;
        for level in [5u64, 6, 15] {
            for n in 1..=small_n {
                for chi in all_characters(level)? {
                    for sigma in all_partitions(level, n)? {
                        let m = partition_matrix(&sigma)?;
                        let (pair, _, gamma) = random_pair_in_class(&mut rng, &sigma, &m, 5);
                        match chi_of_pair(&pair, &chi, &sigma) {
                            Ok(v) => {
                                k += 1;
                                if v != chi.eval(det_d_block(&gamma, level)) {
                                    bad.push(format!("N={} σ={} χ={}", level, sigma, chi));
                                }
                            }
                            Err(Error::ZeroSeries) => {}
                            Err(e) => return Err(e),
                        }
                    }
                }
            }
        }
        Ok(tally(k, bad))
    });
}
