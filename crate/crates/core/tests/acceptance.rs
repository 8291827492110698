//! The ten acceptance criteria, one PASS/FAIL line each. Every check is exact
//! and must also finish inside its time budget. Runs without the libtest
//! harness so the lines always appear in the test output; exits nonzero if
//! any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_bigint::BigInt;

use siegel_eis::characters::{all_characters, DirichletCharacter};
use siegel_eis::combinat::{lemma_6_6_nonzero, lemma_6_7_lhs, sym_chi, sym_closed_form_comparison, LocalCharacter};
use siegel_eis::cosets::{distinct_lattices, pairwise_inequivalent, tjp2_reps, tp_reps};
use siegel_eis::eisenstein::{compatible_psi, nonzero_basis, ModularParams};
use siegel_eis::exactmath::arith::{is_squarefree, prime_divisors};
use siegel_eis::exactmath::{rational_pow, CycloNumber};
use siegel_eis::hecke::{
    bad_prime_systems, diagonalize, lambda_j_q2, lambda_prime, lambda_psi_p, lambda_q, tj_coefficient, tjq2_action,
    tp_action, tprime_action, tq_action, ActionMatrix,
};
use siegel_eis::verify::{self, Suite, VerifyOptions};
use siegel_eis::Result;

type Verdict = std::result::Result<String, String>;

fn rat(q: u64, e: i64) -> CycloNumber {
    CycloNumber::from_rational(rational_pow(q, e))
}

/// Every character mod `level` with each listed weight that gives a nonzero space.
fn admissible(level: u64, n: usize, weights: &[i64]) -> Result<Vec<ModularParams>> {
    let mut out = Vec::new();
    for chi in all_characters(level)? {
        for &k in weights {
            let p = ModularParams::new(n, k, chi.clone())?;
            if p.validated() && !nonzero_basis(&p)?.is_empty() {
                out.push(p);
            }
        }
    }
    Ok(out)
}

fn verdict(compared: usize, mismatches: Vec<String>) -> Verdict {
    match mismatches.first() {
        None => Ok(format!("{} exact comparisons", compared)),
        Some(first) => Err(format!("{} of {} differ; first: {}", mismatches.len(), compared, first)),
    }
}

fn classical_degree_one() -> Result<Verdict> {
    let mut bad = Vec::new();
    let mut count = 0;
    for level in [1u64, 3, 5] {
        for params in admissible(level, 1, &[3, 4, 5, 6])? {
            let k = params.weight;
            for p in [2u64, 5, 7].into_iter().filter(|p| level % p != 0) {
                let t = tp_action(&params, p)?;
                for (i, s) in t.basis.iter().enumerate() {
                    count += 1;
                    // twisted divisor sum: χ_{N1}(p) + χ_{N0}(p)·p^{k−1}
                    let chi1 = params.chi.factor_local(s.part(1))?;
                    let chi0 = params.chi.factor_local(s.part(0))?;
                    let pi = p as i64;
                    let want = chi1.eval(pi).add(&chi0.eval(pi).mul(&rat(p, k - 1)));
                    if !t.is_diagonal() || t.get(i, i) != &want {
                        bad.push(format!("N={} k={} χ={} p={} σ={}", level, k, params.chi, p, s));
                    }
                }
            }
        }
    }
    Ok(verdict(count, bad))
}

/// The least weight k > n + 1 whose parity suits χ.
fn minimal_weight(n: usize, chi: &DirichletCharacter) -> Result<Option<ModularParams>> {
    for k in (n as i64 + 2)..=(n as i64 + 3) {
        let p = ModularParams::new(n, k, chi.clone())?;
        if p.validated() {
            return Ok(Some(p));
        }
    }
    Ok(None)
}

fn eigenvalue_magnitude() -> Result<Verdict> {
    let mut bad = Vec::new();
    let mut count = 0;
    for level in (2u64..=30).filter(|&l| is_squarefree(l)) {
        for n in 1..=3usize {
            for chi in all_characters(level)? {
                let Some(params) = minimal_weight(n, &chi)? else { continue };
                let k = params.weight;
                for s in nonzero_basis(&params)? {
                    for (q, d) in s.ranks() {
                        count += 1;
                        let lam = lambda_q(&params, &s, q)?;
                        let d = d as i64;
                        if lam.mul(&lam.conj()) != rat(q, 2 * k * d - d * (d + 1)) {
                            bad.push(format!("N={} n={} χ={} σ={} q={}", level, n, chi, s, q));
                        }
                    }
                }
            }
        }
    }
    Ok(verdict(count, bad))
}

fn multiplicity_one() -> Result<Verdict> {
    let params = ModularParams::new(2, 4, DirichletCharacter::trivial(30)?)?;
    let systems = bad_prime_systems(&params)?;
    if systems.len() != 27 {
        return Ok(Err(format!("{} basis eigenforms, expected 27", systems.len())));
    }
    let mut clashes = Vec::new();
    for (i, a) in systems.iter().enumerate() {
        for b in &systems[i + 1..] {
            if a.entries == b.entries {
                clashes.push(format!("{} and {}", a.sigma, b.sigma));
            }
        }
    }
    Ok(match clashes.first() {
        None => Ok("27 eigenforms, pairwise distinct {λ(2), λ(3), λ(5)}".into()),
        Some(c) => Err(format!("{} coinciding pairs; first: {}", clashes.len(), c)),
    })
}

fn two_step_coefficients() -> Result<Verdict> {
    let mut bad = Vec::new();
    let mut count = 0;
    for level in (2u64..=15).filter(|&l| is_squarefree(l)) {
        for q in [2u64, 3].into_iter().filter(|q| level % q == 0) {
            for n in 1..=3usize {
                for params in admissible(level, n, &[n as i64 + 2, n as i64 + 3])? {
                    for s in nonzero_basis(&params)? {
                        for j in 1..=n {
                            count += 1;
                            if tj_coefficient(&params, &s, q, j, 0)? != lambda_j_q2(&params, &s, q, j)? {
                                bad.push(format!(
                                    "N={} n={} k={} χ={} q={} j={} σ={}",
                                    level, n, params.weight, params.chi, q, j, s
                                ));
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(verdict(count, bad))
}

fn simultaneous_diagonalization() -> Result<Verdict> {
    let mut bad = Vec::new();
    let mut count = 0;
    for level in [6u64, 15] {
        for n in 1..=2usize {
            for params in admissible(level, n, &[n as i64 + 2, n as i64 + 3])? {
                let data = diagonalize(&params)?;
                let (a, a_inv) = (data.matrix(), data.inverse_matrix());
                for q in prime_divisors(level) {
                    let mut ops = vec![(tq_action(&params, q)?, 0)];
                    for j in 1..=n {
                        ops.push((tjq2_action(&params, q, j)?, j));
                    }
                    for (op, j) in ops {
                        count += 1;
                        let d = op.conjugate_by(&a, &a_inv);
                        let mut ok = d.is_diagonal();
                        for (i, s) in d.basis.iter().enumerate() {
                            let want = if j == 0 { lambda_q(&params, s, q)? } else { lambda_j_q2(&params, s, q, j)? };
                            ok &= d.get(i, i) == &want;
                        }
                        if !ok {
                            bad.push(format!("N={} n={} k={} χ={} {}", level, n, params.weight, params.chi, op.label));
                        }
                    }
                }
            }
        }
    }
    Ok(verdict(count, bad))
}

fn operator_assembly() -> Result<Verdict> {
    let mut bad = Vec::new();
    let mut count = 0;
    for level in (1u64..=15).filter(|&l| is_squarefree(l)) {
        for n in 1..=2usize {
            for params in admissible(level, n, &[n as i64 + 2, n as i64 + 3])? {
                for p in [2u64, 3, 5, 7].into_iter().filter(|p| level % p != 0) {
                    for j in 1..=n {
                        let t = tprime_action(&params, p, j)?;
                        for (i, s) in t.basis.iter().enumerate() {
                            count += 1;
                            let psi = compatible_psi(s, &params)?;
                            if !t.is_diagonal() || t.get(i, i) != &lambda_prime(&params, s, &psi, p, j)? {
                                bad.push(format!(
                                    "N={} n={} k={} χ={} p={} j={} σ={}",
                                    level, n, params.weight, params.chi, p, j, s
                                ));
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(verdict(count, bad))
}

fn lemma_suite() -> Result<Verdict> {
    let report = verify::run(Suite::Lemmas, &VerifyOptions { max_n: 3, max_p: 3, seed: 0 });
    if !report.is_success() {
        let first = report.cases.iter().find(|c| c.status == verify::Status::Fail).unwrap();
        return Ok(Err(format!("{}: {}", first.id, first.detail)));
    }
    let mut bad = Vec::new();
    let mut count = 0;
    for q in [3u64, 5, 7] {
        for chi in LocalCharacter::all(q) {
            for t in 0..=3 {
                count += 1;
                if lemma_6_6_nonzero(q, &chi, t) != !sym_chi(q, &chi, t)?.is_zero() {
                    bad.push(format!("vanishing q={} order {} t={}", q, chi.order(), t));
                }
            }
        }
    }
    let grid = [(2u64, 0usize..=4), (3, 0..=4), (5, 0..=3)];
    for (p, ts) in grid {
        for t in ts {
            count += 1;
            if lemma_6_7_lhs(p, t)? != BigInt::from(p).pow((t * (t + 1) / 2) as u32) {
                bad.push(format!("symmetric count identity p={} t={}", p, t));
            }
        }
    }
    Ok(match verdict(count, bad) {
        Ok(s) => Ok(format!("{} oracle cases ({} skipped by guard) and {}", report.passed, report.skipped, s)),
        e => e,
    })
}

fn sym_closed_forms() -> Result<Verdict> {
    let rows = sym_closed_form_comparison(&[2, 3, 5], 4)?;
    let unexplained: Vec<_> = rows.iter().filter(|r| !r.agrees() && !r.in_known_disagreement()).collect();
    if let Some(r) = unexplained.first() {
        return Ok(Err(format!(
            "{} unexplained mismatches; first q={} order {} b={} c={}",
            unexplained.len(),
            r.q,
            r.chi_order,
            r.b,
            r.c
        )));
    }
    let report: Vec<String> = rows
        .iter()
        .filter(|r| !r.agrees())
        .map(|r| {
            let closed = r.closed.as_ref().map_or("undefined".to_string(), |c| c.to_string());
            format!(
                "      q={} χ order {} (b,c)=({},{}): closed form {} vs enumeration {}",
                r.q, r.chi_order, r.b, r.c, closed, r.enumerated
            )
        })
        .collect();
    let agreeing = rows.len() - report.len();
    if report.is_empty() {
        return Ok(Ok(format!("{} cases agree", rows.len())));
    }
    Ok(Ok(format!("{} cases agree; discrepancy report for the q = 2 even-size rows:\n{}", agreeing, report.join("\n"))))
}

fn coset_counts() -> Result<Verdict> {
    let mut bad = Vec::new();
    let mut count = 0;
    for p in [2u64, 3] {
        for n in 1..=3usize {
            let reps = tp_reps(n, p)?;
            let product: BigInt = (1..=n as u32).map(|i| BigInt::from(p.pow(i) + 1)).product();
            count += 1;
            if BigInt::from(reps.len()) != product || !distinct_lattices(&reps) {
                bad.push(format!("T({}) n={}: {} reps vs {}", p, n, reps.len(), product));
            }
            if n <= 2 {
                count += 1;
                if !pairwise_inequivalent(&reps)? {
                    bad.push(format!("T({}) n={}: equivalent representatives", p, n));
                }
            }
        }
    }
    for n in 1..=2usize {
        for j in 0..=n {
            count += 1;
            if !pairwise_inequivalent(&tjp2_reps(n, 2, j)?)? {
                bad.push(format!("Tj(4;{}) n={}: equivalent representatives", j, n));
            }
        }
    }
    Ok(verdict(count, bad))
}

fn commutativity() -> Result<Verdict> {
    let mut bad = Vec::new();
    let mut count = 0;
    for level in [6u64, 15] {
        for n in 1..=2usize {
            for params in admissible(level, n, &[n as i64 + 2, n as i64 + 3])? {
                let mut ops: Vec<ActionMatrix> = Vec::new();
                for q in prime_divisors(level) {
                    ops.push(tq_action(&params, q)?);
                    for j in 1..=n {
                        ops.push(tjq2_action(&params, q, j)?);
                    }
                }
                for p in [2u64, 3, 5, 7].into_iter().filter(|p| level % p != 0) {
                    let t = tp_action(&params, p)?;
                    // the good-prime diagonal is the closed form
                    for (i, s) in t.basis.iter().enumerate() {
                        let psi = compatible_psi(s, &params)?;
                        if t.get(i, i) != &lambda_psi_p(&params, s, &psi, p)? {
                            bad.push(format!("N={} T({}) diagonal at σ={}", level, p, s));
                        }
                    }
                    ops.push(t);
                    for j in 1..=n {
                        ops.push(tprime_action(&params, p, j)?);
                    }
                }
                for (i, a) in ops.iter().enumerate() {
                    for b in &ops[i + 1..] {
                        count += 1;
                        if !a.commutes_with(b) {
                            bad.push(format!(
                                "N={} n={} k={} χ={}: {} vs {}",
                                level, n, params.weight, params.chi, a.label, b.label
                            ));
                        }
                    }
                }
            }
        }
    }
    Ok(verdict(count, bad))
}

struct Criterion {
    title: &'static str,
    budget: Duration,
    check: fn() -> Result<Verdict>,
}

fn main() -> ExitCode {
    let secs = Duration::from_secs;
    let criteria = [
        Criterion {
            title: "degree-one T(p) matches the twisted divisor sum",
            budget: secs(1),
            check: classical_degree_one,
        },
        Criterion { title: "bad-prime eigenvalue magnitude", budget: secs(5), check: eigenvalue_magnitude },
        Criterion { title: "multiplicity one at N=30, n=2, k=4", budget: secs(1), check: multiplicity_one },
        Criterion {
            title: "T_j(q²) diagonal coefficients match the eigenvalue formula",
            budget: secs(30),
            check: two_step_coefficients,
        },
        Criterion {
            title: "simultaneous diagonalization of bad-prime operators",
            budget: secs(30),
            check: simultaneous_diagonalization,
        },
        Criterion {
            title: "T'_j(p²) assembled from T~ and R has the closed-form diagonal",
            budget: secs(30),
            check: operator_assembly,
        },
        Criterion {
            title: "coset lemmas, vanishing predicate and symmetric count identity",
            budget: secs(60),
            check: lemma_suite,
        },
        Criterion { title: "symmetric character-sum closed forms", budget: secs(60), check: sym_closed_forms },
        Criterion { title: "coset representative counts and inequivalence", budget: secs(120), check: coset_counts },
        Criterion { title: "commutativity of all constructed operators", budget: secs(30), check: commutativity },
    ];
    let mut failed = 0;
    for (i, c) in criteria.iter().enumerate() {
        let start = Instant::now();
        let mut outcome = match (c.check)() {
            Ok(v) => v,
            Err(e) => Err(format!("error: {}", e)),
        };
        let elapsed = start.elapsed();
        if elapsed > c.budget {
            outcome = Err(format!("over the time budget; {}", outcome.unwrap_or_else(|e| e)));
        }
        let timing = format!("{:.2}s of {}s", elapsed.as_secs_f64(), c.budget.as_secs());
        match outcome {
            Ok(detail) => println!("PASS  {:>2}. {} [{}] {}", i + 1, c.title, timing, detail),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {:>2}. {} [{}] {}", i + 1, c.title, timing, detail);
            }
        }
    }
    println!("acceptance: {} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
