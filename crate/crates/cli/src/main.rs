//! `siegel-eis`: partition tables, Hecke eigenvalues, action matrices,
//! diagonalization data and the verification runner.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use siegel_eis::characters::{all_characters, DirichletCharacter};
use siegel_eis::eisenstein::{
    all_partitions, compatible_psi, nonvanishing, nonzero_basis, partition_matrix, ModularParams, Nonvanishing,
};
use siegel_eis::exactmath::CycloNumber;
use siegel_eis::hecke::{
    diagonalize, lambda_j_q2, lambda_prime, lambda_psi_p, lambda_q, t_tilde_action, tjp2_action, tjq2_action,
    tp_action, tprime_action, tq_action, ActionMatrix,
};
use siegel_eis::verify::{self, Suite, VerifyOptions};
use siegel_eis::{Error, Result};

#[derive(Parser)]
#[command(name = "siegel-eis", version, about = "Hecke operators on Siegel Eisenstein series of square-free level")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List the multiplicative partitions σ of N with nonvanishing of E_σ.
    Partitions(SpaceArgs),
    /// Eigenvalues of the basis eigenforms under T(p) and the degree-p² operators.
    Eigen {
        #[command(flatten)]
        space: SpaceArgs,
        /// Primes to report (default: the primes dividing N).
        #[arg(short = 'p', long = "prime", value_delimiter = ',')]
        primes: Vec<u64>,
        /// Restrict output to these operator labels, e.g. "T(2)" or "Tj(3^2;1)".
        #[arg(long = "op")]
        ops: Vec<String>,
    },
    /// The matrix of one operator on the nonzero basis.
    Action {
        #[command(flatten)]
        space: SpaceArgs,
        #[command(flatten)]
        op: OpArgs,
    },
    /// The unitriangular change of basis to simultaneous T(q)-eigenforms.
    Diagonalize(SpaceArgs),
    /// Run the verification suites against their brute-force oracles.
    Verify {
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long = "max-n", default_value_t = 3)]
        max_n: usize,
        #[arg(long = "max-p", default_value_t = 7)]
        max_p: u64,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Table,
}

#[derive(Args)]
struct SpaceArgs {
    #[arg(short = 'N', long = "level")]
    level: u64,
    #[arg(short = 'n', long = "degree")]
    degree: usize,
    #[arg(short = 'k', long = "weight")]
    weight: i64,
    /// Index into the lexicographic list of characters mod N.
    #[arg(long = "char", default_value_t = 0, conflicts_with = "char_exps")]
    char_index: usize,
    /// Explicit exponent vector on the generators of (Z/NZ)^×.
    #[arg(long = "char-exps", value_delimiter = ',')]
    char_exps: Option<Vec<u64>>,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
}

#[derive(Args)]
struct OpArgs {
    /// Operator label: T(p), Tj(p^2;j), Tprime(p^2;j) or Ttilde(p^2;j).
    /// A bare name (T, Tj, Tprime, Ttilde) takes p and j from the flags.
    #[arg(long = "op", default_value = "T")]
    op: String,
    #[arg(short = 'p', long = "prime")]
    prime: Option<u64>,
    #[arg(short = 'j')]
    j: Option<usize>,
}

impl SpaceArgs {
    fn params(&self) -> Result<ModularParams> {
        let chi = match &self.char_exps {
            Some(e) => DirichletCharacter::new(self.level, e.clone())?,
            None => {
                let all = all_characters(self.level)?;
                let count = all.len();
                all.into_iter().nth(self.char_index).ok_or_else(|| {
                    Error::invalid(format!("character index {} out of range (0..{})", self.char_index, count))
                })?
            }
        };
        let params = ModularParams::new(self.degree, self.weight, chi)?;
        params.require_squarefree()?;
        params.require_valid()?;
        Ok(params)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum OpKind {
    T,
    Tj,
    Tprime,
    Ttilde,
}

/// Parse `Name`, `Name(p)` or `Name(p^2;j)`; missing numbers fall back to the flags.
fn parse_op(label: &str, prime: Option<u64>, j: Option<usize>) -> Result<(OpKind, u64, usize)> {
    let bad = || Error::Parse(format!("unrecognised operator label {:?}", label));
    let label = label.trim();
    let (name, inner) = match label.split_once('(') {
        Some((n, rest)) => (n, Some(rest.strip_suffix(')').ok_or_else(bad)?)),
        None => (label, None),
    };
    let kind = match name {
        "T" => OpKind::T,
        "Tj" => OpKind::Tj,
        "Tprime" => OpKind::Tprime,
        "Ttilde" => OpKind::Ttilde,
        _ => return Err(bad()),
    };
    let (mut p, mut jj) = (prime, j);
    if let Some(inner) = inner {
        let (base, tail) = match inner.split_once(';') {
            Some((b, t)) => (b, Some(t)),
            None => (inner, None),
        };
        let base = match kind {
            OpKind::T => base,
            _ => base.strip_suffix("^2").ok_or_else(bad)?,
        };
        p = Some(base.trim().parse().map_err(|_| bad())?);
        if let Some(t) = tail {
            jj = Some(t.trim().parse().map_err(|_| bad())?);
        }
    }
    let p = p.ok_or_else(|| Error::invalid("operator needs a prime (-p)"))?;
    let jj = match kind {
        OpKind::T => 0,
        _ => jj.ok_or_else(|| Error::invalid("operator needs j (-j)"))?,
    };
    Ok((kind, p, jj))
}

fn action_matrix(params: &ModularParams, kind: OpKind, p: u64, j: usize) -> Result<ActionMatrix> {
    let bad = params.level % p == 0;
    match (kind, bad) {
        (OpKind::T, true) => tq_action(params, p),
        (OpKind::T, false) => tp_action(params, p),
        (OpKind::Tj, true) => tjq2_action(params, p, j),
        (OpKind::Tj, false) => tjp2_action(params, p, j),
        (OpKind::Tprime, _) => tprime_action(params, p, j),
        (OpKind::Ttilde, _) => t_tilde_action(params, p, j),
    }
}

fn render_matrix(m: &ActionMatrix) -> String {
    let cells: Vec<Vec<String>> = m.entries.iter().map(|r| r.iter().map(|c| c.to_string()).collect()).collect();
    let mut rows =
        vec![std::iter::once(String::new()).chain(m.basis.iter().map(|s| s.to_string())).collect::<Vec<_>>()];
    for (s, r) in m.basis.iter().zip(cells) {
        rows.push(std::iter::once(s.to_string()).chain(r).collect());
    }
    let mut out = format!("{}\n", m.label);
    out.push_str(&table(&rows));
    out
}

fn table(rows: &[Vec<String>]) -> String {
    let cols = rows.iter().map(|r| r.len()).max().unwrap_or(0);
    let widths: Vec<usize> =
        (0..cols).map(|c| rows.iter().filter_map(|r| r.get(c)).map(|s| s.chars().count()).max().unwrap_or(0)).collect();
    let mut out = String::new();
    for r in rows {
        let line: Vec<String> = r.iter().enumerate().map(|(c, s)| format!("{:<w$}", s, w = widths[c])).collect();
        let _ = writeln!(out, "{}", line.join("  ").trim_end());
    }
    out
}

fn cmd_partitions(args: &SpaceArgs) -> Result<String> {
    let params = args.params()?;
    let parts = all_partitions(params.level, params.degree)?;
    let mut rows = vec![vec!["sigma".to_string(), "nonzero".to_string(), "M_sigma".to_string()]];
    let mut items = Vec::new();
    for s in &parts {
        let nz = match nonvanishing(s, &params) {
            Nonvanishing::Yes => "yes",
            Nonvanishing::No => "no",
            Nonvanishing::Unknown => "unknown",
        };
        let m = partition_matrix(s)?;
        let diag: Vec<String> = (0..params.degree).map(|i| m.get(i, i).to_string()).collect();
        rows.push(vec![s.to_string(), nz.to_string(), format!("diag({})", diag.join(", "))]);
        items.push(json!({"sigma": s, "nonzero": nz, "m_sigma": m}));
    }
    Ok(match args.format {
        Format::Table => table(&rows),
        Format::Json => serde_json::to_string_pretty(&items).expect("serializes"),
    })
}

fn cmd_eigen(args: &SpaceArgs, primes: &[u64], ops: &[String]) -> Result<String> {
    let params = args.params()?;
    let primes = if primes.is_empty() { params.primes() } else { primes.to_vec() };
    if primes.is_empty() {
        return Err(Error::invalid("level 1 has no bad primes; pass -p"));
    }
    let basis = nonzero_basis(&params)?;
    let mut systems: Vec<BTreeMap<String, CycloNumber>> = vec![BTreeMap::new(); basis.len()];
    let mut labels = Vec::new();
    let wanted = |l: &str| ops.is_empty() || ops.iter().any(|o| o == l);
    for &p in &primes {
        let bad = params.level % p == 0;
        let mut push =
            |label: String, f: &dyn Fn(&siegel_eis::eisenstein::Partition) -> Result<CycloNumber>| -> Result<()> {
                if !wanted(&label) {
                    return Ok(());
                }
                for (i, s) in basis.iter().enumerate() {
                    systems[i].insert(label.clone(), f(s)?);
                }
                labels.push(label);
                Ok(())
            };
        if bad {
            push(format!("T({})", p), &|s| lambda_q(&params, s, p))?;
            for j in 1..=params.degree {
                push(format!("Tj({}^2;{})", p, j), &|s| lambda_j_q2(&params, s, p, j))?;
            }
        } else {
            push(format!("T({})", p), &|s| lambda_psi_p(&params, s, &compatible_psi(s, &params)?, p))?;
            for j in 1..=params.degree {
                push(format!("Tprime({}^2;{})", p, j), &|s| {
                    lambda_prime(&params, s, &compatible_psi(s, &params)?, p, j)
                })?;
            }
        }
    }
    if let Some(o) = ops.iter().find(|o| !labels.contains(o)) {
        return Err(Error::invalid(format!("operator {} is not among the computed eigenvalues", o)));
    }
    Ok(match args.format {
        Format::Table => {
            let mut rows = vec![std::iter::once("sigma".to_string()).chain(labels.iter().cloned()).collect::<Vec<_>>()];
            for (s, sys) in basis.iter().zip(&systems) {
                rows.push(std::iter::once(s.to_string()).chain(labels.iter().map(|l| sys[l].to_string())).collect());
            }
            table(&rows)
        }
        Format::Json => {
            let items: Vec<_> =
                basis.iter().zip(&systems).map(|(s, sys)| json!({"sigma": s, "eigenvalues": sys})).collect();
            serde_json::to_string_pretty(&items).expect("serializes")
        }
    })
}

fn cmd_action(args: &SpaceArgs, op: &OpArgs) -> Result<String> {
    let params = args.params()?;
    let (kind, p, j) = parse_op(&op.op, op.prime, op.j)?;
    let m = action_matrix(&params, kind, p, j)?;
    if m.dim() == 0 {
        eprintln!("warning: the space is zero for these parameters");
    }
    Ok(match args.format {
        Format::Table => render_matrix(&m),
        Format::Json => m.to_json(),
    })
}

fn cmd_diagonalize(args: &SpaceArgs) -> Result<String> {
    let params = args.params()?;
    let data = diagonalize(&params)?;
    if data.basis.is_empty() {
        eprintln!("warning: the space is zero for these parameters");
    }
    Ok(match args.format {
        Format::Table => render_matrix(&data.matrix()),
        Format::Json => serde_json::to_string_pretty(&data.to_json()).expect("serializes"),
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = match &cli.command {
        Command::Partitions(a) => cmd_partitions(a),
        Command::Eigen { space, primes, ops } => cmd_eigen(space, primes, ops),
        Command::Action { space, op } => cmd_action(space, op),
        Command::Diagonalize(a) => cmd_diagonalize(a),
        Command::Verify { suite, seed, max_n, max_p, format } => {
            let suite: Suite = match suite.parse() {
                Ok(s) => s,
                Err(e) => {
                    eprintln!("error: {}", e);
                    return ExitCode::from(2);
                }
            };
            let report = verify::run(suite, &VerifyOptions { max_n: *max_n, max_p: *max_p, seed: *seed });
            match format {
                Format::Table => print!("{}", report.render_table()),
                Format::Json => println!("{}", report.to_json()),
            }
            eprintln!("elapsed: {:.2?}", report.elapsed);
            return if report.is_success() { ExitCode::SUCCESS } else { ExitCode::from(1) };
        }
    };
    match out {
        Ok(s) => {
            print!("{}", s);
            if !s.ends_with('\n') {
                println!();
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {}", e);
            ExitCode::from(2)
        }
    }
}
