//! Command-line interface for the exact LP hierarchy bounds.
//!
//! Subcommands: `oracle` (brute-force A_q^Lin), `bound` (build and solve one
//! of the hierarchy programs), `verify` (named exact-check suites), and
//! `lattice` (dump the subspace enumeration). Output is plain `key: value`
//! text or JSON; rationals are always printed as reduced `p/q` strings, so
//! identical flags produce byte-identical output.
//!
//! Exit codes: 0 success, 1 failed verification assertion, 2 usage error,
//! 3 resource cap exceeded, 4 solver anomaly.

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use serde_json::json;

use krawlp_core::field::{FieldError, FieldSpec};
use krawlp_core::hierarchy::{
    build_full_pseudo_weak, build_kraw_pseudo, build_kraw_pseudo_weak, build_partial_pseudo,
    build_unsym_kraw, build_unsym_partial, HierarchyError, Instance,
};
use krawlp_core::lattice::{Lattice, LatticeError};
use krawlp_core::lp::{fmt_rational, solve, verify_optimality, LinearProgram, Status};
use krawlp_core::oracle::{brute_force_a, OracleError};
use krawlp_core::suites::{
    charsum_suite, completeness_suite, escalation_suite, masstransfer_suite, mobius_suite,
    nonintegral_suite, partial_integrality_suite, SuiteError, SuiteOutcome,
};
use krawlp_core::{Caps, Rational};

#[derive(Parser)]
#[command(name = "krawlp", version, about = "Exact LP hierarchy bounds for linear codes over F_q")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CapArgs {
    /// Maximum number of subspaces to enumerate.
    #[arg(long, env = "KRAWLP_MAX_SUBSPACES", default_value_t = 100_000)]
    max_subspaces: u64,
    /// Maximum number of tuple variables/rows in unsymmetrized models.
    #[arg(long, env = "KRAWLP_MAX_TUPLES", default_value_t = 65_536)]
    max_tuples: u64,
    /// Highest level probed by the escalation search.
    #[arg(long, env = "KRAWLP_MAX_LEVEL", default_value_t = 64)]
    max_level: u32,
}

impl CapArgs {
    fn caps(&self) -> Caps {
        Caps {
            max_subspaces: self.max_subspaces,
            max_tuples: self.max_tuples,
            max_level: self.max_level,
        }
    }
}

#[derive(Clone, Copy, ValueEnum, PartialEq, Eq)]
enum OutputFormat {
    Text,
    Json,
}

#[derive(Clone, Copy, ValueEnum, PartialEq, Eq)]
enum Program {
    KrawPseudo,
    KrawPseudoWeak,
    PartialPseudo,
    FullPseudoWeak,
    KrawUnsym,
    PartialUnsym,
}

impl Program {
    fn name(self) -> &'static str {
        match self {
            Program::KrawPseudo => "kraw-pseudo",
            Program::KrawPseudoWeak => "kraw-pseudo-weak",
            Program::PartialPseudo => "partial-pseudo",
            Program::FullPseudoWeak => "full-pseudo-weak",
            Program::KrawUnsym => "kraw-unsym",
            Program::PartialUnsym => "partial-unsym",
        }
    }

    /// Programs whose optimum is the level-th power of the code bound.
    fn takes_root(self) -> bool {
        matches!(self, Program::KrawPseudo | Program::KrawPseudoWeak | Program::KrawUnsym)
    }
}

#[derive(Clone, Copy, ValueEnum, PartialEq, Eq)]
enum SuiteName {
    Completeness,
    Nonintegral,
    Escalation,
    Masstransfer,
    Mobius,
    Charsum,
    PartialIntegrality,
}

#[derive(Subcommand)]
enum Command {
    /// Brute-force A_q^Lin(n, d) over the subspace lattice.
    Oracle {
        #[arg(long)]
        q: u32,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: usize,
        #[arg(long, value_enum, default_value = "text")]
        output: OutputFormat,
        #[command(flatten)]
        caps: CapArgs,
    },
    /// Build and solve one hierarchy program.
    Bound {
        #[arg(long, value_enum)]
        program: Program,
        #[arg(long)]
        q: u32,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        level: u32,
        /// Write the model in LP text form to this path.
        #[arg(long)]
        export: Option<std::path::PathBuf>,
        #[arg(long, value_enum, default_value = "text")]
        output: OutputFormat,
        #[command(flatten)]
        caps: CapArgs,
    },
    /// Run a named verification suite of exact checks.
    Verify {
        #[arg(value_enum)]
        suite: SuiteName,
        #[arg(long)]
        q: u32,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        d: usize,
        /// Level; defaults to n for suites that need one.
        #[arg(long)]
        level: Option<u32>,
        /// Epsilon for the non-integral point, as `p/q`.
        #[arg(long, default_value = "1/2")]
        epsilon: String,
        /// Seed for the randomized Möbius round-trip.
        #[arg(long, default_value_t = 20240811)]
        seed: u64,
        /// Number of random vectors in the Möbius round-trip.
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, value_enum, default_value = "text")]
        output: OutputFormat,
        #[command(flatten)]
        caps: CapArgs,
    },
    /// Dump the canonical subspace enumeration, one subspace per line.
    Lattice {
        #[arg(long)]
        q: u32,
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value = "text")]
        output: OutputFormat,
        #[command(flatten)]
        caps: CapArgs,
    },
}

/// Failure classes mapped to exit codes.
enum CliError {
    Usage(String),
    Resource(String),
    Solver(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Resource(_) => 3,
            CliError::Solver(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Resource(m) | CliError::Solver(m) => m,
        }
    }
}

impl From<FieldError> for CliError {
    fn from(e: FieldError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<LatticeError> for CliError {
    fn from(e: LatticeError) -> Self {
        CliError::Resource(e.to_string())
    }
}

impl From<HierarchyError> for CliError {
    fn from(e: HierarchyError) -> Self {
        match e {
            HierarchyError::TupleCapExceeded { .. } => CliError::Resource(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<OracleError> for CliError {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::LevelCapReached { .. } => CliError::Resource(e.to_string()),
            OracleError::SolverAnomaly { .. } | OracleError::CertificateRejected { .. } => {
                CliError::Solver(e.to_string())
            }
            OracleError::Hierarchy(inner) => inner.into(),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<SuiteError> for CliError {
    fn from(e: SuiteError) -> Self {
        match e {
            SuiteError::Lattice(inner) => inner.into(),
            SuiteError::Hierarchy(inner) => inner.into(),
            SuiteError::Oracle(inner) => inner.into(),
            SuiteError::Lp(inner) => CliError::Usage(inner.to_string()),
            SuiteError::CharsumRange { .. } => CliError::Usage(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}

fn run(command: Command) -> Result<ExitCode, CliError> {
    match command {
        Command::Oracle { q, n, d, output, caps } => cmd_oracle(q, n, d, output, &caps.caps()),
        Command::Bound { program, q, n, d, level, export, output, caps } => {
            cmd_bound(program, q, n, d, level, export, output, &caps.caps())
        }
        Command::Verify { suite, q, n, d, level, epsilon, seed, samples, output, caps } => {
            cmd_verify(suite, q, n, d, level, &epsilon, seed, samples, output, &caps.caps())
        }
        Command::Lattice { q, n, output, caps } => cmd_lattice(q, n, output, &caps.caps()),
    }
}

fn make_instance(q: u32, n: usize, d: usize, level: u32) -> Result<Instance, CliError> {
    let spec = FieldSpec::new(q)?;
    Ok(Instance::new(spec, n, d, level)?)
}

fn enumerate(spec: &FieldSpec, n: usize, caps: &Caps) -> Result<Lattice, CliError> {
    Ok(Lattice::enumerate_with_cap(spec, n, caps.max_subspaces)?)
}

fn cmd_oracle(
    q: u32,
    n: usize,
    d: usize,
    output: OutputFormat,
    caps: &Caps,
) -> Result<ExitCode, CliError> {
    let inst = make_instance(q, n, d, 1)?;
    let lat = enumerate(inst.spec(), n, caps)?;
    let report = brute_force_a(&inst, &lat);
    let witness_rows = lat.subspace(report.witness).row_strings();
    match output {
        OutputFormat::Text => {
            println!("A: {}", report.a_value);
            println!("k0: {}", report.k0);
            println!(
                "witness: {}",
                if witness_rows.is_empty() { "-".to_string() } else { witness_rows.join(",") }
            );
        }
        OutputFormat::Json => {
            let doc = json!({
                "A": report.a_value.to_string(),
                "k0": report.k0,
                "witness": witness_rows,
            });
            println!("{doc}");
        }
    }
    Ok(ExitCode::SUCCESS)
}

#[allow(clippy::too_many_arguments)]
fn cmd_bound(
    program: Program,
    q: u32,
    n: usize,
    d: usize,
    level: u32,
    export: Option<std::path::PathBuf>,
    output: OutputFormat,
    caps: &Caps,
) -> Result<ExitCode, CliError> {
    let inst = make_instance(q, n, d, level)?;
    let lp: LinearProgram = match program {
        Program::KrawPseudo => {
            let lat = enumerate(inst.spec(), n, caps)?;
            build_kraw_pseudo(&inst, &lat)?
        }
        Program::KrawPseudoWeak => {
            let lat = enumerate(inst.spec(), n, caps)?;
            let k0 = brute_force_a(&inst, &lat).k0;
            build_kraw_pseudo_weak(&inst, &lat, k0)?
        }
        Program::PartialPseudo => {
            let lat = enumerate(inst.spec(), n, caps)?;
            build_partial_pseudo(&inst, &lat)?
        }
        Program::FullPseudoWeak => {
            let lat = enumerate(inst.spec(), n, caps)?;
            let k0 = brute_force_a(&inst, &lat).k0;
            build_full_pseudo_weak(&inst, &lat, k0)?
        }
        Program::KrawUnsym => build_unsym_kraw(&inst, caps)?,
        Program::PartialUnsym => build_unsym_partial(&inst, caps)?,
    };

    if let Some(path) = &export {
        std::fs::write(path, lp.export_text())
            .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))?;
    }

    let sol = solve(&lp);
    if sol.status != Status::Optimal {
        return Err(CliError::Solver(format!(
            "{} returned {:?}; certificate kind {:?}",
            program.name(),
            sol.status,
            sol.certificate_kind
        )));
    }
    if !verify_optimality(&lp, &sol) {
        return Err(CliError::Solver(format!(
            "{} optimum failed exact re-verification",
            program.name()
        )));
    }

    let root = if program.takes_root() {
        integer_power_root(&sol.objective_value, q, level)
    } else {
        None
    };

    match output {
        OutputFormat::Text => {
            println!("program: {}", program.name());
            println!("q: {q}");
            println!("n: {n}");
            println!("d: {d}");
            println!("level: {level}");
            println!("value: {}", fmt_rational(&sol.objective_value));
            if let Some(r) = &root {
                println!("root: {r}");
            }
        }
        OutputFormat::Json => {
            let mut doc = json!({
                "program": program.name(),
                "q": q,
                "n": n,
                "d": d,
                "level": level,
                "value": fmt_rational(&sol.objective_value),
            });
            if let Some(r) = &root {
                doc["root"] = json!(r.to_string());
            }
            println!("{doc}");
        }
    }
    Ok(ExitCode::SUCCESS)
}

/// If value = q^(k * level) for some integer k >= 0, return q^k.
fn integer_power_root(value: &Rational, q: u32, level: u32) -> Option<BigInt> {
    if !value.is_integer() {
        return None;
    }
    let target = value.to_integer();
    let q = BigInt::from(q);
    let mut k = 0u32;
    loop {
        let power = q.pow(k * level);
        if power == target {
            return Some(q.pow(k));
        }
        if power > target {
            return None;
        }
        k += 1;
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_verify(
    suite: SuiteName,
    q: u32,
    n: usize,
    d: usize,
    level: Option<u32>,
    epsilon: &str,
    seed: u64,
    samples: usize,
    output: OutputFormat,
    caps: &Caps,
) -> Result<ExitCode, CliError> {
    let spec = FieldSpec::new(q)?;
    let level = level.unwrap_or(n as u32);
    let eps: Rational = epsilon
        .parse()
        .map_err(|_| CliError::Usage(format!("cannot parse epsilon `{epsilon}` as p/q")))?;

    let outcome: SuiteOutcome = match suite {
        SuiteName::Mobius => mobius_suite(&spec, n, seed, samples)?,
        SuiteName::Charsum => charsum_suite(&spec, n)?,
        _ => {
            let inst = Instance::new(spec.clone(), n, d, level)?;
            let lat = enumerate(&spec, n, caps)?;
            match suite {
                SuiteName::Completeness => completeness_suite(&inst, &lat)?,
                SuiteName::Nonintegral => nonintegral_suite(&inst, &lat, &eps)?,
                SuiteName::Escalation => escalation_suite(&inst, &lat, &eps, caps.max_level)?,
                SuiteName::Masstransfer => masstransfer_suite(&inst, &lat)?,
                SuiteName::PartialIntegrality => partial_integrality_suite(&inst, &lat)?,
                SuiteName::Mobius | SuiteName::Charsum => unreachable!(),
            }
        }
    };

    let pass = outcome.passed();
    match output {
        OutputFormat::Text => {
            println!("suite: {}", outcome.name);
            for check in &outcome.checks {
                println!(
                    "{} {}: {}",
                    if check.pass { "PASS" } else { "FAIL" },
                    check.label,
                    check.detail
                );
            }
            println!("result: {}", if pass { "pass" } else { "fail" });
        }
        OutputFormat::Json => {
            let checks: Vec<serde_json::Value> = outcome
                .checks
                .iter()
                .map(|c| json!({"label": c.label, "pass": c.pass, "detail": c.detail}))
                .collect();
            let doc = json!({"suite": outcome.name, "pass": pass, "checks": checks});
            println!("{doc}");
        }
    }
    Ok(if pass { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn cmd_lattice(
    q: u32,
    n: usize,
    output: OutputFormat,
    caps: &Caps,
) -> Result<ExitCode, CliError> {
    let spec = FieldSpec::new(q)?;
    let lat = enumerate(&spec, n, caps)?;
    match output {
        OutputFormat::Text => {
            for id in lat.ids() {
                println!("{}", lat.dump_line(id));
            }
        }
        OutputFormat::Json => {
            let spaces: Vec<serde_json::Value> = lat
                .ids()
                .map(|id| {
                    json!({
                        "id": id.0,
                        "dim": lat.dim(id),
                        "basis": lat.subspace(id).row_strings(),
                    })
                })
                .collect();
            let doc = json!({"q": q, "n": n, "count": lat.len(), "subspaces": spaces});
            println!("{doc}");
        }
    }
    Ok(ExitCode::SUCCESS)
}
