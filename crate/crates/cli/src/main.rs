//! `costas`: enumerate, count and verify Costas arrays.
//!
//! Exit codes: 0 ok, 1 property violation, 2 budget or cap exceeded,
//! 3 I/O failure, 4 parse failure.

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use costas_core::analytics::{self, MeasuredComparisons};
use costas_core::board::equivalence_classes;
use costas_core::checker::is_costas;
use costas_core::checkpoint::CheckpointError;
use costas_core::oracle::{self, OracleError};
use costas_core::phi::DEFAULT_MEMORY_BUDGET;
use costas_core::{
    CTriangle, ComparisonLedger, Convention, EngineConfig, EngineError, OracleCaps, PhiEngine,
    Placement, MAX_ORDER,
};

#[derive(Parser)]
#[command(
    name = "costas",
    version,
    about = "Costas array enumeration by recursive construction"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write every Costas array of order n.
    Enumerate(EnumerateArgs),
    /// Export the count triangle C(n, k) as `n,k,C` CSV.
    Triangle(TriangleArgs),
    /// Comparison counts of the recursion against exhaustive search.
    Report(ReportArgs),
    /// Check that every line of a placement file is a Costas placement.
    Verify(VerifyArgs),
    /// Histogram of the minimum removals that make a permutation Costas.
    Chi(ChiArgs),
    /// Group the Costas arrays of order n into symmetry classes.
    Classes(ClassesArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Recursive,
    Exhaustive,
    DirectStart,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Jsonl,
    Csv,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ConventionArg {
    Strict,
    EarlyExit,
}

impl From<ConventionArg> for Convention {
    fn from(c: ConventionArg) -> Self {
        match c {
            ConventionArg::Strict => Convention::Strict,
            ConventionArg::EarlyExit => Convention::EarlyExit,
        }
    }
}

#[derive(Args, Clone)]
struct Common {
    /// Worker threads; output never depends on this.
    #[arg(long, env = "COSTAS_JOBS", default_value_t = 1, value_parser = clap::value_parser!(u16).range(1..))]
    jobs: u16,
    /// Output file; standard output when omitted.
    #[arg(long, env = "COSTAS_OUTPUT")]
    output: Option<PathBuf>,
    /// Largest order accepted by the recursion.
    #[arg(long, env = "COSTAS_MAX_ORDER", default_value_t = 12)]
    max_order: usize,
    /// Largest order for exhaustive search.
    #[arg(long, env = "COSTAS_EXHAUSTIVE_CAP", default_value_t = OracleCaps::default().exhaustive)]
    exhaustive_cap: usize,
    /// Largest order for the chi census.
    #[arg(long, env = "COSTAS_CENSUS_CAP", default_value_t = OracleCaps::default().census)]
    census_cap: usize,
    /// Memory budget for the live sets of the recursion, in bytes.
    #[arg(long, env = "COSTAS_MEMORY_BUDGET", default_value_t = DEFAULT_MEMORY_BUDGET)]
    memory_budget: u64,
}

impl Common {
    fn caps(&self) -> OracleCaps {
        OracleCaps {
            exhaustive: self.exhaustive_cap,
            census: self.census_cap,
            ..OracleCaps::default()
        }
    }

    fn engine(
        &self,
        convention: Convention,
        checkpoint: Option<PathBuf>,
    ) -> Result<PhiEngine, Failure> {
        Ok(PhiEngine::new(EngineConfig {
            jobs: self.jobs as usize,
            convention,
            memory_budget: self.memory_budget,
            checkpoint_dir: checkpoint,
            ..EngineConfig::default()
        })?)
    }

    fn check_order(&self, n: usize) -> Result<(), Failure> {
        if n == 0 {
            return Err(Failure::parse("order must be at least 1"));
        }
        if n > self.max_order.min(MAX_ORDER) {
            return Err(Failure::budget(format!(
                "order {n} exceeds the cap {} (raise --max-order, at most {MAX_ORDER})",
                self.max_order.min(MAX_ORDER)
            )));
        }
        Ok(())
    }
}

#[derive(Args)]
struct EnumerateArgs {
    #[arg(long, env = "COSTAS_N")]
    n: usize,
    #[arg(long, value_enum, env = "COSTAS_METHOD", default_value = "recursive")]
    method: Method,
    #[arg(long, value_enum, env = "COSTAS_CONVENTION", default_value = "strict")]
    convention: ConventionArg,
    /// Checkpoint directory; an existing checkpoint is resumed.
    #[arg(long, env = "COSTAS_CHECKPOINT")]
    checkpoint: Option<PathBuf>,
    #[arg(long, value_enum, env = "COSTAS_FORMAT", default_value = "jsonl")]
    format: Format,
    /// Re-check every candidate with the full checker.
    #[arg(long)]
    verify_candidates: bool,
    /// Stop after this many column updates (for exercising resume).
    #[arg(long, hide = true)]
    halt_after: Option<usize>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct TriangleArgs {
    #[arg(long, env = "COSTAS_MAX_N")]
    max_n: usize,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct ReportArgs {
    #[arg(long, env = "COSTAS_MAX_N", default_value_t = 10)]
    max_n: usize,
    #[arg(long, value_enum, env = "COSTAS_FORMAT", default_value = "csv")]
    format: Format,
    /// Orders to extrapolate the reduction factor to.
    #[arg(long, value_delimiter = ',', default_value = "32,33")]
    extrapolate: Vec<usize>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct VerifyArgs {
    /// JSON-Lines placement file.
    file: PathBuf,
}

#[derive(Args)]
struct ChiArgs {
    #[arg(long, env = "COSTAS_N")]
    n: usize,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct ClassesArgs {
    #[arg(long, env = "COSTAS_N")]
    n: usize,
    #[arg(long, value_enum, env = "COSTAS_FORMAT", default_value = "jsonl")]
    format: Format,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn violation(message: impl Into<String>) -> Self {
        Failure {
            code: 1,
            message: message.into(),
        }
    }
    fn budget(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: message.into(),
        }
    }
    fn io(message: impl Into<String>) -> Self {
        Failure {
            code: 3,
            message: message.into(),
        }
    }
    fn parse(message: impl Into<String>) -> Self {
        Failure {
            code: 4,
            message: message.into(),
        }
    }
}

impl From<EngineError> for Failure {
    fn from(e: EngineError) -> Self {
        let message = e.to_string();
        match e {
            EngineError::MemoryBudget { .. }
            | EngineError::Halted { .. }
            | EngineError::Order(_) => Failure::budget(message),
            EngineError::Checkpoint(CheckpointError::Io { .. }) => Failure::io(message),
            EngineError::Checkpoint(_) | EngineError::Board(_) => Failure::parse(message),
            EngineError::Verification(_) | EngineError::Schedule(_) | EngineError::Extension(_) => {
                Failure::violation(message)
            }
        }
    }
}

impl From<OracleError> for Failure {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::Cap { .. } => Failure::budget(e.to_string()),
            OracleError::Input(_) => Failure::parse(e.to_string()),
        }
    }
}

impl From<analytics::AnalyticsError> for Failure {
    fn from(e: analytics::AnalyticsError) -> Self {
        Failure::violation(e.to_string())
    }
}

fn write_output(path: Option<&Path>, body: &str) -> Result<(), Failure> {
    let result = match path {
        Some(p) => fs::write(p, body).map_err(|e| (p.display().to_string(), e)),
        None => {
            let stdout = io::stdout();
            let mut w = BufWriter::new(stdout.lock());
            w.write_all(body.as_bytes())
                .and_then(|_| w.flush())
                .map_err(|e| ("standard output".to_string(), e))
        }
    };
    result.map_err(|(target, e)| Failure::io(format!("writing {target}: {e}")))
}

fn format_placements(arrays: &[Placement], format: Format) -> String {
    match format {
        Format::Jsonl => arrays.iter().map(|p| p.to_json() + "\n").collect(),
        Format::Json => {
            let values: Vec<_> = arrays.iter().map(Placement::to_serialized).collect();
            serde_json::to_string(&values).expect("placements serialize") + "\n"
        }
        Format::Csv => {
            let n = arrays.first().map_or(0, Placement::size);
            let mut out = (1..=n)
                .map(|r| format!("r{r}"))
                .collect::<Vec<_>>()
                .join(",");
            out.push('\n');
            for p in arrays {
                let row: Vec<String> = p.vector().iter().map(u8::to_string).collect();
                out.push_str(&row.join(","));
                out.push('\n');
            }
            out
        }
    }
}

fn summary(what: &str, count: usize, ledger: &ComparisonLedger, started: Instant) {
    eprintln!(
        "{what}: {count} arrays, {} candidates, {} membership tests, {} comparisons, {:.3}s",
        ledger.candidates,
        ledger.membership_tests,
        ledger.comparisons,
        started.elapsed().as_secs_f64()
    );
}

fn recursive_arrays(common: &Common, n: usize) -> Result<Vec<Placement>, Failure> {
    common.check_order(n)?;
    let outcome = common.engine(Convention::EarlyExit, None)?.run_to(n)?;
    Ok(outcome.arrays().to_vec())
}

fn cmd_enumerate(args: EnumerateArgs) -> Result<(), Failure> {
    let started = Instant::now();
    let common = &args.common;
    let convention = Convention::from(args.convention);
    let (mut arrays, ledger, label) = match args.method {
        Method::Exhaustive => {
            let (arrays, ledger) = oracle::exhaustive_costas(
                args.n,
                convention,
                common.jobs as usize,
                &common.caps(),
            )?;
            (arrays, ledger, "exhaustive")
        }
        Method::Recursive => {
            common.check_order(args.n)?;
            let engine = PhiEngine::new(EngineConfig {
                verify: args.verify_candidates,
                halt_after_updates: args.halt_after,
                ..common
                    .engine(convention, args.checkpoint.clone())?
                    .config()
                    .clone()
            })?;
            let outcome = engine.run_to(args.n)?;
            if let Some(step) = outcome.resumed_from {
                eprintln!("resumed from step {step}");
            }
            (
                outcome.arrays().to_vec(),
                outcome.total_ledger(),
                "recursive",
            )
        }
        Method::DirectStart => {
            common.check_order(args.n)?;
            let state = common.engine(convention, None)?.direct_start(args.n)?;
            (
                state.arrays().to_vec(),
                ComparisonLedger::default(),
                "direct-start",
            )
        }
    };
    arrays.sort_unstable();
    write_output(
        common.output.as_deref(),
        &format_placements(&arrays, args.format),
    )?;
    summary(label, arrays.len(), &ledger, started);
    Ok(())
}

fn cmd_triangle(args: TriangleArgs) -> Result<(), Failure> {
    args.common.check_order(args.max_n)?;
    let rows = args
        .common
        .engine(Convention::EarlyExit, None)?
        .c_rows(args.max_n)?;
    let triangle = CTriangle::from_rows(&rows);
    write_output(
        args.common.output.as_deref(),
        &triangle.to_csv(1..=args.max_n),
    )
}

fn cmd_report(args: ReportArgs) -> Result<(), Failure> {
    let common = &args.common;
    if args.max_n < 3 {
        return Err(Failure::parse(
            "the report starts at order 3; use --max-n 3 or more",
        ));
    }
    common.check_order(args.max_n)?;
    let strict = common
        .engine(Convention::Strict, None)?
        .run_to(args.max_n)?;
    let early = common
        .engine(Convention::EarlyExit, None)?
        .run_to(args.max_n)?;
    let (strict, early) = (strict.ledger_by_step(), early.ledger_by_step());
    let measured: Vec<MeasuredComparisons> = (3..=args.max_n)
        .map(|n| MeasuredComparisons {
            n,
            strict: strict.get(&n).map_or(0, |l| l.comparisons),
            early_exit: early.get(&n).map(|l| l.comparisons),
        })
        .collect();
    let rows = common
        .engine(Convention::EarlyExit, None)?
        .c_rows(args.max_n - 1)?;
    let triangle = CTriangle::from_rows(&rows);
    let report = analytics::efficiency_report(
        &measured,
        Some(&triangle),
        &analytics::published_comparisons(),
        &args.extrapolate,
    )?;
    let body = match args.format {
        Format::Json => report.to_json() + "\n",
        Format::Csv | Format::Jsonl => report.to_csv(),
    };
    write_output(common.output.as_deref(), &body)?;
    if let Some(fit) = report.decrement_fit {
        eprintln!(
            "decrement rate fit: a(n) = {:.4} + {:.4} n over {} points",
            fit.intercept, fit.slope, fit.points
        );
    }
    for e in &report.extrapolations {
        eprintln!(
            "n = {}: reduction factor {:.3e} ({})",
            e.n, e.reduction_factor, e.status
        );
    }
    Ok(())
}

fn cmd_verify(args: VerifyArgs) -> Result<(), Failure> {
    let text = fs::read_to_string(&args.file)
        .map_err(|e| Failure::io(format!("reading {}: {e}", args.file.display())))?;
    let mut count = 0;
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let p = Placement::from_json(line)
            .map_err(|e| Failure::parse(format!("{}:{}: {e}", args.file.display(), i + 1)))?;
        if !is_costas(&p) {
            return Err(Failure::violation(format!(
                "{}:{}: {p} is not a Costas placement",
                args.file.display(),
                i + 1
            )));
        }
        count += 1;
    }
    eprintln!("{}: {count} placements, all Costas", args.file.display());
    Ok(())
}

fn cmd_chi(args: ChiArgs) -> Result<(), Failure> {
    let census = oracle::chi_census(args.n, args.common.jobs as usize, &args.common.caps())?;
    let mut out = String::from("k,count\n");
    for (k, count) in census.histogram.iter().enumerate() {
        out.push_str(&format!("{k},{count}\n"));
    }
    write_output(args.common.output.as_deref(), &out)
}

fn cmd_classes(args: ClassesArgs) -> Result<(), Failure> {
    let arrays = recursive_arrays(&args.common, args.n)?;
    let classes = equivalence_classes(&arrays);
    let body = match args.format {
        Format::Csv => {
            let mut out = String::from("representative,orbit_size,members\n");
            for c in &classes {
                let rep: Vec<String> = c.key.bytes().iter().map(u8::to_string).collect();
                out.push_str(&format!(
                    "{},{},{}\n",
                    rep.join(" "),
                    c.orbit_size,
                    c.members.len()
                ));
            }
            out
        }
        Format::Jsonl | Format::Json => {
            let values: Vec<serde_json::Value> = classes
                .iter()
                .map(|c| {
                    serde_json::json!({
                        "representative": c.key.representative().to_serialized(),
                        "orbit_size": c.orbit_size,
                        "members": c.members.len(),
                    })
                })
                .collect();
            if args.format == Format::Json {
                serde_json::to_string(&values).expect("classes serialize") + "\n"
            } else {
                values.iter().map(|v| v.to_string() + "\n").collect()
            }
        }
    };
    write_output(args.common.output.as_deref(), &body)?;
    let total: usize = classes.iter().map(|c| c.orbit_size).sum();
    eprintln!("{} classes covering {total} arrays", classes.len());
    if total != arrays.len() {
        return Err(Failure::violation(format!(
            "orbit sizes sum to {total}, but there are {} arrays",
            arrays.len()
        )));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(4)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Enumerate(a) => cmd_enumerate(a),
        Command::Triangle(a) => cmd_triangle(a),
        Command::Report(a) => cmd_report(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Chi(a) => cmd_chi(a),
        Command::Classes(a) => cmd_classes(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("costas: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
