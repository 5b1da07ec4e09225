use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use sonc::bnb::{solve_bnb, BnbOptions, BnbResult};
use sonc::certify::RepairMode;
use sonc::covers::ExponentStrategy;
use sonc::harness::{generate_corpus, generate_instance, run_batch, write_corpus, BatchOptions};
use sonc::{compute_bound, BoundOptions, BoundOutcome, PopInstance, Status};

#[derive(Parser)]
#[command(name = "sonc-bound", version, about = "SONC lower bounds for box-constrained polynomial optimization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Bound a single instance.
    Solve(SolveArgs),
    /// Bound every instance in a directory with and without bound constraints.
    Batch(BatchArgs),
    /// Write random instances.
    Generate(GenerateArgs),
    /// Branch and bound on a single instance.
    Bnb(BnbArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Strategy {
    Uniform,
    PerVariable,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Args)]
struct BoundFlags {
    /// Solve the plain relaxation without bound constraints.
    #[arg(long)]
    no_bound_constraints: bool,
    #[arg(long, value_enum, default_value_t = Strategy::Uniform)]
    exponent_strategy: Strategy,
    #[arg(long)]
    tol_feas: Option<f64>,
    #[arg(long)]
    tol_gap: Option<f64>,
    /// Outer barrier iterations.
    #[arg(long)]
    max_iters: Option<usize>,
    /// Outward-rounded certificate repair.
    #[arg(long)]
    strict: bool,
}

impl BoundFlags {
    fn options(&self) -> BoundOptions {
        let mut o = BoundOptions {
            use_bound_constraints: !self.no_bound_constraints,
            strategy: match self.exponent_strategy {
                Strategy::Uniform => ExponentStrategy::Uniform,
                Strategy::PerVariable => ExponentStrategy::PerVariable,
            },
            ..Default::default()
        };
        if let Some(v) = self.tol_feas {
            o.solver.tol_feas = v;
        }
        if let Some(v) = self.tol_gap {
            o.solver.tol_gap = v;
        }
        if let Some(v) = self.max_iters {
            o.solver.max_outer = v;
        }
        if self.strict {
            o.repair = RepairMode::Strict;
        }
        o
    }
}

#[derive(Args)]
struct BnbFlags {
    #[arg(long, default_value_t = 10_000)]
    max_nodes: usize,
    #[arg(long, default_value_t = 1e-4)]
    gap_tol: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct SolveArgs {
    file: PathBuf,
    #[command(flatten)]
    bound: BoundFlags,
    /// Write the certificate as JSON.
    #[arg(long, value_name = "PATH")]
    emit_certificate: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Print the relaxation model before solving.
    #[arg(long)]
    dump_model: bool,
    /// Run branch and bound instead of a single bound.
    #[arg(long)]
    bnb: bool,
    #[command(flatten)]
    bnb_flags: BnbFlags,
}

#[derive(Args)]
struct BatchArgs {
    dir: PathBuf,
    #[command(flatten)]
    bound: BoundFlags,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Write the CSV here instead of stdout.
    #[arg(long, value_name = "PATH")]
    csv: Option<PathBuf>,
    /// Write `NA` in the seconds column so reruns are byte-identical.
    #[arg(long)]
    no_timings: bool,
}

#[derive(Args)]
struct GenerateArgs {
    /// Directory for a corpus; a single instance goes to stdout without it.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 100)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.3)]
    density: f64,
    /// Variables of a single instance.
    #[arg(long, default_value_t = 2)]
    n: usize,
    /// Constraints of a single instance.
    #[arg(long, default_value_t = 0)]
    m: usize,
    /// Degree of a single instance.
    #[arg(long, default_value_t = 4)]
    degree: u32,
}

#[derive(Args)]
struct BnbArgs {
    file: PathBuf,
    #[command(flatten)]
    bound: BoundFlags,
    #[command(flatten)]
    bnb_flags: BnbFlags,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

/// Writes to stdout; a closed pipe (`| head`) is not an error.
fn emit(text: &str) {
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(text.as_bytes()).and_then(|()| out.flush());
}

fn exit_code(status: Status) -> u8 {
    match status {
        Status::Optimal => 0,
        Status::CoverUnavailable => 2,
        Status::Infeasible => 3,
        Status::NumericalError => 4,
    }
}

fn load(path: &Path) -> Result<PopInstance, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    PopInstance::from_json(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "none".to_string(), |x| x.to_string())
}

fn summary(v: &[f64]) -> String {
    if v.is_empty() {
        return "none".into();
    }
    let max = v.iter().fold(f64::NEG_INFINITY, |m, &x| m.max(x));
    let nz = v.iter().filter(|&&x| x > 0.0).count();
    format!("{} values, {nz} positive, max {max}", v.len())
}

fn report(out: &BoundOutcome, seconds: f64, format: Format) -> String {
    let (mu, nu) = out
        .certificate
        .as_ref()
        .map_or((Vec::new(), Vec::new()), |c| (c.mu.clone(), c.nu.clone()));
    match format {
        Format::Json => json!({
            "status": out.status.as_str(),
            "gamma_solver": out.gamma_solver,
            "gamma_certified": out.gamma_certified(),
            "exponents": out.exponents,
            "mu": mu,
            "nu": nu,
            "iterations": out.solve.as_ref().map(|s| s.iterations),
            "uncovered": out.uncovered.as_ref().map(|e| e.to_string()),
            "message": out.message,
            "seconds": seconds,
        })
        .to_string(),
        Format::Text => {
            let mut s = format!("status: {}\n", out.status);
            s += &format!("gamma_solver: {}\n", fmt_opt(out.gamma_solver));
            s += &format!("gamma_certified: {}\n", fmt_opt(out.gamma_certified()));
            if !out.exponents.is_empty() {
                s += &format!("bound exponents: {:?}\n", out.exponents);
            }
            s += &format!("mu: {}\n", summary(&mu));
            s += &format!("nu: {}\n", summary(&nu));
            if let Some(sol) = &out.solve {
                s += &format!("iterations: {}\n", sol.iterations);
            }
            if let Some(m) = &out.message {
                s += &format!("message: {m}\n");
            }
            s += &format!("seconds: {seconds:.6}");
            s
        }
    }
}

fn bnb_report(r: &BnbResult, format: Format) -> String {
    match format {
        Format::Json => json!({
            "status": r.status.as_str(),
            "lower_bound": r.lower_bound,
            "incumbent": r.incumbent.is_finite().then_some(r.incumbent),
            "incumbent_point": r.incumbent_point,
            "nodes": r.nodes,
            "numerical_errors": r.numerical_errors,
            "exponents": r.exponents,
        })
        .to_string(),
        Format::Text => {
            let mut s: String = r.log.iter().map(|l| format!("{l}\n")).collect();
            s += &format!(
                "status {} lower_bound {} incumbent {} nodes {} numerical_errors {}",
                r.status, r.lower_bound, r.incumbent, r.nodes, r.numerical_errors
            );
            s
        }
    }
}

fn run_bnb(inst: &PopInstance, bound: &BoundFlags, flags: &BnbFlags, format: Format) -> ExitCode {
    let opts = BnbOptions {
        max_nodes: flags.max_nodes,
        gap_tol: flags.gap_tol,
        seed: flags.seed,
        bound: bound.options(),
        ..Default::default()
    };
    emit(&format!("{}\n", bnb_report(&solve_bnb(inst, &opts), format)));
    ExitCode::SUCCESS
}

fn solve(args: SolveArgs) -> Result<ExitCode, String> {
    let inst = load(&args.file)?;
    if args.bnb {
        return Ok(run_bnb(&inst, &args.bound, &args.bnb_flags, args.format));
    }
    let start = Instant::now();
    let out = compute_bound(&inst, &args.bound.options());
    let seconds = start.elapsed().as_secs_f64();
    if args.dump_model {
        match &out.model {
            Some(m) => eprint!("{}", m.dump()),
            None => eprintln!("no model: {}", out.message.as_deref().unwrap_or("")),
        }
    }
    if let Some(path) = &args.emit_certificate {
        match &out.certificate {
            Some(c) => std::fs::write(path, c.to_json())
                .map_err(|e| format!("{}: {e}", path.display()))?,
            None => eprintln!("no certificate to write: status {}", out.status),
        }
    }
    emit(&format!("{}\n", report(&out, seconds, args.format)));
    Ok(ExitCode::from(exit_code(out.status)))
}

fn batch(args: BatchArgs) -> Result<ExitCode, String> {
    if !args.dir.is_dir() {
        return Err(format!("{}: not a directory", args.dir.display()));
    }
    let opts = BatchOptions {
        bound: BoundOptions {
            use_bound_constraints: true,
            ..args.bound.options()
        },
        jobs: args.jobs,
        timings: !args.no_timings,
    };
    let rep = run_batch(&args.dir, &opts).map_err(|e| e.to_string())?;
    let csv = rep.to_csv();
    match &args.csv {
        Some(p) => {
            std::fs::write(p, &csv).map_err(|e| format!("{}: {e}", p.display()))?;
            emit(&rep.table.to_text());
        }
        None => {
            emit(&csv);
            eprint!("{}", rep.table.to_text());
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn generate(args: GenerateArgs) -> Result<ExitCode, String> {
    match &args.out {
        Some(dir) => {
            let corpus = generate_corpus(args.seed, args.count, args.density);
            write_corpus(dir, &corpus).map_err(|e| e.to_string())?;
            emit(&format!("wrote {} instances to {}\n", corpus.len(), dir.display()));
        }
        None => {
            if args.n == 0 || args.degree == 0 {
                return Err("need --n >= 1 and --degree >= 1".into());
            }
            let inst = generate_instance(args.seed, args.n, args.m, args.degree, args.density);
            emit(&format!("{}\n", inst.to_json()));
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let res = match cli.command {
        Command::Solve(a) => solve(a),
        Command::Batch(a) => batch(a),
        Command::Generate(a) => generate(a),
        Command::Bnb(a) => load(&a.file).map(|inst| run_bnb(&inst, &a.bound, &a.bnb_flags, a.format)),
    };
    match res {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
