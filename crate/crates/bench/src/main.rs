use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lmsd::SolverConfig;
use lmsd_bench::{
    cost_table, performance_profile, read_rows, run_matrix, sweep_stats, write_curves, write_rows, write_sweeps, BenchError, BenchMatrix, BenchRow,
    Method, MethodSpec, Metric, ProblemSpec,
};

#[derive(Parser)]
#[command(name = "lmsd", version, about = "Limited memory steepest descent: single runs, benchmark matrices and performance profiles")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one quadratic problem.
    Quad {
        #[command(flatten)]
        solver: SolverArgs,
        /// Engine tag, e.g. lmsd-g, lmsd-hy-qr, or abb-min / abb-bon.
        #[arg(long, default_value = "lmsd-g")]
        engine: String,
        #[arg(long, default_value_t = 5)]
        memory: usize,
        /// Matrix Market file; b = A·e and x₀ = 10e.
        #[arg(long, conflicts_with_all = ["omega", "problem"])]
        matrix: Option<PathBuf>,
        /// Ratio of the geometric spectrum diag(1, ω, …, ω^{n-1}).
        #[arg(long)]
        omega: Option<f64>,
        /// `geometric` or `random` (log-uniform diagonal with condition --kappa).
        #[arg(long, default_value = "geometric")]
        problem: String,
        #[arg(long, default_value_t = 100)]
        n: usize,
        #[arg(long, default_value_t = 1e4)]
        kappa: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve one built-in nonlinear problem.
    Nonlinear {
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long, default_value = "lmsd-chol")]
        engine: String,
        #[arg(long, default_value_t = 5)]
        memory: usize,
        #[arg(long, default_value = "extended-rosenbrock")]
        problem: String,
        #[arg(long, default_value_t = 100)]
        n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a method × problem matrix and write one CSV row per run.
    Bench {
        #[command(flatten)]
        solver: SolverArgs,
        /// Comma-separated engine tags.
        #[arg(long, value_delimiter = ',', default_value = "lmsd-g,lmsd-g-qr,lmsd-g-svd")]
        engine: Vec<String>,
        /// Comma-separated memory values; every engine runs with each.
        #[arg(long, value_delimiter = ',', default_value = "5")]
        memory: Vec<usize>,
        /// Comma-separated problems: `fig3` (the 15 geometric problems),
        /// `geometric` (with --omega), `random`, or a built-in name.
        #[arg(long, value_delimiter = ',')]
        problem: Vec<String>,
        /// Matrix Market files to add to the problem list.
        #[arg(long)]
        matrix: Vec<PathBuf>,
        #[arg(long, default_value_t = 100)]
        n: usize,
        #[arg(long, default_value_t = 1.1)]
        omega: f64,
        #[arg(long, default_value_t = 1e4)]
        kappa: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Turn a bench CSV into performance profile curves.
    Profile {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "nge")]
        metric: String,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the empirical distribution of iterations per sweep.
        #[arg(long)]
        sweeps: Option<PathBuf>,
    },
}

#[derive(Args)]
struct SolverArgs {
    #[arg(long, default_value_t = 1e-8)]
    thresh: f64,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long, default_value_t = 100_000)]
    max_iter: usize,
    /// Initial stepsize; defaults to 1/‖g₀‖.
    #[arg(long)]
    beta0: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl SolverArgs {
    fn config(&self) -> SolverConfig {
        SolverConfig { thresh: self.thresh, tol: self.tol, max_iter: self.max_iter, beta0: self.beta0, ..Default::default() }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn output(path: &Option<PathBuf>) -> Result<Box<dyn Write>, BenchError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn single(method: &str, memory: usize, problem: ProblemSpec, solver: &SolverArgs, out: &Option<PathBuf>) -> Result<bool, BenchError> {
    let bm = BenchMatrix { methods: vec![MethodSpec::new(method.parse()?, memory)], problems: vec![problem], config: solver.config(), seed: solver.seed };
    let rows = run_matrix(&bm)?;
    let r = &rows[0];
    eprintln!(
        "{} on {} (n = {}): {} after {} iterations, {} sweeps, nge {}, nfe {}, ‖g‖ {:.3e} (from {:.3e})",
        r.method, r.problem, r.n, r.status, r.iterations, r.sweeps, r.nge, r.nfe, r.final_gnorm, r.gnorm0
    );
    if out.is_some() {
        write_rows(output(out)?, &rows)?;
    }
    Ok(r.solved())
}

fn run(cli: Cli) -> Result<bool, BenchError> {
    match cli.command {
        Command::Quad { solver, engine, memory, matrix, omega, problem, n, kappa, out } => {
            let spec = match (matrix, omega, problem.as_str()) {
                (Some(path), _, _) => ProblemSpec::MatrixMarket(path),
                (None, Some(omega), _) => ProblemSpec::Geometric { n, omega, protocol: false },
                (None, None, "geometric") => ProblemSpec::Geometric { n, omega: 1.1, protocol: false },
                (None, None, "random") => ProblemSpec::RandomQuadratic { n, kappa, seed: 0 },
                (None, None, other) => return Err(BenchError::Config(format!("unknown quadratic problem `{other}` (geometric, random)"))),
            };
            single(&engine, memory, spec, &solver, &out)
        }
        Command::Nonlinear { solver, engine, memory, problem, n, out } => {
            single(&engine, memory, ProblemSpec::Builtin { name: problem, n }, &solver, &out)
        }
        Command::Bench { solver, engine, memory, problem, matrix, n, omega, kappa, out } => {
            let mut methods = vec![];
            for e in &engine {
                let method: Method = e.parse()?;
                methods.extend(memory.iter().map(|&m| MethodSpec::new(method, m)));
            }
            let mut problems = vec![];
            let names = if problem.is_empty() && matrix.is_empty() { vec!["fig3".to_string()] } else { problem };
            for name in &names {
                match name.as_str() {
                    "fig3" => problems.extend(ProblemSpec::geometric_family()),
                    "geometric" => problems.push(ProblemSpec::Geometric { n, omega, protocol: false }),
                    "random" => problems.push(ProblemSpec::RandomQuadratic { n, kappa, seed: 0 }),
                    other => problems.push(ProblemSpec::Builtin { name: other.to_string(), n }),
                }
            }
            problems.extend(matrix.into_iter().map(ProblemSpec::MatrixMarket));
            let bm = BenchMatrix { methods, problems, config: solver.config(), seed: solver.seed };
            let rows: Vec<BenchRow> = run_matrix(&bm)?;
            write_rows(output(&out)?, &rows)?;
            let failed = rows.iter().filter(|r| !r.solved()).count();
            if failed > 0 {
                eprintln!("{failed} of {} runs did not converge", rows.len());
            }
            Ok(failed == 0)
        }
        Command::Profile { input, metric, out, sweeps } => {
            let metric: Metric = metric.parse()?;
            if metric == Metric::Time {
                log::warn!("time profiles depend on the platform; nge and nfe are reproducible");
            }
            let rows = read_rows(File::open(&input)?)?;
            let (methods, _, costs) = cost_table(&rows, metric)?;
            let profile = performance_profile(&methods, &costs).map_err(|e| BenchError::Config(e.to_string()))?;
            write_curves(output(&out)?, &profile.curves)?;
            if let Some(path) = sweeps {
                write_sweeps(File::create(path)?, &sweep_stats(&rows))?;
            }
            Ok(true)
        }
    }
}
