use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use lmsd::problems::{self, ProblemError};
use lmsd::solvers::SolverError;
use lmsd::{abb_gradient, solve_general, solve_quadratic, AbbVariant, Engine, NonlinearProblem, QuadraticProblem, RunReport, SolverConfig};
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

/// A solver choice; parsed from an engine tag or `abb-min` / `abb-bon`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Lmsd(Engine),
    Abb(AbbVariant),
}

impl Method {
    pub fn tag(&self) -> &'static str {
        match self {
            Method::Lmsd(e) => e.tag(),
            Method::Abb(v) => v.tag(),
        }
    }
}

impl FromStr for Method {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "abb-min" => Ok(Method::Abb(AbbVariant::Min)),
            "abb-bon" => Ok(Method::Abb(AbbVariant::Bon)),
            _ => s.parse().map(Method::Lmsd).map_err(|e| BenchError::Config(format!("{e}"))),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MethodSpec {
    pub method: Method,
    pub memory: usize,
}

impl MethodSpec {
    pub fn new(method: Method, memory: usize) -> Self {
        Self { method, memory }
    }

    /// `tag/m<memory>`, the method column of the report table.
    pub fn label(&self) -> String {
        format!("{}/m{}", self.method, self.memory)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProblemSpec {
    /// `diag(1, ω, …, ω^{n-1})`, `x₀ = e`, `b = 0`. With `protocol` set the
    /// objective is divided by `‖g₀‖` and the run uses `β₀ = 0.5` with the
    /// absolute tolerance `‖g‖ ≤ 1e-7` on the scaled problem.
    Geometric { n: usize, omega: f64, protocol: bool },
    /// Random diagonal quadratic; the seed is offset by the matrix seed.
    RandomQuadratic { n: usize, kappa: f64, seed: u64 },
    Builtin { name: String, n: usize },
    MatrixMarket(PathBuf),
}

impl ProblemSpec {
    /// Fifteen geometric problems of size 100 with ω equally spaced in [1.01, 1.4].
    pub fn geometric_family() -> Vec<ProblemSpec> {
        (0..15).map(|i| ProblemSpec::Geometric { n: 100, omega: 1.01 + 0.39 * i as f64 / 14.0, protocol: true }).collect()
    }

    /// The run configuration for this problem.
    pub fn config(&self, base: &SolverConfig) -> SolverConfig {
        match self {
            ProblemSpec::Geometric { protocol: true, .. } => SolverConfig { beta0: Some(0.5), gtol_abs: Some(1e-7), ..base.clone() },
            _ => base.clone(),
        }
    }

    pub fn build(&self, seed: u64) -> Result<Problem, ProblemError> {
        Ok(match self {
            ProblemSpec::Geometric { n, omega, .. } => {
                let mut p = problems::geometric_quadratic(*n, *omega)?;
                if let ProblemSpec::Geometric { protocol: true, .. } = self {
                    p = p.normalized();
                }
                p.name = format!("geometric-{n}-{omega:.4}");
                Problem::Quadratic(p)
            }
            ProblemSpec::RandomQuadratic { n, kappa, seed: s } => {
                let mut p = problems::random_quadratic(*n, *kappa, seed.wrapping_add(*s))?;
                p.name = format!("random-{n}-{kappa:e}-{s}");
                Problem::Quadratic(p)
            }
            ProblemSpec::Builtin { name, n } => Problem::Nonlinear(problems::builtin_nonlinear(name, *n)?),
            ProblemSpec::MatrixMarket(path) => Problem::Quadratic(problems::load_matrix_market(path)?),
        })
    }
}

/// A built problem, dispatched to the quadratic or the general driver.
#[derive(Debug, Clone)]
pub enum Problem {
    Quadratic(QuadraticProblem),
    Nonlinear(NonlinearProblem),
}

impl Problem {
    pub fn name(&self) -> &str {
        match self {
            Problem::Quadratic(p) => &p.name,
            Problem::Nonlinear(p) => &p.name,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Problem::Quadratic(p) => p.dim(),
            Problem::Nonlinear(p) => p.dim(),
        }
    }

    pub fn solve(&self, method: Method, cfg: &SolverConfig) -> Result<RunReport, SolverError> {
        match (self, method) {
            (Problem::Quadratic(p), Method::Lmsd(engine)) => solve_quadratic(p, &SolverConfig { engine, ..cfg.clone() }),
            (Problem::Nonlinear(p), Method::Lmsd(engine)) => solve_general(p, &SolverConfig { engine, ..cfg.clone() }),
            (Problem::Quadratic(p), Method::Abb(v)) => abb_gradient(&p.as_nonlinear(), v, cfg),
            (Problem::Nonlinear(p), Method::Abb(v)) => abb_gradient(p, v, cfg),
        }
    }
}

#[derive(Debug, Clone)]
pub struct BenchMatrix {
    pub methods: Vec<MethodSpec>,
    pub problems: Vec<ProblemSpec>,
    /// Base configuration; `memory` and `engine` are taken from each method.
    pub config: SolverConfig,
    pub seed: u64,
}

/// One run of the matrix. Runs that end with a solver error carry the status
/// `solver_error` and zero counters.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub method: String,
    pub memory: usize,
    pub problem: String,
    pub n: usize,
    pub status: String,
    pub iterations: usize,
    pub nfe: usize,
    pub nge: usize,
    pub sweeps: usize,
    pub backtracks: usize,
    pub cauchy_resets: usize,
    pub gnorm0: f64,
    pub final_gnorm: f64,
    pub final_f: f64,
    pub trajectory_hash: String,
    pub wall_time: f64,
}

impl BenchRow {
    pub fn solved(&self) -> bool {
        self.status == "converged"
    }

    /// Cost under `metric`; infinite for unsolved runs.
    pub fn cost(&self, metric: Metric) -> f64 {
        if !self.solved() {
            return f64::INFINITY;
        }
        match metric {
            Metric::Nge => self.nge as f64,
            Metric::Nfe => self.nfe as f64,
            // zero-duration runs would break the ratio
            Metric::Time => self.wall_time.max(1e-9),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Nge,
    Nfe,
    Time,
}

impl FromStr for Metric {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "nge" => Ok(Metric::Nge),
            "nfe" => Ok(Metric::Nfe),
            "time" => Ok(Metric::Time),
            _ => Err(BenchError::Config(format!("unknown metric `{s}` (nge, nfe, time)"))),
        }
    }
}

/// Runs every (method, problem) pair in parallel. Rows are ordered by method,
/// then problem, regardless of completion order.
pub fn run_matrix(bm: &BenchMatrix) -> Result<Vec<BenchRow>, BenchError> {
    if bm.methods.is_empty() || bm.problems.is_empty() {
        return Err(BenchError::Config("a bench matrix needs at least one method and one problem".into()));
    }
    for spec in &bm.methods {
        SolverConfig { memory: spec.memory, ..bm.config.clone() }.validate().map_err(|e| BenchError::Config(format!("{}: {e}", spec.label())))?;
    }
    let built: Vec<(Problem, SolverConfig)> = bm
        .problems
        .iter()
        .map(|spec| {
            let p = spec.build(bm.seed)?;
            Ok((p, spec.config(&bm.config)))
        })
        .collect::<Result<_, ProblemError>>()?;

    let jobs: Vec<(usize, usize)> = (0..bm.methods.len()).flat_map(|i| (0..built.len()).map(move |j| (i, j))).collect();
    let rows = jobs
        .par_iter()
        .map(|&(i, j)| {
            let spec = bm.methods[i];
            let (problem, base) = &built[j];
            let cfg = SolverConfig { memory: spec.memory, ..base.clone() };
            let report = problem.solve(spec.method, &cfg);
            if let Err(e) = &report {
                log::warn!("{} on {}: {e}", spec.label(), problem.name());
            }
            row(spec, problem, report.ok())
        })
        .collect();
    Ok(rows)
}

fn row(spec: MethodSpec, p: &Problem, r: Option<RunReport>) -> BenchRow {
    let mut row = BenchRow {
        method: spec.method.tag().to_string(),
        memory: spec.memory,
        problem: p.name().to_string(),
        n: p.dim(),
        status: "solver_error".into(),
        iterations: 0,
        nfe: 0,
        nge: 0,
        sweeps: 0,
        backtracks: 0,
        cauchy_resets: 0,
        gnorm0: f64::NAN,
        final_gnorm: f64::NAN,
        final_f: f64::NAN,
        trajectory_hash: String::new(),
        wall_time: 0.0,
    };
    if let Some(r) = r {
        row.status = r.status.as_str().to_string();
        row.iterations = r.iterations;
        row.nfe = r.nfe;
        row.nge = r.nge;
        row.sweeps = r.sweeps;
        row.backtracks = r.backtracks;
        row.cauchy_resets = r.cauchy_resets;
        row.gnorm0 = r.gnorm0;
        row.final_gnorm = r.final_gnorm;
        row.final_f = r.final_f;
        row.trajectory_hash = r.trajectory_hash;
        row.wall_time = r.wall_time;
    }
    row
}
