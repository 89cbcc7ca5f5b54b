//! Benchmark harness for the `lmsd` solvers: method × problem matrices,
//! performance profiles, sweep statistics and CSV output.

mod matrix;
mod profile;
mod report;
mod sweeps;

pub use matrix::{run_matrix, BenchError, BenchMatrix, BenchRow, Method, MethodSpec, Metric, Problem, ProblemSpec};
pub use profile::{performance_profile, Profile, ProfileCurve, ProfileError};
pub use report::{cost_table, read_curves, read_rows, write_curves, write_rows, write_sweeps};
pub use sweeps::{sweep_stats, SweepDistribution};
