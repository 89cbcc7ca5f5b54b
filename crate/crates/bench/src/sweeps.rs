use crate::matrix::BenchRow;

/// Iterations per sweep for one method over all its problems.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepDistribution {
    pub method: String,
    /// `(problem, iterations / sweeps)` in table order.
    pub values: Vec<(String, f64)>,
}

impl SweepDistribution {
    /// Empirical CDF: sorted values with the fraction of problems at or below each.
    pub fn ecdf(&self) -> Vec<(f64, f64)> {
        let mut v: Vec<f64> = self.values.iter().map(|p| p.1).collect();
        v.sort_by(f64::total_cmp);
        let n = v.len() as f64;
        let mut out: Vec<(f64, f64)> = vec![];
        for (i, x) in v.into_iter().enumerate() {
            let frac = (i + 1) as f64 / n;
            match out.last_mut() {
                Some(last) if last.0 == x => last.1 = frac,
                _ => out.push((x, frac)),
            }
        }
        out
    }
}

/// Groups rows by method label (`tag/m<memory>`) in order of first appearance.
/// Rows without a completed sweep are skipped.
pub fn sweep_stats(rows: &[BenchRow]) -> Vec<SweepDistribution> {
    let mut out: Vec<SweepDistribution> = vec![];
    for r in rows.iter().filter(|r| r.sweeps >= 1) {
        let label = format!("{}/m{}", r.method, r.memory);
        let value = (r.problem.clone(), r.iterations as f64 / r.sweeps as f64);
        match out.iter_mut().find(|d| d.method == label) {
            Some(d) => d.values.push(value),
            None => out.push(SweepDistribution { method: label, values: vec![value] }),
        }
    }
    out
}
