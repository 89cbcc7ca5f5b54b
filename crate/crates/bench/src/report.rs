use std::io::{Read, Write};

use crate::matrix::{BenchError, BenchRow, Metric};
use crate::profile::ProfileCurve;
use crate::sweeps::SweepDistribution;

const ROW_HEADER: [&str; 16] = [
    "method",
    "memory",
    "problem",
    "n",
    "status",
    "iterations",
    "nfe",
    "nge",
    "sweeps",
    "backtracks",
    "cauchy_resets",
    "gnorm0",
    "final_gnorm",
    "final_f",
    "trajectory_hash",
    "wall_time",
];

/// 17 significant digits, enough to round-trip any `f64`.
fn float(x: f64) -> String {
    format!("{x:.16e}")
}

fn field<T: std::str::FromStr>(rec: &csv::StringRecord, i: usize, line: u64) -> Result<T, BenchError> {
    let raw = rec.get(i).unwrap_or("");
    raw.parse().map_err(|_| BenchError::Config(format!("line {line}: cannot parse `{raw}` in column {}", i + 1)))
}

pub fn write_rows<W: Write>(out: W, rows: &[BenchRow]) -> Result<(), BenchError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(ROW_HEADER)?;
    for r in rows {
        w.write_record([
            r.method.clone(),
            r.memory.to_string(),
            r.problem.clone(),
            r.n.to_string(),
            r.status.clone(),
            r.iterations.to_string(),
            r.nfe.to_string(),
            r.nge.to_string(),
            r.sweeps.to_string(),
            r.backtracks.to_string(),
            r.cauchy_resets.to_string(),
            float(r.gnorm0),
            float(r.final_gnorm),
            float(r.final_f),
            r.trajectory_hash.clone(),
            float(r.wall_time),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_rows<R: Read>(input: R) -> Result<Vec<BenchRow>, BenchError> {
    let mut rd = csv::Reader::from_reader(input);
    let header = rd.headers()?.clone();
    if header.iter().ne(ROW_HEADER) {
        return Err(BenchError::Config(format!("unexpected report header: {}", header.iter().collect::<Vec<_>>().join(","))));
    }
    let mut rows = vec![];
    for rec in rd.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        rows.push(BenchRow {
            method: rec[0].to_string(),
            memory: field(&rec, 1, line)?,
            problem: rec[2].to_string(),
            n: field(&rec, 3, line)?,
            status: rec[4].to_string(),
            iterations: field(&rec, 5, line)?,
            nfe: field(&rec, 6, line)?,
            nge: field(&rec, 7, line)?,
            sweeps: field(&rec, 8, line)?,
            backtracks: field(&rec, 9, line)?,
            cauchy_resets: field(&rec, 10, line)?,
            gnorm0: field(&rec, 11, line)?,
            final_gnorm: field(&rec, 12, line)?,
            final_f: field(&rec, 13, line)?,
            trajectory_hash: rec[14].to_string(),
            wall_time: field(&rec, 15, line)?,
        });
    }
    Ok(rows)
}

pub fn write_curves<W: Write>(out: W, curves: &[ProfileCurve]) -> Result<(), BenchError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["method", "tau", "fraction"])?;
    for c in curves {
        for &(tau, frac) in &c.points {
            w.write_record([c.method.clone(), float(tau), float(frac)])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_curves<R: Read>(input: R) -> Result<Vec<ProfileCurve>, BenchError> {
    let mut rd = csv::Reader::from_reader(input);
    let mut curves: Vec<ProfileCurve> = vec![];
    for rec in rd.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let point = (field(&rec, 1, line)?, field(&rec, 2, line)?);
        match curves.last_mut() {
            Some(c) if c.method == rec[0] => c.points.push(point),
            _ => curves.push(ProfileCurve { method: rec[0].to_string(), points: vec![point] }),
        }
    }
    Ok(curves)
}

pub fn write_sweeps<W: Write>(out: W, dists: &[SweepDistribution]) -> Result<(), BenchError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["method", "sweep_length", "fraction"])?;
    for d in dists {
        for (v, frac) in d.ecdf() {
            w.write_record([d.method.clone(), float(v), float(frac)])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Method labels, problem names in order of first appearance, and
/// `costs[method][problem]` under `metric`.
pub fn cost_table(rows: &[BenchRow], metric: Metric) -> Result<(Vec<String>, Vec<String>, Vec<Vec<f64>>), BenchError> {
    let mut methods: Vec<String> = vec![];
    let mut problems: Vec<String> = vec![];
    for r in rows {
        let label = format!("{}/m{}", r.method, r.memory);
        if !methods.contains(&label) {
            methods.push(label);
        }
        if !problems.contains(&r.problem) {
            problems.push(r.problem.clone());
        }
    }
    let mut costs = vec![vec![f64::NAN; problems.len()]; methods.len()];
    for r in rows {
        let i = methods.iter().position(|m| *m == format!("{}/m{}", r.method, r.memory)).unwrap();
        let j = problems.iter().position(|p| *p == r.problem).unwrap();
        if !costs[i][j].is_nan() {
            return Err(BenchError::Config(format!("duplicate run of {} on {}", methods[i], problems[j])));
        }
        costs[i][j] = r.cost(metric);
    }
    for (i, row) in costs.iter().enumerate() {
        if let Some(j) = row.iter().position(|c| c.is_nan()) {
            return Err(BenchError::Config(format!("no run of {} on {}", methods[i], problems[j])));
        }
    }
    Ok((methods, problems, costs))
}
