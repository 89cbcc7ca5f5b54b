//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! The process exits with status 0 so that a failing criterion is reported
//! without aborting the rest of the workspace tests; set
//! `LMSD_ACCEPTANCE_STRICT=1` to turn any FAIL into a nonzero exit.

use std::panic::{self, AssertUnwindSafe};
use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use lmsd::dense;
use lmsd::engines::{self, Engine, LyapunovHandler};
use lmsd::problems::{self, DiagonalOperator};
use lmsd::{abb_gradient, solve_general, solve_quadratic, AbbVariant, QuadraticProblem, RunReport, SolverConfig, SweepHistory};
use lmsd_bench::{performance_profile, run_matrix, BenchMatrix, Method, MethodSpec, ProblemSpec};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit_s: f64) -> Result<(), String> {
    ensure(elapsed.as_secs_f64() < limit_s, || format!("took {:.2}s, limit {limit_s}s", elapsed.as_secs_f64()))
}

// ---------------------------------------------------------------- fixtures

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn spectrum(n: usize, kappa: f64, r: &mut ChaCha8Rng) -> Vec<f64> {
    (0..n)
        .map(|i| match i {
            0 => 1.0,
            _ if i == n - 1 => kappa,
            _ => (r.gen::<f64>() * kappa.ln()).exp(),
        })
        .collect()
}

fn spd_with_spectrum(eigs: &[f64], r: &mut ChaCha8Rng) -> DMatrix<f64> {
    let n = eigs.len();
    let q = DMatrix::from_fn(n, n, |_, _| r.gen_range(-1.0..1.0)).qr().q();
    let a = &q * DMatrix::from_diagonal(&DVector::from_row_slice(eigs)) * q.transpose();
    (&a + a.transpose()) * 0.5
}

/// `m` gradient steps on `½xᵀAx` with inverse stepsizes drawn inside `[lo, hi]`.
fn quadratic_history(a: &DMatrix<f64>, lo: f64, hi: f64, m: usize, r: &mut ChaCha8Rng) -> SweepHistory {
    let mut x = DVector::from_fn(a.nrows(), |_, _| r.gen_range(-1.0..1.0));
    let mut h = SweepHistory::new(m);
    let mut g = a * &x;
    h.push(g.clone(), 1.0);
    for _ in 0..m {
        let alpha = r.gen_range(lo..hi);
        x -= &g / alpha;
        g = a * &x;
        h.push(g.clone(), alpha);
    }
    h
}

/// `m` gradient steps on `½xᵀAx + ¼Σ c_i x_i⁴`.
fn quartic_history(n: usize, m: usize, r: &mut ChaCha8Rng) -> SweepHistory {
    let a = spd_with_spectrum(&spectrum(n, 20.0, r), r);
    let c: Vec<f64> = (0..n).map(|_| r.gen_range(0.5..3.0)).collect();
    let grad = |x: &DVector<f64>| &a * x + DVector::from_fn(n, |i, _| c[i] * x[i].powi(3));
    let mut x = DVector::from_fn(n, |_, _| r.gen_range(-0.6..0.6));
    let mut h = SweepHistory::new(m);
    let mut g = grad(&x);
    h.push(g.clone(), 1.0);
    for _ in 0..m {
        let alpha = r.gen_range(12.0..40.0);
        x -= &g / alpha;
        g = grad(&x);
        h.push(g.clone(), alpha);
    }
    h
}

/// Unrelated random gradients and stepsizes: `Y` has no symmetric structure.
fn random_history(n: usize, m: usize, r: &mut ChaCha8Rng) -> SweepHistory {
    let mut h = SweepHistory::new(m);
    h.push(DVector::from_fn(n, |_, _| r.gen_range(-1.0..1.0)), 1.0);
    for _ in 0..m {
        h.push(DVector::from_fn(n, |_, _| r.gen_range(-1.0..1.0)), r.gen_range(0.5..5.0));
    }
    h
}

fn diag_problem(d: &[f64], x0: &[f64]) -> QuadraticProblem {
    QuadraticProblem {
        hessian: Arc::new(DiagonalOperator { diag: DVector::from_row_slice(d) }),
        b: DVector::zeros(d.len()),
        x0: DVector::from_row_slice(x0),
        name: "diag".into(),
        spectrum_bounds: None,
    }
}

fn close(got: &[f64], want: &[f64], rel: f64) -> bool {
    let scale = want.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    got.len() == want.len() && got.iter().zip(want).all(|(g, w)| (g - w).abs() <= rel * scale.max(w.abs()))
}

fn cond(m: &DMatrix<f64>) -> f64 {
    let s = m.clone().svd(false, false).singular_values;
    s.max() / s.min()
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut r = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        for &k in &idx[i..=j] {
            r[k] = (i + j) as f64 / 2.0 + 1.0;
        }
        i = j + 1;
    }
    r
}

fn spearman(a: &[f64], b: &[f64]) -> f64 {
    let (ra, rb) = (ranks(a), ranks(b));
    let n = ra.len() as f64;
    let (ma, mb) = (ra.iter().sum::<f64>() / n, rb.iter().sum::<f64>() / n);
    let cov: f64 = ra.iter().zip(&rb).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = ra.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = rb.iter().map(|y| (y - mb).powi(2)).sum();
    cov / (va * vb).sqrt()
}

// ---------------------------------------------------------------- criteria

/// Plain BB iteration on `diag(d)`.
fn bb_reference(d: &[f64], x0: &[f64], beta0: f64, iters: usize, long: bool) -> (Vec<f64>, Vec<DVector<f64>>) {
    let a = DVector::from_row_slice(d);
    let mut x = DVector::from_row_slice(x0);
    let mut g = a.component_mul(&x);
    let mut beta = beta0;
    let (mut steps, mut xs) = (vec![], vec![x.clone()]);
    for _ in 0..iters {
        steps.push(beta);
        let x_new = &x - &g * beta;
        let g_new = a.component_mul(&x_new);
        let (s, y) = (&x_new - &x, &g_new - &g);
        beta = if long { s.dot(&s) / s.dot(&y) } else { s.dot(&y) / y.dot(&y) };
        (x, g) = (x_new, g_new);
        xs.push(x.clone());
    }
    (steps, xs)
}

fn c1_single_memory_reduction() -> Outcome {
    let start = Instant::now();
    let (d, x0) = ([1.0, 10.0], [10.0, 10.0]);
    let mut summary = vec![];
    for (engine, long, name) in [(Engine::RitzCholesky, true, "BB1"), (Engine::HarmonicYCholesky, false, "BB2")] {
        let cfg = SolverConfig { memory: 1, engine, max_iter: 50, monotone_control: false, record_trajectory: true, ..Default::default() };
        let r = solve_quadratic(&diag_problem(&d, &x0), &cfg).map_err(|e| e.to_string())?;
        let t = r.trajectory.as_ref().unwrap();
        let (steps, xs) = bb_reference(&d, &x0, 1.0 / r.gnorm0, t.steps.len(), long);
        // iterates shrink to zero, so they are compared on the trajectory scale
        let scale = xs.iter().map(|x| x.norm()).fold(0.0, f64::max);
        let mut worst: f64 = 0.0;
        for (k, rec) in t.steps.iter().enumerate() {
            let ds = (rec.step - steps[k]).abs() / steps[k];
            let dx = (&t.iterates[k + 1] - &xs[k + 1]).norm() / scale;
            worst = worst.max(ds).max(dx);
        }
        ensure(worst <= 1e-12, || format!("{engine} vs {name}: deviation {worst:e}"))?;
        summary.push(format!("{engine}≡{name} over {} iterations ({worst:.1e})", t.steps.len()));
    }
    within(start.elapsed(), 1.0)?;
    Ok(summary.join(", "))
}

fn c2_spectral_containment() -> Outcome {
    let start = Instant::now();
    let mut r = rng(2024);
    let (mut checked, mut errors) = (0usize, 0usize);
    for sweep in 0..1000 {
        let m = r.gen_range(1..=8);
        let n = r.gen_range(m + 1..=50);
        let kappa = 10f64.powf(r.gen_range(0.5..4.0));
        let eig = spectrum(n, kappa, &mut r);
        let a = spd_with_spectrum(&eig, &mut r);
        let h = quadratic_history(&a, 1.0, kappa, m, &mut r);
        let eps = 1e-8 * kappa;
        for e in Engine::QUADRATIC {
            match e.compute(&h, 1e-8) {
                Ok(st) => {
                    for &b in st.steps() {
                        checked += 1;
                        let l = 1.0 / b;
                        ensure(l >= 1.0 - eps && l <= kappa + eps, || format!("sweep {sweep}, {e}: 1/β = {l} outside [1, {kappa}]"))?;
                    }
                }
                Err(_) => errors += 1,
            }
        }
    }
    within(start.elapsed(), 30.0)?;
    Ok(format!("{checked} inverse stepsizes inside the spectrum ({errors} engine errors)"))
}

fn c3_pencil_equivalence() -> Outcome {
    let mut r = rng(3);
    let mut skipped = 0;
    for seed in 0..200 {
        let m = 1 + seed % 6;
        let a = spd_with_spectrum(&spectrum(20, 30.0, &mut r), &mut r);
        let h = quadratic_history(&a, 1.0, 30.0, m, &mut r);
        let asm = h.assemble();
        // Gram-based engines carry an error of order eps·cond², which exceeds
        // the tolerance beyond cond 1e4.
        if cond(&asm.g) > 1e4 || cond(&asm.y) > 1e4 {
            skipped += 1;
            continue;
        }
        let want = dense::generalized_eig_oracle(&dense::gram2(&asm.s, &asm.y), &dense::gram2(&asm.s, &asm.s)).map_err(|e| e.to_string())?;
        let ft = engines::fletcher_t(&h).map_err(|e| e.to_string())?;
        ensure(ft.dropped == 0, || format!("seed {seed}: Cholesky dropped columns"))?;
        let t = sorted(dense::sym_eig(&dense::sym_from_lower(&ft.t)).map_err(|e| e.to_string())?.0.iter().copied().collect());
        let qr = engines::ritz_qr_matrix(&h, 1e-14).map_err(|e| e.to_string())?;
        let svd = engines::ritz_svd_matrix(&h, 1e-14).map_err(|e| e.to_string())?;
        ensure(qr.dim == m && svd.dim == m, || format!("seed {seed}: truncation occurred"))?;
        for (name, got) in [("T", t), ("B^QR", qr.eigenvalues().map_err(|e| e.to_string())?), ("B^SVD", svd.eigenvalues().map_err(|e| e.to_string())?)] {
            ensure(close(&got, &want, 1e-8), || format!("seed {seed}: eig({name}) = {got:?}, pencil {want:?}"))?;
        }
        let want_h = dense::generalized_eig_oracle(&dense::gram2(&asm.y, &asm.s), &dense::gram2(&asm.y, &asm.y)).map_err(|e| e.to_string())?;
        for e in [Engine::HarmonicFletcher, Engine::HarmonicYCholesky, Engine::HarmonicYQr, Engine::HarmonicYSvd] {
            let got = e.compute(&h, 1e-14).map_err(|err| format!("{e}: {err}"))?;
            ensure(close(got.steps(), &want_h, 1e-8), || format!("seed {seed}: {e} = {:?}, pencil {want_h:?}", got.steps()))?;
        }
    }
    Ok(format!("{} histories: eig(T), eig(B^QR), eig(B^SVD) and 4 harmonic engines match their pencils ({skipped} with cond > 1e4 excluded)", 200 - skipped))
}

fn c4_structure() -> Outcome {
    let mut r = rng(4);
    let (mut worst_t, mut worst_p): (f64, f64) = (0.0, 0.0);
    for seed in 0..50 {
        let m = 2 + seed % 7;
        let a = spd_with_spectrum(&spectrum(30, 50.0, &mut r), &mut r);
        let h = quadratic_history(&a, 1.0, 50.0, m, &mut r);
        let ft = engines::fletcher_t(&h).map_err(|e| e.to_string())?;
        let hp = engines::harmonic_pencil(&h).map_err(|e| e.to_string())?;
        ensure(ft.dropped == 0 && hp.dropped == 0, || format!("seed {seed}: history not full rank"))?;
        worst_t = worst_t.max(dense::off_band_norm(&ft.t, 1) / ft.t.norm());
        worst_p = worst_p.max(dense::off_band_norm(&hp.p, 2) / hp.p.norm());
    }
    ensure(worst_t <= 1e-8 && worst_p <= 1e-8, || format!("off-band ratios T {worst_t:e}, P {worst_p:e}"))?;
    Ok(format!("off-tridiagonal(T) ≤ {worst_t:.1e}·‖T‖, off-pentadiagonal(P) ≤ {worst_p:.1e}·‖P‖"))
}

fn c5_lyapunov() -> Outcome {
    let mut r = rng(5);
    let (mut spd_cases, mut worst): (usize, f64) = (0, 0.0);
    for pair in 0..1000 {
        let m = 1 + pair % 6;
        // half unstructured pairs, half from a nonquadratic objective
        let h = if pair % 2 == 0 { random_history(12, m, &mut r) } else { quartic_history(12, m, &mut r) };
        let asm = h.assemble();
        let sts = asm.s.transpose() * &asm.s;
        let sty = asm.s.transpose() * &asm.y;
        let f = &sty + sty.transpose();
        let sys = engines::lyapunov_system(&h, LyapunovHandler::CholeskyG, 1e-24).map_err(|e| format!("pair {pair}: {e}"))?;
        ensure(sys.columns.len() == m, || format!("pair {pair}: columns dropped"))?;
        let b = sys.full();
        ensure((&b - b.transpose()).norm() <= 1e-14 * b.norm(), || format!("pair {pair}: B not symmetric"))?;
        let res = (&sts * &b + &b * &sts - &f).norm() / sty.norm();
        worst = worst.max(res);
        ensure(res <= 1e-10, || format!("pair {pair}: residual {res:e}"))?;
        let sym = &f * 0.5;
        if dense::cholesky(&sym).is_ok() {
            spd_cases += 1;
            let bounds = dense::generalized_eig_oracle(&sym, &sts).map_err(|e| e.to_string())?;
            let (lo, hi) = (bounds[0], bounds[bounds.len() - 1]);
            for l in sys.eigenvalues().map_err(|e| e.to_string())? {
                ensure(l >= lo - 1e-8 * hi.abs() && l <= hi + 1e-8 * hi.abs(), || format!("pair {pair}: {l} outside [{lo}, {hi}]"))?;
            }
        }
    }
    Ok(format!("1000 pairs, residual ≤ {worst:.1e}·‖SᵀY‖, bounds checked on {spd_cases} SPD cases"))
}

fn c6_symmetrization() -> Outcome {
    let mut r = rng(6);
    let mut worst: f64 = 0.0;
    for run in 0..200 {
        let h = quartic_history(10, 3, &mut r);
        for (name, p) in [("Fletcher", engines::fletcher_perturbation(&h)), ("Schnabel", engines::schnabel_perturbation(&h))] {
            let p = p.map_err(|e| format!("{name}: {e}"))?;
            let yt = &p.y + &p.delta_y;
            let yts = yt.transpose() * &p.s;
            let asym = (&yts - yts.transpose()).norm() / yts.norm().max(1.0);
            worst = worst.max(asym);
            ensure(asym <= 1e-10, || format!("run {run}, {name}: asymmetry {asym:e}"))?;
            if let Some(bound) = p.report.pert_norm_bound {
                let dy = dense::spectral_norm(&p.delta_y).map_err(|e| e.to_string())?;
                ensure(dy <= bound + 1e-10 * bound.max(1.0), || format!("run {run}, {name}: ‖ΔY‖ = {dy:e} > bound {bound:e}"))?;
            }
        }
    }
    Ok(format!("200 runs, ‖ỸᵀS − SᵀỸ‖ ≤ {worst:.1e}·max(1, ‖ỸᵀS‖), perturbation bound respected"))
}

fn fig3_rows(memory: usize, tags: &[&str]) -> Result<Vec<lmsd_bench::BenchRow>, String> {
    let methods = tags.iter().map(|t| MethodSpec::new(t.parse::<Method>().unwrap(), memory)).collect();
    let bm = BenchMatrix { methods, problems: ProblemSpec::geometric_family(), config: SolverConfig::default(), seed: 0 };
    run_matrix(&bm).map_err(|e| e.to_string())
}

fn c7_geometric_family() -> Outcome {
    let start = Instant::now();
    let tags = ["lmsd-g", "lmsd-g-qr", "lmsd-g-svd"];
    let rows = fig3_rows(5, &tags)?;
    let kappa: Vec<f64> = ProblemSpec::geometric_family()
        .iter()
        .map(|p| match p {
            ProblemSpec::Geometric { n, omega, .. } => omega.powi(*n as i32 - 1),
            _ => unreachable!(),
        })
        .collect();
    let mut report = vec![];
    let mut failures = vec![];
    for (i, tag) in tags.iter().enumerate() {
        let block = &rows[15 * i..15 * (i + 1)];
        let unsolved: Vec<&str> = block.iter().filter(|r| !r.solved() || r.nge > 50_000).map(|r| r.problem.as_str()).collect();
        if !unsolved.is_empty() {
            failures.push(format!("{tag} unsolved within 5e4 NGE: {unsolved:?}"));
        }
        let nge: Vec<f64> = block.iter().map(|r| r.nge as f64).collect();
        let rho = spearman(&kappa, &nge);
        if !(rho >= 0.7) {
            failures.push(format!("{tag}: Spearman ρ = {rho:.3} < 0.7"));
        }
        report.push(format!("{tag}: max NGE {}, ρ = {rho:.3}", block.iter().map(|r| r.nge).max().unwrap()));
    }
    within(start.elapsed(), 120.0)?;
    if failures.is_empty() {
        Ok(report.join("; "))
    } else {
        Err(format!("{} [{}]", failures.join("; "), report.join("; ")))
    }
}

fn c8_memory_trend() -> Outcome {
    let median = |m: usize| -> Result<f64, String> {
        let mut v: Vec<f64> = fig3_rows(m, &["lmsd-g"])?.iter().map(|r| if r.solved() { r.nge as f64 } else { f64::INFINITY }).collect();
        v.sort_by(f64::total_cmp);
        Ok(v[v.len() / 2])
    };
    let (m3, m10) = (median(3)?, median(10)?);
    ensure(m10 <= m3, || format!("median NGE m=10 {m10} > m=3 {m3}"))?;
    Ok(format!("median NGE m=3 {m3}, m=10 {m10}"))
}

fn armijo_violations(r: &RunReport, c_ls: f64) -> usize {
    r.trajectory
        .as_ref()
        .map_or(usize::MAX, |t| t.steps.iter().filter(|s| s.accepted && !(s.f_value <= s.f_ref - c_ls * s.step * s.gnorm_sq)).count())
}

fn c9_general_convergence() -> Outcome {
    let mut lines = vec![];
    for (name, n) in [("extended-rosenbrock", 100), ("broyden-tridiagonal", 500)] {
        let p = problems::builtin_nonlinear(name, n).map_err(|e| e.to_string())?;
        let cfg = SolverConfig { tol: 1e-6, max_iter: 100_000, record_trajectory: true, ..Default::default() };
        let mut runs: Vec<(String, RunReport)> = vec![];
        for e in Engine::GENERAL {
            runs.push((e.tag().into(), solve_general(&p, &SolverConfig { engine: e, ..cfg.clone() }).map_err(|err| err.to_string())?));
        }
        for v in [AbbVariant::Min, AbbVariant::Bon] {
            runs.push((v.tag().into(), abb_gradient(&p, v, &cfg).map_err(|err| err.to_string())?));
        }
        for (tag, r) in &runs {
            ensure(r.converged() && r.final_gnorm <= 1e-6 * r.gnorm0, || format!("{tag} on {name}: {} after {} iterations", r.status, r.iterations))?;
            let bad = armijo_violations(r, cfg.c_ls);
            ensure(bad == 0, || format!("{tag} on {name}: {bad} steps violate the Armijo test"))?;
        }
        let worst = runs.iter().max_by_key(|(_, r)| r.iterations).unwrap();
        lines.push(format!("{name}-{n}: 9 methods, most iterations {} ({})", worst.1.iterations, worst.0));
    }
    Ok(lines.join("; "))
}

fn c10_quadratic_consistency() -> Outcome {
    let p = diag_problem(&[1.0, 2.0, 5.0], &[1.0, -1.0, 1.0]);
    let stacks = |engine| -> Result<Vec<Vec<f64>>, String> {
        let cfg = SolverConfig { engine, memory: 2, tol: 1e-12, record_trajectory: true, ..Default::default() };
        Ok(solve_quadratic(&p, &cfg).map_err(|e| e.to_string())?.trajectory.unwrap().stacks)
    };
    let mut compared = 0;
    for (general, quad) in [
        (Engine::FletcherTridiag, Engine::RitzCholesky),
        (Engine::SchnabelPert, Engine::RitzCholesky),
        (Engine::CurtisGuo, Engine::HarmonicFletcher),
    ] {
        let (a, b) = (stacks(general)?, stacks(quad)?);
        ensure(a.len() == b.len(), || format!("{general}: {} stacks, {quad}: {}", a.len(), b.len()))?;
        for (k, (sa, sb)) in a.iter().zip(&b).enumerate() {
            ensure(close(sa, sb, 1e-8), || format!("{general} vs {quad}, stack {k}: {sa:?} vs {sb:?}"))?;
            compared += 1;
        }
    }
    Ok(format!("{compared} stacks identical to 1e-8"))
}

fn c11_profiles() -> Outcome {
    let names: Vec<String> = (0..5).map(|i| format!("m{i}")).collect();
    let inf = f64::INFINITY;
    let hand = performance_profile(&names[..2], &[vec![2.0, 3.0, 5.0], vec![4.0, 3.0, inf]]).map_err(|e| e.to_string())?;
    let third = 1.0 / 3.0;
    ensure(hand.curves[0].points == vec![(1.0, 1.0), (2.0, 1.0)], || format!("hand table, method 1: {:?}", hand.curves[0].points))?;
    ensure(hand.curves[1].points == vec![(1.0, third), (2.0, 2.0 * third)], || format!("hand table, method 2: {:?}", hand.curves[1].points))?;

    let mut r = rng(11);
    let costs: Vec<Vec<f64>> = (0..5)
        .map(|_| (0..20).map(|_| if r.gen_range(0..8) == 0 { inf } else { r.gen_range(1..40) as f64 }).collect())
        .collect();
    let p = performance_profile(&names, &costs).map_err(|e| e.to_string())?;
    let kept: Vec<(usize, f64)> =
        (0..20).map(|j| (j, costs.iter().map(|c| c[j]).fold(inf, f64::min))).filter(|(_, best)| best.is_finite()).collect();
    let mut checked = 0;
    for (i, curve) in p.curves.iter().enumerate() {
        for &(tau, frac) in &curve.points {
            let count = kept.iter().filter(|&&(j, best)| costs[i][j].is_finite() && costs[i][j] / best <= tau).count();
            let want = count as f64 / kept.len() as f64;
            ensure(frac == want, || format!("method {i} at τ = {tau}: {frac} vs {want}"))?;
            checked += 1;
        }
    }
    Ok(format!("hand-built 2×3 exact; random 5×20 matches brute force at {checked} breakpoints"))
}

fn c12_determinism() -> Outcome {
    let dir = std::env::temp_dir().join(format!("lmsd-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let mut outputs = vec![];
    for run in 0..2 {
        let out = dir.join(format!("run{run}.csv"));
        let status = Command::new(env!("CARGO_BIN_EXE_lmsd"))
            .args(["bench", "--engine", "lmsd-g,lmsd-hg,lmsd-lya,abb-min", "--memory", "3,5", "--problem", "fig3,random,trigonometric", "--n", "80"])
            .args(["--seed", "12", "--out"])
            .arg(&out)
            .status()
            .map_err(|e| e.to_string())?;
        ensure(matches!(status.code(), Some(0) | Some(2)), || format!("bench exited with {status}"))?;
        let text = std::fs::read_to_string(&out).map_err(|e| e.to_string())?;
        let stripped: Vec<String> = text.lines().map(|l| l.rsplit_once(',').map_or(l, |(head, _)| head).to_string()).collect();
        outputs.push(stripped);
    }
    let _ = std::fs::remove_dir_all(&dir);
    ensure(outputs[0] == outputs[1], || "CSV differs between reruns".into())?;
    Ok(format!("{} rows byte-identical apart from wall_time", outputs[0].len() - 1))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("m=1 reduction to BB1/BB2", c1_single_memory_reduction),
        ("spectral containment", c2_spectral_containment),
        ("pencil-oracle equivalence", c3_pencil_equivalence),
        ("tridiagonal T, pentadiagonal P", c4_structure),
        ("Lyapunov correctness", c5_lyapunov),
        ("symmetrizing perturbations", c6_symmetrization),
        ("geometric-spectrum family", c7_geometric_family),
        ("memory monotonicity trend", c8_memory_trend),
        ("general-case convergence", c9_general_convergence),
        ("quadratic consistency of general engines", c10_quadratic_consistency),
        ("performance profile correctness", c11_profiles),
        ("bench determinism", c12_determinism),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} [{secs:.2}s]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail} [{secs:.2}s]", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 && std::env::var("LMSD_ACCEPTANCE_STRICT").is_ok_and(|v| v == "1") {
        std::process::exit(1);
    }
}
