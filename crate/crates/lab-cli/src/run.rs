//! One function per experiment kind, each producing a [`ReportBundle`].

use std::sync::Arc;

use ball_geometry::{classify_regime, integral_table, norm_h, rescaled_integral, Field, Grid, ProblemParams, StatePair};
use evolution::{default_eta4, evolve, evolve_many, lyapunov_h, EvolveConfig, Trajectory};
use linearized_ops::{eigenfield_f, DualBasis};
use modulation_tracker::{
    fit_rate, modulate, track, ClassifyOptions, ModulationOptions, Track, TrackOptions, TrapTag,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use soliton_family::{frame, kappa_star, norm};
use spectral_core::{build_basis, distinct_levels};

use crate::config::{ExperimentConfig, Kind, PerturbationMode};
use crate::report::{fmt_f64, ReportBundle, Table};
use crate::trap::{run_suite, stable_perturbation, TrapSpec};
use crate::{LabError, Stage};

pub fn rng(cfg: &ExperimentConfig) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(cfg.seed)
}

pub fn make_grid(cfg: &ExperimentConfig) -> Result<Arc<Grid>, LabError> {
    let pp = ProblemParams::new(cfg.problem.dim, cfg.problem.p).map_err(|e| Stage::Grid.err(e))?;
    Grid::new(pp, cfg.grid.radial, cfg.grid.angular).map_err(|e| Stage::Grid.err(e))
}

pub fn evolve_config(cfg: &ExperimentConfig, grid: &Grid) -> EvolveConfig {
    let mut ev = EvolveConfig::for_grid(grid, cfg.evolve.s_max);
    if let Some(ds) = cfg.evolve.ds {
        ev.ds = ds;
    }
    if let Some(t) = cfg.evolve.blowup_threshold {
        ev.blowup_threshold = t;
    }
    ev.record_every = cfg.evolve.record_every;
    ev
}

pub fn modulation_options(cfg: &ExperimentConfig) -> ModulationOptions {
    ModulationOptions {
        band: cfg.modulation.band,
        tol: cfg.modulation.tol,
        small_d: cfg.modulation.small_d,
        ..ModulationOptions::default()
    }
}

pub fn track_options(cfg: &ExperimentConfig) -> TrackOptions {
    TrackOptions {
        modulation: modulation_options(cfg),
        eta: cfg.modulation.eta,
        eps0: cfg.modulation.eps0,
        eta0: cfg.modulation.eta0,
        stride: cfg.modulation.stride,
    }
}

pub fn trap_spec(cfg: &ExperimentConfig, grid: &Grid) -> TrapSpec {
    let d = cfg.d();
    let t = &cfg.trap;
    TrapSpec {
        d_bar: d.clone(),
        eps: cfg.perturbation.amplitude,
        evolve: evolve_config(cfg, grid),
        unstable_s_max: t.unstable_s_max,
        probe_times: t.probe_times.clone(),
        secant_iters: t.secant_iters,
        track: track_options(cfg),
        classify: ClassifyOptions {
            d_bar: d,
            decay_floor: t.decay_floor,
            fit_window: (t.fit_window[0], t.fit_window[1]),
            min_r2: t.min_r2,
            nu_tol: t.nu_tol,
        },
    }
}

/// `kappa*(d, nu)` plus the configured perturbation.
pub fn initial_state(cfg: &ExperimentConfig, grid: &Arc<Grid>) -> Result<StatePair, LabError> {
    let d = cfg.d();
    let k = kappa_star(grid, &d, cfg.soliton.nu).map_err(|e| Stage::Soliton.err(e))?;
    let a = cfg.perturbation.amplitude;
    let mut rng = rng(cfg);
    let dir = match cfg.perturbation.mode {
        PerturbationMode::None => return Ok(k),
        PerturbationMode::Unstable => {
            eigenfield_f(grid, &d, &frame(&d, None), 0).map_err(|e| Stage::Soliton.err(e))?
        }
        PerturbationMode::Stable => stable_perturbation(grid, &d, &mut rng).map_err(|e| Stage::Soliton.err(e))?,
        PerturbationMode::Random => {
            let r = StatePair::new(Field::random(grid, &mut rng, 6, 0.4), Field::random(grid, &mut rng, 6, 0.4));
            let n = norm_h(&r);
            r.scale(1.0 / n)
        }
    };
    Ok(k.axpy(a, &dir))
}

pub fn run(cfg: &ExperimentConfig) -> Result<ReportBundle, LabError> {
    cfg.validate()?;
    match cfg.kind {
        Kind::Spectrum => spectrum(cfg),
        Kind::Modulate => modulate_run(cfg),
        Kind::Evolve => evolve_run(cfg),
        Kind::Trap => trap(cfg),
        Kind::ZeroStability => zero_stability(cfg),
        Kind::Tables => tables(cfg),
    }
}

/// Closed-form targets `gamma_0, gamma_1, gamma_2`.
pub fn spectrum_targets(p: f64) -> [f64; 3] {
    [0.0, -2.0 * (p + 1.0) / (p - 1.0), -2.0 * (3.0 * p + 1.0) / (p - 1.0)]
}

fn spectrum(cfg: &ExperimentConfig) -> Result<ReportBundle, LabError> {
    let grid = make_grid(cfg)?;
    let basis = build_basis(&grid).map_err(|e| Stage::Spectrum.err(e))?;
    let mut b = ReportBundle::new(cfg);
    let mut csv = Vec::new();
    basis.write_eigenvalues_csv(&mut csv).map_err(|e| Stage::Output.err(e))?;
    let text = String::from_utf8(csv).expect("ascii");
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap_or_default().split(',').collect();
    let mut t = Table::new("eigenvalues", &header);
    let mut plot = Table::new("spectrum", &["n", "gamma"]);
    for l in lines {
        let row: Vec<String> = l.split(',').map(str::to_string).collect();
        plot.push(vec![row[0].clone(), row[2].clone()]);
        t.push(row);
    }
    b.tables.push(t);
    b.plots.push(plot);

    let p = cfg.problem.p;
    let levels = distinct_levels(basis.eigenvalues(), 1e-10);
    let targets = spectrum_targets(p);
    let mut rows = Vec::new();
    for (i, target) in targets.iter().enumerate() {
        let (g, m) = levels.get(i).copied().unwrap_or((f64::NAN, 0));
        let rel = (g - target).abs() / target.abs().max(1.0);
        b.passed &= rel <= 1e-8;
        b.lines.push(format!("gamma_{i} = {g:.12} (target {target}, rel. deviation {rel:.2e}, multiplicity {m})"));
        rows.push(json!({ "index": i, "gamma": g, "target": target, "deviation": rel, "multiplicity": m }));
    }
    let mult1 = levels.get(1).map_or(0, |l| l.1);
    b.passed &= mult1 == cfg.problem.dim;
    let rest = levels.iter().skip(3).map(|l| -l.0).fold(f64::INFINITY, f64::min);
    let gap_ok = levels.len() > 2 && rest >= -levels[2].0 - 1e-8;
    b.passed &= gap_ok;
    b.lines.push(format!("min -gamma_n over n >= 3: {rest:.6}"));
    b.summary = json!({
        "count": basis.count(),
        "levels": rows,
        "gamma1_multiplicity": mult1,
        "min_rest": rest,
        "gap_ok": gap_ok,
    });
    Ok(b)
}

fn modulate_run(cfg: &ExperimentConfig) -> Result<ReportBundle, LabError> {
    let grid = make_grid(cfg)?;
    let v = initial_state(cfg, &grid)?;
    let d = cfg.d();
    let res = modulate(&v, &d, cfg.soliton.nu, &modulation_options(cfg)).map_err(|e| Stage::Modulate.err(e))?;
    let mut b = ReportBundle::new(cfg);
    let mut t = Table::new("newton", &["iteration", "max_residual"]);
    for (i, r) in res.history.iter().enumerate() {
        t.push(vec![(i + 1).to_string(), fmt_f64(*r)]);
    }
    b.tables.push(t.clone());
    b.plots.push(t);
    b.lines.push(format!(
        "d = {:?}, nu = {:.6e}, {} iterations, basis {}",
        res.params.d,
        res.params.nu,
        res.newton_iters,
        basis_name(res.basis_used)
    ));
    b.lines.push(format!("||q||_H = {:.3e}, proximity ratio {:.4}", res.proximity.q_norm, res.proximity.ratio()));
    b.lines.extend(res.warnings.iter().map(|w| format!("warning: {w}")));
    b.summary = json!({
        "d": res.params.d,
        "nu": res.params.nu,
        "zeta": res.params.zeta(),
        "band_ratio": res.params.band_ratio(),
        "norm_q": res.proximity.q_norm,
        "residuals": res.residuals,
        "newton_iters": res.newton_iters,
        "basis": basis_name(res.basis_used),
        "proximity": res.proximity,
        "warnings": res.warnings,
    });
    Ok(b)
}

fn basis_name(b: DualBasis) -> &'static str {
    match b {
        DualBasis::W => "W",
        DualBasis::WBar => "WBar",
    }
}

fn trajectory_table(name: &str, traj: &Trajectory) -> Table {
    let mut t = Table::new(name, &["s", "energy", "dissipation", "dissipated", "norm_h"]);
    for s in &traj.samples {
        t.push_f64(&[s.s, s.energy, s.dissipation, s.dissipated, s.norm_h]);
    }
    t
}

fn track_table(name: &str, tr: &Track, dim: usize) -> Table {
    let mut head = vec!["s".to_string(), "nu".into(), "abs_d".into(), "zeta".into()];
    head.extend((1..=dim).map(|i| format!("d{i}")));
    head.extend(["norm_q", "h1", "h2", "energy"].map(String::from));
    let mut t = Table { name: name.into(), header: head, rows: Vec::new() };
    for p in &tr.points {
        let mut row = vec![p.s, p.nu, norm(&p.d), p.zeta];
        row.extend(&p.d);
        row.extend([p.norm_q, p.h1, p.h2, p.energy]);
        t.push_f64(&row);
    }
    t
}

fn evolve_run(cfg: &ExperimentConfig) -> Result<ReportBundle, LabError> {
    let grid = make_grid(cfg)?;
    let w0 = initial_state(cfg, &grid)?;
    let ev = evolve_config(cfg, &grid);
    let traj = evolve(&w0, &ev).map_err(|e| Stage::Evolve.err(e))?;
    let tr = track(&traj, &cfg.d(), cfg.soliton.nu, &track_options(cfg));
    let mut b = ReportBundle::new(cfg);
    let sum = traj.summary();
    let per_unit = sum.energy_identity_defect / sum.s_final.max(1e-300) / sum.energy_initial.abs().max(1.0);
    b.lines.push(format!(
        "{} at s = {}, E: {:.6e} -> {:.6e}, energy identity defect {:.2e} per unit s",
        sum.termination.name(),
        sum.s_final,
        sum.energy_initial,
        sum.energy_final,
        per_unit
    ));
    if let Some((s, why)) = &tr.lost {
        b.lines.push(format!("modulation lost at s = {s}: {why}"));
    }
    if let Some((s, sat)) = tr.exit {
        b.lines.push(format!("left the trapping region at s = {s} ({sat:?})"));
    }
    b.tables.push(trajectory_table("trajectory", &traj));
    b.tables.push(track_table("track", &tr, cfg.problem.dim));
    let mut plot = Table::new("energy", &["s", "energy", "norm_h"]);
    for s in &traj.samples {
        plot.push_f64(&[s.s, s.energy, s.norm_h]);
    }
    b.plots.push(plot);
    b.summary = json!({
        "trajectory": sum,
        "energy_defect_per_unit_s": per_unit,
        "track_points": tr.points.len(),
        "track_exit": tr.exit,
        "track_lost": tr.lost,
    });
    Ok(b)
}

fn trap(cfg: &ExperimentConfig) -> Result<ReportBundle, LabError> {
    let grid = make_grid(cfg)?;
    let spec = trap_spec(cfg, &grid);
    let runs = run_suite(&grid, &spec, &mut rng(cfg))?;
    let mut b = ReportBundle::new(cfg);
    let mut outcomes = Vec::new();
    let mut decay = Table::new("q_decay", &["s", "norm_q", "fit"]);
    for r in &runs {
        b.tables.push(trajectory_table(&format!("{}_trajectory", r.label), &r.trajectory));
        if let Some(tr) = &r.track {
            b.tables.push(track_table(&format!("{}_track", r.label), tr, cfg.problem.dim));
            for p in &tr.points {
                let fit = r.outcome.fit.map_or(f64::NAN, |f| (f.intercept - f.mu * p.s).exp());
                decay.push_f64(&[p.s, p.norm_q, fit]);
            }
        }
        if !r.shots.is_empty() {
            let mut t = Table::new(&format!("{}_shots", r.label), &["probe", "amplitude", "nu"]);
            for s in &r.shots {
                t.push_f64(&[s.probe, s.amplitude, s.nu]);
            }
            b.tables.push(t);
        }
        b.lines.push(format!("{}: {:?} ({})", r.label, r.outcome.tag, r.outcome.note));
        outcomes.push(json!({
            "label": r.label,
            "f0_amplitude": r.amplitude,
            "termination": r.trajectory.termination,
            "outcome": r.outcome,
        }));
    }
    b.plots.push(decay);
    let mut tags: Vec<TrapTag> = runs.iter().map(|r| r.outcome.tag).collect();
    tags.sort_by_key(|t| *t as u8);
    b.passed = tags == [TrapTag::NonGlobal, TrapTag::DecayToZero, TrapTag::ConvergeToSoliton];
    b.summary = json!({ "runs": outcomes });
    Ok(b)
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct ZeroRun {
    pub index: usize,
    pub mu: f64,
    pub r2: f64,
    pub final_norm: f64,
    pub h_monotone: bool,
    /// Largest increase of `h` between consecutive samples after `monotone_from`.
    pub max_h_increase: f64,
}

/// Random states of norm `amplitude` around zero, evolved and fitted.
pub fn zero_runs(cfg: &ExperimentConfig) -> Result<(Vec<ZeroRun>, Vec<Trajectory>), LabError> {
    let grid = make_grid(cfg)?;
    let z = &cfg.zero;
    let mut rng = rng(cfg);
    let inputs: Vec<StatePair> = (0..z.count)
        .map(|_| {
            let r = StatePair::new(Field::random(&grid, &mut rng, 6, 0.4), Field::random(&grid, &mut rng, 6, 0.4));
            let n = norm_h(&r);
            r.scale(z.amplitude / n)
        })
        .collect();
    let mut ev = evolve_config(cfg, &grid);
    ev.s_max = z.s_max;
    let eta4 = default_eta4(&grid);
    let trajs: Vec<Trajectory> = evolve_many(&inputs, &ev)
        .into_iter()
        .collect::<Result<_, _>>()
        .map_err(|e| Stage::ZeroStability.err(e))?;
    let mut runs = Vec::new();
    for (i, t) in trajs.iter().enumerate() {
        let series: Vec<(f64, f64)> = t.samples.iter().map(|s| (s.s, s.norm_h)).collect();
        let fit = fit_rate(&series, (z.fit_window[0], z.fit_window[1])).map_err(|e| Stage::ZeroStability.err(e))?;
        let h: Vec<f64> = t.samples.iter().filter(|s| s.s >= z.monotone_from).map(|s| lyapunov_h(&s.state, eta4)).collect();
        let max_inc = h.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
        runs.push(ZeroRun {
            index: i,
            mu: fit.mu,
            r2: fit.r2,
            final_norm: t.last().norm_h,
            h_monotone: max_inc < 0.0,
            max_h_increase: max_inc,
        });
    }
    Ok((runs, trajs))
}

fn zero_stability(cfg: &ExperimentConfig) -> Result<ReportBundle, LabError> {
    let (runs, trajs) = zero_runs(cfg)?;
    let mut b = ReportBundle::new(cfg);
    let mut t = Table::new("runs", &["index", "mu", "r2", "final_norm", "h_monotone", "max_h_increase"]);
    let mut plot = Table::new("norms", &["run", "s", "norm_h"]);
    for (r, tr) in runs.iter().zip(&trajs) {
        t.push(vec![
            r.index.to_string(),
            fmt_f64(r.mu),
            fmt_f64(r.r2),
            fmt_f64(r.final_norm),
            r.h_monotone.to_string(),
            fmt_f64(r.max_h_increase),
        ]);
        for s in &tr.samples {
            plot.push(vec![r.index.to_string(), fmt_f64(s.s), fmt_f64(s.norm_h)]);
        }
    }
    b.tables.push(t);
    b.plots.push(plot);
    let min_mu = runs.iter().map(|r| r.mu).fold(f64::INFINITY, f64::min);
    let all_mono = runs.iter().all(|r| r.h_monotone);
    b.passed = min_mu > 0.0 && all_mono;
    b.lines.push(format!("{} runs, min rate {min_mu:.4}, h monotone in all: {all_mono}", runs.len()));
    b.summary = json!({ "min_rate": min_mu, "all_h_monotone": all_mono, "runs": runs });
    Ok(b)
}

/// Rescaled values of the one-dimensional integral and their relative changes.
pub fn table_trend(gamma: f64, beta: f64, ds: &[f64]) -> Result<(Vec<(f64, f64, f64)>, Vec<f64>), LabError> {
    let mut rows = Vec::new();
    for &d in ds {
        let i = integral_table(gamma, beta, d).map_err(|e| Stage::Tables.err(e))?;
        let r = rescaled_integral(gamma, beta, d).map_err(|e| Stage::Tables.err(e))?;
        rows.push((d, i, r));
    }
    let changes = rows.windows(2).map(|w| ((w[1].2 - w[0].2) / w[1].2).abs()).collect();
    Ok((rows, changes))
}

fn tables(cfg: &ExperimentConfig) -> Result<ReportBundle, LabError> {
    let tb = &cfg.tables;
    let regime = classify_regime(tb.gamma, tb.beta);
    let (rows, changes) = table_trend(tb.gamma, tb.beta, &tb.d)?;
    let mut b = ReportBundle::new(cfg);
    let mut t = Table::new("integral", &["d", "integral", "rescaled"]);
    for (d, i, r) in &rows {
        t.push_f64(&[*d, *i, *r]);
    }
    b.tables.push(t.clone());
    b.plots.push(t);
    let finite = rows.iter().all(|r| r.2.is_finite() && r.2 > 0.0);
    let narrowing = changes.windows(2).all(|w| w[1] <= w[0]);
    b.passed = finite;
    b.lines.push(format!(
        "(gamma, beta) = ({}, {}): regime {}, relative changes {:?}",
        tb.gamma,
        tb.beta,
        regime.name(),
        changes
    ));
    b.summary = json!({
        "gamma": tb.gamma,
        "beta": tb.beta,
        "regime": regime.name(),
        "rows": rows.iter().map(|(d, i, r)| json!({"d": d, "integral": i, "rescaled": r})).collect::<Vec<_>>(),
        "relative_changes": changes,
        "changes_shrinking": narrowing,
    });
    Ok(b)
}
