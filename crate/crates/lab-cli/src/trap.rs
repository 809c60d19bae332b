//! The three-run trapping experiment around `kappa(d̄)`.

use std::sync::Arc;

use ball_geometry::{norm_h, Field, Grid, StatePair};
use evolution::{evolve, EvolveConfig, Trajectory};
use linearized_ops::{eigenfield_f, project};
use modulation_tracker::{
    classify, modulate, track, ClassifyOptions, ModulationOptions, Track, TrackOptions, TrapOutcome,
};
use rand::Rng;
use serde::Serialize;
use soliton_family::{frame, kappa_star};

#[derive(Debug, Clone)]
pub struct TrapSpec {
    pub d_bar: Vec<f64>,
    pub eps: f64,
    pub evolve: EvolveConfig,
    /// Horizon for the two runs started along `±F0`.
    pub unstable_s_max: f64,
    /// Horizon of the shot run; the shooting probes stop before it.
    pub probe_times: Vec<f64>,
    pub secant_iters: usize,
    pub track: TrackOptions,
    pub classify: ClassifyOptions,
}

#[derive(Debug, Clone, Serialize)]
pub struct ShotRecord {
    pub probe: f64,
    pub amplitude: f64,
    pub nu: f64,
}

#[derive(Debug, Clone)]
pub struct TrapRun {
    pub label: &'static str,
    pub trajectory: Trajectory,
    pub track: Option<Track>,
    pub outcome: TrapOutcome,
    pub shots: Vec<ShotRecord>,
    /// Coefficient of `F0(d̄)` added to the initial data.
    pub amplitude: f64,
}

/// A unit-norm perturbation in the stable subspace at `d`, from a random band-limited field.
pub fn stable_perturbation<R: Rng + ?Sized>(
    grid: &Arc<Grid>,
    d: &[f64],
    rng: &mut R,
) -> Result<StatePair, linearized_ops::LinearError> {
    let raw = StatePair::new(Field::random(grid, rng, 6, 0.4), Field::random(grid, rng, 6, 0.4));
    let q = project(grid, d, &raw)?.q_minus;
    let n = norm_h(&q);
    Ok(q.scale(1.0 / n))
}

fn nu_at(traj: &Trajectory, d: &[f64], s: f64) -> Option<f64> {
    let smp = traj.samples.iter().min_by(|a, b| (a.s - s).abs().total_cmp(&(b.s - s).abs()))?;
    if (smp.s - s).abs() > 1e-9 + traj.config.ds * traj.config.record_every as f64 {
        return None;
    }
    modulate(&smp.state, d, 0.0, &ModulationOptions::default()).ok().map(|r| r.params.nu)
}

/// Tune the `F0` coefficient so that `nu` stays near zero up to the last probe time.
///
/// At each probe `s_p`, `a -> nu(s_p; a)` is close to linear with slope growing like
/// `e^{s_p}`; the slope from the previous probe seeds a Newton step, secant steps follow,
/// and the best amplitude seen is carried to the next probe.
pub fn shoot(base: &StatePair, f0: &StatePair, spec: &TrapSpec) -> (f64, Vec<ShotRecord>) {
    let mut shots = Vec::new();
    let mut best = 0.0;
    let mut slope: Option<(f64, f64)> = None;
    for &sp in &spec.probe_times {
        let cfg = EvolveConfig { s_max: sp, ..spec.evolve.clone() };
        let mut eval = |a: f64| -> f64 {
            let traj = evolve(&base.axpy(a, f0), &cfg).expect("validated config");
            // once the run has left the soliton neighbourhood only the sign is kept
            let nu = match nu_at(&traj, &spec.d_bar, sp) {
                Some(nu) => nu,
                None => {
                    let last = traj.last();
                    if last.energy < 0.0 || last.state.r1.values().mean() > 0.0 {
                        1.0
                    } else {
                        -1.0
                    }
                }
            };
            shots.push(ShotRecord { probe: sp, amplitude: a, nu });
            nu
        };
        let mut x0 = best;
        let mut g0 = eval(x0);
        let mut best_g = g0;
        let mut x1 = match slope {
            Some((k, s_prev)) => x0 - g0 / (k * (sp - s_prev).exp()),
            None => x0 + spec.eps * spec.eps,
        };
        for _ in 0..=spec.secant_iters {
            let g1 = eval(x1);
            if g1.abs() < best_g.abs() {
                best = x1;
                best_g = g1;
            }
            if g1.abs() < 1e-13 || g1 == g0 || g1.abs() >= 1e-2 {
                break;
            }
            let k = (g1 - g0) / (x1 - x0);
            slope = Some((k, sp));
            let x2 = x1 - g1 / k;
            x0 = x1;
            g0 = g1;
            x1 = x2;
        }
    }
    (best, shots)
}

/// Run the three-case suite: `+eps F0`, `-eps F0`, and `eps q_perp` plus a tuned `F0` component.
pub fn run_suite<R: Rng + ?Sized>(
    grid: &Arc<Grid>,
    spec: &TrapSpec,
    rng: &mut R,
) -> Result<Vec<TrapRun>, crate::LabError> {
    use crate::Stage;
    let d = &spec.d_bar;
    let fr = frame(d, None);
    let k = kappa_star(grid, d, 0.0).map_err(|e| Stage::Trap.err(e))?;
    let f0 = eigenfield_f(grid, d, &fr, 0).map_err(|e| Stage::Trap.err(e))?;
    let qp = stable_perturbation(grid, d, rng).map_err(|e| Stage::Trap.err(e))?;
    let mut runs = Vec::new();
    for (label, a) in [("unstable-plus", spec.eps), ("unstable-minus", -spec.eps)] {
        let cfg = EvolveConfig { s_max: spec.unstable_s_max, ..spec.evolve.clone() };
        let traj = evolve(&k.axpy(a, &f0), &cfg).map_err(|e| Stage::Evolve.err(e))?;
        let outcome = classify(&traj, None, &spec.classify);
        runs.push(TrapRun { label, trajectory: traj, track: None, outcome, shots: Vec::new(), amplitude: a });
    }
    let base = k.axpy(spec.eps, &qp);
    let (a, shots) = shoot(&base, &f0, spec);
    let traj = evolve(&base.axpy(a, &f0), &spec.evolve).map_err(|e| Stage::Evolve.err(e))?;
    let tr = track(&traj, d, 0.0, &spec.track);
    let outcome = classify(&traj, Some(&tr), &spec.classify);
    runs.push(TrapRun { label: "stable-shot", trajectory: traj, track: Some(tr), outcome, shots, amplitude: a });
    Ok(runs)
}
