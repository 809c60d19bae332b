use std::io::Write;

use evolution::{energy, Termination, Trajectory};
use linearized_ops::DualBasis;
use serde::Serialize;
use soliton_family::{norm, Branch};

use crate::{fit_rate, lyapunov_pair, modulate, ModulationError, ModulationOptions, RateFit};

#[derive(Debug, Clone)]
pub struct TrackOptions {
    pub modulation: ModulationOptions,
    /// Exit threshold for `|nu|/(1-|d|)`.
    pub eta: f64,
    /// Exit threshold for `||q||_H`.
    pub eps0: f64,
    /// Weight of the cross term in `h2`.
    pub eta0: f64,
    /// Modulate every `stride`-th recorded sample.
    pub stride: usize,
}

impl Default for TrackOptions {
    fn default() -> Self {
        Self {
            modulation: ModulationOptions::default(),
            eta: 0.1,
            eps0: 0.1,
            eta0: 0.05,
            stride: 1,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TrackPoint {
    pub s: f64,
    pub d: Vec<f64>,
    pub nu: f64,
    pub zeta: f64,
    pub norm_q: f64,
    pub max_residual: f64,
    pub h1: f64,
    pub h2: f64,
    pub energy: f64,
    pub wbar: bool,
}

impl TrackPoint {
    pub fn sigma(&self) -> f64 {
        self.nu / (1.0 - norm(&self.d))
    }
}

/// Which exit inequality saturated first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Saturation {
    Nu,
    Q,
}

#[derive(Debug, Clone, Serialize)]
pub struct Track {
    pub points: Vec<TrackPoint>,
    /// First time `|nu|/(1-|d|) > eta` or `||q|| > eps0`.
    pub exit: Option<(f64, Saturation)>,
    /// Time and reason if modulation was lost.
    pub lost: Option<(f64, String)>,
}

impl Track {
    pub fn norm_q_series(&self) -> Vec<(f64, f64)> {
        self.points.iter().map(|p| (p.s, p.norm_q)).collect()
    }

    /// Columns `s,nu,abs_d,zeta,d1..dN,norm_q,h1,h2,energy`.
    pub fn write_csv<W: Write>(&self, out: W, dim: usize) -> Result<(), ModulationError> {
        let mut w = csv::Writer::from_writer(out);
        let mut head: Vec<String> = ["s", "nu", "abs_d", "zeta"].iter().map(|s| s.to_string()).collect();
        head.extend((1..=dim).map(|i| format!("d{i}")));
        head.extend(["norm_q", "h1", "h2", "energy"].iter().map(|s| s.to_string()));
        w.write_record(&head)?;
        for p in &self.points {
            let mut row = vec![p.s, p.nu, norm(&p.d), p.zeta];
            row.extend(&p.d);
            row.extend([p.norm_q, p.h1, p.h2, p.energy]);
            w.write_record(row.iter().map(|x| format!("{x:.12e}")))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Re-modulate the recorded samples of `traj`, warm-starting from the previous parameters.
pub fn track(traj: &Trajectory, d0: &[f64], nu0: f64, opts: &TrackOptions) -> Track {
    let mut d = d0.to_vec();
    let mut nu = nu0;
    let mut branch: Option<Branch> = opts.modulation.branch;
    let mut points = Vec::new();
    let mut exit = None;
    let mut lost = None;
    for smp in traj.samples.iter().step_by(opts.stride.max(1)) {
        let mo = ModulationOptions {
            branch,
            ..opts.modulation.clone()
        };
        let res = match modulate(&smp.state, &d, nu, &mo) {
            Ok(r) => r,
            Err(e) => {
                lost = Some((smp.s, e.to_string()));
                break;
            }
        };
        d = res.params.d.clone();
        nu = res.params.nu;
        branch = Some(res.branch);
        let (h1, h2) = lyapunov_pair(&res.q, &d, nu, opts.eta0);
        let pt = TrackPoint {
            s: smp.s,
            zeta: res.params.zeta(),
            norm_q: res.proximity.q_norm,
            max_residual: res.residuals.iter().cloned().fold(0.0, f64::max),
            h1,
            h2,
            energy: energy(&smp.state),
            wbar: res.basis_used == DualBasis::WBar,
            d: d.clone(),
            nu,
        };
        if exit.is_none() {
            if pt.sigma().abs() > opts.eta {
                exit = Some((pt.s, Saturation::Nu));
            } else if pt.norm_q > opts.eps0 {
                exit = Some((pt.s, Saturation::Q));
            }
        }
        points.push(pt);
    }
    Track { points, exit, lost }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TrapTag {
    NonGlobal,
    DecayToZero,
    ConvergeToSoliton,
    Unresolved,
}

#[derive(Debug, Clone)]
pub struct ClassifyOptions {
    /// Reference soliton parameter for the proximity diagnostic.
    pub d_bar: Vec<f64>,
    /// `||(w, w_s)||_H` below which a decaying run counts as having reached zero.
    pub decay_floor: f64,
    /// Window for the `||q||` rate fit.
    pub fit_window: (f64, f64),
    pub min_r2: f64,
    /// Bound on the final `|nu|/(1-|d|)`.
    pub nu_tol: f64,
}

impl ClassifyOptions {
    pub fn new(d_bar: Vec<f64>) -> Self {
        Self {
            d_bar,
            decay_floor: 1e-6,
            fit_window: (5.0, 15.0),
            min_r2: 0.99,
            nu_tol: 1e-3,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TrapOutcome {
    pub tag: TrapTag,
    pub d_infinity: Option<Vec<f64>>,
    pub fit: Option<RateFit>,
    pub final_sigma: Option<f64>,
    pub final_energy: f64,
    pub min_energy: f64,
    /// `|argtanh|d̄| - argtanh|d_inf|| + |d̄ - d_inf|/sqrt(1-|d̄|)`.
    pub proximity: Option<f64>,
    pub note: String,
}

/// Sort a run into the trichotomy.
pub fn classify(traj: &Trajectory, tracked: Option<&Track>, opts: &ClassifyOptions) -> TrapOutcome {
    let last = traj.last();
    let min_energy = traj.samples.iter().map(|s| s.energy).fold(f64::INFINITY, f64::min);
    let mut out = TrapOutcome {
        tag: TrapTag::Unresolved,
        d_infinity: None,
        fit: None,
        final_sigma: None,
        final_energy: last.energy,
        min_energy,
        proximity: None,
        note: String::new(),
    };
    if let Termination::BlowUpDetected { s, negative_energy } = traj.termination {
        out.tag = TrapTag::NonGlobal;
        out.note = format!("blow-up detected at s = {s} (negative energy: {negative_energy})");
        return out;
    }
    if let Termination::NumericalFailure { s } = traj.termination {
        out.note = format!("numerical failure at s = {s}");
        return out;
    }
    if last.norm_h < opts.decay_floor {
        let series: Vec<(f64, f64)> = traj.samples.iter().map(|s| (s.s, s.norm_h)).collect();
        let half = last.s / 2.0;
        if let Ok(f) = fit_rate(&series, (half, last.s)) {
            out.fit = Some(f);
            if f.mu > 0.0 {
                out.tag = TrapTag::DecayToZero;
                out.note = format!("||w||_H = {:.3e} at s = {}", last.norm_h, last.s);
                return out;
            }
        }
    }
    let Some(tr) = tracked else {
        out.note = "no tracking data".into();
        return out;
    };
    let Some(end) = tr.points.last() else {
        out.note = "empty track".into();
        return out;
    };
    out.final_sigma = Some(end.sigma());
    match fit_rate(&tr.norm_q_series(), opts.fit_window) {
        Ok(f) => out.fit = Some(f),
        Err(e) => {
            out.note = e.to_string();
            return out;
        }
    }
    let f = out.fit.unwrap();
    let rbar = norm(&opts.d_bar);
    let dinf = end.d.clone();
    let dd: Vec<f64> = opts.d_bar.iter().zip(&dinf).map(|(a, b)| a - b).collect();
    out.proximity = Some((rbar.atanh() - norm(&dinf).atanh()).abs() + norm(&dd) / (1.0 - rbar).sqrt());
    out.d_infinity = Some(dinf);
    let converged = tr.lost.is_none()
        && f.mu > 0.0
        && f.r2 >= opts.min_r2
        && end.sigma().abs() <= opts.nu_tol;
    if converged {
        out.tag = TrapTag::ConvergeToSoliton;
        out.note = format!("||q|| rate {:.4} (R^2 = {:.5})", f.mu, f.r2);
    } else {
        out.note = format!(
            "no pattern: mu = {:.3e}, R^2 = {:.4}, sigma = {:.3e}, lost = {:?}",
            f.mu,
            f.r2,
            end.sigma(),
            tr.lost
        );
    }
    out
}
