//! Galerkin–RK4 integration of
//! `w1' = w2`, `w2' = L w1 - c0 w1 + |w1|^{p-1} w1 - b w2 - 2 y . grad w2`,
//! with the energy `E`, its dissipation and the Lyapunov functional `h`.

use std::io::Write;
use std::sync::Arc;

use ball_geometry::{norm_h, norm_singular_l2, Field, Grid, StatePair};
use nalgebra::DVector;
use rayon::prelude::*;
use serde::Serialize;

#[derive(Debug, thiserror::Error)]
pub enum EvolutionError {
    #[error("config: {0}")]
    Config(String),
    #[error("numerical failure at s = {0}")]
    NumericalFailure(f64),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

/// `|w|^{p-1} w`.
fn power_term(p: f64, x: f64) -> f64 {
    if p == 3.0 {
        x * x * x
    } else {
        x.abs().powf(p - 1.0) * x
    }
}

/// Right-hand side of the first-order system.
pub fn rhs(w: &StatePair) -> StatePair {
    let grid = w.grid();
    let (d1, d2) = rhs_coeffs(grid, w.r1.coeffs(), w.r2.coeffs(), w.r1.values());
    StatePair::new(Field::from_coeffs(grid, d1), Field::from_coeffs(grid, d2))
}

fn rhs_coeffs(
    grid: &Grid,
    c1: &DVector<f64>,
    c2: &DVector<f64>,
    v1: &DVector<f64>,
) -> (DVector<f64>, DVector<f64>) {
    let pr = grid.params();
    let p = pr.p();
    let shift = grid.mode_stiffness().add_scalar(pr.mass_coeff());
    let nl = v1.map(|x| power_term(p, x));
    let d2 = -shift.component_mul(c1) + &grid.main().wphi * nl - c2 * pr.damping()
        - grid.euler_matrix() * c2 * 2.0;
    (c2.clone(), d2)
}

/// `E(w) = ∫ (w2^2/2 + |grad w1|^2/2 - (y.grad w1)^2/2 + (p+1)/(p-1)^2 w1^2 - |w1|^{p+1}/(p+1)) rho`.
pub fn energy(w: &StatePair) -> f64 {
    let grid = w.grid();
    let pr = grid.params();
    let p = pr.p();
    let c1 = w.r1.coeffs();
    let quad = c1.component_mul(c1).dot(&grid.mode_stiffness().add_scalar(pr.mass_coeff()));
    let pot = w.r1.values().map(|x| x.abs().powf(p + 1.0)).dot(grid.weights()) / (p + 1.0);
    0.5 * w.r2.coeffs().norm_squared() + 0.5 * quad - pot
}

/// `2 alpha ∫ w2^2 rho / (1 - |y|^2)`.
pub fn dissipation_rate(w: &StatePair) -> f64 {
    2.0 * w.grid().params().alpha() * norm_singular_l2(&w.r2).powi(2)
}

/// `h = E(w) + eta4 ∫ w1 w2 rho`.
pub fn lyapunov_h(w: &StatePair, eta4: f64) -> f64 {
    energy(w) + eta4 * w.r1.coeffs().dot(w.r2.coeffs())
}

/// Default `eta4 = alpha / 10`.
pub fn default_eta4(grid: &Grid) -> f64 {
    0.1 * grid.params().alpha()
}

/// Largest step the explicit scheme tolerates: the linear part has real
/// eigenvalues down to `-(K + b)`, and RK4 is stable to `-2.78`.
pub fn stability_bound(grid: &Grid) -> f64 {
    2.5 / (grid.modes().max_degree() as f64 + grid.params().damping())
}

/// Conservative default step `0.5 / max |gamma_n|`, capped at `1e-3`.
pub fn default_step(grid: &Grid) -> f64 {
    let k = grid.modes().max_degree();
    (0.5 / (-grid.params().eigenvalue(k))).min(1e-3)
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct EvolveConfig {
    pub ds: f64,
    pub s_max: f64,
    /// Cap on `||(w, w_s)||_H`; exceeding it flags blow-up.
    pub blowup_threshold: f64,
    /// Record every `record_every` steps.
    pub record_every: usize,
}

impl EvolveConfig {
    pub fn for_grid(grid: &Grid, s_max: f64) -> Self {
        Self {
            ds: default_step(grid),
            s_max,
            blowup_threshold: 1e3 * grid.params().kappa0(),
            record_every: 10,
        }
    }

    pub fn validate(&self, grid: &Grid) -> Result<(), EvolutionError> {
        if !(self.ds > 0.0) || !(self.s_max > 0.0) || !(self.blowup_threshold > 0.0) || self.record_every == 0 {
            return Err(EvolutionError::Config(format!("invalid evolve config {self:?}")));
        }
        let bound = stability_bound(grid);
        if self.ds > bound {
            return Err(EvolutionError::Config(format!(
                "ds = {} exceeds the stability bound {bound:.3e}",
                self.ds
            )));
        }
        Ok(())
    }
}

/// One classical RK4 step.
pub fn step(w: &StatePair, ds: f64) -> Result<StatePair, EvolutionError> {
    let (next, _) = step_with_dissipation(w, ds);
    if next.is_finite() {
        Ok(next)
    } else {
        Err(EvolutionError::NumericalFailure(f64::NAN))
    }
}

/// RK4 step that also integrates the dissipation rate over the step.
fn step_with_dissipation(w: &StatePair, ds: f64) -> (StatePair, f64) {
    let grid = w.grid().clone();
    let two_alpha = 2.0 * grid.params().alpha();
    let sing = &grid.singular().phi;
    let sw = &grid.singular().weights;
    let diss = |c2: &DVector<f64>| -> f64 {
        let v = sing.tr_mul(c2);
        two_alpha * v.component_mul(&v).dot(sw)
    };
    let phi = &grid.main().phi;
    let eval = |c1: &DVector<f64>, c2: &DVector<f64>| {
        let v1 = phi.tr_mul(c1);
        let (a, b) = rhs_coeffs(&grid, c1, c2, &v1);
        (a, b, diss(c2))
    };
    let c1 = w.r1.coeffs();
    let c2 = w.r2.coeffs();
    let (k1a, k1b, k1d) = eval(c1, c2);
    let (k2a, k2b, k2d) = eval(&(c1 + &k1a * (ds / 2.0)), &(c2 + &k1b * (ds / 2.0)));
    let (k3a, k3b, k3d) = eval(&(c1 + &k2a * (ds / 2.0)), &(c2 + &k2b * (ds / 2.0)));
    let (k4a, k4b, k4d) = eval(&(c1 + &k3a * ds), &(c2 + &k3b * ds));
    let n1 = c1 + (k1a + (k2a + k3a) * 2.0 + k4a) * (ds / 6.0);
    let n2 = c2 + (k1b + (k2b + k3b) * 2.0 + k4b) * (ds / 6.0);
    let d = (k1d + 2.0 * (k2d + k3d) + k4d) * (ds / 6.0);
    (
        StatePair::new(Field::from_coeffs(&grid, n1), Field::from_coeffs(&grid, n2)),
        d,
    )
}

#[derive(Debug, Clone)]
pub struct Sample {
    pub s: f64,
    pub state: StatePair,
    pub energy: f64,
    /// Instantaneous dissipation rate.
    pub dissipation: f64,
    /// `∫_0^s` of the dissipation rate.
    pub dissipated: f64,
    pub norm_h: f64,
}

impl Sample {
    fn new(s: f64, state: StatePair, dissipated: f64) -> Self {
        Self {
            s,
            energy: energy(&state),
            dissipation: dissipation_rate(&state),
            norm_h: norm_h(&state),
            dissipated,
            state,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "tag")]
pub enum Termination {
    Completed,
    BlowUpDetected { s: f64, negative_energy: bool },
    NumericalFailure { s: f64 },
}

impl Termination {
    pub fn name(&self) -> &'static str {
        match self {
            Termination::Completed => "Completed",
            Termination::BlowUpDetected { .. } => "BlowUpDetected",
            Termination::NumericalFailure { .. } => "NumericalFailure",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub termination: Termination,
    pub config: EvolveConfig,
}

#[derive(Debug, Clone, Serialize)]
pub struct TrajectorySummary {
    pub termination: Termination,
    pub samples: usize,
    pub s_final: f64,
    pub energy_initial: f64,
    pub energy_final: f64,
    pub norm_h_final: f64,
    pub min_energy: f64,
    /// Worst `|E(s) - E(0) + ∫ dissipation|` over the samples.
    pub energy_identity_defect: f64,
}

impl Trajectory {
    pub fn last(&self) -> &Sample {
        self.samples.last().expect("trajectory has at least the initial sample")
    }

    pub fn energy_identity_defect(&self) -> f64 {
        let e0 = self.samples[0].energy;
        self.samples
            .iter()
            .map(|s| (s.energy - e0 + s.dissipated).abs())
            .fold(0.0, f64::max)
    }

    pub fn summary(&self) -> TrajectorySummary {
        let last = self.last();
        TrajectorySummary {
            termination: self.termination,
            samples: self.samples.len(),
            s_final: last.s,
            energy_initial: self.samples[0].energy,
            energy_final: last.energy,
            norm_h_final: last.norm_h,
            min_energy: self.samples.iter().map(|s| s.energy).fold(f64::INFINITY, f64::min),
            energy_identity_defect: self.energy_identity_defect(),
        }
    }

    /// Columns `s,energy,dissipation,dissipated,norm_h`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), EvolutionError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["s", "energy", "dissipation", "dissipated", "norm_h"])?;
        for s in &self.samples {
            w.write_record([s.s, s.energy, s.dissipation, s.dissipated, s.norm_h].map(|x| format!("{x:.12e}")))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Integrate until `s_max`, a blow-up signal (`E < 0` or norm above threshold) or failure.
pub fn evolve(w0: &StatePair, config: &EvolveConfig) -> Result<Trajectory, EvolutionError> {
    config.validate(w0.grid())?;
    let mut samples = vec![Sample::new(0.0, w0.clone(), 0.0)];
    let n_steps = (config.s_max / config.ds).round() as usize;
    let mut w = w0.clone();
    let mut dissipated = 0.0;
    let mut termination = Termination::Completed;
    for k in 1..=n_steps {
        let (next, d) = step_with_dissipation(&w, config.ds);
        let s = k as f64 * config.ds;
        if !next.is_finite() || !d.is_finite() {
            termination = Termination::NumericalFailure { s };
            break;
        }
        w = next;
        dissipated += d;
        let e = energy(&w);
        let nh = norm_h(&w);
        let blow = e < 0.0 || nh > config.blowup_threshold;
        if k % config.record_every == 0 || k == n_steps || blow {
            samples.push(Sample::new(s, w.clone(), dissipated));
        }
        if blow {
            termination = Termination::BlowUpDetected {
                s,
                negative_energy: e < 0.0,
            };
            break;
        }
    }
    Ok(Trajectory {
        samples,
        termination,
        config: config.clone(),
    })
}

/// Independent trajectories in parallel; results keep the input order.
pub fn evolve_many(inputs: &[StatePair], config: &EvolveConfig) -> Vec<Result<Trajectory, EvolutionError>> {
    inputs.par_iter().map(|w| evolve(w, config)).collect()
}

/// Space-independent state `(a, b)`.
pub fn constant_state(grid: &Arc<Grid>, a: f64, b: f64) -> StatePair {
    StatePair::new(Field::constant(grid, a), Field::constant(grid, b))
}
