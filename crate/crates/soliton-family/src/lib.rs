//! Solitons `kappa(d, y)`, the family `kappa*(d, nu, y)`, its parameter derivatives,
//! the frame `e_i(d)` and the closed-form soliton energy.

use std::sync::Arc;

use ball_geometry::{integrate_rho, Field, GeometryError, Grid, ProblemParams, StatePair};

mod frame;
pub use frame::{frame, Branch, Frame};

#[derive(Debug, thiserror::Error)]
pub enum SolitonError {
    #[error("parameter: {0}")]
    Parameter(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Soliton parameters `(d, nu)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SolitonParams {
    pub d: Vec<f64>,
    pub nu: f64,
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl SolitonParams {
    pub fn new(d: Vec<f64>, nu: f64) -> Result<Self, SolitonError> {
        let s = Self { d, nu };
        s.validate()?;
        Ok(s)
    }

    /// `|d| < 1` and `nu > -1 + |d|`, so that `1 + nu + d . y > 0` on the closed ball.
    pub fn validate(&self) -> Result<(), SolitonError> {
        let r = norm(&self.d);
        if !(r < 1.0) || self.d.iter().any(|x| !x.is_finite()) {
            return Err(SolitonError::Parameter(format!("|d| = {r} must be below 1")));
        }
        if !(self.nu > -1.0 + r) {
            return Err(SolitonError::Parameter(format!(
                "nu = {} must exceed -1 + |d| = {}",
                self.nu,
                -1.0 + r
            )));
        }
        Ok(())
    }

    pub fn abs_d(&self) -> f64 {
        norm(&self.d)
    }

    /// `d* = d / (1 + nu)`.
    pub fn dstar(&self) -> Vec<f64> {
        self.d.iter().map(|x| x / (1.0 + self.nu)).collect()
    }

    /// `lambda = ((1 - |d|^2)/((1 + nu)^2 - |d|^2))^{1/(p-1)}`.
    pub fn lambda(&self, p: f64) -> f64 {
        let r2 = dot(&self.d, &self.d);
        ((1.0 - r2) / ((1.0 + self.nu).powi(2) - r2)).powf(1.0 / (p - 1.0))
    }

    /// Chart coordinate `zeta = -argtanh |d|`.
    pub fn zeta(&self) -> f64 {
        -self.abs_d().atanh()
    }

    /// `nu / (1 - |d|)`, the quantity constrained by the admissibility band.
    pub fn band_ratio(&self) -> f64 {
        self.nu / (1.0 - self.abs_d())
    }
}

fn check_d(d: &[f64], dim: usize) -> Result<f64, SolitonError> {
    if d.len() != dim {
        return Err(SolitonError::Parameter(format!(
            "d has {} components, expected {dim}",
            d.len()
        )));
    }
    let r = norm(d);
    if !(r < 1.0) {
        return Err(SolitonError::Parameter(format!("|d| = {r} must be below 1")));
    }
    Ok(r)
}

/// Pointwise `kappa(d, y) = kappa0 (1 - |d|^2)^{1/(p-1)} / (1 + d . y)^{2/(p-1)}`.
pub fn kappa_value(params: &ProblemParams, d: &[f64], y: &[f64]) -> f64 {
    let p = params.p();
    let a = 1.0 / (p - 1.0);
    params.kappa0() * (1.0 - dot(d, d)).powf(a) / (1.0 + dot(d, y)).powf(2.0 * a)
}

pub fn kappa(grid: &Arc<Grid>, d: &[f64]) -> Result<Field, SolitonError> {
    let params = *grid.params();
    check_d(d, params.dim())?;
    Ok(Field::from_fn(grid, |y| kappa_value(&params, d, y)))
}

/// Pointwise `(kappa*_1, kappa*_2)`.
pub fn kappa_star_value(params: &ProblemParams, d: &[f64], nu: f64, y: &[f64]) -> (f64, f64) {
    let p = params.p();
    let a = 1.0 / (p - 1.0);
    let base = params.kappa0() * (1.0 - dot(d, d)).powf(a);
    let den = 1.0 + nu + dot(d, y);
    let k1 = base * den.powf(-2.0 * a);
    let k2 = -2.0 * a * nu * base * den.powf(-(p + 1.0) * a);
    (k1, k2)
}

pub fn kappa_star(grid: &Arc<Grid>, d: &[f64], nu: f64) -> Result<StatePair, SolitonError> {
    let params = *grid.params();
    check_d(d, params.dim())?;
    SolitonParams::new(d.to_vec(), nu)?;
    let r1 = Field::from_fn(grid, |y| kappa_star_value(&params, d, nu, y).0);
    let r2 = Field::from_fn(grid, |y| kappa_star_value(&params, d, nu, y).1);
    Ok(StatePair::new(r1, r2))
}

/// Parameter direction for derivatives of `kappa*`.
#[derive(Debug, Clone, PartialEq)]
pub enum Direction {
    Nu,
    /// Derivative along a unit vector `e` in `d`-space: `e . grad_d`.
    Along(Vec<f64>),
}

/// Pointwise `(d kappa*_1, d kappa*_2)` along `dir`.
pub fn d_kappa_star_value(
    params: &ProblemParams,
    d: &[f64],
    nu: f64,
    dir: &Direction,
    y: &[f64],
) -> (f64, f64) {
    let p = params.p();
    let a = 1.0 / (p - 1.0);
    let q = (p + 1.0) * a;
    let r2 = dot(d, d);
    let base = params.kappa0() * (1.0 - r2).powf(a);
    let den = 1.0 + nu + dot(d, y);
    let k1 = base * den.powf(-2.0 * a);
    let k2 = -2.0 * a * nu * base * den.powf(-q);
    match dir {
        Direction::Nu => {
            let d1 = -2.0 * a * k1 / den;
            let d2 = -2.0 * a * base * (den.powf(-q) - nu * q * den.powf(-q - 1.0));
            (d1, d2)
        }
        Direction::Along(e) => {
            let ed = dot(e, d);
            let ey = dot(e, y);
            let d1 = k1 * (-2.0 * a * ed / (1.0 - r2) - 2.0 * a * ey / den);
            let d2 = k2 * (-2.0 * a * ed / (1.0 - r2) - q * ey / den);
            (d1, d2)
        }
    }
}

pub fn d_kappa_star(
    grid: &Arc<Grid>,
    d: &[f64],
    nu: f64,
    dir: &Direction,
) -> Result<StatePair, SolitonError> {
    let params = *grid.params();
    check_d(d, params.dim())?;
    SolitonParams::new(d.to_vec(), nu)?;
    if let Direction::Along(e) = dir {
        if e.len() != params.dim() {
            return Err(SolitonError::Parameter("direction has wrong dimension".into()));
        }
    }
    let r1 = Field::from_fn(grid, |y| d_kappa_star_value(&params, d, nu, dir, y).0);
    let r2 = Field::from_fn(grid, |y| d_kappa_star_value(&params, d, nu, dir, y).1);
    Ok(StatePair::new(r1, r2))
}

/// `E(kappa0) = kappa0^2/(p-1) ∫ rho`, with `∫ rho` by quadrature.
pub fn energy_kappa0(grid: &Arc<Grid>) -> f64 {
    let p = grid.params();
    let mass = integrate_rho(&Field::constant(grid, 1.0));
    p.kappa0().powi(2) / (p.p() - 1.0) * mass
}

/// Closed form `E(kappa*(d, nu)) = E(kappa0)/(p-1) lambda^2 (p + 1 + 2 lambda^{p-1}(nu^2/(1-|d|^2) - 1))`.
pub fn energy_kappa_star_closed(
    params: &ProblemParams,
    d: &[f64],
    nu: f64,
    e_kappa0: f64,
) -> Result<f64, SolitonError> {
    let sp = SolitonParams::new(d.to_vec(), nu)?;
    let p = params.p();
    let l = sp.lambda(p);
    let r2 = dot(d, d);
    Ok(e_kappa0 / (p - 1.0) * l * l * (p + 1.0 + 2.0 * l.powf(p - 1.0) * (nu * nu / (1.0 - r2) - 1.0)))
}
