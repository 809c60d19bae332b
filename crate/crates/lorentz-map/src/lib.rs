//! `theta_d` and `T_d` for stationary profiles.

use std::sync::Arc;

use ball_geometry::{Field, GeometryError, Grid};
use soliton_family::{dot, norm};

#[derive(Debug, thiserror::Error)]
pub enum LorentzError {
    #[error("domain: {0}")]
    Domain(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Boost parameter, `|d| < 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct LorentzParam {
    d: Vec<f64>,
}

impl LorentzParam {
    pub fn new(d: Vec<f64>) -> Result<Self, LorentzError> {
        if !(norm(&d) < 1.0) {
            return Err(LorentzError::Domain(format!("|d| = {} must be below 1", norm(&d))));
        }
        Ok(Self { d })
    }

    pub fn d(&self) -> &[f64] {
        &self.d
    }

    pub fn inverse(&self) -> Self {
        Self {
            d: self.d.iter().map(|x| -x).collect(),
        }
    }
}

/// `theta_d(Y) = [d + (1 - sqrt(1-|d|^2))/|d|^2 (d.Y) d + sqrt(1-|d|^2) Y] / (1 + d.Y)`.
pub fn theta(d: &[f64], big_y: &[f64]) -> Result<Vec<f64>, LorentzError> {
    if d.len() != big_y.len() {
        return Err(LorentzError::Domain("dimension mismatch".into()));
    }
    if !(norm(d) < 1.0) {
        return Err(LorentzError::Domain(format!("|d| = {} must be below 1", norm(d))));
    }
    if !(norm(big_y) < 1.0) {
        return Err(LorentzError::Domain(format!("|Y| = {} must be below 1", norm(big_y))));
    }
    Ok(theta_unchecked(d, big_y))
}

fn theta_unchecked(d: &[f64], big_y: &[f64]) -> Vec<f64> {
    let r2 = dot(d, d);
    let g = (1.0 - r2).sqrt();
    let dy = dot(d, big_y);
    // (1 - g)/|d|^2 = 1/(1 + g), which stays regular at d = 0
    let k = dy / (1.0 + g);
    let den = 1.0 + dy;
    d.iter()
        .zip(big_y)
        .map(|(di, yi)| (di + k * di + g * yi) / den)
        .collect()
}

/// Prefactor `(1 - |d|^2)^{1/(p-1)} / (1 + d.Y)^{2/(p-1)}`.
pub fn prefactor(p: f64, d: &[f64], big_y: &[f64]) -> f64 {
    (1.0 - dot(d, d)).powf(1.0 / (p - 1.0)) / (1.0 + dot(d, big_y)).powf(2.0 / (p - 1.0))
}

/// `(T_d w)(Y)` at one point, evaluating the modal expansion of `w` at `theta_d(Y)`.
pub fn transform_point(d: &[f64], w: &Field, big_y: &[f64]) -> Result<f64, LorentzError> {
    let y = theta(d, big_y)?;
    let p = w.grid().params().p();
    Ok(prefactor(p, d, big_y) * w.eval_at(&y)?)
}

/// `T_d w` projected back onto the grid of `w`.
#[derive(Debug, Clone)]
pub struct Transformed {
    pub field: Field,
    /// Fraction of `L2_rho` energy in the top two degrees; large values flag under-resolution.
    pub tail: f64,
}

pub fn transform_t(d: &[f64], w: &Field) -> Result<Transformed, LorentzError> {
    let grid: &Arc<Grid> = w.grid();
    LorentzParam::new(d.to_vec())?;
    if d.len() != grid.dim() {
        return Err(LorentzError::Domain("dimension mismatch".into()));
    }
    let p = grid.params().p();
    let mut samples = ball_geometry::DVector::zeros(grid.n_nodes());
    for q in 0..grid.n_nodes() {
        let big_y = grid.node(q);
        let y = theta_unchecked(d, big_y);
        samples[q] = prefactor(p, d, big_y) * w.eval_at(&y)?;
    }
    let field = Field::from_nodal(grid, &samples);
    let tail = tail_fraction(&field, 2);
    Ok(Transformed { field, tail })
}

/// Share of `L2_rho` energy carried by the top `levels` degrees.
pub fn tail_fraction(f: &Field, levels: usize) -> f64 {
    let modes = f.grid().modes();
    let top = modes.max_degree();
    let total = f.coeffs().norm_squared();
    if total == 0.0 {
        return 0.0;
    }
    let tail: f64 = modes
        .modes()
        .iter()
        .zip(f.coeffs().iter())
        .filter(|(m, _)| m.degree + levels > top)
        .map(|(_, c)| c * c)
        .sum();
    tail / total
}

/// Both sides of the inner-product identity
/// `∫ V1 V2 rho(Y) dY = ∫ (1-|d|^2)/(1 - d.y)^2 v1 v2 rho(y) dy`, `v_i = T_{-d} V_i`.
///
/// With `singular = true` the weight is `rho/(1 - |.|^2)` on both sides and the factor is dropped.
pub fn check_inner_product_transform(
    d: &[f64],
    v1: &Field,
    v2: &Field,
    singular: bool,
) -> Result<(f64, f64), LorentzError> {
    v1.check_grid(v2)?;
    let grid = v1.grid();
    let p = grid.params().p();
    let md: Vec<f64> = d.iter().map(|x| -x).collect();
    let r2 = dot(d, d);
    let nodes = if singular { grid.singular() } else { grid.main() };
    let dim = grid.dim();
    let (a1, a2) = if singular {
        (v1.singular_values(), v2.singular_values())
    } else {
        (v1.values().clone(), v2.values().clone())
    };
    let lhs = a1.component_mul(&a2).dot(&nodes.weights);
    let mut rhs = 0.0;
    for (q, pt) in nodes.points.iter().enumerate() {
        let y = &pt[..dim];
        let big_y = theta(&md, y)?;
        let pre = prefactor(p, &md, y);
        let u1 = pre * v1.eval_at(&big_y)?;
        let u2 = pre * v2.eval_at(&big_y)?;
        let factor = if singular { 1.0 } else { (1.0 - r2) / (1.0 - dot(d, y)).powi(2) };
        rhs += nodes.weights[q] * factor * u1 * u2;
    }
    Ok((lhs, rhs))
}
