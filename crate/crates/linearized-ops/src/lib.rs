//! Linearization `L_d` around `kappa(d)`, its `phi`-conjugate `L_d*`, the eigenfields
//! `F_i(d)`, `W_i(d)`, `W̄_i(d)`, projections and the quadratic form `phi_d`.
//!
//! Everything is Galerkin on the polynomial modes. The modes diagonalize `L`, so the
//! resolvent `(-L + 1)^{-1}` is diagonal; the singular term `4 alpha r / (1 - |y|^2)`
//! never appears explicitly because it is integrated by parts against the test modes.

use std::sync::Arc;

use ball_geometry::{Field, GeometryError, Grid, ProblemParams, StatePair};
use nalgebra::DVector;
use soliton_family::{dot, frame, Branch, Frame, SolitonError};

#[derive(Debug, thiserror::Error)]
pub enum LinearError {
    #[error("index {0} out of range 0..={1}")]
    Index(usize, usize),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Soliton(#[from] SolitonError),
    #[error("resolvent: {0}")]
    Resolvent(String),
}

/// `psi(d, y) = p kappa(d, y)^{p-1} - 2(p+1)/(p-1)^2`.
pub fn psi_value(params: &ProblemParams, d: &[f64], y: &[f64]) -> f64 {
    let p = params.p();
    params.mass_coeff() * (p * (1.0 - dot(d, d)) / (1.0 + dot(d, y)).powi(2) - 1.0)
}

/// `psi(d, .)` at the main nodes.
pub fn psi_nodal(grid: &Grid, d: &[f64]) -> DVector<f64> {
    let pr = *grid.params();
    DVector::from_iterator(grid.n_nodes(), (0..grid.n_nodes()).map(|q| psi_value(&pr, d, grid.node(q))))
}

/// `-gamma_n = n(n + b)` per mode.
fn stiffness(grid: &Grid) -> DVector<f64> {
    grid.mode_stiffness()
}

/// Modal coefficients of the projection of `w * f` (nodal multiplier `w`).
fn project_product(grid: &Grid, w: &DVector<f64>, f: &Field) -> DVector<f64> {
    &grid.main().wphi * f.values().component_mul(w)
}

/// `(q2, L q1 + w q1 - b q2 - 2 y . grad q2)` for a nodal potential `w`.
pub fn apply_linear(q: &StatePair, potential: &DVector<f64>) -> StatePair {
    let grid = q.grid();
    let b = grid.params().damping();
    let s = stiffness(grid);
    let c1 = q.r1.coeffs();
    let c2 = q.r2.coeffs();
    let out = -s.component_mul(c1) + project_product(grid, potential, &q.r1) - c2 * b
        - grid.euler_matrix() * c2 * 2.0;
    StatePair::new(q.r2.clone(), Field::from_coeffs(grid, out))
}

pub fn apply_ld(d: &[f64], q: &StatePair) -> StatePair {
    apply_linear(q, &psi_nodal(q.grid(), d))
}

/// Solves `-L v1 + v1 = (lambda - b) v2 - 2 y . grad v2 + 4 alpha v2 / (1 - |y|^2)` in weak form.
pub fn resolve_first_component(v2: &Field, lambda: f64) -> Field {
    let grid = v2.grid();
    let b = grid.params().damping();
    let c = v2.coeffs();
    let rhs = c * (lambda + b) + grid.euler_matrix().tr_mul(c) * 2.0;
    let s = stiffness(grid);
    Field::from_coeffs(grid, rhs.component_div(&s.add_scalar(1.0)))
}

/// `L_d* r = (R_d(r2), -L r1 + r1 + b r2 + 2 y . grad r2 - 4 alpha r2 / (1 - |y|^2))`.
pub fn apply_ld_star(d: &[f64], r: &StatePair) -> StatePair {
    let grid = r.grid();
    let b = grid.params().damping();
    let s = stiffness(grid);
    let one_s = s.add_scalar(1.0);
    let c1 = r.r1.coeffs();
    let c2 = r.r2.coeffs();
    let psi = psi_nodal(grid, d);
    let rd = (-s.component_mul(c2) + project_product(grid, &psi, &r.r2)).component_div(&one_s);
    let second = one_s.component_mul(c1) - c2 * b - grid.euler_matrix().tr_mul(c2) * 2.0;
    StatePair::new(Field::from_coeffs(grid, rd), Field::from_coeffs(grid, second))
}

/// `phi_d(q, r) = ∫(-psi q1 r1 + grad q1 . grad r1 - (y.grad q1)(y.grad r1) + q2 r2) rho`.
pub fn quad_form_phi_d(d: &[f64], q: &StatePair, r: &StatePair) -> Result<f64, LinearError> {
    quad_form_with(&psi_nodal(q.grid(), d), q, r)
}

/// `phi_d` with an arbitrary nodal potential in place of `psi`.
pub fn quad_form_with(potential: &DVector<f64>, q: &StatePair, r: &StatePair) -> Result<f64, LinearError> {
    q.check_grid(r)?;
    let grid = q.grid();
    let w = grid.weights();
    let pot = q.r1.values().component_mul(r.r1.values()).component_mul(potential).dot(w);
    let s = stiffness(grid);
    let grad = q.r1.coeffs().component_mul(r.r1.coeffs()).dot(&s);
    Ok(-pot + grad + q.r2.coeffs().dot(r.r2.coeffs()))
}

/// `1/c_lambda = 2(lambda + alpha) ∫ (y_1^2/(1 - |y|^2))^{1 - lambda} rho`, for `lambda ∈ {0, 1}`.
pub fn c_lambda(grid: &Arc<Grid>, lambda: u8) -> f64 {
    let alpha = grid.params().alpha();
    let integral = if lambda == 1 {
        Field::constant(grid, 1.0).values().dot(grid.weights())
    } else {
        let y1 = Field::coordinate(grid, 0);
        ball_geometry::norm_singular_l2(&y1).powi(2)
    };
    1.0 / (2.0 * (lambda as f64 + alpha) * integral)
}

/// First components `F_{i,1}(d, y)` at a point, in the frame `e`.
pub fn f_first_value(params: &ProblemParams, d: &[f64], e: &Frame, i: usize, y: &[f64]) -> f64 {
    let p = params.p();
    let r2 = dot(d, d);
    let den = (1.0 + dot(d, y)).powf(-(p + 1.0) / (p - 1.0));
    match i {
        0 => (1.0 - r2).powf(p / (p - 1.0)) * den,
        1 => (1.0 - r2).powf(1.0 / (p - 1.0)) * (dot(y, &e.e[0]) + r2.sqrt()) * den,
        _ => (1.0 - r2).powf((p + 1.0) / (2.0 * (p - 1.0))) * dot(y, &e.e[i - 1]) * den,
    }
}

fn check_index(grid: &Grid, i: usize) -> Result<(), LinearError> {
    if i > grid.dim() {
        Err(LinearError::Index(i, grid.dim()))
    } else {
        Ok(())
    }
}

fn check_d(grid: &Grid, d: &[f64]) -> Result<(), LinearError> {
    if d.len() != grid.dim() || !(dot(d, d) < 1.0) {
        return Err(SolitonError::Parameter(format!("invalid d = {d:?}")).into());
    }
    Ok(())
}

/// Eigenfield `F_i(d)` of `L_d` (eigenvalue 1 for `i = 0`, 0 otherwise).
pub fn eigenfield_f(grid: &Arc<Grid>, d: &[f64], e: &Frame, i: usize) -> Result<StatePair, LinearError> {
    check_index(grid, i)?;
    check_d(grid, d)?;
    let pr = *grid.params();
    let f1 = Field::from_fn(grid, |y| f_first_value(&pr, d, e, i, y));
    let f2 = if i == 0 { f1.clone() } else { Field::zeros(grid) };
    Ok(StatePair::new(f1, f2))
}

/// Eigenfield `W_i(d)` of `L_d*` dual to `F_i(d)` under `phi`.
pub fn eigenfield_w(grid: &Arc<Grid>, d: &[f64], e: &Frame, i: usize) -> Result<StatePair, LinearError> {
    check_index(grid, i)?;
    check_d(grid, d)?;
    let pr = *grid.params();
    let r2 = dot(d, d);
    let (lambda, c) = if i == 0 { (1u8, c_lambda(grid, 1)) } else { (0u8, c_lambda(grid, 0)) };
    let w2 = Field::from_fn(grid, |y| {
        let f = f_first_value(&pr, d, e, i, y);
        if lambda == 1 {
            c * (1.0 - dot(y, y)) / (1.0 - r2) * f
        } else {
            c * f
        }
    });
    let w1 = resolve_first_component(&w2, lambda as f64);
    Ok(StatePair::new(w1, w2))
}

/// Alternate zero-eigenspace basis, smooth at `d = 0`: `W̄_0 = W_0` and
/// `W̄_{i,2} = c_0 (y_i + d_i)/(1 + d . y)^{(p+1)/(p-1)}` in canonical coordinates.
pub fn eigenfield_wbar(grid: &Arc<Grid>, d: &[f64], i: usize) -> Result<StatePair, LinearError> {
    check_index(grid, i)?;
    check_d(grid, d)?;
    if i == 0 {
        return eigenfield_w(grid, d, &frame(d, None), 0);
    }
    let p = grid.params().p();
    let c = c_lambda(grid, 0);
    let w2 = Field::from_fn(grid, |y| {
        c * (y[i - 1] + d[i - 1]) * (1.0 + dot(d, y)).powf(-(p + 1.0) / (p - 1.0))
    });
    let w1 = resolve_first_component(&w2, 0.0);
    Ok(StatePair::new(w1, w2))
}

/// `q = Σ pi_i F_i(d) + q_minus`.
#[derive(Debug, Clone)]
pub struct Decomposition {
    pub pi: Vec<f64>,
    pub q_minus: StatePair,
    pub d: Vec<f64>,
}

/// Which dual basis defines the projections.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DualBasis {
    W,
    WBar,
}

/// Eigenfields of `L_d` and `L_d*` at one `d`, built once and shared read-only.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    d: Vec<f64>,
    frame: Frame,
    f: Vec<StatePair>,
    w: Vec<StatePair>,
}

impl EigenSystem {
    /// `prev` selects the frame branch (hysteresis along trajectories).
    pub fn new(grid: &Arc<Grid>, d: &[f64], prev: Option<Branch>) -> Result<Self, LinearError> {
        check_d(grid, d)?;
        let fr = frame(d, prev);
        let n = grid.dim();
        let f = (0..=n).map(|i| eigenfield_f(grid, d, &fr, i)).collect::<Result<Vec<_>, _>>()?;
        let w = (0..=n).map(|i| eigenfield_w(grid, d, &fr, i)).collect::<Result<Vec<_>, _>>()?;
        Ok(Self { d: d.to_vec(), frame: fr, f, w })
    }

    pub fn d(&self) -> &[f64] {
        &self.d
    }

    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    pub fn f(&self) -> &[StatePair] {
        &self.f
    }

    pub fn w(&self) -> &[StatePair] {
        &self.w
    }

    /// `pi_i(q) = phi(W_i, q)`.
    pub fn pi(&self, q: &StatePair) -> Result<Vec<f64>, LinearError> {
        self.w
            .iter()
            .map(|w| ball_geometry::inner_phi(w, q).map_err(LinearError::from))
            .collect()
    }

    pub fn project(&self, q: &StatePair) -> Result<Decomposition, LinearError> {
        let pi = self.pi(q)?;
        let mut q_minus = q.clone();
        for (c, f) in pi.iter().zip(&self.f) {
            q_minus = q_minus.axpy(-c, f);
        }
        Ok(Decomposition {
            pi,
            q_minus,
            d: self.d.clone(),
        })
    }

    /// Duality matrix `phi(W_i, F_j)`.
    pub fn duality(&self) -> Result<Vec<Vec<f64>>, LinearError> {
        self.w
            .iter()
            .map(|w| {
                self.f
                    .iter()
                    .map(|f| ball_geometry::inner_phi(w, f).map_err(LinearError::from))
                    .collect()
            })
            .collect()
    }
}

/// Decomposition of `q` with respect to `d` (frame chosen without history).
pub fn project(grid: &Arc<Grid>, d: &[f64], q: &StatePair) -> Result<Decomposition, LinearError> {
    EigenSystem::new(grid, d, None)?.project(q)
}

/// Dual fields defining the projections: `W_i(d)` or `W̄_i(d)`.
pub fn dual_fields(
    grid: &Arc<Grid>,
    d: &[f64],
    basis: DualBasis,
    prev: Option<Branch>,
) -> Result<Vec<StatePair>, LinearError> {
    let n = grid.dim();
    match basis {
        DualBasis::W => {
            let fr = frame(d, prev);
            (0..=n).map(|i| eigenfield_w(grid, d, &fr, i)).collect()
        }
        DualBasis::WBar => (0..=n).map(|i| eigenfield_wbar(grid, d, i)).collect(),
    }
}
