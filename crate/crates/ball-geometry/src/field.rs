use std::sync::Arc;

use nalgebra::DVector;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::{GeometryError, Grid};

/// Band-limited scalar function on the ball: mode coefficients plus the
/// synthesised values at the main quadrature nodes.
#[derive(Debug, Clone)]
pub struct Field {
    grid: Arc<Grid>,
    coeffs: DVector<f64>,
    values: DVector<f64>,
}

impl Field {
    pub fn from_coeffs(grid: &Arc<Grid>, coeffs: DVector<f64>) -> Self {
        assert_eq!(coeffs.len(), grid.n_modes(), "coefficient count does not match grid");
        let values = grid.main().phi.tr_mul(&coeffs);
        Self {
            grid: grid.clone(),
            coeffs,
            values,
        }
    }

    /// L2_rho projection of nodal samples onto the modes.
    pub fn from_nodal(grid: &Arc<Grid>, samples: &DVector<f64>) -> Self {
        assert_eq!(samples.len(), grid.n_nodes(), "sample count does not match grid");
        Self::from_coeffs(grid, &grid.main().wphi * samples)
    }

    /// Sample `f` at the nodes and project.
    pub fn from_fn(grid: &Arc<Grid>, f: impl Fn(&[f64]) -> f64) -> Self {
        let samples = DVector::from_iterator(grid.n_nodes(), (0..grid.n_nodes()).map(|q| f(grid.node(q))));
        Self::from_nodal(grid, &samples)
    }

    pub fn zeros(grid: &Arc<Grid>) -> Self {
        Self {
            grid: grid.clone(),
            coeffs: DVector::zeros(grid.n_modes()),
            values: DVector::zeros(grid.n_nodes()),
        }
    }

    pub fn constant(grid: &Arc<Grid>, c: f64) -> Self {
        Self::from_fn(grid, |_| c)
    }

    /// Coordinate function `y_i`.
    pub fn coordinate(grid: &Arc<Grid>, i: usize) -> Self {
        Self::from_fn(grid, |y| y[i])
    }

    /// Random field with Gaussian coefficients damped by `exp(-decay * degree)`,
    /// restricted to total degree `<= max_degree`.
    pub fn random<R: Rng + ?Sized>(grid: &Arc<Grid>, rng: &mut R, max_degree: usize, decay: f64) -> Self {
        let coeffs = DVector::from_iterator(
            grid.n_modes(),
            grid.modes().modes().iter().map(|m| {
                if m.degree <= max_degree {
                    let z: f64 = rng.sample(StandardNormal);
                    z * (-decay * m.degree as f64).exp()
                } else {
                    0.0
                }
            }),
        );
        Self::from_coeffs(grid, coeffs)
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn coeffs(&self) -> &DVector<f64> {
        &self.coeffs
    }

    pub fn values(&self) -> &DVector<f64> {
        &self.values
    }

    pub fn same_grid(&self, other: &Field) -> bool {
        Arc::ptr_eq(&self.grid, &other.grid)
    }

    pub fn check_grid(&self, other: &Field) -> Result<(), GeometryError> {
        if self.same_grid(other) {
            Ok(())
        } else {
            Err(GeometryError::GridMismatch)
        }
    }

    /// Largest transverse degree carrying a nonzero coefficient.
    pub fn transverse_content(&self) -> usize {
        self.grid
            .modes()
            .modes()
            .iter()
            .zip(self.coeffs.iter())
            .filter(|(_, c)| **c != 0.0)
            .map(|(m, _)| m.j)
            .max()
            .unwrap_or(0)
    }

    /// Value at an arbitrary interior point.
    pub fn eval_at(&self, y: &[f64]) -> Result<f64, GeometryError> {
        Ok(self.grid.eval_modes(y)?.dot(&self.coeffs))
    }

    /// Cartesian gradient components at the main nodes.
    pub fn gradient_values(&self) -> Vec<DVector<f64>> {
        self.grid.main().grad.iter().map(|g| g.tr_mul(&self.coeffs)).collect()
    }

    /// `y . grad f` at the main nodes.
    pub fn euler_values(&self) -> DVector<f64> {
        self.grid.main().euler.tr_mul(&self.coeffs)
    }

    /// `y . grad f` as a field (exact: the Euler operator preserves the mode space).
    pub fn euler(&self) -> Field {
        Field::from_coeffs(&self.grid, self.grid.euler_matrix() * &self.coeffs)
    }

    /// Values at the singular-weight nodes.
    pub fn singular_values(&self) -> DVector<f64> {
        self.grid.singular().phi.tr_mul(&self.coeffs)
    }

    /// Pointwise map of the nodal values followed by projection.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Field::from_nodal(&self.grid, &self.values.map(f))
    }

    /// Projection of `self * w` for a nodal multiplier `w`.
    pub fn mul_nodal(&self, w: &DVector<f64>) -> Field {
        Field::from_nodal(&self.grid, &self.values.component_mul(w))
    }

    pub fn scale(&self, a: f64) -> Field {
        Field {
            grid: self.grid.clone(),
            coeffs: &self.coeffs * a,
            values: &self.values * a,
        }
    }

    /// `self + a * other`.
    pub fn axpy(&self, a: f64, other: &Field) -> Field {
        assert!(self.same_grid(other), "fields live on different grids");
        Field {
            grid: self.grid.clone(),
            coeffs: &self.coeffs + &other.coeffs * a,
            values: &self.values + &other.values * a,
        }
    }

    pub fn add(&self, other: &Field) -> Field {
        self.axpy(1.0, other)
    }

    pub fn sub(&self, other: &Field) -> Field {
        self.axpy(-1.0, other)
    }

    /// `L2_rho` norm.
    pub fn norm_l2(&self) -> f64 {
        self.coeffs.norm()
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }
}

/// Element `(r1, r2)` of the energy space.
#[derive(Debug, Clone)]
pub struct StatePair {
    pub r1: Field,
    pub r2: Field,
}

impl StatePair {
    pub fn new(r1: Field, r2: Field) -> Self {
        assert!(r1.same_grid(&r2), "components live on different grids");
        Self { r1, r2 }
    }

    pub fn zeros(grid: &Arc<Grid>) -> Self {
        Self {
            r1: Field::zeros(grid),
            r2: Field::zeros(grid),
        }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.r1.grid()
    }

    pub fn check_grid(&self, other: &StatePair) -> Result<(), GeometryError> {
        self.r1.check_grid(&other.r1)
    }

    pub fn scale(&self, a: f64) -> Self {
        Self {
            r1: self.r1.scale(a),
            r2: self.r2.scale(a),
        }
    }

    pub fn axpy(&self, a: f64, other: &StatePair) -> Self {
        Self {
            r1: self.r1.axpy(a, &other.r1),
            r2: self.r2.axpy(a, &other.r2),
        }
    }

    pub fn add(&self, other: &StatePair) -> Self {
        self.axpy(1.0, other)
    }

    pub fn sub(&self, other: &StatePair) -> Self {
        self.axpy(-1.0, other)
    }

    pub fn is_finite(&self) -> bool {
        self.r1.is_finite() && self.r2.is_finite()
    }
}

/// `∫ f rho dy` by quadrature.
pub fn integrate_rho(f: &Field) -> f64 {
    f.values().dot(f.grid().weights())
}

/// `∫ f g rho dy`.
pub fn inner_rho(f: &Field, g: &Field) -> Result<f64, GeometryError> {
    f.check_grid(g)?;
    Ok(f.coeffs().dot(g.coeffs()))
}

/// `∫ (grad f . grad g - (y . grad f)(y . grad g)) rho dy`, evaluated at the nodes.
pub fn gradient_form(f: &Field, g: &Field) -> Result<f64, GeometryError> {
    f.check_grid(g)?;
    let grid = f.grid();
    let w = grid.weights();
    let gf = f.gradient_values();
    let gg = g.gradient_values();
    let mut acc = 0.0;
    for (a, b) in gf.iter().zip(&gg) {
        acc += a.component_mul(b).dot(w);
    }
    acc -= f.euler_values().component_mul(&g.euler_values()).dot(w);
    Ok(acc)
}

/// Squared `H_0` norm `∫ (f^2 + |grad f|^2 - (y . grad f)^2) rho dy`, from the modal
/// identity `∫ (|grad f|^2 - (y . grad f)^2) rho = Σ n(n + N + 2 alpha) f_n^2`.
pub fn norm_h0_sq(f: &Field) -> f64 {
    let stiff = f.grid().mode_stiffness();
    f.coeffs().iter().zip(stiff.iter()).map(|(c, s)| c * c * (1.0 + s)).sum()
}

/// Energy-space norm of a pair.
pub fn norm_h(q: &StatePair) -> f64 {
    (norm_h0_sq(&q.r1) + q.r2.norm_l2().powi(2)).sqrt()
}

/// `phi(q, r) = ∫ (q1 (-L r1 + r1) + q2 r2) rho dy` using the spectral action of `L`.
pub fn inner_phi(q: &StatePair, r: &StatePair) -> Result<f64, GeometryError> {
    q.check_grid(r)?;
    let stiff = q.grid().mode_stiffness();
    let a = q
        .r1
        .coeffs()
        .iter()
        .zip(r.r1.coeffs().iter())
        .zip(stiff.iter())
        .map(|((x, y), s)| x * y * (1.0 + s))
        .sum::<f64>();
    Ok(a + q.r2.coeffs().dot(r.r2.coeffs()))
}

/// Integration-by-parts form of `phi`: gradients evaluated at the nodes.
pub fn inner_phi_ibp(q: &StatePair, r: &StatePair) -> Result<f64, GeometryError> {
    q.check_grid(r)?;
    Ok(inner_rho(&q.r1, &r.r1)? + gradient_form(&q.r1, &r.r1)? + inner_rho(&q.r2, &r.r2)?)
}

/// `(∫ f^2 rho / (1 - |y|^2) dy)^{1/2}`.
pub fn norm_singular_l2(f: &Field) -> f64 {
    let v = f.singular_values();
    v.component_mul(&v).dot(&f.grid().singular().weights).sqrt()
}
