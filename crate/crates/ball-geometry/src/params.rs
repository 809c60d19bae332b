use crate::GeometryError;

/// Dimension `N` and exponent `p` of the problem, with the weight exponent
/// `alpha = 2/(p-1) - (N-1)/2` of `rho(y) = (1 - |y|^2)^alpha`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProblemParams {
    dim: usize,
    p: f64,
    alpha: f64,
}

impl ProblemParams {
    pub fn new(dim: usize, p: f64) -> Result<Self, GeometryError> {
        if !(1..=3).contains(&dim) {
            return Err(GeometryError::Domain(format!(
                "dimension N = {dim} outside the supported range 1..=3"
            )));
        }
        if !(p.is_finite() && p > 1.0) {
            return Err(GeometryError::Domain(format!("p = {p} must exceed 1")));
        }
        if dim >= 2 && p >= 1.0 + 4.0 / (dim as f64 - 1.0) {
            return Err(GeometryError::Domain(format!(
                "p = {p} is not subconformal for N = {dim} (need p < {})",
                1.0 + 4.0 / (dim as f64 - 1.0)
            )));
        }
        let alpha = 2.0 / (p - 1.0) - (dim as f64 - 1.0) / 2.0;
        Ok(Self { dim, p, alpha })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `2/(p-1)`: the exponent of the axial Jacobi weight after fibration.
    pub fn beta(&self) -> f64 {
        2.0 / (self.p - 1.0)
    }

    /// `(p+3)/(p-1) = N + 2 alpha`: damping coefficient of the wave system.
    pub fn damping(&self) -> f64 {
        (self.p + 3.0) / (self.p - 1.0)
    }

    /// `2(p+1)/(p-1)^2`: coefficient of the linear mass term.
    pub fn mass_coeff(&self) -> f64 {
        2.0 * (self.p + 1.0) / (self.p - 1.0).powi(2)
    }

    /// Constant stationary solution `kappa_0 = (2(p+1)/(p-1)^2)^{1/(p-1)}`.
    pub fn kappa0(&self) -> f64 {
        self.mass_coeff().powf(1.0 / (self.p - 1.0))
    }

    /// Eigenvalue `-n(n + N + 2 alpha)` of the ball operator on polynomials of exact degree `n`.
    pub fn eigenvalue(&self, degree: usize) -> f64 {
        let n = degree as f64;
        -n * (n + self.damping())
    }
}
