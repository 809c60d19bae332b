//! Orthonormal Jacobi polynomials and Gauss–Jacobi quadrature.
//!
//! Weight convention: `(1 - x)^a (1 + x)^b` on `(-1, 1)`.

use nalgebra::{DMatrix, SymmetricEigen};
use libm::lgamma as ln_gamma;

/// Total mass `∫(1-x)^a (1+x)^b dx`.
pub fn jacobi_mass(a: f64, b: f64) -> f64 {
    ((a + b + 1.0) * std::f64::consts::LN_2 + ln_gamma(a + 1.0) + ln_gamma(b + 1.0)
        - ln_gamma(a + b + 2.0))
    .exp()
}

/// Three-term recurrence for the orthonormal family of one Jacobi weight.
#[derive(Debug, Clone)]
pub struct OrthoJacobi {
    a: f64,
    b: f64,
    mass: f64,
    diag: Vec<f64>,
    off: Vec<f64>,
}

impl OrthoJacobi {
    /// Recurrence able to evaluate degrees `0..=max_degree`.
    pub fn new(a: f64, b: f64, max_degree: usize) -> Self {
        assert!(a > -1.0 && b > -1.0, "Jacobi exponents must exceed -1");
        let n = max_degree + 2;
        let mut diag = vec![0.0; n];
        let mut off = vec![0.0; n];
        for k in 0..n {
            let kf = k as f64;
            let s = 2.0 * kf + a + b;
            diag[k] = if k == 0 {
                (b - a) / (a + b + 2.0)
            } else if a == b {
                0.0
            } else {
                (b * b - a * a) / (s * (s + 2.0))
            };
            off[k] = match k {
                0 => 0.0,
                1 => (4.0 * (1.0 + a) * (1.0 + b) / ((2.0 + a + b).powi(2) * (3.0 + a + b))).sqrt(),
                _ => (4.0 * kf * (kf + a) * (kf + b) * (kf + a + b)
                    / (s * s * (s + 1.0) * (s - 1.0)))
                    .sqrt(),
            };
        }
        Self {
            a,
            b,
            mass: jacobi_mass(a, b),
            diag,
            off,
        }
    }

    pub fn exponents(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn max_degree(&self) -> usize {
        self.diag.len() - 2
    }

    /// Values of `p_0..=p_n` at `x`.
    pub fn values(&self, x: f64, n: usize, out: &mut [f64]) {
        debug_assert!(n <= self.max_degree() && out.len() > n);
        out[0] = 1.0 / self.mass.sqrt();
        if n == 0 {
            return;
        }
        out[1] = (x - self.diag[0]) * out[0] / self.off[1];
        for k in 1..n {
            out[k + 1] = ((x - self.diag[k]) * out[k] - self.off[k] * out[k - 1]) / self.off[k + 1];
        }
    }

    /// Values and first derivatives of `p_0..=p_n` at `x`.
    pub fn values_and_derivatives(&self, x: f64, n: usize, val: &mut [f64], der: &mut [f64]) {
        self.values(x, n, val);
        der[0] = 0.0;
        if n == 0 {
            return;
        }
        der[1] = val[0] / self.off[1];
        for k in 1..n {
            der[k + 1] = (val[k] + (x - self.diag[k]) * der[k] - self.off[k] * der[k - 1])
                / self.off[k + 1];
        }
    }
}

/// `n`-point Gauss–Jacobi rule for `(1-x)^a (1+x)^b`.
///
/// Golub–Welsch for a first guess, then Newton polishing on the orthonormal
/// recurrence and Christoffel weights.
pub fn gauss_jacobi(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let rec = OrthoJacobi::new(a, b, n);
    let mut t = DMatrix::<f64>::zeros(n, n);
    for k in 0..n {
        t[(k, k)] = rec.diag[k];
        if k + 1 < n {
            t[(k, k + 1)] = rec.off[k + 1];
            t[(k + 1, k)] = rec.off[k + 1];
        }
    }
    let eig = SymmetricEigen::new(t);
    let mut nodes: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    nodes.sort_by(|x, y| x.partial_cmp(y).unwrap());

    let mut val = vec![0.0; n + 1];
    let mut der = vec![0.0; n + 1];
    for x in nodes.iter_mut() {
        for _ in 0..3 {
            rec.values_and_derivatives(*x, n, &mut val, &mut der);
            let dx = val[n] / der[n];
            if !dx.is_finite() {
                break;
            }
            *x = (*x - dx).clamp(-1.0 + f64::EPSILON, 1.0 - f64::EPSILON);
            if dx.abs() < 1e-16 {
                break;
            }
        }
    }
    let weights = nodes
        .iter()
        .map(|&x| {
            rec.values(x, n - 1, &mut val);
            1.0 / val[..n].iter().map(|v| v * v).sum::<f64>()
        })
        .collect();
    (nodes, weights)
}
