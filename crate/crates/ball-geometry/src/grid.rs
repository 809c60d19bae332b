use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::jacobi::gauss_jacobi;
use crate::modes::{ModeEval, ModeSet};
use crate::{GeometryError, ProblemParams};

/// Quadrature nodes with mode tables.
#[derive(Debug, Clone)]
pub struct NodeSet {
    /// Cartesian coordinates, one row per node (`dim` used entries).
    pub points: Vec<[f64; 3]>,
    pub weights: DVector<f64>,
    /// `phi[(n, q)]`: mode `n` at node `q`.
    pub phi: DMatrix<f64>,
    /// `weights[q] * phi[(n, q)]`, used for analysis.
    pub wphi: DMatrix<f64>,
    /// Gradient tables, one per Cartesian direction (empty on the singular set).
    pub grad: Vec<DMatrix<f64>>,
    /// `y . grad phi` (empty on the singular set).
    pub euler: DMatrix<f64>,
}

/// Weighted quadrature grid on the unit ball together with its polynomial modes.
///
/// Two node sets are kept: the main one integrates against `rho`, the singular
/// one against `rho / (1 - |y|^2)`.
#[derive(Debug)]
pub struct Grid {
    params: ProblemParams,
    resolution: (usize, usize),
    modes: ModeSet,
    main: NodeSet,
    singular: NodeSet,
    euler_matrix: DMatrix<f64>,
}

fn transverse_rule(dim: usize, n: usize, a: f64) -> Vec<([f64; 2], f64)> {
    match dim {
        1 => vec![([0.0; 2], 1.0)],
        2 => {
            let (x, w) = gauss_jacobi(n, a, a);
            x.into_iter().zip(w).map(|(x, w)| ([x, 0.0], w)).collect()
        }
        _ => {
            let nt = n / 2 + 2;
            let nth = 2 * n + 1;
            let (x, w) = gauss_jacobi(nt, a, 0.0);
            let mut out = Vec::with_capacity(nt * nth);
            let scale = 2f64.powf(-a) / 4.0 * 2.0 * PI / nth as f64;
            for (xi, wi) in x.iter().zip(&w) {
                let r = ((1.0 + xi) / 2.0).sqrt();
                for k in 0..nth {
                    let th = 2.0 * PI * (k as f64 + 0.5) / nth as f64;
                    out.push(([r * th.cos(), r * th.sin()], wi * scale));
                }
            }
            out
        }
    }
}

fn build_nodes(
    modes: &ModeSet,
    n_axial: usize,
    n_transverse: usize,
    shift: f64,
    with_derivatives: bool,
) -> NodeSet {
    let params = modes.params();
    let dim = params.dim();
    let (xa, wa) = gauss_jacobi(n_axial, params.beta() + shift, params.beta() + shift);
    let tr = transverse_rule(dim, n_transverse, params.alpha() + shift);
    let mut points = Vec::with_capacity(xa.len() * tr.len());
    let mut weights = Vec::with_capacity(xa.len() * tr.len());
    for (xi, wx) in xa.iter().zip(&wa) {
        let s = ((1.0 - xi) * (1.0 + xi)).sqrt();
        for (zeta, wz) in &tr {
            points.push([*xi, s * zeta[0], s * zeta[1]]);
            weights.push(wx * wz);
        }
    }
    let nm = modes.len();
    let nq = points.len();
    let mut phi = DMatrix::zeros(nm, nq);
    let mut grad = if with_derivatives {
        vec![DMatrix::zeros(nm, nq); dim]
    } else {
        Vec::new()
    };
    let mut euler = if with_derivatives {
        DMatrix::zeros(nm, nq)
    } else {
        DMatrix::zeros(0, 0)
    };
    let mut ev = ModeEval::new(nm, dim);
    for (q, y) in points.iter().enumerate() {
        modes.eval(&y[..dim], with_derivatives, &mut ev);
        phi.column_mut(q).copy_from_slice(&ev.value);
        if with_derivatives {
            for (i, g) in grad.iter_mut().enumerate() {
                g.column_mut(q).copy_from_slice(&ev.grad[i]);
            }
            euler.column_mut(q).copy_from_slice(&ev.euler);
        }
    }
    let weights = DVector::from_vec(weights);
    let mut wphi = phi.clone();
    for (q, mut col) in wphi.column_iter_mut().enumerate() {
        col *= weights[q];
    }
    NodeSet {
        points,
        weights,
        phi,
        wphi,
        grad,
        euler,
    }
}

impl Grid {
    /// Grid for `n_radial` axial modes (maximal total degree `n_radial - 1`) and
    /// `n_angular` transverse degrees (ignored for `N = 1`).
    pub fn new(
        params: ProblemParams,
        n_radial: usize,
        n_angular: usize,
    ) -> Result<Arc<Self>, GeometryError> {
        if n_radial < 8 {
            return Err(GeometryError::Resolution(format!(
                "n_radial = {n_radial} below the minimum of 8"
            )));
        }
        if n_angular < 1 {
            return Err(GeometryError::Resolution("n_angular must be at least 1".into()));
        }
        let kmax = n_radial - 1;
        let jmax = (n_angular - 1).min(kmax);
        let modes = ModeSet::new(params, kmax, jmax);
        let jmax = modes.max_transverse();
        // 3/2 oversampling for dealiased products.
        let n_axial = (3 * (kmax + 1)).div_ceil(2) + 1;
        let n_trans = (3 * (jmax + 1)).div_ceil(2) + 1;
        let main = build_nodes(&modes, n_axial, n_trans, 0.0, true);
        let singular = build_nodes(&modes, kmax + 2, jmax + 2, -1.0, false);
        let euler_matrix = &main.wphi * main.euler.transpose();
        Ok(Arc::new(Self {
            params,
            resolution: (n_radial, n_angular),
            modes,
            main,
            singular,
            euler_matrix,
        }))
    }

    pub fn params(&self) -> &ProblemParams {
        &self.params
    }

    pub fn dim(&self) -> usize {
        self.params.dim()
    }

    /// `(n_radial, n_angular)` as requested.
    pub fn resolution(&self) -> (usize, usize) {
        self.resolution
    }

    pub fn modes(&self) -> &ModeSet {
        &self.modes
    }

    pub fn n_modes(&self) -> usize {
        self.modes.len()
    }

    pub fn n_nodes(&self) -> usize {
        self.main.points.len()
    }

    pub fn main(&self) -> &NodeSet {
        &self.main
    }

    pub fn singular(&self) -> &NodeSet {
        &self.singular
    }

    /// Node `q` of the main set as a slice of length `dim`.
    pub fn node(&self, q: usize) -> &[f64] {
        &self.main.points[q][..self.dim()]
    }

    pub fn weights(&self) -> &DVector<f64> {
        &self.main.weights
    }

    /// `E[(m, n)] = <phi_m, y . grad phi_n>_rho`.
    pub fn euler_matrix(&self) -> &DMatrix<f64> {
        &self.euler_matrix
    }

    /// Closed-form `-L` eigenvalue `n(n + N + 2 alpha)` of each mode.
    pub fn mode_stiffness(&self) -> DVector<f64> {
        DVector::from_iterator(
            self.n_modes(),
            self.modes.modes().iter().map(|m| -self.params.eigenvalue(m.degree)),
        )
    }

    /// Values of all modes at an arbitrary point `|y| < 1`.
    pub fn eval_modes(&self, y: &[f64]) -> Result<DVector<f64>, GeometryError> {
        let r2: f64 = y.iter().map(|v| v * v).sum();
        if y.len() != self.dim() || r2 >= 1.0 || !r2.is_finite() {
            return Err(GeometryError::Domain(format!(
                "evaluation point {y:?} is not inside the unit ball of dimension {}",
                self.dim()
            )));
        }
        let mut ev = ModeEval::new(self.n_modes(), self.dim());
        self.modes.eval(y, false, &mut ev);
        Ok(DVector::from_vec(ev.value))
    }
}

/// Build a grid; see [`Grid::new`].
pub fn make_grid(
    params: ProblemParams,
    n_radial: usize,
    n_angular: usize,
) -> Result<Arc<Grid>, GeometryError> {
    Grid::new(params, n_radial, n_angular)
}
