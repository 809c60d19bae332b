//! Orthonormal polynomial modes on the ball in fibred coordinates.
//!
//! A point is written `y = (xi, s zeta)` with `xi = y_1`, `s = sqrt(1 - xi^2)`
//! and `zeta` in the unit ball of dimension `N - 1`. Then
//! `rho(y) dy = (1 - xi^2)^beta dxi (1 - |zeta|^2)^alpha dzeta`, `beta = alpha + (N-1)/2`.
//! Modes are `g_k^{(j)}(xi) s^j Q_{j,l}(zeta)` where `Q_{j,l}` is orthonormal of exact
//! degree `j` for the transverse weight and `g^{(j)}` is orthonormal for
//! `(1 - xi^2)^{beta + j}`. Each mode is a polynomial of degree `j + k` in `y`.

use crate::jacobi::OrthoJacobi;
use crate::ProblemParams;

/// Angular part of a transverse mode for `N = 3`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Harmonic {
    None,
    Cos(usize),
    Sin(usize),
}

/// Transverse factor `Q_{j,l}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TransverseMode {
    pub j: usize,
    pub harmonic: Harmonic,
}

impl TransverseMode {
    /// Azimuthal order `m` (0 for `N <= 2`).
    pub fn order(&self) -> usize {
        match self.harmonic {
            Harmonic::None => 0,
            Harmonic::Cos(m) | Harmonic::Sin(m) => m,
        }
    }
}

/// One basis mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Mode {
    pub j: usize,
    /// Index into the transverse family.
    pub t: usize,
    pub k: usize,
    pub degree: usize,
}

/// Values, gradients and Euler derivatives `y . grad` of every mode at a point.
#[derive(Debug, Clone)]
pub struct ModeEval {
    pub value: Vec<f64>,
    pub grad: Vec<Vec<f64>>,
    pub euler: Vec<f64>,
}

impl ModeEval {
    pub fn new(n_modes: usize, dim: usize) -> Self {
        Self {
            value: vec![0.0; n_modes],
            grad: vec![vec![0.0; n_modes]; dim],
            euler: vec![0.0; n_modes],
        }
    }
}

#[derive(Debug, Clone)]
enum TransverseFamily {
    Point,
    Segment(OrthoJacobi),
    Disk(Vec<OrthoJacobi>),
}

/// Truncated orthonormal family: `j <= J`, `j + k <= K`.
#[derive(Debug, Clone)]
pub struct ModeSet {
    params: ProblemParams,
    max_degree: usize,
    max_transverse: usize,
    transverse: Vec<TransverseMode>,
    modes: Vec<Mode>,
    axial: Vec<OrthoJacobi>,
    family: TransverseFamily,
    blocks: Vec<std::ops::Range<usize>>,
}

impl ModeSet {
    pub fn new(params: ProblemParams, max_degree: usize, max_transverse: usize) -> Self {
        let dim = params.dim();
        let alpha = params.alpha();
        let jmax = if dim == 1 { 0 } else { max_transverse.min(max_degree) };
        let mut transverse = Vec::new();
        for j in 0..=jmax {
            match dim {
                1 | 2 => transverse.push(TransverseMode {
                    j,
                    harmonic: Harmonic::None,
                }),
                _ => {
                    for m in ((j % 2)..=j).step_by(2) {
                        if m == 0 {
                            transverse.push(TransverseMode {
                                j,
                                harmonic: Harmonic::None,
                            });
                        } else {
                            transverse.push(TransverseMode {
                                j,
                                harmonic: Harmonic::Cos(m),
                            });
                            transverse.push(TransverseMode {
                                j,
                                harmonic: Harmonic::Sin(m),
                            });
                        }
                    }
                }
            }
        }
        let family = match dim {
            1 => TransverseFamily::Point,
            2 => TransverseFamily::Segment(OrthoJacobi::new(alpha, alpha, jmax)),
            _ => TransverseFamily::Disk(
                (0..=jmax)
                    .map(|m| OrthoJacobi::new(alpha, m as f64, jmax / 2 + 1))
                    .collect(),
            ),
        };
        let beta = params.beta();
        let axial = (0..=jmax)
            .map(|j| {
                let e = beta + j as f64;
                OrthoJacobi::new(e, e, max_degree - j)
            })
            .collect();
        let mut modes = Vec::new();
        let mut blocks = Vec::new();
        for (t, tm) in transverse.iter().enumerate() {
            let start = modes.len();
            for k in 0..=(max_degree - tm.j) {
                modes.push(Mode {
                    j: tm.j,
                    t,
                    k,
                    degree: tm.j + k,
                });
            }
            blocks.push(start..modes.len());
        }
        Self {
            params,
            max_degree,
            max_transverse: jmax,
            transverse,
            modes,
            axial,
            family,
            blocks,
        }
    }

    pub fn params(&self) -> &ProblemParams {
        &self.params
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn transverse_modes(&self) -> &[TransverseMode] {
        &self.transverse
    }

    /// Index ranges of modes sharing one transverse factor.
    pub fn blocks(&self) -> &[std::ops::Range<usize>] {
        &self.blocks
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn max_transverse(&self) -> usize {
        self.max_transverse
    }

    /// `Q`, `grad Q` and `zeta . grad Q - j Q` for each transverse mode.
    fn transverse_eval(&self, zeta: &[f64], q: &mut [f64], dq: &mut [[f64; 2]], r: &mut [f64]) {
        match &self.family {
            TransverseFamily::Point => {
                q[0] = 1.0;
                dq[0] = [0.0; 2];
                r[0] = 0.0;
            }
            TransverseFamily::Segment(rec) => {
                let jm = self.max_transverse;
                let mut v = vec![0.0; jm + 1];
                let mut d = vec![0.0; jm + 1];
                rec.values_and_derivatives(zeta[0], jm, &mut v, &mut d);
                for j in 0..=jm {
                    q[j] = v[j];
                    dq[j] = [d[j], 0.0];
                    r[j] = zeta[0] * d[j] - j as f64 * v[j];
                }
            }
            TransverseFamily::Disk(recs) => {
                let (x1, x2) = (zeta[0], zeta[1]);
                let t = x1 * x1 + x2 * x2;
                let xr = 2.0 * t - 1.0;
                let jm = self.max_transverse;
                // powers of z = x1 + i x2
                let mut re = vec![1.0; jm + 1];
                let mut im = vec![0.0; jm + 1];
                for m in 1..=jm {
                    re[m] = re[m - 1] * x1 - im[m - 1] * x2;
                    im[m] = re[m - 1] * x2 + im[m - 1] * x1;
                }
                let alpha = self.params.alpha();
                let mut v = vec![0.0; jm / 2 + 2];
                let mut d = vec![0.0; jm / 2 + 2];
                for (idx, tm) in self.transverse.iter().enumerate() {
                    let m = tm.order();
                    let kr = (tm.j - m) / 2;
                    recs[m].values_and_derivatives(xr, kr, &mut v, &mut d);
                    let pi_m = if m == 0 {
                        2.0 * std::f64::consts::PI
                    } else {
                        std::f64::consts::PI
                    };
                    let c = (2f64.powf(m as f64 + alpha + 2.0) / pi_m).sqrt();
                    let g = c * v[kr];
                    let gp = 2.0 * c * d[kr]; // dG/dt
                    let (h, hx, hy) = match tm.harmonic {
                        Harmonic::None => (1.0, 0.0, 0.0),
                        Harmonic::Cos(m) => (re[m], m as f64 * re[m - 1], -(m as f64) * im[m - 1]),
                        Harmonic::Sin(m) => (im[m], m as f64 * im[m - 1], m as f64 * re[m - 1]),
                    };
                    q[idx] = g * h;
                    dq[idx] = [2.0 * gp * x1 * h + g * hx, 2.0 * gp * x2 * h + g * hy];
                    // zeta . grad Q = (2 t G' + m G) H
                    r[idx] = (2.0 * t * gp + m as f64 * g) * h - tm.j as f64 * q[idx];
                }
            }
        }
    }

    /// Evaluate every mode (and optionally gradients) at a Cartesian point `y`, `|y| < 1`.
    pub fn eval(&self, y: &[f64], with_derivatives: bool, out: &mut ModeEval) {
        let dim = self.params.dim();
        let xi = y[0];
        let s2 = (1.0 - xi) * (1.0 + xi);
        let s = s2.max(0.0).sqrt();
        let mut zeta = [0.0; 2];
        for i in 1..dim {
            zeta[i - 1] = if s > 0.0 { y[i] / s } else { 0.0 };
        }
        let nt = self.transverse.len();
        let mut q = vec![0.0; nt];
        let mut dq = vec![[0.0; 2]; nt];
        let mut r = vec![0.0; nt];
        self.transverse_eval(&zeta[..dim - 1], &mut q, &mut dq, &mut r);

        let jm = self.max_transverse;
        let kmax = self.max_degree;
        let mut gv = vec![0.0; kmax + 1];
        let mut gd = vec![0.0; kmax + 1];
        let mut last_j = usize::MAX;
        for (t, block) in self.blocks.iter().enumerate() {
            let j = self.transverse[t].j;
            debug_assert!(j <= jm);
            if j != last_j {
                if with_derivatives {
                    self.axial[j].values_and_derivatives(xi, kmax - j, &mut gv, &mut gd);
                } else {
                    self.axial[j].values(xi, kmax - j, &mut gv);
                }
                last_j = j;
            }
            let sj = s.powi(j as i32);
            let sj1 = if j >= 1 { s.powi(j as i32 - 1) } else { 0.0 };
            let sj2 = if j >= 2 { s.powi(j as i32 - 2) } else { 0.0 };
            let (qv, rv) = (q[t], r[t]);
            for (k, idx) in block.clone().enumerate() {
                out.value[idx] = gv[k] * sj * qv;
                if with_derivatives {
                    let g = gv[k];
                    let gp = gd[k];
                    out.grad[0][idx] = gp * sj * qv + g * xi * sj2 * rv;
                    for i in 1..dim {
                        out.grad[i][idx] = g * sj1 * dq[t][i - 1];
                    }
                    out.euler[idx] = sj * qv * (xi * gp + j as f64 * g) + g * sj2 * rv;
                }
            }
        }
    }
}
