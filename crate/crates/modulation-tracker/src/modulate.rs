use std::sync::Arc;

use ball_geometry::{inner_phi, norm_h, Grid, StatePair};
use linearized_ops::{dual_fields, DualBasis};
use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use soliton_family::{d_kappa_star, frame, kappa_star, norm, Branch, Direction, SolitonParams};

use crate::ModulationError;

#[derive(Debug, Clone)]
pub struct ModulationOptions {
    /// Band parameter `A`: `-1 + 1/A <= nu/(1-|d|) <= A`.
    pub band: f64,
    /// Residual tolerance, relative to `max(||q||_H, 1)`.
    pub tol: f64,
    pub max_iter: usize,
    pub max_halvings: usize,
    /// `|d*|` at or below which the `W̄` basis is used.
    pub small_d: f64,
    /// Step for the finite-difference derivative of the dual fields.
    pub fd_step: f64,
    /// Frame branch carried over from a previous modulation.
    pub branch: Option<Branch>,
}

impl Default for ModulationOptions {
    fn default() -> Self {
        Self {
            band: 2.0,
            tol: 1e-10,
            max_iter: 30,
            max_halvings: 5,
            small_d: 0.1,
            fd_step: 1e-6,
            branch: None,
        }
    }
}

/// Terms of the proximity estimate, measured from the initial guess.
#[derive(Debug, Clone, Copy, Serialize, PartialEq)]
pub struct Proximity {
    pub input_distance: f64,
    pub q_norm: f64,
    pub zeta_shift: f64,
    pub sigma_shift: f64,
    pub d_shift: f64,
}

impl Proximity {
    pub fn total(&self) -> f64 {
        self.q_norm + self.zeta_shift + self.sigma_shift + self.d_shift
    }

    /// `total / input_distance`, the empirical constant of the estimate.
    pub fn ratio(&self) -> f64 {
        self.total() / self.input_distance
    }
}

#[derive(Debug, Clone)]
pub struct ModulationResult {
    pub params: SolitonParams,
    pub q: StatePair,
    /// `|pi_i^{d*}(q)|` in the basis used.
    pub residuals: Vec<f64>,
    pub newton_iters: usize,
    pub basis_used: DualBasis,
    pub branch: Branch,
    /// Max residual after each iteration.
    pub history: Vec<f64>,
    pub proximity: Proximity,
    pub warnings: Vec<String>,
}

fn dstar(d: &[f64], nu: f64) -> Vec<f64> {
    d.iter().map(|x| x / (1.0 + nu)).collect()
}

fn choose_basis(d: &[f64], nu: f64, opts: &ModulationOptions) -> DualBasis {
    if norm(&dstar(d, nu)) <= opts.small_d {
        DualBasis::WBar
    } else {
        DualBasis::W
    }
}

fn branch_of(d: &[f64], prev: Option<Branch>) -> Branch {
    frame(d, prev).branch
}

struct Eval {
    q: StatePair,
    pi: DVector<f64>,
}

fn evaluate(
    grid: &Arc<Grid>,
    v: &StatePair,
    d: &[f64],
    nu: f64,
    basis: DualBasis,
    branch: Option<Branch>,
) -> Result<Eval, ModulationError> {
    let q = v.sub(&kappa_star(grid, d, nu)?);
    let duals = dual_fields(grid, &dstar(d, nu), basis, branch)?;
    let pi = DVector::from_iterator(duals.len(), duals.iter().map(|w| inner_phi(w, &q).unwrap()));
    Ok(Eval { q, pi })
}

/// Jacobian of `(pi_i^{d*}(v - kappa*(d, nu)))_i` with respect to `(nu, d . e_1, ..., d . e_N)`.
pub fn newton_jacobian(
    grid: &Arc<Grid>,
    v: &StatePair,
    d: &[f64],
    nu: f64,
    basis: DualBasis,
    branch: Option<Branch>,
    fd_step: f64,
) -> Result<DMatrix<f64>, ModulationError> {
    let n = grid.dim();
    let fr = frame(d, branch);
    let br = Some(fr.branch);
    let ds = dstar(d, nu);
    let duals = dual_fields(grid, &ds, basis, br)?;
    let q = v.sub(&kappa_star(grid, d, nu)?);
    let with_q = norm_h(&q) > 0.0;
    let mut m = DMatrix::zeros(n + 1, n + 1);
    let mut dirs = vec![Direction::Nu];
    dirs.extend(fr.e.iter().map(|e| Direction::Along(e.clone())));
    for (col, dir) in dirs.iter().enumerate() {
        let dk = d_kappa_star(grid, d, nu, dir)?;
        // derivative of the dual fields through d* = d/(1+nu)
        let corr: Option<Vec<f64>> = if with_q {
            let h = fd_step;
            let (dp, dm) = match dir {
                Direction::Nu => (dstar(d, nu + h), dstar(d, nu - h)),
                Direction::Along(e) => {
                    let a: Vec<f64> = d.iter().zip(e).map(|(x, y)| x + h * y).collect();
                    let b: Vec<f64> = d.iter().zip(e).map(|(x, y)| x - h * y).collect();
                    (dstar(&a, nu), dstar(&b, nu))
                }
            };
            let wp = dual_fields(grid, &dp, basis, br)?;
            let wm = dual_fields(grid, &dm, basis, br)?;
            Some(
                wp.iter()
                    .zip(&wm)
                    .map(|(a, b)| inner_phi(&a.sub(b), &q).unwrap() / (2.0 * h))
                    .collect(),
            )
        } else {
            None
        };
        for i in 0..=n {
            let mut val = -inner_phi(&duals[i], &dk)?;
            if let Some(c) = &corr {
                val += c[i];
            }
            m[(i, col)] = val;
        }
    }
    Ok(m)
}

fn max_abs(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0, |a, x| a.max(x.abs()))
}

/// Apply a Newton step `delta = (dnu, delta_1..delta_N)` in the frame `e`.
fn apply_step(
    d: &[f64],
    nu: f64,
    e: &[Vec<f64>],
    delta: &DVector<f64>,
    small: bool,
) -> Option<(Vec<f64>, f64)> {
    let n = d.len();
    let r = norm(d);
    let new_nu = nu + delta[0];
    let new_d: Vec<f64> = if small || r == 0.0 {
        (0..n)
            .map(|c| d[c] + (0..n).map(|j| delta[j + 1] * e[j][c]).sum::<f64>())
            .collect()
    } else {
        // radial part through zeta = -argtanh|d|
        let new_r = (r.atanh() + delta[1] / (1.0 - r * r)).tanh();
        let mut dir: Vec<f64> = (0..n)
            .map(|c| r * e[0][c] + (1..n).map(|j| delta[j + 1] * e[j][c]).sum::<f64>())
            .collect();
        let len = norm(&dir);
        dir.iter_mut().for_each(|x| *x *= new_r / len);
        dir
    };
    let nr = norm(&new_d);
    if nr < 1.0 && new_nu > -1.0 + nr && new_nu.is_finite() {
        Some((new_d, new_nu))
    } else {
        None
    }
}

/// Newton iteration for `(d, nu)` such that `q = v - kappa*(d, nu)` has vanishing projections.
pub fn modulate(
    v: &StatePair,
    d_init: &[f64],
    nu_init: f64,
    opts: &ModulationOptions,
) -> Result<ModulationResult, ModulationError> {
    let grid = v.grid().clone();
    let start = SolitonParams::new(d_init.to_vec(), nu_init)?;
    let mut warnings = Vec::new();
    let k0 = kappa_star(&grid, d_init, nu_init)?;
    let input_distance = norm_h(&v.sub(&k0));
    if input_distance > 0.1 * norm_h(&k0) {
        warnings.push(format!(
            "initial guess is far from the input: distance {input_distance:.3e} vs soliton norm {:.3e}",
            norm_h(&k0)
        ));
    }
    let mut d = d_init.to_vec();
    let mut nu = nu_init;
    let mut branch = opts.branch;
    let mut history = Vec::new();
    let mut iters = 0;
    let mut basis = choose_basis(&d, nu, opts);
    let mut ev = evaluate(&grid, v, &d, nu, basis, branch)?;
    loop {
        iters += 1;
        let res = max_abs(&ev.pi);
        history.push(res);
        let tol = opts.tol * norm_h(&ev.q).max(1.0);
        if res <= tol {
            break;
        }
        if iters > opts.max_iter {
            return Err(ModulationError::NoConvergence(format!(
                "residual {res:.3e} after {} iterations",
                opts.max_iter
            )));
        }
        let fr = frame(&d, branch);
        branch = Some(fr.branch);
        let m = newton_jacobian(&grid, v, &d, nu, basis, branch, opts.fd_step)?;
        let delta = m.lu().solve(&(-&ev.pi)).ok_or(ModulationError::SingularJacobian)?;
        let small = basis == DualBasis::WBar;
        let mut scale = 1.0;
        let mut accepted = None;
        for _ in 0..=opts.max_halvings {
            if let Some((nd, nn)) = apply_step(&d, nu, &fr.e, &(&delta * scale), small) {
                let cand = evaluate(&grid, v, &nd, nn, basis, branch)?;
                if max_abs(&cand.pi) < res {
                    accepted = Some((nd, nn, cand));
                    break;
                }
            }
            scale *= 0.5;
        }
        match accepted {
            Some((nd, nn, cand)) => {
                d = nd;
                nu = nn;
                ev = cand;
                branch = Some(branch_of(&d, branch));
            }
            None => {
                return Err(ModulationError::NoConvergence(format!(
                    "no residual decrease over {} damped steps (residual {res:.3e})",
                    opts.max_halvings
                )))
            }
        }
        let nb = choose_basis(&d, nu, opts);
        if nb != basis {
            basis = nb;
            ev = evaluate(&grid, v, &d, nu, basis, branch)?;
        }
    }
    let params = SolitonParams::new(d.clone(), nu)?;
    let ratio = params.band_ratio();
    if ratio < -1.0 + 1.0 / opts.band || ratio > opts.band {
        return Err(ModulationError::BandViolation { ratio, a: opts.band });
    }
    let rbar = start.abs_d();
    let proximity = Proximity {
        input_distance,
        q_norm: norm_h(&ev.q),
        zeta_shift: (params.abs_d().atanh() - rbar.atanh()).abs(),
        sigma_shift: (ratio - start.band_ratio()).abs(),
        d_shift: norm(&d.iter().zip(d_init).map(|(a, b)| a - b).collect::<Vec<_>>()) / (1.0 - rbar).sqrt(),
    };
    Ok(ModulationResult {
        residuals: ev.pi.iter().map(|x| x.abs()).collect(),
        q: ev.q,
        params,
        newton_iters: iters,
        basis_used: basis,
        branch: branch_of(&d, branch),
        history,
        proximity,
        warnings,
    })
}
