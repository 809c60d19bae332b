//! The operator `L w = Δw - Σ y_i y_j ∂_ij w - (2(p+1)/(p-1)) y . grad w` on `L2_rho`:
//! assembled eigen-decomposition, resolvent `(-L + 1)^{-1}`, and the coercivity
//! and Hardy–Sobolev checks built on it.

use std::io::Write;
use std::ops::Range;
use std::sync::Arc;

use ball_geometry::{norm_h0_sq, Field, GeometryError, Grid, ProblemParams};
use nalgebra::{DMatrix, DVector, SymmetricEigen};

#[derive(Debug, thiserror::Error)]
pub enum SpectralError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("eigen-solver failure in block {block}: {detail}")]
    Numerical { block: usize, detail: String },
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone)]
struct BlockEig {
    range: Range<usize>,
    mass: DMatrix<f64>,
    /// Mass-orthonormal eigenvectors, ascending stiffness.
    vecs: DMatrix<f64>,
    /// Eigenvalues of `-L` (ascending).
    vals: DVector<f64>,
}

/// Eigenpairs `(gamma_n, h_n)` of `L`, one symmetric block per transverse factor.
#[derive(Debug, Clone)]
pub struct SpectralBasis {
    grid: Arc<Grid>,
    blocks: Vec<BlockEig>,
    /// `(block, column)` of each eigenpair, sorted by descending `gamma`.
    order: Vec<(usize, usize)>,
    gamma: Vec<f64>,
}

/// Assemble mass and stiffness per block on the main nodes, symmetrize and solve
/// the generalized symmetric eigenproblem.
pub fn build_basis(grid: &Arc<Grid>) -> Result<SpectralBasis, SpectralError> {
    let main = grid.main();
    let mut blocks = Vec::new();
    for (bi, range) in grid.modes().blocks().iter().enumerate() {
        let r = range.clone();
        let nb = r.len();
        let phi = main.phi.rows(r.start, nb);
        let wphi = main.wphi.rows(r.start, nb);
        let mut mass = &wphi * phi.transpose();
        let w = &main.weights;
        let mut stiff = DMatrix::<f64>::zeros(nb, nb);
        for g in &main.grad {
            let gb = g.rows(r.start, nb);
            let mut wg = gb.clone_owned();
            for (q, mut col) in wg.column_iter_mut().enumerate() {
                col *= w[q];
            }
            stiff += &wg * gb.transpose();
        }
        let eb = main.euler.rows(r.start, nb);
        let mut we = eb.clone_owned();
        for (q, mut col) in we.column_iter_mut().enumerate() {
            col *= w[q];
        }
        stiff -= &we * eb.transpose();
        mass = (&mass + mass.transpose()) * 0.5;
        stiff = (&stiff + stiff.transpose()) * 0.5;

        let chol = mass.clone().cholesky().ok_or_else(|| SpectralError::Numerical {
            block: bi,
            detail: format!(
                "mass matrix not positive definite (min diagonal {:.3e})",
                mass.diagonal().min()
            ),
        })?;
        let l = chol.l();
        let linv = l
            .clone()
            .try_inverse()
            .ok_or_else(|| SpectralError::Numerical {
                block: bi,
                detail: "singular Cholesky factor".into(),
            })?;
        let c = &linv * &stiff * linv.transpose();
        let c = (&c + c.transpose()) * 0.5;
        let eig = SymmetricEigen::new(c);
        if eig.eigenvalues.iter().any(|v| !v.is_finite()) {
            return Err(SpectralError::Numerical {
                block: bi,
                detail: "non-finite eigenvalue".into(),
            });
        }
        let mut idx: Vec<usize> = (0..nb).collect();
        idx.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
        let vals = DVector::from_iterator(nb, idx.iter().map(|&i| eig.eigenvalues[i]));
        let y = DMatrix::from_fn(nb, nb, |row, col| eig.eigenvectors[(row, idx[col])]);
        let mut vecs = linv.transpose() * y;
        // fix signs: largest entry positive
        for mut col in vecs.column_iter_mut() {
            let imax = col.iamax();
            if col[imax] < 0.0 {
                col *= -1.0;
            }
        }
        blocks.push(BlockEig {
            range: r,
            mass,
            vecs,
            vals,
        });
    }
    let mut order: Vec<(usize, usize)> = blocks
        .iter()
        .enumerate()
        .flat_map(|(b, blk)| (0..blk.vals.len()).map(move |c| (b, c)))
        .collect();
    order.sort_by(|a, b| {
        let va = blocks[a.0].vals[a.1];
        let vb = blocks[b.0].vals[b.1];
        va.partial_cmp(&vb).unwrap().then(a.cmp(b))
    });
    let gamma = order.iter().map(|&(b, c)| -blocks[b].vals[c]).collect();
    Ok(SpectralBasis {
        grid: grid.clone(),
        blocks,
        order,
        gamma,
    })
}

impl SpectralBasis {
    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn params(&self) -> &ProblemParams {
        self.grid.params()
    }

    pub fn count(&self) -> usize {
        self.gamma.len()
    }

    /// Eigenvalues `gamma_0 >= gamma_1 >= ...`.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.gamma
    }

    /// Transverse degree `j` of the block holding eigenpair `n`.
    pub fn transverse_degree(&self, n: usize) -> usize {
        let (b, _) = self.order[n];
        self.grid.modes().modes()[self.blocks[b].range.start].j
    }

    /// Eigenfield `h_n` (L2_rho-normalised).
    pub fn eigenfield(&self, n: usize) -> Field {
        let (b, c) = self.order[n];
        let blk = &self.blocks[b];
        let mut coeffs = DVector::zeros(self.grid.n_modes());
        coeffs
            .rows_mut(blk.range.start, blk.range.len())
            .copy_from(&blk.vecs.column(c));
        Field::from_coeffs(&self.grid, coeffs)
    }

    /// Apply `g(lambda)` (a function of the `-L` eigenvalue) to the coefficients.
    fn spectral_apply(&self, c: &DVector<f64>, g: impl Fn(f64) -> f64) -> DVector<f64> {
        let mut out = DVector::zeros(c.len());
        for blk in &self.blocks {
            let n = blk.range.len();
            let cb = c.rows(blk.range.start, n);
            let proj = blk.vecs.tr_mul(&(&blk.mass * cb));
            let scaled = DVector::from_iterator(n, proj.iter().zip(blk.vals.iter()).map(|(a, l)| a * g(*l)));
            out.rows_mut(blk.range.start, n).copy_from(&(&blk.vecs * scaled));
        }
        out
    }

    /// `L f`.
    pub fn apply_l(&self, f: &Field) -> Result<Field, SpectralError> {
        self.check(f)?;
        Ok(Field::from_coeffs(&self.grid, self.spectral_apply(f.coeffs(), |l| -l)))
    }

    /// `v` with `-L v + v = f`.
    pub fn solve_resolvent(&self, f: &Field) -> Result<Field, SpectralError> {
        self.check(f)?;
        Ok(Field::from_coeffs(
            &self.grid,
            self.spectral_apply(f.coeffs(), |l| 1.0 / (1.0 + l)),
        ))
    }

    /// Coefficient-level resolvent for callers that assemble right-hand sides weakly.
    pub fn resolvent_coeffs(&self, rhs: &DVector<f64>) -> DVector<f64> {
        self.spectral_apply(rhs, |l| 1.0 / (1.0 + l))
    }

    /// Coefficient-level `-L + 1`.
    pub fn shifted_coeffs(&self, c: &DVector<f64>) -> DVector<f64> {
        self.spectral_apply(c, |l| 1.0 + l)
    }

    /// Coefficient-level `L`.
    pub fn l_coeffs(&self, c: &DVector<f64>) -> DVector<f64> {
        self.spectral_apply(c, |l| -l)
    }

    /// Per-mode `gamma` in grid mode order (used by the time stepper).
    pub fn mode_gamma(&self) -> DVector<f64> {
        let mut out = DVector::zeros(self.grid.n_modes());
        for blk in &self.blocks {
            for (c, col) in blk.vecs.column_iter().enumerate() {
                let row = col.iamax();
                out[blk.range.start + row] = -blk.vals[c];
            }
        }
        out
    }

    /// Fraction of L2 energy carried by the highest-degree shell: a truncation indicator.
    pub fn tail_energy(&self, f: &Field) -> f64 {
        let kmax = self.grid.modes().max_degree();
        let total = f.norm_l2().powi(2);
        if total == 0.0 {
            return 0.0;
        }
        let tail: f64 = self
            .grid
            .modes()
            .modes()
            .iter()
            .zip(f.coeffs().iter())
            .filter(|(m, _)| m.degree + 1 >= kmax)
            .map(|(_, c)| c * c)
            .sum();
        tail / total
    }

    fn check(&self, f: &Field) -> Result<(), SpectralError> {
        if Arc::ptr_eq(f.grid(), &self.grid) {
            Ok(())
        } else {
            Err(GeometryError::GridMismatch.into())
        }
    }

    /// Remove the components along eigenpairs with `gamma` in the two top eigenspaces
    /// (constants and the coordinate functions).
    pub fn project_out_low_modes(&self, f: &Field) -> Result<Field, SpectralError> {
        self.check(f)?;
        let p = self.params();
        let g1 = p.eigenvalue(1);
        let tol = 1e-8 * g1.abs();
        let mut c = f.coeffs().clone();
        for n in 0..self.count() {
            let g = self.gamma[n];
            if g.abs() < tol || (g - g1).abs() < tol {
                let h = self.eigenfield(n);
                let a = h.coeffs().dot(&c);
                c -= h.coeffs() * a;
            }
        }
        Ok(Field::from_coeffs(&self.grid, c))
    }

    /// Rayleigh quotient `-<f, L f> / <f, f>` after removing the top two eigenspaces.
    pub fn coercivity_gap(&self, f: &Field) -> Result<f64, SpectralError> {
        let before = f.norm_l2();
        let g = self.project_out_low_modes(f)?;
        let n2 = g.norm_l2().powi(2);
        if n2 <= (1e-14 * before).powi(2) || n2 == 0.0 {
            return Err(SpectralError::Degenerate(
                "field vanishes after removing the constant and linear modes".into(),
            ));
        }
        let lg = self.spectral_apply(g.coeffs(), |l| l);
        Ok(g.coeffs().dot(&lg) / n2)
    }

    /// Write `n, transverse_degree, gamma, closed_form, deviation` for every eigenpair.
    pub fn write_eigenvalues_csv<W: Write>(&self, mut out: W) -> Result<(), SpectralError> {
        writeln!(out, "n,transverse_degree,gamma,closed_form,deviation")?;
        let p = self.params();
        for (n, g) in self.gamma.iter().enumerate() {
            let deg = self.closed_form_degree(n);
            let target = p.eigenvalue(deg);
            writeln!(
                out,
                "{n},{},{g:.12e},{target:.12e},{:.3e}",
                self.transverse_degree(n),
                g - target
            )?;
        }
        Ok(())
    }

    /// Write the first `count` eigenfields at the main nodes.
    pub fn write_eigenfields_csv<W: Write>(&self, count: usize, mut out: W) -> Result<(), SpectralError> {
        let count = count.min(self.count());
        let dim = self.grid.dim();
        let fields: Vec<Field> = (0..count).map(|n| self.eigenfield(n)).collect();
        let mut header: Vec<String> = (1..=dim).map(|i| format!("y{i}")).collect();
        header.push("weight".into());
        header.extend((0..count).map(|n| format!("h{n}")));
        writeln!(out, "{}", header.join(","))?;
        for q in 0..self.grid.n_nodes() {
            let mut row: Vec<String> = self.grid.node(q).iter().map(|x| format!("{x:.12e}")).collect();
            row.push(format!("{:.12e}", self.grid.weights()[q]));
            row.extend(fields.iter().map(|f| format!("{:.12e}", f.values()[q])));
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }

    /// Polynomial degree whose closed-form eigenvalue is nearest to `gamma_n`.
    pub fn closed_form_degree(&self, n: usize) -> usize {
        let p = self.params();
        let g = self.gamma[n];
        let b = p.damping();
        // solve d(d + b) = -g
        let d = (-b + (b * b - 4.0 * g).sqrt()) / 2.0;
        d.round().max(0.0) as usize
    }
}

/// `(∫|f|^{p+1} rho, (∫(|grad f|^2 - (y . grad f)^2 + f^2) rho)^{(p+1)/2})`.
pub fn hardy_sobolev_check(f: &Field) -> (f64, f64) {
    let p = f.grid().params().p();
    let lhs = f
        .values()
        .iter()
        .zip(f.grid().weights().iter())
        .map(|(v, w)| w * v.abs().powf(p + 1.0))
        .sum();
    let rhs = norm_h0_sq(f).max(0.0).powf((p + 1.0) / 2.0);
    (lhs, rhs)
}

/// Distinct eigenvalue levels (merged within a relative tolerance) with multiplicities.
pub fn distinct_levels(gamma: &[f64], rel_tol: f64) -> Vec<(f64, usize)> {
    let mut out: Vec<(f64, usize)> = Vec::new();
    for &g in gamma {
        match out.last_mut() {
            Some((v, m)) if (g - *v).abs() <= rel_tol * v.abs().max(1.0) => *m += 1,
            _ => out.push((g, 1)),
        }
    }
    out
}
