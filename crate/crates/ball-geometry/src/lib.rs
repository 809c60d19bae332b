//! Grids, the weight `rho(y) = (1 - |y|^2)^alpha`, quadrature and the norms of the
//! weighted function spaces on the unit ball of dimension 1, 2 or 3.

pub mod field;
pub mod grid;
pub mod integral;
pub mod io;
pub mod jacobi;
pub mod modes;
mod params;

pub use field::{
    gradient_form, inner_phi, inner_phi_ibp, inner_rho, integrate_rho, norm_h, norm_h0_sq,
    norm_singular_l2, Field, StatePair,
};
pub use grid::{make_grid, Grid, NodeSet};
pub use integral::{classify_regime, integral_table, rescaled_integral, Regime};
pub use io::FieldTable;
pub use params::ProblemParams;
pub use nalgebra::{DMatrix, DVector};

#[derive(Debug, thiserror::Error)]
pub enum GeometryError {
    #[error("parameter domain: {0}")]
    Domain(String),
    #[error("resolution: {0}")]
    Resolution(String),
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("accuracy: {0}")]
    Accuracy(String),
    #[error("csv: {0}")]
    Csv(String),
}
