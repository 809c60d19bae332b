//! Decomposition `w = kappa*(d, nu) + q` with `pi_i^{d*}(q) = 0`, `d* = d/(1 + nu)`.

mod fit;
mod lyapunov;
mod modulate;
mod track;

pub use fit::{fit_rate, RateFit};
pub use lyapunov::{antiderivative_f, lyapunov_pair};
pub use modulate::{modulate, newton_jacobian, ModulationOptions, ModulationResult, Proximity};
pub use track::{classify, track, ClassifyOptions, Saturation, Track, TrackOptions, TrackPoint, TrapOutcome, TrapTag};

use ball_geometry::GeometryError;
use linearized_ops::LinearError;
use soliton_family::SolitonError;

#[derive(Debug, thiserror::Error)]
pub enum ModulationError {
    #[error("Newton iteration did not converge: {0}")]
    NoConvergence(String),
    #[error("parameters left the admissible band: nu/(1-|d|) = {ratio}, A = {a}")]
    BandViolation { ratio: f64, a: f64 },
    #[error("singular Jacobian")]
    SingularJacobian,
    #[error("fit: {0}")]
    Fit(String),
    #[error(transparent)]
    Linear(#[from] LinearError),
    #[error(transparent)]
    Soliton(#[from] SolitonError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}
