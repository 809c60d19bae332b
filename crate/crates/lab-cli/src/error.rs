use std::fmt;

/// Pipeline stage named in every error message.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Config,
    Grid,
    Spectrum,
    Soliton,
    Modulate,
    Evolve,
    Track,
    Trap,
    ZeroStability,
    Tables,
    Output,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::Config => "config",
            Stage::Grid => "grid",
            Stage::Spectrum => "spectrum",
            Stage::Soliton => "soliton",
            Stage::Modulate => "modulate",
            Stage::Evolve => "evolve",
            Stage::Track => "track",
            Stage::Trap => "trap",
            Stage::ZeroStability => "zero-stability",
            Stage::Tables => "tables",
            Stage::Output => "output",
        }
    }

    pub fn err(self, e: impl fmt::Display) -> LabError {
        LabError { stage: self, message: e.to_string().trim().replace('\n', " ") }
    }
}

#[derive(Debug, thiserror::Error)]
#[error("[{}] {message}", stage.name())]
pub struct LabError {
    pub stage: Stage,
    pub message: String,
}
