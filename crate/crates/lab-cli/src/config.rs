//! Experiment configuration: a TOML file plus `key=value` overrides.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::{LabError, Stage};

/// Version of the JSON summary layout written next to every run.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Spectrum,
    Modulate,
    Evolve,
    Trap,
    ZeroStability,
    Tables,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Spectrum => "spectrum",
            Kind::Modulate => "modulate",
            Kind::Evolve => "evolve",
            Kind::Trap => "trap",
            Kind::ZeroStability => "zero-stability",
            Kind::Tables => "tables",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Problem {
    pub dim: usize,
    pub p: f64,
}

impl Default for Problem {
    fn default() -> Self {
        Self { dim: 2, p: 3.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSpec {
    /// Axial modes; total polynomial degree is `radial - 1`.
    pub radial: usize,
    /// Transverse degrees kept (ignored for `dim = 1`).
    pub angular: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { radial: 16, angular: 4 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Soliton {
    /// Empty means `0.5 e_1`.
    pub d: Vec<f64>,
    pub nu: f64,
}

impl Default for Soliton {
    fn default() -> Self {
        Self { d: Vec::new(), nu: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PerturbationMode {
    None,
    /// Along the unstable eigenfield `F0(d)`.
    Unstable,
    /// Random field projected onto the stable subspace at `d`.
    Stable,
    /// Random band-limited field, unprojected.
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Perturbation {
    pub mode: PerturbationMode,
    pub amplitude: f64,
}

impl Default for Perturbation {
    fn default() -> Self {
        Self { mode: PerturbationMode::Stable, amplitude: 1e-3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Evolve {
    /// Step; absent means the grid default.
    pub ds: Option<f64>,
    pub s_max: f64,
    pub record_every: usize,
    /// Norm cap flagging blow-up; absent means `1e3 kappa0`.
    pub blowup_threshold: Option<f64>,
}

impl Default for Evolve {
    fn default() -> Self {
        Self { ds: None, s_max: 16.0, record_every: 100, blowup_threshold: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Modulation {
    pub band: f64,
    pub tol: f64,
    pub small_d: f64,
    pub eta: f64,
    pub eps0: f64,
    pub eta0: f64,
    /// Modulate every `stride`-th recorded sample when tracking.
    pub stride: usize,
}

impl Default for Modulation {
    fn default() -> Self {
        Self { band: 2.0, tol: 1e-10, small_d: 0.1, eta: 0.1, eps0: 0.1, eta0: 0.05, stride: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Trap {
    pub probe_times: Vec<f64>,
    pub secant_iters: usize,
    pub unstable_s_max: f64,
    pub fit_window: [f64; 2],
    pub min_r2: f64,
    pub decay_floor: f64,
    pub nu_tol: f64,
}

impl Default for Trap {
    fn default() -> Self {
        Self {
            probe_times: vec![6.0, 12.0],
            secant_iters: 4,
            unstable_s_max: 40.0,
            fit_window: [5.0, 15.0],
            min_r2: 0.99,
            decay_floor: 1e-6,
            nu_tol: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Zero {
    pub count: usize,
    pub amplitude: f64,
    pub s_max: f64,
    pub fit_window: [f64; 2],
    /// `h` is checked for monotone decrease from this time on.
    pub monotone_from: f64,
}

impl Default for Zero {
    fn default() -> Self {
        Self { count: 20, amplitude: 1e-2, s_max: 12.0, fit_window: [2.0, 12.0], monotone_from: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tables {
    pub gamma: f64,
    pub beta: f64,
    pub d: Vec<f64>,
}

impl Default for Tables {
    fn default() -> Self {
        Self { gamma: 0.0, beta: 1.0, d: vec![0.9, 0.99, 0.999] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub kind: Kind,
    pub seed: u64,
    pub problem: Problem,
    pub grid: GridSpec,
    pub soliton: Soliton,
    pub perturbation: Perturbation,
    pub evolve: Evolve,
    pub modulation: Modulation,
    pub trap: Trap,
    pub zero: Zero,
    pub tables: Tables,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            kind: Kind::Spectrum,
            seed: 7,
            problem: Problem::default(),
            grid: GridSpec::default(),
            soliton: Soliton::default(),
            perturbation: Perturbation::default(),
            evolve: Evolve::default(),
            modulation: Modulation::default(),
            trap: Trap::default(),
            zero: Zero::default(),
            tables: Tables::default(),
        }
    }
}

/// Parse a right-hand side as a TOML value, falling back to a bare string.
fn parse_value(raw: &str) -> toml::Value {
    let doc = format!("v = {raw}");
    match toml::from_str::<toml::Table>(&doc) {
        Ok(mut t) => t.remove("v").unwrap_or_else(|| toml::Value::String(raw.into())),
        Err(_) => toml::Value::String(raw.into()),
    }
}

/// Set `a.b.c = value` in a TOML table, creating intermediate tables.
pub fn apply_override(table: &mut toml::Table, assignment: &str) -> Result<(), LabError> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| Stage::Config.err(format!("override `{assignment}` is not key=value")))?;
    let path: Vec<&str> = key.trim().split('.').collect();
    if path.iter().any(|p| p.is_empty()) {
        return Err(Stage::Config.err(format!("bad key `{key}`")));
    }
    let mut cur = table;
    for part in &path[..path.len() - 1] {
        let entry = cur
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| Stage::Config.err(format!("`{part}` in `{key}` is not a table")))?;
    }
    cur.insert(path[path.len() - 1].to_string(), parse_value(raw.trim()));
    Ok(())
}

impl ExperimentConfig {
    /// Parse TOML text, apply overrides in order, then validate.
    pub fn from_toml_with(text: &str, overrides: &[String]) -> Result<Self, LabError> {
        let mut table: toml::Table = toml::from_str(text).map_err(|e| Stage::Config.err(e))?;
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        let cfg: Self = table.try_into().map_err(|e: toml::de::Error| Stage::Config.err(e))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is plain data")
    }

    /// Soliton parameter with the `0.5 e_1` default filled in.
    pub fn d(&self) -> Vec<f64> {
        if self.soliton.d.is_empty() {
            let mut d = vec![0.0; self.problem.dim];
            d[0] = 0.5;
            d
        } else {
            self.soliton.d.clone()
        }
    }

    pub fn validate(&self) -> Result<(), LabError> {
        let bad = |m: String| Err(Stage::Config.err(m));
        ball_geometry::ProblemParams::new(self.problem.dim, self.problem.p).map_err(|e| Stage::Config.err(e))?;
        if self.grid.radial < 8 || self.grid.angular < 1 {
            return bad(format!("grid {}x{} below the minimum 8x1", self.grid.radial, self.grid.angular));
        }
        let d = self.d();
        if d.len() != self.problem.dim {
            return bad(format!("soliton.d has {} components for dim {}", d.len(), self.problem.dim));
        }
        soliton_family::SolitonParams::new(d, self.soliton.nu).map_err(|e| Stage::Config.err(e))?;
        if !self.perturbation.amplitude.is_finite() {
            return bad("perturbation.amplitude must be finite".into());
        }
        let ev = &self.evolve;
        if !(ev.s_max > 0.0) || ev.record_every == 0 || ev.ds.is_some_and(|x| !(x > 0.0)) {
            return bad("evolve needs s_max > 0, ds > 0 and record_every >= 1".into());
        }
        let m = &self.modulation;
        if !(m.band >= 1.0) || !(m.tol > 0.0) || !(m.eta > 0.0) || !(m.eps0 > 0.0) || m.stride == 0 {
            return bad("modulation needs band >= 1, tol, eta, eps0 > 0 and stride >= 1".into());
        }
        let t = &self.trap;
        if t.probe_times.iter().any(|s| !(*s > 0.0)) || !(t.fit_window[0] < t.fit_window[1]) {
            return bad("trap probe times must be positive and the fit window increasing".into());
        }
        let z = &self.zero;
        if z.count == 0 || !(z.amplitude > 0.0) || !(z.s_max > 0.0) || !(z.fit_window[0] < z.fit_window[1]) {
            return bad("zero-stability needs count >= 1, amplitude > 0, s_max > 0 and an increasing window".into());
        }
        let tb = &self.tables;
        if !(tb.gamma > -1.0) || tb.d.iter().any(|x| !(x.abs() < 1.0)) {
            return bad("tables need gamma > -1 and |d| < 1".into());
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form, hex encoded.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("config is plain data");
        Sha256::digest(&json).iter().map(|b| format!("{b:02x}")).collect()
    }
}
