use serde::Serialize;

use crate::ModulationError;

/// Least-squares fit `log value = c - mu s`.
#[derive(Debug, Clone, Copy, Serialize, PartialEq)]
pub struct RateFit {
    pub mu: f64,
    pub intercept: f64,
    pub r2: f64,
    pub points: usize,
}

/// Fit over samples with `window.0 <= s <= window.1`.
pub fn fit_rate(series: &[(f64, f64)], window: (f64, f64)) -> Result<RateFit, ModulationError> {
    let pts: Vec<(f64, f64)> = series
        .iter()
        .filter(|(s, _)| *s >= window.0 && *s <= window.1)
        .copied()
        .collect();
    if pts.len() < 2 {
        return Err(ModulationError::Fit(format!("only {} samples in window", pts.len())));
    }
    if let Some((s, v)) = pts.iter().find(|(_, v)| !(*v > 0.0) || !v.is_finite()) {
        return Err(ModulationError::Fit(format!("nonpositive value {v} at s = {s}")));
    }
    let n = pts.len() as f64;
    let ms = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let ml = pts.iter().map(|p| p.1.ln()).sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (s, v) in &pts {
        let dx = s - ms;
        let dy = v.ln() - ml;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return Err(ModulationError::Fit("degenerate abscissae".into()));
    }
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok(RateFit {
        mu: -slope,
        intercept: ml - slope * ms,
        r2,
        points: pts.len(),
    })
}
