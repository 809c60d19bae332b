//! The one-dimensional integral `I(d) = ∫_{-1}^{1} (1 - xi^2)^gamma / (1 + d xi)^beta dxi`
//! and its behaviour as `|d| -> 1`.

use crate::GeometryError;

/// Asymptotic regime of `I(d)` as `|d| -> 1`, fixed by the sign of `gamma + 1 - beta`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// `gamma + 1 - beta > 0`: `I(d)` has a finite limit.
    Finite,
    /// `gamma + 1 - beta = 0`: `I(d) ~ C |log(1 - |d|)|`.
    Log,
    /// `gamma + 1 - beta < 0`: `I(d) ~ C (1 - |d|)^{gamma + 1 - beta}`.
    Power,
}

impl Regime {
    pub fn name(&self) -> &'static str {
        match self {
            Regime::Finite => "finite",
            Regime::Log => "log",
            Regime::Power => "power",
        }
    }
}

pub fn classify_regime(gamma: f64, beta: f64) -> Regime {
    let e = gamma + 1.0 - beta;
    if e.abs() < 1e-12 {
        Regime::Log
    } else if e > 0.0 {
        Regime::Finite
    } else {
        Regime::Power
    }
}

/// `I(d)` divided by its leading growth: bounded with a positive limit in every regime.
pub fn rescaled_integral(gamma: f64, beta: f64, d: f64) -> Result<f64, GeometryError> {
    let v = integral_table(gamma, beta, d)?;
    let gap = 1.0 - d.abs();
    Ok(match classify_regime(gamma, beta) {
        Regime::Finite => v,
        Regime::Log => v / gap.ln().abs(),
        Regime::Power => v * gap.powf(beta - gamma - 1.0),
    })
}

/// Adaptive tanh-sinh quadrature of `I(d)`; endpoint distances are carried in
/// complement form so that `1 - xi^2` and `1 + d xi` keep full relative accuracy.
pub fn integral_table(gamma: f64, beta: f64, d: f64) -> Result<f64, GeometryError> {
    if !(gamma > -1.0) {
        return Err(GeometryError::Domain(format!("gamma = {gamma} must exceed -1")));
    }
    if !(d.abs() < 1.0) {
        return Err(GeometryError::Domain(format!("d = {d} must lie in (-1, 1)")));
    }
    let half_pi = std::f64::consts::FRAC_PI_2;
    // Integrand at xi = sign * (1 - c), c = distance to the endpoint.
    let eval = |sign: f64, c: f64, cbar: f64| -> f64 {
        // 1 - xi^2 = c * (2 - c) = c * cbar
        let base = c * cbar;
        let dxi = sign * d;
        let lin = if dxi < 0.0 {
            (1.0 - d.abs()) + d.abs() * c
        } else {
            1.0 + dxi * (1.0 - c)
        };
        base.powf(gamma) / lin.powf(beta)
    };
    let term = |t: f64| -> f64 {
        let u = half_pi * t.sinh();
        let e = (-2.0 * u.abs()).exp();
        let c = 2.0 * e / (1.0 + e); // 1 - |xi|
        let cbar = 2.0 / (1.0 + e); // 1 + |xi|
        let w = half_pi * t.cosh() * 4.0 * e / (1.0 + e).powi(2);
        if c <= 0.0 || w == 0.0 {
            return 0.0;
        }
        let sign = if t >= 0.0 { 1.0 } else { -1.0 };
        w * eval(sign, c, cbar)
    };
    let tmax = 6.5;
    let mut h = 0.5;
    let mut total = term(0.0);
    let mut k = 1;
    while (k as f64) * h <= tmax {
        let t = k as f64 * h;
        total += term(t) + term(-t);
        k += 1;
    }
    let mut prev = total * h;
    for _level in 0..14 {
        h /= 2.0;
        let mut add = 0.0;
        let mut k = 1;
        while (k as f64) * h <= tmax {
            let t = k as f64 * h;
            add += term(t) + term(-t);
            k += 2;
        }
        total += add;
        let cur = total * h;
        if !cur.is_finite() {
            break;
        }
        if (cur - prev).abs() <= 1e-13 * cur.abs().max(1e-300) {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(GeometryError::Accuracy(format!(
        "tanh-sinh quadrature of I(d) did not converge for gamma = {gamma}, beta = {beta}, d = {d}"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_integrand() {
        for d in [-0.9, 0.0, 0.3, 0.999] {
            assert!((integral_table(0.0, 0.0, d).unwrap() - 2.0).abs() < 1e-13);
        }
    }

    #[test]
    fn log_case_antiderivative() {
        for d in [0.1f64, 0.5, 0.9, 0.999] {
            let exact = ((1.0 + d) / (1.0 - d)).ln() / d;
            let v = integral_table(0.0, 1.0, d).unwrap();
            assert!((v - exact).abs() < 1e-12 * exact, "{d}: {v} vs {exact}");
        }
    }

    #[test]
    fn endpoint_singularity() {
        // ∫ (1 - xi^2)^{-1/2} = pi
        let v = integral_table(-0.5, 0.0, 0.0).unwrap();
        assert!((v - std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_gamma() {
        assert!(integral_table(-1.0, 0.0, 0.0).is_err());
        assert!(integral_table(0.0, 0.0, 1.0).is_err());
    }
}
