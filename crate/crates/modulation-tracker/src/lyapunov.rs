use ball_geometry::{DVector, StatePair};
use soliton_family::kappa_star_value;

/// `F(q) = |k + q|^{p+1}/(p+1) - k^{p+1}/(p+1) - k^p q - p/2 k^{p-1} q^2` for `k > 0`,
/// with a binomial series for small `q/k` to avoid cancellation.
pub fn antiderivative_f(p: f64, k: f64, q: f64) -> f64 {
    let t = q / k;
    if t.abs() < 1e-2 {
        // (1+t)^{p+1}/(p+1) beyond second order: Σ_{m>=3} C(p+1, m) t^m / (p+1)
        let mut coef = (p + 1.0) * p * (p - 1.0) / 6.0;
        let mut tm = t * t * t;
        let mut acc = 0.0;
        for m in 3..12 {
            acc += coef * tm;
            coef *= (p + 1.0 - m as f64) / (m as f64 + 1.0);
            tm *= t;
        }
        k.powf(p + 1.0) * acc / (p + 1.0)
    } else {
        (k + q).abs().powf(p + 1.0) / (p + 1.0) - k.powf(p + 1.0) / (p + 1.0) - k.powf(p) * q
            - 0.5 * p * k.powf(p - 1.0) * q * q
    }
}

/// `(h1, h2)` with `h1 = ||q||^2/2 - ∫F(q1) rho` and
/// `h2 = phī(q, q)/2 - ∫F(q1) rho + eta0 ∫ q1 q2 rho`.
pub fn lyapunov_pair(q: &StatePair, d: &[f64], nu: f64, eta0: f64) -> (f64, f64) {
    let grid = q.grid();
    let pr = *grid.params();
    let p = pr.p();
    let k1 = DVector::from_iterator(
        grid.n_nodes(),
        (0..grid.n_nodes()).map(|i| kappa_star_value(&pr, d, nu, grid.node(i)).0),
    );
    let v = q.r1.values();
    let w = grid.weights();
    let big_f: f64 = (0..grid.n_nodes()).map(|i| w[i] * antiderivative_f(p, k1[i], v[i])).sum();
    let psi_bar = k1.map(|k| p * k.powf(p - 1.0) - pr.mass_coeff());
    let phibar = linearized_ops::quad_form_with(&psi_bar, q, q).expect("same grid");
    let norm2 = ball_geometry::norm_h(q).powi(2);
    let cross = q.r1.coeffs().dot(q.r2.coeffs());
    (0.5 * norm2 - big_f, 0.5 * phibar - big_f + eta0 * cross)
}
