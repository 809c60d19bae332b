use ball_geometry::*;
use libm::tgamma;
use std::f64::consts::PI;

fn grid(n: usize, p: f64, nr: usize, na: usize) -> std::sync::Arc<Grid> {
    make_grid(ProblemParams::new(n, p).unwrap(), nr, na).unwrap()
}

/// ∫_{B^N} |y|^{2k} (1-|y|^2)^a dy = |S^{N-1}| B(k + N/2, a + 1) / 2.
fn moment(n: usize, a: f64, k: usize) -> f64 {
    let nf = n as f64;
    let sphere = 2.0 * PI.powf(nf / 2.0) / tgamma(nf / 2.0);
    let x = k as f64 + nf / 2.0;
    sphere * 0.5 * tgamma(x) * tgamma(a + 1.0) / tgamma(x + a + 1.0)
}

#[test]
fn weight_mass_matches_closed_form() {
    let g = grid(2, 3.0, 64, 4);
    let one = Field::constant(&g, 1.0);
    assert!((integrate_rho(&one) - 2.0 * PI / 3.0).abs() < 1e-12 * 2.0 * PI / 3.0);
    let g1 = grid(1, 3.0, 64, 1);
    assert!((integrate_rho(&Field::constant(&g1, 1.0)) - 4.0 / 3.0).abs() < 1e-12);
}

#[test]
fn nodes_interior_weights_positive() {
    for &(n, p) in &[(1, 3.0), (2, 3.0), (3, 2.0)] {
        let g = grid(n, p, 12, 4);
        for q in 0..g.n_nodes() {
            let r2: f64 = g.node(q).iter().map(|x| x * x).sum();
            assert!(r2 < 1.0);
            assert!(g.weights()[q] > 0.0);
        }
        for w in g.singular().weights.iter() {
            assert!(*w > 0.0);
        }
    }
}

#[test]
fn radial_moments() {
    for &(n, p) in &[(1, 3.0), (2, 3.0), (3, 2.0)] {
        let g = grid(n, p, 16, 9);
        let a = g.params().alpha();
        for k in 0..=4 {
            let f = Field::from_fn(&g, |y| y.iter().map(|v| v * v).sum::<f64>().powi(k as i32));
            let q = integrate_rho(&f);
            let e = moment(n, a, k);
            assert!((q - e).abs() < 1e-10 * e, "N={n} k={k}: {q} vs {e}");
            // singular weight (1-|y|^2)^{a-1}
            let s = norm_singular_l2(&Field::from_fn(&g, |y| {
                y.iter().map(|v| v * v).sum::<f64>().powi(k as i32)
            }))
            .powi(2);
            let es = moment(n, a - 1.0, 2 * k);
            assert!((s - es).abs() < 1e-10 * es, "singular N={n} k={k}: {s} vs {es}");
        }
    }
}

#[test]
fn odd_and_zero_integrands() {
    let g = grid(2, 3.0, 16, 4);
    assert_eq!(integrate_rho(&Field::zeros(&g)), 0.0);
    assert!(integrate_rho(&Field::coordinate(&g, 0)).abs() < 1e-14);
    assert!(integrate_rho(&Field::coordinate(&g, 1)).abs() < 1e-14);
}

#[test]
fn modes_are_orthonormal() {
    for &(n, p) in &[(1, 3.0), (2, 3.0), (3, 2.0)] {
        let g = grid(n, p, 12, 5);
        let m = g.main();
        let gram = &m.wphi * m.phi.transpose();
        let id = nalgebra::DMatrix::<f64>::identity(g.n_modes(), g.n_modes());
        let err = (gram - id).abs().max();
        assert!(err < 1e-12, "N={n}: Gram error {err}");
    }
}

#[test]
fn euler_matrix_structure() {
    // y . grad preserves total degree: E is lower triangular in degree with E_nn = n.
    let g = grid(3, 2.0, 10, 4);
    let e = g.euler_matrix();
    let modes = g.modes().modes();
    for (a, ma) in modes.iter().enumerate() {
        for (b, mb) in modes.iter().enumerate() {
            if ma.degree > mb.degree {
                assert!(e[(a, b)].abs() < 1e-10, "E[{a},{b}] = {}", e[(a, b)]);
            }
            if a == b {
                assert!((e[(a, a)] - ma.degree as f64).abs() < 1e-10);
            }
        }
    }
}

#[test]
fn gradients_match_finite_differences() {
    let g = grid(3, 2.0, 10, 4);
    let f = Field::from_fn(&g, |y| (0.3 * y[0] - 0.2 * y[1] + 0.5 * y[2]).exp() * (1.0 + y[1] * y[2]));
    let grads = f.gradient_values();
    let h = 1e-6;
    for q in [0, 17, 101, g.n_nodes() - 1] {
        let y = g.node(q).to_vec();
        for i in 0..3 {
            let mut yp = y.clone();
            let mut ym = y.clone();
            yp[i] += h;
            ym[i] -= h;
            let fd = (f.eval_at(&yp).unwrap() - f.eval_at(&ym).unwrap()) / (2.0 * h);
            assert!((fd - grads[i][q]).abs() < 1e-6, "node {q} dir {i}: {fd} vs {}", grads[i][q]);
        }
    }
}
