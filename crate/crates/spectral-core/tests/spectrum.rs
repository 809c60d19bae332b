use ball_geometry::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use spectral_core::*;
use std::f64::consts::PI;
use std::sync::Arc;

fn setup(n: usize, p: f64, nr: usize, na: usize) -> (Arc<Grid>, SpectralBasis) {
    let g = make_grid(ProblemParams::new(n, p).unwrap(), nr, na).unwrap();
    let b = build_basis(&g).unwrap();
    (g, b)
}

#[test]
fn leading_eigenvalues_match_closed_forms() {
    for &(n, p) in &[(1usize, 3.0f64), (2, 3.0), (3, 2.0)] {
        let (_, b) = setup(n, p, 64, 3);
        let levels = distinct_levels(b.eigenvalues(), 1e-10);
        let targets = [0.0, -2.0 * (p + 1.0) / (p - 1.0), -2.0 * (3.0 * p + 1.0) / (p - 1.0)];
        for (lvl, t) in levels.iter().zip(targets) {
            assert!((lvl.0 - t).abs() <= 1e-8 * t.abs().max(1e-300) + 1e-12, "N={n}: {} vs {t}", lvl.0);
        }
        assert_eq!(levels[1].1, n, "multiplicity of gamma_1 for N={n}");
        let g2 = levels[2].0;
        let rest = levels[3..].iter().map(|l| -l.0).fold(f64::INFINITY, f64::min);
        assert!(rest >= -g2 - 1e-8);
    }
}

#[test]
fn gram_of_eigenfields_is_identity() {
    let (g, b) = setup(2, 3.0, 20, 5);
    let n = b.count();
    let fields: Vec<Field> = (0..n).map(|i| b.eigenfield(i)).collect();
    let mut err: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let v = fields[i].values().component_mul(fields[j].values()).dot(g.weights());
            let e = if i == j { 1.0 } else { 0.0 };
            err = err.max((v - e).abs());
        }
    }
    assert!(err < 1e-10, "{err}");
}

#[test]
fn stiffness_has_no_cross_block_coupling() {
    let g = make_grid(ProblemParams::new(3, 2.0).unwrap(), 10, 4).unwrap();
    let m = g.main();
    let w = &m.weights;
    let mut full = nalgebra::DMatrix::<f64>::zeros(g.n_modes(), g.n_modes());
    for gr in m.grad.iter() {
        let mut wg = gr.clone();
        for (q, mut c) in wg.column_iter_mut().enumerate() {
            c *= w[q];
        }
        full += &wg * gr.transpose();
    }
    let mut we = m.euler.clone();
    for (q, mut c) in we.column_iter_mut().enumerate() {
        c *= w[q];
    }
    full -= &we * m.euler.transpose();
    let blocks = g.modes().blocks();
    let block_of = |i: usize| blocks.iter().position(|r| r.contains(&i)).unwrap();
    for a in 0..g.n_modes() {
        for c in 0..g.n_modes() {
            if block_of(a) != block_of(c) {
                assert!(full[(a, c)].abs() < 1e-10);
            }
        }
    }
}

#[test]
fn apply_l_examples() {
    let (g, b) = setup(2, 3.0, 16, 4);
    let one = Field::constant(&g, 1.0);
    assert!(b.apply_l(&one).unwrap().norm_l2() < 1e-12);
    let y1 = Field::coordinate(&g, 0);
    let r = b.apply_l(&y1).unwrap().axpy(4.0, &y1);
    assert!(r.norm_l2() < 1e-12);
    let (g3, b3) = setup(3, 2.0, 16, 4);
    let a2 = 3.0 / 7.0;
    let f = Field::from_fn(&g3, |y| a2 - y.iter().map(|v| v * v).sum::<f64>());
    let r = b3.apply_l(&f).unwrap().axpy(14.0, &f);
    assert!(r.norm_l2() < 1e-11 * f.norm_l2());
    // a^2 = N(p-1)/(3p+1)
    assert!((a2 - 3.0 * 1.0 / 7.0_f64).abs() < 1e-15);
}

#[test]
fn resolvent_examples() {
    let (g, b) = setup(2, 3.0, 16, 4);
    let one = Field::constant(&g, 1.0);
    assert!(b.solve_resolvent(&one).unwrap().sub(&one).norm_l2() < 1e-12);
    let y1 = Field::coordinate(&g, 0);
    let v = b.solve_resolvent(&y1).unwrap();
    assert!(v.sub(&y1.scale(0.2)).norm_l2() < 1e-13);
    for n in [0, 5, 17, 40] {
        let h = b.eigenfield(n);
        let v = b.solve_resolvent(&h).unwrap();
        let expect = h.scale(1.0 / (1.0 - b.eigenvalues()[n]));
        assert!(v.sub(&expect).norm_l2() < 1e-12);
        // residual of -Lv + v = h
        let res = b.apply_l(&v).unwrap().scale(-1.0).add(&v).sub(&h);
        assert!(res.norm_l2() <= 1e-8 * h.norm_l2());
    }
}

#[test]
fn coercivity_examples() {
    let (g, b) = setup(2, 3.0, 16, 4);
    let levels = distinct_levels(b.eigenvalues(), 1e-10);
    // first eigenpair of the gamma_2 level
    let n2 = 1 + 2;
    let h2 = b.eigenfield(n2);
    assert!((b.coercivity_gap(&h2).unwrap() - 10.0).abs() < 1e-9);
    let first_beyond = levels[0].1 + levels[1].1 + levels[2].1;
    let h3 = b.eigenfield(first_beyond);
    let g3 = b.coercivity_gap(&h3).unwrap();
    assert!(g3 >= 10.0, "gamma_3 = {}", -g3);
    assert!(b.coercivity_gap(&Field::constant(&g, 2.0)).is_err());
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..100 {
        let f = Field::random(&g, &mut rng, 15, 0.2);
        assert!(b.coercivity_gap(&f).unwrap() >= 10.0 - 1e-6);
    }
}

#[test]
fn hardy_sobolev_constant_field() {
    let (g, _) = setup(2, 3.0, 16, 4);
    assert_eq!(hardy_sobolev_check(&Field::zeros(&g)), (0.0, 0.0));
    let (l, r) = hardy_sobolev_check(&Field::constant(&g, 1.0));
    let v = 2.0 * PI / 3.0;
    assert!((l - v).abs() < 1e-12 && (r - v * v).abs() < 1e-11);
    assert!((l / r - 3.0 / (2.0 * PI)).abs() < 1e-12);
}

#[test]
fn eigenvalue_csv_has_all_rows() {
    let (_, b) = setup(2, 3.0, 10, 3);
    let mut buf = Vec::new();
    b.write_eigenvalues_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().count(), b.count() + 1);
    assert!(text.starts_with("n,transverse_degree,gamma,closed_form,deviation"));
}
