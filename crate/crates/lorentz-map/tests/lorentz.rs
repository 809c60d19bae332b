use std::sync::Arc;

use ball_geometry::{integrate_rho, norm_h0_sq, Field, Grid, ProblemParams};
use lorentz_map::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, UnitBall, UnitDisc};
use soliton_family::{dot, kappa, kappa_value};

fn grid(dim: usize, p: f64, k: usize, j: usize) -> Arc<Grid> {
    Grid::new(ProblemParams::new(dim, p).unwrap(), k, j).unwrap()
}

fn random_point(rng: &mut ChaCha8Rng, dim: usize, rmax: f64) -> Vec<f64> {
    let v: Vec<f64> = match dim {
        1 => vec![rng.random_range(-1.0..1.0)],
        2 => UnitDisc.sample(rng).to_vec(),
        _ => UnitBall.sample(rng).to_vec(),
    };
    v.into_iter().map(|x| x * rmax).collect()
}

#[test]
fn theta_examples() {
    let y = theta(&[0.3, -0.2], &[0.0, 0.0]).unwrap();
    assert!((y[0] - 0.3).abs() < 1e-16 && (y[1] + 0.2).abs() < 1e-16);
    let y = theta(&[0.5, 0.0], &[0.5, 0.0]).unwrap();
    assert!((y[0] - 0.8).abs() < 1e-15 && y[1].abs() < 1e-16);
    assert!(theta(&[0.5, 0.0], &[1.0, 0.0]).is_err());
    assert!(theta(&[1.0, 0.0], &[0.0, 0.0]).is_err());
    assert_eq!(theta(&[0.0, 0.0], &[0.2, 0.3]).unwrap(), vec![0.2, 0.3]);
}

#[test]
fn theta_collinear_reduction() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..100 {
        let d = random_point(&mut rng, 3, 0.95);
        let big_y = random_point(&mut rng, 3, 0.95);
        let y = theta(&d, &big_y).unwrap();
        let r = dot(&d, &d).sqrt();
        let u: Vec<f64> = d.iter().map(|x| x / r).collect();
        let den = 1.0 + dot(&d, &big_y);
        let ly = (dot(&big_y, &u) + r) / den;
        assert!((dot(&y, &u) - ly).abs() < 1e-14);
        let g = (1.0 - r * r).sqrt() / den;
        for i in 0..3 {
            let perp_y = y[i] - dot(&y, &u) * u[i];
            let perp_big = big_y[i] - dot(&big_y, &u) * u[i];
            assert!((perp_y - g * perp_big).abs() < 1e-14);
        }
        assert!(dot(&y, &y) < 1.0);
    }
}

#[test]
fn theta_roundtrip() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for k in 0..1000 {
        let dim = 1 + k % 3;
        let d = random_point(&mut rng, dim, 0.99);
        let big_y = random_point(&mut rng, dim, 0.99);
        let md: Vec<f64> = d.iter().map(|x| -x).collect();
        let back = theta(&md, &theta(&d, &big_y).unwrap()).unwrap();
        for (a, b) in back.iter().zip(&big_y) {
            assert!((a - b).abs() < 1e-12, "{d:?} {big_y:?}");
        }
    }
}

#[test]
fn transform_of_constants_and_identity() {
    let g = grid(2, 3.0, 24, 24);
    let pr = *g.params();
    let c = Field::constant(&g, pr.kappa0());
    let d = [0.3, 0.2];
    let t = transform_t(&d, &c).unwrap();
    let k = kappa(&g, &d).unwrap();
    assert!(t.field.sub(&k).norm_l2() < 1e-10);
    assert!(t.tail < 1e-10);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let w = Field::random(&g, &mut rng, 10, 0.3);
    let id = transform_t(&[0.0, 0.0], &w).unwrap();
    assert!(id.field.sub(&w).norm_l2() < 1e-12 * w.norm_l2());
}

#[test]
fn transform_of_soliton_is_soliton() {
    let g = grid(2, 3.0, 32, 32);
    let pr = *g.params();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..20 {
        let d = random_point(&mut rng, 2, 0.6);
        let dbar = random_point(&mut rng, 2, 0.6);
        let kb = kappa(&g, &dbar).unwrap();
        let target = theta(&d, &dbar).unwrap();
        for _ in 0..10 {
            let big_y = random_point(&mut rng, 2, 0.95);
            let v = transform_point(&d, &kb, &big_y).unwrap();
            let exact = kappa_value(&pr, &target, &big_y);
            assert!((v - exact).abs() < 1e-8, "{v} vs {exact}");
        }
    }
}

#[test]
fn inner_product_identity() {
    let g = grid(2, 3.0, 32, 32);
    let z = Field::zeros(&g);
    assert_eq!(check_inner_product_transform(&[0.5, 0.0], &z, &z, false).unwrap(), (0.0, 0.0));
    let one = Field::constant(&g, 1.0);
    let (l, r) = check_inner_product_transform(&[0.0, 0.0], &one, &one, false).unwrap();
    let mass = integrate_rho(&one);
    assert!((l - mass).abs() < 1e-13 && (r - mass).abs() < 1e-13);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for singular in [false, true] {
        for _ in 0..5 {
            let v1 = Field::random(&g, &mut rng, 6, 0.2);
            let v2 = Field::random(&g, &mut rng, 6, 0.2);
            let ang: f64 = rng.random_range(0.0..6.3);
            let d = [0.5 * ang.cos(), 0.5 * ang.sin()];
            let (l, r) = check_inner_product_transform(&d, &v1, &v2, singular).unwrap();
            assert!((l - r).abs() <= 1e-6 * l.abs().max(1e-3), "{singular}: {l} vs {r}");
        }
    }
}

#[test]
fn inverse_law_and_norm_equivalence() {
    let g = grid(2, 3.0, 48, 48);
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut ratios = Vec::new();
    for r in [0.0, 0.5, 0.9] {
        for _ in 0..4 {
            let w = Field::random(&g, &mut rng, 4, 0.3);
            let d = [r, 0.0];
            let t = transform_t(&d, &w).unwrap();
            ratios.push((norm_h0_sq(&t.field) / norm_h0_sq(&w)).sqrt());
            if r <= 0.5 {
                let back = transform_t(&[-r, 0.0], &t.field).unwrap();
                assert!(back.field.sub(&w).norm_l2() < 1e-8 * w.norm_l2());
            }
        }
    }
    let hi = ratios.iter().cloned().fold(0.0, f64::max);
    let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(hi / lo < 20.0, "{ratios:?}");
}

#[test]
fn derivative_in_d_grows_at_most_like_inverse_gap() {
    let g = grid(2, 3.0, 48, 4);
    let w = Field::from_fn(&g, |y| 1.0 + 0.5 * y[0] - 0.3 * y[0] * y[0]);
    let h = 1e-5;
    let mut scaled = Vec::new();
    for r in [0.0f64, 0.5, 0.8, 0.9] {
        let tp = transform_t(&[r + h, 0.0], &w).unwrap().field;
        let tm = transform_t(&[r - h, 0.0], &w).unwrap().field;
        let der = norm_h0_sq(&tp.sub(&tm).scale(0.5 / h)).sqrt();
        scaled.push(der * (1.0 - r * r));
    }
    let hi = scaled.iter().cloned().fold(0.0, f64::max);
    let lo = scaled.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(hi / lo < 10.0, "{scaled:?}");
}
