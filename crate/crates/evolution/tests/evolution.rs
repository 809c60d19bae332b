#[path = "common/oracle.rs"]
mod oracle;

use std::sync::Arc;

use ball_geometry::{norm_h, Field, Grid, ProblemParams, StatePair};
use evolution::*;
use oracle::ScalarOde;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use soliton_family::{d_kappa_star, kappa, kappa_star, Direction};

fn grid(dim: usize, p: f64, k: usize, j: usize) -> Arc<Grid> {
    Grid::new(ProblemParams::new(dim, p).unwrap(), k, j).unwrap()
}

fn small_random(g: &Arc<Grid>, seed: u64, size: f64) -> StatePair {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let q = StatePair::new(Field::random(g, &mut rng, 8, 0.4), Field::random(g, &mut rng, 8, 0.4));
    q.scale(size / norm_h(&q))
}

#[test]
fn rhs_examples() {
    let g = grid(2, 3.0, 64, 3);
    assert_eq!(norm_h(&rhs(&StatePair::zeros(&g))), 0.0);
    for r in [0.0, 0.5] {
        let d = [r, 0.0];
        let k = StatePair::new(kappa(&g, &d).unwrap(), Field::zeros(&g));
        assert!(norm_h(&rhs(&k)) < 1e-8, "|d|={r}");
        for nu in [-0.2, 0.3] {
            let ks = kappa_star(&g, &d, nu).unwrap();
            let dk = d_kappa_star(&g, &d, nu, &Direction::Nu).unwrap().scale(nu);
            let res = norm_h(&rhs(&ks).sub(&dk));
            assert!(res < 1e-8, "|d|={r} nu={nu}: {res:e}");
        }
    }
}

#[test]
fn energy_examples() {
    let g = grid(2, 3.0, 64, 3);
    assert_eq!(energy(&StatePair::zeros(&g)), 0.0);
    let k0 = g.params().kappa0();
    let e0 = energy(&constant_state(&g, k0, 0.0));
    assert!((e0 - 2.0 * std::f64::consts::PI / 3.0).abs() < 1e-12);
    for r in [0.3, 0.6, 0.9] {
        let k = StatePair::new(kappa(&g, &[r, 0.0]).unwrap(), Field::zeros(&g));
        assert!((energy(&k) - e0).abs() < 1e-6, "|d|={r}: {}", energy(&k));
    }
    assert_eq!(dissipation_rate(&constant_state(&g, 1.0, 0.0)), 0.0);
    assert!(lyapunov_h(&StatePair::zeros(&g), 0.1) == 0.0);
}

#[test]
fn stationary_soliton_does_not_drift() {
    let g = grid(2, 3.0, 40, 3);
    let k = StatePair::new(kappa(&g, &[0.5, 0.0]).unwrap(), Field::zeros(&g));
    let mut cfg = EvolveConfig::for_grid(&g, 10.0);
    cfg.record_every = 1000;
    let tr = evolve(&k, &cfg).unwrap();
    assert_eq!(tr.termination, Termination::Completed);
    let drift = norm_h(&tr.last().state.sub(&k));
    assert!(drift < 1e-6, "{drift:e}");
}

fn compare_with_oracle(g: &Arc<Grid>, factor: f64, s_max: f64, ds: f64) -> (f64, Trajectory) {
    let pr = *g.params();
    let k0 = pr.kappa0();
    let w0 = constant_state(g, factor * k0, 0.0);
    let cfg = EvolveConfig {
        ds,
        s_max,
        blowup_threshold: 1e3 * k0,
        record_every: 1,
    };
    let tr = evolve(&w0, &cfg).unwrap();
    let times: Vec<f64> = tr.samples.iter().map(|s| s.s).collect();
    let ode = ScalarOde {
        b: pr.damping(),
        c0: pr.mass_coeff(),
        p: pr.p(),
    };
    let sol = ode.solve([factor * k0, 0.0], &times, 10.0 * k0);
    let mut err: f64 = 0.0;
    for (smp, (t, w)) in tr.samples.iter().zip(&sol) {
        assert!((smp.s - t).abs() < 1e-12);
        if w.abs() > 10.0 * k0 {
            break;
        }
        let dev = smp.state.r1.values().iter().map(|v| (v - w).abs()).fold(0.0, f64::max);
        err = err.max(dev);
    }
    (err, tr)
}

#[test]
fn space_independent_data_follow_the_ode() {
    for (dim, p) in [(1, 3.0), (2, 3.0), (3, 2.0)] {
        let g = grid(dim, p, 8, 2);
        for f in [0.5, 0.9, 1.2] {
            let (err, _) = compare_with_oracle(&g, f, 5.0, 1e-3);
            assert!(err < 1e-6, "N={dim} factor {f}: {err:e}");
        }
    }
}

#[test]
fn fourth_order_convergence() {
    let g = grid(2, 3.0, 8, 2);
    let (e1, _) = compare_with_oracle(&g, 0.9, 2.0, 0.04);
    let (e2, _) = compare_with_oracle(&g, 0.9, 2.0, 0.02);
    let ratio = e1 / e2;
    assert!(ratio > 12.0 && ratio < 20.0, "{e1:e} {e2:e} {ratio}");
}

#[test]
fn supercritical_constant_blows_up_and_subcritical_decays() {
    let g = grid(2, 3.0, 12, 3);
    let k0 = g.params().kappa0();
    let cfg = EvolveConfig::for_grid(&g, 20.0);
    let tr = evolve(&constant_state(&g, 1.2 * k0, 0.0), &cfg).unwrap();
    match tr.termination {
        Termination::BlowUpDetected { s, .. } => assert!(s < 20.0),
        t => panic!("{t:?}"),
    }
    let tr = evolve(&constant_state(&g, 0.5 * k0, 0.0), &cfg).unwrap();
    assert_eq!(tr.termination, Termination::Completed);
    let last = tr.last().norm_h;
    assert!(last < 1e-6 * tr.samples[0].norm_h, "{last:e}");
}

#[test]
fn energy_identity_and_monotonicity() {
    let g = grid(2, 3.0, 20, 6);
    let k = StatePair::new(kappa(&g, &[0.3, 0.1]).unwrap(), Field::zeros(&g));
    let w0 = k.add(&small_random(&g, 9, 0.3));
    let cfg = EvolveConfig {
        ds: 1e-3,
        s_max: 3.0,
        blowup_threshold: 1e3,
        record_every: 1,
    };
    let tr = evolve(&w0, &cfg).unwrap();
    let emax = tr.samples.iter().map(|s| s.energy.abs()).fold(1.0, f64::max);
    for w in tr.samples.windows(2) {
        let ds = w[1].s - w[0].s;
        assert!(w[1].energy <= w[0].energy + 1e-6 * emax);
        // finite-difference identity at the midpoint
        let fd = (w[1].energy - w[0].energy) / ds;
        let mid = 0.5 * (w[0].dissipation + w[1].dissipation);
        assert!((fd + mid).abs() <= 1e-4 * emax, "{fd} vs {mid}");
    }
    assert!(tr.energy_identity_defect() <= 1e-4 * emax * tr.last().s);
}

#[test]
fn small_data_decay_and_lyapunov_functional() {
    let g = grid(2, 3.0, 16, 4);
    let eta4 = default_eta4(&g);
    let mut rates = Vec::new();
    for seed in 0..5 {
        let w0 = small_random(&g, seed, 1e-2);
        let h0 = lyapunov_h(&w0, eta4);
        let n0 = norm_h(&w0).powi(2);
        assert!(h0 > 0.0 && n0 / h0 < 20.0 && h0 / n0 < 20.0);
        let mut cfg = EvolveConfig::for_grid(&g, 10.0);
        cfg.record_every = 100;
        let tr = evolve(&w0, &cfg).unwrap();
        let hs: Vec<f64> = tr.samples.iter().map(|s| lyapunov_h(&s.state, eta4)).collect();
        for (w, smp) in hs.windows(2).zip(&tr.samples[1..]) {
            if smp.s > 1.0 {
                assert!(w[1] < w[0]);
            }
        }
        let n_end = tr.last().norm_h;
        rates.push((norm_h(&w0) / n_end).ln() / tr.last().s);
    }
    assert!(rates.iter().all(|r| *r > 0.0), "{rates:?}");
}

#[test]
fn csv_and_summary() {
    let g = grid(1, 3.0, 8, 1);
    let mut cfg = EvolveConfig::for_grid(&g, 0.1);
    cfg.record_every = 50;
    let tr = evolve(&constant_state(&g, 0.3, 0.0), &cfg).unwrap();
    let mut buf = Vec::new();
    tr.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("s,energy,dissipation,dissipated,norm_h\n"));
    assert_eq!(text.lines().count(), tr.samples.len() + 1);
    let sm = tr.summary();
    assert_eq!(sm.samples, tr.samples.len());
    assert_eq!(tr.termination.name(), "Completed");
}

#[test]
fn config_validation() {
    let g = grid(2, 3.0, 20, 3);
    let mut cfg = EvolveConfig::for_grid(&g, 1.0);
    assert!(cfg.validate(&g).is_ok());
    cfg.ds = 1.0;
    assert!(cfg.validate(&g).is_err());
    cfg.ds = -1.0;
    assert!(cfg.validate(&g).is_err());
    let cfg = EvolveConfig::for_grid(&g, 0.0);
    assert!(evolve(&StatePair::zeros(&g), &cfg).is_err());
}

#[test]
fn parallel_runs_match_sequential() {
    let g = grid(2, 3.0, 10, 3);
    let mut cfg = EvolveConfig::for_grid(&g, 0.5);
    cfg.record_every = 100;
    let inputs: Vec<StatePair> = (0..4).map(|s| small_random(&g, s, 0.1)).collect();
    let par = evolve_many(&inputs, &cfg);
    for (w, r) in inputs.iter().zip(par) {
        let seq = evolve(w, &cfg).unwrap();
        let r = r.unwrap();
        assert_eq!(seq.last().state.r1.coeffs(), r.last().state.r1.coeffs());
    }
}
