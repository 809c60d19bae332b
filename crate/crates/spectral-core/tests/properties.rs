use ball_geometry::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use spectral_core::*;
use std::sync::{Arc, OnceLock};

fn bases() -> &'static [(Arc<Grid>, SpectralBasis)] {
    static B: OnceLock<Vec<(Arc<Grid>, SpectralBasis)>> = OnceLock::new();
    B.get_or_init(|| {
        [(1, 3.0), (2, 3.0), (3, 2.0)]
            .iter()
            .map(|&(n, p)| {
                let g = make_grid(ProblemParams::new(n, p).unwrap(), 14, 4).unwrap();
                let b = build_basis(&g).unwrap();
                (g, b)
            })
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn l_is_self_adjoint(i in 0usize..3, s in any::<u64>()) {
        let (g, b) = &bases()[i];
        let mut rng = ChaCha8Rng::seed_from_u64(s);
        let f = Field::random(g, &mut rng, 13, 0.2);
        let h = Field::random(g, &mut rng, 13, 0.2);
        let lf = b.apply_l(&f).unwrap();
        let lh = b.apply_l(&h).unwrap();
        let a = inner_rho(&lf, &h).unwrap();
        let c = inner_rho(&f, &lh).unwrap();
        prop_assert!((a - c).abs() <= 1e-10 * f.norm_l2() * h.norm_l2() * b.eigenvalues().last().unwrap().abs());
    }

    #[test]
    fn l_matches_gradient_form(i in 0usize..3, s in any::<u64>()) {
        let (g, b) = &bases()[i];
        let mut rng = ChaCha8Rng::seed_from_u64(s);
        let f = Field::random(g, &mut rng, 13, 0.2);
        let lf = b.apply_l(&f).unwrap();
        let a = -inner_rho(&f, &lf).unwrap();
        let c = gradient_form(&f, &f).unwrap();
        prop_assert!((a - c).abs() <= 1e-9 * c.abs().max(1.0));
    }

    #[test]
    fn resolvent_residual(i in 0usize..3, s in any::<u64>()) {
        let (g, b) = &bases()[i];
        let mut rng = ChaCha8Rng::seed_from_u64(s);
        let f = Field::random(g, &mut rng, 13, 0.1);
        let v = b.solve_resolvent(&f).unwrap();
        let res = b.apply_l(&v).unwrap().scale(-1.0).add(&v).sub(&f);
        prop_assert!(res.norm_l2() <= 1e-8 * f.norm_l2());
    }

    #[test]
    fn spectral_gap(i in 0usize..3, s in any::<u64>()) {
        let (g, b) = &bases()[i];
        let mut rng = ChaCha8Rng::seed_from_u64(s);
        let f = Field::random(g, &mut rng, 13, 0.0);
        let g2 = -b.params().eigenvalue(2);
        prop_assert!(b.coercivity_gap(&f).unwrap() >= g2 - 1e-8);
    }
}
