use std::sync::{Arc, OnceLock};

use ball_geometry::{inner_phi, Field, Grid, ProblemParams, StatePair};
use linearized_ops::{apply_ld, apply_ld_star};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn grid() -> &'static Arc<Grid> {
    static G: OnceLock<Arc<Grid>> = OnceLock::new();
    G.get_or_init(|| Grid::new(ProblemParams::new(2, 3.0).unwrap(), 24, 6).unwrap())
}

fn pair(seed: u64) -> StatePair {
    let g = grid();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    StatePair::new(Field::random(g, &mut rng, 12, 0.3), Field::random(g, &mut rng, 12, 0.3))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn conjugate_identity(s1 in any::<u64>(), s2 in any::<u64>(), r in prop::sample::select(vec![0.0, 0.5]), angle in 0.0f64..6.3) {
        let d = [r * angle.cos(), r * angle.sin()];
        let q = pair(s1);
        let rr = pair(s2);
        let lhs = inner_phi(&apply_ld(&d, &q), &rr).unwrap();
        let rhs = inner_phi(&q, &apply_ld_star(&d, &rr)).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-7 * (1.0 + lhs.abs()), "{} vs {}", lhs, rhs);
    }
}
