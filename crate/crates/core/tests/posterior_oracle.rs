use ndarray::Array2;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

mod common;

use common::{naive, random_case};
use vsearch::{Cell, PosteriorState, PriorGrid};

#[test]
fn log_domain_matches_direct_product_on_200_cases() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let (prior, updates) = random_case(&mut rng);
        let grid_prior = PriorGrid::from_weights(prior.clone()).unwrap();
        let mut state = PosteriorState::init(&grid_prior);
        for (k, w, v) in &updates {
            state.update(*k, w, v).unwrap();
        }
        let got = state.probabilities();
        let pairs: Vec<_> = updates.iter().map(|(_, w, v)| (w.clone(), v.clone())).collect();
        let want = naive(grid_prior.values(), &pairs);
        for (g, w) in got.iter().zip(&want) {
            worst = worst.max((g - w).abs() / w.abs().max(1e-300));
        }
        assert!((got.sum() - 1.0).abs() < 1e-12);
        assert_eq!(state.history().len(), updates.len());
    }
    assert!(worst < 1e-9, "worst relative error {worst}");
}

#[test]
fn deterministic_ibs_update_suppresses_the_fixated_cell() {
    let grid = vsearch::GridConfig::new(160, 128, 32).unwrap();
    let vis = vsearch::VisibilityTable::new(&Default::default(), &grid).unwrap();
    let prior = vsearch::priors::flat_prior(&grid);
    let mut state = PosteriorState::init(&prior);
    let k = Cell::new(2, 1);
    let before = state.probabilities()[[1, 2]];
    let w = Array2::from_elem(grid.shape(), -0.5);
    state.update(k, &w, &vis.field(k)).unwrap();
    let after = state.probabilities();
    assert!(after[[1, 2]] < before);
    // the fixated cell is now the least likely
    assert!(after.iter().all(|&p| p >= after[[1, 2]]));
}

proptest! {
    #[test]
    fn update_order_does_not_matter(
        seed in any::<u64>(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (prior, updates) = random_case(&mut rng);
        let prior = PriorGrid::from_weights(prior).unwrap();
        let mut fwd = PosteriorState::init(&prior);
        let mut rev = PosteriorState::init(&prior);
        for (k, w, v) in &updates {
            fwd.update(*k, w, v).unwrap();
        }
        for (k, w, v) in updates.iter().rev() {
            rev.update(*k, w, v).unwrap();
        }
        for (a, b) in fwd.probabilities().iter().zip(rev.probabilities().iter()) {
            prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1e-300) + 1e-300);
        }
    }

    #[test]
    fn probabilities_sum_to_one_under_large_shifts(shift in -1e6f64..1e6, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let lw = Array2::from_shape_simple_fn((5, 7), || shift + rng.random_range(-50.0..50.0));
        let p = PosteriorState::from_log_weights(lw).unwrap().probabilities();
        prop_assert!((p.sum() - 1.0).abs() < 1e-12);
        prop_assert!(p.iter().all(|v| v.is_finite() && *v >= 0.0));
    }
}
