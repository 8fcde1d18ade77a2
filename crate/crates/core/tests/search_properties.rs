mod common;

use ndarray::Array2;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use vsearch::grid::{cell_center, target_hit, Cell, GridConfig, TargetRegion, Trial};
use vsearch::{
    run_search, Execution, Policy, PriorGrid, ResponseMode, SearchConfig, SearchInputs, TemplateParams, VisibilityParams,
    VisibilityTable,
};

struct World {
    vis: VisibilityTable,
    prior: PriorGrid,
    corr: Array2<f64>,
}

fn world(cols: u32, rows: u32, seed: u64) -> World {
    let grid = GridConfig::new(cols * 32, rows * 32, 32).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    World {
        vis: VisibilityTable::new(&VisibilityParams::default(), &grid).unwrap(),
        prior: PriorGrid::from_weights(Array2::from_shape_simple_fn(grid.shape(), || rng.random_range(0.1..1.0))).unwrap(),
        corr: Array2::from_shape_simple_fn(grid.shape(), || rng.random_range(-0.5..=0.5)),
    }
}

fn trial(grid: &GridConfig, start: Cell, target: Cell, budget: usize) -> Trial {
    let p = cell_center(target, grid);
    Trial {
        image_id: "t".into(),
        initial_fixation: start,
        target: TargetRegion::new(p.x - 16, p.y - 16, 32, 32),
        max_saccades: budget,
    }
}

fn search(w: &World, t: &Trial, policy: Policy, mode: ResponseMode, exec: Execution, seed: u64) -> vsearch::SearchResult {
    let inputs = SearchInputs {
        visibility: &w.vis,
        prior: &w.prior,
        correlation: Some(&w.corr),
        template: TemplateParams { mode, ..TemplateParams::default() },
    };
    let cfg = SearchConfig { policy, mc_samples: 16, seed, response_mode: mode, ior_radius: 1, exec };
    run_search(t, &inputs, &cfg).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn shorter_budgets_give_prefixes(
        seed in any::<u64>(),
        policy in prop::sample::select(Policy::ALL.to_vec()),
        sampled in any::<bool>(),
        budget in 1usize..8,
    ) {
        let w = world(6, 4, seed);
        let grid = *w.vis.grid();
        let t = trial(&grid, Cell::new(0, 0), Cell::new(5, 3), 8);
        let mode = if sampled { ResponseMode::Sampled } else { ResponseMode::Deterministic };
        let long = search(&w, &t, policy, mode, Execution::Sequential, seed);
        let short = search(&w, &Trial { max_saccades: budget, ..t.clone() }, policy, mode, Execution::Sequential, seed);
        let (l, s) = (long.scanpath.fixations(), short.scanpath.fixations());
        prop_assert!(s.len() <= l.len());
        prop_assert_eq!(s, &l[..s.len()]);
        prop_assert!(!short.found || long.found);
    }

    #[test]
    fn results_are_well_formed(
        seed in any::<u64>(),
        policy in prop::sample::select(Policy::ALL.to_vec()),
        budget in 1usize..10,
    ) {
        let w = world(5, 5, seed);
        let grid = *w.vis.grid();
        let t = trial(&grid, Cell::new(4, 0), Cell::new(1, 3), budget);
        let r = search(&w, &t, policy, ResponseMode::Deterministic, Execution::Sequential, seed);
        let path = r.scanpath.fixations();
        prop_assert_eq!(r.saccades_used, path.len() - 1);
        prop_assert!(r.saccades_used <= budget);
        prop_assert_eq!(path[0], t.initial_fixation);
        prop_assert_eq!(r.found, target_hit(*path.last().unwrap(), &t.target, &grid));
        // the search stops at the first hit
        prop_assert!(path[..path.len() - 1].iter().all(|&c| !target_hit(c, &t.target, &grid)));
        prop_assert!(path.windows(2).all(|p| p[0] != p[1]));
    }
}

#[test]
fn serial_and_parallel_agree() {
    for seed in 0..4 {
        let w = world(8, 6, seed);
        let grid = *w.vis.grid();
        let t = trial(&grid, Cell::new(0, 5), Cell::new(7, 0), 10);
        for policy in Policy::ALL {
            let a = search(&w, &t, policy, ResponseMode::Sampled, Execution::Sequential, seed);
            let b = search(&w, &t, policy, ResponseMode::Sampled, Execution::Parallel, seed);
            assert_eq!(a, b, "{}", policy.name());
        }
    }
}

#[test]
fn sampled_mode_depends_on_the_seed() {
    let w = world(8, 6, 1);
    let grid = *w.vis.grid();
    let t = trial(&grid, Cell::new(0, 5), Cell::new(7, 0), 10);
    let paths: Vec<_> = (0..6)
        .map(|s| search(&w, &t, Policy::Ibs, ResponseMode::Sampled, Execution::Sequential, s).scanpath)
        .collect();
    assert!(paths.windows(2).any(|p| p[0] != p[1]));
    let again = search(&w, &t, Policy::Ibs, ResponseMode::Sampled, Execution::Sequential, 3).scanpath;
    assert_eq!(again, paths[3]);
}

#[test]
fn flat_world_ibs_avoids_refixations() {
    let world = common::FlatWorld::new();
    let inputs = SearchInputs {
        visibility: &world.visibility,
        prior: &world.prior,
        correlation: Some(&world.corr),
        template: TemplateParams::default(),
    };
    for t in world.trials(4, 9, 5) {
        let cfg = SearchConfig { policy: Policy::Ibs, mc_samples: 32, seed: 11, ..SearchConfig::default() };
        let r = run_search(&t, &inputs, &cfg).unwrap();
        let path = r.scanpath.fixations();
        for (i, c) in path.iter().enumerate() {
            assert!(!path[..i].contains(c), "revisits {c:?} in {path:?}");
        }
    }
}
