#![allow(dead_code)]

use std::path::{Path, PathBuf};

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use vsearch::grid::{cell_center, Cell, GridConfig, TargetRegion, Trial};
use vsearch::harness::{load_dataset, Dataset, RunConfig};
use vsearch::priors::flat_prior;
use vsearch::synth::{generate, write_suite, SynthConfig};
use vsearch::template::CorrelationMap;
use vsearch::{PriorGrid, VisibilityParams, VisibilityTable};

/// A 16x12-cell synthetic suite written to `dir`; returns the config path.
pub fn small_suite(dir: &Path, images: usize) -> PathBuf {
    let cfg = SynthConfig {
        grid: GridConfig::new(512, 384, 32).unwrap(),
        images,
        subjects: 4,
        distractors: (4, 6),
        ..SynthConfig::default()
    };
    write_suite(&generate(&cfg).unwrap(), dir).unwrap()
}

/// The default-size synthetic suite (32x24 cells, 10 images).
pub fn full_suite(dir: &Path) -> PathBuf {
    write_suite(&generate(&SynthConfig::default()).unwrap(), dir).unwrap()
}

pub fn load(config: &Path) -> (RunConfig, Dataset) {
    let cfg = RunConfig::load(config).unwrap();
    let ds = load_dataset(
        cfg.manifest_path().unwrap(),
        cfg.scanpaths_path().unwrap(),
        &cfg.grid,
        &cfg.sorted_budgets(),
    )
    .unwrap();
    (cfg, ds)
}

/// Flat prior, zero correlation, one-cell target placed at random away
/// from a random start; 16x12 cells.
pub struct FlatWorld {
    pub grid: GridConfig,
    pub visibility: VisibilityTable,
    pub prior: PriorGrid,
    pub corr: CorrelationMap,
}

impl FlatWorld {
    pub fn new() -> Self {
        let grid = GridConfig::new(512, 384, 32).unwrap();
        FlatWorld {
            visibility: VisibilityTable::new(&VisibilityParams::default(), &grid).unwrap(),
            prior: flat_prior(&grid),
            corr: Array2::zeros(grid.shape()),
            grid,
        }
    }

    pub fn trials(&self, n: usize, budget: usize, seed: u64) -> Vec<Trial> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|t| {
                let (cols, rows) = (self.grid.cols(), self.grid.rows());
                let start = Cell::new(rng.random_range(0..cols), rng.random_range(0..rows));
                let target = loop {
                    let c = Cell::new(rng.random_range(0..cols), rng.random_range(0..rows));
                    if c.chebyshev(start) >= 2 {
                        break c;
                    }
                };
                let p = cell_center(target, &self.grid);
                Trial {
                    image_id: format!("flat{t:02}"),
                    initial_fixation: start,
                    target: TargetRegion::new(p.x - 16, p.y - 16, 32, 32),
                    max_saccades: budget,
                }
            })
            .collect()
    }
}

/// Direct evaluation of prior(i)·Π exp(d′²·W) normalized over cells.
pub fn naive(prior: &Array2<f64>, updates: &[(Array2<f64>, Array2<f64>)]) -> Array2<f64> {
    let mut num = prior.clone();
    for (w, v) in updates {
        for ((n, wi), di) in num.iter_mut().zip(w).zip(v) {
            *n *= (di * di * wi).exp();
        }
    }
    let z: f64 = num.sum();
    num / z
}

/// One posterior update: fixated cell, response field W, visibility field.
pub type Update = (Cell, Array2<f64>, Array2<f64>);

pub fn random_case(rng: &mut ChaCha8Rng) -> (Array2<f64>, Vec<Update>) {
    let (rows, cols) = (rng.random_range(1..=8), rng.random_range(1..=8));
    let prior = Array2::from_shape_simple_fn((rows, cols), || rng.random_range(0.01..1.0));
    let n = rng.random_range(0..=5);
    let updates = (0..n)
        .map(|_| {
            let k = Cell::new(rng.random_range(0..cols), rng.random_range(0..rows));
            let v = Array2::from_shape_simple_fn((rows, cols), || rng.random_range(0.05..=1.0f64));
            // keep every exponent d′²·W within ±20
            let w = Array2::from_shape_fn((rows, cols), |idx| {
                let d2 = v[idx] * v[idx];
                rng.random_range(-20.0..=20.0) / d2.max(1.0)
            });
            (k, w, v)
        })
        .collect();
    (prior, updates)
}
