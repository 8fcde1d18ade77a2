//! Sequential vs parallel execution of the hot paths, plus the scaling of one
//! IBS decision in grid size and Monte-Carlo samples.

use std::time::Duration;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use vsearch::harness::{load_dataset, run_experiment, RunConfig};
use vsearch::searchers::{next_fixation_ibs, NoiseBank, SearchContext};
use vsearch::synth::{generate, write_suite, SynthConfig};
use vsearch::template::{correlation_map, ResponseModel};
use vsearch::{Cell, Execution, GridConfig, Policy, PosteriorState, PriorGrid, VisibilityParams, VisibilityTable};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

struct Decision {
    vis: VisibilityTable,
    state: PosteriorState,
    noise: NoiseBank,
}

fn decision(cols: u32, rows: u32, mc: usize) -> Decision {
    let grid = GridConfig::new(cols * 32, rows * 32, 32).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let prior = PriorGrid::from_weights(Array2::from_shape_simple_fn(grid.shape(), || rng.random_range(0.1..1.0))).unwrap();
    Decision {
        vis: VisibilityTable::new(&VisibilityParams::default(), &grid).unwrap(),
        state: PosteriorState::init(&prior),
        noise: NoiseBank::draw(mc, grid.num_cells(), &mut rng),
    }
}

fn ibs_decision(c: &mut Criterion) {
    let d = decision(32, 24, 64);
    let mut group = c.benchmark_group("ibs_decision_32x24_mc64");
    group.measurement_time(Duration::from_secs(10)).sample_size(20);
    for (name, exec) in MODES {
        let ctx = SearchContext { visibility: &d.vis, responses: &ResponseModel::Ibs, current: Cell::new(16, 12), exec };
        group.bench_function(name, |b| b.iter(|| next_fixation_ibs(&d.state, &ctx, &d.noise)));
    }
    group.finish();
}

fn decision_scaling(c: &mut Criterion) {
    let mut group = c.benchmark_group("ibs_decision_scaling");
    group.sample_size(10);
    for (cols, rows, mc) in [(8, 6, 64), (16, 12, 64), (32, 24, 16), (32, 24, 32), (32, 24, 64)] {
        let d = decision(cols, rows, mc);
        let ctx = SearchContext {
            visibility: &d.vis,
            responses: &ResponseModel::Ibs,
            current: Cell::new(0, 0),
            exec: Execution::Sequential,
        };
        let id = BenchmarkId::from_parameter(format!("{cols}x{rows}_mc{mc}"));
        group.bench_function(id, |b| b.iter(|| next_fixation_ibs(&d.state, &ctx, &d.noise)));
    }
    group.finish();
}

fn correlation(c: &mut Criterion) {
    let grid = GridConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (h, w) = grid.image_shape();
    let image = Array2::from_shape_simple_fn((h, w), || rng.random_range(0.0..255.0));
    let patch = image.slice(ndarray::s![100..172, 200..272]).to_owned();
    let mut group = c.benchmark_group("correlation_map_1024x768_patch72");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(name, |b| b.iter(|| correlation_map(&image, &patch, &grid, exec).unwrap()));
    }
    group.finish();
}

fn experiment(c: &mut Criterion) {
    let dir = tempfile::tempdir().unwrap();
    let suite = SynthConfig {
        grid: GridConfig::new(512, 384, 32).unwrap(),
        images: 4,
        subjects: 2,
        distractors: (4, 6),
        ..SynthConfig::default()
    };
    let cfg = RunConfig::load(&write_suite(&generate(&suite).unwrap(), dir.path()).unwrap()).unwrap();
    let ds = load_dataset(cfg.manifest_path().unwrap(), cfg.scanpaths_path().unwrap(), &cfg.grid, &cfg.sorted_budgets()).unwrap();
    let mut group = c.benchmark_group("run_experiment_cibs_16x12_4_images");
    group.sample_size(10);
    for (name, exec) in MODES {
        let cfg = RunConfig { policy: Policy::Cibs, exec, ..cfg.clone() };
        group.bench_function(name, |b| b.iter(|| run_experiment(&ds, &cfg).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, ibs_decision, decision_scaling, correlation, experiment);
criterion_main!(benches);
