//! Batch model runs: one search per (image, budget).

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec;
use crate::grid::{pixel_to_cell, Cell, Trial};
use crate::harness::config::{PriorSpec, RunConfig};
use crate::harness::dataset::{Dataset, ImageEntry};
use crate::harness::io::write_atomic;
use crate::priors::{
    center_prior, default_center_sigma, flat_prior, grid_prior_from_saliency, human_density_map, noise_prior,
    PriorGrid, SaliencyMap,
};
use crate::rng;
use crate::searchers::{run_search, SearchInputs};
use crate::template::{correlation_map, CorrelationMap};
use crate::visibility::VisibilityTable;

/// One model trial as written to `results.csv`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelRecord {
    pub image_id: String,
    pub budget: usize,
    pub found: bool,
    pub saccades: usize,
    pub scanpath: Vec<Cell>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialError {
    pub trial: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub policy: String,
    pub prior: String,
    pub seed: u64,
    pub mc_samples: usize,
    pub budgets: Vec<usize>,
    pub response_mode: crate::template::ResponseMode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentOutput {
    pub summary: RunSummary,
    pub results: Vec<ModelRecord>,
    pub errors: Vec<TrialError>,
}

/// Builds the per-cell prior for one image.
pub fn build_prior(spec: &PriorSpec, entry: &ImageEntry, dataset: &Dataset, cfg: &RunConfig) -> Result<PriorGrid> {
    let grid = &dataset.grid;
    match spec {
        PriorSpec::Flat => Ok(flat_prior(grid)),
        PriorSpec::Center => center_prior(grid, cfg.center_sigma_px.unwrap_or_else(|| default_center_sigma(grid))),
        PriorSpec::Noise => Ok(noise_prior(grid, rng::derive_seed(cfg.seed, rng::key_hash(&entry.image_id), rng::Purpose::NoisePrior, 0))),
        PriorSpec::Human => {
            let fixations = dataset.third_fixations(&entry.image_id);
            let map = human_density_map(&entry.image_id, &fixations, cfg.human_kernel_sigma_px, grid)
                .map_err(|e| Error::domain(format!("human prior for '{}': {e}", entry.image_id)))?;
            grid_prior_from_saliency(&map, grid)
        }
        PriorSpec::Saliency(name) => {
            let path = entry.saliency_paths.get(name).ok_or_else(|| {
                Error::domain(format!("image '{}' lists no saliency map named '{name}'", entry.image_id))
            })?;
            grid_prior_from_saliency(&SaliencyMap::load(&entry.image_id, path, grid)?, grid)
        }
    }
}

struct Prepared {
    prior: PriorGrid,
    correlation: Option<CorrelationMap>,
}

fn prepare(entry: &ImageEntry, dataset: &Dataset, cfg: &RunConfig) -> Result<Prepared> {
    let prior = build_prior(&cfg.prior, entry, dataset, cfg)?;
    let correlation = if cfg.policy.needs_correlation() {
        let image = entry.load_image(&dataset.grid)?;
        let patch = entry.load_patch(&image)?;
        Some(correlation_map(&image, &patch, &dataset.grid, cfg.exec)?)
    } else {
        None
    };
    Ok(Prepared { prior, correlation })
}

/// Runs the configured policy on every (image, budget) pair in manifest ×
/// ascending-budget order. Failing trials are recorded and skipped.
pub fn run_experiment(dataset: &Dataset, cfg: &RunConfig) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let grid = dataset.grid;
    let visibility = VisibilityTable::new(&cfg.visibility, &grid)?;
    let budgets = cfg.sorted_budgets();
    let search = cfg.search_config();

    let prepared = exec::map_slice(cfg.exec, &dataset.images, |e| prepare(e, dataset, cfg));
    let jobs: Vec<(usize, usize)> = (0..dataset.images.len())
        .flat_map(|i| budgets.iter().map(move |&b| (i, b)))
        .collect();
    let outcomes = exec::map_slice(cfg.exec, &jobs, |&(i, budget)| {
        let entry = &dataset.images[i];
        let prep = prepared[i].as_ref().map_err(|e| e.to_string())?;
        let trial = Trial {
            image_id: entry.image_id.clone(),
            initial_fixation: pixel_to_cell(entry.initial_fixation_px, &grid).map_err(|e| e.to_string())?,
            target: entry.target,
            max_saccades: budget,
        };
        let inputs = SearchInputs {
            visibility: &visibility,
            prior: &prep.prior,
            correlation: prep.correlation.as_ref(),
            template: cfg.template,
        };
        let r = run_search(&trial, &inputs, &search).map_err(|e| e.to_string())?;
        Ok::<_, String>(ModelRecord {
            image_id: entry.image_id.clone(),
            budget,
            found: r.found,
            saccades: r.saccades_used,
            scanpath: r.scanpath.fixations().to_vec(),
        })
    });

    let mut results = Vec::new();
    let mut errors = Vec::new();
    for (&(i, budget), outcome) in jobs.iter().zip(outcomes) {
        match outcome {
            Ok(r) => results.push(r),
            Err(message) => errors.push(TrialError {
                trial: format!("{}@{budget}", dataset.images[i].image_id),
                message,
            }),
        }
    }
    Ok(ExperimentOutput {
        summary: RunSummary {
            policy: cfg.policy.name().to_string(),
            prior: cfg.prior.name().to_string(),
            seed: cfg.seed,
            mc_samples: cfg.mc_samples,
            budgets,
            response_mode: cfg.template.mode,
        },
        results,
        errors,
    })
}

fn format_scanpath(cells: &[Cell]) -> String {
    cells
        .iter()
        .map(|c| format!("{}:{}", c.col, c.row))
        .collect::<Vec<_>>()
        .join(";")
}

fn parse_scanpath(s: &str) -> Option<Vec<Cell>> {
    s.split(';')
        .map(|t| {
            let (c, r) = t.split_once(':')?;
            Some(Cell::new(c.trim().parse().ok()?, r.trim().parse().ok()?))
        })
        .collect()
}

#[derive(Serialize, Deserialize)]
struct CsvRow {
    image_id: String,
    budget: usize,
    found: u8,
    saccades: usize,
    scanpath: String,
}

pub fn results_to_csv(records: &[ModelRecord]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in records {
        w.serialize(CsvRow {
            image_id: r.image_id.clone(),
            budget: r.budget,
            found: r.found as u8,
            saccades: r.saccades,
            scanpath: format_scanpath(&r.scanpath),
        })
        .map_err(|e| Error::domain(e.to_string()))?;
    }
    w.into_inner().map_err(|e| Error::domain(e.to_string()))
}

pub fn load_results(path: &Path) -> Result<Vec<ModelRecord>> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| Error::file(path, e.to_string()))?;
    reader
        .deserialize::<CsvRow>()
        .enumerate()
        .map(|(n, row)| {
            let err = |message: String| Error::Parse {
                path: path.into(),
                line: n + 2,
                message,
            };
            let row = row.map_err(|e| err(e.to_string()))?;
            let scanpath = parse_scanpath(&row.scanpath).ok_or_else(|| err(format!("bad scanpath '{}'", row.scanpath)))?;
            Ok(ModelRecord {
                image_id: row.image_id,
                budget: row.budget,
                found: row.found != 0,
                saccades: row.saccades,
                scanpath,
            })
        })
        .collect()
}

/// Writes `results.csv` and `results.json` into `dir`.
pub fn write_outputs(out: &ExperimentOutput, dir: &Path) -> Result<()> {
    write_atomic(&dir.join("results.csv"), &results_to_csv(&out.results)?)?;
    let mut json = serde_json::to_vec_pretty(out)?;
    json.push(b'\n');
    write_atomic(&dir.join("results.json"), &json)
}
