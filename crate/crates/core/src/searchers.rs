//! Fixation-selection policies and the trial loop.
//!
//! IBS and cIBS pick the fixation maximizing the expected probability of
//! correctly localizing the target after it, `Σ_i p_i · P(correct | i, k)`.
//! `P(correct | i, k)` is estimated by Monte Carlo: for a candidate `k`, each
//! sample draws a full response field with the target hypothesized at `i`
//! and counts whether the hypothetically updated posterior has its unique
//! maximum at `i`.
//!
//! One bank of standard-normal draws is shared by every candidate of a
//! decision (common random numbers). Under a single sample the non-target
//! responses do not depend on the hypothesis, so the best rival for every `i`
//! comes from one top-2 scan of the field. A decision therefore costs
//! `O(candidates × cells × mc_samples)`.

use ndarray::Array2;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::grid::{collapse_scanpath, target_hit, Cell, GridConfig, Origin, Scanpath, Trial};
use crate::posterior::PosteriorState;
use crate::priors::PriorGrid;
use crate::rng::{self, Purpose};
use crate::template::{observe, CorrelationMap, ResponseMode, ResponseModel, ResponseStats, TemplateParams};
use crate::visibility::VisibilityTable;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Policy {
    Ibs,
    Cibs,
    Greedy,
    SaliencyIor,
}

impl Policy {
    pub const ALL: [Policy; 4] = [Policy::Ibs, Policy::Cibs, Policy::Greedy, Policy::SaliencyIor];

    pub fn name(self) -> &'static str {
        match self {
            Policy::Ibs => "ibs",
            Policy::Cibs => "cibs",
            Policy::Greedy => "greedy",
            Policy::SaliencyIor => "saliency_ior",
        }
    }

    /// Whether the policy needs a correlation map (and so a target patch).
    pub fn needs_correlation(self) -> bool {
        matches!(self, Policy::Cibs | Policy::Greedy)
    }
}

impl std::str::FromStr for Policy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Policy::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::domain(format!("unknown policy '{s}' (ibs, cibs, greedy, saliency_ior)")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub policy: Policy,
    pub mc_samples: usize,
    pub seed: u64,
    pub response_mode: ResponseMode,
    /// Chebyshev radius, in cells, suppressed around each visited cell by
    /// the saliency policy.
    pub ior_radius: usize,
    pub exec: Execution,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            policy: Policy::Cibs,
            mc_samples: 64,
            seed: 0,
            response_mode: ResponseMode::Deterministic,
            ior_radius: 1,
            exec: Execution::Parallel,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub scanpath: Scanpath,
    pub found: bool,
    pub saccades_used: usize,
}

/// Read-only inputs a policy consults when picking the next fixation.
pub struct SearchContext<'a> {
    pub visibility: &'a VisibilityTable,
    pub responses: &'a ResponseModel,
    pub current: Cell,
    pub exec: Execution,
}

impl SearchContext<'_> {
    fn grid(&self) -> &GridConfig {
        self.visibility.grid()
    }
}

/// Standard-normal draws, `samples × cells`, shared by all candidates of one
/// decision.
#[derive(Debug, Clone)]
pub struct NoiseBank {
    cells: usize,
    z: Vec<f64>,
}

impl NoiseBank {
    pub fn draw<R: Rng + ?Sized>(samples: usize, cells: usize, rng: &mut R) -> Self {
        let z = (0..samples * cells).map(|_| StandardNormal.sample(rng)).collect();
        NoiseBank { cells, z }
    }

    pub fn samples(&self) -> usize {
        self.z.len() / self.cells.max(1)
    }

    fn sample(&self, s: usize) -> &[f64] {
        &self.z[s * self.cells..(s + 1) * self.cells]
    }
}

/// Monte-Carlo estimate of `P(correct | target at i, next fixation k)` for
/// every hypothesis `i` at once.
pub fn correctness_estimates(k: Cell, state: &PosteriorState, ctx: &SearchContext, noise: &NoiseBank) -> Vec<f64> {
    let counts = correct_counts(ctx.grid().index(k), state.log_weights_slice(), ctx, noise);
    let m = noise.samples() as f64;
    counts.into_iter().map(|c| c as f64 / m).collect()
}

pub fn p_correct(i: Cell, k: Cell, state: &PosteriorState, ctx: &SearchContext, noise: &NoiseBank) -> f64 {
    correctness_estimates(k, state, ctx, noise)[ctx.grid().index(i)]
}

fn correct_counts(k: usize, log_w: &[f64], ctx: &SearchContext, noise: &NoiseBank) -> Vec<u32> {
    let n = log_w.len();
    let d = ctx.visibility.row(k);
    // hypothetical log-weight = base + scale·z, with base depending on
    // whether the cell is the hypothesized target
    let mut base_absent = vec![0.0; n];
    let mut base_present = vec![0.0; n];
    let mut scale = vec![0.0; n];
    for j in 0..n {
        let d2 = d[j] * d[j];
        let absent = ctx.responses.stats(j, false, d[j]);
        let present = ctx.responses.stats(j, true, d[j]);
        base_absent[j] = log_w[j] + d2 * absent.mean;
        base_present[j] = log_w[j] + d2 * present.mean;
        scale[j] = d2 * absent.std;
    }
    let mut counts = vec![0u32; n];
    let mut field = vec![0.0; n];
    for s in 0..noise.samples() {
        let z = noise.sample(s);
        for (f, ((b, sc), zj)) in field.iter_mut().zip(base_absent.iter().zip(&scale).zip(z)) {
            *f = b + sc * zj;
        }
        let (mut top, mut top_idx, mut second) = (f64::NEG_INFINITY, usize::MAX, f64::NEG_INFINITY);
        for (j, &v) in field.iter().enumerate() {
            if v > top {
                second = top;
                top = v;
                top_idx = j;
            } else if v > second {
                second = v;
            }
        }
        // every hypothesis but the top one faces the same rival
        for (c, ((b, sc), zi)) in counts.iter_mut().zip(base_present.iter().zip(&scale).zip(z)) {
            *c += (b + sc * zi > top) as u32;
        }
        if top_idx < n {
            counts[top_idx] -= (base_present[top_idx] + scale[top_idx] * z[top_idx] > top) as u32;
            counts[top_idx] += (base_present[top_idx] + scale[top_idx] * z[top_idx] > second) as u32;
        }
    }
    counts
}

/// Index of the maximum score; among scores within a relative `1e-12` of
/// each other the lowest index wins.
pub fn argmax_lowest(scores: impl IntoIterator<Item = (usize, f64)>) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, s) in scores {
        match best {
            None => best = Some((i, s)),
            Some((_, b)) if s > b + 1e-12 * b.abs().max(f64::MIN_POSITIVE) => best = Some((i, s)),
            _ => {}
        }
    }
    best.map(|(i, _)| i)
}

fn candidates(grid: &GridConfig, current: Cell) -> Vec<usize> {
    if grid.num_cells() == 1 {
        return vec![0];
    }
    let cur = grid.index(current);
    (0..grid.num_cells()).filter(|&i| i != cur).collect()
}

/// Expected-correctness maximizer shared by IBS and cIBS.
pub fn next_fixation_ibs(state: &PosteriorState, ctx: &SearchContext, noise: &NoiseBank) -> Cell {
    let grid = ctx.grid();
    let probs = state.probabilities();
    let probs = probs.as_slice().expect("standard layout");
    let log_w = state.log_weights_slice();
    let cands = candidates(grid, ctx.current);
    let scores = exec::map_slice(ctx.exec, &cands, |&k| {
        let counts = correct_counts(k, log_w, ctx, noise);
        probs.iter().zip(&counts).map(|(p, &c)| p * c as f64).sum::<f64>() / noise.samples() as f64
    });
    let best = argmax_lowest(cands.iter().copied().zip(scores)).expect("at least one candidate");
    grid.cell(best)
}

/// Maximizes the visibility-weighted posterior mass `Σ_i p_i · d′(i, k)`.
pub fn next_fixation_greedy(state: &PosteriorState, ctx: &SearchContext) -> Cell {
    let grid = ctx.grid();
    let probs = state.probabilities();
    let probs = probs.as_slice().expect("standard layout");
    let cands = candidates(grid, ctx.current);
    let scores = exec::map_slice(ctx.exec, &cands, |&k| {
        ctx.visibility.row(k).iter().zip(probs).map(|(d, p)| d * p).sum::<f64>()
    });
    grid.cell(argmax_lowest(cands.iter().copied().zip(scores)).expect("at least one candidate"))
}

/// Most salient cell not within `radius` of any visited cell. When every
/// cell is suppressed, falls back to the most salient cell other than the
/// current one.
pub fn next_fixation_saliency(prior: &PriorGrid, visited: &[Cell], radius: usize, grid: &GridConfig) -> Cell {
    let p = prior.as_slice();
    let open = argmax_lowest(
        p.iter()
            .enumerate()
            .filter(|(i, _)| visited.iter().all(|v| v.chebyshev(grid.cell(*i)) > radius))
            .map(|(i, &v)| (i, v)),
    );
    let idx = open.unwrap_or_else(|| {
        log::warn!("saliency searcher: every cell suppressed, falling back to prior argmax");
        let current = visited.last().map(|c| grid.index(*c));
        argmax_lowest(p.iter().enumerate().filter(|(i, _)| Some(*i) != current).map(|(i, &v)| (i, v)))
            .unwrap_or(0)
    });
    grid.cell(idx)
}

/// Everything a search needs besides the trial itself.
pub struct SearchInputs<'a> {
    pub visibility: &'a VisibilityTable,
    pub prior: &'a PriorGrid,
    pub correlation: Option<&'a CorrelationMap>,
    pub template: TemplateParams,
}

impl SearchInputs<'_> {
    fn response_model(&self, policy: Policy) -> Result<Option<ResponseModel>> {
        Ok(match policy {
            Policy::Ibs => Some(ResponseModel::Ibs),
            Policy::Cibs | Policy::Greedy => {
                let corr = self.correlation.ok_or_else(|| {
                    Error::domain(format!("policy {} needs a correlation map", policy.name()))
                })?;
                self.visibility.grid().check_shape(corr.shape())?;
                Some(ResponseModel::cibs(corr, &self.template)?)
            }
            Policy::SaliencyIor => None,
        })
    }
}

/// Runs one trial: fixate, stop on a hit or an exhausted budget, otherwise
/// integrate the responses seen from the current fixation and move.
pub fn run_search(trial: &Trial, inputs: &SearchInputs, cfg: &SearchConfig) -> Result<SearchResult> {
    let grid = *inputs.visibility.grid();
    trial.validate(&grid)?;
    grid.check_shape(&[inputs.prior.shape().0, inputs.prior.shape().1])?;
    if cfg.mc_samples == 0 {
        return Err(Error::domain("mc_samples must be at least 1"));
    }
    let responses = inputs.response_model(cfg.policy)?;
    let target_cell = grid.index(trial.target.target_cell(&grid));
    let key = rng::key_hash(&trial.image_id);
    let mut observation_rng = rng::stream(cfg.seed, key, Purpose::Observation, 0);

    let mut state = PosteriorState::init(inputs.prior);
    let mut path = vec![trial.initial_fixation];
    let mut found = false;
    loop {
        let current = *path.last().expect("non-empty");
        if target_hit(current, &trial.target, &grid) {
            found = true;
            break;
        }
        if path.len() > trial.max_saccades {
            break;
        }
        let next = match &responses {
            None => next_fixation_saliency(inputs.prior, &path, cfg.ior_radius, &grid),
            Some(model) => {
                let k = grid.index(current);
                let d = inputs.visibility.row(k);
                let w: Vec<f64> = (0..grid.num_cells())
                    .map(|i| {
                        let stats: ResponseStats = model.stats(i, i == target_cell, d[i]);
                        observe(stats, cfg.response_mode, &mut observation_rng)
                    })
                    .collect();
                let w = Array2::from_shape_vec(grid.shape(), w).expect("grid sized");
                state.update(current, &w, &inputs.visibility.field(current))?;
                let ctx = SearchContext {
                    visibility: inputs.visibility,
                    responses: model,
                    current,
                    exec: cfg.exec,
                };
                match cfg.policy {
                    Policy::Greedy => next_fixation_greedy(&state, &ctx),
                    _ => {
                        let mut decision_rng =
                            rng::stream(cfg.seed, key, Purpose::Decision, path.len() as u64);
                        let noise = NoiseBank::draw(cfg.mc_samples, grid.num_cells(), &mut decision_rng);
                        next_fixation_ibs(&state, &ctx, &noise)
                    }
                }
            }
        };
        if next == current {
            // single-cell grid: nowhere to move
            break;
        }
        path.push(next);
    }
    let scanpath = collapse_scanpath(&path, Origin::Model)?;
    let saccades_used = scanpath.saccades();
    Ok(SearchResult {
        scanpath,
        found,
        saccades_used,
    })
}
