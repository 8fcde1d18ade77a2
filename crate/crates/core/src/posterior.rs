//! Log-domain target-location posterior.
//!
//! `log_weights[i] = ln prior(i) + Σ_t d′²(i, k_t) · W(i, k_t)`; probabilities
//! are the max-shifted softmax of the log-weights.

use ndarray::{Array2, Zip};

use crate::error::{Error, Result};
use crate::grid::Cell;
use crate::priors::PriorGrid;

#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorState {
    log_weights: Array2<f64>,
    history: Vec<Cell>,
}

impl PosteriorState {
    pub fn init(prior: &PriorGrid) -> Self {
        PosteriorState {
            log_weights: prior.values().mapv(f64::ln),
            history: Vec::new(),
        }
    }

    /// Builds a state directly from log-weights, with an empty history.
    pub fn from_log_weights(log_weights: Array2<f64>) -> Result<Self> {
        if log_weights.iter().any(|v| v.is_nan() || *v == f64::INFINITY) {
            return Err(Error::domain("log-weights must not be NaN or +inf"));
        }
        if log_weights.iter().all(|v| *v == f64::NEG_INFINITY) {
            return Err(Error::domain("at least one log-weight must be finite"));
        }
        Ok(PosteriorState {
            log_weights: log_weights.as_standard_layout().into_owned(),
            history: Vec::new(),
        })
    }

    pub fn log_weights(&self) -> &Array2<f64> {
        &self.log_weights
    }

    pub fn log_weights_slice(&self) -> &[f64] {
        self.log_weights.as_slice().expect("standard layout")
    }

    pub fn history(&self) -> &[Cell] {
        &self.history
    }

    /// Accumulates one fixation at `k`: `log_w[i] += d′[i]² · w[i]`.
    pub fn update(&mut self, k: Cell, w: &Array2<f64>, v: &Array2<f64>) -> Result<()> {
        let shape = self.log_weights.dim();
        for m in [w, v] {
            if m.dim() != shape {
                return Err(Error::Shape {
                    expected: shape,
                    actual: m.dim(),
                });
            }
        }
        if k.row >= shape.0 || k.col >= shape.1 {
            return Err(Error::domain(format!("fixation {k:?} outside the grid")));
        }
        Zip::from(&mut self.log_weights)
            .and(w)
            .and(v)
            .for_each(|lw, &wi, &di| *lw += di * di * wi);
        self.history.push(k);
        Ok(())
    }

    pub fn probabilities(&self) -> Array2<f64> {
        let probs = softmax(self.log_weights_slice());
        Array2::from_shape_vec(self.log_weights.dim(), probs).expect("same size")
    }
}

/// Max-shifted softmax.
pub fn softmax(log_weights: &[f64]) -> Vec<f64> {
    let max = log_weights.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut out: Vec<f64> = log_weights.iter().map(|&l| (l - max).exp()).collect();
    let z: f64 = out.iter().sum();
    out.iter_mut().for_each(|p| *p /= z);
    out
}
