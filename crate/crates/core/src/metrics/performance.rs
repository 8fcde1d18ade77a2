use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub budget: usize,
    pub proportion: f64,
    /// Spread across participants, when the curve summarizes several.
    pub std: Option<f64>,
}

/// Proportion of targets found per saccade budget, budgets ascending.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PerformanceCurve {
    pub points: Vec<CurvePoint>,
}

impl PerformanceCurve {
    pub fn budgets(&self) -> Vec<usize> {
        self.points.iter().map(|p| p.budget).collect()
    }

    pub fn get(&self, budget: usize) -> Option<&CurvePoint> {
        self.points.iter().find(|p| p.budget == budget)
    }

    pub fn is_non_decreasing(&self) -> bool {
        self.points.windows(2).all(|w| w[1].proportion >= w[0].proportion)
    }
}

/// Mean found-rate per budget.
pub fn performance_curve(results: &BTreeMap<usize, Vec<bool>>) -> Result<PerformanceCurve> {
    let points = results
        .iter()
        .map(|(&budget, found)| {
            if found.is_empty() {
                return Err(Error::domain(format!("no results for budget {budget}")));
            }
            let hits = found.iter().filter(|&&f| f).count();
            Ok(CurvePoint {
                budget,
                proportion: hits as f64 / found.len() as f64,
                std: None,
            })
        })
        .collect::<Result<_>>()?;
    Ok(PerformanceCurve { points })
}

/// `Σ_N |P_human(N) − P_model(N)| / (B·σ_N²)` with `B` the number of budgets
/// and `σ_N` the human per-budget spread.
pub fn weighted_distance(human: &PerformanceCurve, model: &PerformanceCurve) -> Result<f64> {
    if human.budgets() != model.budgets() || human.points.is_empty() {
        return Err(Error::domain(format!(
            "budget sets differ: human {:?} vs model {:?}",
            human.budgets(),
            model.budgets()
        )));
    }
    let count = human.points.len() as f64;
    human
        .points
        .iter()
        .zip(&model.points)
        .map(|(h, m)| {
            let sigma = h.std.unwrap_or(0.0);
            if !(sigma > 0.0) {
                return Err(Error::domain(format!(
                    "human spread at budget {} is zero; weighted distance undefined",
                    h.budget
                )));
            }
            Ok((h.proportion - m.proportion).abs() / (count * sigma * sigma))
        })
        .sum()
}
