use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-image found flags, in manifest order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoundVector(pub Vec<bool>);

impl FoundVector {
    pub fn len(&self) -> usize {
        self.0.len()
    }
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

fn check_len(x: &FoundVector, y: &FoundVector) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::domain(format!(
            "found vectors differ in length: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    Ok(())
}

/// `|x ∧ y| / |x ∨ y|`; two all-false vectors agree perfectly (1).
pub fn jaccard(x: &FoundVector, y: &FoundVector) -> Result<f64> {
    check_len(x, y)?;
    let (both, either) = x.0.iter().zip(&y.0).fold((0usize, 0usize), |(b, e), (&a, &c)| {
        (b + (a && c) as usize, e + (a || c) as usize)
    });
    Ok(if either == 0 { 1.0 } else { both as f64 / either as f64 })
}

/// `1 − mean(|x − y|)`.
pub fn mean_agreement(x: &FoundVector, y: &FoundVector) -> Result<f64> {
    check_len(x, y)?;
    if x.is_empty() {
        return Err(Error::domain("mean agreement of empty vectors"));
    }
    let disagree = x.0.iter().zip(&y.0).filter(|(a, b)| a != b).count();
    Ok(1.0 - disagree as f64 / x.len() as f64)
}

/// Model found-vector under one participant's budget schedule: image `i`
/// counts as found iff the model needed at most `budgets[i]` saccades.
/// `model_saccades[i]` is `None` when the model never found the target.
pub fn targets_found_by_model(model_saccades: &[Option<usize>], budgets: &[usize]) -> Result<FoundVector> {
    if model_saccades.len() != budgets.len() {
        return Err(Error::domain("schedule and model results differ in length"));
    }
    Ok(FoundVector(
        model_saccades
            .iter()
            .zip(budgets)
            .map(|(s, &b)| s.is_some_and(|s| s <= b))
            .collect(),
    ))
}
