//! ROC curves and AUC for saliency maps used as pixel classifiers.

use std::collections::HashSet;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::PixelPoint;
use crate::priors::SaliencyMap;
use crate::rng::{self, Purpose};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AucVariant {
    /// Negatives are every non-fixated pixel.
    PaperMain,
    /// Same negatives as `PaperMain`, reported under its common name.
    Judd,
    /// Negatives are uniformly sampled pixels, as many as positives,
    /// averaged over ten seeded resamples.
    Borji,
    /// Negatives are fixation locations from other images.
    Shuffled,
}

impl AucVariant {
    pub const ALL: [AucVariant; 4] = [AucVariant::PaperMain, AucVariant::Judd, AucVariant::Borji, AucVariant::Shuffled];

    pub fn name(self) -> &'static str {
        match self {
            AucVariant::PaperMain => "paper_main",
            AucVariant::Judd => "judd",
            AucVariant::Borji => "borji",
            AucVariant::Shuffled => "shuffled",
        }
    }
}

impl std::str::FromStr for AucVariant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        AucVariant::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| Error::domain(format!("unknown AUC variant '{s}'")))
    }
}

/// `(fpr, tpr)` points from (0,0) to (1,1), one per distinct threshold.
pub fn roc_curve(positives: &[f64], negatives: &[f64]) -> Result<Vec<(f64, f64)>> {
    if positives.is_empty() || negatives.is_empty() {
        return Err(Error::domain("ROC needs at least one positive and one negative"));
    }
    let mut scored: Vec<(f64, bool)> = positives
        .iter()
        .map(|&s| (s, true))
        .chain(negatives.iter().map(|&s| (s, false)))
        .collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0));
    let (np, nn) = (positives.len() as f64, negatives.len() as f64);
    let mut curve = vec![(0.0, 0.0)];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut i = 0;
    while i < scored.len() {
        let threshold = scored[i].0;
        while i < scored.len() && scored[i].0 == threshold {
            if scored[i].1 {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        curve.push((fp as f64 / nn, tp as f64 / np));
    }
    Ok(curve)
}

/// Trapezoidal area under the ROC curve.
pub fn auc_from_scores(positives: &[f64], negatives: &[f64]) -> Result<f64> {
    let curve = roc_curve(positives, negatives)?;
    Ok(curve
        .windows(2)
        .map(|w| (w[1].0 - w[0].0) * (w[1].1 + w[0].1) / 2.0)
        .sum())
}

/// AUC of a saliency map at the given (in-bounds) fixation pixels.
///
/// `other_fixations` supplies the negatives for [`AucVariant::Shuffled`] and
/// is ignored otherwise.
pub fn roc_auc(
    map: &SaliencyMap,
    positives: &[PixelPoint],
    variant: AucVariant,
    other_fixations: &[PixelPoint],
    seed: u64,
) -> Result<f64> {
    if positives.is_empty() {
        return Err(Error::domain("AUC needs at least one fixation"));
    }
    let (h, w) = map.values.dim();
    let in_bounds = |p: &PixelPoint| p.x >= 0 && p.y >= 0 && (p.x as usize) < w && (p.y as usize) < h;
    if let Some(p) = positives.iter().chain(other_fixations).find(|p| !in_bounds(p)) {
        return Err(Error::domain(format!("fixation ({}, {}) outside the saliency map", p.x, p.y)));
    }
    let pos: Vec<f64> = positives.iter().map(|&p| map.at(p)).collect();
    match variant {
        AucVariant::Borji => {
            let mut total = 0.0;
            for r in 0..BORJI_RESAMPLES {
                total += auc_from_scores(&pos, &negative_scores(map, positives, variant, other_fixations, seed, r)?)?;
            }
            Ok(total / BORJI_RESAMPLES as f64)
        }
        _ => auc_from_scores(&pos, &negative_scores(map, positives, variant, other_fixations, seed, 0)?),
    }
}

/// Number of seeded negative resamples averaged by [`AucVariant::Borji`].
pub const BORJI_RESAMPLES: u64 = 10;

/// Saliency values of the negative set for one variant. `resample` picks
/// the Borji draw and is ignored by the other variants. Fixations must be
/// in bounds.
pub fn negative_scores(
    map: &SaliencyMap,
    positives: &[PixelPoint],
    variant: AucVariant,
    other_fixations: &[PixelPoint],
    seed: u64,
    resample: u64,
) -> Result<Vec<f64>> {
    let (h, w) = map.values.dim();
    match variant {
        AucVariant::PaperMain | AucVariant::Judd => {
            let fixated: HashSet<(usize, usize)> =
                positives.iter().map(|p| (p.y as usize, p.x as usize)).collect();
            Ok(map
                .values
                .indexed_iter()
                .filter(|(idx, _)| !fixated.contains(idx))
                .map(|(_, &v)| v)
                .collect())
        }
        AucVariant::Borji => {
            let mut rng = rng::stream(seed, rng::key_hash(&map.image_id), Purpose::Borji, resample);
            Ok((0..positives.len())
                .map(|_| map.values[[rng.random_range(0..h), rng.random_range(0..w)]])
                .collect())
        }
        AucVariant::Shuffled => {
            if other_fixations.is_empty() {
                return Err(Error::domain("shuffled AUC needs fixations from other images"));
            }
            Ok(other_fixations.iter().map(|&p| map.at(p)).collect())
        }
    }
}

fn below_and_equal(sorted: &[f64], v: f64) -> (usize, usize) {
    let lo = sorted.partition_point(|&x| x < v);
    let hi = sorted.partition_point(|&x| x <= v);
    (lo, hi - lo)
}

/// Mann-Whitney AUC of `positives` against `all` minus `excluded`; both
/// slices sorted ascending, `excluded` a sub-multiset of `all`.
pub fn rank_auc(all: &[f64], excluded: &[f64], positives: &[f64]) -> Result<f64> {
    let negatives = all.len() - excluded.len();
    if positives.is_empty() || negatives == 0 {
        return Err(Error::domain("ROC needs at least one positive and one negative"));
    }
    let mut score = 0.0;
    for &v in positives {
        let (below, equal) = below_and_equal(all, v);
        let (xb, xe) = below_and_equal(excluded, v);
        score += (below - xb) as f64 + 0.5 * (equal - xe) as f64;
    }
    Ok(score / (positives.len() * negatives) as f64)
}

/// Judd/main-variant AUC by rank counting against a pre-sorted copy of the
/// map, for scoring many fixation subsets of one map. Equal to the
/// threshold sweep of [`roc_auc`] (the trapezoidal ROC area is the
/// Mann-Whitney statistic with ties counted ½).
pub struct SortedMap<'a> {
    map: &'a SaliencyMap,
    sorted: Vec<f64>,
}

impl<'a> SortedMap<'a> {
    pub fn new(map: &'a SaliencyMap) -> Self {
        let mut sorted: Vec<f64> = map.values.iter().copied().collect();
        sorted.sort_by(f64::total_cmp);
        SortedMap { map, sorted }
    }

    pub fn image_id(&self) -> &str {
        &self.map.image_id
    }

    /// All pixel values, ascending.
    pub fn sorted(&self) -> &[f64] {
        &self.sorted
    }

    /// Values at the distinct fixated pixels, ascending.
    pub fn fixated_values(&self, positives: &[PixelPoint]) -> Result<Vec<f64>> {
        let (h, w) = self.map.values.dim();
        let mut fixated: Vec<(usize, usize)> = Vec::with_capacity(positives.len());
        for p in positives {
            if p.x < 0 || p.y < 0 || p.x as usize >= w || p.y as usize >= h {
                return Err(Error::domain(format!("fixation ({}, {}) outside the saliency map", p.x, p.y)));
            }
            fixated.push((p.y as usize, p.x as usize));
        }
        fixated.sort_unstable();
        fixated.dedup();
        let mut vals: Vec<f64> = fixated.iter().map(|&idx| self.map.values[idx]).collect();
        vals.sort_by(f64::total_cmp);
        Ok(vals)
    }

    pub fn auc_judd(&self, positives: &[PixelPoint]) -> Result<f64> {
        let excluded = self.fixated_values(positives)?;
        let pos: Vec<f64> = positives.iter().map(|&p| self.map.at(p)).collect();
        rank_auc(&self.sorted, &excluded, &pos)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;

    /// Probability a random positive outscores a random negative, ties ½.
    fn pairwise_oracle(pos: &[f64], neg: &[f64]) -> f64 {
        let mut s = 0.0;
        for p in pos {
            for n in neg {
                s += if p > n { 1.0 } else if p == n { 0.5 } else { 0.0 };
            }
        }
        s / (pos.len() * neg.len()) as f64
    }

    #[test]
    fn tiny_three_pixel_case() {
        assert_eq!(auc_from_scores(&[0.9], &[0.5, 0.1]).unwrap(), 1.0);
        assert_eq!(auc_from_scores(&[0.1], &[0.5, 0.9]).unwrap(), 0.0);
        assert_eq!(auc_from_scores(&[0.5], &[0.5, 0.5]).unwrap(), 0.5);
        assert!(auc_from_scores(&[], &[0.5]).is_err());
    }

    #[test]
    fn matches_pairwise_oracle() {
        let pos = [0.3, 0.8, 0.8, 0.1, 0.55, 0.9];
        let neg = [0.2, 0.8, 0.4, 0.4, 0.05, 0.9, 0.6];
        let auc = auc_from_scores(&pos, &neg).unwrap();
        assert!((auc - pairwise_oracle(&pos, &neg)).abs() < 1e-12);
    }

    #[test]
    fn map_level_cases() {
        let mut v = Array2::zeros((20, 30));
        let fix = [PixelPoint::new(3, 4), PixelPoint::new(20, 10)];
        for p in &fix {
            v[[p.y as usize, p.x as usize]] = 1.0;
        }
        let map = SaliencyMap::new("m", v).unwrap();
        let others = [PixelPoint::new(0, 0), PixelPoint::new(5, 5)];
        for variant in AucVariant::ALL {
            assert_eq!(roc_auc(&map, &fix, variant, &others, 1).unwrap(), 1.0, "{variant:?}");
        }
        let flat = SaliencyMap::new("f", Array2::from_elem((20, 30), 0.3)).unwrap();
        for variant in AucVariant::ALL {
            assert_eq!(roc_auc(&flat, &fix, variant, &others, 1).unwrap(), 0.5);
        }
        assert!(roc_auc(&map, &fix, AucVariant::Shuffled, &[], 1).is_err());
        assert!(roc_auc(&map, &[], AucVariant::Judd, &[], 1).is_err());
        assert!(roc_auc(&map, &[PixelPoint::new(30, 0)], AucVariant::Judd, &[], 1).is_err());
        assert_eq!(
            roc_auc(&map, &fix, AucVariant::Borji, &[], 9).unwrap(),
            roc_auc(&map, &fix, AucVariant::Borji, &[], 9).unwrap()
        );
    }

    #[test]
    fn rank_route_matches_threshold_sweep() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        // coarse values so ties are common
        let v = Array2::from_shape_simple_fn((40, 50), || (rng.random::<f64>() * 8.0).floor());
        let map = SaliencyMap::new("m", v).unwrap();
        let fix: Vec<PixelPoint> = (0..60)
            .map(|_| PixelPoint::new(rng.random_range(0..50), rng.random_range(0..40)))
            .collect();
        let sweep = roc_auc(&map, &fix, AucVariant::Judd, &[], 0).unwrap();
        let ranked = SortedMap::new(&map).auc_judd(&fix).unwrap();
        assert!((sweep - ranked).abs() < 1e-12, "{sweep} vs {ranked}");
    }
}
