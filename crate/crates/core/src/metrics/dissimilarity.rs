//! Scanpath shape dissimilarity: saccade-vector sequences aligned by
//! dynamic programming.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{cell_center, GridConfig, Scanpath};

fn saccade_vectors(s: &Scanpath, cfg: &GridConfig) -> Vec<(f64, f64)> {
    s.fixations()
        .windows(2)
        .map(|w| {
            let (a, b) = (cell_center(w[0], cfg), cell_center(w[1], cfg));
            ((b.x - a.x) as f64, (b.y - a.y) as f64)
        })
        .collect()
}

/// Alignment cell: total cost, then number of steps.
#[derive(Clone, Copy, PartialEq, PartialOrd)]
struct Cost(f64, usize);

impl Cost {
    fn add(self, c: f64) -> Cost {
        Cost(self.0 + c, self.1 + 1)
    }
}

fn min3(a: Cost, b: Cost, c: Cost) -> Cost {
    let ab = if b < a { b } else { a };
    if c < ab {
        c
    } else {
        ab
    }
}

/// Mean per-step cost of the cheapest alignment of the two saccade-vector
/// sequences, divided by the image diagonal and clamped to `[0, 1]`.
///
/// Substituting one saccade for another costs the length of their vector
/// difference; an unmatched saccade is paired with the zero vector. Among
/// equally cheap alignments the one with fewer steps is used.
pub fn scanpath_dissimilarity(s1: &Scanpath, s2: &Scanpath, cfg: &GridConfig) -> Result<f64> {
    if s1.len() < 2 || s2.len() < 2 {
        return Err(Error::domain("scanpath dissimilarity needs at least one saccade per scanpath"));
    }
    let a = saccade_vectors(s1, cfg);
    let b = saccade_vectors(s2, cfg);
    let norm = |v: (f64, f64)| v.0.hypot(v.1);
    let (n, m) = (a.len(), b.len());
    let mut dp = vec![Cost(0.0, 0); (n + 1) * (m + 1)];
    let at = |i: usize, j: usize| i * (m + 1) + j;
    for i in 1..=n {
        dp[at(i, 0)] = dp[at(i - 1, 0)].add(norm(a[i - 1]));
    }
    for j in 1..=m {
        dp[at(0, j)] = dp[at(0, j - 1)].add(norm(b[j - 1]));
    }
    for i in 1..=n {
        for j in 1..=m {
            let sub = norm((a[i - 1].0 - b[j - 1].0, a[i - 1].1 - b[j - 1].1));
            dp[at(i, j)] = min3(
                dp[at(i - 1, j - 1)].add(sub),
                dp[at(i - 1, j)].add(norm(a[i - 1])),
                dp[at(i, j - 1)].add(norm(b[j - 1])),
            );
        }
    }
    let Cost(total, steps) = dp[at(n, m)];
    Ok((total / steps as f64 / cfg.diagonal()).clamp(0.0, 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DissimilarityRecord {
    pub image_id: String,
    /// Mean dissimilarity over unordered pairs of humans.
    pub bh_sd: f64,
    /// Mean dissimilarity between each human and the model.
    pub hm_sd: f64,
    pub humans: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedImage {
    pub image_id: String,
    pub reason: String,
}

/// Correct human scanpaths and the model scanpath for one image.
#[derive(Debug, Clone)]
pub struct ImageScanpaths {
    pub image_id: String,
    pub humans: Vec<Scanpath>,
    pub model: Option<Scanpath>,
}

/// Per-image bhSD/hmSD. Images with fewer than two usable human scanpaths
/// (or no usable model scanpath) are skipped and reported.
pub fn dissimilarity_records(
    images: &[ImageScanpaths],
    cfg: &GridConfig,
) -> (Vec<DissimilarityRecord>, Vec<SkippedImage>) {
    let mut records = Vec::new();
    let mut skipped = Vec::new();
    for img in images {
        let humans: Vec<&Scanpath> = img.humans.iter().filter(|s| s.len() >= 2).collect();
        let skip = |reason: &str| SkippedImage {
            image_id: img.image_id.clone(),
            reason: reason.to_string(),
        };
        if humans.len() < 2 {
            skipped.push(skip("fewer than two correct human scanpaths with a saccade"));
            continue;
        }
        let Some(model) = img.model.as_ref().filter(|m| m.len() >= 2) else {
            skipped.push(skip("model scanpath has no saccade"));
            continue;
        };
        let d = |a: &Scanpath, b: &Scanpath| scanpath_dissimilarity(a, b, cfg).expect("lengths checked");
        let mut pair_sum = 0.0;
        let mut pairs = 0usize;
        for (i, a) in humans.iter().enumerate() {
            for b in &humans[i + 1..] {
                pair_sum += d(a, b);
                pairs += 1;
            }
        }
        let hm: f64 = humans.iter().map(|h| d(h, model)).sum::<f64>() / humans.len() as f64;
        records.push(DissimilarityRecord {
            image_id: img.image_id.clone(),
            bh_sd: pair_sum / pairs as f64,
            hm_sd: hm,
            humans: humans.len(),
        });
    }
    (records, skipped)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{collapse_scanpath, Cell, Origin};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn path(cells: &[(usize, usize)]) -> Scanpath {
        let cells: Vec<Cell> = cells.iter().map(|&(c, r)| Cell::new(c, r)).collect();
        collapse_scanpath(&cells, Origin::Human).unwrap()
    }

    #[test]
    fn examples() {
        let g = GridConfig::default();
        let s = path(&[(3, 3), (10, 5), (4, 20)]);
        assert_eq!(scanpath_dissimilarity(&s, &s, &g).unwrap(), 0.0);
        let right = path(&[(5, 5), (6, 5)]);
        let left = path(&[(5, 5), (4, 5)]);
        assert_relative_eq!(scanpath_dissimilarity(&right, &left, &g).unwrap(), 0.05, epsilon = 1e-15);
        assert!(scanpath_dissimilarity(&path(&[(1, 1)]), &s, &g).is_err());
    }

    #[test]
    fn unequal_lengths_use_indels() {
        let g = GridConfig::default();
        let a = path(&[(0, 0), (1, 0)]);
        let b = path(&[(0, 0), (1, 0), (1, 1)]);
        // match (32,0) exactly, pair (0,32) with zero: cost 32 over 2 steps
        assert_relative_eq!(scanpath_dissimilarity(&a, &b, &g).unwrap(), 16.0 / 1280.0, epsilon = 1e-15);
    }

    #[test]
    fn records() {
        let g = GridConfig::default();
        let s = path(&[(1, 1), (5, 5), (9, 2)]);
        let same = ImageScanpaths { image_id: "a".into(), humans: vec![s.clone(), s.clone()], model: Some(s.clone()) };
        let h2 = path(&[(1, 1), (1, 9)]);
        let h3 = path(&[(1, 1), (20, 1), (20, 20)]);
        let mixed = ImageScanpaths { image_id: "b".into(), humans: vec![s.clone(), h2.clone(), h3.clone()], model: Some(h2.clone()) };
        let lonely = ImageScanpaths { image_id: "c".into(), humans: vec![s.clone(), path(&[(2, 2)])], model: Some(s.clone()) };
        let (recs, skipped) = dissimilarity_records(&[same, mixed, lonely], &g);
        assert_eq!(recs.len(), 2);
        assert_eq!(skipped.len(), 1);
        assert_eq!(skipped[0].image_id, "c");
        assert_eq!((recs[0].bh_sd, recs[0].hm_sd), (0.0, 0.0));
        let max_pair = [(&s, &h2), (&s, &h3), (&h2, &h3)]
            .iter()
            .map(|(a, b)| scanpath_dissimilarity(a, b, &g).unwrap())
            .fold(0.0, f64::max);
        assert!(recs[1].hm_sd <= max_pair);
    }

    proptest! {
        #[test]
        fn identity_symmetry_range(
            a in prop::collection::vec((0usize..32, 0usize..24), 2..10),
            b in prop::collection::vec((0usize..32, 0usize..24), 2..10),
        ) {
            let g = GridConfig::default();
            let (pa, pb) = (path(&a), path(&b));
            prop_assume!(pa.len() >= 2 && pb.len() >= 2);
            let d = scanpath_dissimilarity(&pa, &pb, &g).unwrap();
            prop_assert!((0.0..=1.0).contains(&d));
            prop_assert_eq!(d, scanpath_dissimilarity(&pb, &pa, &g).unwrap());
            prop_assert_eq!(scanpath_dissimilarity(&pa, &pa, &g).unwrap(), 0.0);
        }
    }
}
