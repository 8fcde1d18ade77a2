//! AUC of saliency maps as fixation predictors, per fixation-rank bucket.

use std::fmt;
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec;
use crate::grid::{GridConfig, PixelPoint};
use crate::harness::config::{PriorSpec, RunConfig};
use crate::harness::dataset::{Dataset, ImageEntry};
use crate::harness::io::write_atomic;
use crate::metrics::{auc_from_scores, negative_scores, rank_auc, roc_auc, AucVariant, SortedMap, BORJI_RESAMPLES};
use crate::priors::{default_center_sigma, human_density_map, SaliencyMap};

/// Fixation ranks are 1-based positions in the raw (uncollapsed) trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RankBucket {
    pub first: usize,
    pub last: usize,
}

impl RankBucket {
    pub const STANDARD: [RankBucket; 6] = [
        RankBucket { first: 1, last: 1 },
        RankBucket { first: 2, last: 2 },
        RankBucket { first: 3, last: 3 },
        RankBucket { first: 4, last: 4 },
        RankBucket { first: 5, last: 8 },
        RankBucket { first: 9, last: 12 },
    ];

    pub fn contains(&self, rank: usize) -> bool {
        (self.first..=self.last).contains(&rank)
    }
}

impl fmt::Display for RankBucket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.first == self.last {
            write!(f, "{}", self.first)
        } else {
            write!(f, "{}-{}", self.first, self.last)
        }
    }
}

impl std::str::FromStr for RankBucket {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::domain(format!("bad rank filter '{s}' (e.g. 3 or 5-8)"));
        let (a, b) = s.split_once('-').unwrap_or((s, s));
        let first: usize = a.trim().parse().map_err(|_| bad())?;
        let last: usize = b.trim().parse().map_err(|_| bad())?;
        if first == 0 || last < first {
            return Err(bad());
        }
        Ok(RankBucket { first, last })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AucRow {
    pub map: String,
    pub variant: AucVariant,
    pub rank: String,
    /// Mean over images with at least one fixation in the bucket.
    pub auc: Option<f64>,
    pub images: usize,
}

/// Pixel-resolution map for a named prior on one image.
pub fn saliency_for(spec: &PriorSpec, entry: &ImageEntry, dataset: &Dataset, cfg: &RunConfig) -> Result<SaliencyMap> {
    let grid: &GridConfig = &dataset.grid;
    let (h, w) = grid.image_shape();
    match spec {
        PriorSpec::Flat => SaliencyMap::new(&entry.image_id, Array2::ones((h, w))),
        PriorSpec::Center => {
            let sigma = cfg.center_sigma_px.unwrap_or_else(|| default_center_sigma(grid));
            let (cx, cy) = (w as f64 / 2.0, h as f64 / 2.0);
            let values = Array2::from_shape_fn((h, w), |(y, x)| {
                let (dx, dy) = (x as f64 - cx, y as f64 - cy);
                (-(dx * dx + dy * dy) / (2.0 * sigma * sigma)).exp()
            });
            SaliencyMap::new(&entry.image_id, values)
        }
        PriorSpec::Noise => Err(Error::domain("the noise prior has no pixel-level saliency map")),
        PriorSpec::Human => human_density_map(
            &entry.image_id,
            &dataset.third_fixations(&entry.image_id),
            cfg.human_kernel_sigma_px,
            grid,
        ),
        PriorSpec::Saliency(name) => {
            let path = entry.saliency_paths.get(name).ok_or_else(|| {
                Error::domain(format!("saliency map '{name}' missing for image '{}'", entry.image_id))
            })?;
            SaliencyMap::load(&entry.image_id, path, grid)
        }
    }
}

fn fixations_in(dataset: &Dataset, image_id: &str, bucket: RankBucket) -> Vec<PixelPoint> {
    dataset
        .trials_for_image(image_id)
        .flat_map(|t| {
            t.fixations
                .iter()
                .enumerate()
                .filter(move |(i, _)| bucket.contains(i + 1))
                .map(|(_, p)| *p)
        })
        .collect()
}

/// How per-image fixations are combined into one AUC.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aggregation {
    /// AUC per image, then the mean over images.
    #[default]
    PerImage,
    /// One ROC over the positives and negatives of all images.
    Pooled,
}

fn mean(vals: &[f64]) -> Option<f64> {
    (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
}

/// AUC per (map, variant, rank bucket). With `rank_filter` only that
/// bucket is scored. Missing map files are an error naming the map.
pub fn eval_saliency(
    dataset: &Dataset,
    maps: &[PriorSpec],
    variants: &[AucVariant],
    rank_filter: Option<RankBucket>,
    aggregation: Aggregation,
    cfg: &RunConfig,
) -> Result<Vec<AucRow>> {
    let buckets: Vec<RankBucket> = match rank_filter {
        Some(b) => vec![b],
        None => RankBucket::STANDARD.to_vec(),
    };
    // [image][bucket]
    let fix: Vec<Vec<Vec<PixelPoint>>> = dataset
        .images
        .iter()
        .map(|e| buckets.iter().map(|&b| fixations_in(dataset, &e.image_id, b)).collect())
        .collect();
    let others = |i: usize, b: usize| -> Vec<PixelPoint> {
        (0..fix.len()).filter(|&j| j != i).flat_map(|j| fix[j][b].iter().copied()).collect()
    };

    let mut rows = Vec::new();
    for spec in maps {
        let loaded = exec::map_slice(cfg.exec, &dataset.images, |e| saliency_for(spec, e, dataset, cfg));
        let loaded: Vec<SaliencyMap> = loaded.into_iter().collect::<Result<_>>()?;
        let ranked: Vec<SortedMap> = exec::map_range(cfg.exec, loaded.len(), |i| SortedMap::new(&loaded[i]));
        let cells: Vec<(usize, usize)> = (0..variants.len())
            .flat_map(|v| (0..buckets.len()).map(move |b| (v, b)))
            .collect();
        let scored: Vec<(Option<f64>, usize)> = match aggregation {
            Aggregation::PerImage => exec::map_slice(cfg.exec, &cells, |&(v, b)| {
                let vals: Vec<f64> = (0..loaded.len())
                    .filter_map(|i| {
                        let pos = &fix[i][b];
                        if pos.is_empty() {
                            return None;
                        }
                        match variants[v] {
                            AucVariant::PaperMain | AucVariant::Judd => ranked[i].auc_judd(pos),
                            variant => roc_auc(&loaded[i], pos, variant, &others(i, b), cfg.seed),
                        }
                        .ok()
                    })
                    .collect();
                (mean(&vals), vals.len())
            }),
            Aggregation::Pooled => {
                let mut all: Vec<f64> = ranked.iter().flat_map(|r| r.sorted().iter().copied()).collect();
                all.sort_by(f64::total_cmp);
                exec::map_slice(cfg.exec, &cells, |&(v, b)| {
                    pooled_auc(&loaded, &ranked, &all, &fix, b, variants[v], &others, cfg.seed)
                })
            }
        };
        for (&(v, b), (auc, images)) in cells.iter().zip(scored) {
            rows.push(AucRow {
                map: spec.name().to_string(),
                variant: variants[v],
                rank: buckets[b].to_string(),
                auc,
                images,
            });
        }
    }
    Ok(rows)
}

#[allow(clippy::too_many_arguments)]
fn pooled_auc(
    maps: &[SaliencyMap],
    ranked: &[SortedMap],
    all_sorted: &[f64],
    fix: &[Vec<Vec<PixelPoint>>],
    b: usize,
    variant: AucVariant,
    others: &dyn Fn(usize, usize) -> Vec<PixelPoint>,
    seed: u64,
) -> (Option<f64>, usize) {
    let used: Vec<usize> = (0..maps.len()).filter(|&i| !fix[i][b].is_empty()).collect();
    let pos: Vec<f64> = used.iter().flat_map(|&i| fix[i][b].iter().map(move |&p| maps[i].at(p))).collect();
    let auc = match variant {
        AucVariant::PaperMain | AucVariant::Judd => {
            let excluded: Result<Vec<Vec<f64>>> = used.iter().map(|&i| ranked[i].fixated_values(&fix[i][b])).collect();
            excluded.ok().and_then(|ex| {
                let mut ex: Vec<f64> = ex.into_iter().flatten().collect();
                ex.sort_by(f64::total_cmp);
                rank_auc(all_sorted, &ex, &pos).ok()
            })
        }
        AucVariant::Borji => {
            let per: Option<Vec<f64>> = (0..BORJI_RESAMPLES)
                .map(|r| {
                    let neg: Result<Vec<Vec<f64>>> = used
                        .iter()
                        .map(|&i| negative_scores(&maps[i], &fix[i][b], variant, &[], seed, r))
                        .collect();
                    auc_from_scores(&pos, &neg.ok()?.concat()).ok()
                })
                .collect();
            per.and_then(|v| mean(&v))
        }
        AucVariant::Shuffled => {
            let neg: Vec<f64> = used
                .iter()
                .flat_map(|&i| others(i, b).into_iter().map(move |p| maps[i].at(p)))
                .collect();
            auc_from_scores(&pos, &neg).ok()
        }
    };
    (auc, if auc.is_some() { used.len() } else { 0 })
}

pub fn write_auc_table(rows: &[AucRow], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| Error::domain(e.to_string());
    w.write_record(["map", "variant", "rank", "auc", "images"]).map_err(err)?;
    for r in rows {
        w.write_record([
            r.map.clone(),
            r.variant.name().to_string(),
            r.rank.clone(),
            r.auc.map(|a| a.to_string()).unwrap_or_default(),
            r.images.to_string(),
        ])
        .map_err(err)?;
    }
    write_atomic(path, &w.into_inner().map_err(|e| Error::domain(e.to_string()))?)
}

/// Every map name usable for this dataset: the built-ins plus the names
/// listed in the manifest.
pub fn available_maps(dataset: &Dataset) -> Vec<PriorSpec> {
    let mut maps = vec![PriorSpec::Flat, PriorSpec::Center, PriorSpec::Human];
    let mut names: Vec<&String> = dataset.images.iter().flat_map(|e| e.saliency_paths.keys()).collect();
    names.sort();
    names.dedup();
    maps.extend(names.into_iter().map(|n| PriorSpec::Saliency(n.clone())));
    maps
}
