//! Human-versus-model report: performance curves, agreement metrics and
//! scanpath dissimilarity.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{collapse_scanpath, Origin};
use crate::harness::dataset::Dataset;
use crate::harness::io::write_atomic;
use crate::harness::run::ModelRecord;
use crate::metrics::{
    dissimilarity_records, jaccard, mean_agreement, mean_std, regression_slope_null_intercept, spearman,
    targets_found_by_model, weighted_distance, CurvePoint, DissimilarityRecord, FoundVector, ImageScanpaths,
    PerformanceCurve, SkippedImage,
};

/// One line of the summary table. `value` is `None` when the metric is
/// undefined on this data; `note` says why.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub metric: String,
    pub value: Option<f64>,
    pub std: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParticipantAgreement {
    pub subject_id: String,
    pub mean_agreement: f64,
    pub jaccard: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportBundle {
    pub table: Vec<MetricRow>,
    pub human_curve: PerformanceCurve,
    pub model_curve: PerformanceCurve,
    pub participants: Vec<ParticipantAgreement>,
    pub dissimilarity: Vec<DissimilarityRecord>,
    pub skipped: Vec<SkippedImage>,
}

pub const TABLE_METRICS: [&str; 5] = [
    "weighted_distance",
    "mean_agreement",
    "jaccard_index",
    "regression_slope",
    "spearman_rho",
];

fn row(metric: &str, r: Result<(f64, Option<f64>)>) -> MetricRow {
    match r {
        Ok((value, std)) => MetricRow {
            metric: metric.into(),
            value: Some(value),
            std,
            note: None,
        },
        Err(e) => MetricRow {
            metric: metric.into(),
            value: None,
            std: None,
            note: Some(e.to_string()),
        },
    }
}

/// Saccades the model needed per image (`None` if it never found the
/// target), read from the largest-budget run of each image.
fn model_saccades(records: &[&ModelRecord]) -> Option<usize> {
    let best = records.iter().max_by_key(|r| r.budget)?;
    best.found.then_some(best.saccades)
}

pub fn evaluate(dataset: &Dataset, records: &[ModelRecord]) -> Result<ReportBundle> {
    let mut by_image: BTreeMap<&str, Vec<&ModelRecord>> = BTreeMap::new();
    for r in records {
        by_image.entry(r.image_id.as_str()).or_default().push(r);
    }
    let missing: Vec<&str> = dataset
        .images
        .iter()
        .map(|e| e.image_id.as_str())
        .filter(|id| !by_image.contains_key(id))
        .collect();
    if !missing.is_empty() {
        return Err(Error::domain(format!("model results missing for images: {}", missing.join(", "))));
    }

    // Human curve: per-subject found rate per budget, then mean/std across subjects.
    let budgets: BTreeSet<usize> = dataset.trials.iter().map(|t| t.max_saccades).collect();
    let mut per_subject: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for subject in dataset.subjects() {
        for &b in &budgets {
            let trials: Vec<_> = dataset
                .trials
                .iter()
                .filter(|t| t.subject_id == subject && t.max_saccades == b)
                .collect();
            if !trials.is_empty() {
                let rate = trials.iter().filter(|t| t.found).count() as f64 / trials.len() as f64;
                per_subject.entry(b).or_default().push(rate);
            }
        }
    }
    let human_curve = PerformanceCurve {
        points: per_subject
            .iter()
            .map(|(&budget, rates)| {
                let (mean, std) = mean_std(rates).expect("non-empty");
                CurvePoint { budget, proportion: mean, std: Some(std) }
            })
            .collect(),
    };

    // Model curve over the same budgets, using the prefix property for
    // budgets that were not run explicitly.
    let model_curve = PerformanceCurve {
        points: budgets
            .iter()
            .map(|&b| {
                let found = dataset
                    .images
                    .iter()
                    .filter(|e| {
                        let recs = &by_image[e.image_id.as_str()];
                        match recs.iter().find(|r| r.budget == b) {
                            Some(r) => r.found,
                            None => model_saccades(recs).is_some_and(|s| s <= b),
                        }
                    })
                    .count();
                CurvePoint {
                    budget: b,
                    proportion: found as f64 / dataset.images.len() as f64,
                    std: None,
                }
            })
            .collect(),
    };

    // Per-participant agreement over the images each participant saw.
    let mut participants = Vec::new();
    for subject in dataset.subjects() {
        let trials: Vec<_> = dataset.trials.iter().filter(|t| t.subject_id == subject).collect();
        let tfp = FoundVector(trials.iter().map(|t| t.found).collect());
        let sacc: Vec<Option<usize>> = trials.iter().map(|t| model_saccades(&by_image[t.image_id.as_str()])).collect();
        let schedule: Vec<usize> = trials.iter().map(|t| t.max_saccades).collect();
        let tfm = targets_found_by_model(&sacc, &schedule)?;
        participants.push(ParticipantAgreement {
            subject_id: subject.to_string(),
            mean_agreement: mean_agreement(&tfp, &tfm)?,
            jaccard: jaccard(&tfp, &tfm)?,
        });
    }

    // Scanpath dissimilarity over correct trials.
    let images: Vec<ImageScanpaths> = dataset
        .images
        .iter()
        .map(|e| {
            let recs = &by_image[e.image_id.as_str()];
            let model = recs
                .iter()
                .max_by_key(|r| r.budget)
                .filter(|r| r.found)
                .and_then(|r| collapse_scanpath(&r.scanpath, Origin::Model).ok());
            ImageScanpaths {
                image_id: e.image_id.clone(),
                humans: dataset
                    .trials_for_image(&e.image_id)
                    .filter(|t| t.found)
                    .map(|t| t.scanpath.clone())
                    .collect(),
                model,
            }
        })
        .collect();
    let (dissimilarity, skipped) = dissimilarity_records(&images, &dataset.grid);
    let hm: Vec<f64> = dissimilarity.iter().map(|r| r.hm_sd).collect();
    let bh: Vec<f64> = dissimilarity.iter().map(|r| r.bh_sd).collect();

    let mas: Vec<f64> = participants.iter().map(|p| p.mean_agreement).collect();
    let jac: Vec<f64> = participants.iter().map(|p| p.jaccard).collect();
    let summary = |xs: &[f64]| {
        mean_std(xs)
            .map(|(m, s)| (m, Some(s)))
            .ok_or_else(|| Error::domain("no participants"))
    };
    let table = vec![
        row(TABLE_METRICS[0], weighted_distance(&human_curve, &model_curve).map(|v| (v, None))),
        row(TABLE_METRICS[1], summary(&mas)),
        row(TABLE_METRICS[2], summary(&jac)),
        row(TABLE_METRICS[3], regression_slope_null_intercept(&hm, &bh).map(|v| (v, None))),
        row(TABLE_METRICS[4], spearman(&hm, &bh).map(|v| (v, None))),
    ];
    Ok(ReportBundle {
        table,
        human_curve,
        model_curve,
        participants,
        dissimilarity,
        skipped,
    })
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x}")).unwrap_or_default()
}

fn csv_bytes<F: FnOnce(&mut csv::Writer<Vec<u8>>) -> csv::Result<()>>(f: F) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    f(&mut w).map_err(|e| Error::domain(e.to_string()))?;
    w.into_inner().map_err(|e| Error::domain(e.to_string()))
}

/// Writes `report.csv`, `report.json`, `curves.csv` and `dissimilarity.csv`.
pub fn write_report(bundle: &ReportBundle, dir: &Path) -> Result<()> {
    let table = csv_bytes(|w| {
        w.write_record(["metric", "value", "std", "note"])?;
        for r in &bundle.table {
            w.write_record([
                r.metric.as_str(),
                &fmt_opt(r.value),
                &fmt_opt(r.std),
                r.note.as_deref().unwrap_or(""),
            ])?;
        }
        Ok(())
    })?;
    write_atomic(&dir.join("report.csv"), &table)?;

    let curves = csv_bytes(|w| {
        w.write_record(["budget", "human", "human_std", "model"])?;
        for (h, m) in bundle.human_curve.points.iter().zip(&bundle.model_curve.points) {
            w.write_record([h.budget.to_string(), h.proportion.to_string(), fmt_opt(h.std), m.proportion.to_string()])?;
        }
        Ok(())
    })?;
    write_atomic(&dir.join("curves.csv"), &curves)?;

    let diss = csv_bytes(|w| {
        w.write_record(["image_id", "bh_sd", "hm_sd", "humans"])?;
        for r in &bundle.dissimilarity {
            w.write_record([r.image_id.clone(), r.bh_sd.to_string(), r.hm_sd.to_string(), r.humans.to_string()])?;
        }
        Ok(())
    })?;
    write_atomic(&dir.join("dissimilarity.csv"), &diss)?;

    let mut json = serde_json::to_vec_pretty(bundle)?;
    json.push(b'\n');
    write_atomic(&dir.join("report.json"), &json)
}

/// Fixed-width rendering of the summary table.
pub fn render_table(bundle: &ReportBundle) -> String {
    let mut out = format!("{:<20} {:>12} {:>12}\n", "metric", "value", "std");
    for r in &bundle.table {
        let v = r.value.map(|v| format!("{v:.4}")).unwrap_or_else(|| "n/a".into());
        let s = r.std.map(|v| format!("{v:.4}")).unwrap_or_default();
        out.push_str(&format!("{:<20} {:>12} {:>12}", r.metric, v, s));
        if let Some(n) = &r.note {
            out.push_str(&format!("  ({n})"));
        }
        out.push('\n');
    }
    out
}
