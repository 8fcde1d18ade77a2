//! Stimulus manifest and human scanpath ingestion.

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};

use ndarray::{s, Array2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{
    clamp_to_image, collapse_scanpath, pixel_to_cell, target_hit_pixel, GridConfig, Origin, PixelPoint,
    Scanpath, TargetRegion,
};
use crate::harness::io;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestEntry {
    pub image_id: String,
    pub image_path: PathBuf,
    pub target_region: TargetRegion,
    pub initial_fixation_px: PixelPoint,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_patch_path: Option<PathBuf>,
    #[serde(default)]
    pub saliency_paths: BTreeMap<String, PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub images: Vec<ManifestEntry>,
}

/// A manifest entry with paths resolved against the manifest's directory.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageEntry {
    pub image_id: String,
    pub image_path: PathBuf,
    pub target: TargetRegion,
    pub initial_fixation_px: PixelPoint,
    pub target_patch_path: Option<PathBuf>,
    pub saliency_paths: BTreeMap<String, PathBuf>,
}

impl ImageEntry {
    pub fn load_image(&self, cfg: &GridConfig) -> Result<Array2<f64>> {
        let img = io::load_matrix(&self.image_path)?;
        if img.dim() != cfg.image_shape() {
            return Err(Error::file(
                &self.image_path,
                format!("image is {:?} (rows, cols), expected {:?}", img.dim(), cfg.image_shape()),
            ));
        }
        Ok(img)
    }

    /// The target patch file, or the target region cut from the image.
    pub fn load_patch(&self, image: &Array2<f64>) -> Result<Array2<f64>> {
        match &self.target_patch_path {
            Some(p) => io::load_matrix(p),
            None => {
                let t = &self.target;
                Ok(image
                    .slice(s![
                        t.top as usize..(t.top + t.height) as usize,
                        t.left as usize..(t.left + t.width) as usize
                    ])
                    .to_owned())
            }
        }
    }
}

/// One participant's trial on one image.
#[derive(Debug, Clone, PartialEq)]
pub struct HumanTrial {
    pub subject_id: String,
    pub image_id: String,
    pub max_saccades: usize,
    /// Clamped gaze positions in fixation order.
    pub fixations: Vec<PixelPoint>,
    /// Gridded and collapsed.
    pub scanpath: Scanpath,
    /// Recomputed from the raw coordinates.
    pub found: bool,
    /// As given in the file.
    pub reported_found: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LoadReport {
    /// `file:line` of every coordinate that had to be clamped.
    pub clamped: Vec<String>,
    /// Trials whose recomputed found flag disagrees with the file.
    pub found_mismatches: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct Dataset {
    pub grid: GridConfig,
    pub images: Vec<ImageEntry>,
    /// Sorted by (subject, image).
    pub trials: Vec<HumanTrial>,
    pub report: LoadReport,
}

impl Dataset {
    pub fn image(&self, id: &str) -> Option<&ImageEntry> {
        self.images.iter().find(|e| e.image_id == id)
    }

    pub fn subjects(&self) -> Vec<&str> {
        let mut s: Vec<&str> = self.trials.iter().map(|t| t.subject_id.as_str()).collect();
        s.dedup();
        s
    }

    pub fn trials_for_image<'a>(&'a self, id: &'a str) -> impl Iterator<Item = &'a HumanTrial> + 'a {
        self.trials.iter().filter(move |t| t.image_id == id)
    }

    /// Third fixation of every trial on the image that has one.
    pub fn third_fixations(&self, id: &str) -> Vec<PixelPoint> {
        self.trials_for_image(id).filter_map(|t| t.fixations.get(2).copied()).collect()
    }
}

#[derive(Debug, Deserialize)]
struct ScanpathRow {
    subject_id: String,
    image_id: String,
    fixation_index: usize,
    x_px: f64,
    y_px: f64,
    max_saccades: usize,
    found_flag: String,
}

fn parse_flag(s: &str) -> Option<bool> {
    match s.trim().to_ascii_lowercase().as_str() {
        "1" | "true" => Some(true),
        "0" | "false" => Some(false),
        _ => None,
    }
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_relative() {
        base.join(p)
    } else {
        p.to_path_buf()
    }
}

fn check_exists(p: &Path, what: &str, id: &str) -> Result<()> {
    if !p.is_file() {
        return Err(Error::file(p, format!("{what} for image '{id}' does not exist")));
    }
    Ok(())
}

fn image_dims(p: &Path) -> Result<(usize, usize)> {
    match image::image_dimensions(p) {
        Ok((w, h)) => Ok((h as usize, w as usize)),
        Err(_) => Ok(io::load_matrix(p)?.dim()),
    }
}

pub fn load_manifest(path: &Path, cfg: &GridConfig) -> Result<Vec<ImageEntry>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let manifest: Manifest = serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.into(),
        line: e.line(),
        message: e.to_string(),
    })?;
    let base = path.parent().unwrap_or(Path::new(""));
    let mut seen = HashMap::new();
    manifest
        .images
        .into_iter()
        .map(|m| {
            if seen.insert(m.image_id.clone(), ()).is_some() {
                return Err(Error::file(path, format!("duplicate image_id '{}'", m.image_id)));
            }
            let entry = ImageEntry {
                image_path: resolve(base, &m.image_path),
                target_patch_path: m.target_patch_path.as_deref().map(|p| resolve(base, p)),
                saliency_paths: m
                    .saliency_paths
                    .iter()
                    .map(|(k, v)| (k.clone(), resolve(base, v)))
                    .collect(),
                image_id: m.image_id,
                target: m.target_region,
                initial_fixation_px: m.initial_fixation_px,
            };
            let id = &entry.image_id;
            check_exists(&entry.image_path, "image", id)?;
            if let Some(p) = &entry.target_patch_path {
                check_exists(p, "target patch", id)?;
            }
            for p in entry.saliency_paths.values() {
                check_exists(p, "saliency map", id)?;
            }
            let dims = image_dims(&entry.image_path)?;
            if dims != cfg.image_shape() {
                return Err(Error::file(
                    &entry.image_path,
                    format!("image is {dims:?} (rows, cols), grid expects {:?}", cfg.image_shape()),
                ));
            }
            entry.target.validate(cfg).map_err(|e| Error::file(path, format!("image '{id}': {e}")))?;
            if !cfg.pixel_in_bounds(entry.initial_fixation_px) {
                return Err(Error::file(path, format!("image '{id}': initial fixation outside the image")));
            }
            if entry.target.contains(entry.initial_fixation_px) {
                return Err(Error::file(path, format!("image '{id}': initial fixation is inside the target")));
            }
            Ok(entry)
        })
        .collect()
}

/// Loads and validates the manifest plus the human scanpath table.
///
/// Coordinates are clamped into the image, gridded and collapsed; found
/// flags are recomputed from the clamped gaze and cross-checked against the
/// file.
pub fn load_dataset(manifest_path: &Path, scanpath_path: &Path, cfg: &GridConfig, budgets: &[usize]) -> Result<Dataset> {
    let images = load_manifest(manifest_path, cfg)?;
    let by_id: HashMap<&str, &ImageEntry> = images.iter().map(|e| (e.image_id.as_str(), e)).collect();

    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(scanpath_path)
        .map_err(|e| Error::file(scanpath_path, e.to_string()))?;
    let parse_err = |line: usize, message: String| Error::Parse {
        path: scanpath_path.into(),
        line,
        message,
    };
    let mut report = LoadReport::default();
    // (subject, image) -> rows in file order
    let mut groups: BTreeMap<(String, String), Vec<(usize, ScanpathRow)>> = BTreeMap::new();
    for (n, row) in reader.deserialize::<ScanpathRow>().enumerate() {
        let line = n + 2;
        let row = row.map_err(|e| parse_err(line, e.to_string()))?;
        if !by_id.contains_key(row.image_id.as_str()) {
            return Err(parse_err(line, format!("unknown image_id '{}'", row.image_id)));
        }
        if !budgets.contains(&row.max_saccades) {
            return Err(parse_err(
                line,
                format!("max_saccades {} not in the declared budgets {budgets:?}", row.max_saccades),
            ));
        }
        if !(row.x_px.is_finite() && row.y_px.is_finite()) {
            return Err(parse_err(line, "non-finite coordinate".into()));
        }
        groups
            .entry((row.subject_id.clone(), row.image_id.clone()))
            .or_default()
            .push((line, row));
    }

    let mut trials = Vec::with_capacity(groups.len());
    for ((subject, image_id), mut rows) in groups {
        rows.sort_by_key(|(_, r)| r.fixation_index);
        for (expected, (line, r)) in rows.iter().enumerate() {
            if r.fixation_index != expected + 1 {
                return Err(parse_err(
                    *line,
                    format!(
                        "fixation_index for subject '{subject}' on '{image_id}' is not contiguous from 1 (got {}, expected {})",
                        r.fixation_index,
                        expected + 1
                    ),
                ));
            }
        }
        let (first_line, first) = &rows[0];
        let max_saccades = first.max_saccades;
        let flag_text = first.found_flag.clone();
        let reported_found = parse_flag(&flag_text)
            .ok_or_else(|| parse_err(*first_line, format!("found_flag '{flag_text}' is not 0/1/true/false")))?;
        if let Some((line, _)) = rows.iter().find(|(_, r)| r.max_saccades != max_saccades || r.found_flag != flag_text) {
            return Err(parse_err(*line, "max_saccades and found_flag must be constant within a trial".into()));
        }
        let entry = by_id[image_id.as_str()];
        let mut fixations = Vec::with_capacity(rows.len());
        for (line, r) in &rows {
            let raw = PixelPoint::new(r.x_px.round() as i64, r.y_px.round() as i64);
            let p = clamp_to_image(raw, cfg);
            if p != raw {
                report.clamped.push(format!("{}:{line}", scanpath_path.display()));
            }
            fixations.push(p);
        }
        let found = fixations.iter().any(|&p| target_hit_pixel(p, &entry.target, cfg));
        if found != reported_found {
            report.found_mismatches.push(format!(
                "subject '{subject}' image '{image_id}': file says {reported_found}, gaze says {found}"
            ));
        }
        let cells: Vec<_> = fixations
            .iter()
            .map(|&p| pixel_to_cell(p, cfg))
            .collect::<Result<_>>()?;
        trials.push(HumanTrial {
            scanpath: collapse_scanpath(&cells, Origin::Human)?,
            subject_id: subject,
            image_id,
            max_saccades,
            fixations,
            found,
            reported_found,
        });
    }
    for m in &report.found_mismatches {
        log::warn!("found flag mismatch: {m}");
    }
    Ok(Dataset {
        grid: *cfg,
        images,
        trials,
        report,
    })
}
