//! Synthetic stimulus sets for demos and end-to-end checks.
//!
//! Each image is a low-contrast noise background with square textured
//! objects centered on grid cells. One object is the target; the others are
//! distractors with their own random textures. The saliency map puts a
//! Gaussian blob on every object, with the target less salient than
//! most distractors, so a saliency-ranked searcher reaches it late. The target
//! sits two rows away from a highly salient distractor.
//! Simulated participants fixate objects in saliency order and jump to the
//! target with a fixed per-saccade probability.

use std::path::{Path, PathBuf};

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{cell_center, target_hit_pixel, Cell, GridConfig, PixelPoint, TargetRegion};
use crate::harness::dataset::{Manifest, ManifestEntry};
use crate::harness::io::{save_gray_png, write_atomic};
use crate::harness::RunConfig;
use crate::rng::{self, Purpose};

pub const SALIENCY_NAME: &str = "synthetic";

const DISTRACTOR_SALIENCE: (f64, f64) = (120.0, 220.0);

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub grid: GridConfig,
    pub images: usize,
    pub subjects: usize,
    pub budgets: Vec<usize>,
    pub seed: u64,
    /// Inclusive range for the number of distractors per image.
    pub distractors: (usize, usize),
    /// Per-saccade probability that a simulated participant goes to the target.
    pub p_find: f64,
    /// Target saliency as a fraction of the distractor saliency range
    /// (0 = least salient distractor, 1 = most salient).
    pub target_salience: f64,
    /// Uniform saliency floor added everywhere; larger values flatten the
    /// prior relative to the object blobs.
    pub saliency_baseline: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            grid: GridConfig::default(),
            images: 10,
            subjects: 8,
            budgets: vec![2, 4, 8, 12],
            seed: 7,
            distractors: (10, 18),
            p_find: 0.3,
            target_salience: 0.25,
            saliency_baseline: 200.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthImage {
    pub image_id: String,
    pub image: Array2<f64>,
    pub saliency: Array2<f64>,
    pub target: TargetRegion,
    pub initial_fixation_px: PixelPoint,
    /// Distractor centers, most salient first.
    pub distractors: Vec<PixelPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FixationRow {
    pub subject_id: String,
    pub image_id: String,
    pub fixation_index: usize,
    pub x_px: i64,
    pub y_px: i64,
    pub max_saccades: usize,
    pub found_flag: u8,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthSuite {
    pub grid: GridConfig,
    pub images: Vec<SynthImage>,
    pub fixations: Vec<FixationRow>,
    pub budgets: Vec<usize>,
    pub seed: u64,
}

fn object_texture(size: usize, rng: &mut ChaCha8Rng) -> Array2<f64> {
    // Blocky binary texture: neighbouring shifts decorrelate quickly.
    let block = 4;
    let n = size.div_ceil(block);
    let bits = Array2::from_shape_simple_fn((n, n), || if rng.random::<bool>() { 1.0 } else { -1.0 });
    Array2::from_shape_fn((size, size), |(y, x)| bits[[y / block, x / block]])
}

fn paint(image: &mut Array2<f64>, center: PixelPoint, texture: &Array2<f64>, amplitude: f64) {
    let (h, w) = image.dim();
    let side = texture.nrows() as i64;
    let (x0, y0) = (center.x - side / 2, center.y - side / 2);
    for ((ty, tx), &v) in texture.indexed_iter() {
        let (x, y) = (x0 + tx as i64, y0 + ty as i64);
        if x >= 0 && y >= 0 && (x as usize) < w && (y as usize) < h {
            image[[y as usize, x as usize]] = 128.0 + amplitude * v;
        }
    }
}

fn add_blob(map: &mut Array2<f64>, center: PixelPoint, sigma: f64, amplitude: f64) {
    let two_s2 = 2.0 * sigma * sigma;
    for ((y, x), v) in map.indexed_iter_mut() {
        let (dx, dy) = (x as f64 - center.x as f64, y as f64 - center.y as f64);
        *v += amplitude * (-(dx * dx + dy * dy) / two_s2).exp();
    }
}

fn far_enough(c: Cell, taken: &[Cell], min: usize) -> bool {
    taken.iter().all(|t| t.chebyshev(c) >= min)
}

fn make_image(idx: usize, cfg: &SynthConfig) -> Result<SynthImage> {
    let grid = &cfg.grid;
    let image_id = format!("synth{idx:03}");
    let mut rng = rng::stream(cfg.seed, rng::key_hash(&image_id), Purpose::Synthetic, 0);
    let (h, w) = grid.image_shape();
    let side = grid.cell_size() as usize;
    let (cols, rows) = (grid.cols(), grid.rows());
    if cols < 8 || rows < 8 {
        return Err(Error::domain("synthetic suites need at least an 8x8 grid"));
    }

    let start = Cell::new(cols / 2, rows / 2);
    let mut interior: Vec<Cell> = (1..rows - 1)
        .flat_map(|r| (1..cols - 1).map(move |c| Cell::new(c, r)))
        .filter(|c| c.chebyshev(start) >= 3)
        .collect();
    interior.shuffle(&mut rng);

    let wanted = rng.random_range(cfg.distractors.0..=cfg.distractors.1);
    // Anchor distractor and the target two rows from it come first.
    let (anchor, target_cell) = interior
        .iter()
        .find_map(|&a| {
            [2i64, -2].into_iter().find_map(|dr| {
                let r = a.row as i64 + dr;
                let t = Cell::new(a.col, r.clamp(0, rows as i64 - 1) as usize);
                (r >= 1 && r < rows as i64 - 1 && t.chebyshev(start) >= 3).then_some((a, t))
            })
        })
        .ok_or_else(|| Error::domain(format!("could not place a target in {image_id}")))?;
    let mut taken = vec![start, anchor, target_cell];
    let mut distractor_cells = vec![anchor];
    for &c in &interior {
        if distractor_cells.len() == wanted {
            break;
        }
        if far_enough(c, &taken, 3) {
            taken.push(c);
            distractor_cells.push(c);
        }
    }
    if distractor_cells.len() < cfg.distractors.0 {
        return Err(Error::domain(format!("grid too small for {} distractors", cfg.distractors.0)));
    }

    let normal = Normal::new(0.0, 6.0).expect("valid");
    let mut image = Array2::from_shape_simple_fn((h, w), || 128.0 + normal.sample(&mut rng));
    let mut saliency = Array2::from_elem((h, w), cfg.saliency_baseline);
    let center = PixelPoint::new(w as i64 / 2, h as i64 / 2);
    add_blob(&mut saliency, center, h.min(w) as f64 / 3.0, 10.0);

    let blob_sigma = side as f64 * 0.6;
    let mut ranked: Vec<(f64, PixelPoint)> = Vec::new();
    for (i, &c) in distractor_cells.iter().enumerate() {
        let p = cell_center(c, grid);
        let tex = object_texture(side, &mut rng);
        paint(&mut image, p, &tex, 80.0);
        // The anchor is among the most salient objects.
        let amp = if i == 0 { 200.0 } else { rng.random_range(DISTRACTOR_SALIENCE.0..DISTRACTOR_SALIENCE.1) };
        add_blob(&mut saliency, p, blob_sigma, amp);
        ranked.push((amp, p));
    }
    let tp = cell_center(target_cell, grid);
    let tex = object_texture(side, &mut rng);
    paint(&mut image, tp, &tex, 60.0);
    let (lo, hi) = DISTRACTOR_SALIENCE;
    add_blob(&mut saliency, tp, blob_sigma, lo + cfg.target_salience * (hi - lo));
    ranked.sort_by(|a, b| b.0.total_cmp(&a.0));
    image.mapv_inplace(|v| v.round().clamp(0.0, 255.0));
    let peak = saliency.fold(0.0f64, |m, &v| m.max(v));
    saliency.mapv_inplace(|v| (v / peak * 255.0).round().max(1.0));

    let half = side as i64 / 2;
    Ok(SynthImage {
        image_id,
        image,
        saliency,
        target: TargetRegion::new(tp.x - half, tp.y - half, side as i64, side as i64),
        initial_fixation_px: cell_center(start, grid),
        distractors: ranked.into_iter().map(|(_, p)| p).collect(),
    })
}

fn simulate_trial(
    img: &SynthImage,
    subject: usize,
    budget: usize,
    cfg: &SynthConfig,
) -> Vec<FixationRow> {
    let subject_id = format!("s{subject:02}");
    let key = rng::key_hash(&format!("{subject_id}/{}", img.image_id));
    let mut rng = rng::stream(cfg.seed, key, Purpose::Synthetic, 1);
    let jitter = Normal::new(0.0, cfg.grid.cell_size() as f64 / 4.0).expect("valid");
    let mut gaze = vec![img.initial_fixation_px];
    let mut next_distractor = 0;
    let mut found = false;
    for _ in 0..budget {
        let aim = if rng.random::<f64>() < cfg.p_find || next_distractor >= img.distractors.len() {
            img.target.center()
        } else {
            next_distractor += 1;
            img.distractors[next_distractor - 1]
        };
        let p = PixelPoint::new(
            aim.x + jitter.sample(&mut rng).round() as i64,
            aim.y + jitter.sample(&mut rng).round() as i64,
        );
        gaze.push(p);
        if target_hit_pixel(p, &img.target, &cfg.grid) {
            found = true;
            break;
        }
    }
    gaze.into_iter()
        .enumerate()
        .map(|(i, p)| FixationRow {
            subject_id: subject_id.clone(),
            image_id: img.image_id.clone(),
            fixation_index: i + 1,
            x_px: p.x,
            y_px: p.y,
            max_saccades: budget,
            found_flag: found as u8,
        })
        .collect()
}

pub fn generate(cfg: &SynthConfig) -> Result<SynthSuite> {
    if cfg.budgets.is_empty() || cfg.budgets.contains(&0) {
        return Err(Error::domain("synthetic budgets must be positive"));
    }
    if !(cfg.saliency_baseline >= 0.0 && cfg.saliency_baseline.is_finite()) {
        return Err(Error::domain("saliency_baseline must be finite and non-negative"));
    }
    if !(0.0..=1.0).contains(&cfg.target_salience) {
        return Err(Error::domain("target_salience must lie in [0, 1]"));
    }
    if cfg.distractors.0 > cfg.distractors.1 || cfg.distractors.0 < 3 {
        return Err(Error::domain("distractor range must be ordered and start at 3 or more"));
    }
    let images: Vec<SynthImage> = (0..cfg.images).map(|i| make_image(i, cfg)).collect::<Result<_>>()?;
    let mut fixations = Vec::new();
    for s in 0..cfg.subjects {
        for (i, img) in images.iter().enumerate() {
            let budget = cfg.budgets[(s + i) % cfg.budgets.len()];
            fixations.extend(simulate_trial(img, s, budget, cfg));
        }
    }
    Ok(SynthSuite {
        grid: cfg.grid,
        images,
        fixations,
        budgets: cfg.budgets.clone(),
        seed: cfg.seed,
    })
}

/// Writes images, saliency maps, `manifest.json`, `scanpaths.csv` and a
/// ready-to-run `config.json` into `dir`. Returns the config path.
pub fn write_suite(suite: &SynthSuite, dir: &Path) -> Result<PathBuf> {
    let mut entries = Vec::new();
    for img in &suite.images {
        let image_path = PathBuf::from(format!("images/{}.png", img.image_id));
        let sal_path = PathBuf::from(format!("saliency/{}.png", img.image_id));
        save_gray_png(&img.image, &dir.join(&image_path))?;
        save_gray_png(&img.saliency, &dir.join(&sal_path))?;
        entries.push(ManifestEntry {
            image_id: img.image_id.clone(),
            image_path,
            target_region: img.target,
            initial_fixation_px: img.initial_fixation_px,
            target_patch_path: None,
            saliency_paths: [(SALIENCY_NAME.to_string(), sal_path)].into_iter().collect(),
        });
    }
    let mut manifest = serde_json::to_vec_pretty(&Manifest { images: entries })?;
    manifest.push(b'\n');
    write_atomic(&dir.join("manifest.json"), &manifest)?;

    let mut w = csv::Writer::from_writer(Vec::new());
    for row in &suite.fixations {
        w.serialize(row).map_err(|e| Error::domain(e.to_string()))?;
    }
    write_atomic(&dir.join("scanpaths.csv"), &w.into_inner().map_err(|e| Error::domain(e.to_string()))?)?;

    let config = RunConfig {
        manifest: Some("manifest.json".into()),
        scanpaths: Some("scanpaths.csv".into()),
        grid: suite.grid,
        prior: crate::harness::PriorSpec::Saliency(SALIENCY_NAME.into()),
        budgets: suite.budgets.clone(),
        seed: suite.seed,
        output_dir: "out".into(),
        ..RunConfig::default()
    };
    let mut json = serde_json::to_vec_pretty(&config)?;
    json.push(b'\n');
    let path = dir.join("config.json");
    write_atomic(&path, &json)?;
    Ok(path)
}
