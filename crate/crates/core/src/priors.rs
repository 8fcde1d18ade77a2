//! Per-cell target priors built from saliency maps or synthetic generators.

use std::path::Path;

use ndarray::Array2;
use rand::Rng;

use crate::error::{Error, Result};
use crate::grid::{cell_center, GridConfig, PixelPoint};
use crate::rng::{self, Purpose};

/// A per-pixel saliency map, shaped `(height, width)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SaliencyMap {
    pub image_id: String,
    pub values: Array2<f64>,
}

impl SaliencyMap {
    pub fn new(image_id: impl Into<String>, values: Array2<f64>) -> Result<Self> {
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::domain("saliency values must be finite and non-negative"));
        }
        if values.iter().all(|&v| v == 0.0) {
            return Err(Error::domain("saliency map is all zero"));
        }
        Ok(SaliencyMap {
            image_id: image_id.into(),
            values,
        })
    }

    /// Saliency at a pixel; the point must be in bounds.
    pub fn at(&self, p: PixelPoint) -> f64 {
        self.values[[p.y as usize, p.x as usize]]
    }

    /// Loads a CSV matrix (`.csv`/`.txt`) or an 8-bit grayscale image.
    pub fn load(image_id: &str, path: &Path, cfg: &GridConfig) -> Result<Self> {
        let values = crate::harness::io::load_matrix(path)?;
        if values.dim() != cfg.image_shape() {
            return Err(Error::file(
                path,
                format!(
                    "saliency map is {:?} (rows, cols) but the image is {:?}",
                    values.dim(),
                    cfg.image_shape()
                ),
            ));
        }
        SaliencyMap::new(image_id, values).map_err(|e| Error::file(path, e.to_string()))
    }
}

/// A normalized, strictly positive per-cell prior shaped `(rows, cols)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PriorGrid {
    p: Array2<f64>,
}

impl PriorGrid {
    /// Floors and normalizes arbitrary non-negative cell weights.
    pub fn from_weights(weights: Array2<f64>) -> Result<Self> {
        if weights.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::domain("prior weights must be finite and non-negative"));
        }
        let total: f64 = weights.sum();
        if total <= 0.0 {
            return Err(Error::domain("prior weights sum to zero"));
        }
        let n = weights.len() as f64;
        let eps = 1e-9 / n;
        let mut p = weights.mapv(|w| w / total + eps);
        let z = p.sum();
        p.mapv_inplace(|v| v / z);
        Ok(PriorGrid { p })
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.p
    }

    pub fn as_slice(&self) -> &[f64] {
        self.p.as_slice().expect("standard layout")
    }

    pub fn shape(&self) -> (usize, usize) {
        self.p.dim()
    }

    pub fn entropy(&self) -> f64 {
        -self.p.iter().map(|&v| v * v.ln()).sum::<f64>()
    }
}

/// Mean saliency over the pixels each cell covers.
pub fn grid_prior_from_saliency(s: &SaliencyMap, cfg: &GridConfig) -> Result<PriorGrid> {
    if s.values.dim() != cfg.image_shape() {
        return Err(Error::Shape {
            expected: cfg.image_shape(),
            actual: s.values.dim(),
        });
    }
    let d = cfg.cell_size() as usize;
    let mut sums = cfg.zeros();
    let mut counts = cfg.zeros();
    for ((y, x), &v) in s.values.indexed_iter() {
        sums[[y / d, x / d]] += v;
        counts[[y / d, x / d]] += 1.0;
    }
    PriorGrid::from_weights(sums / counts)
}

/// Default center-bias width: a quarter of the smaller image side.
pub fn default_center_sigma(cfg: &GridConfig) -> f64 {
    0.25 * cfg.image_width().min(cfg.image_height()) as f64
}

pub fn center_prior(cfg: &GridConfig, sigma_px: f64) -> Result<PriorGrid> {
    if !(sigma_px > 0.0) {
        return Err(Error::domain(format!("center prior sigma must be positive, got {sigma_px}")));
    }
    let cx = cfg.image_width() as f64 / 2.0;
    let cy = cfg.image_height() as f64 / 2.0;
    let two_s2 = 2.0 * sigma_px * sigma_px;
    let w = Array2::from_shape_fn(cfg.shape(), |(r, c)| {
        let p = cell_center(crate::grid::Cell::new(c, r), cfg);
        let (dx, dy) = (p.x as f64 - cx, p.y as f64 - cy);
        (-(dx * dx + dy * dy) / two_s2).exp()
    });
    PriorGrid::from_weights(w)
}

pub fn flat_prior(cfg: &GridConfig) -> PriorGrid {
    let n = cfg.num_cells() as f64;
    PriorGrid {
        p: Array2::from_elem(cfg.shape(), 1.0 / n),
    }
}

pub fn noise_prior(cfg: &GridConfig, seed: u64) -> PriorGrid {
    let mut rng = rng::stream(seed, 0, Purpose::NoisePrior, 0);
    let w = Array2::from_shape_simple_fn(cfg.shape(), || rng.random::<f64>());
    PriorGrid::from_weights(w).expect("uniform draws are non-negative and not all zero")
}

/// Sum of unit-mass isotropic Gaussians, one per fixation, evaluated over
/// the image only.
pub fn human_density_map(
    image_id: &str,
    fixations: &[PixelPoint],
    kernel_sigma_px: f64,
    cfg: &GridConfig,
) -> Result<SaliencyMap> {
    if fixations.is_empty() {
        return Err(Error::domain("human density map needs at least one fixation"));
    }
    if !(kernel_sigma_px > 0.0) {
        return Err(Error::domain("kernel sigma must be positive"));
    }
    let (h, w) = cfg.image_shape();
    let two_s2 = 2.0 * kernel_sigma_px * kernel_sigma_px;
    let norm = 1.0 / (std::f64::consts::PI * two_s2);
    let mut map = Array2::<f64>::zeros((h, w));
    let mut gx = vec![0.0; w];
    let mut gy = vec![0.0; h];
    for f in fixations {
        for (x, g) in gx.iter_mut().enumerate() {
            let d = x as f64 - f.x as f64;
            *g = (-d * d / two_s2).exp();
        }
        for (y, g) in gy.iter_mut().enumerate() {
            let d = y as f64 - f.y as f64;
            *g = norm * (-d * d / two_s2).exp();
        }
        for (y, mut row) in map.rows_mut().into_iter().enumerate() {
            let wy = gy[y];
            if wy == 0.0 {
                continue;
            }
            for (v, &wx) in row.iter_mut().zip(&gx) {
                *v += wy * wx;
            }
        }
    }
    SaliencyMap::new(image_id, map)
}
