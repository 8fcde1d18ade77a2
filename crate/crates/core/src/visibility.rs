//! Detectability d′ of a cell as seen from a fixation: a peak-normalized,
//! axis-aligned Gaussian of the pixel offset between the two cell centers.

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{cell_center, Cell, GridConfig};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VisibilityParams {
    /// Horizontal variance, px².
    pub sigma_x_sq: f64,
    /// Vertical variance, px².
    pub sigma_y_sq: f64,
}

impl Default for VisibilityParams {
    fn default() -> Self {
        VisibilityParams {
            sigma_x_sq: 2600.0,
            sigma_y_sq: 4000.0,
        }
    }
}

impl VisibilityParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma_x_sq > 0.0 && self.sigma_y_sq > 0.0) {
            return Err(Error::domain(format!(
                "visibility variances must be positive, got {self:?}"
            )));
        }
        Ok(())
    }

    pub fn at_offset(&self, dx: f64, dy: f64) -> f64 {
        (-0.5 * (dx * dx / self.sigma_x_sq + dy * dy / self.sigma_y_sq)).exp()
    }
}

pub fn visibility(k: Cell, i: Cell, params: &VisibilityParams, cfg: &GridConfig) -> f64 {
    let a = cell_center(k, cfg);
    let b = cell_center(i, cfg);
    params.at_offset((b.x - a.x) as f64, (b.y - a.y) as f64)
}

/// d′ for every cell given one fixation, shaped `(rows, cols)`.
pub type VisibilityField = Array2<f64>;

pub fn visibility_field(k: Cell, params: &VisibilityParams, cfg: &GridConfig) -> VisibilityField {
    Array2::from_shape_fn(cfg.shape(), |(r, c)| {
        visibility(k, Cell::new(c, r), params, cfg)
    })
}

/// All-pairs d′ table, `table[[k, i]]` for fixation index `k` and cell index
/// `i`. Built once per grid and shared read-only by every search.
#[derive(Debug, Clone)]
pub struct VisibilityTable {
    cfg: GridConfig,
    table: Array2<f64>,
}

impl VisibilityTable {
    pub fn new(params: &VisibilityParams, cfg: &GridConfig) -> Result<Self> {
        params.validate()?;
        let n = cfg.num_cells();
        let centers: Vec<_> = cfg.cells().map(|c| cell_center(c, cfg)).collect();
        let table = Array2::from_shape_fn((n, n), |(k, i)| {
            let (a, b) = (centers[k], centers[i]);
            params.at_offset((b.x - a.x) as f64, (b.y - a.y) as f64)
        });
        Ok(VisibilityTable { cfg: *cfg, table })
    }

    pub fn grid(&self) -> &GridConfig {
        &self.cfg
    }

    /// Flat row-major d′ values for fixation index `k`.
    pub fn row(&self, k: usize) -> &[f64] {
        let n = self.cfg.num_cells();
        &self.table.as_slice().expect("standard layout")[k * n..(k + 1) * n]
    }

    pub fn get(&self, k: Cell, i: Cell) -> f64 {
        self.table[[self.cfg.index(k), self.cfg.index(i)]]
    }

    pub fn field(&self, k: Cell) -> VisibilityField {
        Array2::from_shape_vec(self.cfg.shape(), self.row(self.cfg.index(k)).to_vec())
            .expect("row has grid size")
    }

    pub fn view(&self) -> ArrayView2<'_, f64> {
        self.table.view()
    }
}
