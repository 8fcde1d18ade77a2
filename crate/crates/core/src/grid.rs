//! Discretized fixation domain: pixel/cell mapping, scanpaths, trials and
//! target-hit semantics.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Image dimensions plus the δ×δ cell grid laid over them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "GridSpec", into = "GridSpec")]
pub struct GridConfig {
    cell_size: u32,
    width: u32,
    height: u32,
    cols: usize,
    rows: usize,
}

#[derive(Serialize, Deserialize)]
struct GridSpec {
    cell_size: u32,
    image_width: u32,
    image_height: u32,
}

impl TryFrom<GridSpec> for GridConfig {
    type Error = Error;
    fn try_from(s: GridSpec) -> Result<Self> {
        GridConfig::new(s.image_width, s.image_height, s.cell_size)
    }
}

impl From<GridConfig> for GridSpec {
    fn from(g: GridConfig) -> Self {
        GridSpec {
            cell_size: g.cell_size,
            image_width: g.width,
            image_height: g.height,
        }
    }
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig::new(1024, 768, 32).expect("default grid is valid")
    }
}

impl GridConfig {
    pub fn new(image_width: u32, image_height: u32, cell_size: u32) -> Result<Self> {
        if image_width == 0 || image_height == 0 || cell_size == 0 {
            return Err(Error::domain(format!(
                "grid needs positive dimensions, got {image_width}x{image_height} with cell size {cell_size}"
            )));
        }
        Ok(GridConfig {
            cell_size,
            width: image_width,
            height: image_height,
            cols: image_width.div_ceil(cell_size) as usize,
            rows: image_height.div_ceil(cell_size) as usize,
        })
    }

    pub fn cell_size(&self) -> u32 {
        self.cell_size
    }
    pub fn image_width(&self) -> u32 {
        self.width
    }
    pub fn image_height(&self) -> u32 {
        self.height
    }
    pub fn cols(&self) -> usize {
        self.cols
    }
    pub fn rows(&self) -> usize {
        self.rows
    }
    pub fn num_cells(&self) -> usize {
        self.cols * self.rows
    }
    /// `(rows, cols)`, the ndarray shape of every per-cell matrix.
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }
    pub fn image_shape(&self) -> (usize, usize) {
        (self.height as usize, self.width as usize)
    }

    pub fn diagonal(&self) -> f64 {
        (self.width as f64).hypot(self.height as f64)
    }

    pub fn contains(&self, c: Cell) -> bool {
        c.col < self.cols && c.row < self.rows
    }

    /// Row-major index; also the tie-break order used by every policy.
    pub fn index(&self, c: Cell) -> usize {
        c.row * self.cols + c.col
    }

    pub fn cell(&self, index: usize) -> Cell {
        Cell {
            col: index % self.cols,
            row: index / self.cols,
        }
    }

    pub fn cells(&self) -> impl Iterator<Item = Cell> + '_ {
        (0..self.num_cells()).map(|i| self.cell(i))
    }

    pub fn pixel_in_bounds(&self, p: PixelPoint) -> bool {
        p.x >= 0 && p.y >= 0 && p.x < self.width as i64 && p.y < self.height as i64
    }

    pub fn zeros(&self) -> Array2<f64> {
        Array2::zeros(self.shape())
    }

    pub(crate) fn check_shape(&self, shape: &[usize]) -> Result<()> {
        if shape != [self.rows, self.cols] {
            return Err(Error::Shape {
                expected: self.shape(),
                actual: (shape[0], shape[1]),
            });
        }
        Ok(())
    }

    pub(crate) fn check_cell(&self, c: Cell) -> Result<()> {
        if !self.contains(c) {
            return Err(Error::domain(format!(
                "cell ({}, {}) outside {}x{} grid",
                c.col, c.row, self.cols, self.rows
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Cell {
    pub col: usize,
    pub row: usize,
}

impl Cell {
    pub const fn new(col: usize, row: usize) -> Self {
        Cell { col, row }
    }

    /// Chebyshev distance in cells.
    pub fn chebyshev(self, other: Cell) -> usize {
        self.col.abs_diff(other.col).max(self.row.abs_diff(other.row))
    }
}

/// A pixel coordinate. Signed so raw gaze outside the image can be
/// represented before clamping.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PixelPoint {
    pub x: i64,
    pub y: i64,
}

impl PixelPoint {
    pub const fn new(x: i64, y: i64) -> Self {
        PixelPoint { x, y }
    }
}

pub fn pixel_to_cell(p: PixelPoint, cfg: &GridConfig) -> Result<Cell> {
    if !cfg.pixel_in_bounds(p) {
        return Err(Error::domain(format!(
            "pixel ({}, {}) outside {}x{} image; clamp first",
            p.x,
            p.y,
            cfg.image_width(),
            cfg.image_height()
        )));
    }
    let d = cfg.cell_size() as i64;
    Ok(Cell::new((p.x / d) as usize, (p.y / d) as usize))
}

pub fn clamp_to_image(p: PixelPoint, cfg: &GridConfig) -> PixelPoint {
    PixelPoint::new(
        p.x.clamp(0, cfg.image_width() as i64 - 1),
        p.y.clamp(0, cfg.image_height() as i64 - 1),
    )
}

/// Center pixel of a cell. Partial border cells have their center clamped
/// into the image.
pub fn cell_center(c: Cell, cfg: &GridConfig) -> PixelPoint {
    let d = cfg.cell_size() as i64;
    clamp_to_image(
        PixelPoint::new(c.col as i64 * d + d / 2, c.row as i64 * d + d / 2),
        cfg,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    Human,
    Model,
}

/// An ordered, collapsed sequence of fixated cells.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Scanpath {
    fixations: Vec<Cell>,
    origin: Origin,
}

impl Scanpath {
    pub fn fixations(&self) -> &[Cell] {
        &self.fixations
    }
    pub fn origin(&self) -> Origin {
        self.origin
    }
    pub fn len(&self) -> usize {
        self.fixations.len()
    }
    pub fn is_empty(&self) -> bool {
        self.fixations.is_empty()
    }
    pub fn last(&self) -> Cell {
        *self.fixations.last().expect("scanpath is non-empty")
    }
    pub fn with_origin(mut self, origin: Origin) -> Self {
        self.origin = origin;
        self
    }
    pub fn saccades(&self) -> usize {
        self.fixations.len() - 1
    }
}

/// Collapses runs of identical consecutive cells into a single fixation.
pub fn collapse_scanpath(raw: &[Cell], origin: Origin) -> Result<Scanpath> {
    if raw.is_empty() {
        return Err(Error::domain("cannot build a scanpath from no fixations"));
    }
    let mut fixations = raw.to_vec();
    fixations.dedup();
    Ok(Scanpath { fixations, origin })
}

/// Pixel rectangle, half-open: `[left, left+width) x [top, top+height)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TargetRegion {
    pub left: i64,
    pub top: i64,
    #[serde(default = "TargetRegion::default_side")]
    pub width: i64,
    #[serde(default = "TargetRegion::default_side")]
    pub height: i64,
}

impl TargetRegion {
    pub const DEFAULT_SIDE: i64 = 72;

    fn default_side() -> i64 {
        Self::DEFAULT_SIDE
    }

    pub fn new(left: i64, top: i64, width: i64, height: i64) -> Self {
        TargetRegion {
            left,
            top,
            width,
            height,
        }
    }

    pub fn contains(&self, p: PixelPoint) -> bool {
        p.x >= self.left
            && p.x < self.left + self.width
            && p.y >= self.top
            && p.y < self.top + self.height
    }

    pub fn center(&self) -> PixelPoint {
        PixelPoint::new(self.left + self.width / 2, self.top + self.height / 2)
    }

    pub fn validate(&self, cfg: &GridConfig) -> Result<()> {
        if self.width <= 0
            || self.height <= 0
            || self.left < 0
            || self.top < 0
            || self.left + self.width > cfg.image_width() as i64
            || self.top + self.height > cfg.image_height() as i64
        {
            return Err(Error::domain(format!(
                "target region {self:?} not inside {}x{} image",
                cfg.image_width(),
                cfg.image_height()
            )));
        }
        Ok(())
    }

    /// The cell holding the region's center, i.e. the target location the
    /// observer model reasons about.
    pub fn target_cell(&self, cfg: &GridConfig) -> Cell {
        pixel_to_cell(clamp_to_image(self.center(), cfg), cfg).expect("clamped")
    }
}

/// Model-side hit test: the cell's center pixel lies in the target region.
pub fn target_hit(f: Cell, t: &TargetRegion, cfg: &GridConfig) -> bool {
    t.contains(cell_center(f, cfg))
}

/// Human-side hit test on the raw (clamped) gaze coordinate.
pub fn target_hit_pixel(p: PixelPoint, t: &TargetRegion, cfg: &GridConfig) -> bool {
    t.contains(clamp_to_image(p, cfg))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trial {
    pub image_id: String,
    pub initial_fixation: Cell,
    pub target: TargetRegion,
    pub max_saccades: usize,
}

impl Trial {
    pub fn validate(&self, cfg: &GridConfig) -> Result<()> {
        if self.max_saccades == 0 {
            return Err(Error::domain("saccade budget must be at least 1"));
        }
        cfg.check_cell(self.initial_fixation)?;
        self.target.validate(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cfg() -> GridConfig {
        GridConfig::default()
    }

    #[test]
    fn default_grid_is_32_by_24() {
        let g = cfg();
        assert_eq!((g.cols(), g.rows()), (32, 24));
        assert_eq!(g.num_cells(), 768);
    }

    #[test]
    fn partial_border_cells() {
        let g = GridConfig::new(100, 50, 32).unwrap();
        assert_eq!((g.cols(), g.rows()), (4, 2));
        // last column spans 96..100, nominal center 112 clamps to 99
        assert_eq!(cell_center(Cell::new(3, 1), &g), PixelPoint::new(99, 48));
        assert!(GridConfig::new(0, 10, 4).is_err());
    }

    #[test]
    fn pixel_to_cell_examples() {
        let g = cfg();
        assert_eq!(pixel_to_cell(PixelPoint::new(0, 0), &g).unwrap(), Cell::new(0, 0));
        assert_eq!(pixel_to_cell(PixelPoint::new(512, 384), &g).unwrap(), Cell::new(16, 12));
        assert_eq!(pixel_to_cell(PixelPoint::new(1023, 767), &g).unwrap(), Cell::new(31, 23));
        assert!(pixel_to_cell(PixelPoint::new(1024, 0), &g).is_err());
        assert!(pixel_to_cell(PixelPoint::new(-1, 0), &g).is_err());
    }

    #[test]
    fn clamp_examples() {
        let g = cfg();
        assert_eq!(clamp_to_image(PixelPoint::new(500, 300), &g), PixelPoint::new(500, 300));
        assert_eq!(clamp_to_image(PixelPoint::new(-5, 400), &g), PixelPoint::new(0, 400));
        assert_eq!(clamp_to_image(PixelPoint::new(2000, 900), &g), PixelPoint::new(1023, 767));
    }

    #[test]
    fn cell_center_examples() {
        let g = cfg();
        assert_eq!(cell_center(Cell::new(0, 0), &g), PixelPoint::new(16, 16));
        assert_eq!(cell_center(Cell::new(16, 12), &g), PixelPoint::new(528, 400));
        assert_eq!(cell_center(Cell::new(31, 23), &g), PixelPoint::new(1008, 752));
    }

    #[test]
    fn collapse_examples() {
        let a = Cell::new(1, 1);
        let b = Cell::new(2, 1);
        let c = |v: &[Cell]| collapse_scanpath(v, Origin::Human).unwrap().fixations().to_vec();
        assert_eq!(c(&[a, a, b]), vec![a, b]);
        assert_eq!(c(&[a, b, a]), vec![a, b, a]);
        assert_eq!(c(&[a]), vec![a]);
        assert!(collapse_scanpath(&[], Origin::Human).is_err());
    }

    #[test]
    fn target_hit_examples() {
        let g = cfg();
        let t = TargetRegion::new(64, 64, 72, 72);
        // cell (2,2) has center (80,80); use pixel form for the literal examples
        assert!(t.contains(PixelPoint::new(100, 100)));
        assert!(!t.contains(PixelPoint::new(500, 500)));
        assert!(t.contains(PixelPoint::new(64, 100)));
        assert!(!t.contains(PixelPoint::new(136, 100)));
        assert!(target_hit(Cell::new(2, 2), &t, &g));
        assert!(!target_hit(Cell::new(15, 15), &t, &g));
        // region whose left edge sits exactly on a cell center
        let edge = TargetRegion::new(48, 48, 72, 72);
        assert!(target_hit(Cell::new(1, 1), &edge, &g));
        assert!(!target_hit(Cell::new(0, 1), &edge, &g));
    }

    #[test]
    fn trial_validation() {
        let g = cfg();
        let mut t = Trial {
            image_id: "a".into(),
            initial_fixation: Cell::new(0, 0),
            target: TargetRegion::new(500, 300, 72, 72),
            max_saccades: 4,
        };
        assert!(t.validate(&g).is_ok());
        t.max_saccades = 0;
        assert!(t.validate(&g).is_err());
        t.max_saccades = 2;
        t.target = TargetRegion::new(1000, 300, 72, 72);
        assert!(t.validate(&g).is_err());
    }

    proptest! {
        #[test]
        fn center_round_trips(w in 1u32..2000, h in 1u32..2000, d in 1u32..80, ci in 0usize..10_000) {
            let g = GridConfig::new(w, h, d).unwrap();
            let c = g.cell(ci % g.num_cells());
            prop_assert_eq!(pixel_to_cell(cell_center(c, &g), &g).unwrap(), c);
        }

        #[test]
        fn clamp_is_idempotent(x in -5000i64..5000, y in -5000i64..5000) {
            let g = cfg();
            let once = clamp_to_image(PixelPoint::new(x, y), &g);
            prop_assert!(g.pixel_in_bounds(once));
            prop_assert_eq!(clamp_to_image(once, &g), once);
        }

        #[test]
        fn collapse_is_idempotent(raw in prop::collection::vec((0usize..3, 0usize..3), 1..30)) {
            let cells: Vec<Cell> = raw.into_iter().map(|(c, r)| Cell::new(c, r)).collect();
            let once = collapse_scanpath(&cells, Origin::Model).unwrap();
            let twice = collapse_scanpath(once.fixations(), Origin::Model).unwrap();
            prop_assert!(once.fixations().windows(2).all(|w| w[0] != w[1]));
            prop_assert_eq!(once, twice);
        }
    }
}
