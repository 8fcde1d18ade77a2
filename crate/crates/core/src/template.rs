//! Target-similarity evidence: the per-cell cross-correlation map and the
//! template-response distributions of the two observer models.

use ndarray::Array2;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::grid::{cell_center, GridConfig};

/// Per-cell similarity to the target, each entry in `[-0.5, 0.5]`.
pub type CorrelationMap = Array2<f64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResponseMode {
    /// Responses are the distribution means.
    #[default]
    Deterministic,
    /// Responses are Normal draws from the trial's seeded stream.
    Sampled,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TemplateParams {
    pub a: f64,
    pub b: f64,
    #[serde(default)]
    pub mode: ResponseMode,
}

impl Default for TemplateParams {
    fn default() -> Self {
        TemplateParams {
            a: 3.0,
            b: 4.0,
            mode: ResponseMode::Deterministic,
        }
    }
}

impl TemplateParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.a >= 0.0 && self.b > 0.0) {
            return Err(Error::domain(format!(
                "template parameters need a >= 0 and b > 0, got a={} b={}",
                self.a, self.b
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResponseStats {
    pub mean: f64,
    pub std: f64,
}

/// Mean of the target-presence signal: +0.5 at the target, −0.5 elsewhere.
#[inline]
pub fn presence_mean(is_target: bool) -> f64 {
    if is_target {
        0.5
    } else {
        -0.5
    }
}

pub fn response_stats_ibs(is_target: bool, visibility: f64) -> Result<ResponseStats> {
    if !(visibility > 0.0) {
        return Err(Error::domain(format!(
            "IBS responses need strictly positive visibility, got {visibility}"
        )));
    }
    Ok(ResponseStats {
        mean: presence_mean(is_target),
        std: 1.0 / visibility,
    })
}

#[inline]
pub fn cibs_mean(is_target: bool, visibility: f64, corr: f64) -> f64 {
    presence_mean(is_target) * (visibility + 0.5) + corr * (1.5 - visibility)
}

#[inline]
pub fn cibs_std(visibility: f64, params: &TemplateParams) -> f64 {
    1.0 / (params.a * visibility + params.b)
}

pub fn response_stats_cibs(
    is_target: bool,
    visibility: f64,
    corr: f64,
    params: &TemplateParams,
) -> ResponseStats {
    ResponseStats {
        mean: cibs_mean(is_target, visibility, corr),
        std: cibs_std(visibility, params),
    }
}

pub fn observe<R: Rng + ?Sized>(stats: ResponseStats, mode: ResponseMode, rng: &mut R) -> f64 {
    match mode {
        ResponseMode::Deterministic => stats.mean,
        ResponseMode::Sampled => {
            let z: f64 = StandardNormal.sample(rng);
            stats.mean + stats.std * z
        }
    }
}

/// Which template-response distribution an observer uses.
#[derive(Debug, Clone)]
pub enum ResponseModel {
    /// Presence-only responses, σ = 1/d′.
    Ibs,
    /// Correlation-weighted responses, σ = 1/(a·d′ + b). `corr` is flat
    /// row-major per cell.
    Cibs { corr: Vec<f64>, a: f64, b: f64 },
}

impl ResponseModel {
    pub fn cibs(corr: &CorrelationMap, params: &TemplateParams) -> Result<Self> {
        params.validate()?;
        if corr.iter().any(|c| !(-0.5..=0.5).contains(c)) {
            return Err(Error::domain("correlation values must lie in [-0.5, 0.5]"));
        }
        Ok(ResponseModel::Cibs {
            corr: corr.iter().copied().collect(),
            a: params.a,
            b: params.b,
        })
    }

    /// Mean and standard deviation of the response at cell `i`.
    ///
    /// For IBS with d′ = 0 the std is infinite; d′ is strictly positive for
    /// every pair on a finite grid.
    #[inline]
    pub fn stats(&self, i: usize, is_target: bool, visibility: f64) -> ResponseStats {
        match self {
            ResponseModel::Ibs => ResponseStats {
                mean: presence_mean(is_target),
                std: 1.0 / visibility,
            },
            ResponseModel::Cibs { corr, a, b } => ResponseStats {
                mean: cibs_mean(is_target, visibility, corr[i]),
                std: 1.0 / (a * visibility + b),
            },
        }
    }
}

/// Normalized cross-correlation of the patch against the window centered
/// on each cell center, scaled by ½ into `[-0.5, 0.5]`. Windows are cropped
/// at the image border and zero-variance windows score 0.
pub fn correlation_map(
    image: &Array2<f64>,
    patch: &Array2<f64>,
    cfg: &GridConfig,
    exec: Execution,
) -> Result<CorrelationMap> {
    if image.dim() != cfg.image_shape() {
        return Err(Error::Shape {
            expected: cfg.image_shape(),
            actual: image.dim(),
        });
    }
    let (ph, pw) = patch.dim();
    let (h, w) = image.dim();
    if ph == 0 || pw == 0 || ph > h || pw > w {
        return Err(Error::domain(format!(
            "target patch {ph}x{pw} must be non-empty and fit inside the {h}x{w} image"
        )));
    }
    let values = exec::map_range(exec, cfg.num_cells(), |idx| {
        let c = cell_center(cfg.cell(idx), cfg);
        0.5 * ncc_at(image, patch, c.x - (pw / 2) as i64, c.y - (ph / 2) as i64)
    });
    Ok(Array2::from_shape_vec(cfg.shape(), values).expect("one value per cell"))
}

/// NCC between `patch` and the image window whose top-left corner is
/// `(x0, y0)`, restricted to the part of the window inside the image.
fn ncc_at(image: &Array2<f64>, patch: &Array2<f64>, x0: i64, y0: i64) -> f64 {
    let (h, w) = image.dim();
    let (ph, pw) = patch.dim();
    let u0 = (-x0).max(0) as usize;
    let v0 = (-y0).max(0) as usize;
    let u1 = ((w as i64 - x0).min(pw as i64)).max(0) as usize;
    let v1 = ((h as i64 - y0).min(ph as i64)).max(0) as usize;
    if u0 >= u1 || v0 >= v1 {
        return 0.0;
    }
    let n = ((u1 - u0) * (v1 - v0)) as f64;
    let pixel = |u: usize, v: usize| image[[(y0 + v as i64) as usize, (x0 + u as i64) as usize]];

    let (mut sa, mut sb) = (0.0, 0.0);
    for v in v0..v1 {
        for u in u0..u1 {
            sa += pixel(u, v);
            sb += patch[[v, u]];
        }
    }
    let (ma, mb) = (sa / n, sb / n);
    let (mut cross, mut va, mut vb) = (0.0, 0.0, 0.0);
    for v in v0..v1 {
        for u in u0..u1 {
            let a = pixel(u, v) - ma;
            let b = patch[[v, u]] - mb;
            cross += a * b;
            va += a * a;
            vb += b * b;
        }
    }
    let denom = (va * vb).sqrt();
    if denom <= 1e-12 * n {
        return 0.0;
    }
    (cross / denom).clamp(-1.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use ndarray::s;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn textured(h: usize, w: usize, seed: u64) -> Array2<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Array2::from_shape_simple_fn((h, w), || rng.random::<f64>() * 255.0)
    }

    #[test]
    fn correlation_examples() {
        let cfg = GridConfig::new(256, 192, 32).unwrap();
        let mut img = textured(192, 256, 1);
        // constant block around cell (6, 1) center (208, 48)
        img.slice_mut(s![24..72, 184..232]).fill(90.0);
        // cell (2, 2) center (80, 80); cut the 24x24 patch centered on it
        let patch = img.slice(s![68..92, 68..92]).to_owned();
        let corr = correlation_map(&img, &patch, &cfg, Execution::Sequential).unwrap();
        assert_relative_eq!(corr[[2, 2]], 0.5, epsilon = 1e-12);
        assert!(corr.iter().all(|c| (-0.5..=0.5).contains(c)));
        let max = corr.iter().cloned().fold(f64::MIN, f64::max);
        assert_eq!(max, corr[[2, 2]]);
        assert_eq!(corr[[1, 6]], 0.0);

        let negative = patch.mapv(|v| 255.0 - v);
        let anti = correlation_map(&img, &negative, &cfg, Execution::Parallel).unwrap();
        assert_relative_eq!(anti[[2, 2]], -0.5, epsilon = 1e-12);
    }

    #[test]
    fn border_windows_are_cropped() {
        let cfg = GridConfig::new(64, 64, 32).unwrap();
        let img = textured(64, 64, 2);
        // window centered on (16,16) with a 48x48 patch starts at -8
        let patch = textured(48, 48, 3);
        let corr = correlation_map(&img, &patch, &cfg, Execution::Sequential).unwrap();
        assert!(corr.iter().all(|c| c.is_finite() && (-0.5..=0.5).contains(c)));
        let too_big = textured(65, 10, 4);
        assert!(correlation_map(&img, &too_big, &cfg, Execution::Sequential).is_err());
    }

    #[test]
    fn ibs_stats() {
        assert_eq!(response_stats_ibs(true, 0.3).unwrap().mean, 0.5);
        assert_eq!(response_stats_ibs(false, 0.3).unwrap().mean, -0.5);
        assert_eq!(response_stats_ibs(false, 1.0).unwrap().std, 1.0);
        assert!(response_stats_ibs(true, 0.0).is_err());
    }

    #[test]
    fn cibs_stats() {
        let p = TemplateParams::default();
        assert_relative_eq!(response_stats_cibs(true, 1.0, 0.5, &p).mean, 1.0);
        assert_relative_eq!(response_stats_cibs(false, 0.0, 0.0, &p).mean, -0.25);
        assert_relative_eq!(response_stats_cibs(false, 1.0, 0.0, &p).std, 1.0 / 7.0);
        assert_relative_eq!(response_stats_cibs(false, 0.0, 0.0, &p).std, 0.25);
        for mu_target in [true, false] {
            let mu = presence_mean(mu_target);
            assert_relative_eq!(cibs_mean(mu_target, 1.0, mu), 2.0 * mu);
        }
    }

    #[test]
    fn cibs_mean_properties() {
        let p = TemplateParams::default();
        for di in 0..=100 {
            let d = di as f64 / 100.0;
            for ci in 0..100 {
                let c0 = -0.5 + ci as f64 / 100.0;
                let c1 = c0 + 0.01;
                for t in [true, false] {
                    assert!(cibs_mean(t, d, c1) > cibs_mean(t, d, c0));
                }
            }
            if di > 0 {
                assert!(cibs_std(d, &p) < cibs_std(d - 0.01, &p));
            }
        }
        assert!(TemplateParams { a: -1.0, ..p }.validate().is_err());
        assert!(TemplateParams { b: 0.0, ..p }.validate().is_err());
    }

    #[test]
    fn observe_modes() {
        let stats = ResponseStats { mean: -0.25, std: 0.5 };
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        assert_eq!(observe(stats, ResponseMode::Deterministic, &mut rng), -0.25);
        let a = observe(stats, ResponseMode::Sampled, &mut ChaCha8Rng::seed_from_u64(5));
        let b = observe(stats, ResponseMode::Sampled, &mut ChaCha8Rng::seed_from_u64(5));
        assert_eq!(a, b);
    }

    #[test]
    fn sampled_moments() {
        let stats = ResponseStats { mean: 0.3, std: 2.0 };
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let n = 100_000;
        let xs: Vec<f64> = (0..n).map(|_| observe(stats, ResponseMode::Sampled, &mut rng)).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!((mean - 0.3).abs() < 3.0 * 2.0 / (n as f64).sqrt());
        assert!((var.sqrt() - 2.0).abs() < 0.03);
    }
}
