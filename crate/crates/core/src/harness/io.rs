//! File helpers: matrices from CSV or grayscale images, atomic writes.

use std::fs;
use std::io::Write;
use std::path::Path;

use ndarray::Array2;

use crate::error::{Error, Result};

fn is_csv(path: &Path) -> bool {
    matches!(
        path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref(),
        Some("csv" | "txt")
    )
}

/// Reads a matrix of reals: comma-separated text for `.csv`/`.txt`, any
/// other extension is decoded as an image and converted to 8-bit luma.
pub fn load_matrix(path: &Path) -> Result<Array2<f64>> {
    if is_csv(path) {
        load_csv_matrix(path)
    } else {
        let img = image::open(path).map_err(|e| Error::file(path, e.to_string()))?;
        let luma = img.to_luma8();
        let (w, h) = luma.dimensions();
        Ok(Array2::from_shape_fn((h as usize, w as usize), |(y, x)| {
            luma.get_pixel(x as u32, y as u32).0[0] as f64
        }))
    }
}

fn load_csv_matrix(path: &Path) -> Result<Array2<f64>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut values = Vec::new();
    let mut cols = None;
    let mut rows = 0;
    for (n, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row: Vec<f64> = line
            .split(',')
            .map(|t| t.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Parse {
                path: path.into(),
                line: n + 1,
                message: e.to_string(),
            })?;
        match cols {
            None => cols = Some(row.len()),
            Some(c) if c != row.len() => {
                return Err(Error::Parse {
                    path: path.into(),
                    line: n + 1,
                    message: format!("expected {c} columns, found {}", row.len()),
                })
            }
            _ => {}
        }
        values.extend(row);
        rows += 1;
    }
    let cols = cols.ok_or_else(|| Error::file(path, "empty matrix"))?;
    Ok(Array2::from_shape_vec((rows, cols), values).expect("rectangular"))
}

pub fn matrix_to_csv(m: &Array2<f64>) -> String {
    let mut out = String::new();
    for row in m.rows() {
        let line: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

/// Saves a matrix as an 8-bit grayscale PNG; values are rounded and clamped
/// to `[0, 255]`.
pub fn save_gray_png(m: &Array2<f64>, path: &Path) -> Result<()> {
    let (h, w) = m.dim();
    let img = image::GrayImage::from_fn(w as u32, h as u32, |x, y| {
        image::Luma([m[[y as usize, x as usize]].round().clamp(0.0, 255.0) as u8])
    });
    let mut bytes = Vec::new();
    img.write_to(&mut std::io::Cursor::new(&mut bytes), image::ImageFormat::Png)
        .map_err(|e| Error::file(path, e.to_string()))?;
    write_atomic(path, &bytes)
}

/// Writes via a temporary sibling file and a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = std::path::PathBuf::from(tmp);
    let mut f = fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
    f.write_all(bytes).map_err(|e| Error::io(&tmp, e))?;
    f.sync_all().map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}
