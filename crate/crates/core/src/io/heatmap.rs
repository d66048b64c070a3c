//! Grayscale snapshots in binary portable-graymap (P5) format.
//!
//! Image column `i` is the `x` index and row `j` the `y` index, so pixel
//! `(i, j)` shows sample `(i, j)` of the field. Densities are normalised by
//! the largest density of the whole path, so brightness is comparable
//! between snapshots. A field that is constant over all samples carries no
//! contrast and is drawn uniformly mid-gray.

use std::path::{Path, PathBuf};

use crate::error::OutputError;
use crate::field::{ScalarField, SpatialField};

pub const MID_GRAY: u8 = 128;

/// Time indices of `n` snapshots evenly spread over `0..nt`, endpoints
/// included. Asking for more snapshots than slices repeats slices, so the
/// image count always equals `n`.
pub fn snapshot_indices(nt: usize, n: usize) -> Vec<usize> {
    assert!(n >= 2 && nt >= 2);
    (0..n)
        .map(|i| ((i as f64) * (nt - 1) as f64 / (n - 1) as f64).round() as usize)
        .collect()
}

/// Gray levels of `values` scaled by `max`; see the module docs.
pub fn gray_levels(values: &[f64], min: f64, max: f64) -> Vec<u8> {
    if max - min <= 1e-12 * max.abs().max(1.0) || max <= 0.0 {
        return vec![MID_GRAY; values.len()];
    }
    values.iter().map(|&v| (255.0 * v.max(0.0) / max).round().min(255.0) as u8).collect()
}

/// Encodes a `nx × ny` field as P5, column `i`, row `j`.
pub fn encode_pgm(levels: &[u8], nx: usize, ny: usize) -> Vec<u8> {
    let mut out = format!("P5\n{nx} {ny}\n255\n").into_bytes();
    for j in 0..ny {
        for i in 0..nx {
            out.push(levels[i * ny + j]);
        }
    }
    out
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), OutputError> {
    std::fs::write(path, bytes).map_err(|e| OutputError::io(path, e))
}

fn range(values: &[f64]) -> (f64, f64) {
    values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
}

/// Writes `n_snapshots` density images (`density_000.pgm`, …) into `dir`,
/// then one image per auxiliary field (`<name>.pgm`). Returns the paths.
pub fn write_heatmaps(
    density: &ScalarField,
    dir: impl AsRef<Path>,
    n_snapshots: usize,
    aux: &[(&str, &SpatialField)],
) -> Result<Vec<PathBuf>, OutputError> {
    let dir = dir.as_ref();
    if n_snapshots < 2 {
        return Err(OutputError::format(dir, format!("need at least 2 snapshots (got {n_snapshots})")));
    }
    let g = density.grid();
    let (min, max) = range(density.values());
    let mut paths = Vec::new();
    for (n, k) in snapshot_indices(g.nt, n_snapshots).into_iter().enumerate() {
        let path = dir.join(format!("density_{n:03}.pgm"));
        write(&path, &encode_pgm(&gray_levels(density.slice(k), min, max), g.nx, g.ny))?;
        paths.push(path);
    }
    for (name, field) in aux {
        let path = dir.join(format!("{name}.pgm"));
        let (lo, hi) = range(field.values());
        write(&path, &encode_pgm(&gray_levels(field.values(), lo, hi), field.nx(), field.ny()))?;
        paths.push(path);
    }
    Ok(paths)
}
