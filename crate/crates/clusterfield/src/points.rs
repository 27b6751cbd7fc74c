//! Point-set ingestion and normalization.

use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Input format for [`load_points`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointFormat {
    /// One point per line, comma-separated decimals.
    Csv,
    /// One JSON array of numbers per line.
    Jsonl,
}

/// A finite set of d-dimensional points together with the isotropic scale
/// applied by [`PointSet::normalize`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSet {
    points: Vec<Vec<f64>>,
    dim: usize,
    scale_factor: f64,
}

impl PointSet {
    /// Build from raw vectors; all must share the same dimension.
    pub fn new(points: Vec<Vec<f64>>) -> Result<Self> {
        let dim = points.first().ok_or(Error::EmptyInput)?.len();
        if dim == 0 {
            return Err(Error::Parse {
                row: 1,
                msg: "zero-dimensional point".into(),
            });
        }
        for (i, p) in points.iter().enumerate() {
            if p.len() != dim {
                return Err(Error::Parse {
                    row: i + 1,
                    msg: format!("expected {} coordinates, got {}", dim, p.len()),
                });
            }
            if p.iter().any(|v| !v.is_finite()) {
                return Err(Error::Parse {
                    row: i + 1,
                    msg: "non-finite coordinate".into(),
                });
            }
        }
        Ok(Self {
            points,
            dim,
            scale_factor: 1.0,
        })
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Isotropic factor that maps original coordinates to the stored ones.
    pub fn scale_factor(&self) -> f64 {
        self.scale_factor
    }

    /// Translate to the centroid and rescale uniformly so every point lies in
    /// the origin-centered ball of radius 1/2. Distances scale exactly by the
    /// returned set's `scale_factor`; a single point maps to the origin with
    /// factor 1.
    pub fn normalize(&self) -> PointSet {
        let n = self.points.len() as f64;
        let mut centroid = vec![0.0; self.dim];
        for p in &self.points {
            for (c, v) in centroid.iter_mut().zip(p) {
                *c += v / n;
            }
        }
        let mut max_norm = 0.0f64;
        for p in &self.points {
            let r2: f64 = p
                .iter()
                .zip(&centroid)
                .map(|(v, c)| (v - c) * (v - c))
                .sum();
            max_norm = max_norm.max(r2.sqrt());
        }
        let scale = if max_norm > 0.0 { 0.5 / max_norm } else { 1.0 };
        let points = self
            .points
            .iter()
            .map(|p| {
                p.iter()
                    .zip(&centroid)
                    .map(|(v, c)| (v - c) * scale)
                    .collect()
            })
            .collect();
        PointSet {
            points,
            dim: self.dim,
            scale_factor: self.scale_factor * scale,
        }
    }

    /// Euclidean distance between points `i` and `j`.
    pub fn dist(&self, i: usize, j: usize) -> f64 {
        dist(&self.points[i], &self.points[j])
    }
}

pub(crate) fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Load a point set from a CSV or JSONL file.
pub fn load_points<P: AsRef<Path>>(path: P, format: PointFormat) -> Result<PointSet> {
    let file = std::fs::File::open(path)?;
    let reader = BufReader::new(file);
    let mut points = Vec::new();
    let mut dim = None;
    for (idx, line) in reader.lines().enumerate() {
        let row = idx + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let coords: Vec<f64> = match format {
            PointFormat::Csv => trimmed
                .split(',')
                .map(|tok| {
                    tok.trim().parse::<f64>().map_err(|e| Error::Parse {
                        row,
                        msg: format!("bad number {tok:?}: {e}"),
                    })
                })
                .collect::<Result<_>>()?,
            PointFormat::Jsonl => {
                serde_json::from_str::<Vec<f64>>(trimmed).map_err(|e| Error::Parse {
                    row,
                    msg: format!("bad JSON array: {e}"),
                })?
            }
        };
        match dim {
            None => dim = Some(coords.len()),
            Some(d) if d != coords.len() => {
                return Err(Error::Parse {
                    row,
                    msg: format!("expected {} coordinates, got {}", d, coords.len()),
                })
            }
            _ => {}
        }
        points.push(coords);
    }
    if points.is_empty() {
        return Err(Error::EmptyInput);
    }
    PointSet::new(points)
}
