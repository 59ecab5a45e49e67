//! Function landscapes for using the evolutionary loop as a plain optimizer.
//! Genomes here are bias-only position vectors (see
//! [`GenomeConfig::position`](crate::genome::GenomeConfig::position)).

use std::f64::consts::PI;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::evolution::Environment;
use crate::genome::Individual;

/// `10 n + sum (x_i^2 - 10 cos(2 pi x_i))`; global minimum 0 at the origin.
pub fn rastrigin(x: &[f64]) -> f64 {
    10.0 * x.len() as f64
        + x.iter()
            .map(|&xi| xi * xi - 10.0 * (2.0 * PI * xi).cos())
            .sum::<f64>()
}

fn position(individual: &Individual, dim: usize) -> Vec<f64> {
    (0..dim).map(|i| individual.matrix().bias(i)).collect()
}

/// Maximizes `-rastrigin(x)` with `x` read from the genome biases.
#[derive(Debug, Clone, Copy)]
pub struct RastriginEnv {
    pub dim: usize,
}

impl RastriginEnv {
    pub fn point(&self, individual: &Individual) -> Vec<f64> {
        position(individual, self.dim)
    }
}

impl Environment for RastriginEnv {
    fn evaluate(&self, individual: &Individual, _seed: u64) -> Result<f64> {
        Ok(-rastrigin(&self.point(individual)))
    }
}

/// Rectangular height map. `heights[row][col]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridLandscape {
    heights: Vec<Vec<f64>>,
}

impl GridLandscape {
    pub fn new(heights: Vec<Vec<f64>>) -> Result<Self> {
        let cols = heights.first().map_or(0, Vec::len);
        if heights.is_empty() || cols == 0 {
            return Err(Error::Config("grid landscape is empty".into()));
        }
        for (r, row) in heights.iter().enumerate() {
            if row.len() != cols {
                return Err(Error::Config(format!(
                    "grid row {r} has {} cells, expected {cols}",
                    row.len()
                )));
            }
            if let Some(c) = row.iter().position(|h| !h.is_finite()) {
                return Err(Error::Config(format!("grid cell ({r}, {c}) is not finite")));
            }
        }
        Ok(Self { heights })
    }

    pub fn rows(&self) -> usize {
        self.heights.len()
    }

    pub fn cols(&self) -> usize {
        self.heights[0].len()
    }

    pub fn height(&self, row: usize, col: usize) -> f64 {
        self.heights[row][col]
    }

    pub fn max_height(&self) -> f64 {
        self.heights.iter().flatten().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min_height(&self) -> f64 {
        self.heights.iter().flatten().copied().fold(f64::INFINITY, f64::min)
    }

    /// 20 x 20 multi-peak test terrain: one dominant summit, two lower
    /// peaks and a gentle slope.
    pub fn synthetic_peaks() -> Self {
        let peaks = [
            (13.0, 6.0, 5000.0, 6.0),
            (4.0, 14.0, 3500.0, 4.0),
            (16.0, 16.0, 2500.0, 3.0),
        ];
        let heights = (0..20)
            .map(|r| {
                (0..20)
                    .map(|c| {
                        let (rf, cf) = (r as f64, c as f64);
                        let base = 3000.0 + 20.0 * rf - 10.0 * cf;
                        let bumps: f64 = peaks
                            .iter()
                            .map(|&(pr, pc, h, w)| {
                                h * (-((rf - pr).powi(2) + (cf - pc).powi(2)) / (2.0 * w)).exp()
                            })
                            .sum();
                        (base + bumps).round()
                    })
                    .collect()
            })
            .collect();
        Self { heights }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for row in &self.heights {
            let cells: Vec<String> = row.iter().map(|h| h.to_string()).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

/// Parses comma-separated rows of heights (no header).
pub fn parse_grid_landscape(text: &str, origin: &str) -> Result<GridLandscape> {
    let parse_err = |row: usize, column: usize, message: String| Error::Parse {
        path: origin.to_string(),
        row,
        column,
        message,
    };
    let lines: Vec<&str> = text.lines().map(str::trim).collect();
    let end = lines.iter().rposition(|l| !l.is_empty()).map_or(0, |i| i + 1);
    if end == 0 {
        return Err(parse_err(1, 1, "empty grid file".into()));
    }
    let mut heights: Vec<Vec<f64>> = Vec::with_capacity(end);
    for (r, line) in lines[..end].iter().enumerate() {
        let mut row = Vec::new();
        for (c, cell) in line.split(',').enumerate() {
            let cell = cell.trim();
            let h: f64 = cell
                .parse()
                .map_err(|_| parse_err(r + 1, c + 1, format!("'{cell}' is not a number")))?;
            if !h.is_finite() {
                return Err(parse_err(r + 1, c + 1, format!("'{cell}' is not finite")));
            }
            row.push(h);
        }
        if let Some(first) = heights.first() {
            if row.len() != first.len() {
                return Err(parse_err(
                    r + 1,
                    row.len().min(first.len()) + 1,
                    format!("row has {} cells, expected {}", row.len(), first.len()),
                ));
            }
        }
        heights.push(row);
    }
    GridLandscape::new(heights)
}

pub fn load_grid_landscape(path: impl AsRef<Path>) -> Result<GridLandscape> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_grid_landscape(&text, &path.display().to_string())
}

/// Bilinear interpolation at `pos = [x, y]` in cell coordinates
/// (`x` = column, `y` = row), clamped to the grid.
pub fn grid_fitness(pos: [f64; 2], g: &GridLandscape) -> f64 {
    let x = pos[0].clamp(0.0, (g.cols() - 1) as f64);
    let y = pos[1].clamp(0.0, (g.rows() - 1) as f64);
    let (c0, r0) = (x.floor() as usize, y.floor() as usize);
    let c1 = (c0 + 1).min(g.cols() - 1);
    let r1 = (r0 + 1).min(g.rows() - 1);
    let (tx, ty) = (x - c0 as f64, y - r0 as f64);
    let top = g.height(r0, c0) * (1.0 - tx) + g.height(r0, c1) * tx;
    let bottom = g.height(r1, c0) * (1.0 - tx) + g.height(r1, c1) * tx;
    top * (1.0 - ty) + bottom * ty
}

/// Maximizes height; the genome holds a position in `[0, 1]^2` that is
/// scaled onto the grid.
#[derive(Debug, Clone)]
pub struct GridEnv {
    pub grid: GridLandscape,
}

impl GridEnv {
    pub fn point(&self, individual: &Individual) -> [f64; 2] {
        let p = position(individual, 2);
        [
            p[0] * (self.grid.cols() - 1) as f64,
            p[1] * (self.grid.rows() - 1) as f64,
        ]
    }
}

impl Environment for GridEnv {
    fn evaluate(&self, individual: &Individual, _seed: u64) -> Result<f64> {
        Ok(grid_fitness(self.point(individual), &self.grid))
    }
}
