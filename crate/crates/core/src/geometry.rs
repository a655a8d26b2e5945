//! Network geometry on a square with horizontal and vertical wrap-around.
//!
//! Base stations are placed uniformly at random. Each user is served by its
//! nearest base station under the torus metric, so cells are Voronoi regions
//! of the torus. Channel variance follows a distance power law with the
//! pathloss constant fixed to one; only ratios of variances are ever used.

use std::fmt::Write as _;

use rand::Rng;

use crate::error::{Error, Result};
use crate::seed;

/// Pathloss exponent used when none is given.
pub const DEFAULT_ALPHA: f64 = 3.0;

/// Rejection-sampling attempts before a cell is declared degenerate.
pub const MAX_REJECTIONS: u64 = 1_000_000;

/// A position in the plane, in kilometres.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }
}

/// Euclidean distance under the minimum-image convention on a square torus.
pub fn torus_distance(a: Point, b: Point, side: f64) -> f64 {
    let wrap = |d: f64| {
        let d = d.abs();
        d.min(side - d)
    };
    wrap(a.x - b.x).hypot(wrap(a.y - b.y))
}

/// Base-station layout plus the propagation law shared by all cells.
#[derive(Debug, Clone, PartialEq)]
pub struct Deployment {
    bs_positions: Vec<Point>,
    side: f64,
    alpha: f64,
    min_dist: f64,
}

impl Deployment {
    pub fn new(bs_positions: Vec<Point>, side: f64, alpha: f64, min_dist: f64) -> Result<Self> {
        let cells = bs_positions.len();
        if cells == 0 {
            return Err(Error::InvalidParameter(
                "deployment needs at least one cell".into(),
            ));
        }
        if !(side.is_finite() && side > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "side must be positive, got {side}"
            )));
        }
        if !(alpha.is_finite() && alpha > 2.0) {
            return Err(Error::InvalidParameter(format!(
                "alpha must exceed 2, got {alpha}"
            )));
        }
        let max_min_dist = side / (2.0 * cells as f64);
        if !(min_dist > 0.0 && min_dist < max_min_dist) {
            return Err(Error::InvalidParameter(format!(
                "min_dist must lie in (0, {max_min_dist}), got {min_dist}"
            )));
        }
        for (i, p) in bs_positions.iter().enumerate() {
            let inside = |c: f64| c.is_finite() && (0.0..side).contains(&c);
            if !inside(p.x) || !inside(p.y) {
                return Err(Error::InvalidParameter(format!(
                    "BS {i} at ({}, {}) lies outside [0, {side})^2",
                    p.x, p.y
                )));
            }
        }
        Ok(Self {
            bs_positions,
            side,
            alpha,
            min_dist,
        })
    }

    /// Uniformly random layout with `cells` base stations at the given
    /// density (BS per km²). The exclusion radius defaults to `side / 1000`.
    pub fn random(cells: usize, density: f64, alpha: f64, seed: u64) -> Result<Self> {
        if cells == 0 {
            return Err(Error::InvalidParameter(
                "deployment needs at least one cell".into(),
            ));
        }
        if !(density.is_finite() && density > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "density must be positive, got {density}"
            )));
        }
        let side = (cells as f64 / density).sqrt();
        let mut rng = seed::rng(seed);
        let bs_positions = (0..cells)
            .map(|_| Point::new(rng.gen_range(0.0..side), rng.gen_range(0.0..side)))
            .collect();
        Self::new(bs_positions, side, alpha, side / 1000.0)
    }

    pub fn cells(&self) -> usize {
        self.bs_positions.len()
    }

    pub fn bs_positions(&self) -> &[Point] {
        &self.bs_positions
    }

    pub fn bs(&self, cell: usize) -> Point {
        self.bs_positions[cell]
    }

    pub fn side(&self) -> f64 {
        self.side
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn min_dist(&self) -> f64 {
        self.min_dist
    }

    pub fn check_cell(&self, cell: usize) -> Result<()> {
        if cell < self.cells() {
            Ok(())
        } else {
            Err(Error::CellOutOfRange {
                cell,
                cells: self.cells(),
            })
        }
    }

    pub fn distance(&self, bs: usize, z: Point) -> f64 {
        torus_distance(self.bs_positions[bs], z, self.side)
    }

    /// Variance of the channel attenuation from `z` to base station `bs`.
    pub fn channel_variance(&self, bs: usize, z: Point) -> f64 {
        self.distance(bs, z).max(self.min_dist).powf(-self.alpha)
    }

    /// Serving cell of `z`: the nearest base station, lowest index on ties.
    pub fn assign_cell(&self, z: Point) -> usize {
        let mut best = 0;
        let mut best_dist = f64::INFINITY;
        for bs in 0..self.cells() {
            let d = self.distance(bs, z);
            if d < best_dist {
                best = bs;
                best_dist = d;
            }
        }
        best
    }

    /// Uniform point in `cell` outside the exclusion disc around its BS.
    pub fn sample_ue_in_cell<R: Rng + ?Sized>(&self, cell: usize, rng: &mut R) -> Result<Point> {
        self.check_cell(cell)?;
        for _ in 0..MAX_REJECTIONS {
            let z = Point::new(rng.gen_range(0.0..self.side), rng.gen_range(0.0..self.side));
            if self.assign_cell(z) == cell && self.distance(cell, z) >= self.min_dist {
                return Ok(z);
            }
        }
        Err(Error::DegenerateCell {
            cell,
            attempts: MAX_REJECTIONS,
        })
    }

    /// Plain-text record: a header with the scalar fields, then one `x y`
    /// line per base station. Floats are written in shortest round-trip form.
    pub fn to_text(&self) -> String {
        let mut out = String::from("# deployment\n");
        let _ = writeln!(out, "side {}", self.side);
        let _ = writeln!(out, "alpha {}", self.alpha);
        let _ = writeln!(out, "min_dist {}", self.min_dist);
        let _ = writeln!(out, "cells {}", self.cells());
        for p in &self.bs_positions {
            let _ = writeln!(out, "{} {}", p.x, p.y);
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut side = None;
        let mut alpha = None;
        let mut min_dist = None;
        let mut cells = None;
        let mut positions = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split_whitespace();
            let head = parts.next().unwrap_or_default();
            let value = parts.next();
            if parts.next().is_some() {
                return Err(Error::parse(line_no, "expected two fields"));
            }
            let value = value.ok_or_else(|| Error::parse(line_no, "expected two fields"))?;
            let num = |s: &str| {
                s.parse::<f64>()
                    .map_err(|e| Error::parse(line_no, format!("{s:?}: {e}")))
            };
            match head {
                "side" => side = Some(num(value)?),
                "alpha" => alpha = Some(num(value)?),
                "min_dist" => min_dist = Some(num(value)?),
                "cells" => {
                    cells = Some(
                        value
                            .parse::<usize>()
                            .map_err(|e| Error::parse(line_no, e.to_string()))?,
                    )
                }
                x => positions.push(Point::new(num(x)?, num(value)?)),
            }
        }
        let missing = |k: &str| Error::parse(0, format!("missing header field `{k}`"));
        let side = side.ok_or_else(|| missing("side"))?;
        let alpha = alpha.ok_or_else(|| missing("alpha"))?;
        let min_dist = min_dist.ok_or_else(|| missing("min_dist"))?;
        if let Some(n) = cells {
            if n != positions.len() {
                return Err(Error::parse(
                    0,
                    format!("header declares {n} cells, found {}", positions.len()),
                ));
            }
        }
        Self::new(positions, side, alpha, min_dist)
    }

    /// FNV-1a hash of the text record, used to tie tables to deployments.
    pub fn fingerprint(&self) -> u64 {
        self.to_text().bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
            (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3)
        })
    }
}

/// Random deployment with the default pathloss exponent.
pub fn generate_deployment(cells: usize, density: f64, seed: u64) -> Result<Deployment> {
    Deployment::random(cells, density, DEFAULT_ALPHA, seed)
}
