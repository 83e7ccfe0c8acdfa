//! Obstacle inflation: max-convolution of an elevation map with a
//! hemispherical kernel.
//!
//! Planning happens on the inflated surface `D` rather than the raw
//! heights: a skeleton point at `D(x, y)` corresponds to a wheel of the
//! robot resting on the terrain, so "touching" and "puncturing" become
//! simple comparisons of point height against `D`. Each map cell spawns a
//! dome of wheel radius `r` over its height; `D` is the upper envelope of
//! all domes.

use std::path::Path;

use crate::error::{Error, Result};
use crate::terrain::{read_grid, write_grid, ElevationMap, MapFormat};

/// Height of the dome a terrain point at height `height` raises at
/// horizontal offset `(dx, dy)`, for wheel radius `radius`.
///
/// The dome has support on the closed disc `dx^2 + dy^2 <= radius^2`; its
/// value there is `height + sqrt(radius^2 - dx^2 - dy^2)`, peaking at
/// `height + radius` over the point itself and falling to `height` at the
/// rim. Outside the disc the dome contributes nothing and the function
/// returns 0.
#[inline]
pub fn kernel_value(radius: f64, height: f64, dx: f64, dy: f64) -> f64 {
    let d2 = dx * dx + dy * dy;
    let r2 = radius * radius;
    if d2 <= r2 {
        height + (r2 - d2).sqrt()
    } else {
        0.0
    }
}

/// An elevation map's upper dome envelope, together with the wheel radius
/// it was built with.
#[derive(Debug, Clone, PartialEq)]
pub struct InflatedMap {
    grid: ElevationMap,
    source_radius: f64,
    /// Upper bound on |∂D/∂x| and |∂D/∂y| of the bilinear surface, used by
    /// contact searches to bound how fast clearance can change.
    slope_bound: f64,
}

impl InflatedMap {
    /// Wraps an already-inflated grid. Exposed so deserialization and
    /// bindings can rebuild the type; planning code should go through
    /// [`inflate`].
    pub fn from_parts(grid: ElevationMap, source_radius: f64) -> Result<Self> {
        if !(source_radius.is_finite() && source_radius > 0.0) {
            return Err(Error::InvalidParams(format!(
                "source radius must be positive, got {source_radius}"
            )));
        }
        let slope_bound = max_axis_slope(&grid);
        Ok(Self {
            grid,
            source_radius,
            slope_bound,
        })
    }

    /// The inflated values as a plain grid (same shape as the source map).
    pub fn grid(&self) -> &ElevationMap {
        &self.grid
    }

    /// Wheel radius the envelope was built with.
    pub fn source_radius(&self) -> f64 {
        self.source_radius
    }

    /// Largest height difference between adjacent cells divided by the
    /// resolution; contact searches use it as a Lipschitz bound on the
    /// surface.
    pub fn slope_bound(&self) -> f64 {
        self.slope_bound
    }

    /// Inflated value of one cell.
    #[inline]
    pub fn at(&self, ix: usize, iy: usize) -> f64 {
        self.grid.at(ix, iy)
    }

    /// Bilinear interpolation of the inflated surface; see
    /// [`ElevationMap::interpolate`] for the domain rules.
    #[inline]
    pub fn interpolate(&self, x: f64, y: f64) -> Result<f64> {
        self.grid.interpolate(x, y)
    }
}

fn max_axis_slope(grid: &ElevationMap) -> f64 {
    let (w, h, res) = (grid.width(), grid.height(), grid.resolution());
    let mut max_d = 0.0f64;
    for iy in 0..h {
        for ix in 0..w {
            let v = grid.at(ix, iy);
            if ix + 1 < w {
                max_d = max_d.max((grid.at(ix + 1, iy) - v).abs());
            }
            if iy + 1 < h {
                max_d = max_d.max((grid.at(ix, iy + 1) - v).abs());
            }
        }
    }
    max_d / res
}

/// Inflates a map: every output cell becomes the maximum dome height over
/// all input cells within horizontal distance `radius`.
///
/// The kernel stamp (cell offsets and their dome contributions) is
/// precomputed once, so the cost is O(cells × stamp). Cells near the map
/// border simply see a truncated stamp — only real in-bounds terrain ever
/// contributes.
pub fn inflate(map: &ElevationMap, radius: f64) -> Result<InflatedMap> {
    if !(radius.is_finite() && radius > 0.0) {
        return Err(Error::InvalidParams(format!(
            "inflation radius must be positive, got {radius}"
        )));
    }
    let res = map.resolution();
    let reach = (radius / res).floor() as i64;
    let mut stamp: Vec<(i64, i64, f64)> = Vec::new();
    for dj in -reach..=reach {
        for di in -reach..=reach {
            let dx = di as f64 * res;
            let dy = dj as f64 * res;
            let d2 = dx * dx + dy * dy;
            if d2 <= radius * radius {
                stamp.push((di, dj, (radius * radius - d2).sqrt()));
            }
        }
    }

    let (w, h) = (map.width() as i64, map.height() as i64);
    let mut values = Vec::with_capacity(map.heights().len());
    for qy in 0..h {
        for qx in 0..w {
            let mut best = f64::NEG_INFINITY;
            for &(di, dj, dome) in &stamp {
                let px = qx + di;
                let py = qy + dj;
                if px < 0 || px >= w || py < 0 || py >= h {
                    continue;
                }
                let v = map.at(px as usize, py as usize) + dome;
                if v > best {
                    best = v;
                }
            }
            values.push(best);
        }
    }
    let grid = ElevationMap::new(map.width(), map.height(), res, map.origin(), values)?;
    InflatedMap::from_parts(grid, radius)
}

/// Loads an inflated map; the header must carry `source_radius`.
pub fn load_inflated(path: &Path, format: MapFormat) -> Result<InflatedMap> {
    let grid = read_grid(path, format)?;
    let radius = grid.source_radius.ok_or_else(|| {
        Error::parse(path, 1, "missing header key `source_radius` for inflated map")
    })?;
    let map = ElevationMap::new(
        grid.width,
        grid.height,
        grid.resolution,
        grid.origin,
        grid.values,
    )?;
    InflatedMap::from_parts(map, radius)
}

/// Saves an inflated map (same grid layout as elevation maps plus the
/// `source_radius` header field).
pub fn save_inflated(map: &InflatedMap, path: &Path, format: MapFormat) -> Result<()> {
    write_grid(
        path,
        format,
        map.grid.width(),
        map.grid.height(),
        map.grid.resolution(),
        map.grid.origin(),
        Some(map.source_radius),
        map.grid.heights(),
    )
}
