//! Elevation maps: a uniform 2.5D height grid, text serialization, and the
//! synthetic obstacle scenes used by the sweep experiments.
//!
//! A map stores one height per cell, row-major with rows along y, and knows
//! the world position of cell `(0, 0)`'s center. Heights are continuous
//! values in meters; the grid itself never stores "unknown" cells — callers
//! that need partial coverage encode it in the heights they provide.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

/// Uniform-resolution elevation grid.
///
/// Cell `(ix, iy)` has its center at
/// `(origin.0 + ix * resolution, origin.1 + iy * resolution)`; `ix` runs
/// along world x (forward), `iy` along world y (left). All fields are
/// validated at construction and never mutated afterwards.
#[derive(Debug, Clone, PartialEq)]
pub struct ElevationMap {
    width: usize,
    height: usize,
    resolution: f64,
    origin: (f64, f64),
    heights: Vec<f64>,
}

impl ElevationMap {
    /// Builds a map from raw parts.
    ///
    /// Rejects empty dimensions, non-positive or non-finite resolution,
    /// non-finite origin, a heights buffer whose length is not
    /// `width * height`, and non-finite heights.
    pub fn new(
        width: usize,
        height: usize,
        resolution: f64,
        origin: (f64, f64),
        heights: Vec<f64>,
    ) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidMap(format!(
                "dimensions must be at least 1x1, got {width}x{height}"
            )));
        }
        if !(resolution.is_finite() && resolution > 0.0) {
            return Err(Error::InvalidMap(format!(
                "resolution must be finite and positive, got {resolution}"
            )));
        }
        if !(origin.0.is_finite() && origin.1.is_finite()) {
            return Err(Error::InvalidMap(format!(
                "origin must be finite, got ({}, {})",
                origin.0, origin.1
            )));
        }
        if heights.len() != width * height {
            return Err(Error::InvalidMap(format!(
                "expected {} heights for a {width}x{height} grid, got {}",
                width * height,
                heights.len()
            )));
        }
        if let Some(i) = heights.iter().position(|h| !h.is_finite()) {
            return Err(Error::InvalidMap(format!(
                "non-finite height {} at cell ({}, {})",
                heights[i],
                i % width,
                i / width
            )));
        }
        Ok(Self {
            width,
            height,
            resolution,
            origin,
            heights,
        })
    }

    /// Constant-height map, mostly useful for tests and flat-ground runs.
    pub fn flat(
        width: usize,
        height: usize,
        resolution: f64,
        origin: (f64, f64),
        value: f64,
    ) -> Result<Self> {
        Self::new(width, height, resolution, origin, vec![value; width * height])
    }

    /// Number of cells along x.
    pub fn width(&self) -> usize {
        self.width
    }

    /// Number of cells along y.
    pub fn height(&self) -> usize {
        self.height
    }

    /// Cell edge length in meters.
    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    /// World (x, y) of cell (0, 0)'s center.
    pub fn origin(&self) -> (f64, f64) {
        self.origin
    }

    /// Raw row-major heights, rows along y.
    pub fn heights(&self) -> &[f64] {
        &self.heights
    }

    /// Height of one cell. Panics if the indices are out of range.
    #[inline]
    pub fn at(&self, ix: usize, iy: usize) -> f64 {
        assert!(ix < self.width && iy < self.height);
        self.heights[iy * self.width + ix]
    }

    /// World coordinates of a cell center.
    #[inline]
    pub fn cell_center(&self, ix: usize, iy: usize) -> (f64, f64) {
        (
            self.origin.0 + ix as f64 * self.resolution,
            self.origin.1 + iy as f64 * self.resolution,
        )
    }

    /// Inclusive world-x span of the interpolation domain (first to last
    /// cell center).
    pub fn x_range(&self) -> (f64, f64) {
        (
            self.origin.0,
            self.origin.0 + (self.width - 1) as f64 * self.resolution,
        )
    }

    /// Inclusive world-y span of the interpolation domain.
    pub fn y_range(&self) -> (f64, f64) {
        (
            self.origin.1,
            self.origin.1 + (self.height - 1) as f64 * self.resolution,
        )
    }

    /// Bilinear interpolation between the four surrounding cell centers.
    ///
    /// The domain is the rectangle spanned by the outermost cell centers;
    /// queries outside it are an error rather than a clamp, so callers find
    /// out when the robot footprint leaves the mapped area. Queries exactly
    /// on a cell center return the stored value exactly.
    #[inline]
    pub fn interpolate(&self, x: f64, y: f64) -> Result<f64> {
        let fx = (x - self.origin.0) / self.resolution;
        let fy = (y - self.origin.1) / self.resolution;
        if !(fx >= 0.0 && fx <= (self.width - 1) as f64 && fy >= 0.0 && fy <= (self.height - 1) as f64)
        {
            return Err(Error::OutOfBounds { x, y });
        }
        // Clamp the base cell so queries on the far edge still have a valid
        // 2x2 neighborhood (with t = 1 on the clamped axis).
        let ix = (fx as usize).min(self.width.saturating_sub(2));
        let iy = (fy as usize).min(self.height.saturating_sub(2));
        let (tx, ty) = if self.width == 1 || self.height == 1 {
            // Degenerate axes collapse to 1D/0D interpolation.
            (
                if self.width == 1 { 0.0 } else { fx - ix as f64 },
                if self.height == 1 { 0.0 } else { fy - iy as f64 },
            )
        } else {
            (fx - ix as f64, fy - iy as f64)
        };
        let ix1 = (ix + 1).min(self.width - 1);
        let iy1 = (iy + 1).min(self.height - 1);
        let v00 = self.heights[iy * self.width + ix];
        let v10 = self.heights[iy * self.width + ix1];
        let v01 = self.heights[iy1 * self.width + ix];
        let v11 = self.heights[iy1 * self.width + ix1];
        // The (1-t)*a + t*b form is exact at t = 0 and t = 1, which keeps
        // cell-center queries bit-identical to the stored heights.
        let low = v00 * (1.0 - tx) + v10 * tx;
        let high = v01 * (1.0 - tx) + v11 * tx;
        Ok(low * (1.0 - ty) + high * ty)
    }
}

/// On-disk encodings for elevation and inflated maps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MapFormat {
    /// One `key=value` header line, then one line of space-separated
    /// heights per row.
    AsciiGrid,
    /// The same header as `#`-prefixed comment lines, then comma-separated
    /// rows.
    Csv,
}

impl MapFormat {
    /// Picks a format from a file extension; `.csv` means [`MapFormat::Csv`],
    /// anything else the ascii grid.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => MapFormat::Csv,
            _ => MapFormat::AsciiGrid,
        }
    }
}

/// Parsed header + values of a grid file, shared by elevation and inflated
/// map readers.
pub(crate) struct GridFile {
    pub width: usize,
    pub height: usize,
    pub resolution: f64,
    pub origin: (f64, f64),
    pub source_radius: Option<f64>,
    pub values: Vec<f64>,
}

/// Formats a float so that parsing the text recovers the exact same bits
/// (shortest round-trip representation).
pub(crate) fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

pub(crate) fn write_grid(
    path: &Path,
    format: MapFormat,
    width: usize,
    height: usize,
    resolution: f64,
    origin: (f64, f64),
    source_radius: Option<f64>,
    values: &[f64],
) -> Result<()> {
    let mut header = format!(
        "width={width} height={height} resolution={} origin={},{}",
        fmt_f64(resolution),
        fmt_f64(origin.0),
        fmt_f64(origin.1)
    );
    if let Some(r) = source_radius {
        let _ = write!(header, " source_radius={}", fmt_f64(r));
    }
    let (prefix, sep) = match format {
        MapFormat::AsciiGrid => ("", " "),
        MapFormat::Csv => ("# ", ","),
    };
    let mut out = String::with_capacity(values.len() * 8);
    out.push_str(prefix);
    out.push_str(&header);
    out.push('\n');
    for row in values.chunks(width) {
        for (i, v) in row.iter().enumerate() {
            if i > 0 {
                out.push_str(sep);
            }
            out.push_str(&fmt_f64(*v));
        }
        out.push('\n');
    }
    atomic_write(path, out.as_bytes())
}

pub(crate) fn read_grid(path: &Path, format: MapFormat) -> Result<GridFile> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut width = None;
    let mut height = None;
    let mut resolution = None;
    let mut origin = None;
    let mut source_radius = None;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut header_done = false;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let is_comment = line.starts_with('#');
        if !header_done && (is_comment || rows.is_empty() && width.is_none()) && {
            // Header lines are either comments (csv) or the first
            // non-empty line containing key=value pairs (ascii grid).
            is_comment || line.contains('=')
        } {
            let body = line.trim_start_matches('#').trim();
            for token in body.split_whitespace() {
                let (key, value) = token.split_once('=').ok_or_else(|| {
                    Error::parse(path, line_no, format!("expected key=value, got `{token}`"))
                })?;
                match key {
                    "width" => {
                        let v: f64 = value.parse_kv(path, line_no, key)?;
                        width = Some(as_dimension(v, path, line_no, "width")?);
                    }
                    "height" => {
                        let v: f64 = value.parse_kv(path, line_no, key)?;
                        height = Some(as_dimension(v, path, line_no, "height")?);
                    }
                    "resolution" => resolution = Some(value.parse_kv(path, line_no, key)?),
                    "origin" => {
                        let (a, b) = value.split_once(',').ok_or_else(|| {
                            Error::parse(path, line_no, "origin must be `x,y`")
                        })?;
                        origin = Some((
                            a.parse_kv(path, line_no, "origin.x")?,
                            b.parse_kv(path, line_no, "origin.y")?,
                        ));
                    }
                    "source_radius" => {
                        source_radius = Some(value.parse_kv(path, line_no, key)?)
                    }
                    other => {
                        return Err(Error::parse(
                            path,
                            line_no,
                            format!("unknown header key `{other}`"),
                        ))
                    }
                }
            }
            continue;
        }
        header_done = true;
        if is_comment {
            return Err(Error::parse(path, line_no, "comment after data rows"));
        }
        let sep_values: Vec<&str> = match format {
            MapFormat::AsciiGrid => line.split_whitespace().collect(),
            MapFormat::Csv => line.split(',').map(str::trim).collect(),
        };
        let mut row = Vec::with_capacity(sep_values.len());
        for token in sep_values {
            let v: f64 = token.parse().map_err(|_| {
                Error::parse(path, line_no, format!("invalid height `{token}`"))
            })?;
            if !v.is_finite() {
                return Err(Error::parse(
                    path,
                    line_no,
                    format!("non-finite height `{token}`"),
                ));
            }
            row.push(v);
        }
        if let Some(w) = width {
            if row.len() != w {
                return Err(Error::parse(
                    path,
                    line_no,
                    format!("expected {w} values in row, got {}", row.len()),
                ));
            }
        }
        rows.push(row);
    }

    let width = width.ok_or_else(|| Error::parse(path, 1, "missing header key `width`"))?;
    let height = height.ok_or_else(|| Error::parse(path, 1, "missing header key `height`"))?;
    let resolution =
        resolution.ok_or_else(|| Error::parse(path, 1, "missing header key `resolution`"))?;
    let origin = origin.ok_or_else(|| Error::parse(path, 1, "missing header key `origin`"))?;
    if rows.len() != height {
        return Err(Error::parse(
            path,
            text.lines().count().max(1),
            format!("expected {height} data rows, got {}", rows.len()),
        ));
    }
    let values: Vec<f64> = rows.into_iter().flatten().collect();
    Ok(GridFile {
        width,
        height,
        resolution,
        origin,
        source_radius,
        values,
    })
}

/// Writes `contents` to a sibling temp file and renames it over `path`, so
/// a failure mid-write never leaves a truncated artifact behind.
pub(crate) fn atomic_write(path: &Path, contents: &[u8]) -> Result<()> {
    let mut tmp: PathBuf = path.to_path_buf();
    let mut name = tmp
        .file_name()
        .map(|n| n.to_os_string())
        .unwrap_or_default();
    name.push(".tmp");
    tmp.set_file_name(name);
    fs::write(&tmp, contents).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

trait ParseKv {
    fn parse_kv(&self, path: &Path, line: usize, key: &str) -> Result<f64>;
}

impl ParseKv for str {
    fn parse_kv(&self, path: &Path, line: usize, key: &str) -> Result<f64> {
        let v: f64 = self.parse().map_err(|_| {
            Error::parse(path, line, format!("invalid number `{self}` for `{key}`"))
        })?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::parse(
                path,
                line,
                format!("non-finite value `{self}` for `{key}`"),
            ))
        }
    }
}

fn as_dimension(v: f64, path: &Path, line: usize, key: &str) -> Result<usize> {
    if v.fract() == 0.0 && v >= 1.0 && v <= usize::MAX as f64 {
        Ok(v as usize)
    } else {
        Err(Error::parse(
            path,
            line,
            format!("`{key}` must be a positive integer, got {v}"),
        ))
    }
}

/// Loads an elevation map. For inflated maps see
/// [`crate::inflation::load_inflated`].
pub fn load_map(path: &Path, format: MapFormat) -> Result<ElevationMap> {
    let grid = read_grid(path, format)?;
    ElevationMap::new(
        grid.width,
        grid.height,
        grid.resolution,
        grid.origin,
        grid.values,
    )
}

/// Saves an elevation map with full round-trip precision.
pub fn save_map(map: &ElevationMap, path: &Path, format: MapFormat) -> Result<()> {
    write_grid(
        path,
        format,
        map.width,
        map.height,
        map.resolution,
        map.origin,
        None,
        &map.heights,
    )
}

/// The three synthetic obstacle families used in the sweep experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObstacleKind {
    /// A vertical face: 0 before the boundary, full height after it.
    Step,
    /// Flat, then a linear rise over `slope_run`, then a plateau.
    Ramp,
    /// The ramp met from its high side: a vertical face at the boundary,
    /// then a linear descent back to grade over `slope_run`.
    InverseRamp,
}

impl ObstacleKind {
    /// Stable lowercase name, used by the CLI and sweep summaries.
    pub fn name(&self) -> &'static str {
        match self {
            ObstacleKind::Step => "step",
            ObstacleKind::Ramp => "ramp",
            ObstacleKind::InverseRamp => "iramp",
        }
    }

    /// Inverse of [`ObstacleKind::name`].
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "step" => Some(ObstacleKind::Step),
            "ramp" => Some(ObstacleKind::Ramp),
            "iramp" => Some(ObstacleKind::InverseRamp),
            _ => None,
        }
    }
}

/// Description of one synthetic scene.
///
/// The obstacle's front boundary is a line through `(axis_distance, 0)`,
/// rotated clockwise (seen from above) by `rotation_deg` from being
/// perpendicular to the direction of travel. `axis_distance` is measured
/// from the conventional robot start at world x = 0.
#[derive(Debug, Clone, PartialEq)]
pub struct ObstacleSpec {
    pub kind: ObstacleKind,
    /// Clockwise rotation of the obstacle about the vertical axis, degrees.
    /// Valid range `[0, 90)`.
    pub rotation_deg: f64,
    /// World x of the rotation axis / front boundary at y = 0.
    pub axis_distance: f64,
    /// Peak height of the feature, meters.
    pub obstacle_height: f64,
    /// Horizontal run of the sloped section (ramp kinds), meters.
    pub slope_run: f64,
    /// Total map extent (x, y) in meters.
    pub map_extent: (f64, f64),
    /// Grid resolution in meters per cell.
    pub resolution: f64,
    /// World position of cell (0, 0); the default leaves 0.2 m of flat
    /// ground behind the robot start and centers the map on y = 0.
    pub origin: (f64, f64),
}

impl ObstacleSpec {
    /// Scene with the default experiment geometry: a 1.0 x 0.6 m map at
    /// 5 mm resolution, the obstacle boundary 0.54 m ahead of the start,
    /// 0.06 m feature height, and a 0.30 m slope run.
    pub fn new(kind: ObstacleKind, rotation_deg: f64) -> Self {
        Self {
            kind,
            rotation_deg,
            axis_distance: 0.54,
            obstacle_height: 0.06,
            slope_run: 0.30,
            map_extent: (1.0, 0.6),
            resolution: 0.005,
            origin: (-0.2, -0.3),
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.rotation_deg >= 0.0 && self.rotation_deg < 90.0) {
            return Err(Error::InvalidParams(format!(
                "obstacle rotation must be in [0, 90) degrees, got {}",
                self.rotation_deg
            )));
        }
        if !(self.obstacle_height.is_finite() && self.obstacle_height >= 0.0) {
            return Err(Error::InvalidParams(format!(
                "obstacle height must be non-negative, got {}",
                self.obstacle_height
            )));
        }
        if !(self.resolution.is_finite() && self.resolution > 0.0) {
            return Err(Error::InvalidParams(format!(
                "resolution must be positive, got {}",
                self.resolution
            )));
        }
        if !(self.map_extent.0 > 0.0 && self.map_extent.1 > 0.0) {
            return Err(Error::InvalidParams(format!(
                "map extent must be positive, got ({}, {})",
                self.map_extent.0, self.map_extent.1
            )));
        }
        let needs_run = matches!(self.kind, ObstacleKind::Ramp | ObstacleKind::InverseRamp);
        if needs_run && !(self.slope_run.is_finite() && self.slope_run > 0.0) {
            return Err(Error::InvalidParams(format!(
                "slope run must be positive for {}, got {}",
                self.kind.name(),
                self.slope_run
            )));
        }
        // The feature boundary must cross the mapped area so the scene
        // actually contains an obstacle; the profile beyond the boundary
        // (a ramp's upper plateau, say) may extend past the map edge and
        // simply gets cropped.
        let x_max = self.origin.0 + self.map_extent.0;
        if self.axis_distance <= self.origin.0 || self.axis_distance >= x_max {
            return Err(Error::InvalidParams(format!(
                "feature boundary at x = {} lies outside the map x span [{}, {x_max}]",
                self.axis_distance, self.origin.0
            )));
        }
        Ok(())
    }

    /// Height profile as a function of the signed distance past the
    /// boundary (positive = inside the feature).
    fn profile(&self, s: f64) -> f64 {
        let h = self.obstacle_height;
        match self.kind {
            ObstacleKind::Step => {
                if s >= 0.0 {
                    h
                } else {
                    0.0
                }
            }
            ObstacleKind::Ramp => {
                if s < 0.0 {
                    0.0
                } else if s < self.slope_run {
                    h * (s / self.slope_run)
                } else {
                    h
                }
            }
            ObstacleKind::InverseRamp => {
                if s < 0.0 || s > self.slope_run {
                    0.0
                } else {
                    h * (1.0 - s / self.slope_run)
                }
            }
        }
    }
}

/// Rasterizes a synthetic obstacle scene into an elevation map.
///
/// Heights are evaluated at cell centers from the rotated signed distance
/// to the feature boundary, so a zero-rotation scene is exactly constant
/// along y.
pub fn generate_obstacle(spec: &ObstacleSpec) -> Result<ElevationMap> {
    spec.validate()?;
    let width = (spec.map_extent.0 / spec.resolution).round().max(1.0) as usize;
    let height = (spec.map_extent.1 / spec.resolution).round().max(1.0) as usize;
    let gamma = spec.rotation_deg.to_radians();
    let (sin_g, cos_g) = (gamma.sin(), gamma.cos());
    let mut heights = Vec::with_capacity(width * height);
    for iy in 0..height {
        let y = spec.origin.1 + iy as f64 * spec.resolution;
        for ix in 0..width {
            let x = spec.origin.0 + ix as f64 * spec.resolution;
            // Signed distance past the boundary, measured along the
            // boundary normal (clockwise rotation turns the normal from
            // +x toward -y).
            let s = (x - spec.axis_distance) * cos_g - y * sin_g;
            heights.push(spec.profile(s));
        }
    }
    ElevationMap::new(width, height, spec.resolution, spec.origin, heights)
}
