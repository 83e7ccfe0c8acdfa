//! Python bindings for the flipperplan morphology planner.
//!
//! The module mirrors the library's pipeline: build or load an elevation
//! map, inflate it by the wheel radius, plan a sequence of whole-body
//! configurations across it, and replay the result with the tick-level
//! follower. Build the importable module with
//! `cargo build -p flipperplan-py --features extension-module` and rename
//! the produced `libflipperplan_py.so` to `flipperplan_py.so`.

use std::path::PathBuf;

use pyo3::exceptions::{PyIOError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use flipperplan::config_gen::{validate_morphology, ContactParams};
use flipperplan::follower::{
    follow as follow_path, pitch_compensation as pitch_comp, DisturbanceSpec, FollowSettings,
    TrackingReport,
};
use flipperplan::inflation::{
    inflate as inflate_map, load_inflated, save_inflated, InflatedMap,
};
use flipperplan::path_search::{
    export_path, import_path, level_start as lib_level_start, map_hash, plan as lib_plan,
    PlanPath, SearchSettings,
};
use flipperplan::robot_model::{Morphology, RobotParams, Side};
use flipperplan::terrain::{
    generate_obstacle, load_map, save_map, ElevationMap, MapFormat, ObstacleKind, ObstacleSpec,
};
use flipperplan::{Error, Point};

fn to_py(e: Error) -> PyErr {
    match &e {
        Error::Io { .. } => PyIOError::new_err(e.to_string()),
        Error::Parse { .. }
        | Error::InvalidMap(_)
        | Error::InvalidParams(_)
        | Error::InvalidMorphology(_)
        | Error::OutOfBounds { .. } => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn format_for(path: &std::path::Path) -> MapFormat {
    match path.extension().and_then(|e| e.to_str()) {
        Some("csv") => MapFormat::Csv,
        _ => MapFormat::AsciiGrid,
    }
}

fn point_tuple(p: Point) -> (f64, f64, f64) {
    (p.x, p.y, p.z)
}

// ---------------------------------------------------------------------------

/// A 2.5D elevation grid: row-major heights on a regular xy lattice.
#[pyclass(skip_from_py_object, name = "ElevationMap", module = "flipperplan_py")]
#[derive(Clone)]
struct PyElevationMap {
    inner: ElevationMap,
}

#[pymethods]
impl PyElevationMap {
    #[new]
    fn new(
        width: usize,
        height: usize,
        resolution: f64,
        origin: (f64, f64),
        heights: Vec<f64>,
    ) -> PyResult<Self> {
        ElevationMap::new(width, height, resolution, origin, heights)
            .map(|inner| Self { inner })
            .map_err(to_py)
    }

    /// Constant-height map.
    #[staticmethod]
    fn flat(
        width: usize,
        height: usize,
        resolution: f64,
        origin: (f64, f64),
        value: f64,
    ) -> PyResult<Self> {
        ElevationMap::flat(width, height, resolution, origin, value)
            .map(|inner| Self { inner })
            .map_err(to_py)
    }

    /// Synthetic benchmark scene: `kind` is `step`, `ramp`, or `iramp`;
    /// the obstacle boundary is rotated by `rotation_deg` about the
    /// vertical axis. Omitted parameters use the standard scene.
    #[staticmethod]
    #[pyo3(signature = (kind, rotation_deg, *, axis_distance=None, obstacle_height=None,
                        slope_run=None, map_extent=None, resolution=None, origin=None))]
    #[allow(clippy::too_many_arguments)]
    fn obstacle(
        kind: &str,
        rotation_deg: f64,
        axis_distance: Option<f64>,
        obstacle_height: Option<f64>,
        slope_run: Option<f64>,
        map_extent: Option<(f64, f64)>,
        resolution: Option<f64>,
        origin: Option<(f64, f64)>,
    ) -> PyResult<Self> {
        let kind = ObstacleKind::parse(kind)
            .ok_or_else(|| PyValueError::new_err(format!("unknown obstacle kind {kind:?}")))?;
        let mut spec = ObstacleSpec::new(kind, rotation_deg);
        if let Some(v) = axis_distance {
            spec.axis_distance = v;
        }
        if let Some(v) = obstacle_height {
            spec.obstacle_height = v;
        }
        if let Some(v) = slope_run {
            spec.slope_run = v;
        }
        if let Some(v) = map_extent {
            spec.map_extent = v;
        }
        if let Some(v) = resolution {
            spec.resolution = v;
        }
        if let Some(v) = origin {
            spec.origin = v;
        }
        generate_obstacle(&spec)
            .map(|inner| Self { inner })
            .map_err(to_py)
    }

    /// Reads a map saved by `save` (`.csv` selects the CSV flavor).
    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        load_map(&path, format_for(&path))
            .map(|inner| Self { inner })
            .map_err(to_py)
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        save_map(&self.inner, &path, format_for(&path)).map_err(to_py)
    }

    #[getter]
    fn width(&self) -> usize {
        self.inner.width()
    }

    #[getter]
    fn height(&self) -> usize {
        self.inner.height()
    }

    #[getter]
    fn resolution(&self) -> f64 {
        self.inner.resolution()
    }

    #[getter]
    fn origin(&self) -> (f64, f64) {
        self.inner.origin()
    }

    /// Height stored at cell `(ix, iy)`.
    fn at(&self, ix: usize, iy: usize) -> PyResult<f64> {
        if ix >= self.inner.width() || iy >= self.inner.height() {
            return Err(PyValueError::new_err(format!(
                "cell ({ix}, {iy}) outside a {}x{} grid",
                self.inner.width(),
                self.inner.height()
            )));
        }
        Ok(self.inner.at(ix, iy))
    }

    /// Bilinear height at a world position inside the domain.
    fn interpolate(&self, x: f64, y: f64) -> PyResult<f64> {
        self.inner.interpolate(x, y).map_err(to_py)
    }

    /// Row-major copy of the height buffer.
    fn heights(&self) -> Vec<f64> {
        self.inner.heights().to_vec()
    }

    fn __repr__(&self) -> String {
        format!(
            "ElevationMap({}x{} @ {} m, origin {:?})",
            self.inner.width(),
            self.inner.height(),
            self.inner.resolution(),
            self.inner.origin()
        )
    }
}

/// The elevation map inflated by the wheel radius; what the planner's
/// contact and clearance queries run against.
#[pyclass(skip_from_py_object, name = "InflatedMap", module = "flipperplan_py")]
#[derive(Clone)]
struct PyInflatedMap {
    inner: InflatedMap,
}

#[pymethods]
impl PyInflatedMap {
    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        load_inflated(&path, format_for(&path))
            .map(|inner| Self { inner })
            .map_err(to_py)
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        save_inflated(&self.inner, &path, format_for(&path)).map_err(to_py)
    }

    /// Largest height step between adjacent cells, per meter.
    #[getter]
    fn slope_bound(&self) -> f64 {
        self.inner.slope_bound()
    }

    /// The underlying grid of inflated heights.
    fn grid(&self) -> PyElevationMap {
        PyElevationMap {
            inner: self.inner.grid().clone(),
        }
    }

    fn interpolate(&self, x: f64, y: f64) -> PyResult<f64> {
        self.inner.interpolate(x, y).map_err(to_py)
    }

    /// Hex digest identifying this map in path-file provenance headers.
    fn hash(&self) -> String {
        map_hash(&self.inner)
    }

    fn __repr__(&self) -> String {
        format!(
            "InflatedMap({}x{}, slope bound {:.3})",
            self.inner.grid().width(),
            self.inner.grid().height(),
            self.inner.slope_bound()
        )
    }
}

/// Robot geometry and joint limits.
#[pyclass(skip_from_py_object, name = "RobotParams", module = "flipperplan_py")]
#[derive(Clone)]
struct PyRobotParams {
    inner: RobotParams,
}

#[pymethods]
impl PyRobotParams {
    /// All parameters default to the reference robot; pass keywords to
    /// override individual values.
    #[new]
    #[pyo3(signature = (*, wheel_radius=None, track_width=None, robot_width=None,
                        base_length=None, flipper_length=None, flipper_limits=None,
                        pitch_bounds=None))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        wheel_radius: Option<f64>,
        track_width: Option<f64>,
        robot_width: Option<f64>,
        base_length: Option<f64>,
        flipper_length: Option<f64>,
        flipper_limits: Option<(f64, f64)>,
        pitch_bounds: Option<(f64, f64)>,
    ) -> PyResult<Self> {
        let mut p = RobotParams::default();
        if let Some(v) = wheel_radius {
            p.wheel_radius = v;
        }
        if let Some(v) = track_width {
            p.track_width = v;
        }
        if let Some(v) = robot_width {
            p.robot_width = v;
        }
        if let Some(v) = base_length {
            p.base_length = v;
        }
        if let Some(v) = flipper_length {
            p.flipper_length = v;
        }
        if let Some(v) = flipper_limits {
            p.flipper_limits = v;
        }
        if let Some(v) = pitch_bounds {
            p.pitch_bounds = v;
        }
        p.validate().map_err(to_py)?;
        Ok(Self { inner: p })
    }

    /// Parses the `key = value` config format used by the CLI.
    #[staticmethod]
    fn from_config(text: &str) -> PyResult<Self> {
        RobotParams::from_config_str(text, std::path::Path::new("<string>"))
            .map(|inner| Self { inner })
            .map_err(to_py)
    }

    fn to_config(&self) -> String {
        self.inner.to_config_string()
    }

    #[getter]
    fn wheel_radius(&self) -> f64 {
        self.inner.wheel_radius
    }

    #[getter]
    fn track_width(&self) -> f64 {
        self.inner.track_width
    }

    #[getter]
    fn robot_width(&self) -> f64 {
        self.inner.robot_width
    }

    #[getter]
    fn base_length(&self) -> f64 {
        self.inner.base_length
    }

    #[getter]
    fn flipper_length(&self) -> f64 {
        self.inner.flipper_length
    }

    #[getter]
    fn flipper_limits(&self) -> (f64, f64) {
        self.inner.flipper_limits
    }

    #[getter]
    fn pitch_bounds(&self) -> (f64, f64) {
        self.inner.pitch_bounds
    }

    fn __repr__(&self) -> String {
        format!("RobotParams({:?})", self.inner)
    }
}

/// One whole-body configuration: the two rear axle joints, the body
/// orientation, and the four flipper angles.
#[pyclass(skip_from_py_object, name = "Morphology", module = "flipperplan_py")]
#[derive(Clone)]
struct PyMorphology {
    inner: Morphology,
}

#[pymethods]
impl PyMorphology {
    /// Left rear axle joint position `(x, y, z)`.
    #[getter]
    fn p_sl2(&self) -> (f64, f64, f64) {
        point_tuple(self.inner.p_sl2)
    }

    /// Right rear axle joint position `(x, y, z)`.
    #[getter]
    fn p_sr2(&self) -> (f64, f64, f64) {
        point_tuple(self.inner.p_sr2)
    }

    #[getter]
    fn yaw(&self) -> f64 {
        self.inner.yaw
    }

    #[getter]
    fn pitch(&self) -> f64 {
        self.inner.pitch
    }

    #[getter]
    fn roll(&self) -> f64 {
        self.inner.roll
    }

    /// Flipper angles `(alpha_l, alpha_r, beta_l, beta_r)`:
    /// front-left, front-right, rear-left, rear-right.
    #[getter]
    fn flippers(&self) -> (f64, f64, f64, f64) {
        let f = &self.inner.flippers;
        (f.alpha_l, f.alpha_r, f.beta_l, f.beta_r)
    }

    /// Center of the rear axle, the point the follower tracks.
    fn center(&self) -> (f64, f64, f64) {
        point_tuple(self.inner.s_middle2())
    }

    /// The configuration reflected about the y = 0 plane.
    fn mirrored(&self) -> Self {
        Self {
            inner: self.inner.mirrored(),
        }
    }

    fn __repr__(&self) -> String {
        let c = self.inner.s_middle2();
        format!(
            "Morphology(center ({:.3}, {:.3}, {:.3}), yaw {:.3}, pitch {:.3}, roll {:.3})",
            c.x, c.y, c.z, self.inner.yaw, self.inner.pitch, self.inner.roll
        )
    }
}

/// One planned step: the configuration to adopt, its cost, and which
/// side's reference was advanced to produce it.
#[pyclass(skip_from_py_object, name = "PlanStep", module = "flipperplan_py")]
#[derive(Clone)]
struct PyPlanStep {
    morphology: PyMorphology,
    cost: f64,
    side: Side,
}

#[pymethods]
impl PyPlanStep {
    #[getter]
    fn morphology(&self) -> PyMorphology {
        self.morphology.clone()
    }

    #[getter]
    fn cost(&self) -> f64 {
        self.cost
    }

    /// `"left"` or `"right"`.
    #[getter]
    fn side(&self) -> &'static str {
        match self.side {
            Side::Left => "left",
            Side::Right => "right",
        }
    }

    fn __repr__(&self) -> String {
        format!("PlanStep(side {}, cost {:.6})", self.side(), self.cost)
    }
}

/// A planned sequence of configurations plus the provenance needed to
/// replay it.
#[pyclass(skip_from_py_object, name = "PlanPath", module = "flipperplan_py")]
#[derive(Clone)]
struct PyPlanPath {
    inner: PlanPath,
}

#[pymethods]
impl PyPlanPath {
    /// Reads a `.path` file written by `save` or the CLI.
    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        import_path(&path).map(|inner| Self { inner }).map_err(to_py)
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        export_path(&self.inner, &path).map_err(to_py)
    }

    fn steps(&self) -> Vec<PyPlanStep> {
        self.inner
            .steps
            .iter()
            .map(|s| PyPlanStep {
                morphology: PyMorphology {
                    inner: s.morphology,
                },
                cost: s.cost,
                side: s.side,
            })
            .collect()
    }

    #[getter]
    fn total_cost(&self) -> f64 {
        self.inner.total_cost()
    }

    /// Hash of the inflated map the path was planned on.
    #[getter]
    fn map_hash(&self) -> String {
        self.inner.provenance.map_hash.clone()
    }

    /// The robot the path was planned for.
    #[getter]
    fn robot(&self) -> PyRobotParams {
        PyRobotParams {
            inner: self.inner.provenance.robot.clone(),
        }
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "PlanPath({} steps, total cost {:.6})",
            self.inner.len(),
            self.inner.total_cost()
        )
    }
}

/// Result of replaying a path with the tick-level follower.
#[pyclass(skip_from_py_object, name = "TrackingReport", module = "flipperplan_py")]
struct PyTrackingReport {
    inner: TrackingReport,
}

#[pymethods]
impl PyTrackingReport {
    /// Whether every step target was reached within the tick budget.
    #[getter]
    fn completed(&self) -> bool {
        self.inner.completed
    }

    #[getter]
    fn ticks_used(&self) -> usize {
        self.inner.ticks_used
    }

    /// Distance from the final target at the last tick, meters.
    #[getter]
    fn final_position_error(&self) -> f64 {
        self.inner.summary.final_position_error
    }

    /// `(yaw, pitch, roll)` error at the last tick, radians.
    #[getter]
    fn final_orientation_error(&self) -> (f64, f64, f64) {
        let e = self.inner.summary.final_orientation_error;
        (e[0], e[1], e[2])
    }

    /// Largest per-axis position error over the replay, meters.
    #[getter]
    fn max_abs_position(&self) -> (f64, f64, f64) {
        let e = self.inner.summary.max_abs_position;
        (e[0], e[1], e[2])
    }

    /// Largest per-axis orientation error over the replay, radians.
    #[getter]
    fn max_abs_orientation(&self) -> (f64, f64, f64) {
        let e = self.inner.summary.max_abs_orientation;
        (e[0], e[1], e[2])
    }

    /// Per-tick trace as
    /// `(tick, actual_xyz, target_xyz, actual_ypr, target_ypr)` tuples.
    #[allow(clippy::type_complexity)]
    fn records(
        &self,
    ) -> Vec<(
        usize,
        (f64, f64, f64),
        (f64, f64, f64),
        (f64, f64, f64),
        (f64, f64, f64),
    )> {
        self.inner
            .records
            .iter()
            .map(|r| {
                (
                    r.tick,
                    point_tuple(r.actual_pos),
                    point_tuple(r.target_pos),
                    (r.actual_rpy[0], r.actual_rpy[1], r.actual_rpy[2]),
                    (r.target_rpy[0], r.target_rpy[1], r.target_rpy[2]),
                )
            })
            .collect()
    }

    fn __repr__(&self) -> String {
        format!(
            "TrackingReport(completed {}, {} ticks, final error {:.4} m)",
            self.inner.completed,
            self.inner.ticks_used,
            self.inner.summary.final_position_error
        )
    }
}

// ---------------------------------------------------------------------------

/// Inflates a terrain map by the wheel radius.
#[pyfunction]
fn inflate(map: &PyElevationMap, radius: f64) -> PyResult<PyInflatedMap> {
    inflate_map(&map.inner, radius)
        .map(|inner| PyInflatedMap { inner })
        .map_err(to_py)
}

/// Level configuration resting on the inflated surface at `(x, y)`, the
/// usual start pose for `plan`.
#[pyfunction]
fn level_start(
    x: f64,
    y: f64,
    inflated: &PyInflatedMap,
    robot: &PyRobotParams,
) -> PyResult<PyMorphology> {
    lib_level_start(x, y, &inflated.inner, &robot.inner, &ContactParams::default())
        .map(|inner| PyMorphology { inner })
        .map_err(to_py)
}

/// Plans a configuration sequence from `start` until the body center
/// passes `target_x`. Keyword arguments override the search defaults.
#[pyfunction]
#[pyo3(signature = (start, terrain, inflated, robot, *, dx=None, dh=None, h_samples=None,
                    target_x=None, cost_sample_step=None, beam_width=None))]
#[allow(clippy::too_many_arguments)]
fn plan(
    start: &PyMorphology,
    terrain: &PyElevationMap,
    inflated: &PyInflatedMap,
    robot: &PyRobotParams,
    dx: Option<f64>,
    dh: Option<f64>,
    h_samples: Option<usize>,
    target_x: Option<f64>,
    cost_sample_step: Option<f64>,
    beam_width: Option<usize>,
) -> PyResult<PyPlanPath> {
    let mut settings = SearchSettings::default();
    if let Some(v) = dx {
        settings.dx = v;
    }
    if let Some(v) = dh {
        settings.dh = v;
    }
    if let Some(v) = h_samples {
        settings.h_samples = v;
    }
    if let Some(v) = target_x {
        settings.target_x = v;
    }
    if let Some(v) = cost_sample_step {
        settings.cost_sample_step = v;
    }
    if let Some(v) = beam_width {
        settings.beam_width = v;
    }
    settings.validate().map_err(to_py)?;
    lib_plan(
        &start.inner,
        &terrain.inner,
        &inflated.inner,
        &robot.inner,
        &settings,
    )
    .map(|inner| PyPlanPath { inner })
    .map_err(to_py)
}

/// Replays a path tick by tick. `disturbance` is `None`, `"yaw_drift"`
/// (constant `drift` radians per tick), or `"noise"` (Gaussian position
/// noise with standard deviation `sigma`; requires `seed`).
#[pyfunction]
#[pyo3(signature = (path, robot, *, disturbance=None, drift=0.01, sigma=0.001, seed=None,
                    compensate_pitch=false, tick_hz=None, speed=None, reach_radius=None,
                    yaw_gain=None, ticks_max=None))]
#[allow(clippy::too_many_arguments)]
fn follow(
    path: &PyPlanPath,
    robot: &PyRobotParams,
    disturbance: Option<&str>,
    drift: f64,
    sigma: f64,
    seed: Option<u64>,
    compensate_pitch: bool,
    tick_hz: Option<f64>,
    speed: Option<f64>,
    reach_radius: Option<f64>,
    yaw_gain: Option<f64>,
    ticks_max: Option<usize>,
) -> PyResult<PyTrackingReport> {
    let spec = match disturbance {
        None => DisturbanceSpec::None,
        Some("yaw_drift") => DisturbanceSpec::YawDrift {
            rad_per_tick: drift,
        },
        Some("noise") => {
            let seed = seed.ok_or_else(|| {
                PyValueError::new_err("seed is required with disturbance=\"noise\"")
            })?;
            DisturbanceSpec::PositionNoise { sigma, seed }
        }
        Some(other) => {
            return Err(PyValueError::new_err(format!(
                "unknown disturbance {other:?}; use \"yaw_drift\" or \"noise\""
            )))
        }
    };
    let mut settings = FollowSettings {
        compensate_pitch,
        ..FollowSettings::default()
    };
    if let Some(v) = tick_hz {
        settings.tick_hz = v;
    }
    if let Some(v) = speed {
        settings.speed = v;
    }
    if let Some(v) = reach_radius {
        settings.reach_radius = v;
    }
    if let Some(v) = yaw_gain {
        settings.yaw_gain = v;
    }
    if let Some(v) = ticks_max {
        settings.ticks_max = v;
    }
    follow_path(&path.inner, &robot.inner, &settings, &spec)
        .map(|inner| PyTrackingReport { inner })
        .map_err(to_py)
}

/// Re-samples a configuration's full skeleton against the inflated
/// surface; returns `(min_clearance, left_contacts, right_contacts)`.
#[pyfunction]
fn validate(
    morphology: &PyMorphology,
    inflated: &PyInflatedMap,
    robot: &PyRobotParams,
) -> PyResult<(f64, usize, usize)> {
    let report = validate_morphology(
        &morphology.inner,
        &inflated.inner,
        &robot.inner,
        &ContactParams::default(),
    )
    .map_err(to_py)?;
    Ok((
        report.min_clearance,
        report.left_contacts,
        report.right_contacts,
    ))
}

/// Forward shift of the tracking point that cancels pitch-change slip.
#[pyfunction]
fn pitch_compensation(pitch_delta: f64, wheel_radius: f64) -> f64 {
    pitch_comp(pitch_delta, wheel_radius)
}

#[pymodule]
fn flipperplan_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyElevationMap>()?;
    m.add_class::<PyInflatedMap>()?;
    m.add_class::<PyRobotParams>()?;
    m.add_class::<PyMorphology>()?;
    m.add_class::<PyPlanStep>()?;
    m.add_class::<PyPlanPath>()?;
    m.add_class::<PyTrackingReport>()?;
    m.add_function(wrap_pyfunction!(inflate, m)?)?;
    m.add_function(wrap_pyfunction!(level_start, m)?)?;
    m.add_function(wrap_pyfunction!(plan, m)?)?;
    m.add_function(wrap_pyfunction!(follow, m)?)?;
    m.add_function(wrap_pyfunction!(validate, m)?)?;
    m.add_function(wrap_pyfunction!(pitch_compensation, m)?)?;
    Ok(())
}
