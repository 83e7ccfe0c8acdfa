//! Kinematic replay of a planned path.
//!
//! The follower drives the body center point from one planned
//! configuration to the next at constant speed, slews the orientation
//! proportionally to the position progress (snapping exactly when a
//! target is reached), and logs actual-versus-target traces per tick.
//! Optional disturbances exercise the two feedback terms: a constant
//! per-tick yaw drift held down by a proportional correction, and
//! seeded Gaussian position noise.

use nalgebra::Rotation3;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::path_search::PlanPath;
use crate::robot_model::RobotParams;
use crate::terrain::{atomic_write, fmt_f64};
use crate::Point;

/// Tick-level replay knobs.
#[derive(Debug, Clone, PartialEq)]
pub struct FollowSettings {
    /// Control rate, ticks per second.
    pub tick_hz: f64,
    /// Commanded speed of the body center, meters per second.
    pub speed: f64,
    /// A target counts as reached when the center is strictly closer
    /// than this, meters.
    pub reach_radius: f64,
    /// Fraction of the yaw error removed per tick.
    pub yaw_gain: f64,
    /// Cancel the tracking-point slip caused by pitch changes.
    pub compensate_pitch: bool,
    /// Hard cap on simulated ticks; exhausting it ends the replay with
    /// `completed = false` rather than an error.
    pub ticks_max: usize,
}

impl Default for FollowSettings {
    fn default() -> Self {
        Self {
            tick_hz: 100.0,
            speed: 0.05,
            reach_radius: 0.005,
            yaw_gain: 0.25,
            compensate_pitch: false,
            ticks_max: 100_000,
        }
    }
}

impl FollowSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.tick_hz > 0.0 && self.speed > 0.0 && self.reach_radius > 0.0) {
            return Err(Error::InvalidParams(
                "tick rate, speed, and reach radius must be positive".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.yaw_gain) {
            return Err(Error::InvalidParams(format!(
                "yaw gain must be within [0, 1], got {}",
                self.yaw_gain
            )));
        }
        if self.ticks_max == 0 {
            return Err(Error::InvalidParams("tick budget must be positive".into()));
        }
        Ok(())
    }
}

/// Disturbance model applied each tick before the control step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DisturbanceSpec {
    None,
    /// Constant heading drift, radians per tick.
    YawDrift { rad_per_tick: f64 },
    /// Zero-mean Gaussian position noise, standard deviation `sigma`
    /// meters per axis per tick, from a seeded generator.
    PositionNoise { sigma: f64, seed: u64 },
}

/// Actual and target state at the end of one tick. Orientation triples
/// are `[yaw, pitch, roll]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TickRecord {
    pub tick: usize,
    pub actual_pos: Point,
    pub target_pos: Point,
    pub actual_rpy: [f64; 3],
    pub target_rpy: [f64; 3],
}

/// Per-axis error statistics over a replay.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TrackingSummary {
    pub max_abs_position: [f64; 3],
    pub mean_abs_position: [f64; 3],
    pub max_abs_orientation: [f64; 3],
    pub mean_abs_orientation: [f64; 3],
    /// Distance from the final target at the last record.
    pub final_position_error: f64,
    pub final_orientation_error: [f64; 3],
}

impl TrackingSummary {
    /// Statistics of a record trace; all zeros for an empty trace.
    pub fn from_records(records: &[TickRecord]) -> Self {
        let mut s = Self::default();
        if records.is_empty() {
            return s;
        }
        let mut sums = [0.0f64; 6];
        for r in records {
            let dp = r.actual_pos - r.target_pos;
            for a in 0..3 {
                let e = dp[a].abs();
                s.max_abs_position[a] = s.max_abs_position[a].max(e);
                sums[a] += e;
                let o = (r.actual_rpy[a] - r.target_rpy[a]).abs();
                s.max_abs_orientation[a] = s.max_abs_orientation[a].max(o);
                sums[3 + a] += o;
            }
        }
        let n = records.len() as f64;
        for a in 0..3 {
            s.mean_abs_position[a] = sums[a] / n;
            s.mean_abs_orientation[a] = sums[3 + a] / n;
        }
        let last = records.last().expect("records are non-empty");
        s.final_position_error = (last.actual_pos - last.target_pos).norm();
        for a in 0..3 {
            s.final_orientation_error[a] = last.actual_rpy[a] - last.target_rpy[a];
        }
        s
    }
}

/// Outcome of a replay.
#[derive(Debug, Clone, PartialEq)]
pub struct TrackingReport {
    pub records: Vec<TickRecord>,
    /// Whether every target was reached within the tick budget.
    pub completed: bool,
    pub ticks_used: usize,
    pub summary: TrackingSummary,
}

/// Forward shift of the tracking point that cancels the slip induced by
/// a pitch change: the body rocks over its wheel, displacing the center
/// by the wheel radius per radian.
pub fn pitch_compensation(pitch_delta: f64, wheel_radius: f64) -> f64 {
    pitch_delta * wheel_radius
}

struct Target {
    pos: Point,
    rpy: [f64; 3],
}

/// Replays a plan tick by tick. The body center starts at the first
/// planned configuration and is driven toward each subsequent one in
/// turn; the replay completes when the last target is reached, or stops
/// early (still `Ok`, with `completed = false`) when the tick budget
/// runs out.
pub fn follow(
    path: &PlanPath,
    robot: &RobotParams,
    settings: &FollowSettings,
    disturbance: &DisturbanceSpec,
) -> Result<TrackingReport> {
    settings.validate()?;
    robot.validate()?;
    if path.is_empty() {
        return Err(Error::EmptyPath);
    }
    match disturbance {
        DisturbanceSpec::PositionNoise { sigma, .. } if !(*sigma >= 0.0) => {
            return Err(Error::InvalidParams(format!(
                "noise sigma must be non-negative, got {sigma}"
            )));
        }
        DisturbanceSpec::YawDrift { rad_per_tick } if !rad_per_tick.is_finite() => {
            return Err(Error::InvalidParams("yaw drift must be finite".into()));
        }
        _ => {}
    }

    let targets: Vec<Target> = path
        .steps
        .iter()
        .map(|s| Target {
            pos: s.morphology.s_middle2(),
            rpy: [s.morphology.yaw, s.morphology.pitch, s.morphology.roll],
        })
        .collect();
    let n = targets.len();

    let mut pos = targets[0].pos;
    let mut yaw = targets[0].rpy[0];
    let mut pitch = targets[0].rpy[1];
    let mut roll = targets[0].rpy[2];
    let mut idx = 0usize;

    let step_max = settings.speed / settings.tick_hz;
    let mut rng_noise = match disturbance {
        DisturbanceSpec::PositionNoise { sigma, seed } => Some((
            ChaCha8Rng::seed_from_u64(*seed),
            Normal::new(0.0, *sigma).map_err(|_| {
                Error::InvalidParams(format!("invalid noise sigma {sigma}"))
            })?,
        )),
        _ => None,
    };

    let mut records = Vec::new();
    let mut completed = false;
    let mut tick = 0usize;
    loop {
        // Retire every target already within reach, snapping the slewed
        // angles exactly so orientation error is zero at hand-off.
        while idx < n && (targets[idx].pos - pos).norm() < settings.reach_radius {
            pitch = targets[idx].rpy[1];
            roll = targets[idx].rpy[2];
            idx += 1;
        }
        if idx == n {
            completed = true;
            let last = &targets[n - 1];
            records.push(TickRecord {
                tick,
                actual_pos: pos,
                target_pos: last.pos,
                actual_rpy: [yaw, pitch, roll],
                target_rpy: last.rpy,
            });
            break;
        }
        if tick >= settings.ticks_max {
            break;
        }

        match disturbance {
            DisturbanceSpec::None => {}
            DisturbanceSpec::YawDrift { rad_per_tick } => yaw += rad_per_tick,
            DisturbanceSpec::PositionNoise { .. } => {
                let (rng, normal) = rng_noise.as_mut().expect("noise rng was initialized");
                pos.x += normal.sample(rng);
                pos.y += normal.sample(rng);
                pos.z += normal.sample(rng);
            }
        }

        // Proportional heading correction toward the planned yaw of zero.
        yaw -= settings.yaw_gain * yaw;

        let target = &targets[idx];
        let to = target.pos - pos;
        let dist = to.norm();
        let step_len = dist.min(step_max);
        let frac = if dist > 0.0 { step_len / dist } else { 1.0 };
        if dist > 0.0 {
            // Residual heading error deflects the commanded motion.
            let moved = Rotation3::from_euler_angles(0.0, 0.0, yaw) * (to * frac);
            pos += moved;
        }

        let dpitch = (target.rpy[1] - pitch) * frac;
        pitch += dpitch;
        roll += (target.rpy[2] - roll) * frac;
        // Pitching rocks the body over its wheels, slipping the tracking
        // point backward along x; compensation feeds the same amount
        // forward.
        if !settings.compensate_pitch {
            pos.x -= pitch_compensation(dpitch, robot.wheel_radius);
        }

        records.push(TickRecord {
            tick,
            actual_pos: pos,
            target_pos: target.pos,
            actual_rpy: [yaw, pitch, roll],
            target_rpy: target.rpy,
        });
        tick += 1;
    }

    let summary = TrackingSummary::from_records(&records);
    Ok(TrackingReport {
        records,
        completed,
        ticks_used: tick,
        summary,
    })
}

const POSITION_HEADER: &str = "tick,actual_x,actual_y,actual_z,target_x,target_y,target_z";
const ORIENTATION_HEADER: &str =
    "tick,actual_yaw,actual_pitch,actual_roll,target_yaw,target_pitch,target_roll";

/// Writes the per-tick traces as `position_bias.csv` and
/// `orientation_error.csv` inside `dir` (created if needed). Floats are
/// printed in shortest round-trip form.
pub fn write_report(report: &TrackingReport, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;

    let mut pos_text = String::from(POSITION_HEADER);
    pos_text.push('\n');
    let mut ori_text = String::from(ORIENTATION_HEADER);
    ori_text.push('\n');
    for r in &report.records {
        writeln!(
            pos_text,
            "{},{},{},{},{},{},{}",
            r.tick,
            fmt_f64(r.actual_pos.x),
            fmt_f64(r.actual_pos.y),
            fmt_f64(r.actual_pos.z),
            fmt_f64(r.target_pos.x),
            fmt_f64(r.target_pos.y),
            fmt_f64(r.target_pos.z),
        )
        .expect("writing to a String cannot fail");
        writeln!(
            ori_text,
            "{},{},{},{},{},{},{}",
            r.tick,
            fmt_f64(r.actual_rpy[0]),
            fmt_f64(r.actual_rpy[1]),
            fmt_f64(r.actual_rpy[2]),
            fmt_f64(r.target_rpy[0]),
            fmt_f64(r.target_rpy[1]),
            fmt_f64(r.target_rpy[2]),
        )
        .expect("writing to a String cannot fail");
    }
    atomic_write(&dir.join("position_bias.csv"), pos_text.as_bytes())?;
    atomic_write(&dir.join("orientation_error.csv"), ori_text.as_bytes())
}

fn parse_csv(
    file: &Path,
    expected_header: &str,
) -> Result<Vec<(usize, [f64; 6])>> {
    let text = std::fs::read_to_string(file).map_err(|e| Error::io(file, e))?;
    let mut rows = Vec::new();
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim() == expected_header => {}
        Some((_, header)) => {
            return Err(Error::parse(
                file,
                1,
                format!("unexpected header `{}`", header.trim()),
            ))
        }
        None => return Err(Error::parse(file, 1, "empty report file")),
    }
    for (no, line) in lines {
        let line_no = no + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let fields: Vec<&str> = trimmed.split(',').collect();
        if fields.len() != 7 {
            return Err(Error::parse(
                file,
                line_no,
                format!("expected 7 columns, found {}", fields.len()),
            ));
        }
        let tick: usize = fields[0]
            .parse()
            .map_err(|_| Error::parse(file, line_no, format!("invalid tick `{}`", fields[0])))?;
        let mut values = [0.0f64; 6];
        for (i, v) in values.iter_mut().enumerate() {
            *v = fields[i + 1].parse().map_err(|_| {
                Error::parse(file, line_no, format!("invalid value `{}`", fields[i + 1]))
            })?;
        }
        rows.push((tick, values));
    }
    Ok(rows)
}

/// Reads back the two trace files written by [`write_report`].
pub fn read_report(dir: &Path) -> Result<Vec<TickRecord>> {
    let pos_file = dir.join("position_bias.csv");
    let ori_file = dir.join("orientation_error.csv");
    let pos = parse_csv(&pos_file, POSITION_HEADER)?;
    let ori = parse_csv(&ori_file, ORIENTATION_HEADER)?;
    if pos.len() != ori.len() {
        return Err(Error::parse(
            &ori_file,
            ori.len() + 1,
            format!(
                "orientation trace has {} rows but position trace has {}",
                ori.len(),
                pos.len()
            ),
        ));
    }
    let mut records = Vec::with_capacity(pos.len());
    for (i, ((pt, pv), (ot, ov))) in pos.into_iter().zip(ori).enumerate() {
        if pt != ot {
            return Err(Error::parse(
                &ori_file,
                i + 2,
                format!("tick mismatch between traces: {pt} vs {ot}"),
            ));
        }
        records.push(TickRecord {
            tick: pt,
            actual_pos: Point::new(pv[0], pv[1], pv[2]),
            target_pos: Point::new(pv[3], pv[4], pv[5]),
            actual_rpy: [ov[0], ov[1], ov[2]],
            target_rpy: [ov[3], ov[4], ov[5]],
        });
    }
    Ok(records)
}
