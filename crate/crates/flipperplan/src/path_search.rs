//! Greedy whole-body path search along the x axis.
//!
//! Each step advances the active reference joint a fixed horizontal
//! increment, enumerates candidate poses over both reference sides and a
//! ladder of reference lifts, ranks them by a smoothed ground-hugging
//! cost, and keeps the best candidate whose fully resolved skeleton
//! validates (no puncture, contact on both sides). The defaults explore
//! `2 sides x 12 lifts` per step.

use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use std::path::Path;

use crate::config_gen::{
    get_flipper_angles, get_pose_candidates, validate_morphology, ContactParams, PoseCandidate,
};
use crate::error::{Error, Result};
use crate::inflation::InflatedMap;
use crate::robot_model::{FlipperAngles, Morphology, RobotParams, Side};
use crate::terrain::{atomic_write, fmt_f64, ElevationMap};
use crate::{Point, Vec3};

/// Knobs of the step search.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchSettings {
    /// Horizontal advance of the reference joint per step, meters.
    pub dx: f64,
    /// Spacing of the reference lift ladder, meters.
    pub dh: f64,
    /// Number of lifts tried per side (`z = ground + k * dh`,
    /// `k = 0..h_samples`).
    pub h_samples: usize,
    /// The plan is complete once the body center reaches this x.
    pub target_x: f64,
    /// Spacing of cost samples along the body middle line, meters.
    pub cost_sample_step: f64,
    /// Number of alternative branch heads kept between steps; 1 is plain
    /// greedy search.
    pub beam_width: usize,
    /// Contact-search tunables shared by every rotation search.
    pub contact: ContactParams,
}

impl Default for SearchSettings {
    fn default() -> Self {
        Self {
            dx: 0.02,
            dh: 0.005,
            h_samples: 12,
            // On the default 1.0 m scene the map domain ends at x = 0.795
            // and every contact probe must stay inside it. The furthest
            // probe of a step at reference x is x + base + flipper
            // (0.35 m), so the last reference (the first dx multiple whose
            // body center passes the target) must sit at or below 0.445;
            // 0.43 leaves room for the body center to trail the reference
            // x slightly when a pose both pitches and rolls.
            target_x: 0.43,
            cost_sample_step: 0.005,
            beam_width: 1,
            contact: ContactParams::default(),
        }
    }
}

impl SearchSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.dx > 0.0 && self.dx.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "step advance must be positive, got {}",
                self.dx
            )));
        }
        if !(self.dh > 0.0 && self.dh.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "lift spacing must be positive, got {}",
                self.dh
            )));
        }
        if self.h_samples == 0 {
            return Err(Error::InvalidParams("need at least one lift sample".into()));
        }
        if !self.target_x.is_finite() {
            return Err(Error::InvalidParams("target x must be finite".into()));
        }
        if !(self.cost_sample_step > 0.0 && self.cost_sample_step.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "cost sample step must be positive, got {}",
                self.cost_sample_step
            )));
        }
        if self.beam_width == 0 {
            return Err(Error::InvalidParams("beam width must be at least 1".into()));
        }
        self.contact.validate()
    }
}

/// Everything needed to reproduce a plan: which inflated map it was
/// computed against (by content hash) and with which settings.
#[derive(Debug, Clone, PartialEq)]
pub struct Provenance {
    pub map_hash: String,
    pub settings: SearchSettings,
    pub robot: RobotParams,
}

/// One committed step of a plan.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanStep {
    pub morphology: Morphology,
    pub cost: f64,
    /// Which rear joint served as the pinned reference for this step.
    pub side: Side,
}

/// A planned sequence of whole-body configurations.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanPath {
    pub steps: Vec<PlanStep>,
    pub provenance: Provenance,
}

impl PlanPath {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn total_cost(&self) -> f64 {
        self.steps.iter().map(|s| s.cost).sum()
    }
}

/// Content hash of an inflated map (16 hex digits of SHA-256 over the
/// grid dimensions, placement, radius, and height bits).
pub fn map_hash(d: &InflatedMap) -> String {
    let g = d.grid();
    let mut hasher = Sha256::new();
    hasher.update(b"inflated-grid-v1");
    hasher.update((g.width() as u64).to_le_bytes());
    hasher.update((g.height() as u64).to_le_bytes());
    hasher.update(g.resolution().to_bits().to_le_bytes());
    hasher.update(g.origin().0.to_bits().to_le_bytes());
    hasher.update(g.origin().1.to_bits().to_le_bytes());
    hasher.update(d.source_radius().to_bits().to_le_bytes());
    for iy in 0..g.height() {
        for ix in 0..g.width() {
            hasher.update(g.at(ix, iy).to_bits().to_le_bytes());
        }
    }
    let digest = hasher.finalize();
    let mut out = String::with_capacity(16);
    for byte in digest.iter().take(8) {
        write!(out, "{byte:02x}").expect("writing to a String cannot fail");
    }
    out
}

/// Smoothness/ground-hugging cost of one configuration: the sum of
/// squared clearances of points sampled along the body middle line. Zero
/// when the body center line lies exactly on the inflated surface.
pub fn step_cost(
    m: &Morphology,
    d: &InflatedMap,
    robot: &RobotParams,
    sample_step: f64,
) -> Result<f64> {
    let mid2 = m.s_middle2();
    let along = m.rotation() * Vec3::new(robot.base_length, 0.0, 0.0);
    // The line's true length is the body constant `base_length`; deriving
    // the sample count from it (instead of from the rotated vector's
    // reconstructed norm, which lands within an ulp of a count boundary)
    // keeps the number of terms identical across poses, so costs stay
    // comparable and symmetric scenes score symmetrically.
    let n = ((robot.base_length / sample_step).ceil() as usize).max(1);
    let mut total = 0.0;
    for i in 0..=n {
        let p = mid2 + along * (i as f64 / n as f64);
        let c = p.z - d.interpolate(p.x, p.y)?;
        total += c * c;
    }
    Ok(total)
}

/// Level configuration resting on the inflated surface at `(x, y)`:
/// zero orientation, body center z on the surface, flippers rotated down
/// to their own contacts. The usual way to make a start pose for
/// [`plan`].
pub fn level_start(
    x: f64,
    y: f64,
    d: &InflatedMap,
    robot: &RobotParams,
    contact: &ContactParams,
) -> Result<Morphology> {
    let z = d.interpolate(x, y)?;
    let p_ref = Point::new(x, y + robot.robot_width / 2.0, z);
    let candidate = PoseCandidate {
        side: Side::Left,
        p_ref,
        yaw: 0.0,
        pitch: 0.0,
        roll: 0.0,
        support: Default::default(),
    };
    let flippers = get_flipper_angles(&candidate, d, robot, contact)?;
    Ok(Morphology::from_reference(
        Side::Left,
        p_ref,
        0.0,
        0.0,
        0.0,
        flippers.angles,
        robot,
    ))
}

/// One enumerated candidate, as recorded by the `--debug-candidates`
/// trace: everything the planner knew when ranking it.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateRecord {
    pub step_index: usize,
    pub side: Side,
    pub dh_index: usize,
    pub pitch: f64,
    pub roll: f64,
    pub cost: f64,
    pub chosen: bool,
    /// Why the candidate was discarded, when it was tried and failed.
    /// `None` for candidates that were never reached or that won.
    pub rejection: Option<String>,
}

struct Branch {
    m: Morphology,
    steps: Vec<PlanStep>,
    cum: f64,
    last_key: CandidateKey,
}

/// Total order on candidates within a step: cheapest first, then lower
/// lift, left before right, flatter pitch, flatter roll.
#[derive(Debug, Clone, Copy, PartialEq)]
struct CandidateKey {
    cost: f64,
    dh_index: usize,
    side: Side,
    pitch_mag: f64,
    roll_mag: f64,
}

impl CandidateKey {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.cost
            .total_cmp(&other.cost)
            .then_with(|| self.dh_index.cmp(&other.dh_index))
            .then_with(|| self.side.cmp(&other.side))
            .then_with(|| self.pitch_mag.total_cmp(&other.pitch_mag))
            .then_with(|| self.roll_mag.total_cmp(&other.roll_mag))
    }
}

struct Entry {
    key: CandidateKey,
    candidate: PoseCandidate,
    trace_index: Option<usize>,
}

#[derive(Default)]
struct StepDiagnostics {
    attempted_x: f64,
    candidates: usize,
    oob_probes: usize,
    flipper_failures: usize,
    validation_failures: usize,
}

/// Plans a path from `start` until the body center crosses
/// `settings.target_x`. See [`plan_traced`] for the variant that records
/// every enumerated candidate.
pub fn plan(
    start: &Morphology,
    terrain: &ElevationMap,
    d: &InflatedMap,
    robot: &RobotParams,
    settings: &SearchSettings,
) -> Result<PlanPath> {
    plan_traced(start, terrain, d, robot, settings, None)
}

/// [`plan`] with an optional candidate trace appended to `trace`.
pub fn plan_traced(
    start: &Morphology,
    terrain: &ElevationMap,
    d: &InflatedMap,
    robot: &RobotParams,
    settings: &SearchSettings,
    mut trace: Option<&mut Vec<CandidateRecord>>,
) -> Result<PlanPath> {
    robot.validate()?;
    settings.validate()?;
    start.validate(robot)?;
    if (d.source_radius() - robot.wheel_radius).abs() > 1e-12 {
        return Err(Error::InvalidParams(format!(
            "map was inflated with radius {} but the robot's wheel radius is {}",
            d.source_radius(),
            robot.wheel_radius
        )));
    }
    let report = validate_morphology(start, d, robot, &settings.contact)?;
    if report.punctures(settings.contact.epsilon_contact) {
        return Err(Error::InfeasibleStart(format!(
            "start configuration punctures the surface (minimum clearance {})",
            report.min_clearance
        )));
    }
    if !report.supported() {
        return Err(Error::InfeasibleStart(format!(
            "start configuration lacks ground contact ({} left / {} right touching samples)",
            report.left_contacts, report.right_contacts
        )));
    }

    let provenance = Provenance {
        map_hash: map_hash(d),
        settings: settings.clone(),
        robot: robot.clone(),
    };
    let start_x = start.s_middle2().x;
    if start_x >= settings.target_x {
        return Ok(PlanPath {
            steps: Vec::new(),
            provenance,
        });
    }

    // Each step advances ~dx; triple that plus slack bounds the loop even
    // with the small lateral wander rolling poses introduce.
    let max_steps = (((settings.target_x - start_x) / settings.dx).ceil() as usize) * 3 + 20;

    let mut branches = vec![Branch {
        m: start.clone(),
        steps: Vec::new(),
        cum: 0.0,
        last_key: CandidateKey {
            cost: 0.0,
            dh_index: 0,
            side: Side::Left,
            pitch_mag: 0.0,
            roll_mag: 0.0,
        },
    }];

    loop {
        if let Some(done) = branches
            .iter()
            .filter(|b| b.m.s_middle2().x >= settings.target_x)
            .min_by(|a, b| a.cum.total_cmp(&b.cum))
        {
            return Ok(PlanPath {
                steps: done.steps.clone(),
                provenance,
            });
        }
        if branches.iter().any(|b| b.steps.len() >= max_steps) {
            return Err(Error::DeadEnd {
                x: branches[0].m.s_middle2().x,
                detail: "no forward progress within the step budget".into(),
            });
        }

        let mut children: Vec<Branch> = Vec::new();
        let mut diag = StepDiagnostics::default();
        for branch in &branches {
            expand(
                branch,
                terrain,
                d,
                robot,
                settings,
                &mut children,
                &mut diag,
                &mut trace,
            )?;
        }
        if children.is_empty() {
            return Err(Error::DeadEnd {
                x: diag.attempted_x,
                detail: format!(
                    "no valid configuration among {} candidates \
                     ({} probes out of bounds, {} flipper punctures, {} failed validation)",
                    diag.candidates,
                    diag.oob_probes,
                    diag.flipper_failures,
                    diag.validation_failures
                ),
            });
        }
        children.sort_by(|a, b| a.cum.total_cmp(&b.cum).then(a.last_key.cmp(&b.last_key)));
        children.truncate(settings.beam_width);
        branches = children;
    }
}

#[allow(clippy::too_many_arguments)]
fn expand(
    branch: &Branch,
    terrain: &ElevationMap,
    d: &InflatedMap,
    robot: &RobotParams,
    settings: &SearchSettings,
    children: &mut Vec<Branch>,
    diag: &mut StepDiagnostics,
    trace: &mut Option<&mut Vec<CandidateRecord>>,
) -> Result<()> {
    let step_index = branch.steps.len();
    let mut entries: Vec<Entry> = Vec::new();

    for side in [Side::Left, Side::Right] {
        let p_prev = branch.m.p_s2(side);
        let x = p_prev.x + settings.dx;
        let y = p_prev.y;
        diag.attempted_x = diag.attempted_x.max(x);
        let ground = match terrain.interpolate(x, y) {
            Ok(h) => h,
            Err(Error::OutOfBounds { .. }) => {
                diag.oob_probes += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        for k in 0..settings.h_samples {
            let z = ground + k as f64 * settings.dh;
            let p_ref = Point::new(x, y, z);
            let candidates = match get_pose_candidates(p_ref, side, d, robot, &settings.contact) {
                Ok(c) => c,
                Err(Error::OutOfBounds { .. }) => {
                    diag.oob_probes += 1;
                    continue;
                }
                Err(e) => return Err(e),
            };
            diag.candidates += candidates.len();
            for candidate in candidates {
                let base = Morphology::from_reference(
                    side,
                    p_ref,
                    candidate.yaw,
                    candidate.pitch,
                    candidate.roll,
                    FlipperAngles::uniform(0.0),
                    robot,
                );
                let cost = step_cost(&base, d, robot, settings.cost_sample_step)?;
                let trace_index = trace.as_deref_mut().map(|t| {
                    t.push(CandidateRecord {
                        step_index,
                        side,
                        dh_index: k,
                        pitch: candidate.pitch,
                        roll: candidate.roll,
                        cost,
                        chosen: false,
                        rejection: None,
                    });
                    t.len() - 1
                });
                entries.push(Entry {
                    key: CandidateKey {
                        cost,
                        dh_index: k,
                        side,
                        pitch_mag: candidate.pitch.abs(),
                        roll_mag: candidate.roll.abs(),
                    },
                    candidate,
                    trace_index,
                });
            }
        }
    }

    entries.sort_by(|a, b| a.key.cmp(&b.key));

    let mut produced = 0usize;
    for entry in entries {
        if produced == settings.beam_width {
            break;
        }
        let reject = |trace: &mut Option<&mut Vec<CandidateRecord>>, why: String| {
            if let (Some(t), Some(i)) = (trace.as_deref_mut(), entry.trace_index) {
                t[i].rejection = Some(why);
            }
        };
        let c = &entry.candidate;
        let flippers = match get_flipper_angles(c, d, robot, &settings.contact) {
            Ok(f) => f,
            Err(Error::PunctureAtStart { context, .. }) => {
                diag.flipper_failures += 1;
                reject(trace, format!("{context} punctures at its upper limit"));
                continue;
            }
            Err(Error::OutOfBounds { .. }) => {
                diag.oob_probes += 1;
                reject(trace, "flipper sweep leaves the map".into());
                continue;
            }
            Err(e) => return Err(e),
        };
        let m = Morphology::from_reference(
            c.side, c.p_ref, c.yaw, c.pitch, c.roll, flippers.angles, robot,
        );
        let report = match validate_morphology(&m, d, robot, &settings.contact) {
            Ok(r) => r,
            Err(Error::OutOfBounds { .. }) => {
                diag.oob_probes += 1;
                reject(trace, "skeleton leaves the map".into());
                continue;
            }
            Err(e) => return Err(e),
        };
        if report.punctures(settings.contact.epsilon_contact) || !report.supported() {
            diag.validation_failures += 1;
            reject(
                trace,
                format!(
                    "full-skeleton validation failed (min clearance {}, {} left / {} right contacts)",
                    report.min_clearance, report.left_contacts, report.right_contacts
                ),
            );
            continue;
        }
        if let (Some(t), Some(i)) = (trace.as_deref_mut(), entry.trace_index) {
            t[i].chosen = true;
        }
        let mut steps = branch.steps.clone();
        steps.push(PlanStep {
            morphology: m.clone(),
            cost: entry.key.cost,
            side: entry.key.side,
        });
        children.push(Branch {
            m,
            steps,
            cum: branch.cum + entry.key.cost,
            last_key: entry.key,
        });
        produced += 1;
    }
    Ok(())
}

/// Writes a plan to a text file: one `#` header line carrying the map
/// hash and every parameter, then one record per step with 15
/// whitespace-separated columns (left joint xyz, right joint xyz, yaw,
/// pitch, roll, four flipper angles, cost, reference side). Floats are
/// printed in shortest round-trip form, so import reproduces the plan
/// bit for bit.
pub fn export_path(path: &PlanPath, file: &Path) -> Result<()> {
    let p = &path.provenance;
    let s = &p.settings;
    let r = &p.robot;
    let mut text = String::new();
    writeln!(
        text,
        "# map={} dx={} dh={} h_samples={} target_x={} cost_sample_step={} beam_width={} \
         eps={} tol={} sample_step={} roll_limit={} pitch_interior={} \
         wheel_radius={} track_width={} robot_width={} base_length={} flipper_length={} \
         flipper_min={} flipper_max={} pitch_min={} pitch_max={}",
        p.map_hash,
        fmt_f64(s.dx),
        fmt_f64(s.dh),
        s.h_samples,
        fmt_f64(s.target_x),
        fmt_f64(s.cost_sample_step),
        s.beam_width,
        fmt_f64(s.contact.epsilon_contact),
        fmt_f64(s.contact.bisect_tol),
        fmt_f64(s.contact.sample_step),
        fmt_f64(s.contact.roll_limit),
        s.contact.pitch_interior_samples,
        fmt_f64(r.wheel_radius),
        fmt_f64(r.track_width),
        fmt_f64(r.robot_width),
        fmt_f64(r.base_length),
        fmt_f64(r.flipper_length),
        fmt_f64(r.flipper_limits.0),
        fmt_f64(r.flipper_limits.1),
        fmt_f64(r.pitch_bounds.0),
        fmt_f64(r.pitch_bounds.1),
    )
    .expect("writing to a String cannot fail");
    for step in &path.steps {
        let m = &step.morphology;
        writeln!(
            text,
            "{} {} {} {} {} {} {} {} {} {} {} {} {} {} {}",
            fmt_f64(m.p_sl2.x),
            fmt_f64(m.p_sl2.y),
            fmt_f64(m.p_sl2.z),
            fmt_f64(m.p_sr2.x),
            fmt_f64(m.p_sr2.y),
            fmt_f64(m.p_sr2.z),
            fmt_f64(m.yaw),
            fmt_f64(m.pitch),
            fmt_f64(m.roll),
            fmt_f64(m.flippers.alpha_l),
            fmt_f64(m.flippers.alpha_r),
            fmt_f64(m.flippers.beta_l),
            fmt_f64(m.flippers.beta_r),
            fmt_f64(step.cost),
            step.side,
        )
        .expect("writing to a String cannot fail");
    }
    atomic_write(file, text.as_bytes())
}

fn header_value<'a>(
    pairs: &'a std::collections::HashMap<&str, &str>,
    key: &str,
    file: &Path,
) -> Result<&'a str> {
    pairs
        .get(key)
        .copied()
        .ok_or_else(|| Error::parse(file, 1, format!("header is missing `{key}=`")))
}

fn parse_float(text: &str, file: &Path, line: usize, what: &str) -> Result<f64> {
    let v: f64 = text
        .parse()
        .map_err(|_| Error::parse(file, line, format!("invalid {what}: `{text}`")))?;
    if !v.is_finite() {
        return Err(Error::parse(file, line, format!("{what} must be finite")));
    }
    Ok(v)
}

/// Reads a plan file written by [`export_path`].
pub fn import_path(file: &Path) -> Result<PlanPath> {
    let text = std::fs::read_to_string(file).map_err(|e| Error::io(file, e))?;
    let mut lines = text.lines().enumerate();

    let (header_no, header) = lines
        .by_ref()
        .find(|(_, l)| !l.trim().is_empty())
        .ok_or_else(|| Error::parse(file, 1, "empty path file"))?;
    let header_line = header_no + 1;
    let Some(header) = header.trim().strip_prefix('#') else {
        return Err(Error::parse(
            file,
            header_line,
            "path file must start with a `#` header line",
        ));
    };
    let mut pairs = std::collections::HashMap::new();
    for token in header.split_whitespace() {
        let Some((k, v)) = token.split_once('=') else {
            return Err(Error::parse(
                file,
                header_line,
                format!("header token `{token}` is not key=value"),
            ));
        };
        pairs.insert(k, v);
    }

    let fval = |key: &str| -> Result<f64> {
        parse_float(header_value(&pairs, key, file)?, file, header_line, key)
    };
    let uval = |key: &str| -> Result<usize> {
        header_value(&pairs, key, file)?
            .parse()
            .map_err(|_| Error::parse(file, header_line, format!("invalid {key}")))
    };

    let settings = SearchSettings {
        dx: fval("dx")?,
        dh: fval("dh")?,
        h_samples: uval("h_samples")?,
        target_x: fval("target_x")?,
        cost_sample_step: fval("cost_sample_step")?,
        beam_width: uval("beam_width")?,
        contact: ContactParams {
            epsilon_contact: fval("eps")?,
            bisect_tol: fval("tol")?,
            sample_step: fval("sample_step")?,
            roll_limit: fval("roll_limit")?,
            pitch_interior_samples: uval("pitch_interior")?,
        },
    };
    let robot = RobotParams {
        wheel_radius: fval("wheel_radius")?,
        track_width: fval("track_width")?,
        robot_width: fval("robot_width")?,
        base_length: fval("base_length")?,
        flipper_length: fval("flipper_length")?,
        flipper_limits: (fval("flipper_min")?, fval("flipper_max")?),
        pitch_bounds: (fval("pitch_min")?, fval("pitch_max")?),
    };
    robot
        .validate()
        .map_err(|e| Error::parse(file, header_line, format!("invalid robot parameters: {e}")))?;
    let provenance = Provenance {
        map_hash: header_value(&pairs, "map", file)?.to_string(),
        settings,
        robot: robot.clone(),
    };

    let mut steps = Vec::new();
    for (no, line) in lines {
        let line_no = no + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        if fields.len() != 15 {
            return Err(Error::parse(
                file,
                line_no,
                format!("expected 15 columns, found {}", fields.len()),
            ));
        }
        let mut f = [0.0f64; 14];
        for (i, v) in f.iter_mut().enumerate() {
            *v = parse_float(fields[i], file, line_no, "record value")?;
        }
        let side = Side::parse(fields[14]).ok_or_else(|| {
            Error::parse(
                file,
                line_no,
                format!("reference side must be `left` or `right`, got `{}`", fields[14]),
            )
        })?;
        let morphology = Morphology {
            p_sl2: Point::new(f[0], f[1], f[2]),
            p_sr2: Point::new(f[3], f[4], f[5]),
            yaw: f[6],
            pitch: f[7],
            roll: f[8],
            flippers: FlipperAngles {
                alpha_l: f[9],
                alpha_r: f[10],
                beta_l: f[11],
                beta_r: f[12],
            },
        };
        morphology
            .validate(&robot)
            .map_err(|e| Error::parse(file, line_no, format!("invalid configuration: {e}")))?;
        steps.push(PlanStep {
            morphology,
            cost: f[13],
            side,
        });
    }

    Ok(PlanPath { steps, provenance })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inflation::inflate;
    use crate::terrain::{generate_obstacle, ObstacleKind, ObstacleSpec};

    fn flat_scene() -> (ElevationMap, InflatedMap) {
        let m = ElevationMap::flat(240, 80, 0.005, (-0.25, -0.2), 0.0).unwrap();
        let d = inflate(&m, 0.035).unwrap();
        (m, d)
    }

    fn obstacle_scene(kind: ObstacleKind, rotation: f64) -> (ElevationMap, InflatedMap) {
        let spec = ObstacleSpec::new(kind, rotation);
        let m = generate_obstacle(&spec).unwrap();
        let d = inflate(&m, 0.035).unwrap();
        (m, d)
    }

    #[test]
    fn flat_ground_crosses_level_in_25_steps() {
        let (terrain, d) = flat_scene();
        let robot = RobotParams::default();
        let settings = SearchSettings {
            target_x: 0.5,
            ..Default::default()
        };
        let start = level_start(0.0, 0.0, &d, &robot, &settings.contact).unwrap();
        let path = plan(&start, &terrain, &d, &robot, &settings).unwrap();
        assert_eq!(path.len(), 25);
        for (i, step) in path.steps.iter().enumerate() {
            let m = &step.morphology;
            assert_eq!(m.pitch, 0.0, "step {i}");
            assert_eq!(m.roll, 0.0, "step {i}");
            assert_eq!(m.yaw, 0.0, "step {i}");
            for a in [
                m.flippers.alpha_l,
                m.flippers.alpha_r,
                m.flippers.beta_l,
                m.flippers.beta_r,
            ] {
                assert!(a.abs() < 1e-6, "step {i}: flipper angle {a}");
            }
            let mid = m.s_middle2();
            assert!((mid.z - 0.035).abs() < 1e-9, "step {i}: z = {}", mid.z);
            assert!(
                (mid.x - 0.02 * (i + 1) as f64).abs() < 1e-9,
                "step {i}: x = {}",
                mid.x
            );
            assert!(step.cost < 1e-12, "step {i}: cost = {}", step.cost);
            assert_eq!(step.side, Side::Left, "ties resolve to the left side");
        }
    }

    #[test]
    fn already_past_the_target_plans_nothing() {
        let (terrain, d) = flat_scene();
        let robot = RobotParams::default();
        let settings = SearchSettings {
            target_x: -0.1,
            ..Default::default()
        };
        let start = level_start(0.0, 0.0, &d, &robot, &settings.contact).unwrap();
        let path = plan(&start, &terrain, &d, &robot, &settings).unwrap();
        assert!(path.is_empty());
        assert_eq!(path.provenance.map_hash.len(), 16);
    }

    #[test]
    fn cost_is_squared_clearance_summed_along_the_middle_line() {
        let (_, d) = flat_scene();
        let robot = RobotParams::default();
        let level = Morphology::level_at(Point::new(0.0, 0.0, 0.035), &robot);
        assert!(step_cost(&level, &d, &robot, 0.005).unwrap() < 1e-12);
        // One centimeter above contact: 51 samples x (0.01)^2.
        let raised = Morphology::level_at(Point::new(0.0, 0.0, 0.045), &robot);
        let cost = step_cost(&raised, &d, &robot, 0.005).unwrap();
        assert!((cost - 51.0 * 1e-4).abs() < 1e-12, "cost = {cost}");
    }

    #[test]
    fn wall_ahead_is_a_dead_end_with_a_location() {
        // An impassable cliff: taller than any pitch can lift the nose.
        let mut heights = Vec::new();
        for _iy in 0..80 {
            for ix in 0..240 {
                let x = -0.25 + ix as f64 * 0.005;
                heights.push(if x >= 0.3 { 1.0 } else { 0.0 });
            }
        }
        let terrain = ElevationMap::new(240, 80, 0.005, (-0.25, -0.2), heights).unwrap();
        let d = inflate(&terrain, 0.035).unwrap();
        let robot = RobotParams::default();
        let settings = SearchSettings {
            target_x: 0.5,
            ..Default::default()
        };
        let start = level_start(-0.1, 0.0, &d, &robot, &settings.contact).unwrap();
        let err = plan(&start, &terrain, &d, &robot, &settings).unwrap_err();
        match err {
            Error::DeadEnd { x, .. } => {
                assert!((0.0..0.5).contains(&x), "dead end at x = {x}");
            }
            other => panic!("expected a dead end, got {other:?}"),
        }
    }

    #[test]
    fn planning_twice_gives_bitwise_identical_paths() {
        let (terrain, d) = obstacle_scene(ObstacleKind::Step, 15.0);
        let robot = RobotParams::default();
        let settings = SearchSettings::default();
        let start = level_start(0.0, 0.0, &d, &robot, &settings.contact).unwrap();
        let a = plan(&start, &terrain, &d, &robot, &settings).unwrap();
        let b = plan(&start, &terrain, &d, &robot, &settings).unwrap();
        assert_eq!(a.len(), b.len());
        for (x, y) in a.steps.iter().zip(&b.steps) {
            assert_eq!(x.side, y.side);
            assert_eq!(x.cost.to_bits(), y.cost.to_bits());
            let (mx, my) = (&x.morphology, &y.morphology);
            for (u, v) in [
                (mx.p_sl2.x, my.p_sl2.x),
                (mx.p_sl2.y, my.p_sl2.y),
                (mx.p_sl2.z, my.p_sl2.z),
                (mx.p_sr2.x, my.p_sr2.x),
                (mx.p_sr2.y, my.p_sr2.y),
                (mx.p_sr2.z, my.p_sr2.z),
                (mx.pitch, my.pitch),
                (mx.roll, my.roll),
                (mx.flippers.alpha_l, my.flippers.alpha_l),
                (mx.flippers.alpha_r, my.flippers.alpha_r),
                (mx.flippers.beta_l, my.flippers.beta_l),
                (mx.flippers.beta_r, my.flippers.beta_r),
            ] {
                assert_eq!(u.to_bits(), v.to_bits());
            }
        }
    }

    #[test]
    fn step_obstacle_raises_flippers_before_pitching_up() {
        let (terrain, d) = obstacle_scene(ObstacleKind::Step, 0.0);
        let robot = RobotParams::default();
        let settings = SearchSettings::default();
        let start = level_start(0.0, 0.0, &d, &robot, &settings.contact).unwrap();
        let path = plan(&start, &terrain, &d, &robot, &settings).unwrap();
        assert!(path.len() >= 20);

        let first_flipper_up = path
            .steps
            .iter()
            .position(|s| s.morphology.flippers.alpha_l > 0.1);
        let first_nose_up = path.steps.iter().position(|s| s.morphology.pitch < -0.05);
        let max_alpha = path
            .steps
            .iter()
            .map(|s| s.morphology.flippers.alpha_l)
            .fold(f64::NEG_INFINITY, f64::max);
        assert!(max_alpha > 0.3, "front flippers never engaged: {max_alpha}");
        let (up, nose) = (
            first_flipper_up.expect("flippers should rise"),
            first_nose_up.expect("body should pitch up at the step"),
        );
        assert!(
            up < nose,
            "flippers ({up}) should engage before the body pitches ({nose})"
        );
    }

    #[test]
    fn export_and_import_reproduce_the_plan_bit_for_bit() {
        let (terrain, d) = flat_scene();
        let robot = RobotParams::default();
        let settings = SearchSettings {
            target_x: 0.06,
            ..Default::default()
        };
        let start = level_start(0.0, 0.0, &d, &robot, &settings.contact).unwrap();
        let path = plan(&start, &terrain, &d, &robot, &settings).unwrap();
        assert!(!path.is_empty());

        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("plan.path");
        export_path(&path, &file).unwrap();
        let back = import_path(&file).unwrap();

        assert_eq!(back.provenance.map_hash, path.provenance.map_hash);
        assert_eq!(back.provenance.settings, path.provenance.settings);
        assert_eq!(back.provenance.robot, path.provenance.robot);
        assert_eq!(back.len(), path.len());
        for (x, y) in path.steps.iter().zip(&back.steps) {
            assert_eq!(x.side, y.side);
            assert_eq!(x.cost.to_bits(), y.cost.to_bits());
            assert_eq!(
                x.morphology.p_sl2.x.to_bits(),
                y.morphology.p_sl2.x.to_bits()
            );
            assert_eq!(
                x.morphology.flippers.alpha_l.to_bits(),
                y.morphology.flippers.alpha_l.to_bits()
            );
            assert_eq!(x.morphology.pitch.to_bits(), y.morphology.pitch.to_bits());
        }

        // An empty path round-trips as a header-only file.
        let empty = PlanPath {
            steps: Vec::new(),
            provenance: path.provenance.clone(),
        };
        let file2 = dir.path().join("empty.path");
        export_path(&empty, &file2).unwrap();
        let back2 = import_path(&file2).unwrap();
        assert!(back2.is_empty());
        assert_eq!(back2.provenance, empty.provenance);
    }

    #[test]
    fn malformed_path_files_report_their_line() {
        let dir = tempfile::tempdir().unwrap();

        let no_header = dir.path().join("a.path");
        std::fs::write(&no_header, "1 2 3\n").unwrap();
        match import_path(&no_header).unwrap_err() {
            Error::Parse { line, .. } => assert_eq!(line, 1),
            other => panic!("unexpected: {other:?}"),
        }

        let (terrain, d) = flat_scene();
        let robot = RobotParams::default();
        let settings = SearchSettings {
            target_x: 0.02,
            ..Default::default()
        };
        let start = level_start(0.0, 0.0, &d, &robot, &settings.contact).unwrap();
        let path = plan(&start, &terrain, &d, &robot, &settings).unwrap();
        let good = dir.path().join("good.path");
        export_path(&path, &good).unwrap();
        let text = std::fs::read_to_string(&good).unwrap();

        // Truncate the last record to 14 columns.
        let mut lines: Vec<String> = text.lines().map(String::from).collect();
        let last = lines.last().unwrap().clone();
        *lines.last_mut().unwrap() = last.rsplit_once(' ').unwrap().0.to_string();
        let bad_cols = dir.path().join("cols.path");
        std::fs::write(&bad_cols, lines.join("\n")).unwrap();
        match import_path(&bad_cols).unwrap_err() {
            Error::Parse { line, message, .. } => {
                assert_eq!(line, lines.len());
                assert!(message.contains("15 columns"), "{message}");
            }
            other => panic!("unexpected: {other:?}"),
        }

        // A flipper angle outside the limits is rejected with its line.
        let mut lines: Vec<String> = text.lines().map(String::from).collect();
        let fields: Vec<String> = lines[1].split_whitespace().map(String::from).collect();
        let mut broken = fields.clone();
        broken[9] = "3.5".into(); // alpha_l beyond the upper limit
        lines[1] = broken.join(" ");
        let bad_angle = dir.path().join("angle.path");
        std::fs::write(&bad_angle, lines.join("\n")).unwrap();
        match import_path(&bad_angle).unwrap_err() {
            Error::Parse { line, message, .. } => {
                assert_eq!(line, 2);
                assert!(message.contains("invalid configuration"), "{message}");
            }
            other => panic!("unexpected: {other:?}"),
        }
    }

    #[test]
    fn beam_search_on_flat_ground_matches_greedy() {
        let (terrain, d) = flat_scene();
        let robot = RobotParams::default();
        let greedy = SearchSettings {
            target_x: 0.1,
            ..Default::default()
        };
        let beam = SearchSettings {
            beam_width: 2,
            ..greedy.clone()
        };
        let start = level_start(0.0, 0.0, &d, &robot, &greedy.contact).unwrap();
        let a = plan(&start, &terrain, &d, &robot, &greedy).unwrap();
        let b = plan(&start, &terrain, &d, &robot, &beam).unwrap();
        assert_eq!(a.len(), b.len());
        for (x, y) in a.steps.iter().zip(&b.steps) {
            assert_eq!(
                x.morphology.s_middle2().x.to_bits(),
                y.morphology.s_middle2().x.to_bits()
            );
        }
    }

    #[test]
    fn candidate_trace_records_the_winner() {
        let (terrain, d) = flat_scene();
        let robot = RobotParams::default();
        let settings = SearchSettings {
            target_x: 0.04,
            ..Default::default()
        };
        let start = level_start(0.0, 0.0, &d, &robot, &settings.contact).unwrap();
        let mut trace = Vec::new();
        let path = plan_traced(&start, &terrain, &d, &robot, &settings, Some(&mut trace)).unwrap();
        assert_eq!(path.len(), 2);
        assert!(trace.iter().filter(|r| r.chosen).count() == 2);
        assert!(trace.len() > path.len(), "trace should include losers too");
        for r in &trace {
            assert!(r.step_index < 2);
            assert!(r.dh_index < settings.h_samples);
        }
    }
}
