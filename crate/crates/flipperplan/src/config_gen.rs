//! Configuration generation: resolving body pitch, roll, and flipper angles
//! against the inflated surface by rotating skeleton members until they
//! touch it.
//!
//! Everything here reduces to one primitive: take a rigid set of sample
//! points, spin it about an axis, and find the smallest rotation that puts
//! the set in touching contact with the inflated map `D` — touching meaning
//! the minimum clearance crosses zero, never diving below the contact
//! band. The search marches with a step bounded by the current clearance
//! over a Lipschitz bound on how fast clearance can change per radian, so
//! it cannot step across a contact, then bisects the bracketing interval
//! down to `bisect_tol`.

use nalgebra::{Rotation3, Unit};

use crate::error::{Error, Result};
use crate::inflation::InflatedMap;
use crate::robot_model::{sample_segment, FlipperAngles, RobotParams, Side};
use crate::{Point, Vec3};

/// Minimum march step, radians. Guarantees progress when the clearance
/// bound would suggest arbitrarily small steps near a contact.
const MARCH_FLOOR: f64 = 1e-3;

/// Tunables for contact searches.
#[derive(Debug, Clone, PartialEq)]
pub struct ContactParams {
    /// Half-width of the touching band: clearance within `±epsilon_contact`
    /// counts as contact, below it as puncture. Meters.
    pub epsilon_contact: f64,
    /// Angular bisection tolerance, radians. Small enough that resting
    /// angles on flat ground come out numerically zero.
    pub bisect_tol: f64,
    /// Spacing of clearance samples along skeleton members, meters.
    /// Half the default map resolution.
    pub sample_step: f64,
    /// Roll search explores `[-roll_limit, +roll_limit]`.
    pub roll_limit: f64,
    /// Number of evenly spaced pitch candidates strictly between the two
    /// contact-limit pitches.
    pub pitch_interior_samples: usize,
}

impl Default for ContactParams {
    fn default() -> Self {
        Self {
            epsilon_contact: 0.001,
            bisect_tol: 1e-8,
            sample_step: 0.0025,
            roll_limit: std::f64::consts::FRAC_PI_3,
            pitch_interior_samples: 3,
        }
    }
}

impl ContactParams {
    /// Default parameters with the sampling step tied to a map resolution.
    pub fn for_resolution(resolution: f64) -> Self {
        Self {
            sample_step: resolution / 2.0,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon_contact > 0.0 && self.bisect_tol > 0.0 && self.sample_step > 0.0) {
            return Err(Error::InvalidParams(
                "contact epsilon, bisection tolerance, and sample step must be positive".into(),
            ));
        }
        if !(self.roll_limit > 0.0 && self.roll_limit < std::f64::consts::FRAC_PI_2) {
            return Err(Error::InvalidParams(format!(
                "roll limit must be in (0, pi/2), got {}",
                self.roll_limit
            )));
        }
        Ok(())
    }
}

/// Minimum clearance of a point set over the inflated surface: the
/// smallest `p.z - D(p.x, p.y)`. Negative means some point is inside the
/// surface. Errors if any point is horizontally outside the map.
pub fn clearance(points: &[Point], d: &InflatedMap) -> Result<f64> {
    assert!(!points.is_empty(), "clearance of an empty point set");
    let mut min = f64::INFINITY;
    for p in points {
        let c = p.z - d.interpolate(p.x, p.y)?;
        if c < min {
            min = c;
        }
    }
    Ok(min)
}

/// A rigid point set decomposed for cheap rotation about a fixed axis:
/// each point is `fixed + u cos(a) + v sin(a)`.
struct Spun {
    fixed: Vec<Point>,
    u: Vec<Vec3>,
    v: Vec<Vec3>,
    /// Distance of each point from the axis; bounds how fast that point
    /// can move per radian.
    rho: Vec<f64>,
    /// Largest such distance.
    rho_max: f64,
}

/// One clearance evaluation of a rotated set.
struct ProbeResult {
    /// Minimum clearance over the set.
    min: f64,
    /// Largest rotation step guaranteed not to drive any point's
    /// clearance through zero: `min_i c_i / (rho_i * slope_factor)`.
    /// Non-positive when the set already touches or punctures.
    safe_step: f64,
}

impl Spun {
    fn new(axis_point: Point, axis_dir: Unit<Vec3>, points: &[Point]) -> Self {
        let mut fixed = Vec::with_capacity(points.len());
        let mut u = Vec::with_capacity(points.len());
        let mut v = Vec::with_capacity(points.len());
        let mut rho = Vec::with_capacity(points.len());
        let mut rho_max = 0.0f64;
        for p in points {
            let rel = p - axis_point;
            let axial = axis_dir.into_inner() * rel.dot(&axis_dir);
            let radial = rel - axial;
            let r = radial.norm().max(1e-12);
            rho_max = rho_max.max(r);
            rho.push(r);
            fixed.push(axis_point + axial);
            u.push(radial);
            v.push(axis_dir.cross(&radial));
        }
        Self {
            fixed,
            u,
            v,
            rho,
            rho_max,
        }
    }

    /// Minimum clearance of the set rotated by `angle` (right-hand rule
    /// about the axis direction).
    fn min_clearance(&self, angle: f64, d: &InflatedMap) -> Result<f64> {
        Ok(self.probe(angle, d, 1.0)?.min)
    }

    /// Clearance evaluation plus the safe step for the march. A point at
    /// distance `rho` from the axis moves at most `rho` per radian, and
    /// the surface under it rises at most `slope_bound` per meter of
    /// horizontal travel, so its clearance changes at most
    /// `rho * (1 + slope_bound)` per radian.
    fn probe(&self, angle: f64, d: &InflatedMap, slope_factor: f64) -> Result<ProbeResult> {
        let (sin, cos) = angle.sin_cos();
        let mut min = f64::INFINITY;
        let mut safe_step = f64::INFINITY;
        for i in 0..self.fixed.len() {
            let p = self.fixed[i] + self.u[i] * cos + self.v[i] * sin;
            let c = p.z - d.interpolate(p.x, p.y)?;
            if c < min {
                min = c;
            }
            let s = c / (self.rho[i] * slope_factor);
            if s < safe_step {
                safe_step = s;
            }
        }
        Ok(ProbeResult { min, safe_step })
    }
}

/// Marches from angle 0 (clearance `f0 > 0`) toward `extent` until the
/// minimum clearance crosses zero, then bisects. Returns the angle on the
/// non-puncturing side of the crossing, or `None` if the sweep reaches
/// `extent` still clear.
fn march_to_crossing(
    spun: &Spun,
    d: &InflatedMap,
    start: ProbeResult,
    extent: f64,
    slope_factor: f64,
    contact: &ContactParams,
) -> Result<Option<f64>> {
    debug_assert!(start.min > 0.0 && extent != 0.0);
    let dir = extent.signum();
    let mut a_clear = 0.0f64;
    let mut safe = start.safe_step;
    loop {
        let step = safe.max(MARCH_FLOOR);
        let mut a = a_clear + dir * step;
        if (a - extent) * dir >= 0.0 {
            a = extent;
        }
        let p = spun.probe(a, d, slope_factor)?;
        if p.min <= 0.0 {
            return Ok(Some(bisect(spun, d, a_clear, a, contact)?));
        }
        if a == extent {
            return Ok(None);
        }
        a_clear = a;
        safe = p.safe_step;
    }
}

/// Counterpart of [`march_to_crossing`] starting from puncture
/// (`f0 < 0`): sweeps toward `extent` until the set comes free, then
/// bisects back to the touching angle. Used when a level start is already
/// inside the surface and the search must back out of it.
fn march_to_escape(
    spun: &Spun,
    d: &InflatedMap,
    f0: f64,
    extent: f64,
    slope_factor: f64,
    contact: &ContactParams,
) -> Result<Option<f64>> {
    debug_assert!(f0 < 0.0 && extent != 0.0);
    let dir = extent.signum();
    let rate = spun.rho_max * slope_factor;
    let mut a_hit = 0.0f64;
    let mut f_hit = f0;
    loop {
        let step = ((-f_hit) / rate).max(MARCH_FLOOR);
        let mut a = a_hit + dir * step;
        if (a - extent) * dir >= 0.0 {
            a = extent;
        }
        let f = spun.min_clearance(a, d)?;
        if f > 0.0 {
            return Ok(Some(bisect(spun, d, a, a_hit, contact)?));
        }
        if a == extent {
            return Ok(None);
        }
        a_hit = a;
        f_hit = f;
    }
}

/// Sign bisection between a clear angle and a contacting angle; returns
/// the clear-side endpoint once the bracket is narrower than `bisect_tol`,
/// so the result never reports a puncturing configuration.
fn bisect(
    spun: &Spun,
    d: &InflatedMap,
    mut a_clear: f64,
    mut a_hit: f64,
    contact: &ContactParams,
) -> Result<f64> {
    while (a_hit - a_clear).abs() > contact.bisect_tol {
        let mid = 0.5 * (a_clear + a_hit);
        if spun.min_clearance(mid, d)? > 0.0 {
            a_clear = mid;
        } else {
            a_hit = mid;
        }
    }
    Ok(a_clear)
}

/// Rotates `points` rigidly about the axis through `axis_point` along
/// `axis_dir` and returns the smallest-magnitude angle within
/// `interval = (lo, hi)`, `lo <= 0 <= hi`, that brings the set into
/// touching contact with `d`.
///
/// If the set already touches at angle 0 (minimum clearance within the
/// contact band) the answer is exactly 0. Starting inside the surface is
/// the caller's bug, reported as [`Error::PunctureAtStart`]; sweeping the
/// whole interval without contact is [`Error::NoContact`]. When both
/// directions reach contact the smaller magnitude wins (positive on an
/// exact tie).
pub fn rotate_to_contact(
    axis_point: Point,
    axis_dir: Vec3,
    points: &[Point],
    d: &InflatedMap,
    interval: (f64, f64),
    contact: &ContactParams,
    context: &'static str,
) -> Result<f64> {
    let (lo, hi) = interval;
    if !(lo <= 0.0 && hi >= 0.0 && lo < hi) {
        return Err(Error::InvalidParams(format!(
            "rotation interval must contain 0, got ({lo}, {hi})"
        )));
    }
    let axis = Unit::new_normalize(axis_dir);
    let spun = Spun::new(axis_point, axis, points);
    let slope_factor = 1.0 + d.slope_bound();
    let start = spun.probe(0.0, d, slope_factor)?;
    if start.min.abs() <= contact.epsilon_contact {
        return Ok(0.0);
    }
    if start.min < 0.0 {
        return Err(Error::PunctureAtStart {
            context,
            min_clearance: start.min,
        });
    }
    let mut best: Option<f64> = None;
    for extent in [hi, lo] {
        if extent == 0.0 {
            continue;
        }
        let from = ProbeResult {
            min: start.min,
            safe_step: start.safe_step,
        };
        if let Some(a) = march_to_crossing(&spun, d, from, extent, slope_factor, contact)? {
            best = match best {
                Some(b) if b.abs() <= a.abs() => Some(b),
                _ => Some(a),
            };
        }
    }
    best.ok_or(Error::NoContact { context })
}

/// Support evidence for a pose candidate: how many sampled base-frame
/// points touch the surface on the reference line and on the opposite
/// structure, plus the worst clearance seen.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SupportCertificate {
    pub reference_contacts: usize,
    pub opposite_contacts: usize,
    pub min_clearance: f64,
}

/// One body pose the planner may adopt at a reference position: the
/// reference rear axle joint is pinned at `p_ref`, pitch comes from a
/// contact search along the reference side, roll from rotating the rest of
/// the base frame about the reference line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoseCandidate {
    pub side: Side,
    pub p_ref: Point,
    pub yaw: f64,
    pub pitch: f64,
    pub roll: f64,
    pub support: SupportCertificate,
}

/// Pitch that brings the open line from `p_ref` of the given length into
/// touching contact, searching nose-down when the line floats and
/// nose-up when it starts buried. `None` when the pitch bounds are
/// exhausted without contact.
fn pitch_contact(
    p_ref: Point,
    length: f64,
    d: &InflatedMap,
    robot: &RobotParams,
    contact: &ContactParams,
) -> Result<Option<f64>> {
    let tip = p_ref + Vec3::new(length, 0.0, 0.0);
    // The pivot itself is excluded: it sits on the axis, so its clearance
    // is constant and would mask the line's actual contact state whenever
    // the reference is grounded.
    let pts: Vec<Point> = sample_segment(p_ref, tip, contact.sample_step)
        .into_iter()
        .skip(1)
        .collect();
    let axis = Unit::new_normalize(Vec3::y());
    let spun = Spun::new(p_ref, axis, &pts);
    let slope_factor = 1.0 + d.slope_bound();
    let start = spun.probe(0.0, d, slope_factor)?;
    if start.min.abs() <= contact.epsilon_contact {
        return Ok(Some(0.0));
    }
    if start.min > 0.0 {
        // Floating: tip the nose down until the line lands.
        march_to_crossing(&spun, d, start, robot.pitch_bounds.1, slope_factor, contact)
    } else {
        // Buried ahead: tip the nose up until the line comes free.
        march_to_escape(&spun, d, start.min, robot.pitch_bounds.0, slope_factor, contact)
    }
}

/// Roll that brings the non-reference part of the base frame (opposite
/// line plus both axles) into contact, rotating about the already-pitched
/// reference line.
///
/// When the far side starts out inside the surface (the ground rises
/// across the track), the search instead rolls toward the sign that lifts
/// the far line clear and lands on the touching angle, so the candidate
/// leans on the high side rather than being rejected. `NoContact` covers
/// both a sweep that never lands and an escape that never comes free.
fn roll_contact(
    p_ref: Point,
    side: Side,
    pitch: f64,
    d: &InflatedMap,
    robot: &RobotParams,
    contact: &ContactParams,
) -> Result<f64> {
    let rot = Rotation3::from_euler_angles(0.0, pitch, 0.0);
    let s = side.y_sign();
    let w = robot.robot_width;
    let lb = robot.base_length;
    let far2 = Vec3::new(0.0, -s * w, 0.0);
    let far1 = Vec3::new(lb, -s * w, 0.0);
    let near1 = Vec3::new(lb, 0.0, 0.0);

    let mut body: Vec<Vec3> = Vec::new();
    let seg = |a: Vec3, b: Vec3| {
        sample_segment(Point::from(a), Point::from(b), contact.sample_step)
            .into_iter()
            .map(|p| p.coords)
    };
    body.extend(seg(far2, far1));
    // Axle samples skip their on-axis endpoint (constant clearance).
    body.extend(seg(Vec3::zeros(), far2).skip(1));
    body.extend(seg(near1, far1).skip(1));

    let pts: Vec<Point> = body.into_iter().map(|b| p_ref + rot * b).collect();
    let axis = Unit::new_normalize(rot * Vec3::x());
    let spun = Spun::new(p_ref, axis, &pts);
    let slope_factor = 1.0 + d.slope_bound();
    let start = spun.probe(0.0, d, slope_factor)?;
    if start.min.abs() <= contact.epsilon_contact {
        return Ok(0.0);
    }
    if start.min < 0.0 {
        // The far line sits at body-frame y = -s * w, so its height rate
        // under roll is -s * w: rolling toward sign -s raises it.
        let lift = -s * contact.roll_limit;
        return march_to_escape(&spun, d, start.min, lift, slope_factor, contact)?
            .ok_or(Error::NoContact { context: "roll" });
    }
    let mut best: Option<f64> = None;
    for extent in [contact.roll_limit, -contact.roll_limit] {
        let from = ProbeResult {
            min: start.min,
            safe_step: start.safe_step,
        };
        if let Some(a) = march_to_crossing(&spun, d, from, extent, slope_factor, contact)? {
            best = match best {
                Some(b) if b.abs() <= a.abs() => Some(b),
                _ => Some(a),
            };
        }
    }
    best.ok_or(Error::NoContact { context: "roll" })
}

/// Re-samples the base frame at a resolved (pitch, roll) and checks the
/// support rule: at least one touching sample on the reference line and at
/// least one on the opposite structure, with nothing puncturing. Returns
/// `None` when the pose fails the rule.
fn certify(
    p_ref: Point,
    side: Side,
    pitch: f64,
    roll: f64,
    d: &InflatedMap,
    robot: &RobotParams,
    contact: &ContactParams,
) -> Result<Option<PoseCandidate>> {
    let rot = Rotation3::from_euler_angles(roll, pitch, 0.0);
    let s = side.y_sign();
    let w = robot.robot_width;
    let lb = robot.base_length;
    let eps = contact.epsilon_contact;

    let sample_world = |a: Vec3, b: Vec3| -> Vec<Point> {
        sample_segment(Point::from(a), Point::from(b), contact.sample_step)
            .into_iter()
            .map(|p| p_ref + rot * p.coords)
            .collect()
    };
    let reference_line = sample_world(Vec3::zeros(), Vec3::new(lb, 0.0, 0.0));
    let mut opposite: Vec<Point> =
        sample_world(Vec3::new(0.0, -s * w, 0.0), Vec3::new(lb, -s * w, 0.0));
    opposite.extend(
        sample_world(Vec3::zeros(), Vec3::new(0.0, -s * w, 0.0))
            .into_iter()
            .skip(1),
    );
    opposite.extend(
        sample_world(Vec3::new(lb, 0.0, 0.0), Vec3::new(lb, -s * w, 0.0))
            .into_iter()
            .skip(1),
    );

    let mut min_clearance = f64::INFINITY;
    let mut count_touching = |pts: &[Point]| -> Result<usize> {
        let mut n = 0;
        for p in pts {
            let c = p.z - d.interpolate(p.x, p.y)?;
            if c < min_clearance {
                min_clearance = c;
            }
            if c.abs() <= eps {
                n += 1;
            }
        }
        Ok(n)
    };
    let reference_contacts = count_touching(&reference_line)?;
    let opposite_contacts = count_touching(&opposite)?;
    if min_clearance < -eps || reference_contacts == 0 || opposite_contacts == 0 {
        return Ok(None);
    }
    Ok(Some(PoseCandidate {
        side,
        p_ref,
        yaw: 0.0,
        pitch,
        roll,
        support: SupportCertificate {
            reference_contacts,
            opposite_contacts,
            min_clearance,
        },
    }))
}

/// Enumerates safe (pitch, roll) poses for a reference rear joint pinned
/// at `p_ref`.
///
/// The pitch range is bracketed by two contact searches along the
/// reference side: the base line alone, and the base line extended by a
/// resting flipper (only meaningful when the reference joint is grounded,
/// i.e. within the contact band of the surface). Between the brackets a
/// few interior pitches are sampled; each pitch gets its roll resolved by
/// rotating the rest of the base frame about the reference line. Poses
/// that puncture or lack two-sided support are dropped.
///
/// The result can be empty: a buried reference, a reference too high for
/// any pitch to reach the ground, or roll failures on every pitch all
/// yield no candidates rather than an error.
pub fn get_pose_candidates(
    p_ref: Point,
    side: Side,
    d: &InflatedMap,
    robot: &RobotParams,
    contact: &ContactParams,
) -> Result<Vec<PoseCandidate>> {
    let c_ref = p_ref.z - d.interpolate(p_ref.x, p_ref.y)?;
    if c_ref < -contact.epsilon_contact {
        return Ok(Vec::new());
    }
    let grounded = c_ref <= contact.epsilon_contact;

    let Some(theta_base) = pitch_contact(p_ref, robot.base_length, d, robot, contact)? else {
        return Ok(Vec::new());
    };
    let theta_extended = if grounded {
        pitch_contact(
            p_ref,
            robot.base_length + robot.flipper_length,
            d,
            robot,
            contact,
        )?
    } else {
        None
    };

    let mut thetas = Vec::new();
    match theta_extended {
        Some(t_ext) => {
            let (a, b) = if t_ext <= theta_base {
                (t_ext, theta_base)
            } else {
                (theta_base, t_ext)
            };
            thetas.push(a);
            let n = contact.pitch_interior_samples;
            for k in 1..=n {
                thetas.push(a + (b - a) * k as f64 / (n + 1) as f64);
            }
            thetas.push(b);
            thetas.dedup_by(|x, y| (*x - *y).abs() <= 1e-7);
        }
        None => thetas.push(theta_base),
    }

    let mut out = Vec::new();
    for theta in thetas {
        match roll_contact(p_ref, side, theta, d, robot, contact) {
            Ok(phi) => {
                if let Some(cand) = certify(p_ref, side, theta, phi, d, robot, contact)? {
                    out.push(cand);
                }
            }
            Err(Error::NoContact { .. }) | Err(Error::PunctureAtStart { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

/// Resolved flipper angles plus, per link, whether it never reached the
/// ground and was clamped at the lower limit (order: front left, front
/// right, rear left, rear right).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlipperResolution {
    pub angles: FlipperAngles,
    pub hanging: [bool; 4],
}

impl FlipperResolution {
    pub fn any_hanging(&self) -> bool {
        self.hanging.iter().any(|h| *h)
    }
}

/// Rotates each flipper link independently about its axle, from the upper
/// angle limit downward, to its first touching contact with the surface.
///
/// A link that sweeps down to the lower limit without contact is clamped
/// there and flagged as hanging. A link that is already inside the surface
/// at the upper limit makes the whole pose infeasible and surfaces as
/// [`Error::PunctureAtStart`].
pub fn get_flipper_angles(
    candidate: &PoseCandidate,
    d: &InflatedMap,
    robot: &RobotParams,
    contact: &ContactParams,
) -> Result<FlipperResolution> {
    let rot = Rotation3::from_euler_angles(candidate.roll, candidate.pitch, candidate.yaw);
    let s = candidate.side.y_sign();
    let w = robot.robot_width;
    let half = w / 2.0;
    let mid = candidate.p_ref + rot * Vec3::new(0.0, -s * half, 0.0);
    let (a_min, a_max) = robot.flipper_limits;
    let span = a_max - a_min;
    let lf = robot.flipper_length;
    let lb = robot.base_length;
    let axis_dir = rot * Vec3::y();

    // (pivot body position, link direction at the upper limit, sweep
    // interval, context). Rotation by +g about the body y axis lowers a
    // front link (alpha = a_max - g) and raises a rear one, hence the
    // mirrored intervals.
    let links: [(Vec3, Vec3, (f64, f64), &'static str); 4] = [
        (
            Vec3::new(lb, half, 0.0),
            Vec3::new(a_max.cos(), 0.0, a_max.sin()),
            (0.0, span),
            "front-left flipper",
        ),
        (
            Vec3::new(lb, -half, 0.0),
            Vec3::new(a_max.cos(), 0.0, a_max.sin()),
            (0.0, span),
            "front-right flipper",
        ),
        (
            Vec3::new(0.0, half, 0.0),
            Vec3::new(-a_max.cos(), 0.0, a_max.sin()),
            (-span, 0.0),
            "rear-left flipper",
        ),
        (
            Vec3::new(0.0, -half, 0.0),
            Vec3::new(-a_max.cos(), 0.0, a_max.sin()),
            (-span, 0.0),
            "rear-right flipper",
        ),
    ];

    let mut resolved = [0.0f64; 4];
    let mut hanging = [false; 4];
    for (i, (pivot_body, dir_body, interval, context)) in links.iter().enumerate() {
        let pivot = mid + rot * pivot_body;
        let pts: Vec<Point> = sample_segment(
            Point::origin(),
            Point::from(*dir_body * lf),
            contact.sample_step,
        )
        .into_iter()
        .skip(1) // the pivot end never moves; its clearance is not the link's
        .map(|p| pivot + rot * p.coords)
        .collect();
        match rotate_to_contact(pivot, axis_dir, &pts, d, *interval, contact, context) {
            Ok(g) => {
                resolved[i] = if interval.1 > 0.0 { a_max - g } else { a_max + g };
            }
            Err(Error::NoContact { .. }) => {
                resolved[i] = a_min;
                hanging[i] = true;
            }
            Err(e) => return Err(e),
        }
    }

    Ok(FlipperResolution {
        angles: FlipperAngles {
            alpha_l: resolved[0],
            alpha_r: resolved[1],
            beta_l: resolved[2],
            beta_r: resolved[3],
        },
        hanging,
    })
}

/// Result of re-sampling a full skeleton against the surface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidationReport {
    /// Worst clearance over every sampled skeleton point.
    pub min_clearance: f64,
    /// Touching samples on the left side chain (incl. its axle halves).
    pub left_contacts: usize,
    /// Touching samples on the right side chain.
    pub right_contacts: usize,
}

impl ValidationReport {
    /// At least one touching contact on each side of the robot.
    pub fn supported(&self) -> bool {
        self.left_contacts > 0 && self.right_contacts > 0
    }

    pub fn punctures(&self, epsilon_contact: f64) -> bool {
        self.min_clearance < -epsilon_contact
    }
}

/// Samples every skeleton member of a full configuration against the
/// surface: three links per side plus the two axles (each axle half is
/// attributed to its side).
pub fn validate_morphology(
    m: &crate::robot_model::Morphology,
    d: &InflatedMap,
    robot: &RobotParams,
    contact: &ContactParams,
) -> Result<ValidationReport> {
    let sk = crate::robot_model::forward_kinematics(m, robot)?;
    let eps = contact.epsilon_contact;
    let mut min_clearance = f64::INFINITY;
    let mut counts = [0usize; 2]; // left, right

    let mut tally = |pts: Vec<Point>, side_idx: usize| -> Result<()> {
        for p in pts {
            let c = p.z - d.interpolate(p.x, p.y)?;
            if c < min_clearance {
                min_clearance = c;
            }
            if c.abs() <= eps {
                counts[side_idx] += 1;
            }
        }
        Ok(())
    };

    for (idx, side) in [Side::Left, Side::Right].into_iter().enumerate() {
        let chain = sk.side_chain(side);
        for pair in chain.windows(2) {
            tally(sample_segment(pair[0], pair[1], contact.sample_step), idx)?;
        }
    }
    let mid1 = sk.s_middle1();
    let mid2 = sk.s_middle2();
    tally(sample_segment(sk.sl1, mid1, contact.sample_step), 0)?;
    tally(sample_segment(sk.sr1, mid1, contact.sample_step), 1)?;
    tally(sample_segment(sk.sl2, mid2, contact.sample_step), 0)?;
    tally(sample_segment(sk.sr2, mid2, contact.sample_step), 1)?;

    Ok(ValidationReport {
        min_clearance,
        left_contacts: counts[0],
        right_contacts: counts[1],
    })
}
