//! Robot geometry: dimensions, whole-body configurations, and the skeleton
//! forward kinematics everything else samples against.
//!
//! The robot is reduced to a skeleton of eight joints, four per side:
//! `S_{side,0}` front flipper tip, `S_{side,1}` front axle, `S_{side,2}`
//! rear axle, `S_{side,3}` rear flipper tip. The body frame sits at the
//! midpoint of the two rear axle joints (`S_middle,2`), x forward, y left,
//! z up. Orientation is yaw → pitch → roll about z, y, x with the right-hand
//! rule, so positive pitch tips the nose down and positive roll lifts the
//! left side.

use std::fmt;
use std::path::Path;

use nalgebra::Rotation3;

use crate::error::{Error, Result};
use crate::{Point, Vec3};

/// Which track of the robot a reference point or expansion belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn opposite(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }

    /// Sign of the body-frame y coordinate of this side's joints.
    pub fn y_sign(self) -> f64 {
        match self {
            Side::Left => 1.0,
            Side::Right => -1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Side::Left => "left",
            Side::Right => "right",
        }
    }

    pub fn parse(s: &str) -> Option<Side> {
        match s {
            "left" => Some(Side::Left),
            "right" => Some(Side::Right),
            _ => None,
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Physical dimensions and joint limits.
///
/// `robot_width` is the lateral distance between the two skeleton side
/// lines (outer track centerlines); `track_width` is the footprint width of
/// one track and only matters for sanity checks, not for the skeleton.
#[derive(Debug, Clone, PartialEq)]
pub struct RobotParams {
    /// Track wheel radius, meters. Also the inflation radius the planner
    /// expects the inflated map to be built with.
    pub wheel_radius: f64,
    /// Width of a single track, meters.
    pub track_width: f64,
    /// Distance between the left and right skeleton lines, meters.
    pub robot_width: f64,
    /// Distance from rear axle to front axle (`S_2` to `S_1`), meters.
    pub base_length: f64,
    /// Length of each flipper link (`S_1` to `S_0`, `S_2` to `S_3`), meters.
    pub flipper_length: f64,
    /// Allowed flipper angle range, radians. Zero is colinear with the
    /// base; positive lifts the tip.
    pub flipper_limits: (f64, f64),
    /// Pitch interval contact searches may explore, radians.
    pub pitch_bounds: (f64, f64),
}

impl Default for RobotParams {
    fn default() -> Self {
        Self {
            wheel_radius: 0.035,
            track_width: 0.03,
            robot_width: 0.15,
            base_length: 0.25,
            flipper_length: 0.10,
            flipper_limits: (-2.0 * std::f64::consts::FRAC_PI_3, 2.0 * std::f64::consts::FRAC_PI_3),
            pitch_bounds: (-1.2, 1.2),
        }
    }
}

impl RobotParams {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidParams(msg));
        let all = [
            self.wheel_radius,
            self.track_width,
            self.robot_width,
            self.base_length,
            self.flipper_length,
            self.flipper_limits.0,
            self.flipper_limits.1,
            self.pitch_bounds.0,
            self.pitch_bounds.1,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return fail("robot parameters must be finite".into());
        }
        if self.wheel_radius <= 0.0 {
            return fail(format!("wheel radius must be positive, got {}", self.wheel_radius));
        }
        if !(self.track_width > 0.0 && self.track_width < self.robot_width) {
            return fail(format!(
                "track width must be in (0, robot width), got {} vs {}",
                self.track_width, self.robot_width
            ));
        }
        if self.base_length <= 0.0 || self.flipper_length <= 0.0 {
            return fail("base and flipper lengths must be positive".into());
        }
        if self.flipper_limits.0 >= self.flipper_limits.1 {
            return fail(format!(
                "flipper limits must satisfy min < max, got ({}, {})",
                self.flipper_limits.0, self.flipper_limits.1
            ));
        }
        if !(self.pitch_bounds.0 < 0.0 && self.pitch_bounds.1 > 0.0) {
            return fail(format!(
                "pitch bounds must straddle zero, got ({}, {})",
                self.pitch_bounds.0, self.pitch_bounds.1
            ));
        }
        Ok(())
    }

    /// Serializes as `key = value` lines, one per parameter.
    pub fn to_config_string(&self) -> String {
        use crate::terrain::fmt_f64 as f;
        format!(
            "wheel_radius = {}\ntrack_width = {}\nrobot_width = {}\nbase_length = {}\n\
             flipper_length = {}\nflipper_angle_min = {}\nflipper_angle_max = {}\n\
             pitch_search_min = {}\npitch_search_max = {}\n",
            f(self.wheel_radius),
            f(self.track_width),
            f(self.robot_width),
            f(self.base_length),
            f(self.flipper_length),
            f(self.flipper_limits.0),
            f(self.flipper_limits.1),
            f(self.pitch_bounds.0),
            f(self.pitch_bounds.1),
        )
    }

    /// Parses a `key = value` config. Keys may be a subset (missing ones
    /// keep their defaults); unknown keys are an error so typos do not
    /// silently fall back to defaults.
    pub fn from_config_str(text: &str, path: &Path) -> Result<Self> {
        let mut out = RobotParams::default();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::parse(path, line_no, format!("expected `key = value`, got `{line}`"))
            })?;
            let key = key.trim();
            let v: f64 = value.trim().parse().map_err(|_| {
                Error::parse(path, line_no, format!("invalid number `{}`", value.trim()))
            })?;
            match key {
                "wheel_radius" => out.wheel_radius = v,
                "track_width" => out.track_width = v,
                "robot_width" => out.robot_width = v,
                "base_length" => out.base_length = v,
                "flipper_length" => out.flipper_length = v,
                "flipper_angle_min" => out.flipper_limits.0 = v,
                "flipper_angle_max" => out.flipper_limits.1 = v,
                "pitch_search_min" => out.pitch_bounds.0 = v,
                "pitch_search_max" => out.pitch_bounds.1 = v,
                other => {
                    return Err(Error::parse(
                        path,
                        line_no,
                        format!("unknown parameter `{other}`"),
                    ))
                }
            }
        }
        out.validate()?;
        Ok(out)
    }

    pub fn from_config_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_config_str(&text, path)
    }
}

/// The four flipper angles of a configuration, radians.
///
/// `alpha` are the front links (zero points forward along the base),
/// `beta` the rear links (zero points backward along the base extension);
/// positive always lifts the tip.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FlipperAngles {
    pub alpha_l: f64,
    pub alpha_r: f64,
    pub beta_l: f64,
    pub beta_r: f64,
}

impl FlipperAngles {
    pub fn uniform(angle: f64) -> Self {
        Self {
            alpha_l: angle,
            alpha_r: angle,
            beta_l: angle,
            beta_r: angle,
        }
    }
}

/// One whole-body configuration: where the rear axle joints sit, how the
/// body is oriented, and where the flippers point.
///
/// The two rear positions are redundant with the orientation (their offset
/// must equal the rotated body-frame lateral offset); [`Morphology::validate`]
/// enforces the consistency, and constructors derive one point from the
/// other so callers cannot drift.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Morphology {
    /// World position of the left rear axle joint `S_{l,2}`.
    pub p_sl2: Point,
    /// World position of the right rear axle joint `S_{r,2}`.
    pub p_sr2: Point,
    pub yaw: f64,
    pub pitch: f64,
    pub roll: f64,
    pub flippers: FlipperAngles,
}

impl Morphology {
    /// Builds a morphology anchored at one rear axle joint; the opposite
    /// joint is placed from the orientation so the pair stays consistent.
    pub fn from_reference(
        side: Side,
        p_ref: Point,
        yaw: f64,
        pitch: f64,
        roll: f64,
        flippers: FlipperAngles,
        params: &RobotParams,
    ) -> Self {
        let rot = Rotation3::from_euler_angles(roll, pitch, yaw);
        let across = rot * Vec3::new(0.0, -side.y_sign() * params.robot_width, 0.0);
        let p_other = p_ref + across;
        let (p_sl2, p_sr2) = match side {
            Side::Left => (p_ref, p_other),
            Side::Right => (p_other, p_ref),
        };
        Self {
            p_sl2,
            p_sr2,
            yaw,
            pitch,
            roll,
            flippers,
        }
    }

    /// Level pose at a given body-frame midpoint, flippers at rest.
    pub fn level_at(mid: Point, params: &RobotParams) -> Self {
        let half = Vec3::new(0.0, params.robot_width / 2.0, 0.0);
        Self {
            p_sl2: mid + half,
            p_sr2: mid - half,
            yaw: 0.0,
            pitch: 0.0,
            roll: 0.0,
            flippers: FlipperAngles::default(),
        }
    }

    /// Body orientation as a rotation matrix (yaw about z, then pitch about
    /// y, then roll about x).
    pub fn rotation(&self) -> Rotation3<f64> {
        Rotation3::from_euler_angles(self.roll, self.pitch, self.yaw)
    }

    /// Midpoint of the rear axle joints — the tracking point of the robot.
    pub fn s_middle2(&self) -> Point {
        nalgebra::center(&self.p_sl2, &self.p_sr2)
    }

    /// Rear axle joint of one side.
    pub fn p_s2(&self, side: Side) -> Point {
        match side {
            Side::Left => self.p_sl2,
            Side::Right => self.p_sr2,
        }
    }

    /// Reflection across the x-z plane: y negated, roll and yaw flipped,
    /// left and right swapped.
    pub fn mirrored(&self) -> Morphology {
        let flip = |p: Point| Point::new(p.x, -p.y, p.z);
        Morphology {
            p_sl2: flip(self.p_sr2),
            p_sr2: flip(self.p_sl2),
            yaw: -self.yaw,
            pitch: self.pitch,
            roll: -self.roll,
            flippers: FlipperAngles {
                alpha_l: self.flippers.alpha_r,
                alpha_r: self.flippers.alpha_l,
                beta_l: self.flippers.beta_r,
                beta_r: self.flippers.beta_l,
            },
        }
    }

    /// Checks internal consistency against the robot dimensions: finite
    /// fields, flipper angles within limits, and the two rear joints
    /// exactly one robot width apart in the direction the orientation
    /// dictates (tolerance 1e-6 m).
    pub fn validate(&self, params: &RobotParams) -> Result<()> {
        let angles = [
            self.flippers.alpha_l,
            self.flippers.alpha_r,
            self.flippers.beta_l,
            self.flippers.beta_r,
        ];
        for a in angles {
            if !a.is_finite() || a < params.flipper_limits.0 || a > params.flipper_limits.1 {
                return Err(Error::InvalidMorphology(format!(
                    "flipper angle {a} outside limits [{}, {}]",
                    params.flipper_limits.0, params.flipper_limits.1
                )));
            }
        }
        let fields = [
            self.p_sl2.x, self.p_sl2.y, self.p_sl2.z,
            self.p_sr2.x, self.p_sr2.y, self.p_sr2.z,
            self.yaw, self.pitch, self.roll,
        ];
        if fields.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidMorphology("non-finite field".into()));
        }
        let expected = self.rotation() * Vec3::new(0.0, params.robot_width, 0.0);
        let actual = self.p_sl2 - self.p_sr2;
        if (expected - actual).norm() > 1e-6 {
            return Err(Error::InvalidMorphology(format!(
                "rear joints disagree with orientation: offset {:?}, expected {:?}",
                actual, expected
            )));
        }
        Ok(())
    }
}

/// World positions of the eight skeleton joints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Skeleton {
    pub sl0: Point,
    pub sl1: Point,
    pub sl2: Point,
    pub sl3: Point,
    pub sr0: Point,
    pub sr1: Point,
    pub sr2: Point,
    pub sr3: Point,
}

impl Skeleton {
    pub fn s_middle2(&self) -> Point {
        nalgebra::center(&self.sl2, &self.sr2)
    }

    pub fn s_middle1(&self) -> Point {
        nalgebra::center(&self.sl1, &self.sr1)
    }

    /// Joints of one side, tip-to-tip: `[S_0, S_1, S_2, S_3]`.
    pub fn side_chain(&self, side: Side) -> [Point; 4] {
        match side {
            Side::Left => [self.sl0, self.sl1, self.sl2, self.sl3],
            Side::Right => [self.sr0, self.sr1, self.sr2, self.sr3],
        }
    }

    pub fn joints(&self) -> [Point; 8] {
        [
            self.sl0, self.sl1, self.sl2, self.sl3, self.sr0, self.sr1, self.sr2, self.sr3,
        ]
    }

    /// The rigid members of the skeleton: three links per side plus the
    /// two axles connecting the sides.
    pub fn segments(&self) -> [(Point, Point); 8] {
        [
            (self.sl1, self.sl0),
            (self.sl2, self.sl1),
            (self.sl2, self.sl3),
            (self.sr1, self.sr0),
            (self.sr2, self.sr1),
            (self.sr2, self.sr3),
            (self.sl1, self.sr1),
            (self.sl2, self.sr2),
        ]
    }
}

/// Places all eight joints in the world for a configuration.
///
/// Validates the morphology first; the positions come from the body-frame
/// template (base joints in the z = 0 plane, flipper tips rotated out of
/// it) pushed through the body rotation.
pub fn forward_kinematics(m: &Morphology, params: &RobotParams) -> Result<Skeleton> {
    m.validate(params)?;
    let mid = m.s_middle2();
    let rot = m.rotation();
    let w = params.robot_width / 2.0;
    let lb = params.base_length;
    let lf = params.flipper_length;
    let f = m.flippers;

    let place = |body: Vec3| mid + rot * body;
    let front_tip = |alpha: f64, y: f64| {
        Vec3::new(lb + lf * alpha.cos(), y, lf * alpha.sin())
    };
    let rear_tip = |beta: f64, y: f64| Vec3::new(-lf * beta.cos(), y, lf * beta.sin());

    Ok(Skeleton {
        sl0: place(front_tip(f.alpha_l, w)),
        sl1: place(Vec3::new(lb, w, 0.0)),
        sl2: place(Vec3::new(0.0, w, 0.0)),
        sl3: place(rear_tip(f.beta_l, w)),
        sr0: place(front_tip(f.alpha_r, -w)),
        sr1: place(Vec3::new(lb, -w, 0.0)),
        sr2: place(Vec3::new(0.0, -w, 0.0)),
        sr3: place(rear_tip(f.beta_r, -w)),
    })
}

/// Evenly spaced points along a segment, both endpoints always included,
/// with spacing no larger than `step`. A zero-length segment yields its
/// single point.
pub fn sample_segment(a: Point, b: Point, step: f64) -> Vec<Point> {
    assert!(step > 0.0, "sampling step must be positive");
    let len = (b - a).norm();
    if len == 0.0 {
        return vec![a];
    }
    let n = (len / step).ceil() as usize;
    let mut pts = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let t = i as f64 / n as f64;
        pts.push(a + (b - a) * t);
    }
    pts
}
