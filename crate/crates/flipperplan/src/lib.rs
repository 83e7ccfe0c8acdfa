//! Whole-body morphology planning for small tracked robots with four
//! independently actuated sub-tracks (flippers).
//!
//! The crate turns a 2.5D elevation map into a sequence of safe whole-body
//! configurations — body position, pitch, roll, and one angle per flipper —
//! that carries the robot from a start position to a target x, and can then
//! replay the sequence with a simple kinematic follower to estimate tracking
//! error under disturbances.
//!
//! The pipeline, in the order the pieces are usually used:
//!
//! 1. [`terrain`] — elevation maps, file formats, synthetic obstacle scenes.
//! 2. [`inflation`] — max-convolution of a map with a hemispherical kernel,
//!    producing the surface the robot skeleton is planned against.
//! 3. [`robot_model`] — robot parameters, morphologies, forward kinematics.
//! 4. [`config_gen`] — contact searches that resolve pitch, roll, and
//!    flipper angles against the inflated surface.
//! 5. [`path_search`] — greedy forward search minimizing a terrain-fit cost.
//! 6. [`follower`] — tick-based replay with disturbance models and reports.

pub mod config_gen;
pub mod error;
pub mod follower;
pub mod inflation;
pub mod path_search;
pub mod robot_model;
pub mod terrain;

pub use config_gen::{
    clearance, get_flipper_angles, get_pose_candidates, rotate_to_contact, validate_morphology,
    ContactParams, FlipperResolution, PoseCandidate, SupportCertificate, ValidationReport,
};
pub use error::{Error, Result};
pub use follower::{
    follow, pitch_compensation, read_report, write_report, DisturbanceSpec, FollowSettings,
    TickRecord, TrackingReport,
};
pub use inflation::{inflate, kernel_value, load_inflated, save_inflated, InflatedMap};
pub use path_search::{
    export_path, import_path, plan, step_cost, PlanPath, PlanStep, Provenance, SearchSettings,
};
pub use robot_model::{
    forward_kinematics, sample_segment, FlipperAngles, Morphology, RobotParams, Side, Skeleton,
};
pub use terrain::{
    generate_obstacle, load_map, save_map, ElevationMap, MapFormat, ObstacleKind, ObstacleSpec,
};

/// 3D point in world or body coordinates (x forward, y left, z up).
pub type Point = nalgebra::Point3<f64>;
/// 3D vector, same axes as [`Point`].
pub type Vec3 = nalgebra::Vector3<f64>;
