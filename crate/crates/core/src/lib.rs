//! Seamless transitions for mobile drones in aerial multicast.
//!
//! The crate builds a level-based multicast tree (LCRT) over a drone swarm,
//! decides whether a mobile receiver's straight-line move stays inside the
//! tree's coverage, plans a covered trajectory when it does not, and
//! simulates multicast traffic to report average delay and throughput.
//!
//! Modules, bottom up:
//! - [`geometry`]: coverage spheres, segment crossings, intersection circles.
//! - [`lcrt`]: hop levels and greedy forwarder selection.
//! - [`overlap`]: overlap graph over transmitters and its shortest paths.
//! - [`planner`]: seamlessness test and trajectory construction.
//! - [`sim`]: time-stepped traffic simulation and metrics.
//! - [`sweep`]: load/policy sweeps and their CSV report.

pub mod geometry;
pub mod lcrt;
pub mod overlap;
pub mod planner;
pub mod scenarios;
pub mod sim;
pub mod sweep;

pub use geometry::{CoverageInterval, GeometryError, IntersectionCircle, Point3, SphereCoverage};
pub use lcrt::{build_lcrt_tree, compute_levels, DroneId, DroneNode, MulticastTree, TreeError};
pub use overlap::{build_overlap_graph, min_weight_path, GraphError, OverlapGraph};
pub use planner::{
    check_straight_seamless, plan, PlanError, Planner, SeamlessReason, SeamlessVerdict, Trajectory,
    TrajectoryKind, TransitionRequest,
};
pub use sim::{Metrics, MobileSpec, Policy, Scenario, SimError};
