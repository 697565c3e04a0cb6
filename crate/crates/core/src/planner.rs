//! Transition planning for a mobile drone moving between two transmitters.
//!
//! A straight line `A -> B` is kept whenever it is seamless. Between
//! overlapping transmitters the line is otherwise bent through a transit
//! point `T` on the destination sphere. Between non-overlapping transmitters
//! the mobile follows a chain of eligible intersections through the
//! forwarders on the minimum-weight overlap-graph path.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::geometry::{
    boundary_point_toward, eligible_intersection, euclidean_distance, exit_point_param,
    is_segment_covered, GeometryError, Point3, SphereCoverage, EPS,
};
use crate::lcrt::{DroneId, DroneNode, MulticastTree};
use crate::overlap::{build_overlap_graph, min_weight_path, GraphError, OverlapGraph};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlanError {
    #[error("drone {0} is not a transmitter of the multicast tree")]
    NotATransmitter(DroneId),
    #[error("{what} {point} is outside the coverage of drone {forwarder}")]
    OutOfRange { what: &'static str, point: Point3, forwarder: DroneId },
    #[error("origin and destination forwarders must differ")]
    SameForwarder,
    #[error(transparent)]
    NoPath(#[from] GraphError),
    #[error("degenerate geometry: {0}")]
    Geometry(#[from] GeometryError),
    #[error("leg {leg} of the planned trajectory is not covered")]
    Uncovered { leg: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitionRequest {
    pub mobile: DroneId,
    pub origin: Point3,
    pub destination: Point3,
    pub origin_forwarder: DroneId,
    pub destination_forwarder: DroneId,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeamlessReason {
    /// The exit from the origin sphere comes no earlier than the entry into
    /// the destination sphere.
    WithinEntryExit,
    /// A third transmitter covers both the exit and the entry point.
    CoveredByThirdForwarder,
    NotSeamless,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeamlessVerdict {
    pub seamless: bool,
    pub reason: SeamlessReason,
    /// Transmitter covering the gap when `reason` is `CoveredByThirdForwarder`.
    pub witness: Option<DroneId>,
    /// Exit point `C` from the origin sphere, when it was needed.
    pub exit: Option<Point3>,
    /// Entry point `D` into the destination sphere, when it was needed.
    pub entry: Option<Point3>,
}

impl SeamlessVerdict {
    fn new(reason: SeamlessReason) -> Self {
        Self {
            seamless: reason != SeamlessReason::NotSeamless,
            reason,
            witness: None,
            exit: None,
            entry: None,
        }
    }
}

/// Seamlessness test for the straight segment `a -> b`, where `a` lies in
/// `origin` and `b` in `dest`. `others` are the additional transmitters
/// that may bridge a gap.
pub fn straight_line_verdict(
    a: Point3,
    b: Point3,
    origin: &SphereCoverage,
    dest: &SphereCoverage,
    others: &[(DroneId, SphereCoverage)],
) -> SeamlessVerdict {
    if origin.contains(b) || dest.contains(a) {
        return SeamlessVerdict::new(SeamlessReason::WithinEntryExit);
    }
    // Without a crossing the endpoint sits on the boundary up to rounding.
    let (_, c) = exit_point_param(a, b, origin, dest.center).unwrap_or((0.0, a));
    let (_, d) = exit_point_param(a, b, dest, origin.center).unwrap_or((1.0, b));
    let d_ab = euclidean_distance(a, b);
    let d_ac = euclidean_distance(a, c);
    let d_db = euclidean_distance(d, b);

    let mut verdict = if d_ab <= d_ac + d_db {
        SeamlessVerdict::new(SeamlessReason::WithinEntryExit)
    } else if let Some((id, _)) = others.iter().find(|(_, s)| {
        euclidean_distance(s.center, c) <= s.radius && euclidean_distance(s.center, d) <= s.radius
    }) {
        SeamlessVerdict {
            witness: Some(*id),
            ..SeamlessVerdict::new(SeamlessReason::CoveredByThirdForwarder)
        }
    } else {
        SeamlessVerdict::new(SeamlessReason::NotSeamless)
    };
    verdict.exit = Some(c);
    verdict.entry = Some(d);
    verdict
}

/// The transit point `T`: where the line from `a` to the destination
/// transmitter first meets that transmitter's coverage boundary.
pub fn transit_point(a: Point3, f_b: &SphereCoverage) -> Result<Point3, GeometryError> {
    boundary_point_toward(a, f_b)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrajectoryKind {
    /// The straight line `A -> B`.
    Straight,
    /// `A -> T -> B` through the transit point.
    TransitPoint,
    /// `A -> X -> B` through the eligible intersection `X` of the origin and
    /// destination spheres, used when the transit point leaves a gap.
    Lens,
    /// Through the eligible intersections of the trajectory forwarders.
    ForwarderChain,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    /// First is the origin, last the destination.
    pub waypoints: Vec<Point3>,
    /// `legs[i]` lists the transmitters jointly covering
    /// `waypoints[i] -> waypoints[i + 1]`, in id order.
    pub legs: Vec<Vec<DroneId>>,
    pub total_length: f64,
    pub extra_distance: f64,
    pub kind: TrajectoryKind,
    /// Set when the construction had to abandon a transit point that left
    /// part of its leg uncovered.
    pub fallback: bool,
    /// Overlap-graph path from the origin to the destination forwarder.
    pub path: Vec<DroneId>,
}

impl Trajectory {
    fn assemble(
        origin: Point3,
        pieces: Vec<(Point3, Vec<DroneId>)>,
        kind: TrajectoryKind,
        path: Vec<DroneId>,
    ) -> Self {
        let mut waypoints = vec![origin];
        let mut legs = Vec::new();
        for (to, mut cover) in pieces {
            if euclidean_distance(*waypoints.last().unwrap(), to) <= EPS {
                continue;
            }
            cover.sort();
            cover.dedup();
            waypoints.push(to);
            legs.push(cover);
        }
        let total_length: f64 = waypoints.windows(2).map(|w| euclidean_distance(w[0], w[1])).sum();
        let direct = euclidean_distance(origin, *waypoints.last().unwrap());
        Self {
            waypoints,
            legs,
            total_length,
            extra_distance: (total_length - direct).max(0.0),
            kind,
            fallback: false,
            path,
        }
    }

    /// The straight line `a -> b` served by `cover`.
    pub fn straight(a: Point3, b: Point3, cover: Vec<DroneId>) -> Self {
        Self::assemble(a, vec![(b, cover)], TrajectoryKind::Straight, Vec::new())
    }

    pub fn origin(&self) -> Point3 {
        self.waypoints[0]
    }

    pub fn destination(&self) -> Point3 {
        *self.waypoints.last().unwrap()
    }

    /// Position after travelling `s` meters along the trajectory, clamped
    /// to its ends, together with the index of the current leg.
    pub fn position_at_distance(&self, s: f64) -> (Point3, Option<usize>) {
        if s <= 0.0 || self.legs.is_empty() {
            return (self.origin(), (!self.legs.is_empty()).then_some(0));
        }
        let mut remaining = s;
        for (i, w) in self.waypoints.windows(2).enumerate() {
            let len = euclidean_distance(w[0], w[1]);
            if remaining < len {
                return (crate::geometry::point_at(w[0], w[1], remaining / len), Some(i));
            }
            remaining -= len;
        }
        (self.destination(), None)
    }
}

/// Plans transitions over one multicast tree. Holds the transmitter
/// positions and the overlap graph so repeated requests share them.
#[derive(Debug, Clone)]
pub struct Planner {
    radius: f64,
    positions: BTreeMap<DroneId, Point3>,
    transmitters: Vec<DroneId>,
    graph: OverlapGraph,
}

/// A waypoint with the forwarders covering the leg that ends there.
type Piece = (Point3, Vec<DroneId>);

impl Planner {
    pub fn new(tree: &MulticastTree, drones: &[DroneNode], r: f64) -> Self {
        let positions: BTreeMap<DroneId, Point3> = tree
            .transmitters()
            .into_iter()
            .filter_map(|id| drones.iter().find(|d| d.id == id).map(|d| (id, d.position)))
            .collect();
        Self {
            radius: r,
            transmitters: positions.keys().copied().collect(),
            graph: build_overlap_graph(tree, drones, r),
            positions,
        }
    }

    pub fn graph(&self) -> &OverlapGraph {
        &self.graph
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn sphere(&self, id: DroneId) -> Result<SphereCoverage, PlanError> {
        self.positions
            .get(&id)
            .map(|&c| SphereCoverage::new(c, self.radius))
            .ok_or(PlanError::NotATransmitter(id))
    }

    /// Transmitter nearest to `p` whose coverage contains it, ties to the
    /// lowest id.
    pub fn serving_transmitter(&self, p: Point3) -> Option<DroneId> {
        self.positions
            .iter()
            .map(|(&id, &c)| (id, euclidean_distance(c, p)))
            .filter(|&(_, d)| d <= self.radius + EPS)
            .min_by(|x, y| x.1.total_cmp(&y.1).then(x.0.cmp(&y.0)))
            .map(|(id, _)| id)
    }

    pub fn overlapping(&self, u: DroneId, v: DroneId) -> bool {
        self.graph.weight(u, v).is_some()
    }

    /// Straight-line check between the spheres of `f_a` and `f_b`, with every
    /// other transmitter as a bridging candidate.
    pub fn check_straight(
        &self,
        a: Point3,
        b: Point3,
        f_a: DroneId,
        f_b: DroneId,
    ) -> Result<SeamlessVerdict, PlanError> {
        if f_a == f_b {
            return Err(PlanError::SameForwarder);
        }
        let others: Vec<(DroneId, SphereCoverage)> = self
            .transmitters
            .iter()
            .filter(|&&id| id != f_a && id != f_b)
            .map(|&id| (id, SphereCoverage::new(self.positions[&id], self.radius)))
            .collect();
        Ok(straight_line_verdict(a, b, &self.sphere(f_a)?, &self.sphere(f_b)?, &others))
    }

    fn check_request(&self, req: &TransitionRequest) -> Result<(), PlanError> {
        for (what, point, forwarder) in [
            ("origin", req.origin, req.origin_forwarder),
            ("destination", req.destination, req.destination_forwarder),
        ] {
            if !self.sphere(forwarder)?.contains(point) {
                return Err(PlanError::OutOfRange { what, point, forwarder });
            }
        }
        Ok(())
    }

    fn leg_covered(&self, from: Point3, to: Point3, cover: &[DroneId]) -> bool {
        let spheres: Vec<SphereCoverage> = cover
            .iter()
            .map(|&id| SphereCoverage::new(self.positions[&id], self.radius))
            .collect();
        is_segment_covered(from, to, &spheres)
    }

    /// First leg whose annotated transmitters leave a gap, if any.
    pub fn first_uncovered_leg(&self, t: &Trajectory) -> Option<usize> {
        t.waypoints
            .windows(2)
            .zip(&t.legs)
            .position(|(w, cover)| !self.leg_covered(w[0], w[1], cover))
    }

    fn validated(&self, t: Trajectory) -> Result<Trajectory, PlanError> {
        match self.first_uncovered_leg(&t) {
            None => Ok(t),
            Some(leg) => Err(PlanError::Uncovered { leg }),
        }
    }

    /// Pieces from `a` to `target` (which lies on `via`'s boundary or
    /// inside it), starting in `from`'s coverage. Straight when seamless,
    /// otherwise through the transit point on `via`, otherwise through the
    /// lens between `from` and `via`. The flag reports the lens fallback.
    fn bridge(
        &self,
        a: Point3,
        target: Point3,
        from: DroneId,
        via: DroneId,
        lens_target: Point3,
    ) -> Result<(Vec<Piece>, bool), PlanError> {
        let verdict = self.check_straight(a, target, from, via)?;
        if verdict.seamless {
            let mut cover = vec![from, via];
            cover.extend(verdict.witness);
            return Ok((vec![(target, cover)], false));
        }
        let t = transit_point(a, &self.sphere(via)?)?;
        let pieces = vec![(t, vec![from, via]), (target, vec![via])];
        let through_t = Trajectory::assemble(a, pieces.clone(), TrajectoryKind::TransitPoint, Vec::new());
        if self.first_uncovered_leg(&through_t).is_none() {
            return Ok((pieces, false));
        }
        let x = eligible_intersection(&self.sphere(from)?, &self.sphere(via)?, lens_target)?;
        Ok((vec![(x, vec![from]), (target, vec![via])], true))
    }

    pub fn plan(&self, req: &TransitionRequest) -> Result<Trajectory, PlanError> {
        self.check_request(req)?;
        let (f_a, f_b) = (req.origin_forwarder, req.destination_forwarder);
        if f_a == f_b {
            let t = Trajectory::assemble(
                req.origin,
                vec![(req.destination, vec![f_a])],
                TrajectoryKind::Straight,
                vec![f_a],
            );
            return self.validated(t);
        }
        if self.overlapping(f_a, f_b) {
            self.plan_overlapping(req)
        } else {
            self.plan_non_overlapping(req)
        }
    }

    /// Transition between transmitters whose coverage overlaps.
    pub fn plan_overlapping(&self, req: &TransitionRequest) -> Result<Trajectory, PlanError> {
        self.check_request(req)?;
        let (a, b) = (req.origin, req.destination);
        let (f_a, f_b) = (req.origin_forwarder, req.destination_forwarder);
        let (pieces, fallback) = self.bridge(a, b, f_a, f_b, b)?;
        let kind = match (pieces.len(), fallback) {
            (1, _) => TrajectoryKind::Straight,
            (_, false) => TrajectoryKind::TransitPoint,
            (_, true) => TrajectoryKind::Lens,
        };
        let mut t = Trajectory::assemble(a, pieces, kind, vec![f_a, f_b]);
        t.fallback = fallback;
        self.validated(t)
    }

    /// Transition between transmitters whose coverage does not overlap,
    /// through the trajectory forwarders on the minimum-weight path.
    pub fn plan_non_overlapping(&self, req: &TransitionRequest) -> Result<Trajectory, PlanError> {
        self.check_request(req)?;
        let (a, b) = (req.origin, req.destination);
        let (f_a, f_b) = (req.origin_forwarder, req.destination_forwarder);
        let path = min_weight_path(&self.graph, f_a, f_b)?;
        let trajectory_forwarders = &path[1..path.len() - 1];
        if trajectory_forwarders.is_empty() {
            // adjacent on the graph means overlapping
            return self.plan_overlapping(req);
        }

        let mut eis = Vec::with_capacity(trajectory_forwarders.len());
        for (i, &tf) in trajectory_forwarders.iter().enumerate() {
            let next = trajectory_forwarders.get(i + 1).copied().unwrap_or(f_b);
            eis.push(eligible_intersection(&self.sphere(tf)?, &self.sphere(next)?, b)?);
        }

        let first_tf = trajectory_forwarders[0];
        let (mut pieces, fallback) = self.bridge(a, eis[0], f_a, first_tf, b)?;
        for (i, &tf) in trajectory_forwarders.iter().enumerate().skip(1) {
            // eis[i - 1] and eis[i] both lie on tf's boundary
            pieces.push((eis[i], vec![tf]));
        }
        pieces.push((b, vec![f_b]));

        let mut t = Trajectory::assemble(a, pieces, TrajectoryKind::ForwarderChain, path);
        t.fallback = fallback;
        self.validated(t)
    }

    /// Plans every request; runs on the rayon pool with the `parallel`
    /// feature.
    pub fn plan_many(&self, requests: &[TransitionRequest]) -> Vec<Result<Trajectory, PlanError>> {
        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            requests.par_iter().map(|r| self.plan(r)).collect()
        }
        #[cfg(not(feature = "parallel"))]
        {
            self.plan_many_sequential(requests)
        }
    }

    pub fn plan_many_sequential(&self, requests: &[TransitionRequest]) -> Vec<Result<Trajectory, PlanError>> {
        requests.iter().map(|r| self.plan(r)).collect()
    }
}

/// One-shot seamlessness check against the transmitters in `forwarders`.
pub fn check_straight_seamless(
    req: &TransitionRequest,
    forwarders: &[DroneNode],
    r: f64,
) -> Result<SeamlessVerdict, PlanError> {
    let find = |id: DroneId| {
        forwarders
            .iter()
            .find(|d| d.id == id)
            .map(|d| SphereCoverage::new(d.position, r))
            .ok_or(PlanError::NotATransmitter(id))
    };
    let (f_a, f_b) = (req.origin_forwarder, req.destination_forwarder);
    if f_a == f_b {
        return Err(PlanError::SameForwarder);
    }
    let origin = find(f_a)?;
    let dest = find(f_b)?;
    let others: Vec<(DroneId, SphereCoverage)> = forwarders
        .iter()
        .filter(|d| d.id != f_a && d.id != f_b)
        .map(|d| (d.id, SphereCoverage::new(d.position, r)))
        .collect();
    Ok(straight_line_verdict(req.origin, req.destination, &origin, &dest, &others))
}

/// Builds a fresh planner for the tree and plans a single request.
pub fn plan(
    req: &TransitionRequest,
    tree: &MulticastTree,
    drones: &[DroneNode],
    r: f64,
) -> Result<Trajectory, PlanError> {
    Planner::new(tree, drones, r).plan(req)
}
