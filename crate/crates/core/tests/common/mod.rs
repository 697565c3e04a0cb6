//! Instance generators and independent oracles shared by the integration
//! tests. Nothing here calls into the library's geometry beyond plain
//! vector arithmetic.
#![allow(dead_code)]

use std::collections::BTreeMap;

use aerocast_core::geometry::SphereCoverage;
use aerocast_core::sim::{MobileSpec, Policy, Scenario};
use aerocast_core::{DroneId, DroneNode, Point3};
use rand::Rng;

pub fn p(x: f64, y: f64, z: f64) -> Point3 {
    Point3::new(x, y, z)
}

pub fn dist(a: Point3, b: Point3) -> f64 {
    ((a.x - b.x).powi(2) + (a.y - b.y).powi(2) + (a.z - b.z).powi(2)).sqrt()
}

pub fn lerp(a: Point3, b: Point3, t: f64) -> Point3 {
    p(a.x + t * (b.x - a.x), a.y + t * (b.y - a.y), a.z + t * (b.z - a.z))
}

pub fn random_point(rng: &mut impl Rng, half: f64) -> Point3 {
    p(rng.gen_range(-half..half), rng.gen_range(-half..half), rng.gen_range(-half..half))
}

/// Uniform point inside the ball, by rejection.
pub fn point_in_ball(rng: &mut impl Rng, s: &SphereCoverage) -> Point3 {
    loop {
        let q = random_point(rng, 1.0);
        if q.x * q.x + q.y * q.y + q.z * q.z <= 1.0 {
            return p(s.center.x + q.x * s.radius, s.center.y + q.y * s.radius, s.center.z + q.z * s.radius);
        }
    }
}

/// Two spheres plus A in the first, B in the second, and up to three
/// extra spheres scattered around the midpoint.
pub struct TwoForwarders {
    pub origin: SphereCoverage,
    pub dest: SphereCoverage,
    pub others: Vec<SphereCoverage>,
    pub a: Point3,
    pub b: Point3,
}

impl TwoForwarders {
    pub fn all_spheres(&self) -> Vec<SphereCoverage> {
        let mut v = vec![self.origin, self.dest];
        v.extend(self.others.iter().copied());
        v
    }
}

pub fn two_forwarders(rng: &mut impl Rng) -> TwoForwarders {
    let r1 = rng.gen_range(10.0..60.0);
    let r2 = r1 * rng.gen_range(0.5..2.0);
    let origin = SphereCoverage::new(random_point(rng, 100.0), r1);
    let dest = SphereCoverage::new(random_point(rng, 100.0), r2);
    let mid = lerp(origin.center, dest.center, 0.5);
    let others = (0..rng.gen_range(0..=3))
        .map(|_| {
            let c = p(
                mid.x + rng.gen_range(-40.0..40.0),
                mid.y + rng.gen_range(-40.0..40.0),
                mid.z + rng.gen_range(-40.0..40.0),
            );
            SphereCoverage::new(c, rng.gen_range(10.0..60.0))
        })
        .collect();
    let a = point_in_ball(rng, &origin);
    let b = point_in_ball(rng, &dest);
    TwoForwarders { origin, dest, others, a, b }
}

/// Roots of `|a + t (b - a) - c|^2 = r^2` by the textbook formula, ascending.
pub fn line_sphere_roots(a: Point3, b: Point3, s: &SphereCoverage) -> Option<(f64, f64)> {
    let d = b - a;
    let f = a - s.center;
    let qa = d.dot(d);
    let qb = 2.0 * f.dot(d);
    let qc = f.dot(f) - s.radius * s.radius;
    let disc = qb * qb - 4.0 * qa * qc;
    if disc < 0.0 {
        return None;
    }
    let sq = disc.sqrt();
    Some(((-qb - sq) / (2.0 * qa), (-qb + sq) / (2.0 * qa)))
}

/// Largest uncovered stretch of `a -> b` in meters, by sampling `n + 1`
/// evenly spaced points. Resolution is `|ab| / n`.
pub fn sampled_gap(a: Point3, b: Point3, spheres: &[SphereCoverage], n: usize) -> f64 {
    let len = dist(a, b);
    let covered = |t: f64| {
        let q = lerp(a, b, t);
        spheres.iter().any(|s| dist(q, s.center) <= s.radius)
    };
    let (mut best, mut run_start): (f64, Option<usize>) = (0.0, None);
    for i in 0..=n {
        let t = i as f64 / n as f64;
        match (covered(t), run_start) {
            (false, None) => run_start = Some(i),
            (true, Some(s)) => {
                best = best.max((i - s) as f64 * len / n as f64);
                run_start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = run_start {
        best = best.max((n + 1 - s) as f64 * len / n as f64);
    }
    best
}

/// Random swarm of `n` drones in a cube, source id 0. Not necessarily
/// connected.
pub fn random_swarm(rng: &mut impl Rng, n: usize, half: f64) -> Vec<DroneNode> {
    (0..n as u32)
        .map(|i| {
            let q = random_point(rng, half);
            if i == 0 {
                DroneNode::source(i, q)
            } else {
                DroneNode::new(i, q)
            }
        })
        .collect()
}

/// Connected swarm: each drone is placed 0.5r to 0.95r from a randomly
/// chosen earlier one. Source id 0.
pub fn grown_swarm(rng: &mut impl Rng, n: usize, r: f64) -> Vec<DroneNode> {
    let mut out = vec![DroneNode::source(0, Point3::ORIGIN)];
    while out.len() < n {
        // favour the newest drone so swarms stretch out into chains
        let k = if rng.gen_bool(0.6) { out.len() - 1 } else { rng.gen_range(0..out.len()) };
        let anchor = out[k].position;
        let dir = random_point(rng, 1.0);
        let Some(unit) = dir.normalized() else { continue };
        let q = anchor + unit * (r * rng.gen_range(0.5..0.95));
        out.push(DroneNode::new(out.len() as u32, q));
    }
    out
}

/// Hop counts from node 0 by Floyd-Warshall over the `d <= r` relation.
pub fn hop_counts(drones: &[DroneNode], r: f64) -> Vec<Option<u32>> {
    let n = drones.len();
    let inf = u32::MAX / 4;
    let mut m = vec![vec![inf; n]; n];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                m[i][j] = 0;
            } else if dist(drones[i].position, drones[j].position) <= r {
                m[i][j] = 1;
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if m[i][k] + m[k][j] < m[i][j] {
                    m[i][j] = m[i][k] + m[k][j];
                }
            }
        }
    }
    m[0].iter().map(|&h| (h < inf).then_some(h)).collect()
}

/// Minimum weight over every simple path `from -> to`, summing edge
/// weights in path order. Edges are pairs with center distance `< 2r`.
pub fn brute_force_min_weight(positions: &BTreeMap<DroneId, Point3>, r: f64, from: DroneId, to: DroneId) -> Option<f64> {
    let ids: Vec<DroneId> = positions.keys().copied().collect();
    let w = |u: DroneId, v: DroneId| {
        let d = dist(positions[&u], positions[&v]);
        (d < 2.0 * r).then_some(d)
    };
    fn walk(
        at: DroneId,
        to: DroneId,
        acc: f64,
        seen: &mut Vec<DroneId>,
        ids: &[DroneId],
        w: &dyn Fn(DroneId, DroneId) -> Option<f64>,
        best: &mut Option<f64>,
    ) {
        if at == to {
            *best = Some(best.map_or(acc, |b| b.min(acc)));
            return;
        }
        for &v in ids {
            if seen.contains(&v) {
                continue;
            }
            if let Some(x) = w(at, v) {
                seen.push(v);
                walk(v, to, acc + x, seen, ids, w, best);
                seen.pop();
            }
        }
    }
    let mut best = None;
    walk(from, to, 0.0, &mut vec![from], &ids, &w, &mut best);
    best
}

/// Static part of a scenario with an uncovered stretch on the mobile's
/// straight line: source 0, relays 1 and 2 one hop out, leaves 3 and 4
/// behind them, and mobile 5 served by relay 1 heading into relay 2's
/// coverage. Relays 1 and 2 sit at the same depth.
pub fn gap_scenario(policy: Policy, traffic_rate: f64) -> Scenario {
    let a = p(980.0, 300.0, 100.0);
    let drones = vec![
        DroneNode::source(0, p(0.0, 0.0, 100.0)),
        DroneNode::new(1, p(450.0, 300.0, 100.0)),
        DroneNode::new(2, p(450.0, -300.0, 100.0)),
        DroneNode::new(3, p(700.0, 700.0, 100.0)),
        DroneNode::new(4, p(700.0, -700.0, 100.0)),
        DroneNode::new(5, a),
    ];
    let mut s = Scenario::new(drones, 560.0, traffic_rate);
    s.mobiles = vec![MobileSpec {
        drone: DroneId(5),
        origin: a,
        destination: p(980.0, -300.0, 100.0),
        speed: 10.0,
        start_time: 40.0,
    }];
    s.policy = policy;
    s.seed = 11;
    s
}

/// Seconds a NoHandover mobile spends without service: from leaving its
/// parent's sphere until it reaches the destination.
pub fn nohandover_outage(spec: &MobileSpec, parent: Point3, r: f64) -> f64 {
    let sphere = SphereCoverage::new(parent, r);
    let len = dist(spec.origin, spec.destination);
    let exit = match line_sphere_roots(spec.origin, spec.destination, &sphere) {
        Some((_, t2)) if t2 < 1.0 => t2,
        _ => 1.0,
    };
    (1.0 - exit) * len / spec.speed
}

/// A connected swarm of 5-30 drones with one mobile leaf and a destination
/// inside some transmitter's sphere other than the mobile's parent.
pub struct Transition {
    pub drones: Vec<DroneNode>,
    pub r: f64,
    pub spec: MobileSpec,
    pub tree: aerocast_core::MulticastTree,
}

pub fn random_transition(rng: &mut impl Rng) -> Option<Transition> {
    use aerocast_core::lcrt::build_lcrt_tree_with_leaves;
    let n = rng.gen_range(5..=30);
    let r = 100.0;
    let drones = grown_swarm(rng, n, r);
    let mobile = DroneId(rng.gen_range(1..n as u32));
    let leaves = [mobile].into_iter().collect();
    let tree = build_lcrt_tree_with_leaves(&drones, r, &leaves).ok()?;
    let parent = tree.parent[&mobile];
    let transmitters = tree.transmitters();
    let pos: BTreeMap<DroneId, Point3> = drones.iter().map(|d| (d.id, d.position)).collect();
    let others: Vec<DroneId> = transmitters.iter().copied().filter(|&t| t != parent).collect();
    if others.is_empty() {
        return None;
    }
    // half the time insist on a destination forwarder that does not overlap
    // the parent, so forwarder chains get exercised
    let far: Vec<DroneId> = others.iter().copied().filter(|t| dist(pos[t], pos[&parent]) >= 2.0 * r).collect();
    let pool = if !far.is_empty() && rng.gen_bool(0.5) { &far } else { &others };
    let target = pool[rng.gen_range(0..pool.len())];
    let destination = point_in_ball(rng, &SphereCoverage::new(pos[&target], r));
    let origin = pos[&mobile];
    if dist(origin, destination) < 1e-6 {
        return None;
    }
    let spec = MobileSpec { drone: mobile, origin, destination, speed: 10.0, start_time: 0.0 };
    Some(Transition { drones, r, spec, tree })
}
