mod common;

use aerocast_core::geometry::{is_segment_covered, max_uncovered_gap, segment_sphere_intersections, SphereCoverage};
use aerocast_core::planner::{straight_line_verdict, transit_point};
use aerocast_core::sim::transition_request;
use aerocast_core::{
    build_lcrt_tree, check_straight_seamless, plan, DroneId, DroneNode, Planner, SeamlessReason, TrajectoryKind,
    TransitionRequest,
};
use common::{dist, p, random_transition, two_forwarders};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn request(a: aerocast_core::Point3, b: aerocast_core::Point3, f_a: u32, f_b: u32) -> TransitionRequest {
    TransitionRequest {
        mobile: DroneId(99),
        origin: a,
        destination: b,
        origin_forwarder: DroneId(f_a),
        destination_forwarder: DroneId(f_b),
    }
}

#[test]
fn verdicts_are_sound_and_match_crossing_order() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for _ in 0..2000 {
        let inst = two_forwarders(&mut rng);
        let others: Vec<_> = inst.others.iter().enumerate().map(|(i, s)| (DroneId(i as u32 + 2), *s)).collect();
        let v = straight_line_verdict(inst.a, inst.b, &inst.origin, &inst.dest, &others);
        if v.seamless {
            assert!(is_segment_covered(inst.a, inst.b, &inst.all_spheres()));
        }
        let t_c = segment_sphere_intersections(inst.a, inst.b, &inst.origin).last().copied().unwrap_or(1.0);
        let t_d = segment_sphere_intersections(inst.a, inst.b, &inst.dest).first().copied().unwrap_or(0.0);
        assert_eq!(v.reason == SeamlessReason::WithinEntryExit, t_c >= t_d);
    }
}

#[test]
fn seamless_check_examples() {
    let nodes = |third: bool| {
        let mut v = vec![DroneNode::new(0, p(0.0, 0.0, 0.0)), DroneNode::new(1, p(12.0, 0.0, 0.0))];
        if third {
            v.push(DroneNode::new(2, p(6.0, 0.0, 0.0)));
        }
        v
    };
    let v = check_straight_seamless(&request(p(-5.0, 0.0, 0.0), p(17.0, 0.0, 0.0), 0, 1), &nodes(false), 10.0).unwrap();
    assert_eq!(v.reason, SeamlessReason::WithinEntryExit);
    assert!(dist(v.exit.unwrap(), p(10.0, 0.0, 0.0)) < 1e-9);
    assert!(dist(v.entry.unwrap(), p(2.0, 0.0, 0.0)) < 1e-9);

    let far = vec![
        DroneNode::new(0, p(0.0, 0.0, 0.0)),
        DroneNode::new(1, p(30.0, 0.0, 0.0)),
        DroneNode::new(2, p(15.0, 0.0, 0.0)),
    ];
    let req = request(p(-5.0, 0.0, 0.0), p(35.0, 0.0, 0.0), 0, 1);
    let v = check_straight_seamless(&req, &far, 10.0).unwrap();
    assert_eq!(v.reason, SeamlessReason::CoveredByThirdForwarder);
    assert_eq!(v.witness, Some(DroneId(2)));
    let v = check_straight_seamless(&req, &far[..2], 10.0).unwrap();
    assert_eq!(v.reason, SeamlessReason::NotSeamless);
}

#[test]
fn transit_point_trajectory_on_axis() {
    // F_A at 0, F_B at 15, r = 10: T is F_B's near boundary point on the axis
    let drones = vec![DroneNode::source(0, p(0.0, 0.0, 0.0)), DroneNode::new(1, p(8.0, 0.0, 0.0)), DroneNode::new(2, p(15.0, 0.0, 0.0)), DroneNode::new(3, p(24.0, 0.0, 0.0))];
    let tree = build_lcrt_tree(&drones, 10.0).unwrap();
    assert!(tree.is_transmitter(DroneId(2)));
    let t = transit_point(p(-8.0, 0.0, 0.0), &SphereCoverage::new(p(15.0, 0.0, 0.0), 10.0)).unwrap();
    assert_eq!(t, p(5.0, 0.0, 0.0));
}

#[test]
fn planned_trajectories_are_covered() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let (mut planned, mut chains) = (0, 0);
    while planned < 300 {
        let Some(tr) = random_transition(&mut rng) else { continue };
        let planner = Planner::new(&tr.tree, &tr.drones, tr.r);
        let req = transition_request(&tr.tree, &planner, &tr.spec).unwrap();
        let traj = planner.plan(&req).unwrap_or_else(|e| panic!("{e}: {req:?}"));
        planned += 1;
        chains += (traj.kind == TrajectoryKind::ForwarderChain) as usize;

        assert_eq!(traj.origin(), tr.spec.origin);
        assert_eq!(traj.destination(), tr.spec.destination);
        assert!(traj.extra_distance >= 0.0);
        assert_eq!(traj.legs.len() + 1, traj.waypoints.len());
        let all: Vec<SphereCoverage> = tr.tree.transmitters().iter().map(|&id| planner.sphere(id).unwrap()).collect();
        for (i, w) in traj.waypoints.windows(2).enumerate() {
            assert!(dist(w[0], w[1]) > 0.0, "repeated waypoint");
            let cover: Vec<SphereCoverage> = traj.legs[i].iter().map(|&id| planner.sphere(id).unwrap()).collect();
            assert!(max_uncovered_gap(w[0], w[1], &cover) <= 1e-6, "leg {i} of {traj:?}");
            assert!(max_uncovered_gap(w[0], w[1], &all) <= 1e-6);
        }
        let length: f64 = traj.waypoints.windows(2).map(|w| dist(w[0], w[1])).sum();
        assert!((length - traj.total_length).abs() < 1e-9 * (1.0 + length));
        // bit-identical on a second call
        assert_eq!(planner.plan(&req).unwrap(), traj);
    }
    assert!(chains > 30, "only {chains} forwarder chains exercised");
}

#[test]
fn parallel_and_sequential_batches_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let tr = std::iter::repeat_with(|| random_transition(&mut rng)).flatten().next().unwrap();
    let planner = Planner::new(&tr.tree, &tr.drones, tr.r);
    let base = transition_request(&tr.tree, &planner, &tr.spec).unwrap();
    let requests: Vec<_> = (0..50)
        .map(|i| TransitionRequest { destination: base.destination + p(0.01 * i as f64, 0.0, 0.0), ..base })
        .collect();
    assert_eq!(planner.plan_many(&requests), planner.plan_many_sequential(&requests));
}

#[test]
fn relay_chain_goes_through_the_shared_boundary() {
    // mobile 6 at A, served by source 3; destination B served by 5; 3 and 5
    // are 1500 m apart with r = 500, and 1 overlaps both
    let drones = vec![
        DroneNode::source(3, p(0.0, 0.0, 100.0)),
        DroneNode::new(1, p(750.0, 0.0, 100.0)),
        DroneNode::new(5, p(1500.0, 0.0, 100.0)),
        DroneNode::new(2, p(700.0, 300.0, 100.0)),
        DroneNode::new(8, p(400.0, 290.0, 100.0)),
        DroneNode::new(9, p(1150.0, 290.0, 100.0)),
        DroneNode::new(7, p(1900.0, 0.0, 100.0)),
        DroneNode::new(6, p(250.0, 0.0, 100.0)),
    ];
    let (a, b) = (p(250.0, 0.0, 100.0), p(1500.0, 150.0, 100.0));
    let tree = aerocast_core::lcrt::build_lcrt_tree_with_leaves(&drones, 500.0, &[DroneId(6)].into_iter().collect()).unwrap();
    assert_eq!(tree.parent[&DroneId(6)], DroneId(3));
    let req = TransitionRequest { mobile: DroneId(6), origin: a, destination: b, origin_forwarder: DroneId(3), destination_forwarder: DroneId(5) };
    let traj = plan(&req, &tree, &drones, 500.0).unwrap();
    assert_eq!(traj.path, vec![DroneId(3), DroneId(1), DroneId(5)]);
    assert_eq!(traj.waypoints.len(), 3);
    // D: on the x = 1125 circle shared by 1 and 5, on B's side
    let d = traj.waypoints[1];
    let circle_radius = (500.0f64.powi(2) - 375.0f64.powi(2)).sqrt();
    assert!((d.x - 1125.0).abs() < 1e-9);
    assert!((d.y - circle_radius).abs() < 1e-9);
    assert!((d.z - 100.0).abs() < 1e-9);
}
