//! Ready-made scenarios.

use crate::geometry::Point3;
use crate::lcrt::{DroneId, DroneNode};
use crate::sim::{MobileSpec, Policy, Scenario, DEFAULT_RADIUS_M};

/// Nine drones at roughly 100 m altitude with one mobile receiver (drone 5)
/// flying 102.6 m at 10 m/s. Its straight line leaves the source's
/// coverage about 30 m before entering the coverage of forwarder 4, and the
/// two are too far apart to overlap, so the planned route goes through the
/// relay chain above.
pub fn small_group(policy: Policy, traffic_rate: f64) -> Scenario {
    let at = |x, y, z| Point3::new(x, y, z);
    let origin = at(530.0, 0.0, 100.0);
    let drones = vec![
        DroneNode::source(0, at(0.0, 0.0, 100.0)),
        DroneNode::new(1, at(100.0, 500.0, 100.0)),
        DroneNode::new(2, at(575.0, 700.0, 120.0)),
        DroneNode::new(3, at(1050.0, 500.0, 100.0)),
        DroneNode::new(4, at(1150.0, 0.0, 100.0)),
        DroneNode::new(5, origin),
        DroneNode::new(6, at(200.0, -300.0, 90.0)),
        DroneNode::new(7, at(1550.0, 200.0, 100.0)),
        DroneNode::new(8, at(900.0, 900.0, 110.0)),
    ];
    let mut s = Scenario::new(drones, DEFAULT_RADIUS_M, traffic_rate);
    s.mobiles = vec![MobileSpec {
        drone: DroneId(5),
        origin,
        destination: at(632.6, 0.0, 100.0),
        speed: 10.0,
        start_time: 50.0,
    }];
    s.policy = policy;
    s.seed = 7;
    s
}
