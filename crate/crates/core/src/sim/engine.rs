//! Time-stepped multicast delivery over the LCRT tree.
//!
//! Each step lets every transmitter start as many queued transmissions as
//! fit before the step ends, so a transmitter never sends more than
//! `channel_rate * timestep` bits per step. Transmitters are visited in
//! level order, which lets a packet cross several hops inside one step when
//! the timing allows it. Timestamps themselves are exact, not rounded to
//! step boundaries.

use std::collections::{BTreeMap, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::metrics::{Delivery, Metrics, PacketRecord};
use super::scenario::{MobileSpec, Policy, Scenario};
use crate::geometry::{euclidean_distance, Point3};
use crate::lcrt::{build_lcrt_tree_with_leaves, DroneId, MulticastTree};
use crate::planner::{PlanError, Planner, Trajectory, TransitionRequest};

/// Reception slack around the coverage radius, meters.
const RECEPTION_SLACK_M: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("no seamless trajectory for mobile drone {mobile}: {error}")]
    PlanningFailure { mobile: DroneId, error: PlanError },
}

/// Where a mobile is and who may serve it over time.
#[derive(Debug, Clone)]
pub struct MobilePlan {
    pub spec: MobileSpec,
    pub origin_forwarder: DroneId,
    pub destination_forwarder: Option<DroneId>,
    pub trajectory: Trajectory,
    /// Transmitters serving the mobile after it arrives.
    pub after_arrival: Vec<DroneId>,
}

impl MobilePlan {
    pub fn arrival_time(&self) -> f64 {
        self.spec.start_time + self.trajectory.total_length / self.spec.speed
    }

    /// Position at time `t` and the transmitters allowed to serve it.
    pub fn state_at(&self, t: f64) -> (Point3, &[DroneId]) {
        if t < self.spec.start_time {
            return (self.spec.origin, std::slice::from_ref(&self.origin_forwarder));
        }
        let travelled = (t - self.spec.start_time) * self.spec.speed;
        match self.trajectory.position_at_distance(travelled) {
            (p, Some(leg)) => (p, &self.trajectory.legs[leg]),
            (p, None) => (p, &self.after_arrival),
        }
    }
}

/// Tree, per-mobile plans and receiver ordering shared by a run.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub tree: MulticastTree,
    pub planner: Planner,
    pub mobiles: Vec<MobilePlan>,
}

/// The request for moving `spec.drone`: served by its tree parent at the
/// origin, and by the nearest transmitter covering the destination.
pub fn transition_request(
    tree: &MulticastTree,
    planner: &Planner,
    spec: &MobileSpec,
) -> Result<TransitionRequest, PlanError> {
    let origin_forwarder = tree.parent[&spec.drone];
    let destination_forwarder = planner.serving_transmitter(spec.destination).ok_or(PlanError::OutOfRange {
        what: "destination",
        point: spec.destination,
        forwarder: origin_forwarder,
    })?;
    Ok(TransitionRequest {
        mobile: spec.drone,
        origin: spec.origin,
        destination: spec.destination,
        origin_forwarder,
        destination_forwarder,
    })
}

pub fn prepare(scenario: &Scenario) -> Result<Prepared, SimError> {
    scenario.validate().map_err(SimError::InvalidScenario)?;
    let leaves = scenario.mobile_ids();
    let tree = build_lcrt_tree_with_leaves(&scenario.drones, scenario.radius, &leaves)
        .map_err(|e| SimError::InvalidScenario(e.to_string()))?;
    let planner = Planner::new(&tree, &scenario.drones, scenario.radius);

    let mut mobiles = Vec::with_capacity(scenario.mobiles.len());
    for spec in &scenario.mobiles {
        let origin_forwarder = tree.parent[&spec.drone];
        let destination_forwarder = planner.serving_transmitter(spec.destination);
        let plan = match scenario.policy {
            Policy::Etta => {
                let fail = |error| SimError::PlanningFailure { mobile: spec.drone, error };
                let req = transition_request(&tree, &planner, spec).map_err(fail)?;
                let trajectory = planner.plan(&req).map_err(fail)?;
                MobilePlan {
                    spec: *spec,
                    origin_forwarder,
                    destination_forwarder,
                    trajectory,
                    after_arrival: vec![req.destination_forwarder],
                }
            }
            Policy::NoHandover => MobilePlan {
                spec: *spec,
                origin_forwarder,
                destination_forwarder,
                trajectory: Trajectory::straight(spec.origin, spec.destination, vec![origin_forwarder]),
                after_arrival: destination_forwarder.into_iter().collect(),
            },
        };
        mobiles.push(plan);
    }
    Ok(Prepared { tree, planner, mobiles })
}

struct Transmitter {
    id: DroneId,
    position: Point3,
    queue: VecDeque<(usize, f64)>,
    free_at: f64,
    /// Receiver indices of static children.
    receivers: Vec<usize>,
    /// Transmitter indices of children that relay.
    relays: Vec<usize>,
    /// Receiver indices of every static drone below this one.
    descendants: Vec<usize>,
}

struct Engine<'a> {
    scenario: &'a Scenario,
    transmitters: Vec<Transmitter>,
    mobiles: Vec<(usize, &'a MobilePlan)>,
    records: Vec<PacketRecord>,
    /// Per packet: copies waiting in queues, and whether any transmission
    /// of it lands after the end of the run.
    queued: Vec<u32>,
    late: Vec<bool>,
}

impl Engine<'_> {
    /// Packets of `tx`'s queue still waiting at time `t`. Service is FIFO
    /// and deterministic, so start times follow from the queue alone.
    fn waiting_at(&self, tx: usize, t: f64) -> usize {
        let tx_time = self.scenario.transmission_time();
        let mut free = self.transmitters[tx].free_at;
        let mut waiting = 0;
        for &(_, ready) in &self.transmitters[tx].queue {
            let start = ready.max(free);
            if start >= t {
                waiting += 1;
            }
            free = start + tx_time;
        }
        waiting
    }

    fn enqueue(&mut self, tx: usize, seq: usize, ready: f64) {
        if self.waiting_at(tx, ready) >= self.scenario.queue_capacity {
            for &r in &self.transmitters[tx].descendants {
                let slot = &mut self.records[seq].deliveries[r];
                if *slot == Delivery::InFlight {
                    *slot = Delivery::Dropped;
                }
            }
            return;
        }
        self.transmitters[tx].queue.push_back((seq, ready));
        self.queued[seq] += 1;
    }

    fn broadcast(&mut self, tx: usize, seq: usize, arrival: f64) {
        if arrival >= self.scenario.duration {
            self.late[seq] = true;
            return;
        }
        let record = &mut self.records[seq];
        for &r in &self.transmitters[tx].receivers {
            if record.deliveries[r] == Delivery::InFlight {
                record.deliveries[r] = Delivery::Delivered(arrival);
            }
        }
        let (id, position) = (self.transmitters[tx].id, self.transmitters[tx].position);
        for &(r, plan) in &self.mobiles {
            if record.deliveries[r] != Delivery::InFlight {
                continue;
            }
            let (at, serving) = plan.state_at(arrival);
            if serving.contains(&id)
                && euclidean_distance(at, position) <= self.scenario.radius + RECEPTION_SLACK_M
            {
                record.deliveries[r] = Delivery::Delivered(arrival);
            }
        }
        for i in 0..self.transmitters[tx].relays.len() {
            let child = self.transmitters[tx].relays[i];
            self.enqueue(child, seq, arrival);
        }
    }

    fn step(&mut self, end: f64, tx_time: f64, latency: f64) {
        for tx in 0..self.transmitters.len() {
            loop {
                let t = &mut self.transmitters[tx];
                let Some(&(seq, ready)) = t.queue.front() else { break };
                let start = ready.max(t.free_at);
                if start >= end {
                    break;
                }
                t.queue.pop_front();
                t.free_at = start + tx_time;
                let arrival = t.free_at + latency;
                self.queued[seq] -= 1;
                self.broadcast(tx, seq, arrival);
            }
        }
    }
}

/// Receivers in id order: every drone except the source, with a flag for
/// mobiles.
pub fn receivers(scenario: &Scenario, tree: &MulticastTree) -> Vec<(DroneId, bool)> {
    let mobile = scenario.mobile_ids();
    let mut ids: Vec<DroneId> = scenario.drones.iter().map(|d| d.id).filter(|&id| id != tree.source).collect();
    ids.sort();
    ids.into_iter().map(|id| (id, mobile.contains(&id))).collect()
}

/// A receiver id and whether it is a mobile.
pub type Receiver = (DroneId, bool);

/// Runs the scenario and returns the raw per-packet records alongside the
/// receiver list they are indexed by.
pub fn run_records(scenario: &Scenario) -> Result<(Prepared, Vec<Receiver>, Vec<PacketRecord>), SimError> {
    let prepared = prepare(scenario)?;
    let tree = &prepared.tree;
    let receiver_list = receivers(scenario, tree);
    let receiver_index: BTreeMap<DroneId, usize> =
        receiver_list.iter().enumerate().map(|(i, &(id, _))| (id, i)).collect();
    let mobile_ids = scenario.mobile_ids();
    let position: BTreeMap<DroneId, Point3> = scenario.drones.iter().map(|d| (d.id, d.position)).collect();

    let mut order = tree.transmitters();
    order.sort_by_key(|id| (tree.level[id], *id));
    let tx_index: BTreeMap<DroneId, usize> = order.iter().enumerate().map(|(i, &id)| (id, i)).collect();

    let descendants_of = |root: DroneId| -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = tree.children(root);
        while let Some(c) = stack.pop() {
            if !mobile_ids.contains(&c) {
                out.push(receiver_index[&c]);
            }
            stack.extend(tree.children(c));
        }
        out.sort();
        out
    };
    let transmitters: Vec<Transmitter> = order
        .iter()
        .map(|&id| {
            let children = tree.children(id);
            Transmitter {
                id,
                position: position[&id],
                queue: VecDeque::new(),
                free_at: 0.0,
                receivers: children
                    .iter()
                    .filter(|c| !mobile_ids.contains(c))
                    .map(|c| receiver_index[c])
                    .collect(),
                relays: children.iter().filter_map(|c| tx_index.get(c).copied()).collect(),
                descendants: descendants_of(id),
            }
        })
        .collect();

    let mobiles: Vec<(usize, &MobilePlan)> = prepared
        .mobiles
        .iter()
        .map(|m| (receiver_index[&m.spec.drone], m))
        .collect();

    let interval = scenario.packet_interval();
    let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed);
    let phase: f64 = rng.gen::<f64>() * interval;

    let mut engine = Engine {
        scenario,
        transmitters,
        mobiles,
        records: Vec::new(),
        queued: Vec::new(),
        late: Vec::new(),
    };
    let source = tx_index[&tree.source];
    let tx_time = scenario.transmission_time();
    let steps = (scenario.duration / scenario.timestep).ceil() as u64;
    let mut next_seq: u64 = 0;
    for k in 0..steps {
        let end = ((k + 1) as f64 * scenario.timestep).min(scenario.duration);
        loop {
            let sent_at = phase + next_seq as f64 * interval;
            if sent_at >= end || sent_at >= scenario.duration {
                break;
            }
            let seq = engine.records.len();
            engine.records.push(PacketRecord {
                sequence: next_seq,
                sent_at,
                deliveries: vec![Delivery::InFlight; receiver_list.len()],
            });
            engine.queued.push(0);
            engine.late.push(false);
            engine.enqueue(source, seq, sent_at);
            next_seq += 1;
        }
        engine.step(end, tx_time, scenario.per_hop_latency);
    }

    // Anything undecided whose packet is no longer alive was lost.
    let Engine { mut records, queued, late, .. } = engine;
    for (seq, record) in records.iter_mut().enumerate() {
        let alive = queued[seq] > 0 || late[seq];
        for slot in record.deliveries.iter_mut() {
            if *slot == Delivery::InFlight && !alive {
                *slot = Delivery::Dropped;
            }
        }
    }
    Ok((prepared, receiver_list, records))
}

pub fn run(scenario: &Scenario) -> Result<Metrics, SimError> {
    let (prepared, receiver_list, records) = run_records(scenario)?;
    let extra = if prepared.mobiles.is_empty() {
        0.0
    } else {
        prepared.mobiles.iter().map(|m| m.trajectory.extra_distance).sum::<f64>() / prepared.mobiles.len() as f64
    };
    Ok(Metrics::from_records(
        &records,
        &receiver_list,
        scenario.packet_size,
        scenario.duration,
        extra,
    ))
}
