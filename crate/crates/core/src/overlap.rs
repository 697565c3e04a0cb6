//! Weighted overlap graph over the transmitting drones (source and
//! forwarders). Two transmitters are adjacent when their coverage spheres
//! intersect in a proper circle; the edge weight is their center distance.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap};
use std::fmt::Write as _;

use thiserror::Error;

use crate::geometry::{euclidean_distance, Point3, SphereCoverage};
use crate::lcrt::{DroneId, DroneNode, MulticastTree};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("drone {0} is not a node of the overlap graph")]
    UnknownNode(DroneId),
    #[error("no overlapping path from {from} to {to}")]
    NoPath { from: DroneId, to: DroneId },
}

#[derive(Debug, Clone, PartialEq)]
pub struct OverlapGraph {
    positions: BTreeMap<DroneId, Point3>,
    adjacency: BTreeMap<DroneId, Vec<(DroneId, f64)>>,
}

impl OverlapGraph {
    /// Graph over arbitrary transmitters sharing one coverage radius.
    pub fn from_positions(nodes: impl IntoIterator<Item = (DroneId, Point3)>, r: f64) -> Self {
        let positions: BTreeMap<DroneId, Point3> = nodes.into_iter().collect();
        let mut adjacency: BTreeMap<DroneId, Vec<(DroneId, f64)>> =
            positions.keys().map(|&id| (id, Vec::new())).collect();
        let ids: Vec<DroneId> = positions.keys().copied().collect();
        for (i, &u) in ids.iter().enumerate() {
            for &v in &ids[i + 1..] {
                let (pu, pv) = (positions[&u], positions[&v]);
                let su = SphereCoverage::new(pu, r);
                let sv = SphereCoverage::new(pv, r);
                if su.overlaps(&sv) {
                    let w = euclidean_distance(pu, pv);
                    adjacency.get_mut(&u).unwrap().push((v, w));
                    adjacency.get_mut(&v).unwrap().push((u, w));
                }
            }
        }
        Self { positions, adjacency }
    }

    pub fn nodes(&self) -> impl Iterator<Item = DroneId> + '_ {
        self.positions.keys().copied()
    }

    pub fn contains(&self, id: DroneId) -> bool {
        self.positions.contains_key(&id)
    }

    pub fn position(&self, id: DroneId) -> Option<Point3> {
        self.positions.get(&id).copied()
    }

    pub fn neighbors(&self, id: DroneId) -> &[(DroneId, f64)] {
        self.adjacency.get(&id).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn weight(&self, u: DroneId, v: DroneId) -> Option<f64> {
        self.neighbors(u).iter().find(|(n, _)| *n == v).map(|(_, w)| *w)
    }

    /// Undirected edges `(u, v, weight)` with `u < v`, in id order.
    pub fn edges(&self) -> Vec<(DroneId, DroneId, f64)> {
        let mut out = Vec::new();
        for (&u, ns) in &self.adjacency {
            for &(v, w) in ns {
                if u < v {
                    out.push((u, v, w));
                }
            }
        }
        out.sort_by_key(|e| (e.0, e.1));
        out
    }

    /// Summed weight along `path`, accumulated front to back.
    pub fn path_weight(&self, path: &[DroneId]) -> Option<f64> {
        path.windows(2)
            .try_fold(0.0, |acc, pair| self.weight(pair[0], pair[1]).map(|w| acc + w))
    }

    /// Graphviz rendering; edge labels are weights rounded to 0.1 m.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("graph overlap {\n");
        for id in self.nodes() {
            let _ = writeln!(out, "  {id} [label=\"{id}\"];");
        }
        for (u, v, w) in self.edges() {
            let _ = writeln!(out, "  {u} -- {v} [label=\"{w:.1}\"];");
        }
        out.push_str("}\n");
        out
    }
}

pub fn build_overlap_graph(tree: &MulticastTree, drones: &[DroneNode], r: f64) -> OverlapGraph {
    let positions: BTreeMap<DroneId, Point3> = drones.iter().map(|d| (d.id, d.position)).collect();
    OverlapGraph::from_positions(
        tree.transmitters().into_iter().map(|id| (id, positions[&id])),
        r,
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Frontier {
    dist: f64,
    id: DroneId,
}

impl Eq for Frontier {}

impl Ord for Frontier {
    // min-heap on (dist, id)
    fn cmp(&self, other: &Self) -> Ordering {
        other.dist.total_cmp(&self.dist).then_with(|| other.id.cmp(&self.id))
    }
}

impl PartialOrd for Frontier {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Dijkstra from `from` to `to`. Equal tentative distances settle in id
/// order and a node's predecessor only changes on a strict improvement.
pub fn min_weight_path(g: &OverlapGraph, from: DroneId, to: DroneId) -> Result<Vec<DroneId>, GraphError> {
    for id in [from, to] {
        if !g.contains(id) {
            return Err(GraphError::UnknownNode(id));
        }
    }
    let mut dist: BTreeMap<DroneId, f64> = BTreeMap::from([(from, 0.0)]);
    let mut prev: BTreeMap<DroneId, DroneId> = BTreeMap::new();
    let mut heap = BinaryHeap::from([Frontier { dist: 0.0, id: from }]);
    while let Some(Frontier { dist: d, id: u }) = heap.pop() {
        if u == to {
            break;
        }
        if d > dist[&u] {
            continue;
        }
        for &(v, w) in g.neighbors(u) {
            let nd = d + w;
            if dist.get(&v).is_none_or(|&cur| nd < cur) {
                dist.insert(v, nd);
                prev.insert(v, u);
                heap.push(Frontier { dist: nd, id: v });
            }
        }
    }
    if !dist.contains_key(&to) {
        return Err(GraphError::NoPath { from, to });
    }
    let mut path = vec![to];
    let mut cur = to;
    while cur != from {
        cur = prev[&cur];
        path.push(cur);
    }
    path.reverse();
    Ok(path)
}
