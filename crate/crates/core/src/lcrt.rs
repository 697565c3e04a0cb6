//! Level-based multicast tree construction.
//!
//! Drones are first assigned hop levels by breadth-first search over the
//! unit-disk graph (an edge wherever two drones are within transmission
//! range). Forwarders are then chosen greedily, one level at a time from the
//! second-highest level down to level 1: the drone covering the most
//! still-unserved nodes one level up is selected next.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{euclidean_distance, Point3};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DroneId(pub u32);

impl fmt::Display for DroneId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DroneNode {
    pub id: DroneId,
    pub position: Point3,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub is_source: bool,
}

impl DroneNode {
    pub fn new(id: u32, position: Point3) -> Self {
        Self { id: DroneId(id), position, is_source: false }
    }

    pub fn source(id: u32, position: Point3) -> Self {
        Self { id: DroneId(id), position, is_source: true }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TreeError {
    #[error("expected exactly one source drone, found {0}")]
    SourceCount(usize),
    #[error("duplicate drone id {0}")]
    DuplicateId(DroneId),
    #[error("drones unreachable from the source: {}", join_ids(.0))]
    Unreachable(Vec<DroneId>),
    #[error("drone {0} is not covered by any drone one level below")]
    Uncoverable(DroneId),
}

fn join_ids(ids: &[DroneId]) -> String {
    ids.iter().map(|id| id.to_string()).collect::<Vec<_>>().join(", ")
}

#[derive(Debug, Clone, PartialEq)]
pub struct MulticastTree {
    pub source: DroneId,
    pub level: BTreeMap<DroneId, u32>,
    pub parent: BTreeMap<DroneId, DroneId>,
    pub forwarders: BTreeSet<DroneId>,
}

impl MulticastTree {
    /// Source followed by the forwarders in id order.
    pub fn transmitters(&self) -> Vec<DroneId> {
        let mut out = vec![self.source];
        out.extend(self.forwarders.iter().copied().filter(|&id| id != self.source));
        out
    }

    pub fn is_transmitter(&self, id: DroneId) -> bool {
        id == self.source || self.forwarders.contains(&id)
    }

    /// Tree children of `id`, in id order.
    pub fn children(&self, id: DroneId) -> Vec<DroneId> {
        self.parent
            .iter()
            .filter(|(_, &p)| p == id)
            .map(|(&c, _)| c)
            .collect()
    }

    /// Number of tree hops between the source and `id`.
    pub fn depth(&self, id: DroneId) -> Option<u32> {
        self.level.get(&id).copied()
    }
}

fn source_of(drones: &[DroneNode]) -> Result<DroneId, TreeError> {
    let mut seen = BTreeSet::new();
    for d in drones {
        if !seen.insert(d.id) {
            return Err(TreeError::DuplicateId(d.id));
        }
    }
    let sources: Vec<_> = drones.iter().filter(|d| d.is_source).collect();
    match sources.as_slice() {
        [only] => Ok(only.id),
        other => Err(TreeError::SourceCount(other.len())),
    }
}

/// Hop levels from the source over the distance-`<= r` graph.
pub fn compute_levels(drones: &[DroneNode], r: f64) -> Result<BTreeMap<DroneId, u32>, TreeError> {
    compute_levels_with_leaves(drones, r, &BTreeSet::new())
}

/// Like [`compute_levels`], but drones in `leaves` never relay: they get a
/// level but the search does not expand through them.
pub fn compute_levels_with_leaves(
    drones: &[DroneNode],
    r: f64,
    leaves: &BTreeSet<DroneId>,
) -> Result<BTreeMap<DroneId, u32>, TreeError> {
    let source = source_of(drones)?;
    let index: BTreeMap<DroneId, usize> = drones.iter().enumerate().map(|(i, d)| (d.id, i)).collect();
    let mut level: Vec<Option<u32>> = vec![None; drones.len()];
    let mut queue = VecDeque::new();
    let s = index[&source];
    level[s] = Some(0);
    queue.push_back(s);
    while let Some(u) = queue.pop_front() {
        if u != s && leaves.contains(&drones[u].id) {
            continue;
        }
        let next = level[u].unwrap() + 1;
        for (v, dv) in drones.iter().enumerate() {
            if level[v].is_none() && euclidean_distance(drones[u].position, dv.position) <= r {
                level[v] = Some(next);
                queue.push_back(v);
            }
        }
    }
    let mut unreachable: Vec<DroneId> = drones
        .iter()
        .zip(&level)
        .filter(|(_, l)| l.is_none())
        .map(|(d, _)| d.id)
        .collect();
    if !unreachable.is_empty() {
        unreachable.sort();
        return Err(TreeError::Unreachable(unreachable));
    }
    Ok(drones.iter().zip(level).map(|(d, l)| (d.id, l.unwrap())).collect())
}

pub fn build_lcrt_tree(drones: &[DroneNode], r: f64) -> Result<MulticastTree, TreeError> {
    build_lcrt_tree_with_leaves(drones, r, &BTreeSet::new())
}

/// Builds the tree with the drones in `leaves` attached as receivers only:
/// they are never selected as forwarders and nothing is routed through them.
pub fn build_lcrt_tree_with_leaves(
    drones: &[DroneNode],
    r: f64,
    leaves: &BTreeSet<DroneId>,
) -> Result<MulticastTree, TreeError> {
    let level = compute_levels_with_leaves(drones, r, leaves)?;
    let source = source_of(drones)?;
    let position: BTreeMap<DroneId, Point3> = drones.iter().map(|d| (d.id, d.position)).collect();
    let max_level = level.values().copied().max().unwrap_or(0);

    let at_level = |l: u32| -> Vec<DroneId> {
        level.iter().filter(|(_, &x)| x == l).map(|(&id, _)| id).collect()
    };
    let covers = |u: DroneId, v: DroneId| euclidean_distance(position[&u], position[&v]) <= r;

    let mut parent = BTreeMap::new();
    let mut forwarders = BTreeSet::new();

    for lvl in (1..max_level).rev() {
        let targets = at_level(lvl + 1);
        let candidates: Vec<DroneId> = at_level(lvl)
            .into_iter()
            .filter(|id| !leaves.contains(id))
            .collect();
        let mut unserved: BTreeSet<DroneId> = targets.iter().copied().collect();
        let mut selected = Vec::new();
        while let Some(&first) = unserved.iter().next() {
            // ids ascend, so strict '>' keeps the lowest id on ties
            let mut best: Option<(DroneId, usize)> = None;
            for &c in &candidates {
                let n = unserved.iter().filter(|&&t| covers(c, t)).count();
                if n > 0 && best.is_none_or(|(_, m)| n > m) {
                    best = Some((c, n));
                }
            }
            let (chosen, _) = best.ok_or(TreeError::Uncoverable(first))?;
            unserved.retain(|&t| !covers(chosen, t));
            selected.push(chosen);
        }
        for t in targets {
            let p = selected
                .iter()
                .copied()
                .filter(|&f| covers(f, t))
                .min_by(|&f, &g| {
                    let df = euclidean_distance(position[&f], position[&t]);
                    let dg = euclidean_distance(position[&g], position[&t]);
                    df.total_cmp(&dg).then(f.cmp(&g))
                })
                .expect("every target is covered by a selected forwarder");
            parent.insert(t, p);
        }
        forwarders.extend(selected);
    }
    for id in at_level(1) {
        parent.insert(id, source);
    }

    Ok(MulticastTree { source, level, parent, forwarders })
}
