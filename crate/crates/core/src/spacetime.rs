//! Snapshots of the time-varying topology and the space-time graph built on them.
//!
//! Slots are numbered from zero. Slot `m` covers `[t_m, t_{m+1})` of the
//! schedule's transition points.

use std::collections::HashMap;
use std::fmt::Write as _;

use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::linkphys::{LinkEvaluator, LinkKind, MemoryModel};
use crate::orbit::{line_of_sight, Network, NodeId, NodeKind, Vec3};

/// Undirected link present in a snapshot; `a < b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SnapshotEdge {
    pub a: NodeId,
    pub b: NodeId,
    pub kind: LinkKind,
}

/// Anything whose connectivity can be sampled over time.
pub trait Topology {
    fn nodes(&self) -> Vec<NodeId>;
    /// Feasible links at `t`, sorted.
    fn edges_at(&self, t: f64) -> Result<Vec<SnapshotEdge>>;
    fn distance(&self, a: NodeId, b: NodeId, t: f64) -> Result<f64>;
}

impl Topology for Network {
    fn nodes(&self) -> Vec<NodeId> {
        Network::nodes(self)
    }

    fn edges_at(&self, t: f64) -> Result<Vec<SnapshotEdge>> {
        let nodes = Network::nodes(self);
        let pos: Vec<Vec3> = nodes.iter().map(|&n| self.position(n, t)).collect::<Result<_>>()?;
        let r = self.constellation.earth_radius;
        let mut edges = Vec::new();
        for i in 0..nodes.len() {
            for j in i + 1..nodes.len() {
                let kind = match (nodes[i].kind, nodes[j].kind) {
                    (NodeKind::Satellite, NodeKind::Satellite) => LinkKind::Isl,
                    (NodeKind::Ground, NodeKind::Ground) => continue,
                    _ => LinkKind::Downlink,
                };
                if pos[i].distance(pos[j]) <= self.max_range && line_of_sight(pos[i], pos[j], r) {
                    edges.push(SnapshotEdge {
                        a: nodes[i],
                        b: nodes[j],
                        kind,
                    });
                }
            }
        }
        edges.sort();
        Ok(edges)
    }

    fn distance(&self, a: NodeId, b: NodeId, t: f64) -> Result<f64> {
        Network::distance(self, a, b, t)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotSchedule {
    transition_points: Vec<f64>,
}

impl SnapshotSchedule {
    pub fn new(transition_points: Vec<f64>) -> Result<Self> {
        if transition_points.len() < 2 {
            return Err(invalid("a schedule needs at least two transition points"));
        }
        if transition_points.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(invalid("transition points must be strictly increasing"));
        }
        Ok(Self { transition_points })
    }

    pub fn transition_points(&self) -> &[f64] {
        &self.transition_points
    }

    pub fn num_slots(&self) -> usize {
        self.transition_points.len() - 1
    }

    pub fn slot_bounds(&self, m: usize) -> (f64, f64) {
        (self.transition_points[m], self.transition_points[m + 1])
    }

    pub fn duration(&self, m: usize) -> f64 {
        let (a, b) = self.slot_bounds(m);
        b - a
    }

    /// Slot whose half-open interval contains `t`.
    pub fn slot_of(&self, t: f64) -> Option<usize> {
        let tp = &self.transition_points;
        if t < tp[0] || t >= tp[tp.len() - 1] {
            return None;
        }
        Some(tp.partition_point(|&x| x <= t) - 1)
    }

    pub fn slots(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.transition_points.windows(2).map(|w| (w[0], w[1]))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub index: usize,
    pub start: f64,
    pub end: f64,
    pub nodes: Vec<NodeId>,
    pub edges: Vec<SnapshotEdge>,
}

/// Samples connectivity every `sample_dt` over `[start, start + horizon)` and
/// coalesces runs of identical edge sets into snapshots.
pub fn build_schedule<T: Topology + Sync + ?Sized>(
    topology: &T,
    start: f64,
    horizon: f64,
    sample_dt: f64,
) -> Result<(SnapshotSchedule, Vec<Snapshot>)> {
    if !(horizon > 0.0) || !horizon.is_finite() {
        return Err(invalid("horizon must be positive"));
    }
    if !(sample_dt > 0.0) {
        return Err(invalid("sample_dt must be positive"));
    }
    let nodes = topology.nodes();
    if nodes.is_empty() {
        return Err(Error::Empty("topology has no nodes"));
    }
    let end = start + horizon;
    let times: Vec<f64> = (0u64..)
        .map(|k| start + k as f64 * sample_dt)
        .take_while(|&t| t < end)
        .collect();
    let sampled = times
        .par_iter()
        .map(|&t| topology.edges_at(t))
        .collect::<Result<Vec<_>>>()?;
    let mut points = Vec::new();
    let mut edge_sets: Vec<Vec<SnapshotEdge>> = Vec::new();
    for (t, edges) in times.into_iter().zip(sampled) {
        if edge_sets.last() != Some(&edges) {
            points.push(t);
            edge_sets.push(edges);
        }
    }
    points.push(end);
    let schedule = SnapshotSchedule::new(points)?;
    let snapshots = edge_sets
        .into_iter()
        .enumerate()
        .map(|(m, edges)| {
            let (s, e) = schedule.slot_bounds(m);
            Snapshot {
                index: m,
                start: s,
                end: e,
                nodes: nodes.clone(),
                edges,
            }
        })
        .collect();
    Ok((schedule, snapshots))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SpaceTimeVertex {
    pub slot: usize,
    pub node: NodeId,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EdgeKind {
    /// Entanglement link inside one snapshot.
    Spatial,
    /// Storage at a node from one slot to the next.
    Temporal,
}

impl EdgeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EdgeKind::Spatial => "SPATIAL",
            EdgeKind::Temporal => "TEMPORAL",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpaceTimeEdge {
    pub from: SpaceTimeVertex,
    pub to: SpaceTimeVertex,
    pub kind: EdgeKind,
    /// Physical link type of a spatial edge.
    pub link: Option<LinkKind>,
    /// Link length at the slot midpoint, m; zero for temporal edges.
    pub distance: f64,
    pub fidelity_utility: f64,
    pub memory_utility: f64,
    pub utility: f64,
    /// `ln(utility)`, kept separately so routing never takes the log of a rounded product.
    pub log_utility: f64,
    /// Link fidelity at the mean channel gains; 1 for temporal edges.
    pub fidelity: f64,
}

impl SpaceTimeEdge {
    /// Same edge traversed in the opposite direction.
    pub fn reversed(&self) -> Self {
        Self {
            from: self.to,
            to: self.from,
            ..*self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UtilityWeights {
    pub fidelity: f64,
    pub memory: f64,
}

impl Default for UtilityWeights {
    fn default() -> Self {
        Self {
            fidelity: 0.5,
            memory: 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Arc {
    pub edge: usize,
    pub to: usize,
    pub forward: bool,
}

/// Time-expanded graph with one vertex per (slot, node).
#[derive(Debug, Clone)]
pub struct SpaceTimeGraph {
    nodes: Vec<NodeId>,
    node_index: HashMap<NodeId, usize>,
    schedule: SnapshotSchedule,
    edges: Vec<SpaceTimeEdge>,
    adjacency: Vec<Vec<Arc>>,
}

impl SpaceTimeGraph {
    /// Assembles a graph from explicit edges, checking the structural invariants.
    pub fn from_parts(nodes: Vec<NodeId>, schedule: SnapshotSchedule, edges: Vec<SpaceTimeEdge>) -> Result<Self> {
        let node_index: HashMap<NodeId, usize> = nodes.iter().enumerate().map(|(i, &n)| (n, i)).collect();
        if node_index.len() != nodes.len() {
            return Err(invalid("duplicate node in space-time graph"));
        }
        let slots = schedule.num_slots();
        let n = nodes.len();
        let mut adjacency = vec![Vec::new(); slots * n];
        for (i, e) in edges.iter().enumerate() {
            let (Some(&fa), Some(&fb)) = (node_index.get(&e.from.node), node_index.get(&e.to.node)) else {
                return Err(invalid(format!("edge {i} references an unknown node")));
            };
            if e.from.slot >= slots || e.to.slot >= slots {
                return Err(invalid(format!("edge {i} references a slot outside the schedule")));
            }
            for (name, u) in [
                ("utility", e.utility),
                ("fidelity_utility", e.fidelity_utility),
                ("memory_utility", e.memory_utility),
            ] {
                if !(u > 0.0 && u <= 1.0) {
                    return Err(invalid(format!("edge {i} {name} {u} outside (0, 1]")));
                }
            }
            let u = e.from.slot * n + fa;
            let v = e.to.slot * n + fb;
            match e.kind {
                EdgeKind::Spatial => {
                    if e.from.slot != e.to.slot || fa == fb {
                        return Err(invalid(format!("spatial edge {i} must join two nodes in one slot")));
                    }
                    adjacency[u].push(Arc {
                        edge: i,
                        to: v,
                        forward: true,
                    });
                    adjacency[v].push(Arc {
                        edge: i,
                        to: u,
                        forward: false,
                    });
                }
                EdgeKind::Temporal => {
                    if e.to.slot != e.from.slot + 1 || fa != fb {
                        return Err(invalid(format!("temporal edge {i} must join (m, v) to (m+1, v)")));
                    }
                    adjacency[u].push(Arc {
                        edge: i,
                        to: v,
                        forward: true,
                    });
                }
            }
        }
        Ok(Self {
            nodes,
            node_index,
            schedule,
            edges,
            adjacency,
        })
    }

    pub fn nodes(&self) -> &[NodeId] {
        &self.nodes
    }

    pub fn schedule(&self) -> &SnapshotSchedule {
        &self.schedule
    }

    pub fn num_slots(&self) -> usize {
        self.schedule.num_slots()
    }

    pub fn edges(&self) -> &[SpaceTimeEdge] {
        &self.edges
    }

    pub fn num_vertices(&self) -> usize {
        self.adjacency.len()
    }

    pub fn vertex_index(&self, v: SpaceTimeVertex) -> Option<usize> {
        if v.slot >= self.num_slots() {
            return None;
        }
        self.node_index.get(&v.node).map(|&i| v.slot * self.nodes.len() + i)
    }

    pub fn vertex(&self, index: usize) -> SpaceTimeVertex {
        let n = self.nodes.len();
        SpaceTimeVertex {
            slot: index / n,
            node: self.nodes[index % n],
        }
    }

    pub(crate) fn arcs(&self, vertex: usize) -> &[Arc] {
        &self.adjacency[vertex]
    }

    /// Edge as traversed by `arc`.
    pub(crate) fn oriented(&self, arc: &Arc) -> SpaceTimeEdge {
        let e = &self.edges[arc.edge];
        if arc.forward {
            *e
        } else {
            e.reversed()
        }
    }

    /// Line-oriented dump: one slot, vertex or edge per line, values at 9 significant digits.
    pub fn dump(&self, name: &dyn Fn(NodeId) -> String) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "# space-time graph: slots={} nodes={} edges={}",
            self.num_slots(),
            self.nodes.len(),
            self.edges.len()
        );
        for (m, (s, e)) in self.schedule.slots().enumerate() {
            let _ = writeln!(out, "SLOT {m} {} {}", sig9(s), sig9(e));
        }
        for m in 0..self.num_slots() {
            for &n in &self.nodes {
                let _ = writeln!(out, "VERTEX {m} {}", name(n));
            }
        }
        for e in &self.edges {
            let _ = writeln!(
                out,
                "EDGE {} {} {} {} {} {} {} {} {}",
                e.from.slot,
                name(e.from.node),
                e.to.slot,
                name(e.to.node),
                e.kind.as_str(),
                e.link.map_or("-", LinkKind::as_str),
                sig9(e.fidelity_utility),
                sig9(e.memory_utility),
                sig9(e.utility),
            );
        }
        out
    }
}

/// Formats with 9 significant digits in scientific notation, locale-free.
pub fn sig9(x: f64) -> String {
    format!("{x:.8e}")
}

/// Dump of one snapshot: header, node list and links.
pub fn dump_snapshot(snapshot: &Snapshot, name: &dyn Fn(NodeId) -> String) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "SNAPSHOT {} {} {} nodes={} links={}",
        snapshot.index,
        sig9(snapshot.start),
        sig9(snapshot.end),
        snapshot.nodes.len(),
        snapshot.edges.len()
    );
    for &n in &snapshot.nodes {
        let _ = writeln!(out, "NODE {}", name(n));
    }
    for e in &snapshot.edges {
        let _ = writeln!(out, "LINK {} {} {}", name(e.a), name(e.b), e.kind.as_str());
    }
    out
}

/// Builds the weighted space-time graph.
///
/// Spatial edges take their fidelity utility at the slot midpoint and a memory
/// utility of `exp(-slot duration / t_c)`; temporal edges `(m, v) -> (m+1, v)`
/// carry `exp(-duration(m+1) / t_c)`. Links whose availability underflows to
/// zero cannot carry entanglement and are left out.
pub fn build_spacetime_graph<T: Topology + Sync + ?Sized>(
    topology: &T,
    schedule: &SnapshotSchedule,
    snapshots: &[Snapshot],
    evaluator: &LinkEvaluator,
    memory: MemoryModel,
    weights: UtilityWeights,
) -> Result<SpaceTimeGraph> {
    if snapshots.is_empty() {
        return Err(Error::Empty("no snapshots"));
    }
    if snapshots.len() != schedule.num_slots() {
        return Err(invalid("snapshot count does not match the schedule"));
    }
    let nodes = snapshots[0].nodes.clone();
    let physics = evaluator.physics();
    let per_slot = snapshots
        .par_iter()
        .map(|snap| -> Result<Vec<SpaceTimeEdge>> {
            let m = snap.index;
            let (s, e) = schedule.slot_bounds(m);
            let mid = 0.5 * (s + e);
            let log_mem = -(e - s) / memory.coherence_time;
            let mut out = Vec::with_capacity(snap.edges.len());
            for link in &snap.edges {
                let d = topology.distance(link.a, link.b, mid)?;
                let log_fid = evaluator.log_fidelity_utility(link.kind, d)?;
                let log_u = weights.fidelity * log_fid + weights.memory * log_mem;
                let (fu, mu, u) = (log_fid.exp(), log_mem.exp(), log_u.exp());
                if fu == 0.0 || mu == 0.0 || u == 0.0 {
                    continue;
                }
                out.push(SpaceTimeEdge {
                    from: SpaceTimeVertex { slot: m, node: link.a },
                    to: SpaceTimeVertex { slot: m, node: link.b },
                    kind: EdgeKind::Spatial,
                    link: Some(link.kind),
                    distance: d,
                    fidelity_utility: fu,
                    memory_utility: mu,
                    utility: u,
                    log_utility: log_u,
                    fidelity: physics.deterministic_fidelity(d),
                });
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut edges: Vec<SpaceTimeEdge> = per_slot.into_iter().flatten().collect();
    for m in 0..schedule.num_slots().saturating_sub(1) {
        let log_mem = -schedule.duration(m + 1) / memory.coherence_time;
        let log_u = weights.memory * log_mem;
        for &n in &nodes {
            edges.push(SpaceTimeEdge {
                from: SpaceTimeVertex { slot: m, node: n },
                to: SpaceTimeVertex { slot: m + 1, node: n },
                kind: EdgeKind::Temporal,
                link: None,
                distance: 0.0,
                fidelity_utility: 1.0,
                memory_utility: log_mem.exp(),
                utility: log_u.exp(),
                log_utility: log_u,
                fidelity: 1.0,
            });
        }
    }
    SpaceTimeGraph::from_parts(nodes, schedule.clone(), edges)
}
