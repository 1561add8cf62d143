//! Utility-maximising paths through the space-time graph.
//!
//! Edge utilities lie in `(0, 1]`, so the product-maximising path is a
//! shortest path under the weights `-ln U_e`. A single Dijkstra run from the
//! start vertex serves every candidate end slot.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt::Write as _;

use crate::error::{invalid, Error, Result};
use crate::orbit::NodeId;
use crate::spacetime::{EdgeKind, SpaceTimeEdge, SpaceTimeGraph, SpaceTimeVertex};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathQuery {
    pub source: NodeId,
    pub destination: NodeId,
    /// Transmission start time `t_s`, s.
    pub start_time: f64,
    /// Search horizon, normally the memory coherence time, s.
    pub coherence_time: f64,
    /// Spatial edges whose mean-gain fidelity is below this are pruned.
    pub min_link_fidelity: f64,
}

impl PathQuery {
    pub fn new(source: NodeId, destination: NodeId, start_time: f64, coherence_time: f64) -> Result<Self> {
        if source == destination {
            return Err(invalid("source and destination must differ"));
        }
        if !(coherence_time > 0.0) {
            return Err(invalid("coherence time must be positive"));
        }
        if !start_time.is_finite() {
            return Err(invalid("start time must be finite"));
        }
        Ok(Self {
            source,
            destination,
            start_time,
            coherence_time,
            min_link_fidelity: 0.0,
        })
    }

    pub fn with_min_link_fidelity(mut self, f: f64) -> Self {
        self.min_link_fidelity = f;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathSolution {
    /// Edges in traversal order.
    pub edges: Vec<SpaceTimeEdge>,
    /// Product of edge utilities.
    pub utility: f64,
    /// Sum of edge log-utilities.
    pub log_utility: f64,
    pub start_slot: usize,
    pub end_slot: usize,
}

impl PathSolution {
    pub fn from_edges(edges: Vec<SpaceTimeEdge>, start_slot: usize, end_slot: usize) -> Self {
        let utility = edges.iter().map(|e| e.utility).product();
        let log_utility = edges.iter().map(|e| e.log_utility).sum();
        Self {
            edges,
            utility,
            log_utility,
            start_slot,
            end_slot,
        }
    }

    pub fn spatial_edges(&self) -> impl Iterator<Item = &SpaceTimeEdge> {
        self.edges.iter().filter(|e| e.kind == EdgeKind::Spatial)
    }

    /// Number of entanglement links.
    pub fn hop_count(&self) -> usize {
        self.spatial_edges().count()
    }

    /// Physical node chain traced by the spatial edges, source first.
    pub fn node_chain(&self) -> Vec<NodeId> {
        let mut chain = Vec::new();
        for e in self.spatial_edges() {
            if chain.is_empty() {
                chain.push(e.from.node);
            }
            chain.push(e.to.node);
        }
        chain
    }

    /// Spatial edges grouped by slot, in slot order.
    pub fn segments(&self) -> Vec<(usize, Vec<SpaceTimeEdge>)> {
        let mut out: Vec<(usize, Vec<SpaceTimeEdge>)> = Vec::new();
        for e in self.spatial_edges() {
            match out.last_mut() {
                Some((slot, v)) if *slot == e.from.slot => v.push(*e),
                _ => out.push((e.from.slot, vec![*e])),
            }
        }
        out
    }

    pub fn dump(&self, name: &dyn Fn(NodeId) -> String) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "PATH utility={:.17e} log_utility={:.17e} start_slot={} end_slot={} segments={} edges={}",
            self.utility,
            self.log_utility,
            self.start_slot,
            self.end_slot,
            self.segments().len(),
            self.edges.len()
        );
        for e in &self.edges {
            let _ = writeln!(
                out,
                "EDGE {} {} {} {} {} {:.17e}",
                e.from.slot,
                e.to.slot,
                name(e.from.node),
                name(e.to.node),
                e.kind.as_str(),
                e.utility
            );
        }
        out
    }
}

/// Sentinel written when no path exists.
pub fn no_path_line(source: &str, destination: &str, start_time: f64) -> String {
    format!("NO_PATH {source} {destination} {start_time:.8e}\n")
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParsedEdge {
    pub from_slot: usize,
    pub to_slot: usize,
    pub from: String,
    pub to: String,
    pub kind: EdgeKind,
    pub utility: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ParsedPath {
    NoPath,
    Path {
        utility: f64,
        end_slot: usize,
        edges: Vec<ParsedEdge>,
    },
}

fn field<'a>(tok: &'a str, key: &str) -> Result<&'a str> {
    tok.strip_prefix(key)
        .and_then(|r| r.strip_prefix('='))
        .ok_or_else(|| Error::Parse(format!("expected {key}=..., found {tok:?}")))
}

fn num<T: std::str::FromStr>(s: &str) -> Result<T> {
    s.parse().map_err(|_| Error::Parse(format!("bad number {s:?}")))
}

/// Parses the output of [`PathSolution::dump`] or [`no_path_line`].
pub fn parse_path_dump(text: &str) -> Result<ParsedPath> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let head = lines.next().ok_or_else(|| Error::Parse("empty dump".into()))?;
    let toks: Vec<&str> = head.split_whitespace().collect();
    match toks.first() {
        Some(&"NO_PATH") => return Ok(ParsedPath::NoPath),
        Some(&"PATH") if toks.len() == 7 => {}
        _ => return Err(Error::Parse(format!("bad header {head:?}"))),
    }
    let utility = num(field(toks[1], "utility")?)?;
    let end_slot = num(field(toks[4], "end_slot")?)?;
    let count: usize = num(field(toks[6], "edges")?)?;
    let mut edges = Vec::with_capacity(count);
    for line in lines {
        let t: Vec<&str> = line.split_whitespace().collect();
        if t.len() != 7 || t[0] != "EDGE" {
            return Err(Error::Parse(format!("bad edge line {line:?}")));
        }
        let kind = match t[5] {
            "SPATIAL" => EdgeKind::Spatial,
            "TEMPORAL" => EdgeKind::Temporal,
            k => return Err(Error::Parse(format!("bad edge kind {k:?}"))),
        };
        edges.push(ParsedEdge {
            from_slot: num(t[1])?,
            to_slot: num(t[2])?,
            from: t[3].to_string(),
            to: t[4].to_string(),
            kind,
            utility: num(t[6])?,
        });
    }
    if edges.len() != count {
        return Err(Error::Parse(format!(
            "header announces {count} edges, found {}",
            edges.len()
        )));
    }
    Ok(ParsedPath::Path {
        utility,
        end_slot,
        edges,
    })
}

/// Recomputes a parsed path's utility from the graph's own edges.
pub fn rescore(
    edges: &[ParsedEdge],
    graph: &SpaceTimeGraph,
    parse_node: &dyn Fn(&str) -> Result<NodeId>,
) -> Result<f64> {
    let mut u = 1.0;
    for p in edges {
        let from = SpaceTimeVertex {
            slot: p.from_slot,
            node: parse_node(&p.from)?,
        };
        let to = SpaceTimeVertex {
            slot: p.to_slot,
            node: parse_node(&p.to)?,
        };
        let hit = graph.edges().iter().find(|e| {
            e.kind == p.kind
                && ((e.from == from && e.to == to) || (e.kind == EdgeKind::Spatial && e.from == to && e.to == from))
        });
        match hit {
            Some(e) => u *= e.utility,
            None => return Err(Error::Parse(format!("edge {} -> {} not in graph", p.from, p.to))),
        }
    }
    Ok(u)
}

#[derive(Clone, Copy, PartialEq)]
struct Label {
    cost: f64,
    hops: usize,
}

impl Label {
    fn better(&self, o: &Label) -> bool {
        self.cost < o.cost || (self.cost == o.cost && self.hops < o.hops)
    }
}

#[derive(PartialEq)]
struct Entry {
    label: Label,
    vertex: usize,
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, o: &Self) -> Ordering {
        o.label
            .cost
            .total_cmp(&self.label.cost)
            .then_with(|| o.label.hops.cmp(&self.label.hops))
            .then_with(|| o.vertex.cmp(&self.vertex))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

struct Search {
    labels: Vec<Option<Label>>,
    pred: Vec<Option<(usize, SpaceTimeEdge)>>,
    start: usize,
    start_slot: usize,
}

impl Search {
    fn run(graph: &SpaceTimeGraph, query: &PathQuery, max_slot: usize) -> Result<Self> {
        let start_slot = graph
            .schedule()
            .slot_of(query.start_time)
            .ok_or_else(|| invalid(format!("start time {} outside the schedule", query.start_time)))?;
        if graph
            .vertex_index(SpaceTimeVertex {
                slot: start_slot,
                node: query.destination,
            })
            .is_none()
        {
            return Err(Error::UnknownNode(query.destination.to_string()));
        }
        let start = graph
            .vertex_index(SpaceTimeVertex {
                slot: start_slot,
                node: query.source,
            })
            .ok_or_else(|| Error::UnknownNode(query.source.to_string()))?;
        let n = graph.num_vertices();
        let mut labels: Vec<Option<Label>> = vec![None; n];
        let mut pred = vec![None; n];
        let mut done = vec![false; n];
        let mut heap = BinaryHeap::new();
        labels[start] = Some(Label { cost: 0.0, hops: 0 });
        heap.push(Entry {
            label: Label { cost: 0.0, hops: 0 },
            vertex: start,
        });
        while let Some(Entry { label, vertex }) = heap.pop() {
            if done[vertex] {
                continue;
            }
            done[vertex] = true;
            for arc in graph.arcs(vertex) {
                let e = graph.oriented(arc);
                if e.to.slot > max_slot || done[arc.to] {
                    continue;
                }
                if e.kind == EdgeKind::Spatial && e.fidelity < query.min_link_fidelity {
                    continue;
                }
                let next = Label {
                    cost: label.cost - e.log_utility,
                    hops: label.hops + 1,
                };
                if labels[arc.to].is_none_or(|cur| next.better(&cur)) {
                    labels[arc.to] = Some(next);
                    pred[arc.to] = Some((vertex, e));
                    heap.push(Entry {
                        label: next,
                        vertex: arc.to,
                    });
                }
            }
        }
        Ok(Self {
            labels,
            pred,
            start,
            start_slot,
        })
    }

    fn extract(&self, graph: &SpaceTimeGraph, target: usize) -> Option<PathSolution> {
        self.labels[target]?;
        let mut edges = Vec::new();
        let mut v = target;
        while v != self.start {
            let (p, e) = self.pred[v].expect("labelled vertex has a predecessor");
            edges.push(e);
            v = p;
        }
        edges.reverse();
        Some(PathSolution::from_edges(
            edges,
            self.start_slot,
            graph.vertex(target).slot,
        ))
    }
}

/// Best path from `(slot(t_s), source)` to `(target_slot, destination)`.
pub fn optimal_path_to(query: &PathQuery, target_slot: usize, graph: &SpaceTimeGraph) -> Result<Option<PathSolution>> {
    if target_slot >= graph.num_slots() {
        return Err(invalid(format!("target slot {target_slot} outside the graph")));
    }
    let search = Search::run(graph, query, target_slot)?;
    if target_slot < search.start_slot {
        return Ok(None);
    }
    let target = graph
        .vertex_index(SpaceTimeVertex {
            slot: target_slot,
            node: query.destination,
        })
        .expect("checked in search");
    Ok(search.extract(graph, target))
}

/// Slots eligible as end slots: the start slot plus every slot whose start
/// lies in `[t_s, t_s + t_c]`.
pub fn candidate_end_slots(query: &PathQuery, graph: &SpaceTimeGraph) -> Result<Vec<usize>> {
    let sched = graph.schedule();
    let start_slot = sched
        .slot_of(query.start_time)
        .ok_or_else(|| invalid(format!("start time {} outside the schedule", query.start_time)))?;
    let horizon = query.start_time + query.coherence_time;
    let mut out = vec![start_slot];
    for m in start_slot + 1..sched.num_slots() {
        let (s, _) = sched.slot_bounds(m);
        if s > horizon {
            break;
        }
        if s >= query.start_time {
            out.push(m);
        }
    }
    Ok(out)
}

/// Best path over every candidate end slot within the coherence horizon.
/// Ties go to the earliest end slot, then to the fewest edges.
pub fn optimal_entanglement_path(query: &PathQuery, graph: &SpaceTimeGraph) -> Result<Option<PathSolution>> {
    let candidates = candidate_end_slots(query, graph)?;
    let max_slot = *candidates.last().expect("start slot always present");
    let search = Search::run(graph, query, max_slot)?;
    let mut best: Option<(Label, usize)> = None;
    for m in candidates {
        let v = graph
            .vertex_index(SpaceTimeVertex {
                slot: m,
                node: query.destination,
            })
            .expect("checked in search");
        if let Some(l) = search.labels[v] {
            if best.is_none_or(|(b, _)| l.better(&b)) {
                best = Some((l, v));
            }
        }
    }
    Ok(best.and_then(|(_, v)| search.extract(graph, v)))
}

/// Per-snapshot baseline: the best path inside the start slot alone.
pub fn baseline_dynamic_path(query: &PathQuery, graph: &SpaceTimeGraph) -> Result<Option<PathSolution>> {
    let slot = graph
        .schedule()
        .slot_of(query.start_time)
        .ok_or_else(|| invalid(format!("start time {} outside the schedule", query.start_time)))?;
    optimal_path_to(query, slot, graph)
}
