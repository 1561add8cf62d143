//! Oracles shared by the integration tests. Nothing here calls into the code
//! under test except to build inputs.

#![allow(dead_code)]

use leoqnet::orbit::NodeId;
use leoqnet::router::PathQuery;
use leoqnet::spacetime::{EdgeKind, SnapshotSchedule, SpaceTimeEdge, SpaceTimeGraph, SpaceTimeVertex};
use rand::Rng;

// ---- router -----------------------------------------------------------------

pub struct RandomGraph {
    pub graph: SpaceTimeGraph,
    pub query: PathQuery,
    pub slots: usize,
    pub nodes: usize,
    pub bounds: Vec<f64>,
}

fn edge(from: SpaceTimeVertex, to: SpaceTimeVertex, kind: EdgeKind, u: f64, fidelity: f64) -> SpaceTimeEdge {
    SpaceTimeEdge {
        from,
        to,
        kind,
        link: (kind == EdgeKind::Spatial).then_some(leoqnet::linkphys::LinkKind::Isl),
        distance: 0.0,
        fidelity_utility: u,
        memory_utility: 1.0,
        utility: u,
        log_utility: u.ln(),
        fidelity,
    }
}

/// Small random space-time DAG, at most 12 vertices. With `dyadic` every
/// utility is a power of two so products are exact.
pub fn random_graph<R: Rng>(rng: &mut R, dyadic: bool) -> RandomGraph {
    let slots = rng.random_range(1..=3usize);
    let max_nodes = (12 / slots).min(6);
    let nodes = rng.random_range(2..=max_nodes);
    let mut bounds = vec![rng.random_range(0.0..100.0)];
    for _ in 0..slots {
        let last = *bounds.last().unwrap();
        bounds.push(last + rng.random_range(5.0..60.0));
    }
    let ids: Vec<NodeId> = (0..nodes).map(NodeId::satellite).collect();
    let utility = |rng: &mut R| {
        if dyadic {
            0.5f64.powi(rng.random_range(0..=5))
        } else {
            rng.random_range(0.05..=1.0)
        }
    };
    let mut edges = Vec::new();
    for m in 0..slots {
        for a in 0..nodes {
            for b in a + 1..nodes {
                if rng.random_bool(0.5) {
                    let u = utility(rng);
                    let f = rng.random_range(0.5..1.0);
                    edges.push(edge(
                        SpaceTimeVertex { slot: m, node: ids[a] },
                        SpaceTimeVertex { slot: m, node: ids[b] },
                        EdgeKind::Spatial,
                        u,
                        f,
                    ));
                }
            }
        }
        if m + 1 < slots {
            for &v in &ids {
                if rng.random_bool(0.8) {
                    let u = utility(rng);
                    edges.push(edge(
                        SpaceTimeVertex { slot: m, node: v },
                        SpaceTimeVertex { slot: m + 1, node: v },
                        EdgeKind::Temporal,
                        u,
                        1.0,
                    ));
                }
            }
        }
    }
    let schedule = SnapshotSchedule::new(bounds.clone()).unwrap();
    let graph = SpaceTimeGraph::from_parts(ids.clone(), schedule, edges).unwrap();
    let s0 = rng.random_range(0..slots);
    let t_s = bounds[s0] + rng.random_range(0.0..1.0) * (bounds[s0 + 1] - bounds[s0]);
    let t_c = rng.random_range(1.0..=(bounds[slots] - bounds[0]).max(2.0));
    let dst = rng.random_range(1..nodes);
    let min_f = if rng.random_bool(0.3) { 0.7 } else { 0.0 };
    let query = PathQuery::new(ids[0], ids[dst], t_s, t_c)
        .unwrap()
        .with_min_link_fidelity(min_f);
    RandomGraph {
        graph,
        query,
        slots,
        nodes,
        bounds,
    }
}

impl RandomGraph {
    fn vid(&self, v: SpaceTimeVertex) -> usize {
        v.slot * self.nodes + v.node.index
    }

    pub fn start_slot(&self) -> usize {
        (0..self.slots)
            .find(|&m| self.bounds[m] <= self.query.start_time && self.query.start_time < self.bounds[m + 1])
            .unwrap()
    }

    /// Largest utility product over every simple path to `(slot, destination)`.
    pub fn brute_force(&self, target_slot: usize) -> Option<f64> {
        let n = self.slots * self.nodes;
        let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for e in self.graph.edges() {
            let (a, b) = (self.vid(e.from), self.vid(e.to));
            match e.kind {
                EdgeKind::Spatial => {
                    if e.fidelity < self.query.min_link_fidelity {
                        continue;
                    }
                    adj[a].push((b, e.utility));
                    adj[b].push((a, e.utility));
                }
                EdgeKind::Temporal => adj[a].push((b, e.utility)),
            }
        }
        let start = self.start_slot() * self.nodes + self.query.source.index;
        let target = target_slot * self.nodes + self.query.destination.index;
        let mut best = None;
        let mut seen = vec![false; n];
        fn dfs(
            v: usize,
            target: usize,
            acc: f64,
            adj: &[Vec<(usize, f64)>],
            seen: &mut [bool],
            best: &mut Option<f64>,
        ) {
            if v == target {
                if best.is_none_or(|b| acc > b) {
                    *best = Some(acc);
                }
                return;
            }
            seen[v] = true;
            for &(w, u) in &adj[v] {
                if !seen[w] {
                    dfs(w, target, acc * u, adj, seen, best);
                }
            }
            seen[v] = false;
        }
        dfs(start, target, 1.0, &adj, &mut seen, &mut best);
        best
    }

    /// Start slot plus every slot starting inside `[t_s, t_s + t_c]`.
    pub fn end_slots(&self) -> Vec<usize> {
        let s0 = self.start_slot();
        let (t, tc) = (self.query.start_time, self.query.coherence_time);
        let mut out = vec![s0];
        out.extend((s0 + 1..self.slots).filter(|&m| self.bounds[m] >= t && self.bounds[m] <= t + tc));
        out
    }
}

// ---- fidelity ---------------------------------------------------------------

/// Repeater positions (1-based along the chain) measured in each round: the
/// 1st, 3rd, ... survivors every round.
pub fn walk_rounds(repeaters: usize) -> Vec<Vec<usize>> {
    let mut alive: Vec<usize> = (1..=repeaters).collect();
    let mut rounds = Vec::new();
    while !alive.is_empty() {
        rounds.push(alive.iter().step_by(2).copied().collect());
        alive = alive.iter().skip(1).step_by(2).copied().collect();
    }
    rounds
}

/// Storage intervals of every memory, one entry per decay channel.
#[derive(Debug, Default)]
pub struct Trace {
    pub holds: Vec<f64>,
}

impl Trace {
    pub fn werner(&self, links: &[f64], t_c: f64) -> f64 {
        let mut w: f64 = links.iter().product();
        for h in &self.holds {
            w *= (-h / t_c).exp();
        }
        w
    }

    pub fn fidelity(&self, links: &[f64], t_c: f64) -> f64 {
        (1.0 + 3.0 * self.werner(links, t_c)) / 4.0
    }
}

/// All links up at once; repeaters measured round by round, then the two
/// end memories held to the last round.
pub fn nested_trace(links: usize, t_bsm: f64) -> Trace {
    let rounds = walk_rounds(links - 1);
    let mut tr = Trace::default();
    let mut clock = 0.0;
    for r in &rounds {
        clock += t_bsm;
        for _ in r {
            tr.holds.push(clock);
            tr.holds.push(clock);
        }
    }
    tr.holds.push(clock);
    tr.holds.push(clock);
    tr
}

/// Every link kept from its own establishment until the whole chain is
/// nested after the last segment arrives.
pub fn wait_till_end_trace(link_times: &[f64], t_bsm: f64) -> Trace {
    let t0 = link_times[0];
    let tf = link_times.iter().copied().fold(f64::MIN, f64::max);
    let rounds = walk_rounds(link_times.len() - 1);
    let mut tr = Trace::default();
    let mut clock = tf;
    for r in &rounds {
        clock += t_bsm;
        for &v in r {
            tr.holds.push(clock - link_times[v - 1]);
            tr.holds.push(clock - link_times[v]);
        }
    }
    tr.holds.push(clock - tf);
    tr.holds.push(clock - t0);
    tr
}

/// Segment `k` runs its own rounds at `t_k`; later segments treat the
/// previous transition node as one more repeater. One stitching channel per
/// segment and one end-to-end channel; `literal` adds the trailing round.
pub fn segmented_trace(pieces: &[(f64, usize)], t_bsm: f64, literal: bool) -> Trace {
    let mut tr = Trace::default();
    let t0 = pieces[0].0;
    let mut prev = t0;
    let mut all_rounds = 0.0;
    let mut last_round = 0.0;
    for (k, &(t_k, links)) in pieces.iter().enumerate() {
        let repeaters = if k == 0 { links - 1 } else { links };
        let rounds = walk_rounds(repeaters);
        let mut clock = 0.0;
        for r in &rounds {
            clock += t_bsm;
            for _ in r {
                tr.holds.push(clock);
                tr.holds.push(clock);
            }
        }
        tr.holds.push(t_k - prev + clock);
        all_rounds += clock;
        last_round = if rounds.is_empty() { 0.0 } else { t_bsm };
        prev = t_k;
    }
    tr.holds.push(prev - t0 + all_rounds);
    if literal {
        tr.holds.push(last_round);
    }
    tr
}

// ---- config -----------------------------------------------------------------

/// Shipped config with `key = value` lines replaced.
pub fn config_with(overrides: &[(&str, &str)]) -> String {
    let mut text = String::new();
    for line in leoqnet::config::DEFAULT_CONFIG.lines() {
        let key = line.split('=').next().unwrap_or("").trim();
        match overrides.iter().find(|(k, _)| *k == key) {
            Some((k, v)) => text.push_str(&format!("{k} = {v}\n")),
            None => {
                text.push_str(line);
                text.push('\n');
            }
        }
    }
    text
}

/// Small scenario that still exercises every command.
pub fn reduced_config() -> String {
    config_with(&[
        ("attempts_per_point", "300"),
        ("horizon_seconds", "300.0"),
        ("transmission_times_seconds", "[0.0, 120.0]"),
        ("coherence_sweep_seconds", "[60.0, 120.0]"),
        ("t_c_seconds", "60.0"),
    ])
}
