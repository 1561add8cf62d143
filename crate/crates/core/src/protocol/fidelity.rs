use std::str::FromStr;

use crate::error::{invalid, Error, Result};
use crate::linkphys::MemoryModel;
use crate::orbit::NodeId;
use crate::router::PathSolution;
use crate::spacetime::SnapshotSchedule;

use super::schedule::{assign_rounds_to_nodes, round_schedule, RoundSchedule};

/// Part of a path established inside one snapshot.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub slot: usize,
    /// Time the segment's links are established, `t_k`.
    pub start_time: f64,
    /// Subpath, starting at the previous transition node (or the source).
    pub nodes: Vec<NodeId>,
    /// Nested rounds run inside this segment. After the first segment the
    /// previous transition node counts as a repeater, since the running
    /// end-to-end pair is stitched on as one more link.
    pub schedule: RoundSchedule,
}

impl Segment {
    pub fn link_count(&self) -> usize {
        self.nodes.len() - 1
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SegmentPlan {
    segments: Vec<Segment>,
}

impl SegmentPlan {
    /// Splits `chain` into consecutive pieces of `(slot, start time, link count)`.
    pub fn new(chain: &[NodeId], pieces: &[(usize, f64, usize)], t_bsm: f64) -> Result<Self> {
        if pieces.is_empty() {
            return Err(Error::Empty("segment plan"));
        }
        let links: usize = pieces.iter().map(|p| p.2).sum();
        if chain.len() != links + 1 {
            return Err(invalid(format!(
                "chain of {} nodes cannot hold {links} links",
                chain.len()
            )));
        }
        if pieces.iter().any(|p| p.2 == 0) {
            return Err(invalid("every segment needs at least one link"));
        }
        if pieces.windows(2).any(|w| !(w[0].1 <= w[1].1) || w[0].0 >= w[1].0) {
            return Err(invalid("segments must be ordered by slot and time"));
        }
        let mut at = 0;
        let mut segments = Vec::with_capacity(pieces.len());
        for (k, &(slot, start_time, m)) in pieces.iter().enumerate() {
            let repeaters = if k == 0 { m - 1 } else { m };
            segments.push(Segment {
                slot,
                start_time,
                nodes: chain[at..=at + m].to_vec(),
                schedule: round_schedule(repeaters, t_bsm)?,
            });
            at += m;
        }
        Ok(Self { segments })
    }

    /// Plan for a routed path; the first segment starts at `start_time` when it
    /// lies in the start slot, every other segment at its slot's start.
    pub fn from_path(path: &PathSolution, schedule: &SnapshotSchedule, start_time: f64, t_bsm: f64) -> Result<Self> {
        let pieces: Vec<(usize, f64, usize)> = path
            .segments()
            .iter()
            .map(|(slot, edges)| {
                let t = if *slot == path.start_slot {
                    start_time
                } else {
                    schedule.slot_bounds(*slot).0
                };
                (*slot, t, edges.len())
            })
            .collect();
        Self::new(&path.node_chain(), &pieces, t_bsm)
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn link_count(&self) -> usize {
        self.segments.iter().map(Segment::link_count).sum()
    }

    /// Full node chain.
    pub fn chain(&self) -> Vec<NodeId> {
        let mut out = self.segments[0].nodes.clone();
        for s in &self.segments[1..] {
            out.extend_from_slice(&s.nodes[1..]);
        }
        out
    }

    /// Establishment time of every link, in chain order.
    pub fn link_times(&self) -> Vec<f64> {
        self.segments
            .iter()
            .flat_map(|s| std::iter::repeat_n(s.start_time, s.link_count()))
            .collect()
    }

    pub fn first_start(&self) -> f64 {
        self.segments[0].start_time
    }

    pub fn last_start(&self) -> f64 {
        self.segments[self.segments.len() - 1].start_time
    }
}

/// Treatment of the trailing single-round factor in the segmented formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SegmentedVariant {
    /// Drops the extra last-round factor so a single segment matches the nested formula.
    #[default]
    Reconciled,
    /// Keeps a trailing `W_m(delta_last)` factor.
    Literal,
}

impl SegmentedVariant {
    pub fn as_str(self) -> &'static str {
        match self {
            SegmentedVariant::Reconciled => "reconciled",
            SegmentedVariant::Literal => "literal",
        }
    }
}

impl FromStr for SegmentedVariant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "reconciled" => Ok(Self::Reconciled),
            "literal" => Ok(Self::Literal),
            _ => Err(invalid(format!("unknown segmented variant {s:?}"))),
        }
    }
}

fn link_log_werner(werners: &[f64]) -> Result<f64> {
    if werners.is_empty() {
        return Err(Error::Empty("path has no links"));
    }
    let mut acc = 0.0;
    for &w in werners {
        if !(0.0..=1.0).contains(&w) {
            return Err(invalid(format!("Werner parameter {w} outside [0, 1]")));
        }
        acc += w.ln();
    }
    Ok(acc)
}

fn fidelity_from_log(log_w: f64) -> f64 {
    (1.0 + 3.0 * log_w.exp()) / 4.0
}

/// Storage time summed over repeater memories: `sum_i 2 N_i T_i`.
fn round_storage(schedule: &RoundSchedule) -> f64 {
    schedule
        .configurations()
        .iter()
        .zip(schedule.cumulative())
        .map(|(&n, t)| 2.0 * n as f64 * t)
        .sum()
}

/// Nested swapping with every link established at once.
pub fn fidelity_nested(werners: &[f64], schedule: &RoundSchedule, mem: MemoryModel) -> Result<f64> {
    let log_w = link_log_werner(werners)?;
    if schedule.repeater_count() + 1 != werners.len() {
        return Err(Error::Schedule(format!(
            "{} links need {} repeaters, schedule has {}",
            werners.len(),
            werners.len() - 1,
            schedule.repeater_count()
        )));
    }
    let storage = round_storage(schedule) + 2.0 * schedule.total_duration();
    Ok(fidelity_from_log(log_w - storage / mem.coherence_time))
}

/// Every segment is established and stored until the last one arrives, then
/// the whole chain is nested at once. Each memory decays from its own link's
/// establishment until its measurement.
pub fn fidelity_wait_till_end(
    werners: &[f64],
    plan: &SegmentPlan,
    schedule: &RoundSchedule,
    mem: MemoryModel,
) -> Result<f64> {
    let log_w = link_log_werner(werners)?;
    if werners.len() != plan.link_count() {
        return Err(invalid("one Werner parameter per link is required"));
    }
    let times = plan.link_times();
    let index: Vec<usize> = (0..times.len() + 1).collect();
    let rounds = assign_rounds_to_nodes(&index, schedule)?;
    let (t0, tf) = (plan.first_start(), plan.last_start());
    let mut storage = 0.0;
    for (r, t) in rounds.iter().zip(schedule.cumulative()) {
        for &node in r {
            storage += (tf - times[node - 1] + t) + (tf - times[node] + t);
        }
    }
    let total = schedule.total_duration();
    storage += total + (tf - t0 + total);
    Ok(fidelity_from_log(log_w - storage / mem.coherence_time))
}

/// Segment-by-segment nesting stitched at transition points.
pub fn fidelity_segmented(
    plan: &SegmentPlan,
    werners: &[f64],
    mem: MemoryModel,
    variant: SegmentedVariant,
) -> Result<f64> {
    let log_w = link_log_werner(werners)?;
    if werners.len() != plan.link_count() {
        return Err(invalid("one Werner parameter per link is required"));
    }
    let segs = plan.segments();
    let mut storage = 0.0;
    let mut all_rounds = 0.0;
    for (k, s) in segs.iter().enumerate() {
        let gap = segs.get(k + 1).map_or(0.0, |n| n.start_time - s.start_time);
        let total = s.schedule.total_duration();
        storage += round_storage(&s.schedule) + gap + total;
        all_rounds += total;
    }
    storage += plan.last_start() - plan.first_start() + all_rounds;
    if variant == SegmentedVariant::Literal {
        storage += segs[segs.len() - 1].schedule.last_duration();
    }
    Ok(fidelity_from_log(log_w - storage / mem.coherence_time))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain(n: usize) -> Vec<NodeId> {
        (0..n).map(NodeId::satellite).collect()
    }

    #[test]
    fn nested_five_repeaters() {
        let s = round_schedule(5, 1.0).unwrap();
        let mem = MemoryModel::new(300.0).unwrap();
        let f = fidelity_nested(&[1.0; 6], &s, mem).unwrap();
        let expected = (1.0 + 3.0 * (-22.0f64 / 300.0).exp()) / 4.0;
        assert!((f - expected).abs() < 1e-15);
        assert!((f - 0.9469682610409027).abs() < 1e-12);
    }

    #[test]
    fn nested_limits() {
        let mem = MemoryModel::new(1e300).unwrap();
        let s = round_schedule(3, 1.0).unwrap();
        assert!((fidelity_nested(&[1.0; 4], &s, mem).unwrap() - 1.0).abs() < 1e-15);
        let s0 = round_schedule(3, 0.0).unwrap();
        let w = [0.9, 0.8, 0.95, 0.99];
        let f = fidelity_nested(&w, &s0, MemoryModel::new(10.0).unwrap()).unwrap();
        assert!((f - (1.0 + 3.0 * 0.9 * 0.8 * 0.95 * 0.99) / 4.0).abs() < 1e-15);
        assert!(fidelity_nested(&[], &s, mem).is_err());
        assert!(fidelity_nested(&[1.0; 3], &s, mem).is_err());
    }

    #[test]
    fn single_segment_forms_agree() {
        let mem = MemoryModel::new(300.0).unwrap();
        let c = chain(6);
        let plan = SegmentPlan::new(&c, &[(0, 12.0, 5)], 0.3).unwrap();
        let w = [0.99, 0.97, 0.98, 0.995, 0.96];
        let s = round_schedule(4, 0.3).unwrap();
        let nested = fidelity_nested(&w, &s, mem).unwrap();
        let wait = fidelity_wait_till_end(&w, &plan, &s, mem).unwrap();
        let seg = fidelity_segmented(&plan, &w, mem, SegmentedVariant::Reconciled).unwrap();
        assert!((nested - wait).abs() < 1e-15);
        assert!((nested - seg).abs() < 1e-15);
        let lit = fidelity_segmented(&plan, &w, mem, SegmentedVariant::Literal).unwrap();
        assert!(lit < seg);
    }

    #[test]
    fn waiting_costs_fidelity() {
        let mem = MemoryModel::new(300.0).unwrap();
        let c = chain(5);
        let plan = SegmentPlan::new(&c, &[(0, 0.0, 2), (1, 60.0, 2)], 0.01).unwrap();
        let w = [1.0; 4];
        let s = round_schedule(3, 0.01).unwrap();
        let nested = fidelity_nested(&w, &s, mem).unwrap();
        let wait = fidelity_wait_till_end(&w, &plan, &s, mem).unwrap();
        let seg = fidelity_segmented(&plan, &w, mem, SegmentedVariant::Reconciled).unwrap();
        assert!(wait < nested);
        assert!(seg >= wait);
        assert_eq!(plan.link_times(), vec![0.0, 0.0, 60.0, 60.0]);
        assert_eq!(plan.segments()[1].schedule.repeater_count(), 2);
        assert_eq!(plan.chain(), c);
    }

    #[test]
    fn plan_validation() {
        let c = chain(4);
        assert!(SegmentPlan::new(&c, &[], 1.0).is_err());
        assert!(SegmentPlan::new(&c, &[(0, 0.0, 2)], 1.0).is_err());
        assert!(SegmentPlan::new(&c, &[(1, 5.0, 2), (0, 0.0, 1)], 1.0).is_err());
        assert_eq!(
            "literal".parse::<SegmentedVariant>().unwrap(),
            SegmentedVariant::Literal
        );
    }
}
