//! Scenario runs: route each transmission time with the space-time strategy
//! and the per-snapshot baseline, execute Monte Carlo attempts and aggregate
//! drop rate, throughput and fidelity.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::linkphys::{clamp_probability, LinkEvaluator, LinkPhysics, MemoryModel, RngSampler};
use crate::orbit::{ConstellationSpec, GroundSite, Network, NodeId};
use crate::protocol::{
    execute_stbd, link_transmittances, Outcome, OutcomeCode, ProtocolParams, SegmentPlan, SegmentedVariant,
};
use crate::router::{baseline_dynamic_path, optimal_entanglement_path, PathQuery, PathSolution};
use crate::spacetime::{build_schedule, build_spacetime_graph, sig9, SpaceTimeGraph, UtilityWeights};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Strategy {
    /// Space-time routing with segmented nesting.
    Stbd,
    /// Routing inside the start snapshot only.
    BaselineDynamic,
}

impl Strategy {
    pub const ALL: [Strategy; 2] = [Strategy::Stbd, Strategy::BaselineDynamic];

    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::Stbd => "STBD",
            Strategy::BaselineDynamic => "BASELINE",
        }
    }
}

impl FromStr for Strategy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Strategy::ALL
            .into_iter()
            .find(|x| x.as_str() == s)
            .ok_or_else(|| Error::Parse(format!("unknown strategy {s:?}")))
    }
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub network: Network,
    pub physics: LinkPhysics,
    pub memory: MemoryModel,
    pub protocol: ProtocolParams,
    pub weights: UtilityWeights,
    pub variant: SegmentedVariant,
    pub source: NodeId,
    pub destination: NodeId,
    /// Span covered by the standalone snapshot dump, s.
    pub horizon: f64,
    pub sample_dt: f64,
    pub transmission_times: Vec<f64>,
    pub coherence_sweep: Vec<f64>,
    pub attempts: usize,
    pub seed: u64,
}

impl Scenario {
    /// 20 planes of 8 satellites at 550 km and 60 degrees, ground stations in
    /// Luxembourg and Oslo, satellites 3 and 13 as endpoints.
    pub fn reference() -> Self {
        let network = Network::new(
            ConstellationSpec::reference(),
            vec![GroundSite::luxembourg(), GroundSite::oslo()],
            5_000_000.0,
        )
        .expect("reference network is valid");
        let mut physics = LinkPhysics::reference();
        physics.reference_distance = 1000.0;
        Self {
            network,
            physics,
            memory: MemoryModel { coherence_time: 300.0 },
            protocol: ProtocolParams::reference(),
            weights: UtilityWeights::default(),
            variant: SegmentedVariant::Reconciled,
            source: NodeId::satellite(3),
            destination: NodeId::satellite(13),
            horizon: 6000.0,
            sample_dt: 10.0,
            transmission_times: (0..10).map(|k| k as f64 * 600.0).collect(),
            coherence_sweep: vec![300.0, 1000.0],
            attempts: 10_000,
            seed: 42,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.physics.validate()?;
        self.protocol.validate()?;
        MemoryModel::new(self.memory.coherence_time)?;
        if self.source == self.destination {
            return Err(invalid("source and destination must differ"));
        }
        for n in [self.source, self.destination] {
            self.network.position(n, 0.0)?;
        }
        if !(self.horizon > 0.0) || !(self.sample_dt > 0.0) {
            return Err(invalid("horizon and sample_dt must be positive"));
        }
        if self.attempts == 0 {
            return Err(invalid("attempts must be at least 1"));
        }
        if self.transmission_times.iter().any(|t| !t.is_finite() || *t < 0.0) {
            return Err(invalid("transmission times must be finite and non-negative"));
        }
        if self.coherence_sweep.iter().any(|t| !(*t > 0.0)) {
            return Err(invalid("coherence times must be positive"));
        }
        if !(self.weights.fidelity >= 0.0 && self.weights.memory >= 0.0) {
            return Err(invalid("utility weights must be non-negative"));
        }
        Ok(())
    }

    pub fn with_coherence_time(&self, t_c: f64) -> Self {
        let mut s = self.clone();
        s.memory = MemoryModel { coherence_time: t_c };
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRecord {
    pub transmission_time: f64,
    pub strategy: Strategy,
    pub coherence_time: f64,
    /// Drops per second, `R * drops / attempts`.
    pub drop_rate: f64,
    /// Delivered ebits per second.
    pub throughput: f64,
    /// Mean delivered fidelity; 0 when nothing was delivered.
    pub mean_fidelity: f64,
    pub path_found: bool,
    pub end_slot: Option<usize>,
    pub hop_count: usize,
    pub utility: Option<f64>,
    pub attempts: usize,
    pub delivered: usize,
}

#[derive(Debug, Clone)]
pub struct PointResult {
    pub record: MetricsRecord,
    pub path: Option<PathSolution>,
    pub outcomes: Vec<Outcome>,
}

/// Drop rate, throughput and mean fidelity from an outcome stream.
pub fn aggregate(outcomes: &[Outcome], rate: f64, transmittance_product: f64) -> (f64, f64, f64) {
    let n = outcomes.len();
    if n == 0 {
        return (0.0, 0.0, 0.0);
    }
    let mut ok = 0usize;
    let mut fid = 0.0;
    for o in outcomes {
        if o.code == OutcomeCode::Ok {
            ok += 1;
            fid += o.fidelity.unwrap_or(0.0);
        }
    }
    let drops = n - ok;
    let drop_rate = rate * drops as f64 / n as f64;
    let throughput = rate * ok as f64 / n as f64 * transmittance_product;
    let mean = if ok == 0 { 0.0 } else { fid / ok as f64 };
    (drop_rate, throughput, mean)
}

/// Seed of one attempt; independent of strategy and coherence time, so all
/// strategies see the same random stream at a given point.
pub fn attempt_seed(seed: u64, t_start: f64, attempt: u64) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }
    mix(mix(mix(seed) ^ t_start.to_bits()) ^ attempt)
}

/// Space-time graph over `[t_start, t_start + t_c + sample_dt]`.
pub fn point_graph(scenario: &Scenario, evaluator: &LinkEvaluator, t_start: f64) -> Result<SpaceTimeGraph> {
    let window = scenario.memory.coherence_time + scenario.sample_dt;
    let (schedule, snaps) = build_schedule(&scenario.network, t_start, window, scenario.sample_dt)?;
    build_spacetime_graph(
        &scenario.network,
        &schedule,
        &snaps,
        evaluator,
        scenario.memory,
        scenario.weights,
    )
}

fn route(
    scenario: &Scenario,
    graph: &SpaceTimeGraph,
    t_start: f64,
    strategy: Strategy,
) -> Result<Option<PathSolution>> {
    let q = PathQuery::new(
        scenario.source,
        scenario.destination,
        t_start,
        scenario.memory.coherence_time,
    )?
    .with_min_link_fidelity(scenario.physics.fidelity_threshold);
    match strategy {
        Strategy::Stbd => optimal_entanglement_path(&q, graph),
        Strategy::BaselineDynamic => baseline_dynamic_path(&q, graph),
    }
}

/// Routes and runs every attempt for one strategy on a prebuilt graph.
pub fn run_on_graph(
    scenario: &Scenario,
    graph: &SpaceTimeGraph,
    t_start: f64,
    strategy: Strategy,
) -> Result<PointResult> {
    let path = route(scenario, graph, t_start, strategy)?;
    let rate = scenario.protocol.rate;
    let mut record = MetricsRecord {
        transmission_time: t_start,
        strategy,
        coherence_time: scenario.memory.coherence_time,
        drop_rate: rate,
        throughput: 0.0,
        mean_fidelity: 0.0,
        path_found: false,
        end_slot: None,
        hop_count: 0,
        utility: None,
        attempts: scenario.attempts,
        delivered: 0,
    };
    let Some(p) = path else {
        let outcomes = vec![Outcome::dropped(OutcomeCode::NoPath); scenario.attempts];
        return Ok(PointResult {
            record,
            path: None,
            outcomes,
        });
    };
    let plan = SegmentPlan::from_path(&p, graph.schedule(), t_start, scenario.protocol.t_bsm)?;
    let eta: f64 = link_transmittances(&p, &scenario.physics)?
        .into_iter()
        .map(clamp_probability)
        .product();
    let outcomes = (0..scenario.attempts as u64)
        .into_par_iter()
        .map(|a| {
            let rng = ChaCha8Rng::seed_from_u64(attempt_seed(scenario.seed, t_start, a));
            let mut sampler = RngSampler::new(rng);
            execute_stbd(
                &p,
                &plan,
                &scenario.protocol,
                &scenario.physics,
                scenario.memory,
                scenario.variant,
                &mut sampler,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let (drop_rate, throughput, mean_fidelity) = aggregate(&outcomes, rate, eta);
    record.drop_rate = drop_rate;
    record.throughput = throughput;
    record.mean_fidelity = mean_fidelity;
    record.path_found = true;
    record.end_slot = Some(p.end_slot);
    record.hop_count = p.hop_count();
    record.utility = Some(p.utility);
    record.delivered = outcomes.iter().filter(|o| o.code == OutcomeCode::Ok).count();
    Ok(PointResult {
        record,
        path: Some(p),
        outcomes,
    })
}

pub fn run_point(scenario: &Scenario, t_start: f64, strategy: Strategy) -> Result<PointResult> {
    let evaluator = LinkEvaluator::new(scenario.physics.clone())?;
    let graph = point_graph(scenario, &evaluator, t_start)?;
    run_on_graph(scenario, &graph, t_start, strategy)
}

/// Every transmission time under both strategies, ordered by time then strategy.
pub fn run_sweep(scenario: &Scenario) -> Result<Vec<PointResult>> {
    scenario.validate()?;
    let evaluator = LinkEvaluator::new(scenario.physics.clone())?;
    let per_time = scenario
        .transmission_times
        .par_iter()
        .map(|&t| {
            let graph = point_graph(scenario, &evaluator, t)?;
            Strategy::ALL
                .iter()
                .map(|&s| run_on_graph(scenario, &graph, t, s))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(per_time.into_iter().flatten().collect())
}

/// One sweep per coherence time in `coherence_sweep`.
pub fn run_coherence_sweep(scenario: &Scenario) -> Result<Vec<(f64, Vec<PointResult>)>> {
    if scenario.coherence_sweep.is_empty() {
        return Err(Error::Empty("coherence sweep"));
    }
    scenario
        .coherence_sweep
        .iter()
        .map(|&tc| run_sweep(&scenario.with_coherence_time(tc)).map(|r| (tc, r)))
        .collect()
}

pub const METRICS_HEADER: &str =
    "transmission_time,strategy,drop_rate,throughput,mean_fidelity,path_found,end_slot,hop_count";

pub fn metrics_csv(records: &[MetricsRecord]) -> String {
    let mut out = String::from(METRICS_HEADER);
    out.push('\n');
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            sig9(r.transmission_time),
            r.strategy.as_str(),
            sig9(r.drop_rate),
            sig9(r.throughput),
            sig9(r.mean_fidelity),
            r.path_found,
            r.end_slot.map(|m| m.to_string()).unwrap_or_default(),
            r.hop_count
        );
    }
    out
}

pub const OUTCOME_HEADER: &str = "attempt,path_id,outcome,fidelity";

/// Outcome log, one attempt per line; fidelities carry full precision so
/// aggregates can be recomputed exactly.
pub fn outcome_log(path_id: &str, outcomes: &[Outcome]) -> String {
    let mut out = String::with_capacity(outcomes.len() * 48);
    out.push_str(OUTCOME_HEADER);
    out.push('\n');
    for (i, o) in outcomes.iter().enumerate() {
        let f = o.fidelity.map(|f| format!("{f:.16e}")).unwrap_or_default();
        let _ = writeln!(out, "{i},{path_id},{},{f}", o.code.as_str());
    }
    out
}

pub fn parse_outcome_log(text: &str) -> Result<Vec<Outcome>> {
    let mut lines = text.lines();
    if lines.next() != Some(OUTCOME_HEADER) {
        return Err(Error::Parse("missing outcome log header".into()));
    }
    lines
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            if f.len() != 4 {
                return Err(Error::Parse(format!("bad outcome line {l:?}")));
            }
            let code: OutcomeCode = f[2].parse()?;
            let fidelity = if f[3].is_empty() {
                None
            } else {
                Some(
                    f[3].parse()
                        .map_err(|_| Error::Parse(format!("bad fidelity {:?}", f[3])))?,
                )
            };
            Ok(Outcome { code, fidelity })
        })
        .collect()
}

/// File stem used for one point's outcome log.
pub fn point_id(index: usize, strategy: Strategy) -> String {
    format!("t{index:03}_{}", strategy.as_str().to_ascii_lowercase())
}

/// Writes `metrics.csv` and `outcomes/<point>.csv` under `dir`.
pub fn write_results(
    dir: &Path,
    metrics_name: &str,
    outcome_dir: &str,
    results: &[PointResult],
    times: &[f64],
) -> io::Result<()> {
    fs::create_dir_all(dir.join(outcome_dir))?;
    let records: Vec<MetricsRecord> = results.iter().map(|r| r.record.clone()).collect();
    fs::write(dir.join(metrics_name), metrics_csv(&records))?;
    for r in results {
        let idx = times.iter().position(|&t| t == r.record.transmission_time).unwrap_or(0);
        let id = point_id(idx, r.record.strategy);
        fs::write(
            dir.join(outcome_dir).join(format!("{id}.csv")),
            outcome_log(&id, &r.outcomes),
        )?;
    }
    Ok(())
}
