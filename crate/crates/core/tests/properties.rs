mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use leoqnet::linkphys::{fidelity_from_werner, werner_from_snr, MemoryModel, WernerParam};
use leoqnet::orbit::NodeId;
use leoqnet::protocol::{
    fidelity_nested, fidelity_segmented, fidelity_wait_till_end, round_schedule, success_probability, throughput,
    Outcome, OutcomeCode, ProtocolParams, SegmentPlan, SegmentedVariant,
};
use leoqnet::router::optimal_entanglement_path;
use leoqnet::simkit::{outcome_log, parse_outcome_log};
use leoqnet::spacetime::SnapshotSchedule;

#[derive(Debug, Clone)]
struct Case {
    pieces: Vec<(f64, usize)>,
    werners: Vec<f64>,
    t_bsm: f64,
}

fn case() -> impl Strategy<Value = Case> {
    (
        0.0..500.0f64,
        prop::collection::vec((10.0..300.0f64, 1..5usize), 1..5),
        0.0..1.0f64,
    )
        .prop_flat_map(|(t0, gaps, t_bsm)| {
            let mut t = t0;
            let pieces: Vec<(f64, usize)> = gaps
                .iter()
                .enumerate()
                .map(|(i, &(g, m))| {
                    if i > 0 {
                        t += g;
                    }
                    (t, m)
                })
                .collect();
            let links = pieces.iter().map(|p| p.1).sum::<usize>();
            (Just(pieces), prop::collection::vec(0.5..=1.0f64, links), Just(t_bsm))
        })
        .prop_map(|(pieces, werners, t_bsm)| Case { pieces, werners, t_bsm })
}

fn evaluate(c: &Case, t_c: f64) -> [f64; 4] {
    let links = c.werners.len();
    let chain: Vec<NodeId> = (0..=links).map(NodeId::satellite).collect();
    let spec: Vec<(usize, f64, usize)> = c.pieces.iter().enumerate().map(|(i, &(t, m))| (i, t, m)).collect();
    let plan = SegmentPlan::new(&chain, &spec, c.t_bsm).unwrap();
    let whole = round_schedule(links - 1, c.t_bsm).unwrap();
    let mem = MemoryModel::new(t_c).unwrap();
    [
        fidelity_nested(&c.werners, &whole, mem).unwrap(),
        fidelity_wait_till_end(&c.werners, &plan, &whole, mem).unwrap(),
        fidelity_segmented(&plan, &c.werners, mem, SegmentedVariant::Reconciled).unwrap(),
        fidelity_segmented(&plan, &c.werners, mem, SegmentedVariant::Literal).unwrap(),
    ]
}

proptest! {
    #[test]
    fn fidelities_bounded_and_monotone_in_coherence(c in case(), t_c in 1.0..5000.0f64, k in 1.0..10.0f64) {
        let lo = evaluate(&c, t_c);
        let hi = evaluate(&c, t_c * k);
        for (a, b) in lo.iter().zip(&hi) {
            prop_assert!((0.25..=1.0).contains(a));
            prop_assert!(b >= a);
        }
        // equal storage totals are summed in different orders
        prop_assert!(lo[2] >= lo[1] - 1e-15);
        prop_assert!(lo[2] >= lo[3]);
    }

    #[test]
    fn fidelities_match_trace(c in case(), t_c in 50.0..5000.0f64) {
        let [nested, wait, seg, lit] = evaluate(&c, t_c);
        let links = c.werners.len();
        let chain: Vec<NodeId> = (0..=links).map(NodeId::satellite).collect();
        let spec: Vec<(usize, f64, usize)> = c.pieces.iter().enumerate().map(|(i, &(t, m))| (i, t, m)).collect();
        let times = SegmentPlan::new(&chain, &spec, c.t_bsm).unwrap().link_times();
        prop_assert!((nested - common::nested_trace(links, c.t_bsm).fidelity(&c.werners, t_c)).abs() < 1e-12);
        prop_assert!((wait - common::wait_till_end_trace(&times, c.t_bsm).fidelity(&c.werners, t_c)).abs() < 1e-12);
        prop_assert!((seg - common::segmented_trace(&c.pieces, c.t_bsm, false).fidelity(&c.werners, t_c)).abs() < 1e-12);
        prop_assert!((lit - common::segmented_trace(&c.pieces, c.t_bsm, true).fidelity(&c.werners, t_c)).abs() < 1e-12);
    }

    #[test]
    fn zero_bsm_time_is_pure_link_product(w in prop::collection::vec(0.0..=1.0f64, 1..12)) {
        let s = round_schedule(w.len() - 1, 0.0).unwrap();
        let f = fidelity_nested(&w, &s, MemoryModel::new(1.0).unwrap()).unwrap();
        let p: f64 = w.iter().product();
        prop_assert!((f - (1.0 + 3.0 * p) / 4.0).abs() < 1e-15);
    }

    #[test]
    fn werner_snr_round_trip(w in 0.0..0.999_999f64) {
        let back = werner_from_snr(w / (1.0 - w)).unwrap().value();
        prop_assert!((back - w).abs() < 1e-12);
        let f = fidelity_from_werner(WernerParam::new(w).unwrap());
        prop_assert!((0.25..=1.0).contains(&f));
    }

    #[test]
    fn success_probability_shrinks_with_length(n in 2..40usize, p_s in 0.01..=1.0f64, p_b in 0.01..=1.0f64, p_m in 0.0..0.99f64, modes in 1..4u32) {
        let params = ProtocolParams { p_s, p_b, p_m, modes, ..ProtocolParams::reference() };
        let a = success_probability(n, &params).unwrap();
        let b = success_probability(n + 1, &params).unwrap();
        prop_assert!(a > 0.0 && a <= 1.0);
        prop_assert!(b <= a);
        let etas = vec![1.0; n - 1];
        prop_assert!((throughput(n, &params, &etas).unwrap() - params.rate * a).abs() <= 1e-12 * params.rate);
    }

    #[test]
    fn router_matches_brute_force(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = common::random_graph(&mut rng, true);
        let best = g.end_slots().into_iter().filter_map(|m| g.brute_force(m)).reduce(f64::max);
        let got = optimal_entanglement_path(&g.query, &g.graph).unwrap().map(|p| p.utility);
        prop_assert_eq!(got, best);
    }

    #[test]
    fn outcome_log_round_trips(codes in prop::collection::vec((0..6usize, 0.25..=1.0f64), 0..50)) {
        let outcomes: Vec<Outcome> = codes
            .iter()
            .map(|&(c, f)| {
                let code = OutcomeCode::ALL[c];
                Outcome { code, fidelity: (code == OutcomeCode::Ok).then_some(f) }
            })
            .collect();
        let text = outcome_log("t000_stbd", &outcomes);
        prop_assert_eq!(parse_outcome_log(&text).unwrap(), outcomes);
    }

    #[test]
    fn slot_lookup_is_half_open(mut points in prop::collection::vec(0.0..1e4f64, 2..20), probe in 0.0..1e4f64) {
        points.sort_by(f64::total_cmp);
        points.dedup();
        prop_assume!(points.len() >= 2);
        let s = SnapshotSchedule::new(points.clone()).unwrap();
        match s.slot_of(probe) {
            Some(m) => {
                let (a, b) = s.slot_bounds(m);
                prop_assert!(a <= probe && probe < b);
            }
            None => prop_assert!(probe < points[0] || probe >= *points.last().unwrap()),
        }
    }
}
