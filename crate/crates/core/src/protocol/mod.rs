//! Nested entanglement swapping, segmented space-time distribution and the
//! end-to-end fidelity, success-probability and throughput formulas.

mod execute;
mod fidelity;
mod schedule;

pub use execute::{deterministic_fidelity, execute_stbd, link_transmittances, Outcome, OutcomeCode};
pub use fidelity::{
    fidelity_nested, fidelity_segmented, fidelity_wait_till_end, Segment, SegmentPlan, SegmentedVariant,
};
pub use schedule::{assign_rounds_to_nodes, round_schedule, RoundSchedule};

use crate::error::{invalid, Result};
use crate::linkphys::clamp_probability;

#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolParams {
    /// Entanglement generation rate, ebits/s.
    pub rate: f64,
    /// Source success probability.
    pub p_s: f64,
    /// Bell-state measurement success probability.
    pub p_b: f64,
    /// Failure probability of a single memory mode.
    pub p_m: f64,
    /// Memory modes; a memory fails only if all of them fail.
    pub modes: u32,
    /// Duration of one round of Bell-state measurements, s.
    pub t_bsm: f64,
}

impl ProtocolParams {
    /// Rate 10 ebits/s, `P_s = P_b = 0.9`, `P_m = 0.1`, one mode, 10 ms rounds.
    pub fn reference() -> Self {
        Self {
            rate: 10.0,
            p_s: 0.9,
            p_b: 0.9,
            p_m: 0.1,
            modes: 1,
            t_bsm: 0.01,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rate > 0.0) || !self.rate.is_finite() {
            return Err(invalid("rate must be positive"));
        }
        for (name, p) in [("p_s", self.p_s), ("p_b", self.p_b), ("p_m", self.p_m)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(invalid(format!("{name} must lie in [0, 1]")));
            }
        }
        if self.modes == 0 {
            return Err(invalid("modes must be at least 1"));
        }
        if !(self.t_bsm >= 0.0) || !self.t_bsm.is_finite() {
            return Err(invalid("t_bsm must be finite and non-negative"));
        }
        Ok(())
    }

    /// Probability that a memory keeps its share, `1 - P_m^X`.
    pub fn memory_success(&self) -> f64 {
        1.0 - self.p_m.powi(self.modes as i32)
    }
}

/// `P_s^(n-1) (1 - P_m^X)^(2(n-1)) P_b^(n-2)` for a chain of `n` nodes.
pub fn success_probability(n_nodes: usize, params: &ProtocolParams) -> Result<f64> {
    if n_nodes < 2 {
        return Err(invalid("a chain needs at least two nodes"));
    }
    let links = (n_nodes - 1) as i32;
    Ok(params.p_s.powi(links) * params.memory_success().powi(2 * links) * params.p_b.powi(links - 1))
}

/// `R * success * prod(eta_x)`, each transmittance clamped into `[0, 1]`.
pub fn throughput(n_nodes: usize, params: &ProtocolParams, transmittances: &[f64]) -> Result<f64> {
    let p = success_probability(n_nodes, params)?;
    let eta: f64 = transmittances.iter().map(|&t| clamp_probability(t)).product();
    Ok(params.rate * p * eta)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn success_examples() {
        let mut p = ProtocolParams::reference();
        assert!((success_probability(2, &p).unwrap() - 0.729).abs() < 1e-15);
        let expected = 0.9f64.powi(6) * 0.81f64.powi(6) * 0.9f64.powi(5);
        assert!((success_probability(7, &p).unwrap() - expected).abs() < 1e-15);
        assert!((success_probability(7, &p).unwrap() - 0.08862938119652507).abs() < 1e-15);
        assert!(success_probability(1, &p).is_err());
        p.p_s = 1.0;
        p.p_b = 1.0;
        p.p_m = 0.0;
        assert_eq!(success_probability(9, &p).unwrap(), 1.0);
        assert_eq!(throughput(9, &p, &[1.0; 8]).unwrap(), 10.0);
        assert_eq!(throughput(3, &p, &[1.0, 0.0]).unwrap(), 0.0);
    }

    #[test]
    fn throughput_example() {
        let p = ProtocolParams::reference();
        let r = throughput(3, &p, &[0.5, 0.5]).unwrap();
        assert!((r - 10.0 * 0.9f64.powi(2) * 0.9f64.powi(4) * 0.9 * 0.25).abs() < 1e-14);
        assert_eq!(
            throughput(3, &p, &[7.0, 0.5]).unwrap(),
            throughput(3, &p, &[1.0, 0.5]).unwrap()
        );
    }

    #[test]
    fn modes_reduce_memory_failure() {
        let mut p = ProtocolParams::reference();
        p.modes = 3;
        assert!((p.memory_success() - 0.999).abs() < 1e-15);
        p.modes = 0;
        assert!(p.validate().is_err());
    }
}
