//! Statistical link physics: Werner-state algebra, SNR and fidelity
//! relations, pointing and turbulence densities, outage probabilities,
//! transmittance and channel sampling.

mod channel;
mod evaluator;
mod sampling;
mod werner;

pub use channel::{
    outage_downlink, outage_downlink_at, outage_isl, outage_isl_by_quadrature, pointing_cdf, pointing_pdf,
    survival_downlink, survival_downlink_at, transmittance, turbulence_cdf, turbulence_pdf,
};
pub use evaluator::LinkEvaluator;
pub use sampling::{ChannelSampler, Event, RngSampler};
pub use werner::{
    compose_werner, fidelity_from_snr, fidelity_from_werner, link_utility, memory_utility, snr_from_werner,
    snr_threshold, werner_from_snr, WernerParam,
};

use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LinkKind {
    /// Inter-satellite link, no atmospheric term.
    Isl,
    /// Satellite-to-ground link with gamma-gamma turbulence.
    Downlink,
}

impl LinkKind {
    pub fn as_str(self) -> &'static str {
        match self {
            LinkKind::Isl => "ISL",
            LinkKind::Downlink => "DOWNLINK",
        }
    }
}

/// Channel and threshold parameters shared by every link.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkPhysics {
    /// Path-loss exponent.
    pub gamma: f64,
    /// Transmit power, W.
    pub p_t: f64,
    /// Noise power, W.
    pub n0: f64,
    /// Scale of the pointing-gain distribution.
    pub omega: f64,
    /// Degrees of freedom of the pointing-gain chi-square law.
    pub chi_n: u32,
    pub alpha_turb: f64,
    pub beta_turb: f64,
    /// Fidelity threshold below which a link is in outage.
    pub fidelity_threshold: f64,
    /// Distances enter the path loss as `(d / reference_distance)^-gamma`, m.
    pub reference_distance: f64,
}

impl LinkPhysics {
    /// Entanglement-distribution parameters with a 1 m reference distance.
    pub fn reference() -> Self {
        Self {
            gamma: 2.0,
            p_t: 50.0,
            n0: 1e-9,
            omega: 1.0,
            chi_n: 2,
            alpha_turb: 2.1,
            beta_turb: 2.1,
            fidelity_threshold: 0.8,
            reference_distance: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("gamma", self.gamma),
            ("p_t", self.p_t),
            ("n0", self.n0),
            ("omega", self.omega),
            ("alpha_turb", self.alpha_turb),
            ("beta_turb", self.beta_turb),
            ("reference_distance", self.reference_distance),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(invalid(format!("{name} must be positive and finite")));
            }
        }
        if self.chi_n == 0 {
            return Err(invalid("chi_n must be at least 1"));
        }
        if !(self.fidelity_threshold > 0.25 && self.fidelity_threshold < 1.0) {
            return Err(invalid("fidelity_threshold must lie in (1/4, 1)"));
        }
        Ok(())
    }

    /// SNR threshold matching the fidelity threshold.
    pub fn snr_threshold(&self) -> f64 {
        snr_threshold(self.fidelity_threshold).expect("validated threshold")
    }

    fn path_gain(&self, d: f64) -> f64 {
        (d / self.reference_distance).powf(-self.gamma)
    }

    /// Gain threshold `beta N0 d^gamma / P_T`: the link is in outage when the
    /// random channel gain falls below it.
    pub fn eta_threshold(&self, d: f64) -> Result<f64> {
        if !(d > 0.0) {
            return Err(invalid("link distance must be positive"));
        }
        Ok(self.snr_threshold() * self.n0 / (self.p_t * self.path_gain(d)))
    }

    /// Mean of the pointing gain, `n Omega / 2`.
    pub fn mean_pointing_gain(&self) -> f64 {
        f64::from(self.chi_n) * self.omega / 2.0
    }

    /// SNR for a realised channel: `d^-gamma h^2 P_T Y / N0`.
    pub fn snr(&self, d: f64, pointing: f64, turbulence: f64) -> f64 {
        self.path_gain(d) * pointing * self.p_t * turbulence / self.n0
    }

    /// SNR at the mean channel gains (turbulence has unit mean).
    pub fn mean_snr(&self, d: f64) -> f64 {
        self.snr(d, self.mean_pointing_gain(), 1.0)
    }

    /// Fidelity of a link at the mean channel gains.
    pub fn deterministic_fidelity(&self, d: f64) -> f64 {
        fidelity_from_snr(self.mean_snr(d)).unwrap_or(0.25)
    }
}

/// Quantum-memory decoherence model `W_m(t) = exp(-t / t_c)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MemoryModel {
    pub coherence_time: f64,
}

impl MemoryModel {
    pub fn new(coherence_time: f64) -> Result<Self> {
        if !(coherence_time > 0.0) {
            return Err(invalid("coherence time must be positive"));
        }
        Ok(Self { coherence_time })
    }

    /// Werner parameter of a share stored for `t` seconds.
    pub fn werner(&self, t: f64) -> f64 {
        (-t / self.coherence_time).exp()
    }
}

/// Clamps a transmittance into `[0, 1]` for use as a success multiplier.
pub fn clamp_probability(x: f64) -> f64 {
    if x.is_nan() {
        0.0
    } else {
        x.clamp(0.0, 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eta_at_one_hundred_km() {
        let phys = LinkPhysics::reference();
        let eta = phys.eta_threshold(100_000.0).unwrap();
        assert!((eta - 0.55).abs() < 1e-15, "{eta}");
        assert_eq!(phys.eta_threshold(200_000.0).unwrap() / eta, 4.0);
        assert!(phys.eta_threshold(0.0).is_err());
    }

    #[test]
    fn eta_monotone_in_distance() {
        let phys = LinkPhysics::reference();
        let mut last = 0.0;
        for k in 1..50 {
            let e = phys.eta_threshold(k as f64 * 1000.0).unwrap();
            assert!(e > last);
            last = e;
        }
    }

    #[test]
    fn deterministic_fidelity_crosses_threshold_at_mean_gain() {
        let phys = LinkPhysics::reference();
        // eta = 1 = n*Omega/2 exactly at d^2 = P_T / (beta N0).
        let d = (phys.p_t / (phys.snr_threshold() * phys.n0)).sqrt();
        assert!((phys.deterministic_fidelity(d) - 0.8).abs() < 1e-12);
        assert!(phys.deterministic_fidelity(0.9 * d) > 0.8);
        assert!(phys.deterministic_fidelity(1.1 * d) < 0.8);
    }

    #[test]
    fn validation() {
        assert!(LinkPhysics::reference().validate().is_ok());
        let mut p = LinkPhysics::reference();
        p.fidelity_threshold = 1.0;
        assert!(p.validate().is_err());
        let mut p = LinkPhysics::reference();
        p.alpha_turb = 0.0;
        assert!(p.validate().is_err());
        assert!(MemoryModel::new(0.0).is_err());
    }
}
