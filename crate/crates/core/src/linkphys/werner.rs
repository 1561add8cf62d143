use crate::error::{invalid, Error, Result};

/// Depolarizing (Werner) parameter in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct WernerParam(f64);

impl WernerParam {
    pub const IDENTITY: WernerParam = WernerParam(1.0);

    pub fn new(w: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&w) {
            Ok(Self(w))
        } else {
            Err(invalid(format!("Werner parameter {w} outside [0, 1]")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// `F = (1 + 3 w) / 4`.
pub fn fidelity_from_werner(w: WernerParam) -> f64 {
    (1.0 + 3.0 * w.0) / 4.0
}

/// `SNR_T = w / (1 - w)`.
pub fn snr_from_werner(w: WernerParam) -> Result<f64> {
    if w.0 >= 1.0 {
        return Err(Error::InfiniteSnr);
    }
    Ok(w.0 / (1.0 - w.0))
}

/// Inverse of [`snr_from_werner`].
pub fn werner_from_snr(snr: f64) -> Result<WernerParam> {
    if !(snr >= 0.0) {
        return Err(invalid("SNR must be non-negative"));
    }
    if snr.is_infinite() {
        return Ok(WernerParam::IDENTITY);
    }
    WernerParam::new(snr / (1.0 + snr))
}

/// `F = (1 + 4 snr) / (4 + 4 snr)`.
pub fn fidelity_from_snr(snr: f64) -> Result<f64> {
    if !(snr >= 0.0) {
        return Err(invalid("SNR must be non-negative"));
    }
    if snr.is_infinite() {
        return Ok(1.0);
    }
    Ok((1.0 + 4.0 * snr) / (4.0 + 4.0 * snr))
}

/// SNR below which the fidelity drops under `threshold`:
/// `(4 Gamma - 1) / (4 - 4 Gamma)`.
pub fn snr_threshold(threshold: f64) -> Result<f64> {
    if !(0.25..1.0).contains(&threshold) {
        return Err(invalid("fidelity threshold must lie in [1/4, 1)"));
    }
    Ok((4.0 * threshold - 1.0) / (4.0 - 4.0 * threshold))
}

/// Memory utility `exp(-t / t_c)`.
pub fn memory_utility(t: f64, coherence_time: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(invalid("storage time must be non-negative"));
    }
    if !(coherence_time > 0.0) {
        return Err(invalid("coherence time must be positive"));
    }
    Ok((-t / coherence_time).exp())
}

/// Sequential or parallel depolarizing channels compose multiplicatively.
pub fn compose_werner<I: IntoIterator<Item = WernerParam>>(params: I) -> WernerParam {
    WernerParam(params.into_iter().map(|w| w.0).product())
}

/// `U = fid^w_f * mem^w_m` for utilities in `(0, 1]`.
pub fn link_utility(fid_utility: f64, mem_utility: f64, w_f: f64, w_m: f64) -> Result<f64> {
    for (name, u) in [("fidelity", fid_utility), ("memory", mem_utility)] {
        if !(u > 0.0 && u <= 1.0) {
            return Err(invalid(format!("{name} utility {u} outside (0, 1]")));
        }
    }
    Ok(fid_utility.powf(w_f) * mem_utility.powf(w_m))
}
