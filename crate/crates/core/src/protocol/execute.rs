use std::fmt;
use std::str::FromStr;

use crate::error::{invalid, Error, Result};
use crate::linkphys::{transmittance, werner_from_snr, ChannelSampler, Event, LinkKind, LinkPhysics, MemoryModel};
use crate::router::PathSolution;

use super::fidelity::{fidelity_segmented, SegmentPlan, SegmentedVariant};
use super::ProtocolParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OutcomeCode {
    Ok,
    /// A sampled link fell below the fidelity threshold.
    DropFid,
    DropSrc,
    DropBsm,
    DropMem,
    NoPath,
}

impl OutcomeCode {
    pub const ALL: [OutcomeCode; 6] = [
        OutcomeCode::Ok,
        OutcomeCode::DropFid,
        OutcomeCode::DropSrc,
        OutcomeCode::DropBsm,
        OutcomeCode::DropMem,
        OutcomeCode::NoPath,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            OutcomeCode::Ok => "OK",
            OutcomeCode::DropFid => "DROP_FID",
            OutcomeCode::DropSrc => "DROP_SRC",
            OutcomeCode::DropBsm => "DROP_BSM",
            OutcomeCode::DropMem => "DROP_MEM",
            OutcomeCode::NoPath => "NO_PATH",
        }
    }

    pub fn is_drop(self) -> bool {
        self != OutcomeCode::Ok
    }
}

impl fmt::Display for OutcomeCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for OutcomeCode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        OutcomeCode::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| Error::Parse(format!("unknown outcome code {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Outcome {
    pub code: OutcomeCode,
    /// Delivered end-to-end fidelity; `None` on a drop.
    pub fidelity: Option<f64>,
}

impl Outcome {
    pub fn dropped(code: OutcomeCode) -> Self {
        Self { code, fidelity: None }
    }
}

fn links(path: &PathSolution) -> Result<Vec<(LinkKind, f64)>> {
    path.spatial_edges()
        .map(|e| {
            e.link
                .map(|k| (k, e.distance))
                .ok_or_else(|| invalid("spatial edge without a link kind"))
        })
        .collect()
}

/// Segmented fidelity with every link at its mean-gain Werner parameter.
pub fn deterministic_fidelity(
    path: &PathSolution,
    plan: &SegmentPlan,
    physics: &LinkPhysics,
    mem: MemoryModel,
    variant: SegmentedVariant,
) -> Result<f64> {
    let werners = links(path)?
        .into_iter()
        .map(|(_, d)| werner_from_snr(physics.mean_snr(d)).map(|w| w.value()))
        .collect::<Result<Vec<_>>>()?;
    fidelity_segmented(plan, &werners, mem, variant)
}

/// Mean-gain transmittance of every link on the path.
pub fn link_transmittances(path: &PathSolution, physics: &LinkPhysics) -> Result<Vec<f64>> {
    links(path)?
        .into_iter()
        .map(|(k, d)| transmittance(d, k, physics.mean_pointing_gain(), 1.0, physics))
        .collect()
}

/// One Monte Carlo attempt of segmented distribution along `path`.
///
/// Channels are sampled first; a link whose SNR misses the threshold drops
/// the attempt. Then sources, memories and Bell-state measurements are
/// tried in that order, and the first failure decides the drop reason.
pub fn execute_stbd<S: ChannelSampler + ?Sized>(
    path: &PathSolution,
    plan: &SegmentPlan,
    params: &ProtocolParams,
    physics: &LinkPhysics,
    mem: MemoryModel,
    variant: SegmentedVariant,
    sampler: &mut S,
) -> Result<Outcome> {
    let links = links(path)?;
    if links.len() != plan.link_count() {
        return Err(invalid("segment plan does not match the path"));
    }
    let beta = physics.snr_threshold();
    let mut werners = Vec::with_capacity(links.len());
    for &(kind, d) in &links {
        let h2 = sampler.pointing_gain(physics.chi_n, physics.omega);
        let y = match kind {
            LinkKind::Isl => 1.0,
            LinkKind::Downlink => sampler.turbulence(physics.alpha_turb, physics.beta_turb),
        };
        let snr = physics.snr(d, h2, y);
        if snr < beta {
            return Ok(Outcome::dropped(OutcomeCode::DropFid));
        }
        werners.push(werner_from_snr(snr)?.value());
    }
    let n = links.len();
    for _ in 0..n {
        if !sampler.bernoulli(params.p_s, Event::Source) {
            return Ok(Outcome::dropped(OutcomeCode::DropSrc));
        }
    }
    let keep = params.memory_success();
    for _ in 0..2 * n {
        if !sampler.bernoulli(keep, Event::Memory) {
            return Ok(Outcome::dropped(OutcomeCode::DropMem));
        }
    }
    for _ in 0..n - 1 {
        if !sampler.bernoulli(params.p_b, Event::Bsm) {
            return Ok(Outcome::dropped(OutcomeCode::DropBsm));
        }
    }
    let f = fidelity_segmented(plan, &werners, mem, variant)?;
    Ok(Outcome {
        code: OutcomeCode::Ok,
        fidelity: Some(f),
    })
}
