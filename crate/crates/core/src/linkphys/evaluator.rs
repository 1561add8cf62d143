use std::collections::HashMap;
use std::sync::RwLock;

use super::channel::{isl_log_survival, survival_downlink_at};
use super::{LinkKind, LinkPhysics};
use crate::error::Result;

/// Evaluates link availability with a per-metre cache for downlinks, whose
/// outage needs a nested quadrature.
#[derive(Debug)]
pub struct LinkEvaluator {
    physics: LinkPhysics,
    downlink_cache: RwLock<HashMap<u64, f64>>,
}

impl LinkEvaluator {
    pub fn new(physics: LinkPhysics) -> Result<Self> {
        physics.validate()?;
        Ok(Self {
            physics,
            downlink_cache: RwLock::new(HashMap::new()),
        })
    }

    pub fn physics(&self) -> &LinkPhysics {
        &self.physics
    }

    /// Natural log of the fidelity utility `1 - P_out` of a link.
    ///
    /// Downlinks are evaluated at the distance rounded to the nearest metre,
    /// so cached and uncached calls agree bit for bit.
    pub fn log_fidelity_utility(&self, kind: LinkKind, d: f64) -> Result<f64> {
        match kind {
            LinkKind::Isl => Ok(isl_log_survival(self.physics.eta_threshold(d)?, &self.physics)),
            LinkKind::Downlink => {
                let bucket = d.round().max(1.0);
                let key = bucket as u64;
                if let Some(v) = self.downlink_cache.read().expect("cache lock").get(&key) {
                    return Ok(*v);
                }
                let eta = self.physics.eta_threshold(bucket)?;
                let v = survival_downlink_at(eta, &self.physics)?.ln();
                self.downlink_cache.write().expect("cache lock").insert(key, v);
                Ok(v)
            }
        }
    }

    pub fn fidelity_utility(&self, kind: LinkKind, d: f64) -> Result<f64> {
        self.log_fidelity_utility(kind, d).map(f64::exp)
    }

    /// Outage probability `1 - U_fid`.
    pub fn outage(&self, kind: LinkKind, d: f64) -> Result<f64> {
        self.log_fidelity_utility(kind, d).map(|l| -l.exp_m1())
    }

    pub fn cached_downlinks(&self) -> usize {
        self.downlink_cache.read().expect("cache lock").len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linkphys::{outage_downlink, outage_isl};

    #[test]
    fn agrees_with_direct_evaluation() {
        let ev = LinkEvaluator::new(LinkPhysics::reference()).unwrap();
        let d = 80_000.0;
        assert!((ev.outage(LinkKind::Isl, d).unwrap() - outage_isl(d, ev.physics()).unwrap()).abs() < 1e-14);
        let direct = outage_downlink(d, ev.physics()).unwrap();
        assert!((ev.outage(LinkKind::Downlink, d).unwrap() - direct).abs() < 1e-9);
        assert_eq!(ev.cached_downlinks(), 1);
        let again = ev.outage(LinkKind::Downlink, d + 0.2).unwrap();
        assert_eq!(again, ev.outage(LinkKind::Downlink, d).unwrap());
        assert_eq!(ev.cached_downlinks(), 1);
    }
}
