use rand::Rng;
use rand_distr::{Distribution, Gamma};

/// Hardware events that succeed or fail independently in one attempt.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Event {
    Source,
    Memory,
    Bsm,
}

/// Source of channel realisations and Bernoulli trials for Monte Carlo runs.
pub trait ChannelSampler {
    /// Pointing gain, Gamma(n/2, omega).
    fn pointing_gain(&mut self, n: u32, omega: f64) -> f64;
    /// Gamma-gamma turbulence factor with unit mean.
    fn turbulence(&mut self, alpha: f64, beta: f64) -> f64;
    /// Returns true with probability `p`.
    fn bernoulli(&mut self, p: f64, event: Event) -> bool;
}

/// [`ChannelSampler`] backed by any `rand` generator.
#[derive(Debug, Clone)]
pub struct RngSampler<R> {
    rng: R,
}

impl<R: Rng> RngSampler<R> {
    pub fn new(rng: R) -> Self {
        Self { rng }
    }

    pub fn into_inner(self) -> R {
        self.rng
    }
}

fn gamma(shape: f64, scale: f64) -> Gamma<f64> {
    Gamma::new(shape, scale).expect("shape and scale validated by LinkPhysics")
}

impl<R: Rng> ChannelSampler for RngSampler<R> {
    fn pointing_gain(&mut self, n: u32, omega: f64) -> f64 {
        gamma(f64::from(n) / 2.0, omega).sample(&mut self.rng)
    }

    fn turbulence(&mut self, alpha: f64, beta: f64) -> f64 {
        let x = gamma(alpha, 1.0 / alpha).sample(&mut self.rng);
        let y = gamma(beta, 1.0 / beta).sample(&mut self.rng);
        x * y
    }

    fn bernoulli(&mut self, p: f64, _event: Event) -> bool {
        if p >= 1.0 {
            return true;
        }
        if p <= 0.0 {
            return false;
        }
        self.rng.random::<f64>() < p
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn sample_means() {
        let mut s = RngSampler::new(ChaCha8Rng::seed_from_u64(7));
        let n = 200_000;
        let mut h = 0.0;
        let mut y = 0.0;
        for _ in 0..n {
            h += s.pointing_gain(2, 1.5);
            y += s.turbulence(2.1, 2.1);
        }
        assert!((h / n as f64 - 1.5).abs() < 0.02);
        assert!((y / n as f64 - 1.0).abs() < 0.02);
    }

    #[test]
    fn degenerate_bernoulli() {
        let mut s = RngSampler::new(ChaCha8Rng::seed_from_u64(1));
        assert!(s.bernoulli(1.0, Event::Bsm));
        assert!(!s.bernoulli(0.0, Event::Source));
    }
}
