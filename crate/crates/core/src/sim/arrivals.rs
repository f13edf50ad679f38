//! Query arrival processes.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Distribution of the gap between consecutive arrivals, both with mean `lambda` seconds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GapDistribution {
    /// Whole seconds drawn from a Poisson distribution with mean `lambda`.
    #[default]
    Poisson,
    /// Continuous exponential gaps (a Poisson process).
    Exponential,
}

enum Sampler {
    Poisson(Poisson<f64>),
    Exponential(Exp<f64>),
}

/// Endless stream of inter-arrival gaps.
pub struct GapStream {
    rng: ChaCha8Rng,
    sampler: Sampler,
}

impl GapStream {
    pub fn new(lambda: f64, dist: GapDistribution, seed: u64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::Domain(format!("mean inter-arrival gap must be > 0, got {lambda}")));
        }
        let sampler = match dist {
            GapDistribution::Poisson => Sampler::Poisson(
                Poisson::new(lambda).map_err(|e| Error::Domain(format!("poisson({lambda}): {e}")))?,
            ),
            GapDistribution::Exponential => Sampler::Exponential(
                Exp::new(1.0 / lambda).map_err(|e| Error::Domain(format!("exp(1/{lambda}): {e}")))?,
            ),
        };
        Ok(GapStream {
            rng: ChaCha8Rng::seed_from_u64(seed),
            sampler,
        })
    }
}

impl Iterator for GapStream {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        Some(match &self.sampler {
            Sampler::Poisson(d) => d.sample(&mut self.rng),
            Sampler::Exponential(d) => d.sample(&mut self.rng),
        })
    }
}

/// Arrival instants in `[0, duration)` with gaps of mean `lambda` seconds.
pub fn generate_arrivals(lambda: f64, duration: f64, seed: u64, dist: GapDistribution) -> Result<Vec<f64>> {
    let gaps = GapStream::new(lambda, dist, seed)?;
    if !(duration > 0.0) {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    let mut t = 0.0;
    for gap in gaps {
        t += gap;
        if t >= duration {
            break;
        }
        out.push(t);
    }
    Ok(out)
}
