//! Simulation of competing-risks data from the structural model.
//!
//! Latent Gumbel pairs come from the Marshall–Olkin frailty construction: with
//! `V` positive α-stable (`α = 1/θ`, Laplace transform `exp(-s^α)`) and
//! `E₁, E₂ ~ Exp(1)`, `Uⱼ = exp(-(Eⱼ/V)^α)` has a Gumbel(θ) copula. `V` is drawn
//! with the Chambers–Mallows–Stuck (Kanter) representation. A second, slower
//! path inverts the conditional copula CDF and is kept to cross-check the
//! first.

// Only needed when std (and its inherent f64 methods) is absent.
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;
use rand_distr::{Distribution, Exp1, Open01, StandardNormal};
use rand_xoshiro::rand_core::SeedableRng;
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::data::{Dataset, Observation, Risk};
use crate::error::{Error, Result};
use crate::structural::{StructuralParams, SURVIVAL_CLAMP};

/// Generator used for every simulated dataset.
pub type SimRng = Xoshiro256PlusPlus;

/// How latent `(T₁, T₂)` pairs are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PairMethod {
    #[default]
    Frailty,
    ConditionalInversion,
}

/// Normal covariate distribution `N(mean, sd²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovariateDist {
    pub mean: f64,
    pub sd: f64,
}

impl Default for CovariateDist {
    fn default() -> Self {
        Self { mean: 0.0, sd: 2.0 }
    }
}

/// Data-generating process for one simulated dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct DgpConfig {
    pub params: StructuralParams,
    pub n: usize,
    pub z_dist: CovariateDist,
    /// Rate of an independent exponential censoring time; `None` disables
    /// censoring.
    pub censoring_rate: Option<f64>,
    pub seed: u64,
    pub method: PairMethod,
}

impl DgpConfig {
    pub fn new(params: StructuralParams, n: usize, seed: u64) -> Self {
        Self {
            params,
            n,
            z_dist: CovariateDist::default(),
            censoring_rate: None,
            seed,
            method: PairMethod::Frailty,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Config("n must be at least 1".into()));
        }
        if !(self.z_dist.sd > 0.0 && self.z_dist.sd.is_finite() && self.z_dist.mean.is_finite()) {
            return Err(Error::Parameter {
                name: "sd",
                value: self.z_dist.sd,
                reason: "covariate sd must be finite and positive",
            });
        }
        if let Some(rate) = self.censoring_rate {
            if !(rate > 0.0 && rate.is_finite()) {
                return Err(Error::Parameter {
                    name: "censoring_rate",
                    value: rate,
                    reason: "must be finite and positive",
                });
            }
        }
        if self.params.dim() != 1 {
            return Err(Error::Dimension {
                expected: 1,
                found: self.params.dim(),
            });
        }
        Ok(())
    }

    /// The same design for replication `r` of a study with base seed
    /// `self.seed`.
    pub fn for_replication(&self, r: u64) -> Self {
        Self {
            seed: replication_seed(self.seed, r),
            ..self.clone()
        }
    }
}

/// Seed of replication `r`, independent of the order replications run in.
pub fn replication_seed(base: u64, r: u64) -> u64 {
    splitmix64(base ^ splitmix64(r.wrapping_add(0x9E37_79B9_7F4A_7C15)))
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Draws `ln V` for a positive stable `V` with `E[e^{-sV}] = exp(-s^α)`,
/// `0 < α < 1`.
fn log_positive_stable<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> f64 {
    let u: f64 = Open01.sample(rng);
    let angle = core::f64::consts::PI * u;
    let e: f64 = Exp1.sample(rng);
    (alpha * angle).sin().ln() - (angle.sin().ln()) / alpha
        + (1.0 - alpha) / alpha * (((1.0 - alpha) * angle).sin().ln() - e.ln())
}

/// Cumulative hazards `(Λ₁(T₁), Λ₂(T₂))` of a Gumbel(θ) latent pair.
fn gumbel_cumulative_pair<R: Rng + ?Sized>(theta: f64, rng: &mut R) -> (f64, f64) {
    let e1: f64 = Exp1.sample(rng);
    let e2: f64 = Exp1.sample(rng);
    if theta == 1.0 {
        return (e1, e2);
    }
    let alpha = 1.0 / theta;
    let log_v = log_positive_stable(alpha, rng);
    (
        (alpha * (e1.ln() - log_v)).exp(),
        (alpha * (e2.ln() - log_v)).exp(),
    )
}

/// One latent pair `(T₁, T₂)` given covariates `z`, via the frailty
/// construction.
pub fn sample_latent_pair<R: Rng + ?Sized>(
    params: &StructuralParams,
    z: &[f64],
    rng: &mut R,
) -> Result<(f64, f64)> {
    let (x1, x2) = gumbel_cumulative_pair(params.theta(), rng);
    Ok((
        params
            .marginal(Risk::First)
            .inverse_cumulative_hazard(x1, z)?,
        params
            .marginal(Risk::Second)
            .inverse_cumulative_hazard(x2, z)?,
    ))
}

/// One latent pair by conditional inversion: `U₁ ~ U(0,1)`, then `U₂` is the
/// `p`-quantile of `V | U = U₁` for `p ~ U(0,1)`.
pub fn sample_latent_pair_conditional<R: Rng + ?Sized>(
    params: &StructuralParams,
    z: &[f64],
    rng: &mut R,
) -> Result<(f64, f64)> {
    let copula = params.copula();
    let u1: f64 = Open01.sample(rng);
    let p: f64 = Open01.sample(rng);
    let u2 = copula.conditional_quantile(u1, p)?;
    let clamp = |s: f64| s.clamp(SURVIVAL_CLAMP, 1.0 - SURVIVAL_CLAMP);
    Ok((
        params
            .marginal(Risk::First)
            .inverse_survival(clamp(u1), z)?,
        params
            .marginal(Risk::Second)
            .inverse_survival(clamp(u2), z)?,
    ))
}

/// Simulates `cfg.n` observations. Deterministic in `cfg.seed`.
pub fn sample_dataset(cfg: &DgpConfig) -> Result<Dataset> {
    cfg.validate()?;
    let mut rng = SimRng::seed_from_u64(cfg.seed);
    let mut data = Dataset::with_capacity(1, cfg.n);
    let mut ties = 0usize;
    for _ in 0..cfg.n {
        let n01: f64 = StandardNormal.sample(&mut rng);
        let z = [cfg.z_dist.mean + cfg.z_dist.sd * n01];
        let (t1, t2) = loop {
            let pair = match cfg.method {
                PairMethod::Frailty => sample_latent_pair(&cfg.params, &z, &mut rng)?,
                PairMethod::ConditionalInversion => {
                    sample_latent_pair_conditional(&cfg.params, &z, &mut rng)?
                }
            };
            if pair.0 != pair.1 && pair.0 > 0.0 && pair.1 > 0.0 {
                break pair;
            }
            ties += 1;
        };
        let (mut t, mut cause) = if t1 < t2 {
            (t1, Some(Risk::First))
        } else {
            (t2, Some(Risk::Second))
        };
        if let Some(rate) = cfg.censoring_rate {
            let e: f64 = Exp1.sample(&mut rng);
            let c = e / rate;
            if c < t && c > 0.0 {
                t = c;
                cause = None;
            }
        }
        data.push(Observation::new(t, cause, z.to_vec()))?;
    }
    if ties > 0 {
        log::warn!("redrew {ties} tied or degenerate latent pair(s)");
    }
    Ok(data)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(theta: f64, n: usize, seed: u64) -> DgpConfig {
        DgpConfig::new(StructuralParams::simulation_design(theta).unwrap(), n, seed)
    }

    #[test]
    fn same_seed_same_data() {
        let a = sample_dataset(&cfg(2.0, 500, 7)).unwrap();
        let b = sample_dataset(&cfg(2.0, 500, 7)).unwrap();
        let c = sample_dataset(&cfg(2.0, 500, 8)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(a.len(), 500);
    }

    #[test]
    fn heavy_censoring_censors_everything() {
        let mut c = cfg(2.0, 300, 3);
        c.censoring_rate = Some(1e9);
        let d = sample_dataset(&c).unwrap();
        assert_eq!(d.count(None), 300);
        assert!(d.iter().all(|r| r.time > 0.0));
    }

    #[test]
    fn invalid_configs() {
        let mut c = cfg(2.0, 0, 1);
        assert!(sample_dataset(&c).is_err());
        c.n = 10;
        c.z_dist.sd = 0.0;
        assert!(sample_dataset(&c).is_err());
        c.z_dist.sd = 1.0;
        c.censoring_rate = Some(-1.0);
        assert!(sample_dataset(&c).is_err());
    }

    #[test]
    fn replication_seeds_are_distinct() {
        let seeds: alloc::vec::Vec<u64> = (0..1000).map(|r| replication_seed(42, r)).collect();
        let mut sorted = seeds.clone();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(sorted.len(), seeds.len());
        assert_eq!(replication_seed(42, 5), replication_seed(42, 5));
        assert_ne!(replication_seed(42, 5), replication_seed(43, 5));
    }

    #[test]
    fn stable_laplace_transform() {
        // E[exp(-V)] = exp(-1) for any α
        let mut rng = SimRng::seed_from_u64(11);
        for alpha in [0.1, 0.5, 0.9] {
            let n = 200_000;
            let mean: f64 = (0..n)
                .map(|_| (-log_positive_stable(alpha, &mut rng).exp()).exp())
                .sum::<f64>()
                / n as f64;
            assert!(
                (mean - (-1.0f64).exp()).abs() < 4e-3,
                "alpha={alpha} mean={mean}"
            );
        }
    }
}
