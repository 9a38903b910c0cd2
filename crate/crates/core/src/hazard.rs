//! Proportional-hazards marginals `λ(t|z) = λ₀(t)·exp(z·β)`.

// Only needed when std (and its inherent f64 methods) is absent.
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{check_open_probability, check_time, Error, Result};
use crate::num::dot;

/// Baseline hazard family. Both have closed-form cumulative hazards and
/// inverses, so sampling never needs quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Baseline {
    /// Constant hazard `rate`.
    Exponential { rate: f64 },
    /// `λ₀(t) = shape·scale·(scale·t)^{shape-1}`, `Λ₀(t) = (scale·t)^shape`.
    Weibull { scale: f64, shape: f64 },
}

impl Baseline {
    pub fn validate(&self) -> Result<()> {
        let positive = |name, value: f64| {
            if value.is_finite() && value > 0.0 {
                Ok(())
            } else {
                Err(Error::Parameter {
                    name,
                    value,
                    reason: "must be finite and positive",
                })
            }
        };
        match *self {
            Baseline::Exponential { rate } => positive("rate", rate),
            Baseline::Weibull { scale, shape } => {
                positive("scale", scale)?;
                positive("shape", shape)
            }
        }
    }

    pub fn hazard(&self, t: f64) -> f64 {
        match *self {
            Baseline::Exponential { rate } => rate,
            Baseline::Weibull { scale, shape } => shape * scale * (scale * t).powf(shape - 1.0),
        }
    }

    pub fn cumulative(&self, t: f64) -> f64 {
        match *self {
            Baseline::Exponential { rate } => rate * t,
            Baseline::Weibull { scale, shape } => (scale * t).powf(shape),
        }
    }

    pub fn log_hazard(&self, t: f64) -> f64 {
        match *self {
            Baseline::Exponential { rate } => rate.ln(),
            Baseline::Weibull { scale, shape } => {
                shape.ln() + scale.ln() + (shape - 1.0) * (scale * t).ln()
            }
        }
    }

    pub fn log_cumulative(&self, t: f64) -> f64 {
        match *self {
            Baseline::Exponential { rate } => rate.ln() + t.ln(),
            Baseline::Weibull { scale, shape } => shape * (scale * t).ln(),
        }
    }

    /// Time at which the baseline cumulative hazard reaches `x`.
    pub fn inverse_cumulative(&self, x: f64) -> f64 {
        match *self {
            Baseline::Exponential { rate } => x / rate,
            Baseline::Weibull { scale, shape } => x.powf(1.0 / shape) / scale,
        }
    }

    /// The constant `Λ₀,other(t) / Λ₀,self(t)` when the two baselines are
    /// proportional; `None` otherwise.
    pub fn proportionality_ratio(&self, other: &Baseline) -> Option<f64> {
        match (*self, *other) {
            (Baseline::Exponential { rate: a }, Baseline::Exponential { rate: b }) => Some(b / a),
            (
                Baseline::Weibull {
                    scale: s1,
                    shape: k1,
                },
                Baseline::Weibull {
                    scale: s2,
                    shape: k2,
                },
            ) if k1 == k2 => Some((s2 / s1).powf(k1)),
            _ => None,
        }
    }

    /// Returns this baseline with its cumulative hazard multiplied by
    /// `factor`.
    pub fn scaled(&self, factor: f64) -> Baseline {
        match *self {
            Baseline::Exponential { rate } => Baseline::Exponential {
                rate: rate * factor,
            },
            Baseline::Weibull { scale, shape } => Baseline::Weibull {
                scale: scale * factor.powf(1.0 / shape),
                shape,
            },
        }
    }
}

/// One marginal hazard: baseline plus covariate coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginalHazard {
    baseline: Baseline,
    coeffs: Vec<f64>,
}

impl MarginalHazard {
    pub fn new(baseline: Baseline, coeffs: Vec<f64>) -> Result<Self> {
        baseline.validate()?;
        if let Some(&bad) = coeffs.iter().find(|c| !c.is_finite()) {
            return Err(Error::Parameter {
                name: "beta1",
                value: bad,
                reason: "coefficients must be finite",
            });
        }
        Ok(Self { baseline, coeffs })
    }

    pub fn baseline(&self) -> &Baseline {
        &self.baseline
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    /// `z·β`.
    pub fn linear_predictor(&self, z: &[f64]) -> Result<f64> {
        if z.len() != self.coeffs.len() {
            return Err(Error::Dimension {
                expected: self.coeffs.len(),
                found: z.len(),
            });
        }
        Ok(dot(z, &self.coeffs))
    }

    /// Covariate function `φ(z) = exp(z·β)`.
    pub fn covariate_factor(&self, z: &[f64]) -> Result<f64> {
        Ok(self.linear_predictor(z)?.exp())
    }

    pub fn hazard(&self, t: f64, z: &[f64]) -> Result<f64> {
        check_time(t)?;
        Ok(self.baseline.hazard(t) * self.covariate_factor(z)?)
    }

    pub fn log_hazard(&self, t: f64, z: &[f64]) -> Result<f64> {
        check_time(t)?;
        Ok(self.baseline.log_hazard(t) + self.linear_predictor(z)?)
    }

    pub fn cumulative_hazard(&self, t: f64, z: &[f64]) -> Result<f64> {
        check_time(t)?;
        Ok(self.baseline.cumulative(t) * self.covariate_factor(z)?)
    }

    pub fn log_cumulative_hazard(&self, t: f64, z: &[f64]) -> Result<f64> {
        check_time(t)?;
        Ok(self.baseline.log_cumulative(t) + self.linear_predictor(z)?)
    }

    pub fn survival(&self, t: f64, z: &[f64]) -> Result<f64> {
        Ok((-self.cumulative_hazard(t, z)?).exp())
    }

    /// Time `t` with `Λ(t|z) = x`.
    pub fn inverse_cumulative_hazard(&self, x: f64, z: &[f64]) -> Result<f64> {
        if !(x > 0.0 && x.is_finite()) {
            return Err(Error::Domain {
                what: "cumulative hazard",
                value: x,
                domain: "(0, inf)",
            });
        }
        let lp = self.linear_predictor(z)?;
        Ok(self.baseline.inverse_cumulative(x * (-lp).exp()))
    }

    /// Time `t` with `S(t|z) = s`.
    pub fn inverse_survival(&self, s: f64, z: &[f64]) -> Result<f64> {
        check_open_probability("s", s)?;
        self.inverse_cumulative_hazard(-s.ln(), z)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use core::f64::consts::{E, LN_2};

    fn expo(rate: f64, beta: f64) -> MarginalHazard {
        MarginalHazard::new(Baseline::Exponential { rate }, vec![beta]).unwrap()
    }

    #[test]
    fn hazard_examples() {
        let m = expo(1.0, 1.0);
        assert_eq!(m.hazard(3.7, &[0.0]).unwrap(), 1.0);
        assert!((m.hazard(0.2, &[1.0]).unwrap() - E).abs() < 1e-15);

        let w = MarginalHazard::new(
            Baseline::Weibull {
                scale: 1.0,
                shape: 2.0,
            },
            vec![0.0],
        )
        .unwrap();
        assert!((w.hazard(0.5, &[3.0]).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn survival_examples() {
        let m = expo(1.0, 0.0);
        assert!((m.survival(LN_2, &[0.3]).unwrap() - 0.5).abs() < 1e-15);
        assert!((m.inverse_survival(0.5, &[0.3]).unwrap() - LN_2).abs() < 1e-15);
        let m2 = expo(1.0, 2.0);
        assert!((m2.cumulative_hazard(1.0, &[0.5]).unwrap() - E).abs() < 1e-14);
    }

    #[test]
    fn domain_errors() {
        let m = expo(1.0, 0.0);
        assert!(m.hazard(0.0, &[0.0]).is_err());
        assert!(m.hazard(-1.0, &[0.0]).is_err());
        assert!(m.inverse_survival(1.0, &[0.0]).is_err());
        assert!(m.inverse_survival(0.0, &[0.0]).is_err());
        assert!(matches!(
            m.hazard(1.0, &[0.0, 1.0]),
            Err(Error::Dimension { .. })
        ));
        assert!(MarginalHazard::new(Baseline::Exponential { rate: 0.0 }, vec![]).is_err());
        assert!(MarginalHazard::new(
            Baseline::Weibull {
                scale: 1.0,
                shape: -1.0
            },
            vec![]
        )
        .is_err());
    }

    #[test]
    fn survival_inverse_roundtrip_grid() {
        let specs = [
            expo(0.7, -0.4),
            MarginalHazard::new(
                Baseline::Weibull {
                    scale: 1.3,
                    shape: 0.6,
                },
                vec![0.9],
            )
            .unwrap(),
            MarginalHazard::new(
                Baseline::Weibull {
                    scale: 0.4,
                    shape: 2.5,
                },
                vec![-1.5],
            )
            .unwrap(),
        ];
        for m in &specs {
            for i in 1..100 {
                let s = i as f64 / 100.0;
                let t = m.inverse_survival(s, &[0.8]).unwrap();
                assert!((m.survival(t, &[0.8]).unwrap() - s).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn risk_proportional_baselines() {
        let b1 = Baseline::Weibull {
            scale: 0.8,
            shape: 1.7,
        };
        let b2 = b1.scaled(2.5);
        let ratio = b1.proportionality_ratio(&b2).unwrap();
        assert!((ratio - 2.5).abs() < 1e-12);
        for i in 1..=50 {
            let t = i as f64 * 0.1;
            assert!((b2.cumulative(t) / b1.cumulative(t) - ratio).abs() < 1e-12);
        }
        let e1 = Baseline::Exponential { rate: 1.0 };
        assert_eq!(e1.proportionality_ratio(&e1.scaled(3.0)), Some(3.0));
        assert_eq!(e1.proportionality_ratio(&b1), None);
    }
}
