//! Bivariate copulas: evaluation, partial derivatives, Kendall's tau and
//! conditional quantiles.
//!
//! All families here are exchangeable, so derivatives with respect to the
//! second argument are obtained by swapping the arguments.

// Only needed when std (and its inherent f64 methods) is absent.
use crate::error::{check_open_probability, check_probability, Error, Result};
use crate::num::log_add_exp;
#[allow(unused_imports)]
use num_traits::Float;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    /// `exp(-((-ln u)^θ + (-ln v)^θ)^{1/θ})`, θ ≥ 1.
    Gumbel,
    /// `(u^{-θ} + v^{-θ} - 1)^{-1/θ}`, θ ≥ 0 with θ = 0 the product copula.
    Clayton,
    Independence,
    /// Fréchet–Hoeffding upper bound `min(u, v)`.
    FrechetUpper,
}

/// Which argument of `C(u, v)` to differentiate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Arg {
    First,
    Second,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Copula {
    family: Family,
    theta: f64,
}

impl Copula {
    pub fn gumbel(theta: f64) -> Result<Self> {
        if !(theta.is_finite() && theta >= 1.0) {
            return Err(Error::Parameter {
                name: "theta",
                value: theta,
                reason: "Gumbel requires a finite theta >= 1",
            });
        }
        Ok(Self {
            family: Family::Gumbel,
            theta,
        })
    }

    /// Clayton copula restricted to non-negative dependence.
    pub fn clayton(theta: f64) -> Result<Self> {
        if !(theta.is_finite() && theta >= 0.0) {
            return Err(Error::Parameter {
                name: "theta",
                value: theta,
                reason: "Clayton is supported for finite theta >= 0",
            });
        }
        Ok(Self {
            family: Family::Clayton,
            theta,
        })
    }

    pub fn independence() -> Self {
        Self {
            family: Family::Independence,
            theta: f64::NAN,
        }
    }

    pub fn frechet_upper() -> Self {
        Self {
            family: Family::FrechetUpper,
            theta: f64::NAN,
        }
    }

    pub fn family(&self) -> Family {
        self.family
    }

    /// Dependence parameter; `None` for the parameter-free families.
    pub fn theta(&self) -> Option<f64> {
        match self.family {
            Family::Gumbel | Family::Clayton => Some(self.theta),
            Family::Independence | Family::FrechetUpper => None,
        }
    }

    pub fn cdf(&self, u: f64, v: f64) -> Result<f64> {
        check_probability("u", u)?;
        check_probability("v", v)?;
        Ok(self.cdf_unchecked(u, v))
    }

    fn cdf_unchecked(&self, u: f64, v: f64) -> f64 {
        if u == 0.0 || v == 0.0 {
            return 0.0;
        }
        match self.family {
            Family::Independence => u * v,
            Family::FrechetUpper => u.min(v),
            Family::Gumbel => {
                if self.theta == 1.0 {
                    return u * v;
                }
                (-gumbel_w(self.theta, u, v)).exp()
            }
            Family::Clayton => {
                if self.theta == 0.0 {
                    return u * v;
                }
                let t = self.theta;
                clayton_sum(t, u, v).powf(-1.0 / t)
            }
        }
    }

    /// Partial derivative of `C` with respect to argument `arg`, for
    /// `u, v` strictly inside the unit interval.
    pub fn partial(&self, u: f64, v: f64, arg: Arg) -> Result<f64> {
        check_open_probability("u", u)?;
        check_open_probability("v", v)?;
        let (a, b) = match arg {
            Arg::First => (u, v),
            Arg::Second => (v, u),
        };
        if self.family == Family::FrechetUpper && a == b {
            return Err(Error::Domain {
                what: "u",
                value: a,
                domain: "u != v (min(u, v) is not differentiable on the diagonal)",
            });
        }
        Ok(self.partial_first(a, b))
    }

    /// `dC/du` at `(u, v)`; this is also the conditional CDF of `V` given
    /// `U = u`, evaluated at `v`.
    fn partial_first(&self, u: f64, v: f64) -> f64 {
        if v <= 0.0 {
            return 0.0;
        }
        if v >= 1.0 {
            return 1.0;
        }
        match self.family {
            Family::Independence => v,
            Family::FrechetUpper => {
                if u < v {
                    1.0
                } else {
                    0.0
                }
            }
            Family::Gumbel => {
                let t = self.theta;
                if t == 1.0 {
                    return v;
                }
                let x = -u.ln();
                let w = gumbel_w(t, u, v);
                // C * w^{1-θ} * x^{θ-1} / u
                (-w + (1.0 - t) * w.ln() + (t - 1.0) * x.ln() - u.ln()).exp()
            }
            Family::Clayton => {
                let t = self.theta;
                if t == 0.0 {
                    return v;
                }
                let s = clayton_sum(t, u, v);
                ((-t - 1.0) * u.ln() + (-1.0 / t - 1.0) * s.ln()).exp()
            }
        }
    }

    pub fn kendall_tau(&self) -> f64 {
        match self.family {
            Family::Gumbel => 1.0 - 1.0 / self.theta,
            Family::Clayton => self.theta / (self.theta + 2.0),
            Family::Independence => 0.0,
            Family::FrechetUpper => 1.0,
        }
    }

    /// Returns `v` with `dC/du(u, v) = p`, i.e. the `p`-quantile of `V` given
    /// `U = u`.
    pub fn conditional_quantile(&self, u: f64, p: f64) -> Result<f64> {
        check_open_probability("u", u)?;
        check_open_probability("p", p)?;
        match self.family {
            Family::Independence => Ok(p),
            Family::FrechetUpper => Ok(u),
            Family::Clayton if self.theta == 0.0 => Ok(p),
            Family::Gumbel if self.theta == 1.0 => Ok(p),
            Family::Clayton => {
                let t = self.theta;
                let inner = (p.powf(-t / (1.0 + t)) - 1.0) * u.powf(-t) + 1.0;
                Ok(inner.powf(-1.0 / t))
            }
            Family::Gumbel => self.bisect_conditional(u, p),
        }
    }

    fn bisect_conditional(&self, u: f64, p: f64) -> Result<f64> {
        const MAX_ITER: usize = 200;
        let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
        for _ in 0..MAX_ITER {
            let mid = 0.5 * (lo + hi);
            let f = self.partial_first(u, mid);
            if !f.is_finite() {
                break;
            }
            if (f - p).abs() <= 1e-13 || hi - lo <= 1e-15 {
                return Ok(mid);
            }
            if f < p {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Err(Error::Convergence {
            lo,
            hi,
            iterations: MAX_ITER,
        })
    }
}

/// `((-ln u)^θ + (-ln v)^θ)^{1/θ}`, evaluated in log space so that large θ
/// does not overflow.
fn gumbel_w(theta: f64, u: f64, v: f64) -> f64 {
    let lx = (-u.ln()).ln();
    let ly = (-v.ln()).ln();
    (log_add_exp(theta * lx, theta * ly) / theta).exp()
}

fn clayton_sum(theta: f64, u: f64, v: f64) -> f64 {
    u.powf(-theta) + v.powf(-theta) - 1.0
}
