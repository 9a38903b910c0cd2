//! The structural competing-risks model: a Gumbel copula over two
//! proportional-hazards marginals that are risk proportional,
//! `Λ₀₂(t) = e^ς Λ₀₁(t)` with `ς = γ/θ`.
//!
//! Everything the observable `(T, δ | Z)` distribution implies is available
//! in closed form: overall survival, sub-densities, cause-specific hazards
//! (CSH) and their `t`/`z` factorisation, subdistribution hazards (SDH), and
//! the map from marginal covariate functions `φⱼ(z) = exp(z·β₁ⱼ)` to the CSH
//! covariate functions `ψⱼ(z)`.
//!
//! Quantities are evaluated in log space; `θ` up to ~10³ is fine.

// Only needed when std (and its inherent f64 methods) is absent.
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::copula::{Arg, Copula, Family};
use crate::data::{Dataset, Risk};
use crate::error::{check_time, Error, Result};
use crate::hazard::{Baseline, MarginalHazard};
use crate::num::{dot, log_add_exp, logistic, softplus};
use crate::quadrature::GaussHermite;

/// Survival values are clamped into `[ε, 1-ε]` before copula derivatives.
pub const SURVIVAL_CLAMP: f64 = 1e-12;

/// Time shape of the risk-1 marginal baseline; risk 2 is the same shape
/// scaled by `e^ς`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BaselineShape {
    /// `λ₀₁(t) = β₀₁`.
    Exponential,
    /// `Λ₀₁(t) = (β₀₁ t)^shape`.
    Weibull { shape: f64 },
}

/// Structural parameters `(θ, γ, β₁₁, β₁₂, β₀₁)` with `ς = γ/θ` and
/// `β₀₂ = e^ς β₀₁` derived.
#[derive(Debug, Clone, PartialEq)]
pub struct StructuralParams {
    theta: f64,
    gamma: f64,
    beta11: Vec<f64>,
    beta12: Vec<f64>,
    beta01: f64,
    shape: BaselineShape,
    marginals: [MarginalHazard; 2],
}

/// Reduced-form (Cox CSH) parameters: `hⱼ(t|z) = h₀₁(t) e^{γⱼ} exp(z·α₁ⱼ)`
/// with `γ₁ = 0`, `γ₂ = γ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedFormParams {
    pub alpha11: Vec<f64>,
    pub alpha12: Vec<f64>,
    pub gamma: f64,
}

impl StructuralParams {
    pub fn new(
        theta: f64,
        gamma: f64,
        beta11: Vec<f64>,
        beta12: Vec<f64>,
        beta01: f64,
        shape: BaselineShape,
    ) -> Result<Self> {
        if !(theta.is_finite() && theta >= 1.0) {
            return Err(Error::Parameter {
                name: "theta",
                value: theta,
                reason: "Gumbel dependence requires a finite theta >= 1",
            });
        }
        if !gamma.is_finite() {
            return Err(Error::Parameter {
                name: "gamma",
                value: gamma,
                reason: "must be finite",
            });
        }
        if beta11.len() != beta12.len() {
            return Err(Error::Dimension {
                expected: beta11.len(),
                found: beta12.len(),
            });
        }
        let base1 = match shape {
            BaselineShape::Exponential => Baseline::Exponential { rate: beta01 },
            BaselineShape::Weibull { shape } => Baseline::Weibull {
                scale: beta01,
                shape,
            },
        };
        let varsigma = gamma / theta;
        let base2 = base1.scaled(varsigma.exp());
        let m1 = MarginalHazard::new(base1, beta11.clone())?;
        let m2 = MarginalHazard::new(base2, beta12.clone())?;
        if !base2.cumulative(1.0).is_finite() || base2.cumulative(1.0) <= 0.0 {
            return Err(Error::Parameter {
                name: "gamma",
                value: gamma,
                reason: "implied risk-2 baseline is degenerate",
            });
        }
        Ok(Self {
            theta,
            gamma,
            beta11,
            beta12,
            beta01,
            shape,
            marginals: [m1, m2],
        })
    }

    /// The simulation design with one covariate: `γ = 0.5`, `β₀₁ = 1`,
    /// `β₁₁ = 1`, `β₁₂ = 2`, exponential baselines.
    pub fn simulation_design(theta: f64) -> Result<Self> {
        Self::new(
            theta,
            0.5,
            alloc::vec![1.0],
            alloc::vec![2.0],
            1.0,
            BaselineShape::Exponential,
        )
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Marginal risk-proportionality log-ratio `ς = γ/θ`.
    pub fn varsigma(&self) -> f64 {
        self.gamma / self.theta
    }

    pub fn beta11(&self) -> &[f64] {
        &self.beta11
    }

    pub fn beta12(&self) -> &[f64] {
        &self.beta12
    }

    pub fn beta01(&self) -> f64 {
        self.beta01
    }

    /// Risk-2 baseline parameter `e^ς β₀₁` (rate or Weibull scale adjusted
    /// so that `Λ₀₂ = e^ς Λ₀₁`).
    pub fn beta02(&self) -> f64 {
        match *self.marginals[1].baseline() {
            Baseline::Exponential { rate } => rate,
            Baseline::Weibull { scale, .. } => scale,
        }
    }

    pub fn baseline_shape(&self) -> BaselineShape {
        self.shape
    }

    pub fn dim(&self) -> usize {
        self.beta11.len()
    }

    pub fn kendall_tau(&self) -> f64 {
        1.0 - 1.0 / self.theta
    }

    pub fn copula(&self) -> Copula {
        Copula::gumbel(self.theta).expect("theta validated at construction")
    }

    pub fn marginal(&self, risk: Risk) -> &MarginalHazard {
        match risk {
            Risk::First => &self.marginals[0],
            Risk::Second => &self.marginals[1],
        }
    }

    pub fn marginals(&self) -> &[MarginalHazard; 2] {
        &self.marginals
    }

    /// Same marginals joined by a different copula.
    pub fn with_copula(&self, copula: Copula) -> CopulaModel {
        CopulaModel::new(copula, self.marginals.clone())
    }

    fn linear_predictors(&self, z: &[f64]) -> Result<(f64, f64)> {
        if z.len() != self.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                found: z.len(),
            });
        }
        Ok((dot(z, &self.beta11), dot(z, &self.beta12)))
    }

    fn terms(&self, t: f64, z: &[f64]) -> Result<Terms> {
        check_time(t)?;
        let (lp1, lp2) = self.linear_predictors(z)?;
        let b1 = self.marginals[0].baseline();
        let b2 = self.marginals[1].baseline();
        let log_cum = [b1.log_cumulative(t) + lp1, b2.log_cumulative(t) + lp2];
        let log_haz = [b1.log_hazard(t) + lp1, b2.log_hazard(t) + lp2];
        let log_sum = log_add_exp(self.theta * log_cum[0], self.theta * log_cum[1]);
        Ok(Terms {
            log_cum,
            log_haz,
            log_sum,
        })
    }

    /// `J(t₁, t₂ | z) = C(S₁(t₁|z), S₂(t₂|z))`.
    pub fn joint_survival(&self, t1: f64, t2: f64, z: &[f64]) -> Result<f64> {
        let a = self.marginals[0].log_cumulative_hazard(t1, z)?;
        let b = self.marginals[1].log_cumulative_hazard(t2, z)?;
        let w = (log_add_exp(self.theta * a, self.theta * b) / self.theta).exp();
        Ok((-w).exp())
    }

    /// Overall survival `S(t|z) = J(t, t|z)`.
    pub fn overall_survival(&self, t: f64, z: &[f64]) -> Result<f64> {
        Ok(self.log_overall_survival(t, z)?.exp())
    }

    pub fn log_overall_survival(&self, t: f64, z: &[f64]) -> Result<f64> {
        let terms = self.terms(t, z)?;
        Ok(-terms.overall_cumulative(self.theta))
    }

    /// `ln fⱼ(t|z)` for the sub-density of an observed risk-`j` failure at `t`.
    pub fn log_subdensity(&self, risk: Risk, t: f64, z: &[f64]) -> Result<f64> {
        let terms = self.terms(t, z)?;
        Ok(-terms.overall_cumulative(self.theta) + terms.log_csh(self.theta, risk))
    }

    pub fn subdensity(&self, risk: Risk, t: f64, z: &[f64]) -> Result<f64> {
        Ok(self.log_subdensity(risk, t, z)?.exp())
    }

    /// Cause-specific hazard `hⱼ(t|z) = fⱼ(t|z)/S(t|z)` evaluated from the
    /// marginals directly.
    pub fn implied_csh(&self, risk: Risk, t: f64, z: &[f64]) -> Result<f64> {
        let terms = self.terms(t, z)?;
        Ok(terms.log_csh(self.theta, risk).exp())
    }

    /// The same CSH assembled from its factorisation `h₀ⱼ(t)·ψⱼ(z)`, with
    /// `h₀ⱼ(t) = λ₀ⱼ(t)[Λ₀ⱼ(t)/Λ₀₁(t)]^{θ-1}`.
    pub fn implied_csh_separable(&self, risk: Risk, t: f64, z: &[f64]) -> Result<f64> {
        let (psi1, psi2) = self.map_structural_to_reduced(z)?;
        let psi = match risk {
            Risk::First => psi1,
            Risk::Second => psi2,
        };
        Ok(self.baseline_csh(risk, t)? * psi)
    }

    /// Baseline CSH `h₀ⱼ(t)`.
    pub fn baseline_csh(&self, risk: Risk, t: f64) -> Result<f64> {
        check_time(t)?;
        let own = self.marginal(risk).baseline();
        let first = self.marginals[0].baseline();
        let ratio = own.log_cumulative(t) - first.log_cumulative(t);
        Ok((own.log_hazard(t) + (self.theta - 1.0) * ratio).exp())
    }

    /// Cumulative baseline CSH: `H₀₁ = Λ₀₁` and `H₀₂ = e^{γ(1-1/θ)} Λ₀₂`.
    pub fn baseline_cumulative_csh(&self, risk: Risk, t: f64) -> Result<f64> {
        check_time(t)?;
        let cum = self.marginal(risk).baseline().cumulative(t);
        Ok(match risk {
            Risk::First => cum,
            Risk::Second => (self.gamma * (1.0 - 1.0 / self.theta)).exp() * cum,
        })
    }

    /// Implied CSH covariate functions `(ψ₁(z), ψ₂(z))`:
    /// `ψⱼ = φⱼ^θ [φ₁^θ + e^γ φ₂^θ]^{1/θ - 1}`.
    pub fn map_structural_to_reduced(&self, z: &[f64]) -> Result<(f64, f64)> {
        let (lp1, lp2) = self.linear_predictors(z)?;
        let th = self.theta;
        let log_mix = (1.0 / th - 1.0) * log_add_exp(th * lp1, self.gamma + th * lp2);
        Ok(((th * lp1 + log_mix).exp(), (th * lp2 + log_mix).exp()))
    }

    /// `∂ log ψⱼ(z) / ∂z` for a scalar covariate.
    pub fn local_lhr(&self, risk: Risk, z: f64) -> Result<f64> {
        if self.dim() != 1 {
            return Err(Error::Dimension {
                expected: 1,
                found: self.dim(),
            });
        }
        let (b11, b12) = (self.beta11[0], self.beta12[0]);
        let th = self.theta;
        let w = logistic(self.gamma + th * z * (b12 - b11));
        let own = match risk {
            Risk::First => b11,
            Risk::Second => b12,
        };
        Ok(th * own + (1.0 - th) * (b11 + (b12 - b11) * w))
    }

    /// Average of [`local_lhr`](Self::local_lhr) over `Z ~ N(mean, sd²)` by
    /// Gauss–Hermite quadrature with `nodes` points (at least 8).
    pub fn average_lhr(&self, risk: Risk, mean: f64, sd: f64, nodes: usize) -> Result<f64> {
        if nodes < 8 {
            return Err(Error::Config(alloc::format!(
                "average_lhr needs at least 8 quadrature nodes, got {nodes}"
            )));
        }
        if !(sd > 0.0 && sd.is_finite() && mean.is_finite()) {
            return Err(Error::Parameter {
                name: "sd",
                value: sd,
                reason: "covariate distribution needs finite mean and sd > 0",
            });
        }
        // surface the dimension error before integrating
        self.local_lhr(risk, mean)?;
        let gh = GaussHermite::new(nodes)?;
        Ok(gh.normal_expectation(mean, sd, |z| self.local_lhr(risk, z).unwrap_or(f64::NAN)))
    }

    /// Reduced-form parameters a Cox CSH fit is expected to approach when
    /// `Z ~ N(mean, sd²)`: the CSH risk ratio is `e^γ` and each `α₁ⱼ` is
    /// the covariate-averaged log hazard ratio.
    pub fn predicted_reduced_form(
        &self,
        mean: f64,
        sd: f64,
        nodes: usize,
    ) -> Result<ReducedFormParams> {
        Ok(ReducedFormParams {
            alpha11: alloc::vec![self.average_lhr(Risk::First, mean, sd, nodes)?],
            alpha12: alloc::vec![self.average_lhr(Risk::Second, mean, sd, nodes)?],
            gamma: self.gamma,
        })
    }

    /// `θ ln ηⱼ(z)` where `ηⱼ = (φ_other/φⱼ)·e^{±ς}` is the constant ratio
    /// `Λ_other(t|z) / Λⱼ(t|z)`.
    fn log_eta_theta(&self, risk: Risk, z: &[f64]) -> Result<f64> {
        let (lp1, lp2) = self.linear_predictors(z)?;
        Ok(match risk {
            Risk::First => self.gamma + self.theta * (lp2 - lp1),
            Risk::Second => -self.gamma + self.theta * (lp1 - lp2),
        })
    }

    /// `P(δ = j | z) = 1 / (1 + ηⱼ^θ)`.
    pub fn incidence_probability(&self, risk: Risk, z: &[f64]) -> Result<f64> {
        Ok(logistic(-self.log_eta_theta(risk, z)?))
    }

    /// Cumulative incidence `Fⱼ(t|z) = P(T ≤ t, δ = j | z)`.
    pub fn cumulative_incidence(&self, risk: Risk, t: f64, z: &[f64]) -> Result<f64> {
        check_time(t)?;
        let a = self.log_eta_theta(risk, z)?;
        let tilde = (softplus(a) / self.theta).exp();
        let x = self.marginal(risk).cumulative_hazard(t, z)? * tilde;
        Ok(logistic(-a) * -(-x).exp_m1())
    }

    /// Subdistribution hazard `dⱼ(t|z) = fⱼ / (1 - Fⱼ)`.
    ///
    /// With `φ̃ = (1 + η^θ)^{1/θ}` and `x = Λⱼ(t|z) φ̃`, the sub-density is
    /// `λⱼ φ̃^{1-θ} e^{-x}` and `Fⱼ = φ̃^{-θ}(1 - e^{-x})`, hence
    /// `dⱼ = λⱼ φ̃ / (1 + η^θ e^{x})`. Risk 2 swaps the labels and negates ς.
    pub fn implied_sdh(&self, risk: Risk, t: f64, z: &[f64]) -> Result<f64> {
        check_time(t)?;
        let a = self.log_eta_theta(risk, z)?;
        let log_tilde = softplus(a) / self.theta;
        let m = self.marginal(risk);
        let x = m.cumulative_hazard(t, z)? * log_tilde.exp();
        Ok((m.log_hazard(t, z)? + log_tilde - softplus(a + x)).exp())
    }

    /// Full log-likelihood `Σ ln f_{δᵢ}(tᵢ|zᵢ)`; censored rows contribute
    /// `ln S(tᵢ|zᵢ)`.
    pub fn full_loglik(&self, data: &Dataset) -> Result<f64> {
        let mut total = 0.0;
        for (index, obs) in data.iter().enumerate() {
            let terms = self.terms(obs.time, &obs.covariates)?;
            let mut v = -terms.overall_cumulative(self.theta);
            if let Some(risk) = obs.cause {
                v += terms.log_csh(self.theta, risk);
            }
            if !v.is_finite() {
                return Err(Error::NonFiniteObservation { index });
            }
            total += v;
        }
        Ok(total)
    }
}

#[derive(Debug, Clone, Copy)]
struct Terms {
    /// `ln Λⱼ(t|z)`
    log_cum: [f64; 2],
    /// `ln λⱼ(t|z)`
    log_haz: [f64; 2],
    /// `ln(Λ₁^θ + Λ₂^θ)`
    log_sum: f64,
}

impl Terms {
    /// `-ln S(t|z) = (Λ₁^θ + Λ₂^θ)^{1/θ}`.
    fn overall_cumulative(&self, theta: f64) -> f64 {
        (self.log_sum / theta).exp()
    }

    /// `ln hⱼ = (1/θ - 1) ln(Λ₁^θ + Λ₂^θ) + (θ - 1) ln Λⱼ + ln λⱼ`.
    fn log_csh(&self, theta: f64, risk: Risk) -> f64 {
        let j = match risk {
            Risk::First => 0,
            Risk::Second => 1,
        };
        (1.0 / theta - 1.0) * self.log_sum + (theta - 1.0) * self.log_cum[j] + self.log_haz[j]
    }
}

/// Two marginals joined by an arbitrary copula; quantities are computed
/// from copula partial derivatives rather than family-specific algebra.
#[derive(Debug, Clone, PartialEq)]
pub struct CopulaModel {
    copula: Copula,
    marginals: [MarginalHazard; 2],
}

impl CopulaModel {
    pub fn new(copula: Copula, marginals: [MarginalHazard; 2]) -> Self {
        Self { copula, marginals }
    }

    pub fn copula(&self) -> &Copula {
        &self.copula
    }

    fn marginal(&self, risk: Risk) -> &MarginalHazard {
        match risk {
            Risk::First => &self.marginals[0],
            Risk::Second => &self.marginals[1],
        }
    }

    fn survivals(&self, t: f64, z: &[f64]) -> Result<(f64, f64)> {
        Ok((
            self.marginals[0].survival(t, z)?,
            self.marginals[1].survival(t, z)?,
        ))
    }

    pub fn overall_survival(&self, t: f64, z: &[f64]) -> Result<f64> {
        let (s1, s2) = self.survivals(t, z)?;
        self.copula.cdf(s1, s2)
    }

    /// `fⱼ(t|z) = ∂ⱼC(S₁, S₂)·λⱼ(t|z) Sⱼ(t|z)`.
    pub fn subdensity(&self, risk: Risk, t: f64, z: &[f64]) -> Result<f64> {
        let (s1, s2) = self.survivals(t, z)?;
        let clamp = |s: f64| s.clamp(SURVIVAL_CLAMP, 1.0 - SURVIVAL_CLAMP);
        let arg = match risk {
            Risk::First => Arg::First,
            Risk::Second => Arg::Second,
        };
        let d = self.copula.partial(clamp(s1), clamp(s2), arg)?;
        let m = self.marginal(risk);
        Ok(d * m.hazard(t, z)? * m.survival(t, z)?)
    }

    pub fn implied_csh(&self, risk: Risk, t: f64, z: &[f64]) -> Result<f64> {
        Ok(self.subdensity(risk, t, z)? / self.overall_survival(t, z)?)
    }

    /// Clayton closed form `hⱼ = S^θ Sⱼ^{-θ} λⱼ`.
    pub fn clayton_implied_csh(&self, risk: Risk, t: f64, z: &[f64]) -> Result<f64> {
        let theta = match (self.copula.family(), self.copula.theta()) {
            (Family::Clayton, Some(theta)) => theta,
            _ => {
                return Err(Error::Config(
                    "clayton_implied_csh requires a Clayton copula".into(),
                ))
            }
        };
        let m = self.marginal(risk);
        let lam = m.hazard(t, z)?;
        if theta == 0.0 {
            return Ok(lam);
        }
        let a = theta * self.marginals[0].cumulative_hazard(t, z)?;
        let b = theta * self.marginals[1].cumulative_hazard(t, z)?;
        // θ ln S = -ln(e^{θΛ₁} + e^{θΛ₂} - 1)
        let hi = a.max(b);
        let log_inner = hi + ((a - hi).exp() + (b - hi).exp() - (-hi).exp()).ln();
        let own = match risk {
            Risk::First => a,
            Risk::Second => b,
        };
        Ok((own - log_inner).exp() * lam)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Observation;
    use alloc::vec;

    fn design() -> StructuralParams {
        StructuralParams::simulation_design(2.0).unwrap()
    }

    #[test]
    fn derived_parameters() {
        let p = design();
        assert_eq!(p.varsigma(), 0.25);
        assert!((p.beta02() - 0.25f64.exp()).abs() < 1e-15);
        assert_eq!(p.kendall_tau(), 0.5);
        assert!(StructuralParams::simulation_design(0.5).is_err());
        assert!(StructuralParams::new(
            2.0,
            0.1,
            vec![1.0],
            vec![1.0, 2.0],
            1.0,
            BaselineShape::Exponential
        )
        .is_err());
    }

    #[test]
    fn joint_survival_examples() {
        let p = design();
        // exp(-sqrt(1 + e^0.5)) by mpmath
        let s = p.joint_survival(1.0, 1.0, &[0.0]).unwrap();
        assert!((s - 0.196_422_121_665_005_7).abs() < 1e-14);
        assert!((p.overall_survival(1.0, &[0.0]).unwrap() - s).abs() < 1e-15);
        assert!((p.joint_survival(1e-14, 1e-14, &[0.3]).unwrap() - 1.0).abs() < 1e-12);

        let ind = StructuralParams::simulation_design(1.0).unwrap();
        let (t1, t2, z) = (0.4, 1.3, [0.7]);
        let prod = ind.marginal(Risk::First).survival(t1, &z).unwrap()
            * ind.marginal(Risk::Second).survival(t2, &z).unwrap();
        assert!((ind.joint_survival(t1, t2, &z).unwrap() - prod).abs() < 1e-15);
    }

    #[test]
    fn joint_survival_matches_copula_cdf() {
        let p = StructuralParams::simulation_design(3.5).unwrap();
        let c = p.copula();
        for (t1, t2, z) in [(0.3, 0.9, -0.5), (1.2, 0.1, 0.4), (2.0, 2.0, 1.0)] {
            let s1 = p.marginal(Risk::First).survival(t1, &[z]).unwrap();
            let s2 = p.marginal(Risk::Second).survival(t2, &[z]).unwrap();
            let direct = p.joint_survival(t1, t2, &[z]).unwrap();
            assert!((direct - c.cdf(s1, s2).unwrap()).abs() < 1e-13);
        }
    }

    #[test]
    fn independence_factorisations() {
        let p = StructuralParams::simulation_design(1.0).unwrap();
        for &t in &[0.05, 0.5, 2.0] {
            for &z in &[-1.0, 0.0, 0.8] {
                let zz = [z];
                let s1 = p.marginal(Risk::First).survival(t, &zz).unwrap();
                let s2 = p.marginal(Risk::Second).survival(t, &zz).unwrap();
                for risk in Risk::BOTH {
                    let lam = p.marginal(risk).hazard(t, &zz).unwrap();
                    let f = p.subdensity(risk, t, &zz).unwrap();
                    assert!((f - lam * s1 * s2).abs() < 1e-14 * lam.max(1.0));
                    let h = p.implied_csh(risk, t, &zz).unwrap();
                    assert!((h - lam).abs() < 1e-13 * lam);
                }
                let (psi1, psi2) = p.map_structural_to_reduced(&zz).unwrap();
                assert!((psi1 - z.exp()).abs() < 1e-13 * psi1);
                assert!((psi2 - (2.0 * z).exp()).abs() < 1e-13 * psi2);
            }
        }
    }

    #[test]
    fn reduced_form_values_at_design() {
        let p = design();
        let (psi1, _) = p.map_structural_to_reduced(&[0.0]).unwrap();
        // (1 + e^0.5)^(-1/2) by mpmath
        assert!((psi1 - 0.614_443_381_279_467_8).abs() < 1e-14);
        for &t in &[0.1, 1.0, 4.0] {
            let l01 = p.marginal(Risk::First).baseline().cumulative(t);
            let l02 = p.marginal(Risk::Second).baseline().cumulative(t);
            assert!((p.baseline_cumulative_csh(Risk::First, t).unwrap() - l01).abs() < 1e-15);
            let ratio = p.baseline_cumulative_csh(Risk::Second, t).unwrap() / l02;
            assert!((ratio - 1.284_025_416_687_741_5).abs() < 1e-13);
        }
    }

    #[test]
    fn separable_csh_agrees_with_direct() {
        for p in [
            design(),
            StructuralParams::simulation_design(10.0).unwrap(),
            StructuralParams::new(
                1.7,
                -0.8,
                vec![0.3, -1.0],
                vec![-0.5, 0.4],
                0.6,
                BaselineShape::Weibull { shape: 1.8 },
            )
            .unwrap(),
        ] {
            let zs: [&[f64]; 3] = if p.dim() == 1 {
                [&[0.0], &[-1.2], &[0.9]]
            } else {
                [&[0.0, 0.0], &[0.5, -1.0], &[-0.3, 0.2]]
            };
            for z in zs {
                for &t in &[0.01, 0.3, 1.0, 5.0] {
                    for risk in Risk::BOTH {
                        let a = p.implied_csh(risk, t, z).unwrap();
                        let b = p.implied_csh_separable(risk, t, z).unwrap();
                        assert!((a - b).abs() <= 1e-10 * a.abs().max(1e-300), "{a} vs {b}");
                    }
                }
            }
        }
    }

    #[test]
    fn gumbel_csh_matches_copula_partials() {
        let p = StructuralParams::simulation_design(2.5).unwrap();
        let generic = p.with_copula(p.copula());
        for &t in &[0.2, 0.7, 1.5] {
            for risk in Risk::BOTH {
                let a = p.implied_csh(risk, t, &[0.3]).unwrap();
                let b = generic.implied_csh(risk, t, &[0.3]).unwrap();
                assert!((a - b).abs() < 1e-9 * a);
            }
        }
    }

    #[test]
    fn clayton_closed_form_matches_partials() {
        let p = design();
        for theta in [0.0, 0.5, 1.0, 3.0] {
            let m = p.with_copula(Copula::clayton(theta).unwrap());
            for &t in &[0.05, 0.4, 1.1] {
                for &z in &[-0.5, 0.0, 0.6] {
                    for risk in Risk::BOTH {
                        let a = m.clayton_implied_csh(risk, t, &[z]).unwrap();
                        let b = m.implied_csh(risk, t, &[z]).unwrap();
                        assert!(
                            (a - b).abs() < 1e-8 * a,
                            "theta={theta} t={t} z={z}: {a} vs {b}"
                        );
                    }
                }
            }
        }
        let not_clayton = p.with_copula(Copula::independence());
        assert!(not_clayton
            .clayton_implied_csh(Risk::First, 1.0, &[0.0])
            .is_err());
    }

    #[test]
    fn clayton_zero_is_marginal_and_small_t_limit() {
        let p = design();
        let m0 = p.with_copula(Copula::clayton(0.0).unwrap());
        let lam = p.marginal(Risk::First).hazard(0.7, &[0.2]).unwrap();
        assert_eq!(
            m0.clayton_implied_csh(Risk::First, 0.7, &[0.2]).unwrap(),
            lam
        );
        let m1 = p.with_copula(Copula::clayton(1.0).unwrap());
        let lam0 = p.marginal(Risk::Second).hazard(1e-9, &[0.2]).unwrap();
        let h0 = m1.clayton_implied_csh(Risk::Second, 1e-9, &[0.2]).unwrap();
        assert!((h0 - lam0).abs() < 1e-7 * lam0);
    }

    #[test]
    fn local_lhr_examples() {
        let p = design();
        let v = p.local_lhr(Risk::First, 0.0).unwrap();
        assert!((v - 0.377_540_668_798_145_4).abs() < 1e-14);
        let ind = StructuralParams::simulation_design(1.0).unwrap();
        for z in [-3.0, 0.0, 2.0] {
            assert_eq!(ind.local_lhr(Risk::First, z).unwrap(), 1.0);
            assert_eq!(ind.local_lhr(Risk::Second, z).unwrap(), 2.0);
        }
        let two = StructuralParams::new(
            2.0,
            0.0,
            vec![1.0, 1.0],
            vec![0.0, 0.0],
            1.0,
            BaselineShape::Exponential,
        )
        .unwrap();
        assert!(two.local_lhr(Risk::First, 0.0).is_err());
    }

    #[test]
    fn local_lhr_is_derivative_of_log_psi() {
        let h = 1e-5;
        for p in [
            design(),
            StructuralParams::simulation_design(10.0).unwrap(),
            StructuralParams::new(
                3.0,
                -1.0,
                vec![-0.5],
                vec![1.5],
                2.0,
                BaselineShape::Exponential,
            )
            .unwrap(),
        ] {
            for i in -10..=10 {
                let z = i as f64 * 0.3;
                let (a1, a2) = p.map_structural_to_reduced(&[z + h]).unwrap();
                let (b1, b2) = p.map_structural_to_reduced(&[z - h]).unwrap();
                let fd1 = (a1.ln() - b1.ln()) / (2.0 * h);
                let fd2 = (a2.ln() - b2.ln()) / (2.0 * h);
                assert!((p.local_lhr(Risk::First, z).unwrap() - fd1).abs() < 1e-6);
                assert!((p.local_lhr(Risk::Second, z).unwrap() - fd2).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn average_lhr_cases() {
        let ind = StructuralParams::simulation_design(1.0).unwrap();
        assert!((ind.average_lhr(Risk::First, 0.3, 2.0, 64).unwrap() - 1.0).abs() < 1e-13);
        assert!(design().average_lhr(Risk::First, 0.0, 2.0, 7).is_err());
        // β₁₂ = β₁₁ makes the correction term constant: θβ₁₁ + (1-θ)β₁₁ = β₁₁
        let flat = StructuralParams::new(
            3.0,
            0.7,
            vec![0.8],
            vec![0.8],
            1.0,
            BaselineShape::Exponential,
        )
        .unwrap();
        assert!((flat.average_lhr(Risk::Second, 0.0, 1.5, 64).unwrap() - 0.8).abs() < 1e-13);
    }

    #[test]
    fn degenerate_gamma_limit() {
        // e^γ underflows to zero: ψ₁ = φ₁ and ψ₂ = exp(z(β₁₁(1-θ) + β₁₂θ))
        let p = StructuralParams::new(
            2.0,
            -800.0,
            vec![1.0],
            vec![2.0],
            1.0,
            BaselineShape::Exponential,
        )
        .unwrap();
        let z = 0.7;
        let (psi1, psi2) = p.map_structural_to_reduced(&[z]).unwrap();
        assert!((psi1 - z.exp()).abs() < 1e-14 * psi1);
        assert!((psi2 - (z * (1.0 * (1.0 - 2.0) + 2.0 * 2.0)).exp()).abs() < 1e-13 * psi2);
        assert_eq!(p.implied_csh(Risk::Second, 1.0, &[z]).unwrap(), 0.0);
        let lam1 = p.marginal(Risk::First).hazard(1.0, &[z]).unwrap();
        assert!((p.implied_csh(Risk::First, 1.0, &[z]).unwrap() - lam1).abs() < 1e-13 * lam1);
    }

    #[test]
    fn incidence_probabilities_sum_to_one() {
        let p = design();
        for z in [-2.0, 0.0, 1.5] {
            let a = p.incidence_probability(Risk::First, &[z]).unwrap();
            let b = p.incidence_probability(Risk::Second, &[z]).unwrap();
            assert!((a + b - 1.0).abs() < 1e-15);
        }
        assert!(
            (p.incidence_probability(Risk::First, &[0.0]).unwrap() - 1.0 / (1.0 + 0.5f64.exp()))
                .abs()
                < 1e-15
        );
    }

    #[test]
    fn full_loglik_examples() {
        let p = StructuralParams::new(
            1.0,
            0.0,
            vec![1.0],
            vec![1.0],
            1.0,
            BaselineShape::Exponential,
        )
        .unwrap();
        let data = Dataset::from_rows(1, vec![Observation::new(1.0, Some(Risk::First), vec![0.0])])
            .unwrap();
        assert!((p.full_loglik(&data).unwrap() + 2.0).abs() < 1e-14);
        assert_eq!(p.full_loglik(&Dataset::new(1)).unwrap(), 0.0);
    }

    #[test]
    fn full_loglik_reports_offending_row() {
        let p = design();
        let data = Dataset::from_rows(
            1,
            vec![
                Observation::new(1.0, Some(Risk::First), vec![0.0]),
                Observation::new(1e300, Some(Risk::Second), vec![300.0]),
            ],
        )
        .unwrap();
        assert_eq!(
            p.full_loglik(&data),
            Err(Error::NonFiniteObservation { index: 1 })
        );
    }
}
