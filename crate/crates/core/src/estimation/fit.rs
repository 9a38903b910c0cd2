// Only needed when std (and its inherent f64 methods) is absent.
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use nalgebra::{DMatrix, SymmetricEigen};

use super::partial::{PartialLikelihood, PartialParams};
use super::restructure::restructure;
use crate::data::{Dataset, Risk};
use crate::error::{Error, Result};
use crate::num::logistic;
use crate::optim::{hessian, nelder_mead, Minimum, NelderMeadOptions};
use crate::structural::{BaselineShape, StructuralParams};

/// Two-sided 97.5% standard normal quantile.
pub const Z_975: f64 = 1.959_963_984_540_054;

/// Smallest eigenvalue tolerated in a reported covariance matrix.
pub const PSD_TOLERANCE: f64 = -1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Model {
    /// Structural partial likelihood on restructured data.
    Structural,
    /// Cause-specific Cox model for one risk.
    CoxCsh(Risk),
    /// Full parametric likelihood including the baseline.
    FullMle,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Coefficient {
    pub name: String,
    pub estimate: f64,
    pub se: Option<f64>,
}

impl Coefficient {
    fn new(name: impl Into<String>, estimate: f64, se: Option<f64>) -> Self {
        Self {
            name: name.into(),
            estimate,
            se,
        }
    }

    /// 95% Wald interval.
    pub fn ci95(&self) -> Option<(f64, f64)> {
        self.se
            .map(|se| (self.estimate - Z_975 * se, self.estimate + Z_975 * se))
    }

    pub fn z_value(&self) -> Option<f64> {
        self.se.map(|se| self.estimate / se)
    }

    pub fn covers(&self, truth: f64) -> Option<bool> {
        self.ci95().map(|(lo, hi)| lo <= truth && truth <= hi)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub model: Model,
    /// Estimates on the optimisation scale, in covariance order.
    pub coefficients: Vec<Coefficient>,
    /// Transformed quantities (θ, τ, ς, ...) with delta-method errors.
    pub derived: Vec<Coefficient>,
    /// Row-major covariance of `coefficients`; `None` when the Hessian was
    /// singular or not positive definite.
    pub covariance: Option<Vec<f64>>,
    pub loglik: f64,
    pub converged: bool,
    pub iterations: usize,
    pub evaluations: usize,
    pub diagnostics: Vec<String>,
}

impl FitResult {
    /// Looks a parameter up by name among coefficients, then derived values.
    pub fn get(&self, name: &str) -> Option<&Coefficient> {
        self.coefficients
            .iter()
            .chain(&self.derived)
            .find(|c| c.name == name)
    }

    pub fn estimates(&self) -> Vec<f64> {
        self.coefficients.iter().map(|c| c.estimate).collect()
    }

    /// Whether the fit converged and produced standard errors.
    pub fn usable(&self) -> bool {
        self.converged && self.covariance.is_some()
    }

    /// `gᵀ Σ g` for a gradient `g` with respect to the coefficients.
    pub fn delta_se(&self, grad: &[f64]) -> Option<f64> {
        let cov = self.covariance.as_ref()?;
        let p = self.coefficients.len();
        let mut v = 0.0;
        for i in 0..p {
            for j in 0..p {
                v += grad[i] * cov[i * p + j] * grad[j];
            }
        }
        (v >= 0.0).then(|| v.sqrt())
    }
}

pub(crate) fn coefficient_names(prefix: &str, dim: usize) -> Vec<String> {
    if dim == 1 {
        alloc::vec![prefix.to_string()]
    } else {
        (1..=dim).map(|k| format!("{prefix}_{k}")).collect()
    }
}

/// Inverse of an observed information matrix, if it is a valid covariance.
pub(crate) fn covariance_from_information(
    info: &[f64],
    p: usize,
    diagnostics: &mut Vec<String>,
) -> Option<Vec<f64>> {
    if info.iter().any(|v| !v.is_finite()) {
        diagnostics.push("information matrix has non-finite entries".into());
        return None;
    }
    let m = DMatrix::from_row_slice(p, p, info);
    let Some(inv) = m.try_inverse() else {
        diagnostics.push("information matrix is singular; covariance omitted".into());
        return None;
    };
    let sym = (&inv + inv.transpose()) * 0.5;
    let min_eig = SymmetricEigen::new(sym.clone())
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    if min_eig < PSD_TOLERANCE {
        diagnostics.push(format!(
            "covariance is not positive semi-definite (min eigenvalue {min_eig:e}); omitted"
        ));
        return None;
    }
    let mut out = Vec::with_capacity(p * p);
    for i in 0..p {
        for j in 0..p {
            out.push(sym[(i, j)]);
        }
    }
    Some(out)
}

/// Simplex search with one restart from the perturbed first optimum.
fn minimise_with_restart<F: FnMut(&[f64]) -> f64>(
    mut objective: F,
    x0: &[f64],
    opts: &NelderMeadOptions,
) -> Minimum {
    let steps: Vec<f64> = x0.iter().map(|_| 0.5).collect();
    let first = nelder_mead(&mut objective, x0, &steps, opts);
    let steps: Vec<f64> = first.x.iter().map(|v| 0.1 * v.abs().max(0.1)).collect();
    let second = nelder_mead(&mut objective, &first.x, &steps, opts);
    let best = if second.f <= first.f {
        second.clone()
    } else {
        first.clone()
    };
    Minimum {
        iterations: first.iterations + second.iterations,
        evaluations: first.evaluations + second.evaluations,
        converged: second.converged,
        ..best
    }
}

/// Options for [`fit_structural`].
#[derive(Debug, Clone, PartialEq, Default)]
pub struct StructuralFitOptions {
    pub nelder_mead: NelderMeadOptions,
    /// Hold θ at this value instead of estimating it.
    pub fixed_theta: Option<f64>,
    /// Starting point on the optimisation scale; zeros by default.
    pub start: Option<Vec<f64>>,
}

/// `θ = 1 + e^ξ`.
pub fn theta_from_xi(xi: f64) -> f64 {
    1.0 + xi.exp()
}

pub fn xi_from_theta(theta: f64) -> f64 {
    (theta - 1.0).ln()
}

fn require_both_risks(data: &Dataset) -> Result<()> {
    for risk in Risk::BOTH {
        if data.count(Some(risk)) == 0 {
            return Err(Error::NoEvents { risk: risk.index() });
        }
    }
    Ok(())
}

/// Maximises the structural partial likelihood over `(ξ, γ, β₁₁, β₁₂)`,
/// `θ = 1 + e^ξ`.
pub fn fit_structural(data: &Dataset, opts: &StructuralFitOptions) -> Result<FitResult> {
    require_both_risks(data)?;
    let rd = restructure(data);
    let pl = PartialLikelihood::new(&rd);
    let d = data.dim();
    let free_theta = opts.fixed_theta.is_none();
    if let Some(t) = opts.fixed_theta {
        if !(t >= 1.0 && t.is_finite()) {
            return Err(Error::Parameter {
                name: "theta",
                value: t,
                reason: "fixed theta must be finite and >= 1",
            });
        }
    }
    let offset = usize::from(free_theta);
    let p = offset + 1 + 2 * d;

    let unpack = |x: &[f64]| PartialParams {
        theta: opts.fixed_theta.unwrap_or_else(|| theta_from_xi(x[0])),
        gamma: x[offset],
        beta11: x[offset + 1..offset + 1 + d].to_vec(),
        beta12: x[offset + 1 + d..].to_vec(),
    };
    let objective = |x: &[f64]| {
        pl.structural(&unpack(x))
            .map(|v| -v)
            .unwrap_or(f64::INFINITY)
    };

    let x0 = match &opts.start {
        Some(s) if s.len() == p => s.clone(),
        Some(s) => {
            return Err(Error::Dimension {
                expected: p,
                found: s.len(),
            })
        }
        None => alloc::vec![0.0; p],
    };
    if !objective(&x0).is_finite() {
        return Err(Error::NonFiniteObjective { params: x0 });
    }
    let min = minimise_with_restart(objective, &x0, &opts.nelder_mead);

    let mut diagnostics = Vec::new();
    if !min.converged {
        diagnostics.push(format!(
            "simplex did not converge in {} iterations",
            min.iterations
        ));
    }
    let info = hessian(objective, &min.x);
    let covariance = covariance_from_information(&info, p, &mut diagnostics);

    let mut names = Vec::with_capacity(p);
    if free_theta {
        names.push("xi".to_string());
    }
    names.push("gamma".to_string());
    names.extend(coefficient_names("beta11", d));
    names.extend(coefficient_names("beta12", d));

    let mut fit = FitResult {
        model: Model::Structural,
        coefficients: Vec::new(),
        derived: Vec::new(),
        covariance,
        loglik: -min.f,
        converged: min.converged,
        iterations: min.iterations,
        evaluations: min.evaluations,
        diagnostics,
    };
    fit.coefficients = names
        .into_iter()
        .enumerate()
        .map(|(i, name)| {
            let se = fit
                .covariance
                .as_ref()
                .map(|c| c[i * p + i].max(0.0).sqrt());
            Coefficient::new(name, min.x[i], se)
        })
        .collect();
    fit.derived = dependence_summary(&fit, free_theta, opts.fixed_theta, 0, offset);
    Ok(fit)
}

/// θ, τ and ς with delta-method errors from `ξ` at `xi_at` and `γ` at
/// `gamma_at` in the coefficient vector.
fn dependence_summary(
    fit: &FitResult,
    free_theta: bool,
    fixed_theta: Option<f64>,
    xi_at: usize,
    gamma_at: usize,
) -> Vec<Coefficient> {
    let p = fit.coefficients.len();
    let gamma = fit.coefficients[gamma_at].estimate;
    if !free_theta {
        let theta = fixed_theta.unwrap_or(1.0);
        let mut g = alloc::vec![0.0; p];
        g[gamma_at] = 1.0 / theta;
        return alloc::vec![
            Coefficient::new("theta", theta, None),
            Coefficient::new("tau", 1.0 - 1.0 / theta, None),
            Coefficient::new("varsigma", gamma / theta, fit.delta_se(&g)),
        ];
    }
    let xi = fit.coefficients[xi_at].estimate;
    let theta = theta_from_xi(xi);
    let tau = logistic(xi);
    let grad = |k: usize, v: f64| {
        let mut g = alloc::vec![0.0; p];
        g[k] = v;
        g
    };
    let mut g_varsigma = grad(gamma_at, 1.0 / theta);
    g_varsigma[xi_at] = -gamma * xi.exp() / (theta * theta);
    alloc::vec![
        Coefficient::new("theta", theta, fit.delta_se(&grad(xi_at, xi.exp()))),
        Coefficient::new("tau", tau, fit.delta_se(&grad(xi_at, tau * (1.0 - tau)))),
        Coefficient::new("varsigma", gamma / theta, fit.delta_se(&g_varsigma)),
    ]
}

/// Full parametric maximum likelihood over `(ξ, γ, ln β₀₁, β₁₁, β₁₂)` and,
/// for Weibull baselines, `ln shape`. `shape` selects the baseline family;
/// a Weibull shape given there is only the starting value.
pub fn fit_full_mle(
    data: &Dataset,
    shape: BaselineShape,
    opts: &NelderMeadOptions,
) -> Result<FitResult> {
    let censored = data.count(None);
    if censored > 0 {
        return Err(Error::Censored(censored));
    }
    require_both_risks(data)?;
    let d = data.dim();
    let weibull = matches!(shape, BaselineShape::Weibull { .. });
    let p = 3 + 2 * d + usize::from(weibull);

    let build = |x: &[f64]| -> Result<StructuralParams> {
        let shape = match shape {
            BaselineShape::Exponential => BaselineShape::Exponential,
            BaselineShape::Weibull { .. } => BaselineShape::Weibull {
                shape: x[p - 1].exp(),
            },
        };
        StructuralParams::new(
            theta_from_xi(x[0]),
            x[1],
            x[3..3 + d].to_vec(),
            x[3 + d..3 + 2 * d].to_vec(),
            x[2].exp(),
            shape,
        )
    };
    let objective = |x: &[f64]| {
        build(x)
            .and_then(|m| m.full_loglik(data))
            .map(|v| -v)
            .unwrap_or(f64::INFINITY)
    };

    let total_time: f64 = data.iter().map(|o| o.time).sum();
    let mut x0 = alloc::vec![0.0; p];
    x0[2] = (data.len() as f64 / total_time).ln();
    if let BaselineShape::Weibull { shape } = shape {
        x0[p - 1] = shape.ln();
    }
    if !objective(&x0).is_finite() {
        return Err(Error::NonFiniteObjective { params: x0 });
    }
    let min = minimise_with_restart(objective, &x0, opts);

    let mut diagnostics = Vec::new();
    if !min.converged {
        diagnostics.push(format!(
            "simplex did not converge in {} iterations",
            min.iterations
        ));
    }
    let info = hessian(objective, &min.x);
    let covariance = covariance_from_information(&info, p, &mut diagnostics);

    let mut names = alloc::vec![
        "xi".to_string(),
        "gamma".to_string(),
        "log_beta01".to_string()
    ];
    names.extend(coefficient_names("beta11", d));
    names.extend(coefficient_names("beta12", d));
    if weibull {
        names.push("log_shape".to_string());
    }
    let mut fit = FitResult {
        model: Model::FullMle,
        coefficients: Vec::new(),
        derived: Vec::new(),
        covariance,
        loglik: -min.f,
        converged: min.converged,
        iterations: min.iterations,
        evaluations: min.evaluations,
        diagnostics,
    };
    fit.coefficients = names
        .into_iter()
        .enumerate()
        .map(|(i, name)| {
            let se = fit
                .covariance
                .as_ref()
                .map(|c| c[i * p + i].max(0.0).sqrt());
            Coefficient::new(name, min.x[i], se)
        })
        .collect();
    fit.derived = dependence_summary(&fit, true, None, 0, 1);
    let mut g = alloc::vec![0.0; p];
    g[2] = min.x[2].exp();
    let se = fit.delta_se(&g);
    fit.derived
        .push(Coefficient::new("beta01", min.x[2].exp(), se));
    Ok(fit)
}
