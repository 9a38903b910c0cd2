use crcop_core::quadrature::{integrate, integrate_to_infinity};
use crcop_core::{BaselineShape, Risk, StructuralParams};
use proptest::prelude::*;

fn design() -> StructuralParams {
    StructuralParams::simulation_design(2.0).unwrap()
}

fn params(theta: f64, gamma: f64, b11: f64, b12: f64, shape: BaselineShape) -> StructuralParams {
    StructuralParams::new(theta, gamma, vec![b11], vec![b12], 0.8, shape).unwrap()
}

#[test]
fn subdensities_integrate_to_one_at_design() {
    let p = design();
    for z in [-1.5, 0.0, 0.7] {
        let total: f64 = Risk::BOTH
            .iter()
            .map(|&r| {
                integrate_to_infinity(|t| p.subdensity(r, t, &[z]).unwrap(), 0.0, 1e-10).unwrap()
            })
            .sum();
        assert!((total - 1.0).abs() < 1e-6, "z={z} total={total}");
    }
}

#[test]
fn subdensity_mass_is_incidence_probability() {
    let p = design();
    for z in [-1.0, 0.0, 1.0] {
        for r in Risk::BOTH {
            let mass =
                integrate_to_infinity(|t| p.subdensity(r, t, &[z]).unwrap(), 0.0, 1e-11).unwrap();
            let closed = p.incidence_probability(r, &[z]).unwrap();
            assert!(
                (mass - closed).abs() < 1e-7,
                "z={z} {r:?}: {mass} vs {closed}"
            );
        }
    }
}

#[test]
fn cumulative_incidence_matches_quadrature() {
    let p = design();
    for (t, z) in [(0.05, 0.0), (0.3, 1.0), (1.2, -0.5), (4.0, -2.0)] {
        for r in Risk::BOTH {
            let q = integrate(|s| p.subdensity(r, s, &[z]).unwrap(), 0.0, t, 1e-12).unwrap();
            let c = p.cumulative_incidence(r, t, &[z]).unwrap();
            assert!((q - c).abs() < 1e-8, "t={t} z={z} {r:?}: {q} vs {c}");
        }
    }
}

/// `d_j(t) = f_j(t) / (1 - F_j(t))` with `F_j` by quadrature.
fn sdh_by_quadrature(p: &StructuralParams, r: Risk, t: f64, z: f64) -> f64 {
    let cif = integrate(|s| p.subdensity(r, s, &[z]).unwrap(), 0.0, t, 1e-13).unwrap();
    p.subdensity(r, t, &[z]).unwrap() / (1.0 - cif)
}

#[test]
fn subdistribution_hazard_matches_quadrature() {
    for theta in [1.0, 1.5, 2.0, 6.0] {
        let p = StructuralParams::simulation_design(theta).unwrap();
        for (t, z) in [(0.1, 0.0), (0.5, 0.5), (2.0, -1.0)] {
            for r in Risk::BOTH {
                let closed = p.implied_sdh(r, t, &[z]).unwrap();
                let q = sdh_by_quadrature(&p, r, t, z);
                assert!(
                    (closed - q).abs() < 1e-6 * q.max(1.0),
                    "θ={theta} t={t} z={z} {r:?}: {closed} vs {q}"
                );
            }
        }
    }
}

#[test]
fn sdh_under_independence_at_zero_covariate() {
    // θ = 1, z = 0: φ̃ = 1 + e^γ and d₁ = λ₁φ̃ / (1 + e^γ e^{Λ₁φ̃})
    let p = StructuralParams::simulation_design(1.0).unwrap();
    let tilde = 1.0 + p.gamma().exp();
    for t in [0.1, 0.7, 2.5] {
        let lam = p.marginal(Risk::First).hazard(t, &[0.0]).unwrap();
        let cum = p
            .marginal(Risk::First)
            .cumulative_hazard(t, &[0.0])
            .unwrap();
        let expected = lam * tilde / (1.0 + p.gamma().exp() * (cum * tilde).exp());
        let got = p.implied_sdh(Risk::First, t, &[0.0]).unwrap();
        assert!((got - expected).abs() < 1e-12, "t={t}");
        assert!((got - sdh_by_quadrature(&p, Risk::First, t, 0.0)).abs() < 1e-6);
    }
}

#[test]
fn gumbel_sdh_ratio_depends_on_time() {
    let p = design();
    let ratio = |t: f64| {
        p.implied_sdh(Risk::First, t, &[0.0]).unwrap()
            / p.implied_sdh(Risk::First, t, &[1.0]).unwrap()
    };
    let (a, b) = (ratio(0.05), ratio(1.5));
    assert!((a / b - 1.0).abs() > 1e-2, "{a} {b}");
}

#[test]
fn sdh_ratio_approaches_marginal_ratio_where_risk_one_dominates() {
    // As θ grows, d₁(t|z) → λ₁(t|z) wherever η(z)^θ → 0, i.e. where the
    // risk-1 marginal hazard exceeds the risk-2 one.
    let p = StructuralParams::new(
        1000.0,
        0.5,
        vec![1.0],
        vec![2.0],
        1.0,
        BaselineShape::Exponential,
    )
    .unwrap();
    let (z1, z2) = (-1.0, -2.0);
    let target = ((z1 - z2) * 1.0f64).exp();
    for t in [0.1, 0.5, 2.0] {
        let r = p.implied_sdh(Risk::First, t, &[z1]).unwrap()
            / p.implied_sdh(Risk::First, t, &[z2]).unwrap();
        assert!(
            (r / target - 1.0).abs() < 0.01,
            "t={t} ratio={r} target={target}"
        );
    }
}

#[test]
fn sdh_ratio_collapses_where_risk_two_dominates() {
    // With z = 1 risk 2 is the larger marginal hazard; at θ = 1000 risk 1
    // almost never occurs there and its SDH vanishes, so no ratio limit
    // against z = 0 exists.
    let p = StructuralParams::new(
        1000.0,
        0.5,
        vec![1.0],
        vec![2.0],
        1.0,
        BaselineShape::Exponential,
    )
    .unwrap();
    assert!(p.incidence_probability(Risk::First, &[1.0]).unwrap() < 1e-100);
    assert!(p.implied_sdh(Risk::First, 0.5, &[1.0]).unwrap() < 1e-100);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn overall_density_is_sum_of_subdensities(
        theta in 1.0f64..8.0,
        gamma in -1.5f64..1.5,
        b11 in -1.0f64..1.5,
        b12 in -1.0f64..1.5,
        weibull in prop::bool::ANY,
        z in -1.5f64..1.5,
        t in 0.05f64..3.0,
    ) {
        let shape = if weibull { BaselineShape::Weibull { shape: 1.4 } } else { BaselineShape::Exponential };
        let p = params(theta, gamma, b11, b12, shape);
        let h = 1e-5 * t;
        let dsdt = (p.overall_survival(t + h, &[z]).unwrap() - p.overall_survival(t - h, &[z]).unwrap()) / (2.0 * h);
        let f = p.subdensity(Risk::First, t, &[z]).unwrap() + p.subdensity(Risk::Second, t, &[z]).unwrap();
        prop_assert!((-dsdt - f).abs() < 1e-6 * f.max(1.0), "{} vs {}", -dsdt, f);
    }

    #[test]
    fn subdensities_are_normalised(
        theta in 1.0f64..8.0,
        gamma in -1.0f64..1.0,
        b11 in -1.0f64..1.0,
        b12 in -1.0f64..1.0,
        z in -1.0f64..1.0,
    ) {
        let p = params(theta, gamma, b11, b12, BaselineShape::Weibull { shape: 0.8 });
        let total: f64 = Risk::BOTH
            .iter()
            .map(|&r| integrate_to_infinity(|t| p.subdensity(r, t, &[z]).unwrap(), 0.0, 1e-10).unwrap())
            .sum();
        prop_assert!((total - 1.0).abs() < 1e-6, "total={}", total);
    }

    #[test]
    fn cumulative_hazard_is_integral_of_hazard(
        b11 in -1.0f64..1.0,
        shape in 0.5f64..3.0,
        z in -1.0f64..1.0,
        t in 0.01f64..4.0,
    ) {
        let p = params(2.0, 0.3, b11, 0.5, BaselineShape::Weibull { shape });
        for r in Risk::BOTH {
            let m = p.marginal(r);
            let q = integrate(|s| m.hazard(s, &[z]).unwrap(), 0.0, t, 1e-12).unwrap();
            let c = m.cumulative_hazard(t, &[z]).unwrap();
            prop_assert!((q - c).abs() < 1e-8 * c.max(1.0), "{} vs {}", q, c);
        }
    }

    #[test]
    fn implied_csh_z_ratio_is_constant_in_time(
        theta in 1.0f64..10.0,
        gamma in -1.0f64..1.0,
        z1 in -2.0f64..2.0,
        z2 in -2.0f64..2.0,
        t1 in 0.01f64..5.0,
        t2 in 0.01f64..5.0,
    ) {
        let p = params(theta, gamma, 1.0, 2.0, BaselineShape::Weibull { shape: 1.7 });
        for r in Risk::BOTH {
            let ratio = |t: f64| p.implied_csh(r, t, &[z1]).unwrap() / p.implied_csh(r, t, &[z2]).unwrap();
            prop_assert!((ratio(t1) / ratio(t2) - 1.0).abs() < 1e-8);
        }
    }
}
