use crcop_core::quadrature::GaussHermite;
use crcop_core::sampler::{
    sample_dataset, sample_latent_pair, sample_latent_pair_conditional, DgpConfig, PairMethod,
    SimRng,
};
use crcop_core::stats::{kendall_tau, ks_p_value, ks_two_sample};
use crcop_core::{Risk, StructuralParams};
use rand::SeedableRng;

fn latent_tau(theta: f64, n: usize, conditional: bool, seed: u64) -> f64 {
    let p = StructuralParams::simulation_design(theta).unwrap();
    let mut rng = SimRng::seed_from_u64(seed);
    let (mut a, mut b) = (Vec::with_capacity(n), Vec::with_capacity(n));
    for _ in 0..n {
        let (t1, t2) = if conditional {
            sample_latent_pair_conditional(&p, &[0.3], &mut rng).unwrap()
        } else {
            sample_latent_pair(&p, &[0.3], &mut rng).unwrap()
        };
        a.push(t1);
        b.push(t2);
    }
    kendall_tau(&a, &b).unwrap()
}

#[test]
fn latent_pairs_have_the_copula_kendall_tau() {
    for theta in [1.0 / 0.9, 2.0, 10.0] {
        let tau = latent_tau(theta, 100_000, false, 17);
        let expected = 1.0 - 1.0 / theta;
        assert!(
            (tau - expected).abs() < 0.01,
            "θ={theta}: τ̂={tau} vs {expected}"
        );
    }
}

#[test]
fn conditional_inversion_has_the_copula_kendall_tau() {
    for theta in [2.0, 10.0] {
        let tau = latent_tau(theta, 20_000, true, 5);
        assert!(
            (tau - (1.0 - 1.0 / theta)).abs() < 0.02,
            "θ={theta}: τ̂={tau}"
        );
    }
}

#[test]
fn independence_gives_zero_tau() {
    assert!(latent_tau(1.0, 50_000, false, 3).abs() < 0.01);
}

fn observed(method: PairMethod, n: usize, seed: u64) -> (Vec<f64>, usize) {
    let mut cfg = DgpConfig::new(StructuralParams::simulation_design(2.0).unwrap(), n, seed);
    cfg.method = method;
    let d = sample_dataset(&cfg).unwrap();
    (
        d.iter().map(|o| o.time).collect(),
        d.count(Some(Risk::First)),
    )
}

#[test]
fn both_samplers_agree_in_distribution() {
    let n = 10_000;
    let (a, a1) = observed(PairMethod::Frailty, n, 101);
    let (b, b1) = observed(PairMethod::ConditionalInversion, n, 202);
    let d = ks_two_sample(&a, &b);
    let critical = 1.628 * ((2 * n) as f64 / (n * n) as f64).sqrt();
    assert!(
        d < critical,
        "KS D={d} critical={critical} p={}",
        ks_p_value(d, n, n)
    );
    // cause shares agree too (binomial sd ≈ 0.005 per arm)
    assert!((a1 as f64 - b1 as f64).abs() / n as f64 <= 0.025);
}

#[test]
fn risk_one_share_matches_the_incidence_integral() {
    let p = StructuralParams::simulation_design(2.0).unwrap();
    let gh = GaussHermite::new(64).unwrap();
    let exact = gh.normal_expectation(0.0, 2.0, |z| {
        p.incidence_probability(Risk::First, &[z]).unwrap()
    });
    assert!((exact - 0.4545).abs() < 5e-4, "exact share {exact}");
    let (_, ones) = observed(PairMethod::Frailty, 100_000, 9);
    let share = ones as f64 / 100_000.0;
    assert!((share - exact).abs() < 0.006, "share={share} exact={exact}");
}

#[test]
fn risk_one_share_varies_with_theta() {
    // The risk-1 share changes with θ even with the margins fixed.
    let gh = GaussHermite::new(64).unwrap();
    let share = |theta: f64| {
        let p = StructuralParams::simulation_design(theta).unwrap();
        gh.normal_expectation(0.0, 2.0, |z| {
            p.incidence_probability(Risk::First, &[z]).unwrap()
        })
    };
    assert!((share(1.0) - share(10.0)).abs() > 0.01);
}
