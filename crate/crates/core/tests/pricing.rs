mod common;

use std::f64::consts::PI;

use common::Rng;
use lrlab::models::examples::{deterministic_scalar, nonreducible_lg, oscillatory, sqrt_diffusion};
use lrlab::models::{embed_lr_to_lg, DiffusionSpec, LrModel, StateSpace};
use lrlab::numerics::{expm, Matrix, Vector};
use lrlab::pricing::{
    alpha_star, bond_price, long_term_yield_analytic, long_term_yield_numeric, short_rate, yield_curve,
    LongTermRationale,
};
use lrlab::structure::constant_short_rate;
use proptest::prelude::*;

fn oscillatory_price(omega: f64, kappa: f64, alpha: f64, t: f64) -> f64 {
    (-alpha * t).exp() * (1.0 + (omega * t).cos() + (-kappa * t).exp()) / 3.0
}

fn random_model(rng: &mut Rng) -> LrModel {
    let m = 1 + rng.index(3);
    let psi = Vector::from_fn(m, |_, _| rng.uniform(0.5, 1.5));
    LrModel::new(
        Vector::from_fn(m, |_, _| rng.uniform(0.0, 0.5)),
        Matrix::from_fn(m, m, |i, j| if i == j { rng.uniform(-1.0, -0.2) } else { rng.uniform(0.0, 0.1) }),
        rng.uniform(0.0, 0.1),
        rng.uniform(0.5, 1.5),
        psi,
        Vector::from_fn(m, |_, _| rng.uniform(0.1, 2.0)),
        DiffusionSpec::new(
            (0..m).map(|i| Vector::from_fn(m, |j, _| if i == j { 0.3 } else { 0.0 })).collect(),
            vec![0.0; m],
            (0..m).map(|i| Vector::from_fn(m, |j, _| if i == j { 1.0 } else { 0.0 })).collect(),
        ),
        StateSpace::NonnegOrthant,
    )
    .unwrap()
}

#[test]
fn oscillatory_prices_match_closed_form() {
    let (w, k, a) = (2.0, 0.5, 0.03);
    let model = oscillatory(w, k, a);
    for t in [0.1, 0.7, 1.5, 3.0, 10.0, 2.0 * 50.0 * PI / w] {
        let p = bond_price(&model, &model.z0, 0.0, t).unwrap();
        assert!((p - oscillatory_price(w, k, a, t)).abs() < 1e-10, "T = {t}");
    }
}

#[test]
fn two_factor_conditional_density() {
    let (c, a) = (0.05, 0.03);
    let model = nonreducible_lg(c, a);
    let z = Vector::from_vec(vec![0.7, 1.3]);
    for (t, big_t) in [(0.0, 1.0), (0.5, 3.0), (2.0, 40.0)] {
        let tau: f64 = big_t - t;
        let expect = (-a * big_t).exp() * (z.sum() + z[1] * ((c * tau).exp() - 1.0) * (1.0 / c + 1.0));
        let got = bond_price(&model, &z, t, big_t).unwrap() * model.spd(t, &z);
        assert!((got - expect).abs() < 1e-12 * expect, "t {t}, T {big_t}");
    }
}

#[test]
fn short_rate_is_the_limit_slope() {
    let model = sqrt_diffusion();
    for z in [0.1, 1.0, 4.0] {
        let z = Vector::from_element(1, z);
        let r = short_rate(&model, &z).unwrap();
        let fd = |h: f64| -bond_price(&model, &z, 0.0, h).unwrap().ln() / h;
        let (e1, e2) = ((fd(1e-4) - r).abs(), (fd(1e-5) - r).abs());
        assert!(e2 < 1e-5);
        assert!((5.0..20.0).contains(&(e1 / e2)), "ratio {}", e1 / e2);
    }
}

#[test]
fn constant_rate_detection() {
    // ψᵀβ = λψᵀ and ψᵀb = λφ
    let beta = Matrix::from_row_slice(2, 2, &[-0.3, 0.2, 0.1, -0.4]);
    let psi = Vector::from_vec(vec![1.0, 1.0]);
    let lambda = -0.2;
    let b = Vector::from_vec(vec![0.3, -0.5]);
    let phi = psi.dot(&b) / lambda;
    let z0 = Vector::from_vec(vec![5.0, 5.0]);
    let model = LrModel::deterministic(b, beta, 0.04, phi, psi, z0).unwrap();
    assert!((constant_short_rate(&model, 1e-10).unwrap() - lambda).abs() < 1e-14);
    for z in [[5.0, 5.0], [2.0, 9.0], [1.0, 3.5]] {
        let r = short_rate(&model, &Vector::from_row_slice(&z)).unwrap();
        assert!((r - (0.04 - lambda)).abs() < 1e-14);
    }
    assert!(constant_short_rate(&sqrt_diffusion(), 1e-10).is_none());
}

#[test]
fn nonnegative_rates_give_decreasing_discounts() {
    let mut model = sqrt_diffusion();
    model.alpha = alpha_star(&model).unwrap().alpha_star.unwrap();
    let mats: Vec<f64> = (0..100).map(|i| i as f64 * 0.3).collect();
    let curve = yield_curve(&model, &model.z0, 0.0, &mats).unwrap();
    assert_eq!(curve.discount_factors[0], 1.0);
    assert!(curve.yields[0].is_none());
    assert!(curve.discount_factors.windows(2).all(|w| w[1] <= w[0]));
}

#[test]
fn oscillatory_subsequences_separate() {
    let (w, k, a) = (2.0, 0.5, 0.03);
    let model = oscillatory(w, k, a);
    let mut prev = (f64::INFINITY, f64::INFINITY);
    // beyond n ≈ 10 the odd-maturity price 1 + cos(ωT) + e^{−κT} is below the
    // rounding error of 1 + cos(ωT)
    for n in [2.0, 5.0, 10.0] {
        let even = 2.0 * n * PI / w;
        let odd = (2.0 * n + 1.0) * PI / w;
        let y = long_term_yield_numeric(&model, &model.z0, 0.0, &[even, odd]).unwrap();
        let exact_even = a + (3.0 / (2.0 + (-k * even).exp())).ln() / even;
        let exact_odd = a - (oscillatory_price(w, k, a, odd) / (-a * odd).exp()).ln() / odd;
        assert!((y[0] - exact_even).abs() < 1e-10);
        assert!((y[1] - exact_odd).abs() < 1e-8 * (1.0 + exact_odd.abs()), "n = {n}");
        assert!(y[1] - y[0] > k / 2.0);
        let gaps = ((y[0] - a).abs(), (y[1] - a - k).abs());
        assert!(gaps.0 < prev.0 && gaps.1 < prev.1);
        prev = gaps;
    }
}

#[test]
fn alpha_star_scalar() {
    let model = LrModel::new(
        Vector::from_element(1, 0.1),
        Matrix::from_element(1, 1, -0.5),
        0.0,
        1.0,
        Vector::from_element(1, 1.0),
        Vector::from_element(1, 1.0),
        DiffusionSpec::deterministic(),
        StateSpace::NonnegOrthant,
    )
    .unwrap();
    let report = alpha_star(&model).unwrap();
    assert!(report.condition_holds && report.finite);
    assert!((report.alpha_star.unwrap() - 0.1).abs() < 1e-15);
    let sup = (0..=100_000)
        .map(|i| if i == 0 { 0.0 } else { 10f64.powf(-8.0 + 14.0 * i as f64 / 100_000.0) })
        .map(|z| (0.1 - 0.5 * z) / (1.0 + z))
        .fold(f64::NEG_INFINITY, f64::max);
    assert!((sup - 0.1).abs() < 1e-6);
}

#[test]
fn alpha_star_abstains_when_condition_fails() {
    let model = LrModel::new(
        Vector::zeros(2),
        Matrix::from_row_slice(2, 2, &[-0.1, 0.5, 0.0, -0.1]),
        0.0,
        1.0,
        Vector::from_vec(vec![1.0, 0.0]),
        Vector::from_vec(vec![1.0, 1.0]),
        DiffusionSpec::deterministic(),
        StateSpace::NonnegOrthant,
    )
    .unwrap();
    let report = alpha_star(&model).unwrap();
    assert!(!report.condition_holds);
    assert!(report.alpha_star.is_none());
}

#[test]
fn analytic_long_yields() {
    let stable = deterministic_scalar(0.1, -0.5, 0.04, 1.0, 1.0, 1.0);
    let y = long_term_yield_analytic(&stable, 1e-10);
    assert_eq!(y.rationale, LongTermRationale::ProperStable);
    assert!((y.value.unwrap() - 0.04).abs() < 1e-14);

    let growing = deterministic_scalar(0.1, 0.4, 0.04, 1.0, 1.0, 1.0);
    let y = long_term_yield_analytic(&growing, 1e-10);
    assert!((y.value.unwrap() - (0.04 - 0.4)).abs() < 1e-12);

    let osc = long_term_yield_analytic(&oscillatory(2.0, 0.5, 0.03), 1e-10);
    assert_eq!(osc.rationale, LongTermRationale::Undetermined);
    assert!(osc.value.is_none());
}

#[test]
fn numeric_long_yield_of_two_factor_process() {
    let (c, a) = (0.05, 0.03);
    let model = nonreducible_lg(c, a);
    let y = long_term_yield_numeric(&model, &model.z0, 0.0, &[200.0 / c]).unwrap()[0];
    // −log(1 + (e^{cτ}−1)(1/c+1)/2)/τ = c − log(...)/τ, the log term is O(1/τ)
    let exact = a - ((2.0 + ((c * 4000.0f64).exp() - 1.0) * (1.0 / c + 1.0)) / 2.0).ln() / 4000.0;
    assert!((y - exact).abs() < 1e-12);
    assert!((y - (a - c)).abs() < 1e-3);
    let live = long_term_yield_numeric(&model, &Vector::from_vec(vec![1.0, 1.0]), 0.0, &[1e5, 1e6]).unwrap();
    assert!((live[1] - (a - c)).abs() < 1e-5);
    let absorbed = long_term_yield_numeric(&model, &Vector::from_vec(vec![1.0, 0.0]), 0.0, &[4000.0]).unwrap();
    assert_eq!(absorbed[0], a);
}

#[test]
fn long_maturities_do_not_overflow() {
    let model = deterministic_scalar(0.0, 2.0, 0.01, 1.0, 1.0, 1.0);
    let y = long_term_yield_numeric(&model, &model.z0, 0.0, &[10.0, 1000.0]).unwrap();
    assert!(y.iter().all(|v| v.is_finite()));
    assert!((y[1] - (0.01 - 2.0)).abs() < 1e-3);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn price_at_maturity_is_one(seed in any::<u64>(), t in 0.0f64..50.0) {
        let model = random_model(&mut Rng::new(seed));
        let p = bond_price(&model, &model.z0, t, t).unwrap();
        prop_assert!((p - 1.0).abs() <= 1e-14);
    }

    #[test]
    fn time_homogeneous(seed in any::<u64>(), t in 0.0f64..20.0, tau in 0.0f64..20.0) {
        let model = random_model(&mut Rng::new(seed));
        let a = bond_price(&model, &model.z0, 0.0, tau).unwrap();
        let b = bond_price(&model, &model.z0, t, t + tau).unwrap();
        prop_assert!((a - b).abs() <= 1e-13 * a);
    }

    #[test]
    fn nonnegative_rates_at_alpha_star(seed in any::<u64>()) {
        let mut rng = Rng::new(seed);
        let mut model = random_model(&mut rng);
        let report = alpha_star(&model).unwrap();
        prop_assume!(report.condition_holds);
        model.alpha = report.alpha_star.unwrap();
        let m = model.dim();
        for _ in 0..10_000 {
            let z = Vector::from_fn(m, |_, _| if rng.index(5) == 0 { 0.0 } else { 10f64.powf(rng.uniform(-6.0, 6.0)) });
            prop_assert!(short_rate(&model, &z).unwrap() >= -1e-12);
        }
    }

    #[test]
    fn nested_expectations_compose(seed in any::<u64>(), s in 0.0f64..5.0, u in 0.0f64..5.0) {
        let model = random_model(&mut Rng::new(seed));
        let lg = embed_lr_to_lg(&model).unwrap();
        let z = &lg.z0;
        let direct = lg.psi.dot(&(expm(&lg.beta, s + u).unwrap() * z));
        let two_step = lg.psi.dot(&(expm(&lg.beta, u).unwrap() * (expm(&lg.beta, s).unwrap() * z)));
        prop_assert!((direct - two_step).abs() <= 1e-10 * direct.abs());
        let p = bond_price(&model, &model.z0, 0.0, s + u).unwrap();
        let from_lg = (-model.alpha * (s + u)).exp() * direct / model.density_numerator(&model.z0);
        prop_assert!((p - from_lg).abs() <= 1e-10 * p);
    }
}
