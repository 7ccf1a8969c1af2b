mod common;

use common::Rng;
use lrlab::models::examples::{nonreducible_lg, oscillatory, sqrt_diffusion};
use lrlab::models::{embed_lr_to_lg, embed_lr_to_lg_tilted, DiffusionSpec, LgProcess, LrModel, StateSpace};
use lrlab::numerics::{kernel_basis, subspace_distance, Matrix, Vector};
use lrlab::pricing::bond_price;
use lrlab::simulation::{simulate, simulate_with_step, uniform_grid};
use lrlab::structure::{
    analyze, equivalence_certificate, estimate_affine_support, estimate_linear_support, is_constant_short_rate,
    is_proper, krylov_rows, minimal_representation, reduce, reduce_affine_support, reduce_tsk_quotient,
    reducibility, shift_to_lg, term_structure_kernel, Equivalence,
};
use proptest::prelude::*;

const TOL: f64 = 1e-10;

fn log_grid() -> Vec<f64> {
    (0..20).map(|i| 0.1 * 500f64.powf(i as f64 / 19.0)).collect()
}

fn assert_same_prices(a: &LrModel, b: &LrModel, tol: f64) {
    for t in log_grid() {
        let p = bond_price(a, &a.z0, 0.0, t).unwrap();
        let q = bond_price(b, &b.z0, 0.0, t).unwrap();
        assert!((p - q).abs() <= tol, "T = {t}: {p} vs {q}");
    }
}

fn scalar(b: f64, beta: f64, phi: f64, psi: f64) -> LrModel {
    LrModel::deterministic(
        Vector::from_element(1, b),
        Matrix::from_element(1, 1, beta),
        0.02,
        phi,
        Vector::from_element(1, psi),
        Vector::from_element(1, 3.0),
    )
    .unwrap()
}

fn diag_lg() -> LgProcess {
    LgProcess::new(
        LrModel::deterministic(
            Vector::zeros(2),
            Matrix::from_row_slice(2, 2, &[0.2, 0.0, 0.0, -1.0]),
            0.05,
            0.0,
            Vector::from_vec(vec![1.0, 1.0]),
            Vector::from_vec(vec![1.0, 1.0]),
        )
        .unwrap(),
    )
    .unwrap()
}

/// Random stable model with zero kernel (generic ψ, β).
fn generic(rng: &mut Rng, m: usize) -> LrModel {
    let psi = Vector::from_fn(m, |_, _| rng.uniform(0.5, 1.5));
    let beta = Matrix::from_fn(m, m, |i, j| if i == j { rng.uniform(-1.5, -0.3) } else { rng.uniform(-0.2, 0.2) });
    LrModel::deterministic(
        Vector::from_fn(m, |_, _| rng.uniform(0.0, 0.3)),
        beta,
        rng.uniform(0.0, 0.05),
        rng.uniform(0.5, 1.5),
        psi,
        Vector::from_fn(m, |_, _| rng.uniform(0.5, 1.5)),
    )
    .unwrap()
}

/// `Z′ = Z − q` viewed as a new LR model.
fn translated(model: &LrModel, q: &Vector) -> LrModel {
    let mut out = model.clone();
    out.b = &model.b + &model.beta * q;
    out.phi = model.phi + model.psi.dot(q);
    out.z0 = &model.z0 - q;
    out
}

#[test]
fn two_factor_process_has_zero_kernel() {
    assert!(term_structure_kernel(&nonreducible_lg(0.05, 0.03), TOL).unwrap().is_empty());
}

#[test]
fn square_root_rate_is_not_constant() {
    assert!(!is_constant_short_rate(&sqrt_diffusion(), TOL));
}

#[test]
fn scalar_properness() {
    let p = is_proper(&scalar(1.0, -0.5, -2.0, 1.0), TOL).unwrap();
    assert!(!p.proper);
    assert!((p.witness_q.unwrap()[0] - 2.0).abs() < 1e-12);
    assert!(is_proper(&scalar(1.0, -0.5, 1.0, 1.0), TOL).unwrap().proper);
    let lg = nonreducible_lg(0.05, 0.03);
    let p = is_proper(&lg, TOL).unwrap();
    assert!(!p.proper && p.witness_q.unwrap().norm() == 0.0);
}

#[test]
fn witness_shift_gives_lg_process() {
    let model = scalar(1.0, -0.5, -2.0, 1.0);
    let q = is_proper(&model, TOL).unwrap().witness_q.unwrap();
    let lg = shift_to_lg(&model, &q, TOL).unwrap();
    assert!(lg.b.norm() <= TOL && lg.phi == 0.0);
    assert_same_prices(&model, &lg, 1e-12);
}

#[test]
fn two_factor_process_is_not_reducible() {
    let lg = LgProcess::new(nonreducible_lg(0.05, 0.03)).unwrap();
    let r = reducibility(&lg, TOL).unwrap();
    assert!(!r.reducible && r.v.is_none());
}

#[test]
fn tilted_square_root_embedding_is_reducible() {
    let model = sqrt_diffusion();
    let lg = embed_lr_to_lg_tilted(&model, model.alpha + 0.2).unwrap();
    let r = reducibility(&lg, TOL).unwrap();
    assert!((r.lambda.unwrap() + 0.2).abs() < 1e-12);
    let v = r.v.unwrap();
    assert!(v[1].abs() <= 1e-12 * v[0].abs() && v[0] > 0.0);

    let red = reduce(&lg, &v, r.lambda.unwrap(), TOL).unwrap();
    assert_same_prices(&model, &red, 1e-10);
    assert!(is_proper(&red, TOL).unwrap().proper);
    assert!(term_structure_kernel(&red, TOL).unwrap().is_empty());
}

#[test]
fn diagonal_process_reduces_by_block_arithmetic() {
    let lg = diag_lg();
    let r = reducibility(&lg, TOL).unwrap();
    assert!((r.lambda.unwrap() - 0.2).abs() < 1e-14);
    let v = r.v.unwrap();
    assert!(v[1].abs() < 1e-14);
    let red = reduce(&lg, &v, 0.2, TOL).unwrap();
    assert_eq!(red.dim(), 1);
    assert!((red.beta[(0, 0)] + 1.2).abs() < 1e-14);
    assert!((red.alpha - (0.05 - 0.2)).abs() < 1e-14);
    assert_same_prices(&lg, &red, 1e-10);
    for t in [1.0, 5.0, 20.0] {
        let normalized = |m: &LrModel| {
            // deterministic path z(t) = e^{βt}z₀ + ∫e^{βs}b ds
            let z = lrlab::numerics::expm(&m.beta, t).unwrap() * &m.z0
                + lrlab::numerics::expm_integral(&m.beta, &m.b, t).unwrap();
            m.spd(t, &z) / m.zeta0()
        };
        assert!((normalized(&lg) - normalized(&red)).abs() < 1e-12);
    }
}

#[test]
fn embedding_support_reduction_recovers_prices() {
    let model = oscillatory(2.0, 0.5, 0.03);
    let lg = embed_lr_to_lg(&model).unwrap();
    let m = model.dim();
    let basis = Matrix::from_fn(m + 1, m, |i, j| if i == j + 1 { 1.0 } else { 0.0 });
    let point = Vector::from_fn(m + 1, |i, _| if i == 0 { 1.0 } else { 0.0 });
    let red = reduce_affine_support(&lg, &basis, &point, TOL).unwrap();
    assert_eq!(red.dim(), m);
    assert_same_prices(&model, &red, 1e-12);
}

#[test]
fn full_support_restriction_is_identity() {
    let model = oscillatory(2.0, 0.5, 0.03);
    let red = reduce_affine_support(&model, &Matrix::identity(3, 3), &Vector::zeros(3), TOL).unwrap();
    assert!((&red.beta - &model.beta).amax() < 1e-15);
    assert!((&red.psi - &model.psi).amax() < 1e-15);
    assert_same_prices(&model, &red, 1e-14);
}

#[test]
fn quotient_of_decoupled_coordinate() {
    let model = LrModel::deterministic(
        Vector::zeros(2),
        Matrix::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, -2.0]),
        0.01,
        1.0,
        Vector::from_vec(vec![1.0, 0.0]),
        Vector::from_vec(vec![1.0, 1.0]),
    )
    .unwrap();
    let red = reduce_tsk_quotient(&model, TOL).unwrap();
    assert_eq!(red.dim(), 1);
    assert!((red.beta[(0, 0)] + 1.0).abs() < 1e-14);
    assert_same_prices(&model, &red, 1e-12);
    assert!(reduce_tsk_quotient(&sqrt_diffusion(), TOL).is_err());
}

/// Appends a factor that feeds neither the original state nor the density.
fn with_dummy(model: &LrModel) -> LrModel {
    let m = model.dim();
    let mut beta = Matrix::zeros(m + 1, m + 1);
    beta.view_mut((0, 0), (m, m)).copy_from(&model.beta);
    beta[(m, m)] = -0.7;
    beta[(m, 0)] = 0.4;
    let lift = |v: &Vector, x: f64| Vector::from_fn(m + 1, |i, _| if i < m { v[i] } else { x });
    LrModel::deterministic(lift(&model.b, 0.3), beta, model.alpha, model.phi, lift(&model.psi, 0.0), lift(&model.z0, 2.0))
        .unwrap()
}

#[test]
fn dummy_factor_collapses() {
    let model = oscillatory(2.0, 0.5, 0.03);
    let big = with_dummy(&model);
    assert_eq!(term_structure_kernel(&big, TOL).unwrap().len(), 1);
    let min = minimal_representation(&big, TOL).unwrap();
    assert!(!min.constant_rate);
    assert_eq!(min.model.dim(), model.dim());
    assert_same_prices(&model, &min.model, 1e-10);
}

#[test]
fn minimal_model_is_fixed_point() {
    let model = sqrt_diffusion();
    let min = minimal_representation(&model, TOL).unwrap();
    assert!(min.steps.is_empty());
    assert_eq!(min.model, model);
}

#[test]
fn minimal_form_of_embedding() {
    let model = sqrt_diffusion();
    let min = minimal_representation(&embed_lr_to_lg(&model).unwrap(), TOL).unwrap();
    assert_eq!(min.model.dim(), model.dim());
    assert_same_prices(&model, &min.model, 1e-10);
}

#[test]
fn equivalence_with_tilted_embedding() {
    let model = sqrt_diffusion();
    let lg = embed_lr_to_lg_tilted(&model, model.alpha + 0.3).unwrap();
    match equivalence_certificate(&model, &lg, None, 1e-9).unwrap() {
        Equivalence::Equivalent(cert) => assert!(cert.max_residual <= 1e-10, "{}", cert.max_residual),
        Equivalence::NotEquivalent { max_residual } => panic!("not equivalent ({max_residual})"),
    }
}

#[test]
fn equivalence_with_translated_model() {
    let model = oscillatory(2.0, 0.5, 0.03);
    let q = Vector::from_vec(vec![0.3, -0.2, 0.1]);
    let shifted = translated(&model, &q);
    match equivalence_certificate(&model, &shifted, None, 1e-9).unwrap() {
        Equivalence::Equivalent(cert) => {
            assert!((&cert.big_q - Matrix::identity(3, 3)).amax() < 1e-8);
            // Z + p = q_cert + Z′ with Z′ = Z − q
            assert!((cert.zeta0_ratio - 1.0).abs() < 1e-12);
            assert!((&cert.q - &cert.p - &q).amax() < 1e-8);
        }
        Equivalence::NotEquivalent { max_residual } => panic!("not equivalent ({max_residual})"),
    }
}

#[test]
fn unrelated_models_are_not_equivalent() {
    let mut rng = Rng::new(31);
    let a = generic(&mut rng, 2);
    let b = generic(&mut rng, 2);
    assert!(!equivalence_certificate(&a, &b, None, 1e-9).unwrap().is_equivalent());
}

#[test]
fn analyze_reports() {
    let report = analyze(&nonreducible_lg(0.05, 0.03), TOL).unwrap();
    assert!(report.tsk_basis.is_empty() && !report.reducible);
    let embedded = analyze(&embed_lr_to_lg(&sqrt_diffusion()).unwrap(), TOL).unwrap();
    assert!(!embedded.proper);
    assert_eq!(embedded.witness_q.as_ref().unwrap().norm(), 0.0);
    let nonproper = analyze(&scalar(1.0, -0.5, -2.0, 1.0), TOL).unwrap();
    assert!((nonproper.witness_q.unwrap()[0] - 2.0).abs() < 1e-12);
    let json: serde_json::Value = serde_json::from_str(&report.to_json()).unwrap();
    assert_eq!(json["reducible"], serde_json::Value::Bool(false));
}

#[test]
fn sampled_supports() {
    let model = sqrt_diffusion();
    let grid = uniform_grid(1.0, 0.01).unwrap();
    let batch = simulate(&model, 50, &grid, 3).unwrap().embedded();
    let aff = estimate_affine_support(&batch, 1e-8).unwrap();
    assert!(aff.rank <= model.dim());

    let ray = LrModel::deterministic(
        Vector::zeros(2),
        Matrix::identity(2, 2) * 0.3,
        0.0,
        1.0,
        Vector::from_vec(vec![1.0, 1.0]),
        Vector::from_vec(vec![1.0, 2.0]),
    )
    .unwrap();
    let batch = simulate(&ray, 3, &grid, 3).unwrap();
    assert_eq!(estimate_linear_support(&batch, None, 1e-8).unwrap().rank, 1);

    let lg = nonreducible_lg(0.05, 0.03);
    let batch = simulate_with_step(&lg, 200, &grid, 4, 1e-3).unwrap();
    assert_eq!(estimate_linear_support(&batch, Some(&lg.beta), 1e-8).unwrap().rank, 2);
}

fn random_beta_psi(rng: &mut Rng) -> (Matrix, Vector) {
    let m = 1 + rng.index(5);
    let k = rng.index(m);
    let n = m - k;
    let mut blocks = Matrix::zeros(m, m);
    blocks.view_mut((0, 0), (n, n)).copy_from(&rng.matrix(n, n));
    blocks.view_mut((n, 0), (k, n)).copy_from(&rng.matrix(k, n));
    blocks.view_mut((n, n), (k, k)).copy_from(&rng.matrix(k, k));
    let s = rng.orthogonal(m);
    let mut inner = Vector::zeros(m);
    inner.rows_mut(0, n).copy_from(&rng.vector(n));
    (&s * blocks.transpose() * s.transpose(), &s * inner)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn krylov_stabilizes(seed in any::<u64>()) {
        let (beta, psi) = random_beta_psi(&mut Rng::new(seed));
        let m = psi.len();
        let short = krylov_rows(&beta, &psi);
        let mut long = Vec::new();
        let mut row = psi.clone();
        for _ in 0..=2 * m {
            long.push(row.clone());
            row = beta.transpose() * row;
        }
        let a = kernel_basis(&short, TOL, Some(m)).unwrap();
        let b = kernel_basis(&long, TOL, Some(m)).unwrap();
        prop_assert_eq!(a.len(), b.len());
        prop_assert!(subspace_distance(&a, &b, m) < 1e-8);
    }

    #[test]
    fn reductions_preserve_prices(seed in any::<u64>()) {
        let mut rng = Rng::new(seed);
        let m = 1 + rng.index(3);
        let model = generic(&mut rng, m);
        let min = minimal_representation(&with_dummy(&model), TOL).unwrap();
        assert_same_prices(&model, &min.model, 1e-10);
        let lg = embed_lr_to_lg_tilted(&model, model.alpha + rng.uniform(-0.5, 0.5)).unwrap();
        let r = reducibility(&lg, TOL).unwrap();
        prop_assume!(r.reducible);
        let red = reduce(&lg, r.v.as_ref().unwrap(), r.lambda.unwrap(), TOL).unwrap();
        assert_same_prices(&model, &red, 1e-10);
        prop_assert!(is_proper(&red, TOL).unwrap().proper);
        prop_assert!(term_structure_kernel(&red, TOL).unwrap().is_empty());
    }

    #[test]
    fn witness_shift_is_lg(seed in any::<u64>()) {
        let mut rng = Rng::new(seed);
        let m = 1 + rng.index(3);
        let base = generic(&mut rng, m);
        let q = rng.vector(m);
        // choose (b, φ) so that q is a witness
        let mut model = base.clone();
        model.b = -(&model.beta * &q);
        model.phi = -model.psi.dot(&q);
        model.z0 = &q + &model.psi;
        let p = is_proper(&model, TOL).unwrap();
        prop_assert!(!p.proper);
        let lg = shift_to_lg(&model, p.witness_q.as_ref().unwrap(), TOL).unwrap();
        prop_assert!(lg.b.norm() <= 1e-10 * (1.0 + model.b.norm()));
        prop_assert_eq!(lg.phi, 0.0);
    }

    #[test]
    fn equivalence_verdict_is_symmetric(seed in any::<u64>(), related in any::<bool>()) {
        let mut rng = Rng::new(seed);
        let m = 1 + rng.index(3);
        let a = generic(&mut rng, m);
        let b = if related { translated(&a, &(rng.vector(m) * 0.2)) } else { generic(&mut rng, m) };
        let ab = equivalence_certificate(&a, &b, None, 1e-9).unwrap().is_equivalent();
        let ba = equivalence_certificate(&b, &a, None, 1e-9).unwrap().is_equivalent();
        prop_assert_eq!(ab, ba);
        prop_assert_eq!(ab, related);
    }
}

#[test]
fn lg_requires_no_constant_terms_after_shift() {
    let model = LrModel::new(
        Vector::from_element(1, 0.5),
        Matrix::from_element(1, 1, -0.5),
        0.0,
        -1.0,
        Vector::from_element(1, 1.0),
        Vector::from_element(1, 3.0),
        DiffusionSpec::new(vec![Vector::from_element(1, 0.2)], vec![0.0], vec![Vector::from_element(1, 1.0)]),
        StateSpace::NonnegOrthant,
    )
    .unwrap();
    let q = is_proper(&model, TOL).unwrap().witness_q.unwrap();
    let lg = shift_to_lg(&model, &q, TOL).unwrap();
    // a + cᵀq with a = 0, c = 1
    assert_eq!(lg.diffusion.vol_offsets[0], q[0]);
}
