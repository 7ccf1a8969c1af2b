mod common;

use common::mean_se;
use lrlab::models::examples::{deterministic_scalar, nonreducible_lg, oscillatory, sqrt_diffusion};
use lrlab::models::{embed_lr_to_lg, LgProcess, LrModel};
use lrlab::numerics::{expm, expm_integral, Matrix, Vector};
use lrlab::pricing::{bond_price, short_rate};
use lrlab::simulation::{
    check_lg_martingale, density_logarithm, forward_density, long_bond, long_forward_diagnostic, simulate,
    simulate_with_step, spd_path, uniform_grid, LongForwardVerdict, Scheme,
};

fn grid_index(grid: &[f64], t: f64) -> usize {
    grid.iter().position(|&g| (g - t).abs() < 1e-9).expect("grid point")
}

#[test]
fn oscillatory_paths_follow_closed_form() {
    let (w, k, a) = (2.0, 0.5, 0.03);
    let model = oscillatory(w, k, a);
    let grid = uniform_grid(10.0, 0.05).unwrap();
    let batch = simulate(&model, 2, &grid, 1).unwrap();
    assert_eq!(batch.scheme, Scheme::ExactDeterministic);
    let spd = spd_path(&model, &batch).unwrap();
    assert_eq!(spd.invalid, 0);
    for (i, &t) in grid.iter().enumerate() {
        let (c, s) = ((w * t).cos(), (w * t).sin());
        let exact = [c + s, c - s, (-k * t).exp()];
        let z = batch.state(1, i);
        for j in 0..3 {
            assert!((z[j] - exact[j]).abs() < 1e-10, "t = {t}");
        }
        let zeta = (-a * t).exp() * (1.0 + (w * t).cos() + (-k * t).exp());
        assert!((spd.get(1, i) - zeta).abs() < 1e-10);
    }
}

#[test]
fn motionless_model_has_constant_paths() {
    let model = deterministic_scalar(0.0, 0.0, 0.02, 1.0, 0.0, 2.0);
    let grid = uniform_grid(3.0, 0.5).unwrap();
    let batch = simulate(&model, 3, &grid, 9).unwrap();
    assert!(batch.states.iter().all(|&x| x == 2.0));
    let spd = spd_path(&model, &batch).unwrap();
    for (i, &t) in grid.iter().enumerate() {
        assert!((spd.get(0, i) - (-0.02 * t).exp()).abs() < 1e-15);
    }
    let ld = density_logarithm(&model, &batch).unwrap();
    assert!(ld.values.iter().all(|&x| x == 0.0));
    let lb = long_bond(&model, &batch, &[10.0, 100.0]).unwrap();
    for row in &lb.ratios {
        assert!(row.iter().all(|r| (r - (0.02 * 3.0f64).exp()).abs() < 1e-12));
    }
}

#[test]
fn first_moment_is_exact() {
    let model = sqrt_diffusion();
    let grid = uniform_grid(2.0, 0.05).unwrap();
    let batch = simulate_with_step(&model, 100_000, &grid, 17, 1e-3).unwrap();
    for t in [0.5, 1.0, 2.0] {
        let k = grid_index(&grid, t);
        let exact = (expm(&model.beta, t).unwrap() * &model.z0 + expm_integral(&model.beta, &model.b, t).unwrap())[0];
        let xs: Vec<f64> = (0..batch.num_paths).map(|p| batch.state(p, k)[0]).collect();
        let (m, se) = mean_se(&xs);
        assert!((m - exact).abs() <= 3.0 * se, "t = {t}: {m} vs {exact} (se {se})");
    }
}

#[test]
fn discounted_density_prices_bonds() {
    let model = sqrt_diffusion();
    let grid = uniform_grid(5.0, 0.1).unwrap();
    let batch = simulate_with_step(&model, 100_000, &grid, 23, 1e-3).unwrap();
    let spd = spd_path(&model, &batch).unwrap();
    for t in [0.5, 1.0, 2.0, 5.0] {
        let k = grid_index(&grid, t);
        let xs: Vec<f64> = spd.column(k).iter().map(|z| z / model.zeta0()).collect();
        let (m, se) = mean_se(&xs);
        let p = bond_price(&model, &model.z0, 0.0, t).unwrap();
        assert!((m - p).abs() <= 3.0 * se, "T = {t}: {m} vs {p} (se {se})");
    }
}

#[test]
fn forward_density_has_unit_mean() {
    let model = sqrt_diffusion();
    let grid = uniform_grid(2.0, 0.1).unwrap();
    let batch = simulate_with_step(&model, 50_000, &grid, 29, 1e-3).unwrap();
    for maturity in [1.0, 2.0, 10.0] {
        let fwd = forward_density(&model, &batch, maturity).unwrap();
        for k in 0..batch.num_times() {
            let (m, se) = fwd.mean_se(k);
            assert!((m - 1.0).abs() <= 3.0 * se + 1e-12, "T = {maturity}, k = {k}");
        }
    }
    let det = deterministic_scalar(0.1, -0.5, 0.03, 1.0, 1.0, 1.0);
    let batch = simulate(&det, 2, &grid, 1).unwrap();
    let fwd = forward_density(&det, &batch, 5.0).unwrap();
    assert!(fwd.values.iter().all(|&x| (x - 1.0).abs() < 1e-12));
}

#[test]
fn two_factor_martingale_check() {
    let lg = LgProcess::new(nonreducible_lg(0.05, 0.03)).unwrap();
    let grid = uniform_grid(2.0, 0.02).unwrap();
    let batch = simulate_with_step(&lg, 100_000, &grid, 31, 1e-3).unwrap();
    let diags = check_lg_martingale(&lg, &batch).unwrap();
    assert!(diags.iter().all(|d| d.pass), "{diags:?}");

    // simulate with β + 0.1, test against the true β
    let mut wrong = lg.model().clone();
    wrong.beta += Matrix::identity(2, 2) * 0.1;
    let batch = simulate_with_step(&wrong, 100_000, &grid, 31, 1e-3).unwrap();
    let diags = check_lg_martingale(&lg, &batch).unwrap();
    assert!(diags.iter().any(|d| !d.pass));
}

#[test]
fn deterministic_lg_components_are_constant() {
    let lg = embed_lr_to_lg(&oscillatory(2.0, 0.5, 0.03)).unwrap();
    let grid = uniform_grid(5.0, 0.25).unwrap();
    let batch = simulate(&lg, 2, &grid, 0).unwrap();
    for d in check_lg_martingale(&lg, &batch).unwrap() {
        assert!(d.pass);
        assert!(d.standard_errors.iter().all(|&s| s == 0.0));
        assert!(d.sample_means.iter().all(|m| (m - d.sample_means[0]).abs() < 1e-10));
    }
}

#[test]
fn long_forward_verdicts() {
    let grid = uniform_grid(1.0, 0.05).unwrap();
    let det = deterministic_scalar(0.1, -0.5, 0.03, 1.0, 1.0, 1.0);
    let batch = simulate(&det, 4, &grid, 0).unwrap();
    let d = long_forward_diagnostic(&det, &batch, &[5.0, 10.0]).unwrap();
    assert_eq!(d.verdict, LongForwardVerdict::ConsistentWithLongForward);
    assert!(d.l1_deviations.iter().all(|&x| x < 1e-12));

    let model = sqrt_diffusion();
    let batch = simulate_with_step(&model, 5_000, &grid, 5, 1e-3).unwrap();
    let d = long_forward_diagnostic(&model, &batch, &[2.0, 4.0, 8.0, 16.0]).unwrap();
    assert!(d.l1_deviations.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn long_bond_limits() {
    let grid = uniform_grid(2.0, 0.5).unwrap();
    let det = deterministic_scalar(0.1, -0.5, 0.03, 1.0, 1.0, 1.0);
    let batch = simulate(&det, 1, &grid, 0).unwrap();
    let lb = long_bond(&det, &batch, &[50.0, 100.0, 200.0]).unwrap();
    let tail = lb.ratios.last().unwrap()[0];
    assert!((tail - lb.reference[0]).abs() < 1e-12 * lb.reference[0]);

    let model = sqrt_diffusion();
    let batch = simulate_with_step(&model, 200, &grid, 6, 1e-3).unwrap();
    let lb = long_bond(&model, &batch, &[4.0, 8.0, 16.0, 32.0]).unwrap();
    for p in 0..batch.num_paths {
        let gaps: Vec<f64> = lb.ratios.iter().map(|row| (row[p] - lb.reference[p]).abs()).collect();
        assert!(gaps.windows(2).all(|w| w[1] <= w[0]), "path {p}: {gaps:?}");
    }
}

#[test]
fn density_logarithm_is_centered() {
    let model = sqrt_diffusion();
    // the left-point compensator is first-order in the observation step, so
    // observe at the integration step
    let grid = uniform_grid(0.2, 1e-3).unwrap();
    let batch = simulate(&model, 100_000, &grid, 37).unwrap();
    let ld = density_logarithm(&model, &batch).unwrap();
    for k in [50, 100, 200] {
        let (m, se) = ld.mean_se(k);
        assert!(m.abs() <= 3.0 * se, "k = {k}: {m} (se {se})");
    }
}

/// Mean pathwise gap between `ζ_t/ζ₀` and `e^{−Σ r Δt} Π(1 + ΔL^D)` at the horizon.
fn reconstruction_gap(model: &LrModel, dt: f64) -> f64 {
    let grid = uniform_grid(1.0, dt).unwrap();
    let batch = simulate(model, 400, &grid, 41).unwrap();
    let ld = density_logarithm(model, &batch).unwrap();
    let spd = spd_path(model, &batch).unwrap();
    let last = grid.len() - 1;
    let mut total = 0.0;
    for p in 0..batch.num_paths {
        let (mut comp, mut growth) = (0.0, 1.0);
        for k in 1..grid.len() {
            let r = short_rate(model, &batch.state(p, k - 1)).unwrap();
            comp += r * (grid[k] - grid[k - 1]);
            growth *= 1.0 + ld.get(p, k) - ld.get(p, k - 1);
        }
        total += ((-comp).exp() * growth - spd.get(p, last) / spd.get(p, 0)).abs();
    }
    total / batch.num_paths as f64
}

#[test]
fn density_reconstruction_converges_first_order() {
    let model = sqrt_diffusion();
    let coarse = reconstruction_gap(&model, 0.02);
    let fine = reconstruction_gap(&model, 0.01);
    let finer = reconstruction_gap(&model, 0.005);
    assert!(fine < coarse && finer < fine);
    let ratio = coarse / finer;
    assert!((2.5..6.0).contains(&ratio), "{coarse} {fine} {finer}");
}

#[test]
fn long_yield_never_falls_on_two_factor_paths() {
    let (c, a) = (0.05, 0.03);
    let model = nonreducible_lg(c, a);
    let grid = uniform_grid(2.0, 0.01).unwrap();
    let batch = simulate_with_step(&model, 2_000, &grid, 43, 1e-3).unwrap();
    let mut absorbed = 0;
    for p in 0..batch.num_paths {
        let ys: Vec<f64> = (0..batch.num_times())
            .map(|k| if batch.state(p, k)[1] > 0.0 { a - c } else { a })
            .collect();
        assert!(ys.windows(2).all(|w| w[1] >= w[0]), "path {p}");
        absorbed += usize::from(*ys.last().unwrap() == a);
    }
    assert!(absorbed > 0);
}

#[test]
fn embedded_batch_prepends_one() {
    let model = sqrt_diffusion();
    let grid = uniform_grid(0.5, 0.1).unwrap();
    let batch = simulate(&model, 5, &grid, 2).unwrap();
    let e = batch.embedded();
    assert_eq!(e.dim, 2);
    for p in 0..5 {
        for k in 0..grid.len() {
            assert_eq!(e.state(p, k), Vector::from_vec(vec![1.0, batch.state(p, k)[0]]));
        }
    }
}
