use nalgebra::{DMatrix, Matrix6};
use oemlink::oracles::random_stable_params;
use oemlink::quadrature::AdaptiveGaussKronrod;
use oemlink::spectra::{intracavity_covariance_by_quadrature, output_covariance_with};
use oemlink::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn model_for(p: &DeviceParams) -> StateSpaceModel {
    let dq = derive_quantities(p).unwrap();
    let ss = solve_fixed_point(p, &dq, DetuningMode::Effective).unwrap();
    build_state_space(p, &dq, &ss)
}

fn window(eps: f64, center_c: f64, center_w: f64) -> OutputWindow {
    OutputWindow::from_epsilon(eps, DeviceParams::fig2_caption().omega_m, center_c, center_w).unwrap()
}

/// Largest entrywise relative difference |a − b|/|b|. Entries of `b` below
/// the quadrature zero floor (1e-12·max|b|, e.g. the exact ⟨δq δp⟩ = 0) are
/// skipped here and must instead agree to that floor in absolute terms.
fn max_rel_diff(a: &Matrix6<f64>, b: &Matrix6<f64>) -> f64 {
    let floor = 1e-12 * b.amax();
    let mut worst = 0.0_f64;
    for (x, y) in a.iter().zip(b.iter()) {
        if y.abs() >= floor {
            worst = worst.max((x - y).abs() / y.abs());
        } else {
            assert!((x - y).abs() <= floor, "structural zero off by {:e}", (x - y).abs());
        }
    }
    worst
}

#[test]
fn quadrature_matches_lyapunov_on_preset_and_random_draws() {
    let base = DeviceParams::fig2_caption();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut points = vec![base];
    points.extend((0..10).map(|_| random_stable_params(&mut rng, &base)));
    for p in &points {
        let m = model_for(p);
        let lyap = intracavity_covariance(&m).unwrap();
        let quad = intracavity_covariance_by_quadrature(&m, &AdaptiveGaussKronrod::default()).unwrap();
        let d = max_rel_diff(&quad.value, &lyap);
        assert!(d < 1e-6, "relative difference {d:e} at {p:?}");
    }
}

#[test]
fn output_cm_is_symmetric_and_physical() {
    let m = model_for(&DeviceParams::fig2_caption());
    for (eps, wc) in [(25.0, 1.0), (100.0, 1.0), (200.0, 0.9)] {
        let cm = output_covariance(&m, &window(eps, -1.0, wc)).unwrap();
        assert_eq!(cm.matrix, cm.matrix.transpose());
        let field = cm.field_block();
        let report = physicality_check(&DMatrix::from_column_slice(4, 4, field.as_slice()));
        assert!(report.is_physical(), "{report:?}");
        assert!(report.margin >= -1e-8);
    }
}

#[test]
fn epr_variances_are_sub_shot_noise_on_resonance() {
    let m = model_for(&DeviceParams::fig2_caption());
    let v = output_covariance(&m, &window(100.0, -1.0, 1.0)).unwrap().matrix;
    let (xw, yw, xc, yc) = (2, 3, 4, 5);
    // Var(X_c + X_w) and Var(Y_c − Y_w), shot noise 1.
    let plus = v[(xc, xc)] + v[(xw, xw)] + 2.0 * v[(xc, xw)];
    let minus = v[(yc, yc)] + v[(yw, yw)] - 2.0 * v[(yc, yw)];
    assert!(plus < 1.0, "{plus}");
    assert!(minus < 1.0, "{minus}");
    let pair = reduce_to_pair(&output_covariance(&m, &window(100.0, -1.0, 1.0)).unwrap(), ModeOrder::default());
    assert!(log_negativity(&pair).unwrap().log_neg > 0.0);
}

#[test]
fn cross_correlations_vanish_off_resonance() {
    let m = model_for(&DeviceParams::fig2_caption());
    let c_norm = |center_w: f64| {
        let cm = output_covariance(&m, &window(100.0, -1.0, center_w)).unwrap();
        reduce_to_pair(&cm, ModeOrder::default()).block_c.norm()
    };
    let on = c_norm(1.0);
    // Far outside both the filter bandwidth and every drift resonance.
    let off = c_norm(31.0);
    assert!(off / on < 1e-3, "{}", off / on);
}

#[test]
fn decoupled_calibration_for_narrow_and_wide_windows() {
    let p = DeviceParams { power_c: 0.0, power_w: 0.0, ..DeviceParams::fig2_caption() };
    let dq = derive_quantities(&p).unwrap();
    let m = model_for(&p);
    for eps in [25.0, 200.0] {
        for (oc, ow) in [(-1.0, 1.0), (0.3, -2.5), (0.0, 0.0)] {
            let v = output_covariance(&m, &window(eps, oc, ow)).unwrap().matrix;
            for k in [4, 5] {
                assert!((v[(k, k)] - 0.5).abs() < 1e-6);
            }
            for k in [2, 3] {
                assert!((v[(k, k)] - (dq.n_th_w + 0.5)).abs() < 1e-6);
            }
            assert!(v.fixed_view::<4, 4>(2, 2).iter().enumerate().all(|(i, x)| i % 5 == 0 || x.abs() < 1e-6));
        }
    }
}

#[test]
fn halving_tolerance_stays_within_error_estimate() {
    let m = model_for(&DeviceParams::fig2_caption());
    let w = window(100.0, -1.0, 1.0);
    let coarse = output_covariance_with(&m, &w, &AdaptiveGaussKronrod::with_rel_tol(1e-8)).unwrap();
    let fine = output_covariance_with(&m, &w, &AdaptiveGaussKronrod::with_rel_tol(5e-9)).unwrap();
    for i in 0..6 {
        for j in 0..6 {
            let diff = (coarse.matrix[(i, j)] - fine.matrix[(i, j)]).abs();
            let bound = coarse.error_estimate[(i, j)].max(coarse.error_estimate[(j, i)]);
            assert!(diff <= bound, "({i},{j}): {diff:e} > {bound:e}");
        }
    }
}

#[test]
fn mirrored_detunings_swap_cooling_and_amplification() {
    // Flipping both detunings turns the red-detuned microwave cooling into
    // blue-detuned amplification; with G_w > G_c that point is unstable.
    let p = DeviceParams::fig2_caption();
    let mirrored = DeviceParams { delta_c: -p.delta_c, delta_w: -p.delta_w, ..p };
    assert!(!check_stability(&model_for(&mirrored)).unwrap().stable);
    let w = window(50.0, 1.0, -1.0);
    assert!(matches!(output_covariance(&model_for(&mirrored), &w), Err(Error::NoStationaryState { .. })));
}

#[test]
fn exchanging_the_two_arms_preserves_entanglement() {
    // The drift and noise treat both cavities alike, so swapping every
    // cavity parameter and window centre only relabels the output pair.
    use oemlink::steadystate::LinearRates;
    let rates = LinearRates {
        omega_m: 1.0,
        gamma_m: 1e-5,
        delta_w: 1.0,
        delta_c: -0.97,
        kappa_w: 0.05,
        kappa_c: 0.03,
        g_w: 0.11,
        g_c: 0.06,
        n_th_mech: 12.0,
        n_th_w: 0.2,
        n_th_c: 0.0,
    };
    let swapped = LinearRates {
        delta_w: rates.delta_c,
        delta_c: rates.delta_w,
        kappa_w: rates.kappa_c,
        kappa_c: rates.kappa_w,
        g_w: rates.g_c,
        g_c: rates.g_w,
        n_th_w: rates.n_th_c,
        n_th_c: rates.n_th_w,
        ..rates
    };
    let (a, b) = (StateSpaceModel::from_rates(&rates), StateSpaceModel::from_rates(&swapped));
    for (oc, ow) in [(-1.0, 1.0), (-0.95, 1.01), (-1.1, 0.9)] {
        let wa = OutputWindow::new(50.0, oc, ow).unwrap();
        let wb = OutputWindow::new(50.0, ow, oc).unwrap();
        let ea = log_negativity(&reduce_to_pair(&output_covariance(&a, &wa).unwrap(), ModeOrder::default())).unwrap();
        let eb = log_negativity(&reduce_to_pair(&output_covariance(&b, &wb).unwrap(), ModeOrder::default())).unwrap();
        assert!((ea.log_neg - eb.log_neg).abs() < 1e-8, "{} vs {}", ea.log_neg, eb.log_neg);
        if oc == -1.0 {
            assert!(ea.log_neg > 0.0);
        }
    }
}
