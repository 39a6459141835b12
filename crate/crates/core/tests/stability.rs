use oemlink::oracles::{characteristic_polynomial, routh_hurwitz_stable};
use oemlink::steadystate::{abscissa_at_power_scale, instability_power_scale};
use oemlink::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn model_for(p: &DeviceParams) -> StateSpaceModel {
    let dq = derive_quantities(p).unwrap();
    let ss = solve_fixed_point(p, &dq, DetuningMode::Effective).unwrap();
    build_state_space(p, &dq, &ss)
}

fn routh_verdict(m: &StateSpaceModel) -> bool {
    let a = m.drift / m.omega_m;
    routh_hurwitz_stable(&characteristic_polynomial(&a))
}

#[test]
fn default_preset_stable_by_both_criteria() {
    let m = model_for(&DeviceParams::fig2_caption());
    let v = check_stability(&m).unwrap();
    assert!(v.stable);
    assert!(v.margin > 0.0);
    assert!(routh_verdict(&m));
}

#[test]
fn eigenvalue_and_routh_verdicts_agree_on_random_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let base = DeviceParams::fig2_caption();
    let (mut stable, mut unstable) = (0, 0);
    for _ in 0..200 {
        let p = DeviceParams {
            power_c: base.power_c * 10f64.powf(rng.random_range(-1.0..3.0)),
            power_w: base.power_w * 10f64.powf(rng.random_range(-1.0..1.0)),
            kappa_c: base.omega_m * rng.random_range(0.01..0.3),
            kappa_w: base.omega_m * rng.random_range(0.01..0.3),
            ..base
        };
        let m = model_for(&p);
        let v = check_stability(&m).unwrap();
        // Skip points too close to the boundary to call either way.
        if v.abscissa.abs() < 1e-9 * p.omega_m {
            continue;
        }
        assert_eq!(v.stable, routh_verdict(&m), "{p:?}");
        if v.stable {
            stable += 1;
        } else {
            unstable += 1;
        }
    }
    assert!(stable > 20 && unstable > 20, "{stable} stable, {unstable} unstable");
}

#[test]
fn power_threshold_matches_dense_scan() {
    let p = DeviceParams::fig2_caption();
    let bisected = instability_power_scale(&p, DetuningMode::Effective, 1e4).unwrap().unwrap();
    // Geometric scan with 0.2 % spacing.
    let mut s = 1.0_f64;
    let scanned = loop {
        if abscissa_at_power_scale(&p, DetuningMode::Effective, s).unwrap() >= 0.0 {
            break s;
        }
        s *= 1.002;
        assert!(s < 1e4, "scan found no instability");
    };
    assert!(((bisected - scanned) / scanned).abs() < 0.01, "{bisected} vs {scanned}");
    assert!(abscissa_at_power_scale(&p, DetuningMode::Effective, bisected * 0.999).unwrap() < 0.0);
}

#[test]
fn decoupled_stability_follows_damping_signs() {
    let base = DeviceParams { power_c: 0.0, power_w: 0.0, ..DeviceParams::fig2_caption() };
    let m = model_for(&base);
    assert!(check_stability(&m).unwrap().stable);
    // Flip the sign of one damping rate at a time (mechanics, microwave, optics).
    for diag in [&[1][..], &[2, 3], &[4, 5]] {
        let mut flipped = m.clone();
        for &k in diag {
            flipped.drift[(k, k)] = -flipped.drift[(k, k)];
        }
        assert!(!check_stability(&flipped).unwrap().stable, "{diag:?}");
        assert!(!routh_verdict(&flipped), "{diag:?}");
    }
}
