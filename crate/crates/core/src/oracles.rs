//! Independent reference computations used by the test suites.
//!
//! Nothing here is used by the production pipeline. Each routine follows a
//! different route to a quantity the library also computes, so agreement
//! between the two is evidence that both are right.

use nalgebra::{Matrix2, Matrix4, Matrix6};
use rand::Rng;
use std::f64::consts::PI;

use crate::gaussian::{BipartiteCM, Mode};
use crate::model::{derive_quantities, DeviceParams};
use crate::steadystate::{build_state_space, check_stability, solve_fixed_point, DetuningMode};

/// Cat-state teleportation fidelity by direct 2D quadrature of the
/// characteristic-function overlap
///
/// ```text
/// F = π⁻¹ ∫ d²η  φ_in(η)²  Φ_ch(−η*, η)
/// ```
///
/// with φ_in(η) = N² e^{−|η|²/2} {2 cos 2αη_I + 2e^{−2α²} cosh 2αη_R} and
/// Φ_ch(η_a, η_b) = exp(−ξᵀV′ξ), ξ = (η_a^I, −η_a^R, η_b^I, −η_b^R).
/// The sign flip on Alice's argument matches the X₊/Y₋ Bell measurement.
///
/// Composite trapezoid rule on a square; the integrand is entire and
/// Gaussian-bounded, so the rule converges geometrically in 1/h.
pub fn cat_fidelity_by_quadrature(pair: &BipartiteCM, alpha: f64, step: f64) -> f64 {
    let v = pair.assemble();
    let n2 = 1.0 / (2.0 + 2.0 * (-2.0 * alpha * alpha).exp());
    let half_width = 2.0 * alpha + 8.0;
    let n = (half_width / step).ceil() as i64;
    let cross = 2.0 * (-2.0 * alpha * alpha).exp();

    let mut sum = 0.0;
    for i in -n..=n {
        let er = i as f64 * step;
        for j in -n..=n {
            let ei = j as f64 * step;
            let phi = n2
                * (-(er * er + ei * ei) / 2.0).exp()
                * (2.0 * (2.0 * alpha * ei).cos() + cross * (2.0 * alpha * er).cosh());
            // η_a = −η*: (η_a^I, −η_a^R) = (η_I, η_R); η_b = η: (η_I, −η_R).
            let xi = nalgebra::Vector4::new(ei, er, ei, -er);
            let q = (xi.transpose() * v * xi)[(0, 0)];
            sum += phi * phi * (-q).exp();
        }
    }
    sum * step * step / PI
}

/// Coefficients c₀ … c_n of det(sI − A) = Σ c_k s^{n−k}, c₀ = 1, by the
/// Faddeev–LeVerrier recursion.
pub fn characteristic_polynomial(a: &Matrix6<f64>) -> [f64; 7] {
    let mut c = [0.0; 7];
    c[0] = 1.0;
    let mut m = Matrix6::<f64>::zeros();
    for k in 1..=6 {
        m = a * m + Matrix6::identity() * c[k - 1];
        c[k] = -(a * m).trace() / k as f64;
    }
    c
}

/// Routh–Hurwitz test: every root of the polynomial lies in the open left
/// half-plane iff the first column of the Routh array is strictly positive.
/// Singular arrays (a zero pivot) are reported as not stable.
pub fn routh_hurwitz_stable(coeffs: &[f64]) -> bool {
    if coeffs.iter().any(|c| !c.is_finite()) || coeffs[0] <= 0.0 {
        return false;
    }
    let width = coeffs.len().div_ceil(2);
    let mut prev: Vec<f64> = coeffs.iter().step_by(2).copied().collect();
    let mut cur: Vec<f64> = coeffs.iter().skip(1).step_by(2).copied().collect();
    prev.resize(width, 0.0);
    cur.resize(width, 0.0);
    for _ in 0..coeffs.len() - 1 {
        if cur[0] <= 0.0 {
            return false;
        }
        let mut next = vec![0.0; width];
        for k in 0..width - 1 {
            next[k] = (cur[0] * prev[k + 1] - prev[0] * cur[k + 1]) / cur[0];
        }
        prev = cur;
        cur = next;
    }
    true
}

fn rotation(theta: f64) -> Matrix2<f64> {
    let (s, c) = theta.sin_cos();
    Matrix2::new(c, -s, s, c)
}

/// Random single-mode symplectic map: rotation · squeeze · rotation.
pub fn random_local_symplectic<R: Rng + ?Sized>(rng: &mut R, max_squeeze: f64) -> Matrix2<f64> {
    let r = rng.random_range(-max_squeeze..=max_squeeze);
    let sq = Matrix2::new(r.exp(), 0.0, 0.0, (-r).exp());
    rotation(rng.random_range(0.0..2.0 * PI)) * sq * rotation(rng.random_range(0.0..2.0 * PI))
}

/// Two-mode squeezer with C-block orientation Diag(1, −1) for r > 0.
pub fn two_mode_squeezer(r: f64) -> Matrix4<f64> {
    let (c, s) = (r.cosh(), r.sinh());
    let z = Matrix2::new(s, 0.0, 0.0, -s);
    let mut m = Matrix4::identity() * c;
    m.fixed_view_mut::<2, 2>(0, 2).copy_from(&z);
    m.fixed_view_mut::<2, 2>(2, 0).copy_from(&z);
    m
}

/// Random physical two-mode CM S (ν₁I ⊕ ν₂I) Sᵀ with thermal symplectic
/// eigenvalues ν_k ∈ [1/2, 1/2 + max_thermal] and S a product of local
/// symplectic maps and a two-mode squeezer of either sign.
pub fn random_physical_pair<R: Rng + ?Sized>(rng: &mut R, max_squeeze: f64, max_thermal: f64) -> BipartiteCM {
    let nu1 = 0.5 + rng.random_range(0.0..=max_thermal);
    let nu2 = 0.5 + rng.random_range(0.0..=max_thermal);
    let thermal = Matrix4::from_diagonal(&nalgebra::Vector4::new(nu1, nu1, nu2, nu2));
    let local = |rng: &mut R| {
        let mut m = Matrix4::zeros();
        m.fixed_view_mut::<2, 2>(0, 0).copy_from(&random_local_symplectic(rng, max_squeeze));
        m.fixed_view_mut::<2, 2>(2, 2).copy_from(&random_local_symplectic(rng, max_squeeze));
        m
    };
    let tms = two_mode_squeezer(rng.random_range(-max_squeeze..=max_squeeze));
    let s = local(rng) * tms * local(rng);
    let v = s * thermal * s.transpose();
    BipartiteCM::from_matrix(&((v + v.transpose()) * 0.5), Mode::Optical)
}

/// Random perturbation of `base` (drive powers, linewidths, temperature,
/// mechanical Q, detunings) redrawn until the operating point is stable.
pub fn random_stable_params<R: Rng + ?Sized>(rng: &mut R, base: &DeviceParams) -> DeviceParams {
    loop {
        let wm = base.omega_m;
        let p = DeviceParams {
            power_c: base.power_c * rng.random_range(0.2..3.0),
            power_w: base.power_w * rng.random_range(0.2..3.0),
            kappa_c: wm * rng.random_range(0.02..0.2),
            kappa_w: wm * rng.random_range(0.02..0.2),
            temperature: rng.random_range(0.005..0.05),
            q_factor: 10f64.powf(rng.random_range(4.0..6.0)),
            delta_c: -wm * rng.random_range(0.8..1.2),
            delta_w: wm * rng.random_range(0.8..1.2),
            ..*base
        };
        let Ok(dq) = derive_quantities(&p) else { continue };
        let Ok(ss) = solve_fixed_point(&p, &dq, DetuningMode::Effective) else { continue };
        let model = build_state_space(&p, &dq, &ss);
        if check_stability(&model).is_ok_and(|v| v.margin > 1e-4 * wm) {
            return p;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::teleport::{fidelity_cat, CatState};

    #[test]
    fn quadrature_vacuum_channel() {
        let vac =
            BipartiteCM::new(Matrix2::identity() * 0.5, Matrix2::identity() * 0.5, Matrix2::zeros(), Mode::Optical);
        assert!((cat_fidelity_by_quadrature(&vac, 0.0, 0.05) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn closed_form_against_quadrature_tmsv() {
        let c = 1f64.cosh() / 2.0;
        let s = 1f64.sinh() / 2.0;
        let pair = BipartiteCM::new(
            Matrix2::identity() * c,
            Matrix2::identity() * c,
            Matrix2::new(-s, 0.0, 0.0, s),
            Mode::Optical,
        );
        for alpha in [0.3, 1.0, 2.0] {
            let exact = fidelity_cat(&pair, &CatState::new(alpha).unwrap()).unwrap().fidelity;
            let quad = cat_fidelity_by_quadrature(&pair, alpha, 0.05);
            assert!((exact - quad).abs() < 1e-10, "{alpha}: {exact} vs {quad}");
        }
    }

    #[test]
    fn routh_table_on_known_polynomials() {
        // (s+1)(s+2)(s+3)
        assert!(routh_hurwitz_stable(&[1.0, 6.0, 11.0, 6.0]));
        // (s−1)(s+2)(s+3)
        assert!(!routh_hurwitz_stable(&[1.0, 4.0, 1.0, -6.0]));
        // s² + 1: marginal
        assert!(!routh_hurwitz_stable(&[1.0, 0.0, 1.0]));
    }

    #[test]
    fn leverrier_on_diagonal() {
        let a = Matrix6::from_diagonal(&nalgebra::Vector6::new(-1.0, -1.0, -1.0, -1.0, -1.0, -1.0));
        let c = characteristic_polynomial(&a);
        let binom = [1.0, 6.0, 15.0, 20.0, 15.0, 6.0, 1.0];
        for k in 0..7 {
            assert!((c[k] - binom[k]).abs() < 1e-12);
        }
    }
}
