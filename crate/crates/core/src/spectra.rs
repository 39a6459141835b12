//! Filtered cavity output modes and their stationary covariance matrix.
//!
//! With u̇ = A u + n and the Fourier convention u(t) = ∫dω/2π e^{−iωt} u(ω),
//! the fluctuations are u(ω) = −M(ω) n(ω), M(ω) = (iω + A)⁻¹. The cavity
//! outputs a_out = √(2κ) δa − a_in then read
//!
//! ```text
//! u_out(ω) = −T(ω) (M(ω) + P_out) n(ω),   P_out = Diag[0, 0, 1/2κ_w, 1/2κ_w, 1/2κ_c, 1/2κ_c]
//! ```
//!
//! where T(ω) is the identity on the mechanical rows and, on each cavity
//! 2×2 block, √(2κ_j)·[[G_R, −G_I], [G_I, G_R]] with G_R, G_I the transforms
//! of Re g_j(t), Im g_j(t). The stationary covariance is
//! V = ∫dω/2π H D H†, H = T(M + P_out), D the noise correlation.
//! Conjugate symmetry H(−ω) = H(ω)* folds it onto ω ≥ 0.
//!
//! All kernels work in units of ω_m.

use nalgebra::{DMatrix, DVector, Matrix2, Matrix6};
use num_complex::Complex64;
use std::f64::consts::PI;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::quadrature::{AdaptiveGaussKronrod, Integral};
use crate::steadystate::{check_stability, drift_eigenvalues, write_matrix, StateSpaceModel, ORDERING};

type CMatrix6 = Matrix6<Complex64>;

/// Bandwidth and central frequencies of the two measured output modes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutputWindow {
    /// Filter time constant τ [s]; 1/τ is the mode bandwidth.
    pub tau: f64,
    /// Optical central frequency Ω_c [rad/s], relative to the drive.
    pub omega_center_c: f64,
    /// Microwave central frequency Ω_w [rad/s], relative to the drive.
    pub omega_center_w: f64,
}

impl OutputWindow {
    pub fn new(tau: f64, omega_center_c: f64, omega_center_w: f64) -> Result<Self> {
        if !(tau.is_finite() && tau > 0.0) {
            return Err(Error::InvalidParameter { field: "tau", reason: "must be finite and > 0".into() });
        }
        for (field, v) in [("omega_center_c", omega_center_c), ("omega_center_w", omega_center_w)] {
            if !v.is_finite() {
                return Err(Error::InvalidParameter { field, reason: "must be finite".into() });
            }
        }
        Ok(OutputWindow { tau, omega_center_c, omega_center_w })
    }

    /// Window from ε = τω_m and central frequencies in units of ω_m.
    pub fn from_epsilon(epsilon: f64, omega_m: f64, center_c: f64, center_w: f64) -> Result<Self> {
        Self::new(epsilon / omega_m, center_c * omega_m, center_w * omega_m)
    }

    /// ε = τ ω_m.
    pub fn epsilon(&self, omega_m: f64) -> f64 {
        self.tau * omega_m
    }
}

/// Fourier transform ∫dt e^{iωt} g(t) of g(t) = √(2/τ) θ(t) e^{−(1/τ + iΩ)t}:
/// √(2/τ) / (1/τ − i(ω − Ω)).
///
/// Normalized so that ∫|g̃|² dω/2π = ∫|g|² dt = 1. Any consistent unit for
/// ω, Ω and 1/τ may be used.
pub fn filter_transfer(omega: f64, tau: f64, omega_center: f64) -> Complex64 {
    let rate = 1.0 / tau;
    Complex64::new((2.0 * rate).sqrt(), 0.0) / Complex64::new(rate, -(omega - omega_center))
}

/// Stationary covariance of (δq, δp, X_w^out, Y_w^out, X_c^out, Y_c^out).
#[derive(Debug, Clone, PartialEq)]
pub struct OutputCM {
    /// Symmetrized V^out.
    pub matrix: Matrix6<f64>,
    /// Entrywise quadrature error estimate.
    pub error_estimate: Matrix6<f64>,
    /// Split point Λ [rad/s] between the adaptive finite range and the
    /// mapped tail.
    pub cutoff: f64,
    pub rel_tol: f64,
    pub evaluations: usize,
}

impl OutputCM {
    /// The 4×4 electromagnetic block (X_w, Y_w, X_c, Y_c).
    pub fn field_block(&self) -> nalgebra::Matrix4<f64> {
        self.matrix.fixed_view::<4, 4>(2, 2).into_owned()
    }

    /// Comma-separated dump with a `#` metadata header.
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        writeln!(s, "# output covariance matrix").unwrap();
        writeln!(s, "# ordering = {}", ["dq", "dp", "X_w", "Y_w", "X_c", "Y_c"].join(";")).unwrap();
        writeln!(s, "# cutoff_rad_s = {:.12e}", self.cutoff).unwrap();
        writeln!(s, "# rel_tol = {:.3e}", self.rel_tol).unwrap();
        writeln!(s, "# max_error_estimate = {:.6e}", self.error_estimate.amax()).unwrap();
        for i in 0..6 {
            let row: Vec<String> = (0..6).map(|j| format!("{:.12e}", self.matrix[(i, j)])).collect();
            writeln!(s, "{}", row.join(",")).unwrap();
        }
        s
    }
}

fn symmetrize(m: &Matrix6<f64>) -> Matrix6<f64> {
    (m + m.transpose()) * 0.5
}

/// Breakpoints (units of ω_m) around every resonance the integrand can
/// have: drift eigenfrequencies and filter centres.
fn breakpoints(resonances: &[(f64, f64)], cutoff: f64) -> Vec<f64> {
    let mut pts = vec![0.0, cutoff];
    for &(center, width) in resonances {
        let c = center.abs();
        let w = width.abs().max(1e-9);
        for k in [0.0, 1.0, 5.0, 25.0] {
            for x in [c - k * w, c + k * w] {
                if x > 0.0 && x < cutoff {
                    pts.push(x);
                }
            }
        }
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    pts
}

struct ScaledModel {
    drift: Matrix6<f64>,
    noise: Matrix6<f64>,
    resonances: Vec<(f64, f64)>,
    cutoff: f64,
}

fn prepare(model: &StateSpaceModel) -> Result<ScaledModel> {
    let verdict = check_stability(model)?;
    if !verdict.stable {
        return Err(Error::NoStationaryState { abscissa: verdict.abscissa });
    }
    let (drift, noise) = model.scaled();
    let resonances: Vec<(f64, f64)> =
        drift_eigenvalues(model)?.iter().map(|z| (z.im / model.omega_m, z.re / model.omega_m)).collect();
    let peak = resonances.iter().map(|r| r.0.abs()).fold(1.0, f64::max);
    let detuning = drift[(2, 3)].abs().max(drift[(4, 5)].abs());
    Ok(ScaledModel { drift, noise, resonances, cutoff: 40.0 * peak.max(detuning) })
}

fn susceptibility(drift: &Matrix6<f64>, omega: f64) -> CMatrix6 {
    let m = drift.map(|x| Complex64::new(x, 0.0)) + CMatrix6::identity() * Complex64::new(0.0, omega);
    m.try_inverse().unwrap_or_else(|| CMatrix6::from_element(Complex64::new(f64::NAN, 0.0)))
}

/// Re(H D H†)/π for diagonal D.
fn folded_spectral_density(h: &CMatrix6, noise: &Matrix6<f64>) -> Matrix6<f64> {
    let mut out = Matrix6::zeros();
    for k in 0..6 {
        let d = noise[(k, k)];
        if d == 0.0 {
            continue;
        }
        let col = h.column(k);
        for i in 0..6 {
            for j in i..6 {
                let v = (col[i] * col[j].conj()).re * d / PI;
                out[(i, j)] += v;
                if i != j {
                    out[(j, i)] += v;
                }
            }
        }
    }
    out
}

fn filter_block(omega: f64, tau: f64, center: f64, kappa: f64) -> Matrix2<Complex64> {
    let g_plus = filter_transfer(omega, tau, center);
    let g_minus = filter_transfer(-omega, tau, center).conj();
    let re = (g_plus + g_minus) * 0.5;
    let im = (g_plus - g_minus) / Complex64::new(0.0, 2.0);
    Matrix2::new(re, -im, im, re) * Complex64::new((2.0 * kappa).sqrt(), 0.0)
}

/// Stationary covariance of the filtered output modes.
pub fn output_covariance(model: &StateSpaceModel, window: &OutputWindow) -> Result<OutputCM> {
    output_covariance_with(model, window, &AdaptiveGaussKronrod::default())
}

pub fn output_covariance_with(
    model: &StateSpaceModel,
    window: &OutputWindow,
    quad: &AdaptiveGaussKronrod,
) -> Result<OutputCM> {
    let w = OutputWindow::new(window.tau, window.omega_center_c, window.omega_center_w)?;
    let sm = prepare(model)?;
    let wm = model.omega_m;
    let tau = w.tau * wm;
    let (center_c, center_w) = (w.omega_center_c / wm, w.omega_center_w / wm);
    let (kappa_c, kappa_w) = (model.kappa_c / wm, model.kappa_w / wm);

    let mut p_out = Matrix6::<Complex64>::zeros();
    for (k, kappa) in [(2, kappa_w), (3, kappa_w), (4, kappa_c), (5, kappa_c)] {
        p_out[(k, k)] = Complex64::new(0.5 / kappa, 0.0);
    }

    let mut resonances = sm.resonances.clone();
    resonances.push((center_c, 1.0 / tau));
    resonances.push((center_w, 1.0 / tau));
    let cutoff = sm.cutoff.max(40.0 * center_c.abs().max(center_w.abs()));
    let points = breakpoints(&resonances, cutoff);

    let integrand = |omega: f64| {
        let mut t = CMatrix6::identity();
        t.fixed_view_mut::<2, 2>(2, 2).copy_from(&filter_block(omega, tau, center_w, kappa_w));
        t.fixed_view_mut::<2, 2>(4, 4).copy_from(&filter_block(omega, tau, center_c, kappa_c));
        let h = t * (susceptibility(&sm.drift, omega) + p_out);
        folded_spectral_density(&h, &sm.noise)
    };
    let Integral { value, error, evaluations, .. } = quad.integrate(integrand, &points, Some(cutoff))?;
    Ok(OutputCM {
        matrix: symmetrize(&value),
        error_estimate: error,
        cutoff: cutoff * wm,
        rel_tol: quad.rel_tol,
        evaluations,
    })
}

/// Intracavity covariance from the frequency integral
/// V = ∫dω/2π M(ω) D M(ω)†. Cross-check for [`intracavity_covariance`].
pub fn intracavity_covariance_by_quadrature(
    model: &StateSpaceModel,
    quad: &AdaptiveGaussKronrod,
) -> Result<Integral<6, 6>> {
    let sm = prepare(model)?;
    let points = breakpoints(&sm.resonances, sm.cutoff);
    let integrand = |omega: f64| folded_spectral_density(&susceptibility(&sm.drift, omega), &sm.noise);
    let mut r = quad.integrate(integrand, &points, Some(sm.cutoff))?;
    r.value = symmetrize(&r.value);
    Ok(r)
}

/// Intracavity covariance from the Lyapunov equation A V + V Aᵀ = −D, with
/// D the symmetrized noise correlation (vacuum variance 1/2).
pub fn intracavity_covariance(model: &StateSpaceModel) -> Result<Matrix6<f64>> {
    let verdict = check_stability(model)?;
    if !verdict.stable {
        return Err(Error::SingularLyapunov);
    }
    let (a, d) = model.scaled();
    solve_lyapunov(&a, &d).map(|v| symmetrize(&v))
}

/// Solves A X + X Aᵀ = −Q by vectorization, (I⊗A + A⊗I) vec X = −vec Q.
pub fn solve_lyapunov(a: &Matrix6<f64>, q: &Matrix6<f64>) -> Result<Matrix6<f64>> {
    const N: usize = 6;
    let mut k = DMatrix::<f64>::zeros(N * N, N * N);
    // vec is column-major: index (i, j) -> i + N j.
    for j in 0..N {
        for i in 0..N {
            let row = i + N * j;
            for l in 0..N {
                k[(row, l + N * j)] += a[(i, l)];
                k[(row, i + N * l)] += a[(j, l)];
            }
        }
    }
    let rhs = DVector::from_iterator(N * N, q.iter().map(|x| -x));
    let lu = k.lu();
    let sol = lu.solve(&rhs).ok_or(Error::SingularLyapunov)?;
    if sol.iter().any(|x| !x.is_finite()) {
        return Err(Error::SingularLyapunov);
    }
    Ok(Matrix6::from_iterator(sol.iter().copied()))
}

/// Fixed-order text dump of a 6×6 covariance.
pub fn covariance_report(name: &str, m: &Matrix6<f64>) -> String {
    let mut s = format!("# {name}, ordering = {}\n", ORDERING.join(","));
    write_matrix(&mut s, name, m);
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::steadystate::LinearRates;

    fn decoupled(n_mech: f64, n_w: f64) -> StateSpaceModel {
        StateSpaceModel::from_rates(&LinearRates {
            omega_m: 1.0,
            gamma_m: 1e-3,
            delta_w: 1.0,
            delta_c: -1.0,
            kappa_w: 0.04,
            kappa_c: 0.04,
            g_w: 0.0,
            g_c: 0.0,
            n_th_mech: n_mech,
            n_th_w: n_w,
            n_th_c: 0.0,
        })
    }

    #[test]
    fn filter_peak_and_half_power_points() {
        let (tau, center) = (50.0, 1.0);
        let peak = filter_transfer(center, tau, center).norm();
        assert!((peak - (2.0 * tau).sqrt()).abs() < 1e-12);
        for x in [center - 1.0 / tau, center + 1.0 / tau] {
            let r = filter_transfer(x, tau, center).norm() / peak;
            assert!((r - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-14);
        }
        for x in [0.0, 0.99, 1.01, 3.0] {
            assert!(filter_transfer(x, tau, center).norm() < peak);
        }
    }

    #[test]
    fn filter_vanishes_for_infinitely_narrow_band() {
        let mut prev = f64::INFINITY;
        for tau in [1e2, 1e4, 1e6, 1e8, 1e10] {
            let g = filter_transfer(0.7, tau, 1.0).norm();
            assert!(g < prev);
            prev = g;
        }
        assert!(prev < 1e-4);
    }

    #[test]
    fn filter_is_normalized() {
        // Parseval: ∫|g̃|² dω/2π = 1.
        let (tau, center) = (25.0, -1.0);
        let quad = AdaptiveGaussKronrod::with_rel_tol(1e-12);
        let total = quad
            .integrate(
                |w| nalgebra::Matrix1::new(filter_transfer(w, tau, center).norm_sqr() / (2.0 * PI)),
                &[-40.0, -1.0 - 1.0 / tau, -1.0, -1.0 + 1.0 / tau, 0.0, 40.0],
                None,
            )
            .unwrap()
            .value[0]
            + {
                // Both tails beyond ±40 in closed form: (1/π) · atan tail of (2/τ)/(1/τ² + x²).
                let tail = |x: f64| (1.0 / PI) * (PI / 2.0 - (x * tau).atan());
                tail(41.0) + tail(39.0)
            };
        assert!((total - 1.0).abs() < 1e-8, "{total}");
    }

    #[test]
    fn decoupled_intracavity_ground_state() {
        let v = intracavity_covariance(&decoupled(0.0, 0.0)).unwrap();
        for i in 0..6 {
            assert!((v[(i, i)] - 0.5).abs() < 1e-12, "{i}: {}", v[(i, i)]);
        }
        assert!((v - Matrix6::from_diagonal_element(0.5)).amax() < 1e-12);
    }

    #[test]
    fn intracavity_is_linear_in_diffusion() {
        let m = decoupled(3.0, 0.2);
        let mut scaled = m.clone();
        scaled.diffusion *= 4.0;
        let v = intracavity_covariance(&m).unwrap();
        let v4 = intracavity_covariance(&scaled).unwrap();
        assert!((v4 - v * 4.0).amax() < 1e-12 * v.amax());
    }

    #[test]
    fn marginal_drift_is_singular() {
        let mut m = decoupled(0.0, 0.0);
        m.drift[(1, 1)] = 0.0;
        assert_eq!(intracavity_covariance(&m), Err(Error::SingularLyapunov));
    }

    #[test]
    fn unstable_model_has_no_stationary_output() {
        let mut m = decoupled(0.0, 0.0);
        m.drift[(1, 1)] = 1e-3;
        let w = OutputWindow::new(25.0, -1.0, 1.0).unwrap();
        assert!(matches!(output_covariance(&m, &w), Err(Error::NoStationaryState { .. })));
    }

    #[test]
    fn decoupled_outputs_carry_input_noise() {
        let n_w = 0.3;
        let m = decoupled(5.0, n_w);
        let w = OutputWindow::new(50.0, -1.0, 1.0).unwrap();
        let cm = output_covariance(&m, &w).unwrap();
        let v = cm.matrix;
        assert!((v.fixed_view::<2, 2>(4, 4) - Matrix2::identity() * 0.5).amax() < 1e-6);
        assert!((v.fixed_view::<2, 2>(2, 2) - Matrix2::identity() * (n_w + 0.5)).amax() < 1e-6);
        assert!(v.fixed_view::<2, 2>(2, 4).amax() < 1e-9);
    }

    #[test]
    fn window_validation() {
        assert!(OutputWindow::new(0.0, 1.0, 1.0).is_err());
        assert!(OutputWindow::new(1.0, f64::NAN, 1.0).is_err());
        let w = OutputWindow::from_epsilon(100.0, 2.0, -1.0, 1.0).unwrap();
        assert_eq!(w.epsilon(2.0), 100.0);
        assert_eq!(w.omega_center_c, -2.0);
    }

    #[test]
    fn csv_dump_layout() {
        let m = decoupled(0.0, 0.0);
        let w = OutputWindow::new(25.0, -1.0, 1.0).unwrap();
        let csv = output_covariance(&m, &w).unwrap().to_csv();
        let data: Vec<_> = csv.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(data.len(), 6);
        assert!(data.iter().all(|l| l.split(',').count() == 6));
        assert!(csv.contains("# cutoff_rad_s = "));
    }
}
