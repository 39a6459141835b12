//! Semiclassical fixed point, linearized fluctuation dynamics and stability.
//!
//! Fluctuations are ordered as (δq, δp, δX_w, δY_w, δX_c, δY_c) with
//! quadratures X = (a + a†)/√2, Y = (a − a†)/(i√2).

use nalgebra::{Matrix6, Schur};
use num_complex::Complex64;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::model::{DerivedQuantities, DeviceParams};

/// How the detunings in [`DeviceParams`] are interpreted.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum DetuningMode {
    /// `delta_c`, `delta_w` are the effective detunings Δ_j (radiation
    /// pressure shift already included).
    #[default]
    Effective,
    /// `delta_c`, `delta_w` are the bare detunings Δ_0j; the effective ones
    /// are found self-consistently.
    Bare,
}

pub const FIXED_POINT_DAMPING: f64 = 0.5;
pub const FIXED_POINT_MAX_ITER: usize = 10_000;
pub const FIXED_POINT_REL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct SteadyState {
    /// Intracavity optical amplitude α_s (real, ≥ 0).
    pub alpha_s: f64,
    /// Intracavity microwave amplitude β_s (real, ≥ 0).
    pub beta_s: f64,
    /// Static mechanical displacement in zero-point units. p_s is zero.
    pub q_s: f64,
    pub delta_c_eff: f64,
    pub delta_w_eff: f64,
    /// Bare detunings Δ_0j = Δ_j + G_0j q_s.
    pub delta_c_bare: f64,
    pub delta_w_bare: f64,
    /// Many-photon couplings G_c = √2 G_0c α_s, G_w = √2 G_0w β_s.
    pub g_c: f64,
    pub g_w: f64,
    pub stable: bool,
    /// Fixed-point iterations used (0 in effective mode).
    pub iterations: usize,
}

fn cavity_population(drive: f64, kappa: f64, delta: f64) -> f64 {
    drive * drive / (kappa * kappa + delta * delta)
}

/// Solves the classical steady state and decides its stability.
pub fn solve_fixed_point(params: &DeviceParams, dq: &DerivedQuantities, mode: DetuningMode) -> Result<SteadyState> {
    let p = params.validated()?;
    let displacement = |alpha2: f64, beta2: f64| (dq.g0c * alpha2 + dq.g0w * beta2) / p.omega_m;

    let (delta_c, delta_w, q_s, iterations) = match mode {
        DetuningMode::Effective => {
            let alpha2 = cavity_population(dq.drive_c, p.kappa_c, p.delta_c);
            let beta2 = cavity_population(dq.drive_w, p.kappa_w, p.delta_w);
            (p.delta_c, p.delta_w, displacement(alpha2, beta2), 0)
        }
        DetuningMode::Bare => {
            let map = |q: f64| {
                let dc = p.delta_c - dq.g0c * q;
                let dw = p.delta_w - dq.g0w * q;
                displacement(cavity_population(dq.drive_c, p.kappa_c, dc), cavity_population(dq.drive_w, p.kappa_w, dw))
            };
            let (q, n) = damped_iteration(map)?;
            (p.delta_c - dq.g0c * q, p.delta_w - dq.g0w * q, q, n)
        }
    };

    let alpha_s = cavity_population(dq.drive_c, p.kappa_c, delta_c).sqrt();
    let beta_s = cavity_population(dq.drive_w, p.kappa_w, delta_w).sqrt();
    let mut ss = SteadyState {
        alpha_s,
        beta_s,
        q_s,
        delta_c_eff: delta_c,
        delta_w_eff: delta_w,
        delta_c_bare: delta_c + dq.g0c * q_s,
        delta_w_bare: delta_w + dq.g0w * q_s,
        g_c: std::f64::consts::SQRT_2 * dq.g0c * alpha_s,
        g_w: std::f64::consts::SQRT_2 * dq.g0w * beta_s,
        stable: false,
        iterations,
    };
    ss.stable = check_stability(&build_state_space(&p, dq, &ss))?.stable;
    Ok(ss)
}

fn damped_iteration(map: impl Fn(f64) -> f64) -> Result<(f64, usize)> {
    let mut q = 0.0_f64;
    let mut trace = Vec::new();
    let mut last_step = f64::INFINITY;
    for n in 1..=FIXED_POINT_MAX_ITER {
        let next = (1.0 - FIXED_POINT_DAMPING) * q + FIXED_POINT_DAMPING * map(q);
        trace.push(next);
        if !next.is_finite() {
            return Err(Error::Divergence { iteration: n, trace });
        }
        let step = (next - q).abs();
        last_step = if next == 0.0 { step } else { step / next.abs() };
        q = next;
        if step <= FIXED_POINT_REL_TOL * q.abs() || step == 0.0 {
            return Ok((q, n));
        }
    }
    Err(Error::NoConvergence { iterations: FIXED_POINT_MAX_ITER, last_step, trace })
}

/// Rates entering the linearized dynamics, all in rad/s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearRates {
    pub omega_m: f64,
    pub gamma_m: f64,
    pub delta_w: f64,
    pub delta_c: f64,
    pub kappa_w: f64,
    pub kappa_c: f64,
    pub g_w: f64,
    pub g_c: f64,
    pub n_th_mech: f64,
    pub n_th_w: f64,
    pub n_th_c: f64,
}

/// Linearized fluctuation dynamics u̇ = A u + n.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSpaceModel {
    /// Drift matrix A [rad/s].
    pub drift: Matrix6<f64>,
    /// D_ext = Diag[0, γ_m(2n̄_b+1), 2κ_w(2N_w+1), 2κ_w(2N_w+1), 2κ_c(2N_c+1), 2κ_c(2N_c+1)] [rad/s].
    pub diffusion: Matrix6<f64>,
    pub kappa_c: f64,
    pub kappa_w: f64,
    /// Frequency unit of the numerical kernels.
    pub omega_m: f64,
}

/// Row/column labels of every 6×6 matrix in this crate.
pub const ORDERING: [&str; 6] = ["dq", "dp", "dX_w", "dY_w", "dX_c", "dY_c"];

impl StateSpaceModel {
    pub fn from_rates(r: &LinearRates) -> Self {
        #[rustfmt::skip]
        let drift = Matrix6::new(
            0.0,        r.omega_m,  0.0,         0.0,         0.0,         0.0,
            -r.omega_m, -r.gamma_m, r.g_w,       0.0,         r.g_c,       0.0,
            0.0,        0.0,        -r.kappa_w,  r.delta_w,   0.0,         0.0,
            r.g_w,      0.0,        -r.delta_w,  -r.kappa_w,  0.0,         0.0,
            0.0,        0.0,        0.0,         0.0,         -r.kappa_c,  r.delta_c,
            r.g_c,      0.0,        0.0,         0.0,         -r.delta_c,  -r.kappa_c,
        );
        let dw = 2.0 * r.kappa_w * (2.0 * r.n_th_w + 1.0);
        let dc = 2.0 * r.kappa_c * (2.0 * r.n_th_c + 1.0);
        let diffusion =
            Matrix6::from_diagonal(&nalgebra::Vector6::new(0.0, r.gamma_m * (2.0 * r.n_th_mech + 1.0), dw, dw, dc, dc));
        StateSpaceModel { drift, diffusion, kappa_c: r.kappa_c, kappa_w: r.kappa_w, omega_m: r.omega_m }
    }

    /// Symmetrized noise correlation ½⟨{n_i(t), n_j(t')}⟩ = D_ij δ(t − t').
    ///
    /// Mechanics enters D_ext as-is; cavity inputs √(2κ)X_in carry
    /// κ(2N+1), half the D_ext entry.
    pub fn noise_correlation(&self) -> Matrix6<f64> {
        let mut d = self.diffusion;
        for k in 2..6 {
            d[(k, k)] *= 0.5;
        }
        d
    }

    /// Drift and noise correlation in units of ω_m.
    pub fn scaled(&self) -> (Matrix6<f64>, Matrix6<f64>) {
        (self.drift / self.omega_m, self.noise_correlation() / self.omega_m)
    }

    /// Structured text dump with matrix rows in fixed order.
    pub fn to_report(&self) -> String {
        let mut s = String::new();
        writeln!(s, "# state-space model, ordering = {}", ORDERING.join(",")).unwrap();
        writeln!(s, "omega_m = {:.12e}", self.omega_m).unwrap();
        writeln!(s, "kappa_c = {:.12e}", self.kappa_c).unwrap();
        writeln!(s, "kappa_w = {:.12e}", self.kappa_w).unwrap();
        write_matrix(&mut s, "drift", &self.drift);
        write_matrix(&mut s, "diffusion", &self.diffusion);
        s
    }
}

pub(crate) fn write_matrix(s: &mut String, name: &str, m: &Matrix6<f64>) {
    for i in 0..6 {
        let row: Vec<String> = (0..6).map(|j| format!("{:.12e}", m[(i, j)])).collect();
        writeln!(s, "{name}[{i}] = {}", row.join(", ")).unwrap();
    }
}

impl SteadyState {
    pub fn to_report(&self) -> String {
        let mut s = String::new();
        writeln!(s, "# steady state").unwrap();
        for (k, v) in [
            ("alpha_s", self.alpha_s),
            ("beta_s", self.beta_s),
            ("q_s", self.q_s),
            ("p_s", 0.0),
            ("delta_c_eff", self.delta_c_eff),
            ("delta_w_eff", self.delta_w_eff),
            ("delta_c_bare", self.delta_c_bare),
            ("delta_w_bare", self.delta_w_bare),
            ("g_c", self.g_c),
            ("g_w", self.g_w),
        ] {
            writeln!(s, "{k} = {v:.12e}").unwrap();
        }
        writeln!(s, "stable = {}", self.stable).unwrap();
        writeln!(s, "iterations = {}", self.iterations).unwrap();
        s
    }
}

/// Assembles the drift matrix and D_ext around the fixed point.
pub fn build_state_space(params: &DeviceParams, dq: &DerivedQuantities, ss: &SteadyState) -> StateSpaceModel {
    StateSpaceModel::from_rates(&LinearRates {
        omega_m: params.omega_m,
        gamma_m: params.gamma_m(),
        delta_w: ss.delta_w_eff,
        delta_c: ss.delta_c_eff,
        kappa_w: params.kappa_w,
        kappa_c: params.kappa_c,
        g_w: ss.g_w,
        g_c: ss.g_c,
        n_th_mech: dq.n_th_mech,
        n_th_w: dq.n_th_w,
        n_th_c: dq.n_th_c,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityVerdict {
    pub stable: bool,
    /// Largest real part of the drift spectrum [rad/s].
    pub abscissa: f64,
    /// Distance to instability, −abscissa [rad/s].
    pub margin: f64,
    /// Drift eigenvalues [rad/s], sorted by decreasing real part.
    pub eigenvalues: Vec<Complex64>,
}

/// Drift eigenvalues (rad/s) via a real Schur decomposition.
pub fn drift_eigenvalues(model: &StateSpaceModel) -> Result<Vec<Complex64>> {
    if model.drift.iter().any(|x| !x.is_finite()) {
        return Err(Error::EigenSolver("drift matrix has non-finite entries".into()));
    }
    let scaled = model.drift / model.omega_m;
    let schur = Schur::try_new(scaled, 1e-15, 10_000)
        .ok_or_else(|| Error::EigenSolver("Schur iteration did not converge".into()))?;
    let mut eig: Vec<Complex64> = schur.complex_eigenvalues().iter().map(|z| z * model.omega_m).collect();
    eig.sort_by(|a, b| b.re.total_cmp(&a.re));
    Ok(eig)
}

/// Stable iff every drift eigenvalue has negative real part.
pub fn check_stability(model: &StateSpaceModel) -> Result<StabilityVerdict> {
    let eigenvalues = drift_eigenvalues(model)?;
    let abscissa = eigenvalues[0].re;
    Ok(StabilityVerdict { stable: abscissa < 0.0, abscissa, margin: -abscissa, eigenvalues })
}

/// Spectral abscissa of the operating point after scaling both drive
/// powers by `scale`.
pub fn abscissa_at_power_scale(params: &DeviceParams, mode: DetuningMode, scale: f64) -> Result<f64> {
    let p = DeviceParams { power_c: params.power_c * scale, power_w: params.power_w * scale, ..*params };
    let dq = crate::model::derive_quantities(&p)?;
    let ss = solve_fixed_point(&p, &dq, mode)?;
    Ok(check_stability(&build_state_space(&p, &dq, &ss))?.abscissa)
}

/// Smallest common drive-power scale factor (≥ 1) at which the operating
/// point loses stability, searched up to `max_scale`. `None` if the point
/// is stable throughout. Bracketing by doubling, then bisection to 1e-9
/// relative.
pub fn instability_power_scale(params: &DeviceParams, mode: DetuningMode, max_scale: f64) -> Result<Option<f64>> {
    let unstable = |s: f64| abscissa_at_power_scale(params, mode, s).map(|a| a >= 0.0);
    if unstable(1.0)? {
        return Ok(Some(1.0));
    }
    let mut lo = 1.0;
    let mut hi = 2.0_f64.min(max_scale);
    loop {
        if unstable(hi)? {
            break;
        }
        if hi >= max_scale {
            return Ok(None);
        }
        lo = hi;
        hi = (2.0 * hi).min(max_scale);
    }
    while (hi - lo) > 1e-9 * hi {
        let mid = 0.5 * (lo + hi);
        if unstable(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Some(hi))
}
