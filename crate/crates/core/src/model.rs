//! Device parameters and the single-photon quantities derived from them.
//!
//! Everything here is stored in SI units (angular frequencies in rad/s).
//! Numerical kernels downstream rescale by the mechanical frequency.

use serde::{Deserialize, Serialize};

use crate::constants::{C_LIGHT, HBAR, K_B, TWO_PI};
use crate::error::{Error, Result};

/// Physical knobs of the opto-electro-mechanical device.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeviceParams {
    /// Mechanical angular frequency ω_m [rad/s].
    pub omega_m: f64,
    /// Mechanical quality factor ω_m/γ_m.
    pub q_factor: f64,
    /// Microwave cavity angular frequency ω_w [rad/s].
    pub omega_w: f64,
    /// Microwave amplitude decay rate κ_w [rad/s].
    pub kappa_w: f64,
    /// Microwave drive power [W].
    pub power_w: f64,
    /// Effective mechanical mass [kg].
    pub mass: f64,
    /// Bath temperature [K].
    pub temperature: f64,
    /// Capacitor gap d [m].
    pub gap_d: f64,
    /// Capacitance participation ratio C₀/C_Σ.
    pub mu: f64,
    /// Optical cavity length [m].
    pub cavity_length: f64,
    /// Optical amplitude decay rate κ_c [rad/s].
    pub kappa_c: f64,
    /// Optical drive wavelength [m].
    pub lambda_drive: f64,
    /// Optical drive power [W].
    pub power_c: f64,
    /// Optical detuning Δ_c [rad/s].
    pub delta_c: f64,
    /// Microwave detuning Δ_w [rad/s].
    pub delta_w: f64,
}

impl DeviceParams {
    /// The parameter set of the entanglement figure: a drum-head
    /// electromechanical circuit with an optically coated capacitor plate.
    pub fn fig2_caption() -> Self {
        let omega_m = TWO_PI * 10.0e6;
        DeviceParams {
            omega_m,
            q_factor: 1.5e5,
            omega_w: TWO_PI * 10.0e9,
            kappa_w: 0.04 * omega_m,
            power_w: 42.0e-3,
            mass: 10.0e-12,
            temperature: 15.0e-3,
            gap_d: 100.0e-9,
            mu: 0.013,
            cavity_length: 1.0e-3,
            kappa_c: 0.04 * omega_m,
            lambda_drive: 810.0e-9,
            power_c: 3.4e-3,
            delta_c: -omega_m,
            delta_w: omega_m,
        }
    }

    /// Mechanical damping rate γ_m = ω_m / Q.
    pub fn gamma_m(&self) -> f64 {
        self.omega_m / self.q_factor
    }

    /// Optical cavity angular frequency ω_c = 2πc/λ.
    pub fn omega_c(&self) -> f64 {
        TWO_PI * C_LIGHT / self.lambda_drive
    }

    /// Mechanical zero-point length √(ħ/(m ω_m)).
    pub fn zero_point_length(&self) -> f64 {
        (HBAR / (self.mass * self.omega_m)).sqrt()
    }

    /// Checks the hard invariants and returns the first violation as an error.
    pub fn validated(self) -> Result<Self> {
        match validate_params(&self).violations.into_iter().next() {
            None => Ok(self),
            Some(v) => Err(Error::InvalidParameter { field: v.field, reason: v.message }),
        }
    }
}

impl Default for DeviceParams {
    fn default() -> Self {
        Self::fig2_caption()
    }
}

/// Quantities derived from [`DeviceParams`], in SI units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedQuantities {
    /// Optical single-photon coupling G₀c [rad/s].
    pub g0c: f64,
    /// Microwave single-photon coupling G₀w [rad/s].
    pub g0w: f64,
    /// Optical drive amplitude E_c [√photons/s].
    pub drive_c: f64,
    /// Microwave drive amplitude E_w [√photons/s].
    pub drive_w: f64,
    /// Optical cavity angular frequency [rad/s].
    pub omega_c: f64,
    /// Mechanical thermal occupation n̄_b.
    pub n_th_mech: f64,
    /// Microwave thermal occupation N(ω_w).
    pub n_th_w: f64,
    /// Optical thermal occupation N(ω_c).
    pub n_th_c: f64,
}

/// Bose–Einstein occupation 1/(exp(ħω/k_B T) − 1). Exactly zero at T = 0.
pub fn bose_occupation(omega: f64, temperature: f64) -> f64 {
    if temperature <= 0.0 {
        return 0.0;
    }
    let x = HBAR * omega / (K_B * temperature);
    // exp_m1 overflows to +inf for large x, giving exactly 0.
    1.0 / x.exp_m1()
}

/// Single-photon couplings, drive amplitudes and thermal occupations.
///
/// The microwave drive amplitude mirrors the optical one,
/// E_w = √(2 P_w κ_w / ħω_w). The drive frequencies ω_0j are approximated
/// by the cavity frequencies ω_j.
pub fn derive_quantities(params: &DeviceParams) -> Result<DerivedQuantities> {
    let p = params.validated()?;
    let omega_c = p.omega_c();
    let x_zpf = p.zero_point_length();
    let g0c = omega_c / p.cavity_length * x_zpf;
    let g0w = p.mu * p.omega_w / (2.0 * p.gap_d) * x_zpf;
    let drive_c = (2.0 * p.power_c * p.kappa_c / (HBAR * omega_c)).sqrt();
    let drive_w = (2.0 * p.power_w * p.kappa_w / (HBAR * p.omega_w)).sqrt();
    Ok(DerivedQuantities {
        g0c,
        g0w,
        drive_c,
        drive_w,
        omega_c,
        n_th_mech: bose_occupation(p.omega_m, p.temperature),
        n_th_w: bose_occupation(p.omega_w, p.temperature),
        n_th_c: bose_occupation(omega_c, p.temperature),
    })
}

/// A violated hard invariant.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub field: &'static str,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    /// Soft warnings: the point is computable but outside the regime the
    /// linearized resolved-sideband model is meant for.
    pub advisories: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

pub const RESOLVED_SIDEBAND_ADVISORY: &str = "resolved-sideband assumption violated";

/// Lists every violated invariant. Never fails.
pub fn validate_params(params: &DeviceParams) -> ValidationReport {
    let mut report = ValidationReport::default();
    let mut check = |field: &'static str, ok: bool, message: &str| {
        if !ok {
            report.violations.push(Violation { field, message: message.to_string() });
        }
    };

    let positive = |x: f64| x.is_finite() && x > 0.0;
    let non_negative = |x: f64| x.is_finite() && x >= 0.0;

    check("omega_m", positive(params.omega_m), "must be finite and > 0");
    check("q_factor", positive(params.q_factor), "must be finite and > 0");
    check("omega_w", positive(params.omega_w), "must be finite and > 0");
    check("kappa_w", positive(params.kappa_w), "must be finite and > 0");
    check("power_w", non_negative(params.power_w), "must be finite and >= 0");
    check("mass", positive(params.mass), "must be finite and > 0");
    check("temperature", non_negative(params.temperature), "must be finite and >= 0");
    check("gap_d", positive(params.gap_d), "must be finite and > 0");
    check("mu", params.mu.is_finite() && params.mu > 0.0 && params.mu < 1.0, "must lie in (0, 1)");
    check("cavity_length", positive(params.cavity_length), "must be finite and > 0");
    check("kappa_c", positive(params.kappa_c), "must be finite and > 0");
    check("lambda_drive", positive(params.lambda_drive), "must be finite and > 0");
    check("power_c", non_negative(params.power_c), "must be finite and >= 0");
    check("delta_c", params.delta_c.is_finite(), "must be finite");
    check("delta_w", params.delta_w.is_finite(), "must be finite");

    if report.is_valid() {
        for (name, kappa) in [("kappa_c", params.kappa_c), ("kappa_w", params.kappa_w)] {
            if kappa >= params.omega_m {
                report
                    .advisories
                    .push(format!("{RESOLVED_SIDEBAND_ADVISORY}: {name}/omega_m = {:.3} >= 1", kappa / params.omega_m));
            }
        }
    }
    report
}
