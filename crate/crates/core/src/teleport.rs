//! Continuous-variable teleportation over the Gaussian output channel.
//!
//! Alice mixes the client state with her half of the channel (the first
//! mode of the [`BipartiteCM`]) and measures X₊ and Y₋; Bob applies a
//! unit-gain displacement to the second mode. The added noise enters
//! through Γ = I + ZBZ + ZC + CᵀZ + B′, Z = Diag(1, −1).

use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gaussian::{log_negativity, BipartiteCM, Mode};

/// Fidelity above which a negative Wigner function survives teleportation.
pub const NO_CLONING_THRESHOLD: f64 = 2.0 / 3.0;

/// F_opt = 1/(1 + e^{−E_N}), the best fidelity reachable at a given E_N.
pub fn f_opt(log_neg: f64) -> f64 {
    1.0 / (1.0 + (-log_neg).exp())
}

/// Which output is teleported onto which.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Optical input at Alice, microwave output at Bob.
    Forward,
    /// Microwave input, optical output.
    Reversed,
}

impl Direction {
    /// The mode Alice measures: it must be the first block of the pair.
    pub fn measured_mode(self) -> Mode {
        match self {
            Direction::Forward => Mode::Optical,
            Direction::Reversed => Mode::Microwave,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Direction::Forward => "forward",
            Direction::Reversed => "reversed",
        }
    }
}

/// Even cat state N(|α⟩ + |−α⟩) with real α.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CatState {
    pub amplitude: f64,
}

impl CatState {
    pub fn new(amplitude: f64) -> Result<Self> {
        if !(amplitude.is_finite() && amplitude >= 0.0) {
            return Err(Error::InvalidParameter {
                field: "cat_alpha",
                reason: format!("must be finite and >= 0, got {amplitude}"),
            });
        }
        Ok(CatState { amplitude })
    }

    /// N = (2 + 2e^{−2α²})^{−1/2}.
    pub fn normalization(&self) -> f64 {
        (2.0 + 2.0 * (-2.0 * self.amplitude * self.amplitude).exp()).powf(-0.5)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FidelityResult {
    pub fidelity: f64,
    pub gamma_det: f64,
    /// Q_1 … Q_4 at +α (Q_i(−α) = Q_i(α)).
    pub q_terms: [Complex64; 4],
    /// Imaginary part of the assembled bracket before it was discarded.
    pub imag_residue: f64,
    pub direction: Direction,
    pub log_neg: f64,
    pub f_opt: f64,
}

impl FidelityResult {
    pub fn beats_no_cloning(&self) -> bool {
        self.fidelity > NO_CLONING_THRESHOLD
    }
}

fn direction_of(pair: &BipartiteCM) -> Direction {
    match pair.first {
        Mode::Optical => Direction::Forward,
        Mode::Microwave => Direction::Reversed,
    }
}

/// Γ and det Γ for the channel with Alice on the first mode.
pub fn channel_gamma(pair: &BipartiteCM) -> Result<(Matrix2<f64>, f64)> {
    let z = Matrix2::new(1.0, 0.0, 0.0, -1.0);
    let (b, bp, c) = (&pair.block_b, &pair.block_b_prime, &pair.block_c);
    let gamma = Matrix2::identity() + z * b * z + z * c + c.transpose() * z + bp;
    let gamma = (gamma + gamma.transpose()) * 0.5;
    let det = gamma.determinant();
    if !(det.is_finite() && det > 0.0) {
        return Err(Error::UnphysicalChannel { det });
    }
    Ok((gamma, det))
}

/// Coherent-state fidelity F = (det Γ)^{−1/2}.
pub fn fidelity_coherent(pair: &BipartiteCM) -> Result<FidelityResult> {
    let (_, det) = channel_gamma(pair)?;
    let ent = log_negativity(pair)?;
    Ok(FidelityResult {
        fidelity: det.powf(-0.5).min(1.0),
        gamma_det: det,
        q_terms: [Complex64::new(0.0, 0.0); 4],
        imag_residue: 0.0,
        direction: direction_of(pair),
        log_neg: ent.log_neg,
        f_opt: ent.fopt,
    })
}

/// Fidelity of an even cat state, in closed form:
///
/// ```text
/// F = N⁴/√det Γ · { e^{−Q₁(α)} + e^{−Q₁(−α)} + e^{−4α²}[e^{−Q₂(α)} + e^{−Q₂(−α)}]
///                   + 2e^{−2α²}[e^{−Q₃(α)} + e^{−Q₃(−α)} + e^{−Q₄(α)} + e^{−Q₄(−α)}]
///                   + 2e^{−4α²} + 2 }
/// ```
///
/// with Q_i = h_iᵀ Γ⁻¹ h_i and h₁ = (2α, 0), h₂ = (0, 2iα), h₃ = (α, iα),
/// h₄ = (α, −iα).
pub fn fidelity_cat(pair: &BipartiteCM, cat: &CatState) -> Result<FidelityResult> {
    let cat = CatState::new(cat.amplitude)?;
    let (gamma, det) = channel_gamma(pair)?;
    let ent = log_negativity(pair)?;
    // Adjugate inverse.
    let inv = Matrix2::new(gamma[(1, 1)], -gamma[(0, 1)], -gamma[(1, 0)], gamma[(0, 0)]) / det;
    let inv = inv.map(|x| Complex64::new(x, 0.0));

    let a = cat.amplitude;
    let re = |x: f64| Complex64::new(x, 0.0);
    let im = |x: f64| Complex64::new(0.0, x);
    let h = [
        Vector2::new(re(2.0 * a), re(0.0)),
        Vector2::new(re(0.0), im(2.0 * a)),
        Vector2::new(re(a), im(a)),
        Vector2::new(re(a), im(-a)),
    ];
    let q = h.map(|v| (v.transpose() * inv * v)[(0, 0)]);
    let e = |z: Complex64| (-z).exp();

    let a2 = a * a;
    let bracket = e(q[0]) * 2.0
        + e(q[1]) * (2.0 * (-4.0 * a2).exp())
        + (e(q[2]) + e(q[3])) * (4.0 * (-2.0 * a2).exp())
        + re(2.0 * (-4.0 * a2).exp() + 2.0);
    let n4 = cat.normalization().powi(4);
    let f = n4 / det.sqrt() * bracket.re;

    Ok(FidelityResult {
        fidelity: f.clamp(0.0, 1.0),
        gamma_det: det,
        q_terms: q,
        imag_residue: (n4 / det.sqrt() * bracket.im).abs(),
        direction: direction_of(pair),
        log_neg: ent.log_neg,
        f_opt: ent.fopt,
    })
}

/// Exchanges Alice and Bob: B ↔ B′, C ↔ Cᵀ.
pub fn reverse_channel(pair: &BipartiteCM) -> BipartiteCM {
    pair.swapped()
}
