//! Two-mode Gaussian states: reduction, physicality and entanglement.
//!
//! Covariance matrices use the vacuum-variance-1/2 convention with
//! quadrature pairs ordered (x₁, p₁, x₂, p₂, …).

use nalgebra::{DMatrix, Matrix2, Matrix4};

use crate::error::{Error, Result};
use crate::spectra::OutputCM;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Optical,
    Microwave,
}

impl Mode {
    pub fn other(self) -> Mode {
        match self {
            Mode::Optical => Mode::Microwave,
            Mode::Microwave => Mode::Optical,
        }
    }
}

/// Which output mode becomes the first block B.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum ModeOrder {
    /// (X_w, Y_w, X_c, Y_c)
    #[default]
    MicrowaveFirst,
    /// (X_c, Y_c, X_w, Y_w)
    OpticalFirst,
}

/// Reduced CM of two modes in block form (B, C; Cᵀ, B′).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BipartiteCM {
    pub block_b: Matrix2<f64>,
    pub block_b_prime: Matrix2<f64>,
    pub block_c: Matrix2<f64>,
    /// Physical mode described by `block_b`.
    pub first: Mode,
}

impl BipartiteCM {
    pub fn new(block_b: Matrix2<f64>, block_b_prime: Matrix2<f64>, block_c: Matrix2<f64>, first: Mode) -> Self {
        BipartiteCM { block_b, block_b_prime, block_c, first }
    }

    pub fn from_matrix(m: &Matrix4<f64>, first: Mode) -> Self {
        BipartiteCM {
            block_b: m.fixed_view::<2, 2>(0, 0).into_owned(),
            block_b_prime: m.fixed_view::<2, 2>(2, 2).into_owned(),
            block_c: m.fixed_view::<2, 2>(0, 2).into_owned(),
            first,
        }
    }

    pub fn second(&self) -> Mode {
        self.first.other()
    }

    pub fn assemble(&self) -> Matrix4<f64> {
        let mut m = Matrix4::zeros();
        m.fixed_view_mut::<2, 2>(0, 0).copy_from(&self.block_b);
        m.fixed_view_mut::<2, 2>(2, 2).copy_from(&self.block_b_prime);
        m.fixed_view_mut::<2, 2>(0, 2).copy_from(&self.block_c);
        m.fixed_view_mut::<2, 2>(2, 0).copy_from(&self.block_c.transpose());
        m
    }

    /// Relabels the modes: (B′, Cᵀ; C, B).
    pub fn swapped(&self) -> Self {
        BipartiteCM {
            block_b: self.block_b_prime,
            block_b_prime: self.block_b,
            block_c: self.block_c.transpose(),
            first: self.second(),
        }
    }

    pub fn physicality(&self) -> PhysicalityReport {
        let m = self.assemble();
        physicality_check(&DMatrix::from_column_slice(4, 4, m.as_slice()))
    }
}

/// Extracts the microwave–optical pair from the 6×6 output CM.
pub fn reduce_to_pair(cm: &OutputCM, order: ModeOrder) -> BipartiteCM {
    let v = &cm.matrix;
    let (first, idx) = match order {
        ModeOrder::MicrowaveFirst => (Mode::Microwave, [2, 3, 4, 5]),
        ModeOrder::OpticalFirst => (Mode::Optical, [4, 5, 2, 3]),
    };
    let m = Matrix4::from_fn(|i, j| v[(idx[i], idx[j])]);
    BipartiteCM::from_matrix(&m, first)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntanglementResult {
    /// Logarithmic negativity E_N = max(0, −ln 2η̃).
    pub log_neg: f64,
    /// Smallest symplectic eigenvalue of the partial transpose.
    pub eta: f64,
    /// Σ = det B + det B′ − 2 det C.
    pub sigma: f64,
    /// Best teleportation fidelity for this E_N.
    pub fopt: f64,
}

/// Relative size of a negative discriminant Σ² − 4 det V′ still treated
/// as roundoff.
pub const DISCRIMINANT_CLAMP: f64 = 1e-10;

pub fn log_negativity(pair: &BipartiteCM) -> Result<EntanglementResult> {
    let sigma = pair.block_b.determinant() + pair.block_b_prime.determinant() - 2.0 * pair.block_c.determinant();
    // LU on the assembled matrix rather than the block formula, always in
    // optical-first order so that swapping the pair is bit-exact.
    let canonical = if pair.first == Mode::Optical { *pair } else { pair.swapped() };
    let det_v = canonical.assemble().lu().determinant();
    let mut disc = sigma * sigma - 4.0 * det_v;
    if disc < 0.0 {
        if disc >= -DISCRIMINANT_CLAMP * sigma * sigma {
            disc = 0.0;
        } else {
            return Err(Error::UnphysicalCovariance { discriminant: disc });
        }
    }
    // η̃² = (Σ − √disc)/2 = 2 det V′ / (Σ + √disc), the latter without
    // cancellation.
    let eta_sq = 2.0 * det_v / (sigma + disc.sqrt());
    if !(eta_sq.is_finite() && eta_sq > 0.0 && sigma > 0.0) {
        return Err(Error::UnphysicalCovariance { discriminant: disc });
    }
    let eta = eta_sq.sqrt();
    let log_neg = (-(2.0 * eta).ln()).max(0.0);
    Ok(EntanglementResult { log_neg, eta, sigma, fopt: crate::teleport::f_opt(log_neg) })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalityReport {
    /// Symplectic eigenvalues, ascending.
    pub symplectic_eigenvalues: Vec<f64>,
    /// min ν − 1/2.
    pub margin: f64,
    pub positive_definite: bool,
}

/// Tolerance on the uncertainty relation ν ≥ 1/2.
pub const PHYSICALITY_TOL: f64 = 1e-8;

impl PhysicalityReport {
    pub fn is_physical(&self) -> bool {
        self.positive_definite && self.margin >= -PHYSICALITY_TOL
    }
}

fn symplectic_form(n_modes: usize) -> DMatrix<f64> {
    let mut omega = DMatrix::zeros(2 * n_modes, 2 * n_modes);
    for k in 0..n_modes {
        omega[(2 * k, 2 * k + 1)] = 1.0;
        omega[(2 * k + 1, 2 * k)] = -1.0;
    }
    omega
}

/// Symplectic spectrum of a real symmetric 2n×2n CM and its margin against
/// the uncertainty bound 1/2.
///
/// With V = L Lᵀ, the antisymmetric K = Lᵀ Ω L has eigenvalues ±iν_k, so
/// ν_k² are the (doubly degenerate) eigenvalues of KᵀK.
pub fn physicality_check(v: &DMatrix<f64>) -> PhysicalityReport {
    assert!(v.is_square() && v.nrows().is_multiple_of(2), "covariance matrix must be 2n×2n");
    let n = v.nrows() / 2;
    let sym = (v + v.transpose()) * 0.5;
    let omega = symplectic_form(n);

    let (nu, positive_definite) = match sym.clone().cholesky() {
        Some(chol) => {
            let l = chol.l();
            let k = l.transpose() * &omega * &l;
            let s = k.transpose() * &k;
            let mut ev: Vec<f64> = s.symmetric_eigenvalues().iter().map(|x| x.max(0.0).sqrt()).collect();
            ev.sort_by(f64::total_cmp);
            (ev.chunks(2).map(|p| 0.5 * (p[0] + p[1])).collect::<Vec<_>>(), true)
        }
        None => {
            let mut ev: Vec<f64> = (&omega * &sym).complex_eigenvalues().iter().map(|z| z.norm()).collect();
            ev.sort_by(f64::total_cmp);
            (ev.chunks(2).map(|p| 0.5 * (p[0] + p[1])).collect::<Vec<_>>(), false)
        }
    };
    let margin = nu.iter().copied().fold(f64::INFINITY, f64::min) - 0.5;
    PhysicalityReport { symplectic_eigenvalues: nu, margin, positive_definite }
}
