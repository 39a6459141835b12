//! Numerical model of a reversible optical to microwave quantum interface
//! built from a mechanical resonator coupled to an optical and a microwave
//! cavity.
//!
//! The pipeline runs in five stages:
//!
//! 1. [`model`]: device parameters and derived single-photon quantities.
//! 2. [`steadystate`]: semiclassical fixed point, drift/diffusion matrices
//!    of the linearized fluctuations, stability.
//! 3. [`spectra`]: filtered output modes and the stationary 6×6 output
//!    covariance matrix, computed by frequency-domain quadrature.
//! 4. [`gaussian`]: reduction to the microwave–optical pair, symplectic
//!    spectra, logarithmic negativity.
//! 5. [`teleport`]: continuous-variable teleportation fidelity for coherent
//!    and even cat inputs, in both transfer directions.
//!
//! [`pipeline`] strings the stages together for a single operating point.

pub mod constants;
pub mod error;
pub mod gaussian;
pub mod model;
#[cfg(feature = "oracles")]
pub mod oracles;
pub mod pipeline;
pub mod quadrature;
pub mod spectra;
pub mod steadystate;
pub mod teleport;

pub use error::{Error, Result};

pub use gaussian::{
    log_negativity, physicality_check, reduce_to_pair, BipartiteCM, EntanglementResult, Mode, ModeOrder,
    PhysicalityReport,
};
pub use model::{derive_quantities, validate_params, DerivedQuantities, DeviceParams, ValidationReport};
pub use pipeline::{evaluate_point, OperatingPoint, PointResult};
pub use spectra::{filter_transfer, intracavity_covariance, output_covariance, OutputCM, OutputWindow};
pub use steadystate::{
    build_state_space, check_stability, solve_fixed_point, DetuningMode, StabilityVerdict, StateSpaceModel, SteadyState,
};
pub use teleport::{
    channel_gamma, f_opt, fidelity_cat, fidelity_coherent, reverse_channel, CatState, Direction, FidelityResult,
    NO_CLONING_THRESHOLD,
};
