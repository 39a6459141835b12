//! End-to-end evaluation of one operating point.

use crate::error::{Error, Result};
use crate::gaussian::{log_negativity, reduce_to_pair, BipartiteCM, EntanglementResult, ModeOrder, PhysicalityReport};
use crate::model::{derive_quantities, DeviceParams};
use crate::quadrature::AdaptiveGaussKronrod;
use crate::spectra::{output_covariance_with, OutputCM, OutputWindow};
use crate::steadystate::{
    build_state_space, check_stability, solve_fixed_point, DetuningMode, StabilityVerdict, SteadyState,
};
use crate::teleport::{fidelity_cat, fidelity_coherent, CatState, Direction, FidelityResult};

#[derive(Debug, Clone, PartialEq)]
pub struct OperatingPoint {
    pub params: DeviceParams,
    pub mode: DetuningMode,
    pub window: OutputWindow,
    pub direction: Direction,
    pub cat_alpha: f64,
    pub quad: AdaptiveGaussKronrod,
}

impl OperatingPoint {
    /// Forward direction, effective detunings, default quadrature.
    pub fn new(params: DeviceParams, window: OutputWindow, cat_alpha: f64) -> Self {
        OperatingPoint {
            params,
            mode: DetuningMode::Effective,
            window,
            direction: Direction::Forward,
            cat_alpha,
            quad: AdaptiveGaussKronrod::default(),
        }
    }
}

/// Everything computed at one point. The output-dependent fields are
/// `None` when the linearized dynamics has no stationary state.
#[derive(Debug, Clone, PartialEq)]
pub struct PointResult {
    pub steady: SteadyState,
    pub stability: StabilityVerdict,
    pub output: Option<OutputCM>,
    pub pair: Option<BipartiteCM>,
    pub physicality: Option<PhysicalityReport>,
    pub entanglement: Option<EntanglementResult>,
    pub coherent: Option<FidelityResult>,
    pub cat: Option<FidelityResult>,
}

impl PointResult {
    pub fn is_stable(&self) -> bool {
        self.stability.stable
    }
}

pub fn evaluate_point(point: &OperatingPoint) -> Result<PointResult> {
    let cat = CatState::new(point.cat_alpha)?;
    let dq = derive_quantities(&point.params)?;
    let steady = solve_fixed_point(&point.params, &dq, point.mode)?;
    let model = build_state_space(&point.params, &dq, &steady);
    let stability = check_stability(&model)?;
    if !stability.stable {
        return Ok(PointResult {
            steady,
            stability,
            output: None,
            pair: None,
            physicality: None,
            entanglement: None,
            coherent: None,
            cat: None,
        });
    }

    let output = output_covariance_with(&model, &point.window, &point.quad)?;
    let order = match point.direction {
        Direction::Forward => ModeOrder::OpticalFirst,
        Direction::Reversed => ModeOrder::MicrowaveFirst,
    };
    let pair = reduce_to_pair(&output, order);
    let physicality = pair.physicality();
    if !physicality.is_physical() {
        return Err(Error::UnphysicalCovariance { discriminant: physicality.margin });
    }
    let entanglement = log_negativity(&pair)?;
    let coherent = fidelity_coherent(&pair)?;
    let cat = fidelity_cat(&pair, &cat)?;
    Ok(PointResult {
        steady,
        stability,
        output: Some(output),
        pair: Some(pair),
        physicality: Some(physicality),
        entanglement: Some(entanglement),
        coherent: Some(coherent),
        cat: Some(cat),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::Mode;

    fn point(direction: Direction) -> OperatingPoint {
        let p = DeviceParams::fig2_caption();
        let w = OutputWindow::from_epsilon(100.0, p.omega_m, -1.0, 1.0).unwrap();
        OperatingPoint { direction, ..OperatingPoint::new(p, w, 1.0) }
    }

    #[test]
    fn default_point_is_entangled_and_beats_benchmark() {
        let r = evaluate_point(&point(Direction::Forward)).unwrap();
        assert!(r.is_stable());
        assert_eq!(r.pair.unwrap().first, Mode::Optical);
        let e = r.entanglement.unwrap();
        assert!(e.log_neg > 0.0);
        let coh = r.coherent.unwrap();
        assert!(coh.fidelity > 0.5);
        assert!(coh.fidelity <= e.fopt + 1e-9);
        assert!(r.cat.unwrap().fidelity <= e.fopt + 1e-9);
    }

    #[test]
    fn directions_share_the_covariance() {
        let f = evaluate_point(&point(Direction::Forward)).unwrap();
        let r = evaluate_point(&point(Direction::Reversed)).unwrap();
        assert_eq!(f.output, r.output);
        assert_eq!(r.pair.unwrap(), f.pair.unwrap().swapped());
        assert_eq!(r.cat.unwrap().direction, Direction::Reversed);
    }

    #[test]
    fn unstable_point_is_flagged_not_failed() {
        let mut pt = point(Direction::Forward);
        // Blue-sideband optical drive outruns the microwave cooling.
        pt.params.power_c *= 10.0;
        let r = evaluate_point(&pt).unwrap();
        assert!(!r.is_stable());
        assert!(r.output.is_none() && r.cat.is_none());
    }
}
