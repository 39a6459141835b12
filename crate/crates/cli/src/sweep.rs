//! One-dimensional parameter sweeps over the full pipeline.

use oemlink::{evaluate_point, OperatingPoint, OutputWindow, PointResult};
use rayon::prelude::*;

use crate::error::{CliError, Result};

/// Swept quantity. Window centres are in units of ω_m, ε = τω_m and α are
/// dimensionless, temperature is in kelvin.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    OmegaWCenter,
    OmegaCCenter,
    Epsilon,
    CatAlpha,
    Temperature,
}

impl Axis {
    pub fn parse(s: &str) -> std::result::Result<Self, String> {
        Ok(match s {
            "omega_w_center" => Axis::OmegaWCenter,
            "omega_c_center" => Axis::OmegaCCenter,
            "epsilon" => Axis::Epsilon,
            "cat_alpha" => Axis::CatAlpha,
            "temperature" => Axis::Temperature,
            _ => {
                return Err(format!(
                    "unknown axis '{s}' (omega_w_center, omega_c_center, epsilon, cat_alpha, temperature)"
                ))
            }
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Axis::OmegaWCenter => "omega_w_center",
            Axis::OmegaCCenter => "omega_c_center",
            Axis::Epsilon => "epsilon",
            Axis::CatAlpha => "cat_alpha",
            Axis::Temperature => "temperature",
        }
    }

    pub fn unit(self) -> &'static str {
        match self {
            Axis::OmegaWCenter | Axis::OmegaCCenter => "omega_m",
            Axis::Epsilon | Axis::CatAlpha => "1",
            Axis::Temperature => "K",
        }
    }

    /// `base` with this axis set to `x`.
    pub fn apply(self, base: &OperatingPoint, x: f64) -> OperatingPoint {
        let mut p = base.clone();
        let wm = p.params.omega_m;
        match self {
            Axis::OmegaWCenter => p.window.omega_center_w = x * wm,
            Axis::OmegaCCenter => p.window.omega_center_c = x * wm,
            Axis::Epsilon => p.window.tau = x / wm,
            Axis::CatAlpha => p.cat_alpha = x,
            Axis::Temperature => p.params.temperature = x,
        }
        p
    }

    fn admits(self, x: f64) -> bool {
        match self {
            Axis::OmegaWCenter | Axis::OmegaCCenter => x.is_finite(),
            Axis::Epsilon => x.is_finite() && x > 0.0,
            Axis::CatAlpha | Axis::Temperature => x.is_finite() && x >= 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Observable {
    LogNeg,
    FCat,
    FCoherent,
    FOpt,
    StabilityMargin,
}

impl Observable {
    pub const ALL: [Observable; 5] =
        [Observable::LogNeg, Observable::FCat, Observable::FCoherent, Observable::FOpt, Observable::StabilityMargin];

    pub fn parse(s: &str) -> std::result::Result<Self, String> {
        Observable::ALL
            .into_iter()
            .find(|o| o.name() == s)
            .ok_or_else(|| format!("unknown output '{s}' (E_N, F_cat, F_coherent, F_opt, stability_margin)"))
    }

    pub fn name(self) -> &'static str {
        match self {
            Observable::LogNeg => "E_N",
            Observable::FCat => "F_cat",
            Observable::FCoherent => "F_coherent",
            Observable::FOpt => "F_opt",
            Observable::StabilityMargin => "stability_margin",
        }
    }

    /// `None` when the point has no stationary state. The stability margin
    /// is in units of ω_m and exists either way.
    pub fn extract(self, r: &PointResult, omega_m: f64) -> Option<f64> {
        match self {
            Observable::LogNeg => r.entanglement.map(|e| e.log_neg),
            Observable::FCat => r.cat.as_ref().map(|f| f.fidelity),
            Observable::FCoherent => r.coherent.as_ref().map(|f| f.fidelity),
            Observable::FOpt => r.entanglement.map(|e| e.fopt),
            Observable::StabilityMargin => Some(r.stability.margin / omega_m),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub axis: Axis,
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    pub outputs: Vec<Observable>,
    /// Everything not on the axis.
    pub base: OperatingPoint,
}

impl SweepSpec {
    pub fn validate(&self) -> std::result::Result<(), String> {
        if self.points < 2 {
            return Err(format!("a sweep needs at least 2 points, got {}", self.points));
        }
        if !(self.start.is_finite() && self.stop.is_finite()) {
            return Err("sweep range must be finite".into());
        }
        for x in [self.start, self.stop] {
            if !self.axis.admits(x) {
                return Err(format!("{} = {x} is outside the axis domain", self.axis.name()));
            }
        }
        if self.outputs.is_empty() {
            return Err("no outputs requested".into());
        }
        Ok(())
    }

    pub fn grid(&self) -> Vec<f64> {
        let n = self.points - 1;
        (0..=n).map(|i| self.start + (self.stop - self.start) * i as f64 / n as f64).collect()
    }
}

/// Numbers recorded for one grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub x: f64,
    pub epsilon: f64,
    pub stable: bool,
    /// One entry per requested output, in request order.
    pub values: Vec<Option<f64>>,
    pub f_opt: Option<f64>,
    pub log_neg: Option<f64>,
    /// min ν − 1/2 of the reduced output pair.
    pub physicality_margin: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub spec: SweepSpec,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    /// Grid point with the largest value of `obs` among stable rows.
    pub fn argmax(&self, obs: Observable) -> Option<(f64, f64)> {
        let k = self.spec.outputs.iter().position(|o| *o == obs)?;
        self.rows.iter().filter_map(|r| r.values[k].map(|v| (r.x, v))).max_by(|a, b| a.1.total_cmp(&b.1))
    }

    pub fn column(&self, obs: Observable) -> Option<Vec<Option<f64>>> {
        let k = self.spec.outputs.iter().position(|o| *o == obs)?;
        Some(self.rows.iter().map(|r| r.values[k]).collect())
    }
}

fn evaluate_row(spec: &SweepSpec, x: f64) -> Result<SweepRow> {
    let point = spec.axis.apply(&spec.base, x);
    let wm = point.params.omega_m;
    let r = evaluate_point(&point)?;
    Ok(SweepRow {
        x,
        epsilon: point.window.epsilon(wm),
        stable: r.is_stable(),
        values: spec.outputs.iter().map(|o| o.extract(&r, wm)).collect(),
        f_opt: r.entanglement.map(|e| e.fopt),
        log_neg: r.entanglement.map(|e| e.log_neg),
        physicality_margin: r.physicality.as_ref().map(|p| p.margin),
    })
}

/// Evaluates every grid point on a pool of `jobs` workers (0 = one per
/// core). Rows come back in grid order whatever the schedule.
pub fn run_sweep(spec: &SweepSpec, jobs: usize) -> Result<SweepTable> {
    spec.validate().map_err(CliError::Usage)?;
    OutputWindow::new(spec.base.window.tau, spec.base.window.omega_center_c, spec.base.window.omega_center_w)?;
    let grid = spec.grid();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start worker pool: {e}")))?;
    let rows: Vec<SweepRow> =
        pool.install(|| grid.par_iter().map(|&x| evaluate_row(spec, x)).collect::<Result<Vec<_>>>())?;
    if rows.iter().all(|r| !r.stable) {
        return Err(CliError::AllUnstable);
    }
    Ok(SweepTable { spec: spec.clone(), rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use oemlink::DeviceParams;

    fn base() -> OperatingPoint {
        let p = DeviceParams::fig2_caption();
        OperatingPoint::new(p, OutputWindow::from_epsilon(50.0, p.omega_m, -1.0, 1.0).unwrap(), 1.0)
    }

    #[test]
    fn grid_hits_both_ends() {
        let s = SweepSpec {
            axis: Axis::OmegaWCenter,
            start: 0.8,
            stop: 1.2,
            points: 81,
            outputs: vec![Observable::LogNeg],
            base: base(),
        };
        let g = s.grid();
        assert_eq!(g.len(), 81);
        assert_eq!(g[0], 0.8);
        assert_eq!(g[80], 1.2);
        assert!((g[40] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn axis_apply_sets_the_right_field() {
        let b = base();
        let wm = b.params.omega_m;
        assert_eq!(Axis::OmegaWCenter.apply(&b, 0.9).window.omega_center_w, 0.9 * wm);
        assert_eq!(Axis::OmegaCCenter.apply(&b, -0.9).window.omega_center_c, -0.9 * wm);
        assert_eq!(Axis::Epsilon.apply(&b, 25.0).window.epsilon(wm), 25.0);
        assert_eq!(Axis::CatAlpha.apply(&b, 2.0).cat_alpha, 2.0);
        assert_eq!(Axis::Temperature.apply(&b, 0.1).params.temperature, 0.1);
    }

    #[test]
    fn names_round_trip() {
        for o in Observable::ALL {
            assert_eq!(Observable::parse(o.name()), Ok(o));
        }
        for a in [Axis::OmegaWCenter, Axis::OmegaCCenter, Axis::Epsilon, Axis::CatAlpha, Axis::Temperature] {
            assert_eq!(Axis::parse(a.name()), Ok(a));
        }
        assert!(Axis::parse("power").is_err());
    }

    #[test]
    fn unstable_rows_are_flagged() {
        let mut b = base();
        b.params.power_c *= 10.0;
        let spec = SweepSpec {
            axis: Axis::Temperature,
            start: 0.01,
            stop: 0.02,
            points: 2,
            outputs: vec![Observable::LogNeg, Observable::StabilityMargin],
            base: b,
        };
        assert!(matches!(run_sweep(&spec, 1), Err(CliError::AllUnstable)));
    }

    #[test]
    fn domain_checks() {
        let mut s = SweepSpec {
            axis: Axis::Epsilon,
            start: 0.0,
            stop: 10.0,
            points: 3,
            outputs: vec![Observable::FOpt],
            base: base(),
        };
        assert!(s.validate().is_err());
        s.start = 1.0;
        assert!(s.validate().is_ok());
        s.outputs.clear();
        assert!(s.validate().is_err());
    }
}
