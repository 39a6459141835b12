//! Figure data sets: one sweep per ε curve.

use std::path::{Path, PathBuf};

use oemlink::Direction;

use crate::config::RunConfig;
use crate::csv::sweep_csv;
use crate::error::{CliError, Result};
use crate::sweep::{run_sweep, Axis, Observable, SweepSpec, SweepTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    /// E_N against Ω_w/ω_m at Ω_c = −ω_m.
    Fig2,
    /// Cat fidelity against Ω_w/ω_m.
    Fig3,
    /// Cat fidelity against α at Ω_w = ω_m.
    Fig4,
    /// Reversed-direction cat fidelity against Ω_c/ω_m at Ω_w = ω_m.
    Sm1,
}

pub const GRID_POINTS: usize = 81;

impl Figure {
    pub const ALL: [Figure; 4] = [Figure::Fig2, Figure::Fig3, Figure::Fig4, Figure::Sm1];

    pub fn parse(s: &str) -> Result<Self> {
        Figure::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| CliError::Usage(format!("unknown figure '{s}' (fig2, fig3, fig4, sm1)")))
    }

    pub fn name(self) -> &'static str {
        match self {
            Figure::Fig2 => "fig2",
            Figure::Fig3 => "fig3",
            Figure::Fig4 => "fig4",
            Figure::Sm1 => "sm1",
        }
    }

    fn title(self) -> &'static str {
        match self {
            Figure::Fig2 => "log-negativity vs microwave window centre",
            Figure::Fig3 => "cat-state fidelity vs microwave window centre",
            Figure::Fig4 => "cat-state fidelity vs cat amplitude",
            Figure::Sm1 => "reversed-direction cat-state fidelity vs optical window centre",
        }
    }

    /// Sweep specs, one per ε of `cfg`, on top of the configured device.
    pub fn specs(self, cfg: &RunConfig) -> Vec<SweepSpec> {
        let (axis, start, stop, outputs, direction) = match self {
            Figure::Fig2 => (Axis::OmegaWCenter, 0.8, 1.2, vec![Observable::LogNeg], Direction::Forward),
            Figure::Fig3 => (Axis::OmegaWCenter, 0.8, 1.2, vec![Observable::FCat], Direction::Forward),
            Figure::Fig4 => {
                (Axis::CatAlpha, 0.0, 2.0, vec![Observable::FCat, Observable::FCoherent], Direction::Forward)
            }
            Figure::Sm1 => (Axis::OmegaCCenter, -1.2, -0.8, vec![Observable::FCat], Direction::Reversed),
        };
        cfg.epsilons
            .iter()
            .map(|&eps| {
                let mut base = cfg.operating_point();
                let wm = base.params.omega_m;
                base.direction = direction;
                base.window.tau = eps / wm;
                base.window.omega_center_c = -wm;
                base.window.omega_center_w = wm;
                SweepSpec { axis, start, stop, points: GRID_POINTS, outputs: outputs.clone(), base }
            })
            .collect()
    }

    pub fn compute(self, cfg: &RunConfig, jobs: usize) -> Result<Vec<SweepTable>> {
        self.specs(cfg).iter().map(|s| run_sweep(s, jobs)).collect()
    }

    pub fn render(self, cfg: &RunConfig, tables: &[SweepTable]) -> String {
        sweep_csv(&format!("{}: {}", self.name(), self.title()), cfg, tables)
    }
}

/// Computes a figure and writes `<out_dir>/<name>.csv`.
pub fn emit_figure(figure: Figure, cfg: &RunConfig, out_dir: &Path, jobs: usize) -> Result<PathBuf> {
    let tables = figure.compute(cfg, jobs)?;
    let path = out_dir.join(format!("{}.csv", figure.name()));
    std::fs::create_dir_all(out_dir).map_err(|source| CliError::Io { path: out_dir.to_path_buf(), source })?;
    std::fs::write(&path, figure.render(cfg, &tables)).map_err(|source| CliError::Io { path: path.clone(), source })?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn specs_follow_the_figure_layout() {
        let cfg = RunConfig::from_preset("fig2-caption").unwrap();
        let specs = Figure::Sm1.specs(&cfg);
        assert_eq!(specs.len(), 4);
        let wm = cfg.params.omega_m;
        for (s, eps) in specs.iter().zip([25.0, 50.0, 100.0, 200.0]) {
            assert_eq!(s.base.direction, Direction::Reversed);
            assert_eq!(s.base.window.epsilon(wm), eps);
            assert_eq!(s.base.window.omega_center_w, wm);
            assert_eq!((s.start, s.stop, s.points), (-1.2, -0.8, 81));
        }
        assert_eq!(Figure::Fig4.specs(&cfg)[0].axis, Axis::CatAlpha);
    }

    #[test]
    fn unknown_figure_is_usage_error() {
        let e = Figure::parse("fig5").unwrap_err();
        assert_eq!(e.exit_code(), 2);
        assert_eq!(Figure::parse("sm1").unwrap(), Figure::Sm1);
    }
}
