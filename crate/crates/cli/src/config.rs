//! Flat key-value configuration files.
//!
//! Every [`DeviceParams`] field is accepted under its own name. Angular
//! frequencies and rates may instead be given in cycles per second with a
//! `_hz` suffix (`omega_m_hz = 10e6`); the two spellings are mutually
//! exclusive. Keys not set fall back to the named preset.

use std::path::Path;

use oemlink::quadrature::AdaptiveGaussKronrod;
use oemlink::{DetuningMode, DeviceParams, Direction, OutputWindow};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};
use crate::sweep::{Axis, Observable, SweepSpec};

pub const DEFAULT_PRESET: &str = "fig2-caption";

/// Widths of the output modes used for the figure curves, as ε = τω_m.
pub const DEFAULT_EPSILONS: [f64; 4] = [25.0, 50.0, 100.0, 200.0];

/// Parameters of a named preset.
pub fn preset(name: &str) -> Option<DeviceParams> {
    match name {
        "fig2-caption" => Some(DeviceParams::fig2_caption()),
        _ => None,
    }
}

pub fn preset_names() -> &'static [&'static str] {
    &["fig2-caption"]
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    preset: Option<String>,

    omega_m: Option<f64>,
    omega_m_hz: Option<f64>,
    q_factor: Option<f64>,
    omega_w: Option<f64>,
    omega_w_hz: Option<f64>,
    kappa_w: Option<f64>,
    kappa_w_hz: Option<f64>,
    power_w: Option<f64>,
    mass: Option<f64>,
    temperature: Option<f64>,
    gap_d: Option<f64>,
    mu: Option<f64>,
    cavity_length: Option<f64>,
    kappa_c: Option<f64>,
    kappa_c_hz: Option<f64>,
    lambda_drive: Option<f64>,
    power_c: Option<f64>,
    delta_c: Option<f64>,
    delta_c_hz: Option<f64>,
    delta_w: Option<f64>,
    delta_w_hz: Option<f64>,

    tau: Option<f64>,
    epsilon: Option<f64>,
    omega_center_c: Option<f64>,
    omega_center_c_hz: Option<f64>,
    omega_center_w: Option<f64>,
    omega_center_w_hz: Option<f64>,

    detuning_mode: Option<String>,
    direction: Option<String>,
    cat_alpha: Option<f64>,
    rel_tol: Option<f64>,

    axis: Option<String>,
    start: Option<f64>,
    stop: Option<f64>,
    points: Option<usize>,
    outputs: Option<Vec<String>>,
    epsilons: Option<Vec<f64>>,
}

/// A fully resolved run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub preset: String,
    pub params: DeviceParams,
    pub window: OutputWindow,
    pub mode: DetuningMode,
    pub direction: Direction,
    pub cat_alpha: f64,
    pub quad: AdaptiveGaussKronrod,
    /// ε values of the figure curves.
    pub epsilons: Vec<f64>,
    pub sweep: Option<SweepSpec>,
}

impl RunConfig {
    /// Preset values with the resonant window ε = 100, Ω_c = −ω_m, Ω_w = ω_m.
    pub fn from_preset(name: &str) -> Result<Self> {
        let params = preset(name).ok_or_else(|| {
            CliError::Usage(format!("unknown preset '{name}' (available: {})", preset_names().join(", ")))
        })?;
        Ok(RunConfig {
            preset: name.to_string(),
            params,
            window: OutputWindow::from_epsilon(100.0, params.omega_m, -1.0, 1.0)?,
            mode: DetuningMode::Effective,
            direction: Direction::Forward,
            cat_alpha: 1.0,
            quad: AdaptiveGaussKronrod::default(),
            epsilons: DEFAULT_EPSILONS.to_vec(),
            sweep: None,
        })
    }

    pub fn load(path: &Path, preset_override: Option<&str>) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
        Self::parse(&text, &path.display().to_string(), preset_override)
    }

    /// Parses configuration text; `origin` names it in diagnostics.
    pub fn parse(text: &str, origin: &str, preset_override: Option<&str>) -> Result<Self> {
        let file: FileConfig =
            toml::from_str(text).map_err(|e| CliError::Config { path: origin.to_string(), message: e.to_string() })?;
        let bad = |message: String| CliError::Config { path: origin.to_string(), message };
        let name = preset_override.or(file.preset.as_deref()).unwrap_or(DEFAULT_PRESET);
        let mut cfg = Self::from_preset(name)?;
        let p = &mut cfg.params;

        let angular = |rad: Option<f64>, hz: Option<f64>, key: &str| -> Result<Option<f64>> {
            match (rad, hz) {
                (Some(_), Some(_)) => Err(bad(format!("both '{key}' and '{key}_hz' given"))),
                (Some(x), None) => Ok(Some(x)),
                (None, Some(f)) => Ok(Some(oemlink::constants::TWO_PI * f)),
                (None, None) => Ok(None),
            }
        };
        let set = |slot: &mut f64, v: Option<f64>| {
            if let Some(v) = v {
                *slot = v;
            }
        };

        set(&mut p.omega_m, angular(file.omega_m, file.omega_m_hz, "omega_m")?);
        set(&mut p.q_factor, file.q_factor);
        set(&mut p.omega_w, angular(file.omega_w, file.omega_w_hz, "omega_w")?);
        set(&mut p.kappa_w, angular(file.kappa_w, file.kappa_w_hz, "kappa_w")?);
        set(&mut p.power_w, file.power_w);
        set(&mut p.mass, file.mass);
        set(&mut p.temperature, file.temperature);
        set(&mut p.gap_d, file.gap_d);
        set(&mut p.mu, file.mu);
        set(&mut p.cavity_length, file.cavity_length);
        set(&mut p.kappa_c, angular(file.kappa_c, file.kappa_c_hz, "kappa_c")?);
        set(&mut p.lambda_drive, file.lambda_drive);
        set(&mut p.power_c, file.power_c);
        set(&mut p.delta_c, angular(file.delta_c, file.delta_c_hz, "delta_c")?);
        set(&mut p.delta_w, angular(file.delta_w, file.delta_w_hz, "delta_w")?);
        let omega_m = p.omega_m;

        // The default window follows ω_m if only the mechanics was changed.
        let mut w = OutputWindow::from_epsilon(100.0, omega_m, -1.0, 1.0)?;
        match (file.tau, file.epsilon) {
            (Some(_), Some(_)) => return Err(bad("both 'tau' and 'epsilon' given".into())),
            (Some(t), None) => w.tau = t,
            (None, Some(e)) => w.tau = e / omega_m,
            (None, None) => {}
        }
        set(&mut w.omega_center_c, angular(file.omega_center_c, file.omega_center_c_hz, "omega_center_c")?);
        set(&mut w.omega_center_w, angular(file.omega_center_w, file.omega_center_w_hz, "omega_center_w")?);
        cfg.window = OutputWindow::new(w.tau, w.omega_center_c, w.omega_center_w)?;

        if let Some(m) = file.detuning_mode.as_deref() {
            cfg.mode = parse_mode(m).map_err(bad)?;
        }
        if let Some(d) = file.direction.as_deref() {
            cfg.direction = parse_direction(d).map_err(bad)?;
        }
        set(&mut cfg.cat_alpha, file.cat_alpha);
        if let Some(t) = file.rel_tol {
            cfg.quad = AdaptiveGaussKronrod::with_rel_tol(t);
        }
        if let Some(e) = file.epsilons {
            if e.is_empty() || e.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
                return Err(bad("'epsilons' must be a non-empty list of positive numbers".into()));
            }
            cfg.epsilons = e;
        }
        cfg.params.validated()?;
        oemlink::CatState::new(cfg.cat_alpha)?;
        check_tol(cfg.quad.rel_tol).map_err(bad)?;

        let sweep_keys = [file.axis.is_some(), file.start.is_some(), file.stop.is_some(), file.points.is_some()];
        if sweep_keys.iter().any(|k| *k) {
            let (Some(axis), Some(start), Some(stop), Some(points)) = (file.axis, file.start, file.stop, file.points)
            else {
                return Err(bad("a sweep needs all of 'axis', 'start', 'stop' and 'points'".into()));
            };
            let axis = Axis::parse(&axis).map_err(bad)?;
            let outputs = match file.outputs {
                Some(list) => list
                    .iter()
                    .map(|s| Observable::parse(s))
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(bad)?,
                None => Observable::ALL.to_vec(),
            };
            let spec = SweepSpec { axis, start, stop, points, outputs, base: cfg.operating_point() };
            spec.validate().map_err(bad)?;
            cfg.sweep = Some(spec);
        } else if file.outputs.is_some() {
            return Err(bad("'outputs' given without a sweep axis".into()));
        }
        Ok(cfg)
    }

    pub fn with_tol(mut self, rel_tol: f64) -> Result<Self> {
        check_tol(rel_tol).map_err(CliError::Usage)?;
        self.quad = AdaptiveGaussKronrod { rel_tol, ..self.quad };
        if let Some(s) = self.sweep.as_mut() {
            s.base.quad = self.quad;
        }
        Ok(self)
    }

    pub fn operating_point(&self) -> oemlink::OperatingPoint {
        oemlink::OperatingPoint {
            params: self.params,
            mode: self.mode,
            window: self.window,
            direction: self.direction,
            cat_alpha: self.cat_alpha,
            quad: self.quad,
        }
    }

    /// SHA-256 of the canonical serialization of everything that affects
    /// the numbers, hex encoded.
    pub fn fingerprint(&self) -> String {
        let canonical = Canonical {
            preset: &self.preset,
            params: self.params,
            tau: self.window.tau,
            omega_center_c: self.window.omega_center_c,
            omega_center_w: self.window.omega_center_w,
            detuning_mode: mode_name(self.mode),
            direction: self.direction.label(),
            cat_alpha: self.cat_alpha,
            rel_tol: self.quad.rel_tol,
            zero_floor: self.quad.zero_floor,
            max_intervals: self.quad.max_intervals,
            epsilons: &self.epsilons,
        };
        let text = toml::to_string(&canonical).expect("plain numbers and strings serialize");
        Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[derive(Serialize)]
struct Canonical<'a> {
    preset: &'a str,
    detuning_mode: &'a str,
    direction: &'a str,
    cat_alpha: f64,
    tau: f64,
    omega_center_c: f64,
    omega_center_w: f64,
    rel_tol: f64,
    zero_floor: f64,
    max_intervals: usize,
    epsilons: &'a [f64],
    params: DeviceParams,
}

fn check_tol(t: f64) -> std::result::Result<(), String> {
    if t.is_finite() && t > 0.0 && t < 1.0 {
        Ok(())
    } else {
        Err(format!("relative tolerance must lie in (0, 1), got {t}"))
    }
}

pub fn parse_mode(s: &str) -> std::result::Result<DetuningMode, String> {
    match s {
        "effective" => Ok(DetuningMode::Effective),
        "bare" => Ok(DetuningMode::Bare),
        _ => Err(format!("unknown detuning_mode '{s}' (effective, bare)")),
    }
}

pub fn mode_name(m: DetuningMode) -> &'static str {
    match m {
        DetuningMode::Effective => "effective",
        DetuningMode::Bare => "bare",
    }
}

pub fn parse_direction(s: &str) -> std::result::Result<Direction, String> {
    match s {
        "forward" => Ok(Direction::Forward),
        "reversed" => Ok(Direction::Reversed),
        _ => Err(format!("unknown direction '{s}' (forward, reversed)")),
    }
}
