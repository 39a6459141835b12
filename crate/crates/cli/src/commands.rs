use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use oemlink::spectra::output_covariance_with;
use oemlink::steadystate::{build_state_space, check_stability, solve_fixed_point};
use oemlink::{derive_quantities, evaluate_point, reduce_to_pair, validate_params, ModeOrder};

use crate::config::{RunConfig, DEFAULT_PRESET};
use crate::csv::{fmt_f64, provenance, sweep_csv};
use crate::error::{CliError, Result};
use crate::figure::{emit_figure, Figure};
use crate::sweep::run_sweep;

#[derive(Debug, Parser)]
#[command(
    name = "oemlink",
    version,
    about = "Optical-microwave interface model: entanglement and teleportation fidelity"
)]
pub struct Cli {
    /// Flat TOML configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Named parameter preset the configuration starts from.
    #[arg(long, global = true)]
    pub preset: Option<String>,
    /// Output directory for CSV files (stdout if omitted, `.` for figures).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Relative tolerance of the frequency quadrature.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Worker threads for sweeps (0 = one per core).
    #[arg(long, global = true, default_value_t = 0)]
    pub jobs: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check parameter invariants and regime-of-validity advisories.
    Validate,
    /// Single-photon couplings, drive amplitudes and thermal occupations.
    Derive,
    /// Classical fixed point, drift/diffusion matrices and stability.
    Steady,
    /// Output covariance matrix and logarithmic negativity.
    Entangle,
    /// Teleportation fidelities in the configured direction.
    Teleport,
    /// Run the sweep described in the configuration file.
    Sweep,
    /// Regenerate figure data (fig2, fig3, fig4, sm1).
    Figure { name: String },
}

pub fn load_config(cli: &Cli) -> Result<RunConfig> {
    let cfg = match &cli.config {
        Some(path) => RunConfig::load(path, cli.preset.as_deref())?,
        None => RunConfig::from_preset(cli.preset.as_deref().unwrap_or(DEFAULT_PRESET))?,
    };
    match cli.tol {
        Some(t) => cfg.with_tol(t),
        None => Ok(cfg),
    }
}

/// Runs one command and returns the text for stdout.
pub fn run(cli: &Cli) -> Result<String> {
    if let Command::Figure { name } = &cli.command {
        // Reject the name before doing any work.
        Figure::parse(name)?;
    }
    let cfg = load_config(cli)?;
    match &cli.command {
        Command::Validate => validate(&cfg),
        Command::Derive => derive(&cfg),
        Command::Steady => steady(&cfg),
        Command::Entangle => entangle(&cfg),
        Command::Teleport => teleport(&cfg),
        Command::Sweep => sweep(&cfg, cli),
        Command::Figure { name } => {
            let out = cli.out.clone().unwrap_or_else(|| PathBuf::from("."));
            let path = emit_figure(Figure::parse(name)?, &cfg, &out, cli.jobs)?;
            Ok(format!("wrote {}\n", path.display()))
        }
    }
}

fn validate(cfg: &RunConfig) -> Result<String> {
    let report = validate_params(&cfg.params);
    let mut s = String::new();
    for v in &report.violations {
        writeln!(s, "violation: {}: {}", v.field, v.message).unwrap();
    }
    for a in &report.advisories {
        writeln!(s, "advisory: {a}").unwrap();
    }
    if let Some(v) = report.violations.first() {
        return Err(CliError::Usage(format!("{s}invalid parameter '{}'", v.field)));
    }
    writeln!(s, "ok").unwrap();
    Ok(s)
}

fn derive(cfg: &RunConfig) -> Result<String> {
    let dq = derive_quantities(&cfg.params)?;
    let mut s = provenance("derived quantities", cfg);
    for (k, v) in [
        ("g0c", dq.g0c),
        ("g0w", dq.g0w),
        ("drive_c", dq.drive_c),
        ("drive_w", dq.drive_w),
        ("omega_c", dq.omega_c),
        ("n_th_mech", dq.n_th_mech),
        ("n_th_w", dq.n_th_w),
        ("n_th_c", dq.n_th_c),
    ] {
        writeln!(s, "{k} = {}", fmt_f64(v)).unwrap();
    }
    Ok(s)
}

fn steady(cfg: &RunConfig) -> Result<String> {
    let dq = derive_quantities(&cfg.params)?;
    let ss = solve_fixed_point(&cfg.params, &dq, cfg.mode)?;
    let model = build_state_space(&cfg.params, &dq, &ss);
    let verdict = check_stability(&model)?;
    let mut s = provenance("steady state", cfg);
    s.push_str(&ss.to_report());
    writeln!(s, "spectral_abscissa = {}", fmt_f64(verdict.abscissa)).unwrap();
    writeln!(s, "stability_margin = {}", fmt_f64(verdict.margin)).unwrap();
    s.push_str(&model.to_report());
    Ok(s)
}

fn entangle(cfg: &RunConfig) -> Result<String> {
    let dq = derive_quantities(&cfg.params)?;
    let ss = solve_fixed_point(&cfg.params, &dq, cfg.mode)?;
    let model = build_state_space(&cfg.params, &dq, &ss);
    let cm = output_covariance_with(&model, &cfg.window, &cfg.quad)?;
    let pair = reduce_to_pair(&cm, ModeOrder::default());
    let phys = pair.physicality();
    let e = oemlink::log_negativity(&pair)?;
    let mut s = provenance("output covariance and entanglement", cfg);
    writeln!(s, "# epsilon = {}", fmt_f64(cfg.window.epsilon(cfg.params.omega_m))).unwrap();
    s.push_str(&cm.to_csv());
    writeln!(s, "# E_N = {}", fmt_f64(e.log_neg)).unwrap();
    writeln!(s, "# eta = {}", fmt_f64(e.eta)).unwrap();
    writeln!(s, "# sigma = {}", fmt_f64(e.sigma)).unwrap();
    writeln!(s, "# F_opt = {}", fmt_f64(e.fopt)).unwrap();
    writeln!(s, "# physicality_margin = {}", fmt_f64(phys.margin)).unwrap();
    Ok(s)
}

fn teleport(cfg: &RunConfig) -> Result<String> {
    let r = evaluate_point(&cfg.operating_point())?;
    let mut s = provenance("teleportation fidelity", cfg);
    writeln!(s, "direction = {}", cfg.direction.label()).unwrap();
    writeln!(s, "stable = {}", r.is_stable()).unwrap();
    let (Some(e), Some(cat), Some(coh)) = (r.entanglement, r.cat, r.coherent) else {
        return Err(oemlink::Error::NoStationaryState { abscissa: r.stability.abscissa }.into());
    };
    writeln!(s, "cat_alpha = {}", fmt_f64(cfg.cat_alpha)).unwrap();
    writeln!(s, "F_cat = {}", fmt_f64(cat.fidelity)).unwrap();
    writeln!(s, "F_coherent = {}", fmt_f64(coh.fidelity)).unwrap();
    writeln!(s, "F_opt = {}", fmt_f64(e.fopt)).unwrap();
    writeln!(s, "E_N = {}", fmt_f64(e.log_neg)).unwrap();
    writeln!(s, "det_gamma = {}", fmt_f64(cat.gamma_det)).unwrap();
    writeln!(s, "above_no_cloning = {}", cat.beats_no_cloning()).unwrap();
    Ok(s)
}

fn sweep(cfg: &RunConfig, cli: &Cli) -> Result<String> {
    let spec = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| CliError::Usage("the configuration has no sweep ('axis', 'start', 'stop', 'points')".into()))?;
    let table = run_sweep(spec, cli.jobs)?;
    let text = sweep_csv(&format!("sweep over {}", spec.axis.name()), cfg, &[table]);
    match &cli.out {
        None => Ok(text),
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.clone(), source })?;
            let path = dir.join("sweep.csv");
            std::fs::write(&path, text).map_err(|source| CliError::Io { path: path.clone(), source })?;
            Ok(format!("wrote {}\n", path.display()))
        }
    }
}
