//! Deterministic CSV emission: fixed 12-significant-digit floats and a
//! `#` header recording everything needed to reproduce the numbers.

use std::fmt::Write as _;

use crate::config::{mode_name, RunConfig};
use crate::sweep::SweepTable;

pub const COLUMNS: &str = "x_value,observable,epsilon,value,f_opt,status";

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.11e}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

/// Provenance lines, each starting with `# `.
pub fn provenance(title: &str, cfg: &RunConfig) -> String {
    let mut s = String::new();
    let mut line = |k: &str, v: &dyn std::fmt::Display| writeln!(s, "# {k} = {v}").unwrap();
    line("generator", &format!("oemlink {}", env!("CARGO_PKG_VERSION")));
    line("title", &title);
    line("preset", &cfg.preset);
    line("config_sha256", &cfg.fingerprint());
    line("constants", &oemlink::constants::CONSTANTS_VERSION);
    line("rel_tol", &fmt_f64(cfg.quad.rel_tol));
    line("zero_floor", &fmt_f64(cfg.quad.zero_floor));
    line("max_intervals", &cfg.quad.max_intervals);
    line("detuning_mode", &mode_name(cfg.mode));
    line("microwave_drive", &"E_w = sqrt(2 P_w kappa_w / (hbar omega_w)) (assumed, mirrors the optical drive)");
    s
}

/// Long-format table: one line per (grid point, observable). Values of
/// unstable points are left empty and flagged in `status`.
pub fn sweep_csv(title: &str, cfg: &RunConfig, tables: &[SweepTable]) -> String {
    let mut s = provenance(title, cfg);
    if let Some(t) = tables.first() {
        let spec = &t.spec;
        writeln!(s, "# axis = {} [{}]", spec.axis.name(), spec.axis.unit()).unwrap();
        writeln!(s, "# direction = {}", spec.base.direction.label()).unwrap();
        writeln!(s, "# cat_alpha = {}", fmt_f64(spec.base.cat_alpha)).unwrap();
        let wm = spec.base.params.omega_m;
        writeln!(s, "# omega_center_c = {} [omega_m]", fmt_f64(spec.base.window.omega_center_c / wm)).unwrap();
        writeln!(s, "# omega_center_w = {} [omega_m]", fmt_f64(spec.base.window.omega_center_w / wm)).unwrap();
    }
    writeln!(s, "{COLUMNS}").unwrap();
    for t in tables {
        for row in &t.rows {
            let status = if row.stable { "ok" } else { "unstable" };
            for (obs, v) in t.spec.outputs.iter().zip(&row.values) {
                writeln!(
                    s,
                    "{},{},{},{},{},{status}",
                    fmt_f64(row.x),
                    obs.name(),
                    fmt_f64(row.epsilon),
                    fmt_opt(*v),
                    fmt_opt(row.f_opt)
                )
                .unwrap();
            }
        }
    }
    s
}
