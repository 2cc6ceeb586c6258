//! CSV tables. Reals carry 9 significant digits, lines end in LF.

use std::path::Path;

use crate::dynamics::Alpha;
use crate::error::Result;
use crate::experiments::{AveragedSeries, PatternResult, SeriesPoint, SweepRow, SweepTable};
use crate::meanfield::MfTrajectory;

pub const SWEEP_HEADER: &str = "alpha,mean_Tc,se_Tc,censored_frac,runs";
pub const SERIES_HEADER: &str = "t,eta_mean,rho_plus_mean,ncl_mean,s1_mean";
pub const PATTERN_HEADER: &str = "t,rho_plus_mean,rho_plus_se";
pub const RUN_HEADER: &str = "t,eta,rho_plus,ncl,s1";
pub const MEANFIELD_HEADER: &str = "t,rho_plus";
pub const NETWORKS_HEADER: &str = "topology,nodes_mean,mean_degree,alpha_opt,mean_Tc_at_opt,se_Tc_at_opt";

/// Nine significant digits with trailing zeros kept (`1` → `1.00000000`).
/// Exponent notation outside `1e-4 ≤ |x| < 1e9`.
pub fn format_real(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0.00000000".into();
    }
    let sci = format!("{x:.8e}");
    let exp: i32 = sci[sci.find('e').unwrap() + 1..].parse().unwrap();
    if (-4..9).contains(&exp) {
        format!("{x:.*}", (8 - exp) as usize)
    } else {
        sci
    }
}

pub fn format_alpha(a: Alpha) -> String {
    match a {
        Alpha::Finite(v) => format_real(v),
        Alpha::Infinity => "inf".into(),
    }
}

fn opt_real(x: Option<f64>) -> String {
    x.map_or_else(|| "NA".into(), format_real)
}

fn table<I: IntoIterator<Item = String>>(header: &str, rows: I) -> String {
    let mut out = String::with_capacity(64);
    out.push_str(header);
    out.push('\n');
    for r in rows {
        out.push_str(&r);
        out.push('\n');
    }
    out
}

pub fn render_sweep(rows: &[SweepRow]) -> String {
    table(
        SWEEP_HEADER,
        rows.iter().map(|r| {
            format!(
                "{},{},{},{},{}",
                format_alpha(r.alpha),
                opt_real(r.mean_tc),
                format_real(r.se_tc),
                format_real(r.censored_fraction),
                r.runs
            )
        }),
    )
}

pub fn render_series(s: &AveragedSeries) -> String {
    table(
        SERIES_HEADER,
        s.times.iter().enumerate().map(|(k, t)| {
            format!(
                "{t},{},{},{},{}",
                format_real(s.eta[k]),
                format_real(s.rho_plus[k]),
                format_real(s.n_clusters[k]),
                format_real(s.s1[k])
            )
        }),
    )
}

pub fn render_run(series: &[SeriesPoint]) -> String {
    table(
        RUN_HEADER,
        series.iter().map(|p| {
            format!("{},{},{},{},{}", p.t, format_real(p.eta), format_real(p.rho_plus), p.n_clusters, format_real(p.s1))
        }),
    )
}

pub fn render_pattern(p: &PatternResult) -> String {
    table(
        PATTERN_HEADER,
        p.rho_mean
            .iter()
            .zip(&p.rho_se)
            .enumerate()
            .map(|(t, (m, se))| format!("{t},{},{}", format_real(*m), format_real(*se))),
    )
}

pub fn render_meanfield(traj: &MfTrajectory) -> String {
    table(
        MEANFIELD_HEADER,
        traj.times.iter().zip(&traj.rho_values).map(|(t, r)| format!("{},{}", format_real(*t), format_real(*r))),
    )
}

pub fn render_networks(tables: &[SweepTable]) -> String {
    table(
        NETWORKS_HEADER,
        tables.iter().map(|t| {
            let best = t.argmin.map(|i| &t.rows[i]);
            // topology specs contain commas
            format!(
                "\"{}\",{},{},{},{},{}",
                t.topology,
                format_real(t.mean_nodes),
                format_real(t.mean_degree),
                best.map_or_else(|| "NA".into(), |r| format_alpha(r.alpha)),
                opt_real(best.and_then(|r| r.mean_tc)),
                best.map_or_else(|| "NA".into(), |r| format_real(r.se_tc)),
            )
        }),
    )
}

pub fn write_csv(path: &Path, contents: &str) -> Result<()> {
    super::write_file(path, contents.as_bytes())
}
