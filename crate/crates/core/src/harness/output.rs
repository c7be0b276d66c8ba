//! CSV and JSON encodings of traces and summaries.
//!
//! Numbers use 12 significant digits in the style of C's `%.12g`, so output
//! is byte-stable across runs and platforms.

use std::path::Path;

use serde::Serialize;

use super::run::{RegretTrace, SummaryStats, TraceRow};
use crate::error::{Error, Result};

pub const TRACE_HEADER: &str = "round,action,reward,instant_regret,cum_regret,weight,level,active_size,beta_hat";
pub const SUMMARY_HEADER: &str = "round,mean_cum_regret,std_cum_regret,min,max";

/// `%.12g`: shortest of fixed or scientific notation with 12 significant
/// digits and trailing zeros removed.
pub fn format_g12(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..12).contains(&exp) {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (11 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn opt_f(v: Option<f64>) -> String {
    v.map(format_g12).unwrap_or_default()
}

fn opt_u(v: Option<usize>) -> String {
    v.map(|u| u.to_string()).unwrap_or_default()
}

pub fn trace_to_csv(trace: &RegretTrace) -> String {
    let mut out = String::with_capacity(64 * (trace.rows.len() + 1));
    out.push_str(TRACE_HEADER);
    out.push('\n');
    for r in &trace.rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            r.round,
            r.action,
            format_g12(r.reward),
            format_g12(r.instant_regret),
            format_g12(r.cum_regret),
            opt_f(r.weight),
            opt_u(r.level),
            opt_u(r.active_size),
            opt_f(r.beta_hat),
        ));
    }
    out
}

/// Reads rows written by [`trace_to_csv`].
pub fn parse_trace_csv(text: &str, origin: &Path) -> Result<Vec<TraceRow>> {
    let err = |line: usize, message: String| Error::Parse {
        path: origin.to_path_buf(),
        message: format!("line {line}: {message}"),
    };
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == TRACE_HEADER => {}
        Some(h) => return Err(err(1, format!("unexpected header `{h}`"))),
        None => return Err(err(1, "empty file".into())),
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let n = i + 2;
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != 9 {
            return Err(err(n, format!("expected 9 cells, found {}", cells.len())));
        }
        let f = |s: &str| s.trim().parse::<f64>().map_err(|_| err(n, format!("bad number `{s}`")));
        let u = |s: &str| s.trim().parse::<usize>().map_err(|_| err(n, format!("bad integer `{s}`")));
        let of = |s: &str| if s.trim().is_empty() { Ok(None) } else { f(s).map(Some) };
        let ou = |s: &str| if s.trim().is_empty() { Ok(None) } else { u(s).map(Some) };
        rows.push(TraceRow {
            round: u(cells[0])?,
            action: u(cells[1])?,
            reward: f(cells[2])?,
            instant_regret: f(cells[3])?,
            cum_regret: f(cells[4])?,
            weight: of(cells[5])?,
            level: ou(cells[6])?,
            active_size: ou(cells[7])?,
            beta_hat: of(cells[8])?,
        });
    }
    Ok(rows)
}

pub fn summary_to_csv(summary: &SummaryStats) -> Result<String> {
    if summary.rows.is_empty() {
        return Err(Error::invalid("refusing to emit an empty summary"));
    }
    let mut out = String::from(SUMMARY_HEADER);
    out.push('\n');
    for r in &summary.rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.round,
            format_g12(r.mean_cum_regret),
            format_g12(r.std_cum_regret),
            format_g12(r.min),
            format_g12(r.max),
        ));
    }
    Ok(out)
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string_pretty(value).map_err(|e| Error::invalid(format!("json encoding failed: {e}")))
}

/// Writes `contents`, creating parent directories.
pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}
