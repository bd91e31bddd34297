//! Fit reports: machine-readable JSON (stable key order) and a
//! human-readable text block.

use serde::Serialize;
use spin_toolkit::fit::FitResult;

use crate::exit::CliResult;
use crate::table::write_atomic;

#[derive(Serialize)]
struct ParameterOut<'a> {
    name: &'a str,
    value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    sigma: Option<f64>,
}

#[derive(Serialize)]
struct ReportOut<'a> {
    fit: &'a str,
    converged: bool,
    iterations: usize,
    rss: f64,
    parameters: Vec<ParameterOut<'a>>,
    warnings: &'a [String],
}

pub fn to_json(kind: &str, fit: &FitResult) -> String {
    let parameters = fit
        .names
        .iter()
        .enumerate()
        .map(|(i, name)| ParameterOut {
            name,
            value: fit.values[i],
            sigma: fit.uncertainties.get(i).copied(),
        })
        .collect();
    let report = ReportOut {
        fit: kind,
        converged: fit.converged,
        iterations: fit.iterations,
        rss: fit.rss,
        parameters,
        warnings: &fit.warnings,
    };
    let mut out = serde_json::to_string_pretty(&report).expect("report serialization");
    out.push('\n');
    out
}

pub fn to_text(kind: &str, fit: &FitResult) -> String {
    let mut out = String::new();
    out.push_str(&format!("fit: {kind}\n"));
    out.push_str(&format!(
        "converged: {} after {} iterations, rss = {}\n",
        if fit.converged { "yes" } else { "NO" },
        fit.iterations,
        fit.rss
    ));
    let width = fit.names.iter().map(String::len).max().unwrap_or(0);
    for (i, name) in fit.names.iter().enumerate() {
        match fit.uncertainties.get(i) {
            Some(s) => out.push_str(&format!(
                "  {name:<width$}  = {} ± {}\n",
                fit.values[i], s
            )),
            None => out.push_str(&format!("  {name:<width$}  = {}\n", fit.values[i])),
        }
    }
    for w in &fit.warnings {
        out.push_str(&format!("  warning: {w}\n"));
    }
    out
}

/// Print the text report to stdout and optionally stage the JSON report
/// to a file.
pub fn emit(kind: &str, fit: &FitResult, json_path: Option<&str>) -> CliResult<()> {
    print!("{}", to_text(kind, fit));
    if let Some(path) = json_path {
        if path == "-" {
            print!("{}", to_json(kind, fit));
        } else {
            write_atomic(std::path::Path::new(path), &to_json(kind, fit))?;
        }
    }
    Ok(())
}
