//! Experiment configurations and the experiments they run.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::plot::{line_chart, Series};
use super::report::{cell, Output, Report, Table};
use crate::covers::{experiment_petersen, experiment_sw_packing, sw_normal_cover, CoverOptions, SwOptions, DEFAULT_MAX_VERTICES};
use crate::error::{Error, Result};
use crate::gh::{family_precompactness, DivergenceRule, FamilyMember};
use crate::invariants::{sandwich_check, ExactCaps};
use crate::spaces::bundled;

/// A named experiment with its parameters. Identical configs give
/// byte-identical reports.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: String,
    #[serde(default)]
    pub params: BTreeMap<String, Value>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub outputs: Outputs,
}

/// Where `run` writes; absent entries are skipped, and the JSON report goes
/// to stdout when no path is given anywhere.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub json: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plot: Option<PathBuf>,
}

/// Experiment names accepted by `run` and `experiment`.
pub const EXPERIMENTS: [&str; 4] = ["sandwich", "sw-packing", "sw-normal", "petersen"];

/// Parses `key=value,key=value`; list values use `;`.
pub fn parse_params(text: &str) -> Result<BTreeMap<String, Value>> {
    let mut out = BTreeMap::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (k, v) = part.split_once('=').ok_or_else(|| Error::Input(format!("parameter `{part}` is not key=value")))?;
        out.insert(k.trim().to_string(), Value::String(v.trim().to_string()));
    }
    Ok(out)
}

/// Typed access to a parameter map, restricted to known keys.
pub(super) struct Params<'a> {
    experiment: &'a str,
    map: &'a BTreeMap<String, Value>,
}

impl<'a> Params<'a> {
    fn new(cfg: &'a ExperimentConfig, allowed: &[&str]) -> Result<Self> {
        Self::from_map(&cfg.experiment, &cfg.params, allowed)
    }

    pub(super) fn from_map(experiment: &'a str, map: &'a BTreeMap<String, Value>, allowed: &[&str]) -> Result<Self> {
        if let Some(k) = map.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(Error::Input(format!("`{experiment}` has no parameter `{k}`; accepted: {}", allowed.join(", "))));
        }
        Ok(Self { experiment, map })
    }

    pub(super) fn required(&self, key: &str) -> Result<f64> {
        if !self.map.contains_key(key) {
            return Err(Error::Input(format!("`{}` needs parameter `{key}`", self.experiment)));
        }
        self.f64(key, f64::NAN)
    }

    fn bad(&self, key: &str, v: &Value) -> Error {
        Error::Input(format!("parameter `{key}` of `{}` cannot be read from {v}", self.experiment))
    }

    pub(super) fn f64(&self, key: &str, default: f64) -> Result<f64> {
        match self.map.get(key) {
            None => Ok(default),
            Some(Value::Number(n)) => n.as_f64().ok_or_else(|| self.bad(key, &Value::Number(n.clone()))),
            Some(v @ Value::String(s)) => s.parse().map_err(|_| self.bad(key, v)),
            Some(v) => Err(self.bad(key, v)),
        }
    }

    pub(super) fn usize(&self, key: &str, default: usize) -> Result<usize> {
        match self.map.get(key) {
            None => Ok(default),
            Some(v @ Value::Number(n)) => n.as_u64().map(|u| u as usize).ok_or_else(|| self.bad(key, v)),
            Some(v @ Value::String(s)) => s.parse().map_err(|_| self.bad(key, v)),
            Some(v) => Err(self.bad(key, v)),
        }
    }

    pub(super) fn f64_list(&self, key: &str, default: &[f64]) -> Result<Vec<f64>> {
        match self.map.get(key) {
            None => Ok(default.to_vec()),
            Some(Value::Array(a)) => a.iter().map(|v| v.as_f64().ok_or_else(|| self.bad(key, v))).collect(),
            Some(Value::Number(n)) => Ok(vec![n.as_f64().unwrap_or(f64::NAN)]),
            Some(v @ Value::String(s)) => s.split(';').map(|p| p.trim().parse().map_err(|_| self.bad(key, v))).collect(),
            Some(v) => Err(self.bad(key, v)),
        }
    }

    /// `a..b` (inclusive), `a;b;c`, a number, or a JSON array.
    fn range(&self, key: &str, default: std::ops::RangeInclusive<usize>) -> Result<Vec<usize>> {
        match self.map.get(key) {
            None => Ok(default.collect()),
            Some(v @ Value::String(s)) => {
                if let Some((a, b)) = s.split_once("..") {
                    let a: usize = a.trim().parse().map_err(|_| self.bad(key, v))?;
                    let b: usize = b.trim().parse().map_err(|_| self.bad(key, v))?;
                    Ok((a..=b).collect())
                } else {
                    s.split(';').map(|p| p.trim().parse().map_err(|_| self.bad(key, v))).collect()
                }
            }
            Some(v @ Value::Number(n)) => Ok(vec![n.as_u64().ok_or_else(|| self.bad(key, v))? as usize]),
            Some(Value::Array(a)) => a.iter().map(|v| v.as_u64().map(|u| u as usize).ok_or_else(|| self.bad(key, v))).collect(),
            Some(v) => Err(self.bad(key, v)),
        }
    }
}

/// Runs the configured experiment.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Output> {
    match cfg.experiment.as_str() {
        "sandwich" => sandwich(cfg),
        "sw-packing" => sw_packing(cfg),
        "sw-normal" => sw_normal(cfg),
        "petersen" => petersen(cfg),
        other => Err(Error::Input(format!("unknown experiment `{other}`; known: {}", EXPERIMENTS.join(", ")))),
    }
}

fn sandwich(cfg: &ExperimentConfig) -> Result<Output> {
    let p = Params::new(cfg, &["eps"])?;
    let eps = p.f64_list("eps", &[0.5])?;
    let mut rows = Vec::new();
    for space in bundled()? {
        for &e in &eps {
            rows.push(sandwich_check(&space, e, ExactCaps::default())?);
        }
    }
    let mut table = Table::new(&["space", "epsilon", "cov", "cap", "cov_half", "holds"]);
    for r in &rows {
        table.push(vec![r.space.clone(), cell(r.epsilon), cell(r.cov), cell(r.cap), cell(r.cov_half), cell(r.holds)]);
    }
    let pass = rows.iter().all(|r| r.holds);
    let series = vec![
        Series::new("Cov_ε", rows.iter().enumerate().map(|(i, r)| (i as f64, r.cov as f64)).collect()),
        Series::new("Cap_ε", rows.iter().enumerate().map(|(i, r)| (i as f64, r.cap as f64)).collect()),
        Series::new("Cov_ε/2", rows.iter().enumerate().map(|(i, r)| (i as f64, r.cov_half as f64)).collect()),
    ];
    let plot = line_chart("Covering and packing numbers", "row", "count", &series);
    Ok(Output { report: Report::new("experiment", cfg, pass, &rows)?, table, plot: Some(plot) })
}

fn sw_options(p: &Params) -> Result<SwOptions> {
    let h = p.f64("mesh_h", 0.02)?;
    let mut opts = SwOptions::new(h);
    opts.r_trunc = p.f64("r_trunc", opts.r_trunc)?;
    opts.margin = p.f64("margin", opts.margin)?;
    opts.max_vertices = p.usize("max_vertices", DEFAULT_MAX_VERTICES)?;
    opts.covering_eps = p.f64_list("eps", &[1.0])?;
    Ok(opts)
}

fn sw_packing(cfg: &ExperimentConfig) -> Result<Output> {
    let p = Params::new(cfg, &["k", "mesh_h", "r_trunc", "margin", "max_vertices", "eps"])?;
    let ks = p.range("k", 3..=10)?;
    let opts = sw_options(&p)?;
    let report = experiment_sw_packing(&ks, &opts)?;
    let mut header = vec!["k", "r_k", "cover_vertices", "truncated", "radius", "count", "nearest_lift", "count_ok", "separation_ok"];
    let eps_cols: Vec<String> = opts.covering_eps.iter().map(|e| format!("cov_{e}")).collect();
    header.extend(eps_cols.iter().map(String::as_str));
    let mut table = Table::new(&header);
    for r in &report.rows {
        let mut row = vec![
            cell(r.k),
            cell(r.r_k),
            cell(r.cover_vertices),
            cell(r.truncated),
            cell(r.radius),
            cell(r.lifts),
            cell(r.nearest_lift),
            cell(r.count_ok),
            cell(r.separation_ok),
        ];
        row.extend(r.covering.iter().map(|c| cell(c.1)));
        table.push(row);
    }
    let mut series = vec![
        Series::new("lifts of o", report.rows.iter().map(|r| (r.k as f64, r.lifts as f64)).collect()),
        Series::new("k", report.rows.iter().map(|r| (r.k as f64, r.k as f64)).collect()),
    ];
    for (j, e) in opts.covering_eps.iter().enumerate() {
        series.push(Series::new(format!("Cov_{e}"), report.rows.iter().map(|r| (r.k as f64, r.covering[j].1 as f64)).collect()));
    }
    let plot = line_chart("Lifts in the pointed ball of the universal cover", "k", "count", &series);
    Ok(Output { report: Report::new("experiment", cfg, report.pass, &report)?, table, plot: Some(plot) })
}

fn sw_normal(cfg: &ExperimentConfig) -> Result<Output> {
    let p = Params::new(cfg, &["k", "mesh_h", "r_trunc", "max_vertices", "eps"])?;
    let ks = p.range("k", 3..=10)?;
    let h = p.f64("mesh_h", 0.02)?;
    let eps = p.f64_list("eps", &[1.0, 0.5])?;
    let mut opts = CoverOptions::new(p.f64("r_trunc", 1.0)?);
    opts.max_vertices = p.usize("max_vertices", DEFAULT_MAX_VERTICES)?;
    let covers = ks.iter().map(|&k| sw_normal_cover(k, h, &opts).map(|c| (k, c.2))).collect::<Result<Vec<_>>>()?;
    let members: Vec<FamilyMember> = covers.iter().map(|(k, c)| FamilyMember { label: format!("k={k}"), parameter: *k as f64, space: &c.space }).collect();
    let report = family_precompactness("sw-normal", &members, &eps, None, DivergenceRule::default())?;
    Ok(family_output("experiment", cfg, &report)?)
}

/// Report, table and plot for a family verdict.
pub fn family_output(command: &str, cfg: impl Serialize, report: &crate::gh::PrecompactnessReport) -> Result<Output> {
    let mut header = vec!["member".to_string(), "parameter".into(), "points".into()];
    for e in &report.eps {
        header.push(format!("cov_{e}"));
        header.push(format!("exact_{e}"));
    }
    let mut table = Table { header, rows: Vec::new() };
    for m in &report.members {
        let mut row = vec![m.label.clone(), cell(m.parameter), cell(m.points)];
        for (c, x) in m.counts.iter().zip(&m.exact) {
            row.push(cell(c));
            row.push(cell(x));
        }
        table.push(row);
    }
    let series: Vec<Series> = report
        .eps
        .iter()
        .enumerate()
        .map(|(j, e)| Series::new(format!("Cov_{e}"), report.members.iter().map(|m| (m.parameter, m.counts[j] as f64)).collect()))
        .collect();
    let plot = line_chart(&format!("Covering numbers over {}", report.family), "parameter", "count", &series);
    Ok(Output { report: Report::new(command, cfg, report.is_bounded(), report)?, table, plot: Some(plot) })
}

fn petersen(cfg: &ExperimentConfig) -> Result<Output> {
    let p = Params::new(cfg, &["mesh_h", "eps", "r_trunc", "detours"])?;
    let h = p.f64("mesh_h", 0.05)?;
    let eps = p.f64("eps", 0.05)?;
    let r_trunc = p.f64("r_trunc", 2.0 * PI + 0.5)?;
    let detours = p.f64_list("detours", &[0.2, 0.1, 0.05])?;
    let report = experiment_petersen(h, eps, r_trunc, &detours)?;
    let mut table = Table::new(&["detour", "cover_vertices", "truncated", "max_distance", "bound", "within_bound", "lifts"]);
    for r in &report.rows {
        table.push(vec![
            cell(r.detour),
            cell(r.cover_vertices),
            cell(r.truncated),
            cell(r.max_distance),
            cell(r.bound),
            cell(r.within_bound),
            cell(r.lifts),
        ]);
    }
    let pass = report.increasing && report.rows.iter().all(|r| r.within_bound);
    let series = vec![Series::new("lifts of o in B_2π", report.rows.iter().map(|r| (r.detour, r.lifts as f64)).collect())];
    let plot = line_chart("Lifts as the detour scale shrinks", "detour scale", "lifts", &series);
    Ok(Output { report: Report::new("experiment", cfg, pass, &report)?, table, plot: Some(plot) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn params_parse_ranges_and_lists() {
        let map = parse_params("k=3..5,eps=1;0.5,mesh_h=0.1").unwrap();
        let cfg = ExperimentConfig { experiment: "x".into(), params: map, seed: 0, outputs: Outputs::default() };
        let p = Params::new(&cfg, &["k", "eps", "mesh_h"]).unwrap();
        assert_eq!(p.range("k", 1..=1).unwrap(), vec![3, 4, 5]);
        assert_eq!(p.f64_list("eps", &[]).unwrap(), vec![1.0, 0.5]);
        assert_eq!(p.f64("mesh_h", 0.0).unwrap(), 0.1);
        assert!(Params::new(&cfg, &["k"]).is_err());
    }

    #[test]
    fn config_rejects_unknown_fields() {
        let text = r#"{"experiment":"sandwich","colour":"red"}"#;
        assert!(serde_json::from_str::<ExperimentConfig>(text).is_err());
    }
}
