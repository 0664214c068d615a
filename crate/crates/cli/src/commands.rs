//! The four subcommands and the files they write.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{Map, Value};

use resil_core::{
    aggregate, probability_curve, simulate_year, size_system, summary, survival_probability,
    SiteSeries, SizingOutcome, SurvivalSeries, SystemDesign, TimeBase,
};

use crate::config::RunConfig;
use crate::CliError;

/// Writes `contents` to `dir/name` through a temporary file and a rename.
pub fn write_atomic(dir: &Path, name: &str, contents: &[u8]) -> Result<PathBuf, CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let target = dir.join(name);
    let tmp = dir.join(format!(".{name}.tmp"));
    let mut f = fs::File::create(&tmp).map_err(|e| CliError::io(&tmp, e))?;
    f.write_all(contents)
        .and_then(|_| f.sync_all())
        .map_err(|e| CliError::io(&tmp, e))?;
    fs::rename(&tmp, &target).map_err(|e| CliError::io(&target, e))?;
    Ok(target)
}

fn to_json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(value).expect("serializable report");
    out.push(b'\n');
    out
}

/// Contents of `design.json`. Sizes and cost are null when infeasible.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DesignReport {
    pub pv_kw: Option<f64>,
    pub storage_kw: Option<f64>,
    pub storage_kwh: Option<f64>,
    pub gen_kw: Option<f64>,
    pub cost: Option<f64>,
    pub feasible: bool,
}

impl From<&SizingOutcome> for DesignReport {
    fn from(o: &SizingOutcome) -> Self {
        match o {
            SizingOutcome::Feasible { design, cost } => Self {
                pv_kw: Some(design.pv_kw),
                storage_kw: Some(design.storage_kw),
                storage_kwh: Some(design.storage_kwh),
                gen_kw: Some(design.gen_kw),
                cost: Some(*cost),
                feasible: true,
            },
            SizingOutcome::Infeasible => Self {
                pv_kw: None,
                storage_kw: None,
                storage_kwh: None,
                gen_kw: None,
                cost: None,
                feasible: false,
            },
        }
    }
}

/// Contents of `summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryReport {
    pub min_hours: f64,
    pub max_hours: f64,
    pub mean_hours: f64,
    /// Keyed by duration in hours, in configured order.
    pub prob_at: Map<String, Value>,
}

pub fn summary_report(r: &SurvivalSeries, cfg: &RunConfig) -> SummaryReport {
    let s = summary(r);
    let mut prob_at = Map::new();
    for &d in &cfg.report_durations {
        let p = survival_probability(r, d, None, cfg.survival_comparator)
            .expect("durations validated positive and r non-empty");
        prob_at.insert(d.to_string(), Value::from(p));
    }
    SummaryReport {
        min_hours: s.min_hours,
        max_hours: s.max_hours,
        mean_hours: s.mean_hours,
        prob_at,
    }
}

fn sweep(
    series: &SiteSeries,
    design: &SystemDesign,
    tb: &TimeBase,
) -> Result<SurvivalSeries, CliError> {
    simulate_year(series, design, tb).map_err(|e| CliError::Invalid(e.to_string()))
}

fn write_sweep(r: &SurvivalSeries, cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    Ok(vec![
        write_atomic(&cfg.output_dir, "r.csv", r.to_csv().as_bytes())?,
        write_atomic(
            &cfg.output_dir,
            "summary.json",
            &to_json(&summary_report(r, cfg)),
        )?,
    ])
}

fn write_stats(r: &SurvivalSeries, cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let tb = r.timebase();
    let curve = probability_curve(r, None, cfg.survival_comparator)
        .map_err(|e| CliError::Invalid(e.to_string()))?;
    let agg = aggregate(r, tb, cfg.survival_comparator);
    Ok(vec![
        write_atomic(&cfg.output_dir, "curve.csv", curve.to_csv().as_bytes())?,
        write_atomic(&cfg.output_dir, "by_hour.csv", agg.by_hour_csv().as_bytes())?,
        write_atomic(
            &cfg.output_dir,
            "by_month.csv",
            agg.by_month_csv().as_bytes(),
        )?,
    ])
}

/// Sweeps the configured design over the year: `r.csv`, `summary.json`.
pub fn cmd_simulate(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let tb = cfg.timebase();
    let series = cfg.site_series(&tb)?;
    let r = sweep(&series, &cfg.design, &tb)?;
    write_sweep(&r, cfg)
}

/// Probability curves from an existing `r.csv` (the `r_path` key, default
/// `output_dir/r.csv`): `curve.csv`, `by_hour.csv`, `by_month.csv`.
pub fn cmd_stats(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let tb = cfg.timebase();
    let path = cfg
        .r_path
        .clone()
        .unwrap_or_else(|| cfg.output_dir.join("r.csv"));
    let text = fs::read_to_string(&path)
        .map_err(|e| CliError::Invalid(format!("r_path: {}: {e}", path.display())))?;
    let r = SurvivalSeries::from_csv(&text, tb)
        .map_err(|e| CliError::Invalid(format!("r_path: {}: {e}", path.display())))?;
    write_stats(&r, cfg)
}

fn size(cfg: &RunConfig, series: &SiteSeries, tb: &TimeBase) -> Result<SizingOutcome, CliError> {
    let window = cfg.outage_window(tb)?;
    let outcome = size_system(&cfg.sizing_spec(), &window, series, tb)
        .map_err(|e| CliError::Invalid(e.to_string()))?;
    write_atomic(
        &cfg.output_dir,
        "design.json",
        &to_json(&DesignReport::from(&outcome)),
    )?;
    Ok(outcome)
}

/// Cheapest design for the configured outage window: `design.json`.
pub fn cmd_size(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let tb = cfg.timebase();
    let series = cfg.site_series(&tb)?;
    match size(cfg, &series, &tb)? {
        SizingOutcome::Feasible { .. } => Ok(vec![cfg.output_dir.join("design.json")]),
        SizingOutcome::Infeasible => Err(CliError::Infeasible),
    }
}

/// Size, sweep the sized design over the year, then compute statistics.
pub fn cmd_assess(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let tb = cfg.timebase();
    let series = cfg.site_series(&tb)?;
    let design = match size(cfg, &series, &tb)? {
        SizingOutcome::Feasible { design, .. } => design,
        SizingOutcome::Infeasible => return Err(CliError::Infeasible),
    };
    let r = sweep(&series, &design, &tb)?;
    let mut files = vec![cfg.output_dir.join("design.json")];
    files.extend(write_sweep(&r, cfg)?);
    files.extend(write_stats(&r, cfg)?);
    Ok(files)
}
