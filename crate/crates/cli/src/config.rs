//! Run configuration: a flat `key = value` file plus `--key value` overrides.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use resil_core::{
    parse_series_with, Comparator, CostCoefficients, OutageWindow, SeriesOptions, SiteSeries,
    SizingSpec, SystemDesign, TimeBase, Unit, YearSeries,
};

use crate::CliError;

/// Every key the configuration file understands.
pub const KEYS: &[&str] = &[
    "load_path",
    "pv_factor_path",
    "wind_factor_path",
    "soc_path",
    "r_path",
    "output_dir",
    "steps_per_hour",
    "critical_load_fraction",
    "allow_factor_above_one",
    "survival_comparator",
    "report_durations",
    "pv_kw",
    "wind_kw",
    "storage_kw",
    "storage_kwh",
    "soc_min_frac",
    "charge_eff",
    "discharge_eff",
    "gen_kw",
    "fuel_available_gal",
    "fuel_slope_gal_per_kwh",
    "fuel_intercept_gal_per_hr",
    "min_turndown_frac",
    "pv_kw_grid",
    "storage_kw_grid",
    "storage_kwh_grid",
    "gen_kw_grid",
    "cost_per_pv_kw",
    "cost_per_storage_kw",
    "cost_per_storage_kwh",
    "cost_per_gen_kw",
    "outage_start",
    "outage_duration",
];

const PATH_KEYS: &[&str] = &[
    "load_path",
    "pv_factor_path",
    "wind_factor_path",
    "soc_path",
    "r_path",
    "output_dir",
];

#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub pv_kw: Vec<f64>,
    pub storage_kw: Vec<f64>,
    pub storage_kwh: Vec<f64>,
    pub gen_kw: Vec<f64>,
    pub costs: CostCoefficients,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub load_path: Option<PathBuf>,
    pub pv_factor_path: Option<PathBuf>,
    pub wind_factor_path: Option<PathBuf>,
    pub soc_path: Option<PathBuf>,
    pub r_path: Option<PathBuf>,
    pub output_dir: PathBuf,
    pub steps_per_hour: usize,
    pub critical_load_fraction: f64,
    pub allow_factor_above_one: bool,
    pub survival_comparator: Comparator,
    /// Durations, in hours, reported under `prob_at` in the summary.
    pub report_durations: Vec<f64>,
    pub design: SystemDesign,
    pub grid: GridSpec,
    pub outage_start: usize,
    /// Outage window length in steps; defaults to one day.
    pub outage_duration: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            load_path: None,
            pv_factor_path: None,
            wind_factor_path: None,
            soc_path: None,
            r_path: None,
            output_dir: PathBuf::from("."),
            steps_per_hour: 1,
            critical_load_fraction: 1.0,
            allow_factor_above_one: false,
            survival_comparator: Comparator::Strict,
            report_durations: vec![24.0],
            design: SystemDesign::default(),
            grid: GridSpec {
                pv_kw: Vec::new(),
                storage_kw: Vec::new(),
                storage_kwh: Vec::new(),
                gen_kw: Vec::new(),
                costs: CostCoefficients::default(),
            },
            outage_start: 0,
            outage_duration: None,
        }
    }
}

fn invalid(key: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Invalid(format!("{key}: {msg}"))
}

fn parse_num<T: FromStr>(key: &str, v: &str) -> Result<T, CliError> {
    v.parse()
        .map_err(|_| invalid(key, format!("cannot parse {v:?}")))
}

fn parse_list(key: &str, v: &str) -> Result<Vec<f64>, CliError> {
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_num(key, s))
        .collect()
}

fn parse_bool(key: &str, v: &str) -> Result<bool, CliError> {
    match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(invalid(key, format!("expected true or false, got {v:?}"))),
    }
}

/// Splits `key = value` lines; `#` starts a comment at line start or after
/// whitespace.
pub fn parse_pairs(text: &str) -> Result<Vec<(String, String)>, CliError> {
    let mut out = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = match raw.find(" #").or_else(|| raw.find("\t#")) {
            Some(i) => &raw[..i],
            None => raw,
        }
        .trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            CliError::Invalid(format!("config line {}: expected key = value", n + 1))
        })?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

/// Turns `--key value` / `--key=value` arguments into pairs.
pub fn parse_overrides(args: &[String]) -> Result<Vec<(String, String)>, CliError> {
    let mut out = Vec::new();
    let mut it = args.iter();
    while let Some(arg) = it.next() {
        let key = arg
            .strip_prefix("--")
            .ok_or_else(|| CliError::Invalid(format!("expected --key value, got {arg:?}")))?;
        match key.split_once('=') {
            Some((k, v)) => out.push((k.to_string(), v.to_string())),
            None => {
                let v = it
                    .next()
                    .ok_or_else(|| invalid(key, "missing value after flag"))?;
                out.push((key.to_string(), v.clone()));
            }
        }
    }
    Ok(out)
}

impl RunConfig {
    /// Reads `path` and applies `overrides` on top. Relative paths in the
    /// file resolve against the file's directory, those in overrides
    /// against the working directory.
    pub fn load(path: &Path, overrides: &[String]) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Invalid(format!("config {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("")).to_path_buf();
        let mut cfg = RunConfig::default();
        let mut seen = BTreeMap::new();
        for (k, v) in parse_pairs(&text)? {
            if seen.insert(k.clone(), ()).is_some() {
                return Err(invalid(&k, "set more than once"));
            }
            cfg.set(&k, &v, &base)?;
        }
        for (k, v) in parse_overrides(overrides)? {
            cfg.set(&k, &v, Path::new(""))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_pairs(pairs: &[(&str, &str)]) -> Result<Self, CliError> {
        let mut cfg = RunConfig::default();
        for (k, v) in pairs {
            cfg.set(k, v, Path::new(""))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, value: &str, base: &Path) -> Result<(), CliError> {
        if PATH_KEYS.contains(&key) {
            let p = base.join(value);
            match key {
                "load_path" => self.load_path = Some(p),
                "pv_factor_path" => self.pv_factor_path = Some(p),
                "wind_factor_path" => self.wind_factor_path = Some(p),
                "soc_path" => self.soc_path = Some(p),
                "r_path" => self.r_path = Some(p),
                _ => self.output_dir = p,
            }
            return Ok(());
        }
        let d = &mut self.design;
        let g = &mut self.grid;
        match key {
            "steps_per_hour" => self.steps_per_hour = parse_num(key, value)?,
            "critical_load_fraction" => self.critical_load_fraction = parse_num(key, value)?,
            "allow_factor_above_one" => self.allow_factor_above_one = parse_bool(key, value)?,
            "survival_comparator" => {
                self.survival_comparator = value.parse().map_err(|e| invalid(key, e))?
            }
            "report_durations" => self.report_durations = parse_list(key, value)?,
            "pv_kw" => d.pv_kw = parse_num(key, value)?,
            "wind_kw" => d.wind_kw = parse_num(key, value)?,
            "storage_kw" => d.storage_kw = parse_num(key, value)?,
            "storage_kwh" => d.storage_kwh = parse_num(key, value)?,
            "soc_min_frac" => d.soc_min_frac = parse_num(key, value)?,
            "charge_eff" => d.charge_eff = parse_num(key, value)?,
            "discharge_eff" => d.discharge_eff = parse_num(key, value)?,
            "gen_kw" => d.gen_kw = parse_num(key, value)?,
            "fuel_available_gal" => d.fuel_available_gal = parse_num(key, value)?,
            "fuel_slope_gal_per_kwh" => d.fuel_slope_gal_per_kwh = parse_num(key, value)?,
            "fuel_intercept_gal_per_hr" => d.fuel_intercept_gal_per_hr = parse_num(key, value)?,
            "min_turndown_frac" => d.min_turndown_frac = parse_num(key, value)?,
            "pv_kw_grid" => g.pv_kw = parse_list(key, value)?,
            "storage_kw_grid" => g.storage_kw = parse_list(key, value)?,
            "storage_kwh_grid" => g.storage_kwh = parse_list(key, value)?,
            "gen_kw_grid" => g.gen_kw = parse_list(key, value)?,
            "cost_per_pv_kw" => g.costs.per_pv_kw = parse_num(key, value)?,
            "cost_per_storage_kw" => g.costs.per_storage_kw = parse_num(key, value)?,
            "cost_per_storage_kwh" => g.costs.per_storage_kwh = parse_num(key, value)?,
            "cost_per_gen_kw" => g.costs.per_gen_kw = parse_num(key, value)?,
            "outage_start" => self.outage_start = parse_num(key, value)?,
            "outage_duration" => self.outage_duration = Some(parse_num(key, value)?),
            _ => return Err(invalid(key, "unknown key")),
        }
        Ok(())
    }

    fn validate(&self) -> Result<(), CliError> {
        if self.steps_per_hour == 0 {
            return Err(invalid("steps_per_hour", "must be a positive integer"));
        }
        let f = self.critical_load_fraction;
        if !(f.is_finite() && f > 0.0 && f <= 1.0) {
            return Err(invalid("critical_load_fraction", "must lie in (0, 1]"));
        }
        if let Some(d) = self
            .report_durations
            .iter()
            .find(|d| !(d.is_finite() && **d > 0.0))
        {
            return Err(invalid(
                "report_durations",
                format!("{d} is not a positive duration"),
            ));
        }
        self.design.validate().map_err(|e| {
            // messages from the design check already start with the field name
            CliError::Invalid(
                e.to_string()
                    .trim_start_matches("invalid input: ")
                    .to_string(),
            )
        })
    }

    pub fn timebase(&self) -> TimeBase {
        TimeBase::new(self.steps_per_hour).expect("validated steps_per_hour")
    }

    fn read_series(
        &self,
        key: &str,
        path: &Path,
        unit: Unit,
        tb: &TimeBase,
    ) -> Result<YearSeries, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| invalid(key, format!("{}: {e}", path.display())))?;
        let opts = SeriesOptions {
            allow_factor_above_one: self.allow_factor_above_one,
        };
        parse_series_with(&text, unit, tb, opts)
            .map_err(|e| invalid(key, format!("{}: {e}", path.display())))
    }

    /// Loads every input series; the load is scaled by the critical-load
    /// fraction. Missing production files mean no production, a missing SOC
    /// file means a full battery at every start.
    pub fn site_series(&self, tb: &TimeBase) -> Result<SiteSeries, CliError> {
        let load_path = self
            .load_path
            .as_ref()
            .ok_or_else(|| invalid("load_path", "required"))?;
        let load = self
            .read_series("load_path", load_path, Unit::Kw, tb)?
            .scaled(self.critical_load_fraction);
        let mut series = SiteSeries::from_load(load, tb);
        if let Some(p) = &self.pv_factor_path {
            series.pv_factor = self.read_series("pv_factor_path", p, Unit::Factor, tb)?;
        }
        if let Some(p) = &self.wind_factor_path {
            series.wind_factor = self.read_series("wind_factor_path", p, Unit::Factor, tb)?;
        }
        if let Some(p) = &self.soc_path {
            series.soc_frac = self.read_series("soc_path", p, Unit::Fraction, tb)?;
        }
        Ok(series)
    }

    /// Candidate grids; a grid left unset holds only the design's own value.
    pub fn sizing_spec(&self) -> SizingSpec {
        let or_single = |grid: &Vec<f64>, v: f64| {
            if grid.is_empty() {
                vec![v]
            } else {
                grid.clone()
            }
        };
        SizingSpec {
            pv_kw: or_single(&self.grid.pv_kw, self.design.pv_kw),
            storage_kw: or_single(&self.grid.storage_kw, self.design.storage_kw),
            storage_kwh: or_single(&self.grid.storage_kwh, self.design.storage_kwh),
            gen_kw: or_single(&self.grid.gen_kw, self.design.gen_kw),
            base: self.design,
            costs: self.grid.costs,
        }
    }

    pub fn outage_window(&self, tb: &TimeBase) -> Result<OutageWindow, CliError> {
        let duration = self.outage_duration.unwrap_or(24 * tb.steps_per_hour());
        OutageWindow::new(self.outage_start, duration, tb)
            .map_err(|e| invalid("outage_start/outage_duration", e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairs_and_comments() {
        let p = parse_pairs("# top\n\npv_kw = 10 # inline\nload_path=a#b.txt\n").unwrap();
        assert_eq!(
            p,
            vec![
                ("pv_kw".to_string(), "10".to_string()),
                ("load_path".to_string(), "a#b.txt".to_string())
            ]
        );
        assert!(parse_pairs("novalue\n").is_err());
    }

    #[test]
    fn overrides() {
        let args: Vec<String> = ["--pv_kw", "5", "--gen_kw=3"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        assert_eq!(
            parse_overrides(&args).unwrap(),
            vec![
                ("pv_kw".to_string(), "5".to_string()),
                ("gen_kw".to_string(), "3".to_string())
            ]
        );
        assert!(parse_overrides(&["pv_kw".to_string()]).is_err());
        assert!(parse_overrides(&["--pv_kw".to_string()]).is_err());
    }

    #[test]
    fn unknown_and_bad_keys_name_the_field() {
        let err = RunConfig::from_pairs(&[("pv_kww", "1")]).unwrap_err();
        assert!(err.to_string().contains("pv_kww"));
        let err = RunConfig::from_pairs(&[("gen_kw", "-1")]).unwrap_err();
        assert!(err.to_string().contains("gen_kw"), "{err}");
        let err = RunConfig::from_pairs(&[("critical_load_fraction", "0")]).unwrap_err();
        assert!(err.to_string().contains("critical_load_fraction"));
        let err = RunConfig::from_pairs(&[("survival_comparator", "loose")]).unwrap_err();
        assert!(err.to_string().contains("survival_comparator"));
        let err = RunConfig::from_pairs(&[("storage_kw", "abc")]).unwrap_err();
        assert!(err.to_string().contains("storage_kw"));
    }

    #[test]
    fn every_key_is_settable() {
        let mut cfg = RunConfig::default();
        for key in KEYS {
            let v = match *key {
                "allow_factor_above_one" => "false",
                "survival_comparator" => "inclusive",
                k if k.ends_with("_path") || k == "output_dir" => "x",
                _ => "1",
            };
            cfg.set(key, v, Path::new("")).unwrap();
        }
    }

    #[test]
    fn unset_grid_uses_design_value() {
        let cfg = RunConfig::from_pairs(&[("gen_kw", "7"), ("pv_kw_grid", "0, 10,20")]).unwrap();
        let spec = cfg.sizing_spec();
        assert_eq!(spec.gen_kw, vec![7.0]);
        assert_eq!(spec.pv_kw, vec![0.0, 10.0, 20.0]);
    }

    #[test]
    fn default_window_is_one_day() {
        let cfg =
            RunConfig::from_pairs(&[("steps_per_hour", "2"), ("outage_start", "48")]).unwrap();
        let w = cfg.outage_window(&cfg.timebase()).unwrap();
        assert_eq!((w.start, w.duration_steps), (48, 48));
    }
}
