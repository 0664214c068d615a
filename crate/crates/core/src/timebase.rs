//! Simulation year, calendar indexing and year-long series containers.
//!
//! The year is a fixed non-leap year of 365 days whose first step is
//! Sunday, January 1st at 00:00. All durations inside the engine are counted
//! in steps; conversion to hours happens only when reporting.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Hours in the (non-leap) simulation year.
pub const HOURS_PER_YEAR: usize = 8760;

/// Days in each month of a non-leap year.
pub const DAYS_IN_MONTH: [usize; 12] = [31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SeriesError {
    #[error("steps_per_hour must be a positive integer")]
    InvalidStepsPerHour,
    #[error("year length must be between 1 and {max} steps, got {len}")]
    InvalidYearLength { len: usize, max: usize },
    #[error("expected {expected} values, found {found}")]
    WrongLength { expected: usize, found: usize },
    #[error("line {line}: cannot parse {text:?} as a number")]
    Parse { line: usize, text: String },
    #[error("line {line}: value is not finite")]
    NonFinite { line: usize },
    #[error("line {line}: negative value {value}")]
    NegativeValue { line: usize, value: f64 },
    #[error("line {line}: value {value} is out of range [0, 1]")]
    OutOfRange { line: usize, value: f64 },
    #[error("index {index} is outside the year [0, {ts})")]
    IndexOutOfRange { index: usize, ts: usize },
}

/// Resolution and length of the simulation year.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TimeBase {
    steps_per_hour: usize,
    ts: usize,
}

impl TimeBase {
    /// A full 8760-hour year at `steps_per_hour` steps per hour.
    pub fn new(steps_per_hour: usize) -> Result<Self, SeriesError> {
        if steps_per_hour == 0 {
            return Err(SeriesError::InvalidStepsPerHour);
        }
        Ok(Self {
            steps_per_hour,
            ts: HOURS_PER_YEAR * steps_per_hour,
        })
    }

    pub fn hourly() -> Self {
        Self {
            steps_per_hour: 1,
            ts: HOURS_PER_YEAR,
        }
    }

    /// A year cut short after `ts` steps.
    ///
    /// Calendar lookups keep the usual day and month boundaries; only the
    /// wrap-around point moves. Meant for toy-scale experiments and tests,
    /// production runs should use [`TimeBase::new`].
    pub fn truncated(steps_per_hour: usize, ts: usize) -> Result<Self, SeriesError> {
        let full = Self::new(steps_per_hour)?;
        if ts == 0 || ts > full.ts {
            return Err(SeriesError::InvalidYearLength {
                len: ts,
                max: full.ts,
            });
        }
        Ok(Self { steps_per_hour, ts })
    }

    pub fn steps_per_hour(&self) -> usize {
        self.steps_per_hour
    }

    /// Total number of steps in the year.
    pub fn ts(&self) -> usize {
        self.ts
    }

    pub fn dt_hours(&self) -> f64 {
        1.0 / self.steps_per_hour as f64
    }

    pub fn is_full_year(&self) -> bool {
        self.ts == HOURS_PER_YEAR * self.steps_per_hour
    }

    pub fn steps_to_hours(&self, steps: usize) -> f64 {
        steps as f64 / self.steps_per_hour as f64
    }

    fn check(&self, index: usize) -> Result<(), SeriesError> {
        if index < self.ts {
            Ok(())
        } else {
            Err(SeriesError::IndexOutOfRange { index, ts: self.ts })
        }
    }

    /// Hour of the day, 0..=23, of the step at `index`.
    pub fn hour_of_day(&self, index: usize) -> Result<usize, SeriesError> {
        self.check(index)?;
        Ok((index / self.steps_per_hour) % 24)
    }

    /// Calendar month, 1..=12, containing the step at `index`.
    pub fn month_of(&self, index: usize) -> Result<usize, SeriesError> {
        self.check(index)?;
        let mut day = index / self.steps_per_hour / 24;
        for (m, days) in DAYS_IN_MONTH.iter().enumerate() {
            if day < *days {
                return Ok(m + 1);
            }
            day -= days;
        }
        unreachable!("index checked against the year length")
    }

    /// Day of the week with 0 = Sunday.
    pub fn day_of_week(&self, index: usize) -> Result<usize, SeriesError> {
        self.check(index)?;
        Ok((index / self.steps_per_hour / 24) % 7)
    }

    /// Number of steps in calendar month `month` (1-based) for a full year.
    pub fn steps_in_month(&self, month: usize) -> usize {
        DAYS_IN_MONTH[month - 1] * 24 * self.steps_per_hour
    }
}

/// Physical meaning of a series, which decides its admissible range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Unit {
    /// Power in kW.
    Kw,
    /// Fraction of a capacity, in [0, 1] (battery state of charge).
    Fraction,
    /// Production per kW of installed capacity.
    Factor,
}

impl fmt::Display for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Unit::Kw => "kW",
            Unit::Fraction => "fraction",
            Unit::Factor => "factor",
        })
    }
}

impl FromStr for Unit {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "kW" | "kw" => Ok(Unit::Kw),
            "fraction" => Ok(Unit::Fraction),
            "factor" => Ok(Unit::Factor),
            other => Err(format!("unknown unit {other:?}")),
        }
    }
}

/// Extra leniency knobs for series validation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SeriesOptions {
    /// Accept production factors above 1.
    pub allow_factor_above_one: bool,
}

/// One value per step of the simulation year.
#[derive(Debug, Clone, PartialEq)]
pub struct YearSeries {
    values: Vec<f64>,
    unit: Unit,
}

impl YearSeries {
    pub fn new(values: Vec<f64>, unit: Unit, tb: &TimeBase) -> Result<Self, SeriesError> {
        Self::with_options(values, unit, tb, SeriesOptions::default())
    }

    pub fn with_options(
        values: Vec<f64>,
        unit: Unit,
        tb: &TimeBase,
        opts: SeriesOptions,
    ) -> Result<Self, SeriesError> {
        if values.len() != tb.ts() {
            return Err(SeriesError::WrongLength {
                expected: tb.ts(),
                found: values.len(),
            });
        }
        for (i, &v) in values.iter().enumerate() {
            check_value(v, unit, opts, i + 1)?;
        }
        Ok(Self { values, unit })
    }

    pub fn constant(value: f64, unit: Unit, tb: &TimeBase) -> Result<Self, SeriesError> {
        Self::new(vec![value; tb.ts()], unit, tb)
    }

    pub fn zeros(unit: Unit, tb: &TimeBase) -> Self {
        Self {
            values: vec![0.0; tb.ts()],
            unit,
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn unit(&self) -> Unit {
        self.unit
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Multiplies every value by `factor` (e.g. a critical-load fraction).
    pub fn scaled(&self, factor: f64) -> Self {
        if factor == 1.0 {
            return self.clone();
        }
        Self {
            values: self.values.iter().map(|v| v * factor).collect(),
            unit: self.unit,
        }
    }

    /// Text form accepted by [`parse_series`]: one value per line in
    /// shortest round-trip notation.
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(self.values.len() * 8);
        for v in &self.values {
            out.push_str(&v.to_string());
            out.push('\n');
        }
        out
    }
}

impl std::ops::Index<usize> for YearSeries {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.values[i]
    }
}

fn check_value(v: f64, unit: Unit, opts: SeriesOptions, line: usize) -> Result<(), SeriesError> {
    if !v.is_finite() {
        return Err(SeriesError::NonFinite { line });
    }
    if v < 0.0 {
        return Err(SeriesError::NegativeValue { line, value: v });
    }
    let capped = match unit {
        Unit::Kw => false,
        Unit::Fraction => true,
        Unit::Factor => !opts.allow_factor_above_one,
    };
    if capped && v > 1.0 {
        return Err(SeriesError::OutOfRange { line, value: v });
    }
    Ok(())
}

/// Parses a series file: one decimal per line, blank lines and lines
/// starting with `#` skipped. Error line numbers refer to the input text.
pub fn parse_series(text: &str, unit: Unit, tb: &TimeBase) -> Result<YearSeries, SeriesError> {
    parse_series_with(text, unit, tb, SeriesOptions::default())
}

pub fn parse_series_with(
    text: &str,
    unit: Unit,
    tb: &TimeBase,
    opts: SeriesOptions,
) -> Result<YearSeries, SeriesError> {
    let mut values = Vec::with_capacity(tb.ts());
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let v: f64 = line.parse().map_err(|_| SeriesError::Parse {
            line: n + 1,
            text: line.to_string(),
        })?;
        check_value(v, unit, opts, n + 1)?;
        values.push(v);
    }
    if values.len() != tb.ts() {
        return Err(SeriesError::WrongLength {
            expected: tb.ts(),
            found: values.len(),
        });
    }
    Ok(YearSeries { values, unit })
}
