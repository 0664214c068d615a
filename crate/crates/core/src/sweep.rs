//! Outage simulations started from every step of the year.

use std::fmt::Write as _;

use rayon::prelude::*;
use thiserror::Error;

use crate::dispatch::{renewable_output, survive, DispatchError, SiteSeries, SystemDesign};
use crate::timebase::TimeBase;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SurvivalError {
    #[error("expected {expected} survival entries, found {found}")]
    WrongLength { expected: usize, found: usize },
    #[error("entry {index}: {steps} steps exceeds the year length {ts}")]
    OutOfRange {
        index: usize,
        steps: usize,
        ts: usize,
    },
    #[error("line {line}: {reason}")]
    Csv { line: usize, reason: String },
}

/// Survived outage duration, in steps, for each start step of the year.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SurvivalSeries {
    steps: Vec<usize>,
    tb: TimeBase,
}

impl SurvivalSeries {
    pub fn new(steps: Vec<usize>, tb: TimeBase) -> Result<Self, SurvivalError> {
        if steps.len() != tb.ts() {
            return Err(SurvivalError::WrongLength {
                expected: tb.ts(),
                found: steps.len(),
            });
        }
        if let Some((index, &s)) = steps.iter().enumerate().find(|(_, &s)| s > tb.ts()) {
            return Err(SurvivalError::OutOfRange {
                index,
                steps: s,
                ts: tb.ts(),
            });
        }
        Ok(Self { steps, tb })
    }

    pub fn steps(&self) -> &[usize] {
        &self.steps
    }

    pub fn timebase(&self) -> &TimeBase {
        &self.tb
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn hours(&self, start: usize) -> f64 {
        self.tb.steps_to_hours(self.steps[start])
    }

    pub fn to_hours(&self) -> Vec<f64> {
        self.steps
            .iter()
            .map(|&s| self.tb.steps_to_hours(s))
            .collect()
    }

    pub fn max_steps(&self) -> usize {
        self.steps.iter().copied().max().unwrap_or(0)
    }

    /// CSV with header `start_index,survived_hours`, one row per start.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.steps.len() * 12 + 32);
        out.push_str("start_index,survived_hours\n");
        for (j, &s) in self.steps.iter().enumerate() {
            let _ = writeln!(out, "{},{}", j, self.tb.steps_to_hours(s));
        }
        out
    }

    /// Reads the format written by [`SurvivalSeries::to_csv`]. Rows must be
    /// in start order and every duration a whole number of steps.
    pub fn from_csv(text: &str, tb: TimeBase) -> Result<Self, SurvivalError> {
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty());
        match lines.next() {
            Some((_, header)) if header.trim() == "start_index,survived_hours" => {}
            Some((n, _)) => {
                return Err(SurvivalError::Csv {
                    line: n + 1,
                    reason: "expected header start_index,survived_hours".into(),
                })
            }
            None => {
                return Err(SurvivalError::Csv {
                    line: 1,
                    reason: "empty file".into(),
                })
            }
        }
        let sph = tb.steps_per_hour() as f64;
        let mut steps = Vec::with_capacity(tb.ts());
        for (n, line) in lines {
            let err = |reason: String| SurvivalError::Csv {
                line: n + 1,
                reason,
            };
            let (idx, hours) = line
                .trim()
                .split_once(',')
                .ok_or_else(|| err("expected two columns".into()))?;
            let idx: usize = idx
                .trim()
                .parse()
                .map_err(|_| err(format!("bad start index {idx:?}")))?;
            if idx != steps.len() {
                return Err(err(format!(
                    "expected start index {}, got {idx}",
                    steps.len()
                )));
            }
            let hours: f64 = hours
                .trim()
                .parse()
                .map_err(|_| err(format!("bad duration {hours:?}")))?;
            let s = hours * sph;
            if !s.is_finite() || s < 0.0 || (s - s.round()).abs() > 1e-6 {
                return Err(err(format!("{hours} h is not a whole number of steps")));
            }
            steps.push(s.round() as usize);
        }
        Self::new(steps, tb)
    }
}

/// Min, max and mean survived duration over all starts, in hours.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub min_hours: f64,
    pub max_hours: f64,
    pub mean_hours: f64,
}

pub fn summary(r: &SurvivalSeries) -> Summary {
    let tb = r.timebase();
    let min = r.steps.iter().copied().min().unwrap_or(0);
    let max = r.max_steps();
    let total: u64 = r.steps.iter().map(|&s| s as u64).sum();
    Summary {
        min_hours: tb.steps_to_hours(min),
        max_hours: tb.steps_to_hours(max),
        mean_hours: total as f64 / r.len() as f64 / tb.steps_per_hour() as f64,
    }
}

/// Parallelism for [`simulate_year_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Parallelism {
    /// One thread, plain loop.
    Sequential,
    /// Rayon's global pool.
    #[default]
    Global,
    /// A dedicated pool of this many threads.
    Threads(usize),
}

/// Survived duration for outages starting at each step of the year, using
/// the global thread pool.
pub fn simulate_year(
    series: &SiteSeries,
    design: &SystemDesign,
    tb: &TimeBase,
) -> Result<SurvivalSeries, DispatchError> {
    simulate_year_with(series, design, tb, Parallelism::Global)
}

pub fn simulate_year_with(
    series: &SiteSeries,
    design: &SystemDesign,
    tb: &TimeBase,
    parallelism: Parallelism,
) -> Result<SurvivalSeries, DispatchError> {
    series.check(tb)?;
    design.validate()?;
    let renewable = renewable_output(series, design);
    let load = series.load.values();
    let soc = series.soc_frac.values();
    let ts = tb.ts();
    let dt = tb.dt_hours();
    let run = |start: usize| survive(start, ts, load, &renewable, soc, design, dt);

    let steps: Vec<usize> = match parallelism {
        Parallelism::Sequential => (0..ts).map(run).collect(),
        Parallelism::Global => (0..ts).into_par_iter().map(run).collect(),
        Parallelism::Threads(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| DispatchError::InvalidInput(format!("thread pool: {e}")))?;
            pool.install(|| (0..ts).into_par_iter().map(run).collect())
        }
    };
    Ok(SurvivalSeries { steps, tb: *tb })
}
