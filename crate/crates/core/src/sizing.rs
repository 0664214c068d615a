//! Cheapest system, on a grid of candidate sizes, that carries the critical
//! load through a given outage window.
//!
//! Cost is a capital-cost proxy: the sum of each size times its unit cost.
//! Every combination of the candidate grids is simulated over the window;
//! among the feasible ones the cheapest wins, ties going to the smallest
//! (pv_kw, storage_kwh, storage_kw, gen_kw) in lexicographic order.

use std::cmp::Ordering;

use rayon::prelude::*;
use thiserror::Error;

use crate::dispatch::{renewable_output, survive, DispatchError, SiteSeries, SystemDesign};
use crate::timebase::TimeBase;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SizingError {
    #[error("candidate grid {0} is empty")]
    EmptyGrid(&'static str),
    #[error("candidate grid {name}: {reason}")]
    InvalidGrid { name: &'static str, reason: String },
    #[error("cost coefficient {name} must be finite and non-negative, got {value}")]
    InvalidCost { name: &'static str, value: f64 },
    #[error("outage window: {0}")]
    InvalidWindow(String),
    #[error(transparent)]
    Dispatch(#[from] DispatchError),
}

/// Outage period the system must ride through. Wraps around the year end.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OutageWindow {
    pub start: usize,
    pub duration_steps: usize,
}

impl OutageWindow {
    pub fn new(start: usize, duration_steps: usize, tb: &TimeBase) -> Result<Self, SizingError> {
        if start >= tb.ts() {
            return Err(SizingError::InvalidWindow(format!(
                "start {start} outside [0, {})",
                tb.ts()
            )));
        }
        if duration_steps == 0 || duration_steps > tb.ts() {
            return Err(SizingError::InvalidWindow(format!(
                "duration {duration_steps} steps outside [1, {}]",
                tb.ts()
            )));
        }
        Ok(Self {
            start,
            duration_steps,
        })
    }
}

/// Unit capital costs.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CostCoefficients {
    pub per_pv_kw: f64,
    pub per_storage_kw: f64,
    pub per_storage_kwh: f64,
    pub per_gen_kw: f64,
}

impl CostCoefficients {
    pub fn cost(&self, d: &SystemDesign) -> f64 {
        self.per_pv_kw * d.pv_kw
            + self.per_storage_kw * d.storage_kw
            + self.per_storage_kwh * d.storage_kwh
            + self.per_gen_kw * d.gen_kw
    }
}

/// Candidate sizes plus everything about the design that is held fixed.
#[derive(Debug, Clone, PartialEq)]
pub struct SizingSpec {
    pub pv_kw: Vec<f64>,
    pub storage_kw: Vec<f64>,
    pub storage_kwh: Vec<f64>,
    pub gen_kw: Vec<f64>,
    /// Source of the fixed parameters (wind, fuel, efficiencies, limits);
    /// its four sized fields are ignored.
    pub base: SystemDesign,
    pub costs: CostCoefficients,
}

impl SizingSpec {
    pub fn validate(&self) -> Result<(), SizingError> {
        for (name, grid) in self.grids() {
            if grid.is_empty() {
                return Err(SizingError::EmptyGrid(name));
            }
            if let Some(v) = grid.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
                return Err(SizingError::InvalidGrid {
                    name,
                    reason: format!("{v} is not a finite non-negative size"),
                });
            }
            if grid.windows(2).any(|w| w[0] >= w[1]) {
                return Err(SizingError::InvalidGrid {
                    name,
                    reason: "values must be strictly ascending".into(),
                });
            }
        }
        let c = &self.costs;
        for (name, value) in [
            ("cost_per_pv_kw", c.per_pv_kw),
            ("cost_per_storage_kw", c.per_storage_kw),
            ("cost_per_storage_kwh", c.per_storage_kwh),
            ("cost_per_gen_kw", c.per_gen_kw),
        ] {
            if !(value.is_finite() && value >= 0.0) {
                return Err(SizingError::InvalidCost { name, value });
            }
        }
        Ok(())
    }

    fn grids(&self) -> [(&'static str, &[f64]); 4] {
        [
            ("pv_kw", &self.pv_kw),
            ("storage_kw", &self.storage_kw),
            ("storage_kwh", &self.storage_kwh),
            ("gen_kw", &self.gen_kw),
        ]
    }

    /// Every grid combination that forms a valid design. Combinations with
    /// battery power but no battery energy are skipped.
    pub fn candidates(&self) -> Vec<SystemDesign> {
        let mut out = Vec::with_capacity(
            self.pv_kw.len() * self.storage_kw.len() * self.storage_kwh.len() * self.gen_kw.len(),
        );
        for &pv_kw in &self.pv_kw {
            for &storage_kwh in &self.storage_kwh {
                for &storage_kw in &self.storage_kw {
                    if storage_kwh == 0.0 && storage_kw > 0.0 {
                        continue;
                    }
                    for &gen_kw in &self.gen_kw {
                        out.push(SystemDesign {
                            pv_kw,
                            storage_kw,
                            storage_kwh,
                            gen_kw,
                            ..self.base
                        });
                    }
                }
            }
        }
        out
    }
}

/// Whether `design` carries the load for the whole window.
pub fn window_feasible(
    design: &SystemDesign,
    window: &OutageWindow,
    series: &SiteSeries,
    tb: &TimeBase,
) -> Result<bool, SizingError> {
    series.check(tb)?;
    design.validate()?;
    let window = OutageWindow::new(window.start, window.duration_steps, tb)?;
    let renewable = renewable_output(series, design);
    Ok(feasible_unchecked(design, &window, series, &renewable, tb))
}

fn feasible_unchecked(
    design: &SystemDesign,
    window: &OutageWindow,
    series: &SiteSeries,
    renewable: &[f64],
    tb: &TimeBase,
) -> bool {
    survive(
        window.start,
        window.duration_steps,
        series.load.values(),
        renewable,
        series.soc_frac.values(),
        design,
        tb.dt_hours(),
    ) >= window.duration_steps
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SizingOutcome {
    Feasible { design: SystemDesign, cost: f64 },
    Infeasible,
}

impl SizingOutcome {
    pub fn design(&self) -> Option<&SystemDesign> {
        match self {
            SizingOutcome::Feasible { design, .. } => Some(design),
            SizingOutcome::Infeasible => None,
        }
    }
}

fn rank(a: &(f64, SystemDesign), b: &(f64, SystemDesign)) -> Ordering {
    let key = |(c, d): &(f64, SystemDesign)| [*c, d.pv_kw, d.storage_kwh, d.storage_kw, d.gen_kw];
    key(a)
        .iter()
        .zip(key(b).iter())
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

/// Exhaustive search for the cheapest feasible design.
pub fn size_system(
    spec: &SizingSpec,
    window: &OutageWindow,
    series: &SiteSeries,
    tb: &TimeBase,
) -> Result<SizingOutcome, SizingError> {
    spec.validate()?;
    series.check(tb)?;
    let window = OutageWindow::new(window.start, window.duration_steps, tb)?;
    let candidates = spec.candidates();
    if let Some(d) = candidates.first() {
        d.validate()?;
    }
    // renewable output is linear in pv_kw, so share the per-factor parts
    let wind: Vec<f64> = series
        .wind_factor
        .values()
        .iter()
        .map(|w| spec.base.wind_kw * w)
        .collect();
    let best = candidates
        .par_iter()
        .filter_map(|d| {
            let renewable: Vec<f64> = series
                .pv_factor
                .values()
                .iter()
                .zip(&wind)
                .map(|(pv, w)| d.pv_kw * pv + w)
                .collect();
            feasible_unchecked(d, &window, series, &renewable, tb).then(|| (spec.costs.cost(d), *d))
        })
        .min_by(rank);
    Ok(match best {
        Some((cost, design)) => SizingOutcome::Feasible { design, cost },
        None => SizingOutcome::Infeasible,
    })
}
