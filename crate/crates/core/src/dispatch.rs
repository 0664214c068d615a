//! Load-following dispatch during a grid outage.
//!
//! Each step serves the critical load from renewables first, then from the
//! generator (only if it can carry the whole residual on its own and has the
//! fuel for it), then from the battery (again only for the whole residual).
//! Surplus renewable output and generator output forced by the minimum
//! turndown go into the battery; whatever the battery cannot take is dumped.

use thiserror::Error;

use crate::timebase::{SeriesError, TimeBase, Unit, YearSeries};

/// Absolute slack, in kW or gallons, for capacity and fuel comparisons.
pub const TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DispatchError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Series(#[from] SeriesError),
}

/// Installed capacities and operating limits of an on-site system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemDesign {
    /// PV nameplate, kW-DC.
    pub pv_kw: f64,
    pub wind_kw: f64,
    /// Battery power rating, applied to both charge and discharge.
    pub storage_kw: f64,
    pub storage_kwh: f64,
    /// Lowest allowed state of charge as a fraction of `storage_kwh`.
    pub soc_min_frac: f64,
    pub charge_eff: f64,
    pub discharge_eff: f64,
    pub gen_kw: f64,
    /// Fuel on site when the outage begins; never resupplied.
    pub fuel_available_gal: f64,
    pub fuel_slope_gal_per_kwh: f64,
    /// Burned per running hour regardless of output.
    pub fuel_intercept_gal_per_hr: f64,
    /// Lowest generator output as a fraction of `gen_kw`.
    pub min_turndown_frac: f64,
}

impl Default for SystemDesign {
    fn default() -> Self {
        Self {
            pv_kw: 0.0,
            wind_kw: 0.0,
            storage_kw: 0.0,
            storage_kwh: 0.0,
            soc_min_frac: 0.0,
            charge_eff: 1.0,
            discharge_eff: 1.0,
            gen_kw: 0.0,
            fuel_available_gal: 0.0,
            fuel_slope_gal_per_kwh: 0.0,
            fuel_intercept_gal_per_hr: 0.0,
            min_turndown_frac: 0.0,
        }
    }
}

fn non_negative(name: &str, v: f64) -> Result<(), DispatchError> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(DispatchError::InvalidInput(format!(
            "{name} must be finite and non-negative, got {v}"
        )))
    }
}

impl SystemDesign {
    pub fn validate(&self) -> Result<(), DispatchError> {
        non_negative("pv_kw", self.pv_kw)?;
        non_negative("wind_kw", self.wind_kw)?;
        non_negative("storage_kw", self.storage_kw)?;
        non_negative("storage_kwh", self.storage_kwh)?;
        non_negative("gen_kw", self.gen_kw)?;
        non_negative("fuel_available_gal", self.fuel_available_gal)?;
        non_negative("fuel_slope_gal_per_kwh", self.fuel_slope_gal_per_kwh)?;
        non_negative("fuel_intercept_gal_per_hr", self.fuel_intercept_gal_per_hr)?;
        if !(self.soc_min_frac >= 0.0 && self.soc_min_frac < 1.0) {
            return Err(DispatchError::InvalidInput(format!(
                "soc_min_frac must lie in [0, 1), got {}",
                self.soc_min_frac
            )));
        }
        for (name, eff) in [
            ("charge_eff", self.charge_eff),
            ("discharge_eff", self.discharge_eff),
        ] {
            if !(eff > 0.0 && eff <= 1.0) {
                return Err(DispatchError::InvalidInput(format!(
                    "{name} must lie in (0, 1], got {eff}"
                )));
            }
        }
        if !(0.0..=1.0).contains(&self.min_turndown_frac) {
            return Err(DispatchError::InvalidInput(format!(
                "min_turndown_frac must lie in [0, 1], got {}",
                self.min_turndown_frac
            )));
        }
        if self.storage_kwh == 0.0 && self.storage_kw > 0.0 {
            return Err(DispatchError::InvalidInput(
                "storage_kw must be 0 when storage_kwh is 0".into(),
            ));
        }
        Ok(())
    }

    pub fn soc_min_kwh(&self) -> f64 {
        self.soc_min_frac * self.storage_kwh
    }

    /// Battery energy at the start of an outage for a given SOC fraction,
    /// clamped into `[soc_min_frac, 1]`.
    pub fn initial_soc_kwh(&self, soc_frac: f64) -> f64 {
        soc_frac.clamp(self.soc_min_frac, 1.0) * self.storage_kwh
    }

    /// Fresh outage state for a given starting SOC fraction.
    pub fn outage_start(&self, soc_frac: f64) -> OutageState {
        OutageState {
            soc_kwh: self.initial_soc_kwh(soc_frac),
            fuel_gal: self.fuel_available_gal,
        }
    }
}

/// Mutable part of an outage simulation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutageState {
    pub soc_kwh: f64,
    pub fuel_gal: f64,
}

/// Flows of one dispatched step, all in kW except fuel.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StepResult {
    pub met: bool,
    pub renewable_to_load: f64,
    pub gen_to_load: f64,
    pub storage_to_load: f64,
    /// Power entering the battery charging path, before charge losses.
    pub charge_kw: f64,
    pub gen_output: f64,
    pub dumped_kw: f64,
    pub fuel_used_gal: f64,
}

/// Dispatches one step. `pv_out_kw` and `wind_out_kw` are actual outputs,
/// not capacity factors.
pub fn dispatch_step(
    load_kw: f64,
    pv_out_kw: f64,
    wind_out_kw: f64,
    design: &SystemDesign,
    state: OutageState,
    dt_hours: f64,
) -> Result<(StepResult, OutageState), DispatchError> {
    non_negative("load_kw", load_kw)?;
    non_negative("pv_out_kw", pv_out_kw)?;
    non_negative("wind_out_kw", wind_out_kw)?;
    if !(dt_hours.is_finite() && dt_hours > 0.0) {
        return Err(DispatchError::InvalidInput(format!(
            "dt_hours must be positive, got {dt_hours}"
        )));
    }
    design.validate()?;
    non_negative("soc_kwh", state.soc_kwh)?;
    non_negative("fuel_gal", state.fuel_gal)?;
    if state.soc_kwh > design.storage_kwh + TOLERANCE
        || state.soc_kwh < design.soc_min_kwh() - TOLERANCE
    {
        return Err(DispatchError::InvalidInput(format!(
            "soc_kwh {} outside [{}, {}]",
            state.soc_kwh,
            design.soc_min_kwh(),
            design.storage_kwh
        )));
    }
    Ok(step(
        load_kw,
        pv_out_kw + wind_out_kw,
        design,
        state,
        dt_hours,
    ))
}

/// Sends up to `power_kw` into the battery; returns the power accepted.
#[inline]
fn charge(design: &SystemDesign, soc_kwh: &mut f64, power_kw: f64, dt_hours: f64) -> f64 {
    if design.storage_kw <= 0.0 || power_kw <= 0.0 {
        return 0.0;
    }
    let headroom = (design.storage_kwh - *soc_kwh).max(0.0);
    let accepted = power_kw
        .min(design.storage_kw)
        .min(headroom / (design.charge_eff * dt_hours));
    *soc_kwh = (*soc_kwh + design.charge_eff * accepted * dt_hours).min(design.storage_kwh);
    accepted
}

/// Unchecked single step; callers guarantee validated inputs.
#[inline]
pub(crate) fn step(
    load_kw: f64,
    renewable_kw: f64,
    design: &SystemDesign,
    mut state: OutageState,
    dt_hours: f64,
) -> (StepResult, OutageState) {
    let mut res = StepResult::default();
    let mut net = load_kw - renewable_kw;

    if net <= 0.0 {
        let surplus = -net;
        res.met = true;
        res.renewable_to_load = load_kw;
        res.charge_kw = charge(design, &mut state.soc_kwh, surplus, dt_hours);
        res.dumped_kw = surplus - res.charge_kw;
        return (res, state);
    }
    res.renewable_to_load = renewable_kw;

    if design.gen_kw > 0.0 && design.gen_kw + TOLERANCE >= net {
        let output = net.max(design.min_turndown_frac * design.gen_kw);
        let fuel_needed =
            (design.fuel_slope_gal_per_kwh * output + design.fuel_intercept_gal_per_hr) * dt_hours;
        if state.fuel_gal + TOLERANCE >= fuel_needed {
            state.fuel_gal = (state.fuel_gal - fuel_needed).max(0.0);
            res.gen_output = output;
            res.gen_to_load = net;
            res.fuel_used_gal = fuel_needed;
            let excess = output - net;
            res.charge_kw = charge(design, &mut state.soc_kwh, excess, dt_hours);
            res.dumped_kw = excess - res.charge_kw;
            res.met = true;
            return (res, state);
        }
    }

    if design.storage_kw > 0.0 {
        let soc_min = design.soc_min_kwh();
        let deliverable = design
            .storage_kw
            .min((state.soc_kwh - soc_min).max(0.0) * design.discharge_eff / dt_hours);
        if deliverable + TOLERANCE >= net {
            state.soc_kwh = (state.soc_kwh - net * dt_hours / design.discharge_eff).max(soc_min);
            res.storage_to_load = net;
            net = 0.0;
        }
    }

    res.met = net == 0.0;
    (res, state)
}

/// The four year-long inputs of an outage simulation.
#[derive(Debug, Clone, PartialEq)]
pub struct SiteSeries {
    /// Critical load, kW.
    pub load: YearSeries,
    /// PV output per kW installed.
    pub pv_factor: YearSeries,
    /// Wind output per kW installed.
    pub wind_factor: YearSeries,
    /// Battery state of charge when the grid goes down, as a fraction.
    pub soc_frac: YearSeries,
}

impl SiteSeries {
    /// Load only: no renewable production and a full battery at every start.
    pub fn from_load(load: YearSeries, tb: &TimeBase) -> Self {
        Self {
            load,
            pv_factor: YearSeries::zeros(Unit::Factor, tb),
            wind_factor: YearSeries::zeros(Unit::Factor, tb),
            soc_frac: YearSeries::constant(1.0, Unit::Fraction, tb)
                .expect("constant 1.0 is a valid fraction"),
        }
    }

    pub fn check(&self, tb: &TimeBase) -> Result<(), DispatchError> {
        for (name, s) in [
            ("load", &self.load),
            ("pv_factor", &self.pv_factor),
            ("wind_factor", &self.wind_factor),
            ("soc_frac", &self.soc_frac),
        ] {
            if s.len() != tb.ts() {
                return Err(DispatchError::InvalidInput(format!(
                    "{name} has {} values, expected {}",
                    s.len(),
                    tb.ts()
                )));
            }
        }
        Ok(())
    }

    /// Rotates every series left by `k` steps.
    pub fn rotated(&self, k: usize, tb: &TimeBase) -> Self {
        let rot = |s: &YearSeries| {
            let mut v = s.values().to_vec();
            v.rotate_left(k % tb.ts());
            YearSeries::new(v, s.unit(), tb).expect("rotation keeps values valid")
        };
        Self {
            load: rot(&self.load),
            pv_factor: rot(&self.pv_factor),
            wind_factor: rot(&self.wind_factor),
            soc_frac: rot(&self.soc_frac),
        }
    }
}

/// Combined renewable output per step for a design.
pub(crate) fn renewable_output(series: &SiteSeries, design: &SystemDesign) -> Vec<f64> {
    series
        .pv_factor
        .values()
        .iter()
        .zip(series.wind_factor.values())
        .map(|(pv, wind)| design.pv_kw * pv + design.wind_kw * wind)
        .collect()
}

/// Counts met steps from `start` until the first unmet step or `limit`.
/// Inputs must be validated already.
pub(crate) fn survive(
    start: usize,
    limit: usize,
    load: &[f64],
    renewable: &[f64],
    soc_frac: &[f64],
    design: &SystemDesign,
    dt_hours: f64,
) -> usize {
    let ts = load.len();
    let mut state = design.outage_start(soc_frac[start]);
    let mut t = start;
    for k in 0..limit {
        let (res, next) = step(load[t], renewable[t], design, state, dt_hours);
        if !res.met {
            return k;
        }
        state = next;
        t += 1;
        if t == ts {
            t = 0;
        }
    }
    limit
}

fn check_start(start: usize, tb: &TimeBase) -> Result<(), DispatchError> {
    if start >= tb.ts() {
        return Err(SeriesError::IndexOutOfRange {
            index: start,
            ts: tb.ts(),
        }
        .into());
    }
    Ok(())
}

/// Number of consecutive steps, starting at `start`, for which the system
/// carries the critical load without the grid. The year wraps around and the
/// count is capped at one full year.
pub fn simulate_outage(
    start: usize,
    series: &SiteSeries,
    design: &SystemDesign,
    tb: &TimeBase,
) -> Result<usize, DispatchError> {
    series.check(tb)?;
    design.validate()?;
    check_start(start, tb)?;
    let renewable = renewable_output(series, design);
    Ok(survive(
        start,
        tb.ts(),
        series.load.values(),
        &renewable,
        series.soc_frac.values(),
        design,
        tb.dt_hours(),
    ))
}

/// One recorded step of [`trace_outage`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceStep {
    pub index: usize,
    pub load_kw: f64,
    pub pv_out_kw: f64,
    pub wind_out_kw: f64,
    pub result: StepResult,
    /// State after the step.
    pub state: OutageState,
}

/// Step-by-step record of one outage, up to and including the first unmet
/// step, at most `max_steps` long.
pub fn trace_outage(
    start: usize,
    max_steps: usize,
    series: &SiteSeries,
    design: &SystemDesign,
    tb: &TimeBase,
) -> Result<Vec<TraceStep>, DispatchError> {
    series.check(tb)?;
    design.validate()?;
    check_start(start, tb)?;
    let mut state = design.outage_start(series.soc_frac[start]);
    let mut out = Vec::new();
    for k in 0..max_steps.min(tb.ts()) {
        let t = (start + k) % tb.ts();
        let pv = design.pv_kw * series.pv_factor[t];
        let wind = design.wind_kw * series.wind_factor[t];
        let (result, next) = dispatch_step(series.load[t], pv, wind, design, state, tb.dt_hours())?;
        state = next;
        out.push(TraceStep {
            index: t,
            load_kw: series.load[t],
            pv_out_kw: pv,
            wind_out_kw: wind,
            result,
            state,
        });
        if !result.met {
            break;
        }
    }
    Ok(out)
}
