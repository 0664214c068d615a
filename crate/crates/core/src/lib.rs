//! Resilience assessment for behind-the-meter distributed energy systems.
//!
//! A fixed system design (PV, wind, battery, diesel generator) is dispatched
//! against the critical load during a grid outage that starts at every step
//! of a year in turn. The resulting survival durations are turned into
//! probabilities of riding through outages of a given length, overall and
//! by start hour and month. A grid search sizes the cheapest design that
//! survives one chosen outage window.
//!
//! ```
//! use resil_core::{simulate_year, summary, SiteSeries, SystemDesign, TimeBase, Unit, YearSeries};
//!
//! let tb = TimeBase::hourly();
//! let load = YearSeries::constant(10.0, Unit::Kw, &tb).unwrap();
//! let series = SiteSeries::from_load(load, &tb);
//! let design = SystemDesign {
//!     gen_kw: 10.0,
//!     fuel_available_gal: 5.0,
//!     fuel_slope_gal_per_kwh: 0.1,
//!     ..SystemDesign::default()
//! };
//! let r = simulate_year(&series, &design, &tb).unwrap();
//! assert_eq!(summary(&r).mean_hours, 5.0);
//! ```

pub mod dispatch;
pub mod sizing;
pub mod stats;
pub mod sweep;
pub mod timebase;

pub use dispatch::{
    dispatch_step, simulate_outage, trace_outage, DispatchError, OutageState, SiteSeries,
    StepResult, SystemDesign, TraceStep,
};
pub use sizing::{
    size_system, window_feasible, CostCoefficients, OutageWindow, SizingError, SizingOutcome,
    SizingSpec,
};
pub use stats::{
    aggregate, probability_curve, survival_probability, AggregatedCurves, Comparator,
    ProbabilityCurve, StatsError,
};
pub use sweep::{
    simulate_year, simulate_year_with, summary, Parallelism, Summary, SurvivalError, SurvivalSeries,
};
pub use timebase::{
    parse_series, parse_series_with, SeriesError, SeriesOptions, TimeBase, Unit, YearSeries,
    HOURS_PER_YEAR,
};
