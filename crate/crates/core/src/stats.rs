//! Survival probabilities derived from a [`SurvivalSeries`].
//!
//! P(d) is the share of outage starts whose survived duration is longer
//! than d hours. Curves are evaluated at whole hours d = 1..=r_max, overall
//! and grouped by the start's hour of day and calendar month.

use std::fmt::Write as _;
use std::str::FromStr;

use thiserror::Error;

use crate::sweep::SurvivalSeries;
use crate::timebase::TimeBase;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("start subset is empty")]
    EmptySubset,
    #[error("duration must be positive and finite, got {0}")]
    InvalidDuration(f64),
    #[error("start index {index} outside the year [0, {ts})")]
    IndexOutOfRange { index: usize, ts: usize },
}

/// How a start that survived exactly d hours counts towards P(d).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
pub enum Comparator {
    /// Survived strictly longer than d.
    #[default]
    Strict,
    /// Survived at least d.
    Inclusive,
}

impl FromStr for Comparator {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "strict" => Ok(Comparator::Strict),
            "inclusive" => Ok(Comparator::Inclusive),
            other => Err(format!("expected strict or inclusive, got {other:?}")),
        }
    }
}

impl Comparator {
    #[inline]
    fn survives(self, steps: f64, threshold_steps: f64) -> bool {
        match self {
            Comparator::Strict => steps > threshold_steps,
            Comparator::Inclusive => steps >= threshold_steps,
        }
    }
}

/// P(d) for d = 1..=r_max_hours.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityCurve {
    /// `p[i]` is the probability for a duration of `i + 1` hours.
    pub p: Vec<f64>,
    pub r_max_hours: usize,
}

impl ProbabilityCurve {
    /// Probability at a whole-hour duration; 0 beyond the curve.
    pub fn at(&self, d_hours: usize) -> f64 {
        assert!(d_hours >= 1, "durations start at 1 hour");
        self.p.get(d_hours - 1).copied().unwrap_or(0.0)
    }

    /// CSV with header `duration_hours,probability`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("duration_hours,probability\n");
        for (i, p) in self.p.iter().enumerate() {
            let _ = writeln!(out, "{},{}", i + 1, p);
        }
        out
    }
}

fn subset_indices<'a>(
    r: &SurvivalSeries,
    subset: Option<&'a [usize]>,
) -> Result<Option<&'a [usize]>, StatsError> {
    match subset {
        Some([]) => Err(StatsError::EmptySubset),
        Some(idx) => {
            if let Some(&index) = idx.iter().find(|&&i| i >= r.len()) {
                return Err(StatsError::IndexOutOfRange { index, ts: r.len() });
            }
            Ok(Some(idx))
        }
        None if r.is_empty() => Err(StatsError::EmptySubset),
        None => Ok(None),
    }
}

/// Share of starts (all, or those in `subset`) that survive `d_hours`.
pub fn survival_probability(
    r: &SurvivalSeries,
    d_hours: f64,
    subset: Option<&[usize]>,
    cmp: Comparator,
) -> Result<f64, StatsError> {
    if !(d_hours.is_finite() && d_hours > 0.0) {
        return Err(StatsError::InvalidDuration(d_hours));
    }
    let subset = subset_indices(r, subset)?;
    let threshold = d_hours * r.timebase().steps_per_hour() as f64;
    let steps = r.steps();
    let (hits, n) = match subset {
        Some(idx) => (
            idx.iter()
                .filter(|&&j| cmp.survives(steps[j] as f64, threshold))
                .count(),
            idx.len(),
        ),
        None => (
            steps
                .iter()
                .filter(|&&s| cmp.survives(s as f64, threshold))
                .count(),
            steps.len(),
        ),
    };
    Ok(hits as f64 / n as f64)
}

/// Whole hours needed to cover `steps`.
fn ceil_hours(steps: usize, tb: &TimeBase) -> usize {
    steps.div_ceil(tb.steps_per_hour())
}

/// Curve over d = 1..=len from a histogram of survived steps.
fn curve_from_histogram(
    hist: &[usize],
    n: usize,
    len: usize,
    sph: usize,
    cmp: Comparator,
) -> Vec<f64> {
    // at_least[s] = number of starts with at least s steps
    let mut at_least = vec![0usize; hist.len() + 1];
    for s in (0..hist.len()).rev() {
        at_least[s] = at_least[s + 1] + hist[s];
    }
    let last = hist.len();
    (1..=len)
        .map(|d| {
            let threshold = d * sph;
            let from = match cmp {
                Comparator::Strict => threshold + 1,
                Comparator::Inclusive => threshold,
            };
            if n == 0 {
                0.0
            } else {
                at_least[from.min(last)] as f64 / n as f64
            }
        })
        .collect()
}

fn histogram(r: &SurvivalSeries, subset: Option<&[usize]>) -> (Vec<usize>, usize) {
    let mut hist = vec![0usize; r.timebase().ts() + 1];
    let steps = r.steps();
    match subset {
        Some(idx) => idx.iter().for_each(|&j| hist[steps[j]] += 1),
        None => steps.iter().for_each(|&s| hist[s] += 1),
    }
    let n = subset.map_or(steps.len(), <[usize]>::len);
    (hist, n)
}

/// P(d) for every whole hour d from 1 to the longest survived duration in
/// the subset (rounded up to whole hours).
pub fn probability_curve(
    r: &SurvivalSeries,
    subset: Option<&[usize]>,
    cmp: Comparator,
) -> Result<ProbabilityCurve, StatsError> {
    let subset = subset_indices(r, subset)?;
    let tb = r.timebase();
    let max_steps = match subset {
        Some(idx) => idx.iter().map(|&j| r.steps()[j]).max().unwrap_or(0),
        None => r.max_steps(),
    };
    let r_max_hours = ceil_hours(max_steps, tb);
    let (hist, n) = histogram(r, subset);
    Ok(ProbabilityCurve {
        p: curve_from_histogram(&hist, n, r_max_hours, tb.steps_per_hour(), cmp),
        r_max_hours,
    })
}

/// Probability curves grouped by the start's hour of day and month.
///
/// All curves span the global r_max so rows line up. Each group's
/// probabilities use its own size as denominator; a group with no starts
/// (only possible on a truncated year) has an all-zero curve.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregatedCurves {
    pub by_hour: Vec<ProbabilityCurve>,
    pub by_month: Vec<ProbabilityCurve>,
    pub hour_counts: [usize; 24],
    pub month_counts: [usize; 12],
    pub r_max_hours: usize,
}

pub fn aggregate(r: &SurvivalSeries, tb: &TimeBase, cmp: Comparator) -> AggregatedCurves {
    assert_eq!(
        r.timebase(),
        tb,
        "survival series built on another time base"
    );
    let sph = tb.steps_per_hour();
    let r_max_hours = ceil_hours(r.max_steps(), tb);
    let mut hour_hist = vec![vec![0usize; tb.ts() + 1]; 24];
    let mut month_hist = vec![vec![0usize; tb.ts() + 1]; 12];
    let mut hour_counts = [0usize; 24];
    let mut month_counts = [0usize; 12];
    for (j, &s) in r.steps().iter().enumerate() {
        let h = tb.hour_of_day(j).expect("index within year");
        let m = tb.month_of(j).expect("index within year") - 1;
        hour_hist[h][s] += 1;
        month_hist[m][s] += 1;
        hour_counts[h] += 1;
        month_counts[m] += 1;
    }
    let build = |hist: &[usize], n: usize| ProbabilityCurve {
        p: curve_from_histogram(hist, n, r_max_hours, sph, cmp),
        r_max_hours,
    };
    AggregatedCurves {
        by_hour: hour_hist
            .iter()
            .zip(hour_counts)
            .map(|(h, n)| build(h, n))
            .collect(),
        by_month: month_hist
            .iter()
            .zip(month_counts)
            .map(|(h, n)| build(h, n))
            .collect(),
        hour_counts,
        month_counts,
        r_max_hours,
    }
}

fn matrix_csv<'a>(
    row_header: &str,
    rows: impl Iterator<Item = (usize, &'a ProbabilityCurve)>,
    width: usize,
) -> String {
    let mut out = String::from(row_header);
    for d in 1..=width {
        let _ = write!(out, ",{d}");
    }
    out.push('\n');
    for (label, curve) in rows {
        let _ = write!(out, "{label}");
        for d in 1..=width {
            let _ = write!(out, ",{}", curve.at(d));
        }
        out.push('\n');
    }
    out
}

impl AggregatedCurves {
    /// 24 rows (hour 0..23) by r_max duration columns.
    pub fn by_hour_csv(&self) -> String {
        matrix_csv(
            "hour_of_day",
            self.by_hour.iter().enumerate(),
            self.r_max_hours,
        )
    }

    /// 12 rows (month 1..12) by r_max duration columns.
    pub fn by_month_csv(&self) -> String {
        matrix_csv(
            "month",
            self.by_month.iter().enumerate().map(|(m, c)| (m + 1, c)),
            self.r_max_hours,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy(steps: Vec<usize>) -> SurvivalSeries {
        let tb = TimeBase::truncated(1, steps.len()).unwrap();
        SurvivalSeries::new(steps, tb).unwrap()
    }

    #[test]
    fn three_start_probabilities() {
        // a 3-step year cannot hold a 4 h survival, so use a subset of a 4-step one
        let tb = TimeBase::truncated(1, 4).unwrap();
        let r4 = SurvivalSeries::new(vec![2, 2, 4, 0], tb).unwrap();
        let sub = [0usize, 1, 2];
        let p = |d| survival_probability(&r4, d, Some(&sub), Comparator::Strict).unwrap();
        assert_eq!(p(1.0), 1.0);
        assert_eq!(p(2.0), 1.0 / 3.0);
        assert_eq!(p(3.0), 1.0 / 3.0);
        assert_eq!(p(4.0), 0.0);
        let c = probability_curve(&r4, Some(&sub), Comparator::Strict).unwrap();
        assert_eq!(c.p, vec![1.0, 1.0 / 3.0, 1.0 / 3.0, 0.0]);
        assert_eq!(c.r_max_hours, 4);
        let all = probability_curve(&r4, None, Comparator::Strict).unwrap();
        assert_eq!(all.p, vec![0.75, 0.25, 0.25, 0.0]);
    }

    #[test]
    fn single_start_curve() {
        let tb = TimeBase::truncated(1, 6).unwrap();
        let r = SurvivalSeries::new(vec![0, 0, 5, 0, 0, 0], tb).unwrap();
        let c = probability_curve(&r, Some(&[2]), Comparator::Strict).unwrap();
        assert_eq!(c.p, vec![1.0, 1.0, 1.0, 1.0, 0.0]);
        let c = probability_curve(&r, Some(&[2]), Comparator::Inclusive).unwrap();
        assert_eq!(c.p, vec![1.0, 1.0, 1.0, 1.0, 1.0]);
    }

    #[test]
    fn full_survival() {
        let tb = TimeBase::hourly();
        let r = SurvivalSeries::new(vec![8760; 8760], tb).unwrap();
        for d in [1.0, 24.0, 8759.0, 8759.5] {
            assert_eq!(
                survival_probability(&r, d, None, Comparator::Strict).unwrap(),
                1.0
            );
        }
        assert_eq!(
            survival_probability(&r, 8760.0, None, Comparator::Strict).unwrap(),
            0.0
        );
        let c = probability_curve(&r, None, Comparator::Strict).unwrap();
        assert_eq!(c.r_max_hours, 8760);
        assert_eq!(c.at(8760), 0.0);
        assert_eq!(c.at(8759), 1.0);
    }

    #[test]
    fn errors() {
        let r = toy(vec![1, 2, 3]);
        assert_eq!(
            survival_probability(&r, 1.0, Some(&[]), Comparator::Strict),
            Err(StatsError::EmptySubset)
        );
        assert_eq!(
            probability_curve(&r, Some(&[]), Comparator::Strict),
            Err(StatsError::EmptySubset)
        );
        assert!(matches!(
            survival_probability(&r, 0.0, None, Comparator::Strict),
            Err(StatsError::InvalidDuration(_))
        ));
        assert!(matches!(
            survival_probability(&r, f64::NAN, None, Comparator::Strict),
            Err(StatsError::InvalidDuration(_))
        ));
        assert!(matches!(
            survival_probability(&r, 1.0, Some(&[3]), Comparator::Strict),
            Err(StatsError::IndexOutOfRange { index: 3, .. })
        ));
    }

    #[test]
    fn sub_hourly_durations() {
        // quarter-hour steps: 5 steps = 1.25 h, 4 steps = 1 h
        let tb = TimeBase::truncated(4, 8).unwrap();
        let r = SurvivalSeries::new(vec![5, 4, 0, 1, 0, 0, 0, 0], tb).unwrap();
        let c = probability_curve(&r, None, Comparator::Strict).unwrap();
        assert_eq!(c.r_max_hours, 2);
        assert_eq!(c.p, vec![0.125, 0.0]);
        let c = probability_curve(&r, None, Comparator::Inclusive).unwrap();
        assert_eq!(c.p, vec![0.25, 0.0]);
        assert_eq!(
            survival_probability(&r, 0.25, None, Comparator::Strict).unwrap(),
            0.25
        );
    }

    #[test]
    fn zero_survival_curve_is_empty() {
        let r = toy(vec![0; 5]);
        let c = probability_curve(&r, None, Comparator::Strict).unwrap();
        assert!(c.p.is_empty());
        assert_eq!(c.to_csv(), "duration_hours,probability\n");
    }

    #[test]
    fn constant_series_gives_identical_hour_rows() {
        let tb = TimeBase::hourly();
        let r = SurvivalSeries::new(vec![7; 8760], tb).unwrap();
        let agg = aggregate(&r, &tb, Comparator::Strict);
        let overall = probability_curve(&r, None, Comparator::Strict).unwrap();
        assert!(agg.by_hour.iter().all(|c| *c == overall));
        assert!(agg.by_month.iter().all(|c| *c == overall));
        assert!(agg.hour_counts.iter().all(|&n| n == 365));
        for m in 1..=12 {
            assert_eq!(agg.month_counts[m - 1], tb.steps_in_month(m));
        }
    }

    #[test]
    fn only_noon_starts_survive() {
        let tb = TimeBase::hourly();
        let steps = (0..8760)
            .map(|j| if j % 24 == 12 { 10 } else { 0 })
            .collect();
        let r = SurvivalSeries::new(steps, tb).unwrap();
        let agg = aggregate(&r, &tb, Comparator::Strict);
        assert_eq!(agg.r_max_hours, 10);
        for d in 1..10 {
            assert_eq!(agg.by_hour[12].at(d), 1.0);
        }
        assert_eq!(agg.by_hour[12].at(10), 0.0);
        for h in (0..24).filter(|&h| h != 12) {
            assert!(agg.by_hour[h].p.iter().all(|&p| p == 0.0));
            assert_eq!(agg.by_hour[h].p.len(), 10);
        }
    }

    #[test]
    fn matrix_csv_layout() {
        let tb = TimeBase::hourly();
        let steps = (0..8760).map(|j| if j % 24 == 1 { 2 } else { 0 }).collect();
        let r = SurvivalSeries::new(steps, tb).unwrap();
        let agg = aggregate(&r, &tb, Comparator::Strict);
        let hours = agg.by_hour_csv();
        let lines: Vec<_> = hours.lines().collect();
        assert_eq!(lines.len(), 25);
        assert_eq!(lines[0], "hour_of_day,1,2");
        assert_eq!(lines[1], "0,0,0");
        assert_eq!(lines[2], "1,1,0");
        let months = agg.by_month_csv();
        let lines: Vec<_> = months.lines().collect();
        assert_eq!(lines.len(), 13);
        assert_eq!(lines[0], "month,1,2");
        assert_eq!(lines[1], format!("1,{},0", 1.0 / 24.0));
    }

    #[test]
    fn comparator_parse() {
        assert_eq!("strict".parse::<Comparator>().unwrap(), Comparator::Strict);
        assert_eq!(
            "inclusive".parse::<Comparator>().unwrap(),
            Comparator::Inclusive
        );
        assert!("loose".parse::<Comparator>().is_err());
    }
}
