//! Test support shared by the integration and acceptance suites: naive
//! reference implementations and fixture generators.
#![allow(dead_code)]

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use resil_core::{OutageWindow, SiteSeries, SizingSpec, SystemDesign, TimeBase, Unit, YearSeries};

pub const EPS: f64 = 1e-9;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Straight-line load-following dispatch, written out step by step without
/// any of the library's helpers. Returns the number of hours survived.
pub fn naive_survival(
    start: usize,
    load: &[f64],
    pv_factor: &[f64],
    wind_factor: &[f64],
    soc_frac: &[f64],
    d: &SystemDesign,
    dt: f64,
) -> usize {
    let ts = load.len();
    let floor = d.soc_min_frac * d.storage_kwh;
    let mut frac = soc_frac[start];
    if frac < d.soc_min_frac {
        frac = d.soc_min_frac;
    }
    if frac > 1.0 {
        frac = 1.0;
    }
    let mut soc = frac * d.storage_kwh;
    let mut fuel = d.fuel_available_gal;

    let mut survived = 0;
    while survived < ts {
        let t = (start + survived) % ts;
        let renewable = d.pv_kw * pv_factor[t] + d.wind_kw * wind_factor[t];
        let remaining = load[t] - renewable;

        if remaining <= 0.0 {
            // store what fits, dissipate the rest
            if d.storage_kw > 0.0 {
                let room_kw = (d.storage_kwh - soc).max(0.0) / (d.charge_eff * dt);
                let mut p = -remaining;
                if p > d.storage_kw {
                    p = d.storage_kw;
                }
                if p > room_kw {
                    p = room_kw;
                }
                soc = (soc + p * d.charge_eff * dt).min(d.storage_kwh);
            }
            survived += 1;
            continue;
        }

        let mut ok = false;
        if d.gen_kw > 0.0 && d.gen_kw >= remaining - EPS {
            let mut out = remaining;
            if out < d.min_turndown_frac * d.gen_kw {
                out = d.min_turndown_frac * d.gen_kw;
            }
            let burn = (d.fuel_slope_gal_per_kwh * out + d.fuel_intercept_gal_per_hr) * dt;
            if fuel >= burn - EPS {
                fuel = (fuel - burn).max(0.0);
                let spare = out - remaining;
                if spare > 0.0 && d.storage_kw > 0.0 {
                    let room_kw = (d.storage_kwh - soc).max(0.0) / (d.charge_eff * dt);
                    let p = spare.min(d.storage_kw).min(room_kw);
                    soc = (soc + p * d.charge_eff * dt).min(d.storage_kwh);
                }
                ok = true;
            }
        }
        if !ok && d.storage_kw > 0.0 {
            let mut can = (soc - floor).max(0.0) * d.discharge_eff / dt;
            if can > d.storage_kw {
                can = d.storage_kw;
            }
            if can >= remaining - EPS {
                soc = (soc - remaining * dt / d.discharge_eff).max(floor);
                ok = true;
            }
        }
        if !ok {
            break;
        }
        survived += 1;
    }
    survived
}

pub fn naive_year(series: &SiteSeries, d: &SystemDesign, tb: &TimeBase) -> Vec<usize> {
    (0..tb.ts())
        .map(|j| {
            naive_survival(
                j,
                series.load.values(),
                series.pv_factor.values(),
                series.wind_factor.values(),
                series.soc_frac.values(),
                d,
                tb.dt_hours(),
            )
        })
        .collect()
}

/// Share of `subset` whose survival in hours exceeds (or reaches, when not
/// strict) `d_hours`, by direct counting.
pub fn count_probability(
    steps: &[usize],
    steps_per_hour: usize,
    d_hours: f64,
    subset: &[usize],
    strict: bool,
) -> f64 {
    let mut hits = 0usize;
    for &j in subset {
        let hours = steps[j] as f64 / steps_per_hour as f64;
        let survives = if strict {
            hours > d_hours
        } else {
            hours >= d_hours
        };
        if survives {
            hits += 1;
        }
    }
    hits as f64 / subset.len() as f64
}

/// Bell-shaped PV output between 06:00 and 18:00 with a seasonal swing.
pub fn solar_factor(index: usize, steps_per_hour: usize) -> f64 {
    let hour = (index as f64 + 0.5) / steps_per_hour as f64;
    let hod = hour % 24.0;
    let day = (hour / 24.0).floor();
    if !(6.0..18.0).contains(&hod) {
        return 0.0;
    }
    let season = 0.75 + 0.25 * (2.0 * std::f64::consts::PI * (day - 172.0) / 365.0).cos();
    season * (std::f64::consts::PI * (hod - 6.0) / 12.0).sin()
}

/// Retail-style load: business hours busier than nights, weekends at half
/// of weekdays. Day 0 is a Sunday.
pub fn retail_load(index: usize, steps_per_hour: usize) -> f64 {
    let hour = index / steps_per_hour;
    let hod = hour % 24;
    let dow = (hour / 24) % 7;
    let weekday = if (8..20).contains(&hod) { 140.0 } else { 60.0 };
    if dow == 0 || dow == 6 {
        weekday / 2.0
    } else {
        weekday
    }
}

pub fn retail_site(tb: &TimeBase) -> SiteSeries {
    let sph = tb.steps_per_hour();
    let load = (0..tb.ts()).map(|i| retail_load(i, sph)).collect();
    let pv = (0..tb.ts()).map(|i| solar_factor(i, sph)).collect();
    let mut s = SiteSeries::from_load(YearSeries::new(load, Unit::Kw, tb).unwrap(), tb);
    s.pv_factor = YearSeries::new(pv, Unit::Factor, tb).unwrap();
    s
}

/// Random load, PV, wind and SOC series over `tb`.
pub fn random_site<R: Rng>(rng: &mut R, tb: &TimeBase) -> SiteSeries {
    let sph = tb.steps_per_hour();
    let peak = rng.gen_range(5.0..50.0);
    let load = (0..tb.ts())
        .map(|_| {
            if rng.gen_bool(0.1) {
                0.0
            } else {
                rng.gen_range(0.0..peak)
            }
        })
        .collect();
    let pv = (0..tb.ts())
        .map(|i| solar_factor(i, sph) * rng.gen_range(0.2..1.0))
        .collect();
    let wind = (0..tb.ts())
        .map(|_| {
            if rng.gen_bool(0.5) {
                0.0
            } else {
                rng.gen_range(0.0..1.0)
            }
        })
        .collect();
    let soc = (0..tb.ts()).map(|_| rng.gen_range(0.0..=1.0)).collect();
    SiteSeries {
        load: YearSeries::new(load, Unit::Kw, tb).unwrap(),
        pv_factor: YearSeries::new(pv, Unit::Factor, tb).unwrap(),
        wind_factor: YearSeries::new(wind, Unit::Factor, tb).unwrap(),
        soc_frac: YearSeries::new(soc, Unit::Fraction, tb).unwrap(),
    }
}

/// Random design; each technology is absent with some probability so that
/// single-technology and zero-capacity paths get exercised.
pub fn random_design<R: Rng>(rng: &mut R) -> SystemDesign {
    let pick = |rng: &mut R, p: f64, hi: f64| {
        if rng.gen_bool(p) {
            rng.gen_range(0.0..hi)
        } else {
            0.0
        }
    };
    let storage_kwh = pick(rng, 0.8, 200.0);
    SystemDesign {
        pv_kw: pick(rng, 0.7, 60.0),
        wind_kw: pick(rng, 0.4, 30.0),
        storage_kw: if storage_kwh > 0.0 {
            rng.gen_range(0.0..60.0)
        } else {
            0.0
        },
        storage_kwh,
        soc_min_frac: rng.gen_range(0.0..0.5),
        charge_eff: rng.gen_range(0.8..=1.0),
        discharge_eff: rng.gen_range(0.8..=1.0),
        gen_kw: pick(rng, 0.7, 50.0),
        fuel_available_gal: rng.gen_range(0.0..60.0),
        fuel_slope_gal_per_kwh: rng.gen_range(0.0..0.12),
        fuel_intercept_gal_per_hr: pick(rng, 0.5, 1.0),
        min_turndown_frac: pick(rng, 0.5, 0.6),
    }
}

/// Cheapest design over the full grid product, ties broken on
/// (pv_kw, storage_kwh, storage_kw, gen_kw). Feasibility comes from the naive
/// dispatch.
pub fn exhaustive_sizing(
    spec: &SizingSpec,
    window: &OutageWindow,
    series: &SiteSeries,
    tb: &TimeBase,
) -> Option<(SystemDesign, f64)> {
    let mut best: Option<(SystemDesign, f64)> = None;
    for &pv in &spec.pv_kw {
        for &skw in &spec.storage_kw {
            for &skwh in &spec.storage_kwh {
                for &gen in &spec.gen_kw {
                    if skwh == 0.0 && skw > 0.0 {
                        continue;
                    }
                    let d = SystemDesign {
                        pv_kw: pv,
                        storage_kw: skw,
                        storage_kwh: skwh,
                        gen_kw: gen,
                        ..spec.base
                    };
                    let survived = naive_survival(
                        window.start,
                        series.load.values(),
                        series.pv_factor.values(),
                        series.wind_factor.values(),
                        series.soc_frac.values(),
                        &d,
                        tb.dt_hours(),
                    );
                    if survived < window.duration_steps {
                        continue;
                    }
                    let cost = spec.costs.per_pv_kw * pv
                        + spec.costs.per_storage_kw * skw
                        + spec.costs.per_storage_kwh * skwh
                        + spec.costs.per_gen_kw * gen;
                    let better = match &best {
                        None => true,
                        Some((b, c)) => {
                            let key =
                                |d: &SystemDesign| (d.pv_kw, d.storage_kwh, d.storage_kw, d.gen_kw);
                            cost < *c || (cost == *c && key(&d) < key(b))
                        }
                    };
                    if better {
                        best = Some((d, cost));
                    }
                }
            }
        }
    }
    best
}

/// Ascending grid of `n` values starting at 0 with uneven spacing.
pub fn random_grid<R: Rng>(rng: &mut R, n: usize, step: f64) -> Vec<f64> {
    let mut v = vec![0.0];
    while v.len() < n {
        let next = v.last().unwrap() + step * rng.gen_range(1..4) as f64;
        v.push(next);
    }
    v
}
