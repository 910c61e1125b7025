//! Synthetic ES, VIX and T-bill series for tests, examples and smoke runs.
//!
//! ES follows a geometric random walk split into an overnight gap and a
//! daytime move. `gap_signal` lets the daytime move lean on the gap, which
//! is visible at the open, so classifiers have something to find. VIX is a
//! log AR(1) around its long-run level that rises when ES falls.

use chrono::{Datelike, Days, NaiveDate, Weekday};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal, Normal};

use crate::data::{align_sessions, Bar, Dataset, RatePoint};

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    /// Aligned sessions wanted; one extra ES bar is generated for the
    /// volume lag.
    pub days: usize,
    pub seed: u64,
    pub start: NaiveDate,
    pub es_start: f64,
    pub vix_level: f64,
    pub annual_drift: f64,
    pub daily_vol: f64,
    /// Slope of the daytime log-return on the overnight gap.
    pub gap_signal: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            days: 1509,
            seed: 7,
            start: NaiveDate::from_ymd_opt(2018, 1, 2).expect("valid date"),
            es_start: 2700.0,
            vix_level: 18.0,
            annual_drift: 0.05,
            daily_vol: 0.009,
            gap_signal: 0.3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthMarket {
    pub es: Vec<Bar>,
    pub vix: Vec<Bar>,
    pub rates: Vec<RatePoint>,
}

fn round_to(x: f64, tick: f64) -> f64 {
    (x / tick).round() * tick
}

fn business_days(start: NaiveDate, n: usize) -> Vec<NaiveDate> {
    let mut out = Vec::with_capacity(n);
    let mut d = start;
    while out.len() < n {
        if !matches!(d.weekday(), Weekday::Sat | Weekday::Sun) {
            out.push(d);
        }
        d = d + Days::new(1);
    }
    out
}

fn bar(date: NaiveDate, open: f64, close: f64, wick_up: f64, wick_down: f64, tick: f64) -> Bar {
    let open = round_to(open, tick);
    let close = round_to(close, tick);
    let high = round_to(open.max(close) * (1.0 + wick_up), tick).max(open.max(close));
    let low = round_to(open.min(close) * (1.0 - wick_down), tick)
        .min(open.min(close))
        .max(tick);
    Bar {
        date,
        open,
        high,
        low,
        close,
        volume: None,
    }
}

pub fn synth_market(cfg: &SynthConfig) -> SynthMarket {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let std_normal = Normal::new(0.0, 1.0).expect("valid normal");
    let volume_dist = LogNormal::<f64>::new(14.2, 0.35).expect("valid lognormal");
    let dates = business_days(cfg.start, cfg.days + 1);

    let gap_vol = cfg.daily_vol * 0.5;
    let day_vol = cfg.daily_vol * 0.85;
    let drift = cfg.annual_drift / 252.0;
    let mut es_close = cfg.es_start;
    let mut log_vix = cfg.vix_level.ln();
    let mut vix_close = cfg.vix_level;
    let mut es = Vec::with_capacity(dates.len());
    let mut vix = Vec::with_capacity(dates.len());

    for &date in &dates {
        let gap = gap_vol * std_normal.sample(&mut rng);
        let open = es_close * gap.exp();
        let move_ = drift + cfg.gap_signal * gap + day_vol * std_normal.sample(&mut rng);
        let close = open * move_.exp();
        let wick = |rng: &mut ChaCha8Rng| (cfg.daily_vol * 0.3 * std_normal.sample(rng)).abs();
        let (up, down) = (wick(&mut rng), wick(&mut rng));
        let mut b = bar(date, open, close, up, down, 0.25);
        b.volume = Some(volume_dist.sample(&mut rng).round() as u64);
        es_close = b.close;

        let vix_open = vix_close * (-3.0 * gap + 0.02 * std_normal.sample(&mut rng)).exp();
        log_vix = 0.97 * log_vix + 0.03 * cfg.vix_level.ln() - 4.0 * (move_ - drift)
            + 0.03 * std_normal.sample(&mut rng);
        let (vup, vdown) = (wick(&mut rng) * 3.0, wick(&mut rng) * 3.0);
        let v = bar(date, vix_open.max(5.0), log_vix.exp().max(5.0), vup, vdown, 0.01);
        vix_close = v.close;
        log_vix = vix_close.ln();

        es.push(b);
        vix.push(v);
    }

    // Month-start yields drifting between 0% and 5%.
    let mut rates = Vec::new();
    let mut y: f64 = 1.5;
    let first = dates[0].with_day(1).expect("valid date");
    let mut m = first;
    while m <= *dates.last().expect("non-empty") {
        rates.push(RatePoint {
            date: m,
            annual_yield: round_to(y, 0.01) / 100.0,
        });
        y = (y + 0.25 * std_normal.sample(&mut rng)).clamp(0.0, 5.0);
        m = m.checked_add_months(chrono::Months::new(1)).expect("valid date");
    }
    SynthMarket { es, vix, rates }
}

pub fn synth_dataset(cfg: &SynthConfig) -> Dataset {
    let m = synth_market(cfg);
    align_sessions(&m.es, &m.vix, &m.rates).expect("synthetic series align")
}
