//! Runs every strategy over six synthetic years with the block (250/50) and
//! daily (250/1) retraining schedules and prints exposure and return.
//!
//! cargo run --release --example walk_forward

use std::time::Instant;

use es_daytime::backtest::{equity_curve, plan_windows, run_walkforward, RunOptions};
use es_daytime::metrics::exposure_stats;
use es_daytime::signals::{ModelKind, ModelParams};
use es_daytime::synth::{synth_dataset, SynthConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let ds = synth_dataset(&SynthConfig::default());
    let params = ModelParams::default();
    println!("{} sessions {} .. {}", ds.len(), ds.days()[0].date, ds.days()[ds.len() - 1].date);
    println!("{:<8} {:>8} {:>8} {:>8} {:>10} {:>8}", "model", "long%", "short%", "hit%", "final", "secs");

    for kind in ModelKind::ALL {
        let test_window = if kind.carries_state() { 1 } else { 50 };
        let plan = plan_windows(ds.len(), 250, test_window)?;
        let started = Instant::now();
        let series = run_walkforward(
            || params.build(kind),
            kind.carries_state(),
            &ds,
            &plan,
            42,
            &RunOptions::default(),
        )?;
        let secs = started.elapsed().as_secs_f64();
        let exposure = exposure_stats(&series.decisions(), &series.strategy_returns())?;
        let curve = equity_curve(&series.daily_returns())?;
        let labels = &ds.days()[250..];
        let hits = series
            .rows()
            .iter()
            .zip(labels)
            .filter(|(r, d)| r.decision.call() == Some(d.label))
            .count();
        println!(
            "{:<8} {:>8.2} {:>8.2} {:>8.2} {:>10.4} {:>8.1}",
            kind.id(),
            100.0 * exposure.long_share,
            100.0 * exposure.short_share,
            100.0 * hits as f64 / series.len() as f64,
            curve.last().map_or(1.0, |p| p.value),
            secs
        );
    }
    Ok(())
}
