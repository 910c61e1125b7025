//! Steps the two-agent model through a synthetic year one day at a time,
//! printing the exposure threshold it picks after each refit and the days
//! on which it stays out of the market.
//!
//! cargo run --release --example model_a

use es_daytime::metrics::exposure_stats;
use es_daytime::signals::{DecisionView, ModelA, ModelASpec, SignalModel, TrainSlice};
use es_daytime::synth::{synth_dataset, SynthConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let ds = synth_dataset(&SynthConfig { days: 400, ..SynthConfig::default() });
    let days = ds.days();
    let train = 250;
    let mut model = ModelA::new(ModelASpec::default());
    let mut decisions = Vec::new();
    let mut returns = Vec::new();
    for t in train..days.len() {
        model.fit(&TrainSlice::new(&days[..t], t - train), 42 ^ (t - train) as u64)?;
        let d = model.decide(&DecisionView::at(days, t))?;
        let theta = model.state().map_or(f64::NAN, |s| s.theta());
        if (t - train) % 25 == 0 {
            println!(
                "{}  theta {:.2}  {:<6} {:?}  return {:+.3}%",
                days[t].date,
                theta,
                if d.is_open() { "open" } else { "closed" },
                d.direction,
                100.0 * d.position() * days[t].daytime_return
            );
        }
        decisions.push(d);
        returns.push(d.position() * days[t].daytime_return);
    }
    let e = exposure_stats(&decisions, &returns)?;
    println!(
        "long {:.1}% of days, short {:.1}%, closed {:.1}%",
        100.0 * e.long_share,
        100.0 * e.short_share,
        100.0 * (1.0 - e.total_exposure())
    );
    Ok(())
}
