//! Writes a synthetic market (ES, VIX, T-bill CSVs) and one run config per
//! model into a directory, ready for the command-line tool.
//!
//! cargo run --release --example synthetic_data -- demo
//! cargo run --release -- run --config demo/gbt.toml

use std::path::PathBuf;

use es_daytime::data::{bars_to_csv, rates_to_csv};
use es_daytime::signals::ModelKind;
use es_daytime::synth::{synth_market, SynthConfig};

fn main() -> std::io::Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "demo".into()));
    std::fs::create_dir_all(&dir)?;
    let cfg = SynthConfig::default();
    let m = synth_market(&cfg);
    std::fs::write(dir.join("es.csv"), bars_to_csv(&m.es, true))?;
    std::fs::write(dir.join("vix.csv"), bars_to_csv(&m.vix, false))?;
    std::fs::write(dir.join("rates.csv"), rates_to_csv(&m.rates))?;

    for kind in ModelKind::ALL {
        let text = format!(
            "# Synthetic six-year sample, seed {seed}.\n\
             name = \"{id}\"\n\
             model = \"{id}\"\n\
             train_window = 250\n\
             test_window = 50\n\
             master_seed = 42\n\
             out_dir = \"runs/{id}\"\n\
             \n\
             [paths]\n\
             es_csv = \"es.csv\"\n\
             vix_csv = \"vix.csv\"\n\
             rates_csv = \"rates.csv\"\n",
            seed = cfg.seed,
            id = kind.id()
        );
        std::fs::write(dir.join(format!("{}.toml", kind.id())), text)?;
    }
    println!(
        "wrote {} ES bars, {} VIX bars and {} rate points to {}",
        m.es.len(),
        m.vix.len(),
        m.rates.len(),
        dir.display()
    );
    Ok(())
}
