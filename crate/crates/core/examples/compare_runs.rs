//! Runs the passive benchmark, the boosted ensemble and Model A through the
//! full report pipeline on one synthetic dataset, then compares them.
//!
//! cargo run --release --example compare_runs

use es_daytime::cli::{compare_runs, run_experiment, ExperimentConfig};
use es_daytime::data::{bars_to_csv, rates_to_csv};
use es_daytime::signals::ModelKind;
use es_daytime::synth::{synth_market, SynthConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let root = std::env::temp_dir().join("es-daytime-compare");
    std::fs::create_dir_all(&root)?;
    let m = synth_market(&SynthConfig { days: 800, ..SynthConfig::default() });
    std::fs::write(root.join("es.csv"), bars_to_csv(&m.es, true))?;
    std::fs::write(root.join("vix.csv"), bars_to_csv(&m.vix, false))?;
    std::fs::write(root.join("rates.csv"), rates_to_csv(&m.rates))?;

    let mut dirs = Vec::new();
    for kind in [ModelKind::Gbt, ModelKind::ModelA, ModelKind::Passive] {
        let out = root.join(kind.id());
        let text = format!(
            "name = \"{id}\"\nmodel = \"{id}\"\nmaster_seed = 7\nout_dir = \"{out}\"\n\
             [paths]\nes_csv = \"{dir}/es.csv\"\nvix_csv = \"{dir}/vix.csv\"\nrates_csv = \"{dir}/rates.csv\"\n",
            id = kind.id(),
            out = out.display(),
            dir = root.display()
        );
        let outcome = run_experiment(&ExperimentConfig::from_toml(&text)?)?;
        println!("{:<8} final equity {:.4}", kind.id(), outcome.final_equity);
        dirs.push(out);
    }
    let cmp = compare_runs(&dirs, &root.join("compare"))?;
    println!("{}", cmp.markdown);
    println!("charts and tables in {}", root.join("compare").display());
    Ok(())
}
