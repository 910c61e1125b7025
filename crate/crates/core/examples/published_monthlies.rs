//! Recomputes the performance and risk tables from the published monthly
//! returns bundled in `data/monthly`, with a T-bill series as risk-free
//! rate, and prints each strategy's calendar-year returns.
//!
//! cargo run --example published_monthlies

use std::path::Path;

use es_daytime::cli::metrics_from_files;
use es_daytime::metrics::MonthlyReturns;
use es_daytime::report::ReportTable;
use es_daytime::signals::ModelKind;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    let rates = data.join("tbill_3m_monthly.csv");
    let bench = data.join("monthly/passive.csv");

    let mut reports = Vec::new();
    for kind in ModelKind::ALL {
        let file = data.join(format!("monthly/{}.csv", kind.id()));
        let (_, report) = metrics_from_files(&file, &rates, &bench)?;
        reports.push((kind, report));
    }
    let table = ReportTable::new(
        reports
            .iter()
            .map(|(k, r)| (k.display_name().to_string(), r))
            .collect(),
    );
    println!("{}", table.to_markdown());

    println!("Calendar-year returns (compounded months)\n");
    print!("| Year |");
    for kind in ModelKind::ALL {
        print!(" {} |", kind.display_name());
    }
    println!("\n|---|{}", "---:|".repeat(ModelKind::ALL.len()));
    let monthly: Vec<MonthlyReturns> = ModelKind::ALL
        .iter()
        .map(|k| {
            let text = std::fs::read_to_string(data.join(format!("monthly/{}.csv", k.id())))?;
            Ok(MonthlyReturns::from_percent_csv(&text)?)
        })
        .collect::<Result<_, Box<dyn std::error::Error>>>()?;
    for year in 2018..=2023 {
        print!("| {year} |");
        for m in &monthly {
            let growth: f64 = m
                .months()
                .iter()
                .filter(|r| r.year == year)
                .map(|r| 1.0 + r.ret)
                .product();
            print!(" {:.2}% |", 100.0 * (growth - 1.0));
        }
        println!();
    }
    Ok(())
}
