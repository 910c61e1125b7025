//! Parses small hand-written CSVs, aligns them into trading days and shows
//! how bad input is reported.
//!
//! cargo run --example ingest_align

use es_daytime::data::{align_sessions, parse_bar_csv, parse_rate_csv};

const ES: &str = "\
date,open,high,low,close,volume
2023-01-03,3861.00,3892.50,3794.75,3824.25,1620000
2023-01-04,3840.25,3873.00,3815.00,3852.50,1710000
2023-01-05,3846.00,3850.00,3802.50,3808.75,1480000
2023-01-06,3823.00,3906.25,3802.25,3895.00,1900000
";

const VIX: &str = "\
date,open,high,low,close
2023-01-03,23.09,23.76,22.73,22.90
2023-01-04,22.90,23.41,21.97,22.01
2023-01-05,22.39,22.84,21.67,22.46
2023-01-06,22.23,22.76,21.01,21.13
";

const RATES: &str = "\
date,annual_yield_percent
2022-12-30,4.42
2023-01-05,4.48
";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let es = parse_bar_csv(ES, true)?;
    let vix = parse_bar_csv(VIX, false)?;
    let rates = parse_rate_csv(RATES)?;
    let ds = align_sessions(&es, &vix, &rates)?;

    // The first ES session has no previous volume, so it is dropped.
    println!("{} sessions, fingerprint {}", ds.len(), &ds.fingerprint()[..16]);
    for d in ds.days() {
        println!(
            "{}  open {:>8.2}  close {:>8.2}  return {:>+7.3}%  label {:?}  prev volume {}  rf {:.2}%",
            d.date,
            d.es.open,
            d.es.close,
            100.0 * d.daytime_return,
            d.label,
            d.prev_volume,
            100.0 * d.rf_annual
        );
    }

    let broken = ES.replace("3852.50,1710000", "3810.00,1710000");
    match parse_bar_csv(&broken, true) {
        Ok(_) => println!("unexpectedly parsed"),
        Err(e) => println!("close below low: {e}"),
    }
    let gap: String = VIX.lines().filter(|l| !l.starts_with("2023-01-05")).map(|l| format!("{l}\n")).collect();
    match align_sessions(&es, &parse_bar_csv(&gap, false)?, &rates) {
        Ok(_) => println!("unexpectedly aligned"),
        Err(e) => println!("missing VIX session: {e}"),
    }
    Ok(())
}
