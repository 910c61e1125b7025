use std::path::{Path, PathBuf};

use super::run::read_manifest;
use super::svg::line_chart;
use super::{io_err, read_file, write_file, CliError};
use crate::backtest::equity_from_csv;
use crate::report::ReportTable;

#[derive(Debug, Clone)]
pub struct CompareOutcome {
    pub table: ReportTable,
    pub markdown: String,
}

/// Side-by-side tables and a cumulative-profit overlay for runs sharing one
/// dataset fingerprint. Passive columns come first, then the learned models.
pub fn compare_runs(dirs: &[PathBuf], out: &Path) -> Result<CompareOutcome, CliError> {
    if dirs.len() < 2 {
        return Err(CliError::Config("compare needs at least two runs".into()));
    }
    let mut runs = Vec::with_capacity(dirs.len());
    for dir in dirs {
        let manifest = read_manifest(dir)?;
        let report_path = dir.join("report.csv");
        let table = ReportTable::from_csv(&read_file(&report_path)?).map_err(|e| io_err(&report_path, e))?;
        let equity_path = dir.join("equity.csv");
        let equity = equity_from_csv(&read_file(&equity_path)?).map_err(|e| io_err(&equity_path, e))?;
        runs.push((manifest, table, equity));
    }
    let reference = runs[0].0.dataset.fingerprint.clone();
    for (dir, (m, ..)) in dirs.iter().zip(&runs) {
        if m.dataset.fingerprint != reference {
            return Err(CliError::Data(format!(
                "dataset fingerprints differ: {} has {}, {} has {}",
                dirs[0].display(),
                reference,
                dir.display(),
                m.dataset.fingerprint
            )));
        }
    }
    runs.sort_by_key(|(m, ..)| m.config.model);

    let columns: Vec<String> = runs
        .iter()
        .map(|(m, ..)| m.config.model.display_name().to_string())
        .collect();
    let values = (0..runs[0].1.values.len())
        .map(|row| runs.iter().map(|(_, t, _)| t.values[row][0]).collect())
        .collect();
    let table = ReportTable { columns, values };

    let dates: Vec<_> = runs[0].2.iter().map(|p| p.date).collect();
    let mut lines = Vec::with_capacity(runs.len());
    for (m, _, equity) in &runs {
        if equity.iter().map(|p| p.date).ne(dates.iter().copied()) {
            return Err(CliError::Data(format!(
                "run `{}` covers different sessions than `{}`",
                m.config.name, runs[0].0.config.name
            )));
        }
        lines.push((
            m.config.model.display_name().to_string(),
            equity.iter().map(|p| (p.value - 1.0) * 100.0).collect(),
        ));
    }

    let mut markdown = String::from("# Strategy comparison\n\nRuns: ");
    markdown.push_str(
        &runs
            .iter()
            .map(|(m, ..)| format!("`{}`", m.config.name))
            .collect::<Vec<_>>()
            .join(", "),
    );
    markdown.push_str(&format!(".\nDataset fingerprint: `{reference}`.\n"));
    markdown.push_str(&table.to_markdown());

    std::fs::create_dir_all(out).map_err(|e| io_err(out, e))?;
    write_file(&out.join("compare.md"), &markdown)?;
    write_file(&out.join("compare.csv"), &table.to_csv())?;
    write_file(
        &out.join("cumulative.svg"),
        &line_chart("Cumulative daytime profit", "%", &dates, &lines),
    )?;
    Ok(CompareOutcome { table, markdown })
}
