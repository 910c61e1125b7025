mod common;

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use common::{config_toml, snapshot, write_synth_inputs};
use es_daytime::backtest::{equity_from_csv, SignalSeries};
use es_daytime::metrics::MonthlyReturns;
use es_daytime::report::{ReportTable, METRICS};
use es_daytime::signals::ModelKind;

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_es-daytime"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

fn write_config(dir: &Path, model: ModelKind, inputs: &[PathBuf; 3]) -> PathBuf {
    let path = dir.join(format!("{model}.toml"));
    let out = dir.join("runs").join(model.id());
    std::fs::write(&path, config_toml(model.id(), model, inputs, &out, false)).unwrap();
    path
}

#[test]
fn passive_run_writes_a_full_bundle() {
    let tmp = tempfile::tempdir().unwrap();
    let inputs = write_synth_inputs(&tmp.path().join("in"), 320, 1);
    let cfg = write_config(tmp.path(), ModelKind::Passive, &inputs);
    let o = bin(&["run", "--config", s(&cfg)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let out = tmp.path().join("runs/passive");
    for f in [
        "manifest.json", "signals.csv", "equity.csv", "report.csv", "report.md", "monthly.csv",
        "hist.csv", "hist.svg", "equity.svg",
    ] {
        assert!(out.join(f).is_file(), "missing {f}");
    }
    let md = std::fs::read_to_string(out.join("report.md")).unwrap();
    assert!(md.contains("| Beta | 1.00 |"), "{md}");
    assert!(md.contains("| Alpha (annualised) | 0.00% |"), "{md}");
    for m in METRICS {
        assert!(md.contains(&format!("| {} |", m.label)), "label `{}` missing", m.label);
    }

    let read = |f: &str| std::fs::read_to_string(out.join(f)).unwrap();
    let signals = SignalSeries::from_csv(&read("signals.csv")).unwrap();
    assert_eq!(signals.len(), 320 - 250);
    assert_eq!(signals.to_csv(), read("signals.csv"));
    assert_eq!(equity_from_csv(&read("equity.csv")).unwrap().len(), signals.len());
    let table = ReportTable::from_csv(&read("report.csv")).unwrap();
    assert_eq!(table.to_csv(), read("report.csv"));
    assert!(!MonthlyReturns::from_percent_csv(&read("monthly.csv")).unwrap().is_empty());
    let hist_total: usize = read("hist.csv")
        .lines()
        .skip(1)
        .map(|l| l.rsplit(',').next().unwrap().parse::<usize>().unwrap())
        .sum();
    assert_eq!(hist_total, signals.len());
}

#[test]
fn reruns_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let inputs = write_synth_inputs(&tmp.path().join("in"), 330, 2);
    for model in [ModelKind::Rf, ModelKind::ModelA] {
        let cfg = write_config(tmp.path(), model, &inputs);
        assert_eq!(code(&bin(&["run", "--config", s(&cfg)])), 0);
        let first = snapshot(&tmp.path().join("runs").join(model.id()));
        assert_eq!(code(&bin(&["run", "--config", s(&cfg)])), 0);
        assert_eq!(snapshot(&tmp.path().join("runs").join(model.id())), first, "{model}");
    }
}

#[test]
fn overrides_apply() {
    let tmp = tempfile::tempdir().unwrap();
    let inputs = write_synth_inputs(&tmp.path().join("in"), 300, 3);
    let cfg = write_config(tmp.path(), ModelKind::Gbt, &inputs);
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    assert_eq!(code(&bin(&["run", "--config", s(&cfg), "--out", s(&a), "--seed", "1"])), 0);
    assert_eq!(
        code(&bin(&["run", "--config", s(&cfg), "--out", s(&b), "--seed", "1", "--cost", "0.001"])),
        0
    );
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(b.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["config"]["master_seed"], 1);
    assert_eq!(manifest["config"]["cost_per_side"], 0.001);
    let ra = SignalSeries::from_csv(&std::fs::read_to_string(a.join("signals.csv")).unwrap()).unwrap();
    let rb = SignalSeries::from_csv(&std::fs::read_to_string(b.join("signals.csv")).unwrap()).unwrap();
    assert_eq!(ra.decisions(), rb.decisions());
    for (x, y) in ra.rows().iter().zip(rb.rows()) {
        assert!((x.strategy_return - y.strategy_return - 0.002).abs() < 1e-12);
    }
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let inputs = write_synth_inputs(&tmp.path().join("in"), 300, 4);

    // Usage and configuration problems exit 1.
    assert_eq!(code(&bin(&["run"])), 1);
    assert_eq!(code(&bin(&["frobnicate"])), 1);
    let bad = tmp.path().join("bad.toml");
    std::fs::write(&bad, "name = \"x\"\nmodel = \"svm\"\n").unwrap();
    let o = bin(&["run", "--config", s(&bad)]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("svm"));
    assert_eq!(code(&bin(&["run", "--config", s(&tmp.path().join("absent.toml"))])), 1);
    let cfg = write_config(tmp.path(), ModelKind::Passive, &inputs);
    assert_eq!(code(&bin(&["run", "--config", s(&cfg), "--cost", "-1"])), 1);

    // A missing input file exits 2 and names the file.
    std::fs::remove_file(&inputs[2]).unwrap();
    let o = bin(&["run", "--config", s(&cfg)]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains(s(&inputs[2])), "{}", stderr(&o));
    let inputs = write_synth_inputs(&tmp.path().join("in"), 300, 4);

    // Corrupt data exits 2.
    let text = std::fs::read_to_string(&inputs[1]).unwrap();
    let mut lines: Vec<&str> = text.lines().collect();
    lines.remove(40);
    std::fs::write(&inputs[1], lines.join("\n") + "\n").unwrap();
    assert_eq!(code(&bin(&["run", "--config", s(&cfg)])), 2);
    assert_eq!(code(&bin(&["validate-data", "--config", s(&cfg)])), 2);
    let inputs = write_synth_inputs(&tmp.path().join("in"), 300, 4);

    // A model that cannot be fitted exits 3.
    let broken = tmp.path().join("broken.toml");
    let text = config_toml("broken", ModelKind::Rf, &inputs, &tmp.path().join("o"), true) + "\n[rf]\nn_trees = 0\n";
    std::fs::write(&broken, text).unwrap();
    let o = bin(&["run", "--config", s(&broken)]);
    assert_eq!(code(&o), 3, "{}", stderr(&o));

    assert_eq!(code(&bin(&["--help"])), 0);
}

#[test]
fn validate_data_summarizes() {
    let tmp = tempfile::tempdir().unwrap();
    let inputs = write_synth_inputs(tmp.path(), 120, 5);
    let o = bin(&["validate-data", "--es", s(&inputs[0]), "--vix", s(&inputs[1]), "--rates", s(&inputs[2])]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("sessions: 120"), "{text}");
    assert!(text.contains("fingerprint: "));
}

#[test]
fn metrics_on_published_monthlies() {
    let o = bin(&[
        "metrics",
        "--monthly",
        s(&fixture("monthly/passive.csv")),
        "--rates",
        s(&fixture("tbill_3m_monthly.csv")),
        "--benchmark",
        s(&fixture("monthly/passive.csv")),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let md = String::from_utf8(o.stdout).unwrap();
    assert!(md.contains("| Beta | 1.00 | 1.00 |"), "{md}");
    assert!(md.contains("| % Winning Months | 58.33% | 58.33% |"), "{md}");
}

#[test]
fn compare_checks_fingerprints_and_orders_columns() {
    let tmp = tempfile::tempdir().unwrap();
    let inputs = write_synth_inputs(&tmp.path().join("in"), 310, 6);
    let rf = write_config(tmp.path(), ModelKind::Rf, &inputs);
    let passive = write_config(tmp.path(), ModelKind::Passive, &inputs);
    assert_eq!(code(&bin(&["run", "--config", s(&rf)])), 0);
    assert_eq!(code(&bin(&["run", "--config", s(&passive)])), 0);
    let runs = tmp.path().join("runs");
    let out = tmp.path().join("cmp");
    let o = bin(&["compare", s(&runs.join("rf")), s(&runs.join("passive")), "--out", s(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let table = ReportTable::from_csv(&std::fs::read_to_string(out.join("compare.csv")).unwrap()).unwrap();
    assert_eq!(table.columns, vec!["Passive".to_string(), "Forest".to_string()]);
    assert!(out.join("compare.md").is_file() && out.join("cumulative.svg").is_file());

    // Comparing a run with itself gives two identical columns.
    let same = tmp.path().join("same");
    let o = bin(&["compare", s(&runs.join("rf")), s(&runs.join("rf")), "--out", s(&same)]);
    assert_eq!(code(&o), 0);
    let t = ReportTable::from_csv(&std::fs::read_to_string(same.join("compare.csv")).unwrap()).unwrap();
    for row in &t.values {
        assert_eq!(row[0].map(f64::to_bits), row[1].map(f64::to_bits));
    }

    // A run over different data is refused.
    let other_inputs = write_synth_inputs(&tmp.path().join("other"), 310, 99);
    let other_dir = tmp.path().join("other_cfg");
    std::fs::create_dir_all(&other_dir).unwrap();
    let other = write_config(&other_dir, ModelKind::Passive, &other_inputs);
    assert_eq!(code(&bin(&["run", "--config", s(&other)])), 0);
    let o = bin(&[
        "compare",
        s(&runs.join("rf")),
        s(&other_dir.join("runs/passive")),
        "--out",
        s(&tmp.path().join("x")),
    ]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("fingerprints differ"), "{}", stderr(&o));
}
