//! Report files: determinism, chart/CSV agreement, verdict regeneration.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use godel_automata::harness::config::ExperimentConfig;
use godel_automata::harness::experiment::{run_experiment, ObservableKind};
use godel_automata::harness::output::{read_series_csv, verdicts_from_csv, write_report};

fn configs() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn toy() -> ExperimentConfig {
    ExperimentConfig::load(&configs().join("toy.toml")).unwrap()
}

fn files(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect()
}

#[test]
fn identical_configs_give_identical_files() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let cfg = toy();
    write_report(&run_experiment(&cfg).unwrap(), a.path()).unwrap();
    write_report(&run_experiment(&cfg).unwrap(), b.path()).unwrap();
    let (fa, fb) = (files(a.path()), files(b.path()));
    assert_eq!(fa.len(), 18);
    assert_eq!(fa, fb);
}

#[test]
fn verdicts_regenerate_from_the_series_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = toy();
    write_report(&run_experiment(&cfg).unwrap(), dir.path()).unwrap();
    let series = fs::read_to_string(dir.path().join("observables.csv")).unwrap();
    let verdicts = fs::read_to_string(dir.path().join("verdicts.csv")).unwrap();
    assert_eq!(verdicts_from_csv(&series, cfg.tolerances.invariance).unwrap(), verdicts);
    assert!(verdicts.contains("\nstep,gamma,delta,7,0,0,true,true\n"));
}

#[test]
fn charts_plot_the_csv_values() {
    let dir = tempfile::tempdir().unwrap();
    write_report(&run_experiment(&toy()).unwrap(), dir.path()).unwrap();
    let text = fs::read_to_string(dir.path().join("observables.csv")).unwrap();
    let rows = read_series_csv(&text).unwrap();
    // the raw value column, exactly as written
    let raw: Vec<&str> = text.lines().skip(1).map(|l| l.rsplit(',').next().unwrap()).collect();
    for obs in ObservableKind::ALL {
        let svg = fs::read_to_string(dir.path().join(format!("{}.svg", obs.name()))).unwrap();
        let plotted: Vec<&str> = svg
            .split("data-value=\"")
            .skip(1)
            .map(|s| s.split('"').next().unwrap())
            .collect();
        let want: Vec<&str> = rows
            .iter()
            .zip(&raw)
            .filter(|(r, v)| r.observable == obs && !v.is_empty())
            .map(|(_, v)| *v)
            .collect();
        assert_eq!(plotted, want, "{obs}");
    }
}

#[test]
fn single_encoding_has_no_pairs() {
    let text = fs::read_to_string(configs().join("toy.toml")).unwrap();
    let cut = text.find("[[encoding]]\nname = \"delta\"").unwrap();
    let end = text.find("[check]").unwrap();
    let single = format!("{}{}", &text[..cut], &text[end..]);
    let cfg = ExperimentConfig::from_toml(&single, &configs()).unwrap();
    let report = run_experiment(&cfg).unwrap();
    assert!(report.verdicts.is_empty());
    assert!(!report.invariance_failed() && !report.diverged());
    assert_eq!(report.runs.len(), 1);
    assert_eq!(report.trace.steps.len(), 6);
    let dir = tempfile::tempdir().unwrap();
    write_report(&report, dir.path()).unwrap();
    assert_eq!(fs::read_to_string(dir.path().join("verdicts.csv")).unwrap().lines().count(), 1);
}

#[test]
fn zero_oracle_tolerance_reports_divergence() {
    let mut cfg = toy();
    cfg.tolerances.na_oracle = 0.0;
    let report = run_experiment(&cfg).unwrap();
    assert!(report.diverged());
}

#[test]
fn rejected_sentence_still_runs() {
    let mut cfg = toy();
    cfg.sentence = godel_automata::symbols::Word::parse("V NP");
    let report = run_experiment(&cfg).unwrap();
    assert_eq!(report.trace.outcome().to_string(), "halt-reject");
    assert!(!report.diverged());
    // a halted machine sits still
    let g = report.series("gamma", ObservableKind::Step);
    assert!(g[1..].iter().all(|v| *v == g[1]));
}
