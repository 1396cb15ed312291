//! The `gna` binary end to end: output and exit codes.

use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn gna(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gna")).args(args).output().unwrap()
}

fn configs() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn path(name: &str) -> String {
    configs().join(name).to_string_lossy().into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn parse_prints_the_table() {
    let dir = tempfile::tempdir().unwrap();
    let o = gna(&["parse", &path("toy.cfg"), "NP V NP", "-o", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let want = "time,stack,input,operation\n0,S,NP V NP,predict(S -> NP VP)\n1,VP NP,NP V NP,attach\n\
                2,VP,V NP,predict(VP -> V NP)\n3,NP V,V NP,attach\n4,NP,NP,attach\n5,ε,ε,accept\n";
    assert_eq!(stdout(&o), want);
    assert_eq!(fs::read_to_string(dir.path().join("trace.csv")).unwrap(), want);
}

#[test]
fn parse_rejections() {
    let o = gna(&["parse", &path("toy.cfg"), "V NP"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).trim_end().ends_with("VP NP,V NP,halt-reject"), "{}", stdout(&o));
    let o = gna(&["parse", &path("toy.cfg"), ""]);
    assert_eq!(stdout(&o), "time,stack,input,operation\n0,S,ε,halt-reject\n");
}

#[test]
fn parse_errors_carry_line_numbers() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("bad.cfg");
    fs::write(&g, "S -> NP VP\nVP V NP\n").unwrap();
    let o = gna(&["parse", g.to_str().unwrap(), "NP"]);
    assert_eq!(o.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));
    let o = gna(&["parse", "/nonexistent.cfg", "NP"]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn orbit_listing() {
    let o = gna(&["orbit", "aaabcabc", "-m", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(&lines[..6], ["aaabcabc", "aaacbacb", "bbbacbac", "bbbcabca", "cccabcab", "cccbacba"]);
    assert!(lines[6].starts_with("orbit size 6 of 6561"));
    let o = gna(&["orbit", "", "-m", "3"]);
    assert_eq!(stdout(&o).lines().next(), Some("ε"));
    assert!(stdout(&o).contains("orbit size 1"));
    let o = gna(&["orbit", "0120", "-m", "4", "--blank-pinned"]);
    assert!(stdout(&o).contains("divides group order 6: true"));
    assert_eq!(gna(&["orbit", "0130", "-m", "3"]).status.code(), Some(4));
}

#[test]
fn partitions() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let o = gna(&["partition", "-m", "3", "-l", "3", "-o", d]);
    assert!(stdout(&o).starts_with("cells 27 classes 5\n"));
    assert_eq!(fs::read_to_string(dir.path().join("partition.csv")).unwrap().lines().count(), 28);
    let svg = fs::read_to_string(dir.path().join("partition.svg")).unwrap();
    assert_eq!(svg.matches("data-cell=").count(), 27);

    let o = gna(&["partition", "-m", "2", "-l", "1", "--blank-pinned", "-o", d]);
    assert!(stdout(&o).starts_with("cells 2 classes 2\n"));

    let o = gna(&["partition", "-m", "3", "-l", "2", "-r", "3", "--mode", "joint", "-o", d]);
    assert_eq!(o.status.code(), Some(0));
    let csv = fs::read_to_string(dir.path().join("partition.csv")).unwrap();
    let class_of = |stack: &str, input: &str| {
        csv.lines()
            .find(|l| l.split(',').nth(2) == Some(stack) && l.split(',').nth(3) == Some(input))
            .unwrap()
            .split(',')
            .nth(1)
            .unwrap()
            .to_string()
    };
    let seed = class_of("2 0", "1 0 1");
    assert_eq!(class_of("0 1", "2 1 2"), seed);
    assert_eq!(class_of("2 1", "0 1 0"), seed);
    assert_ne!(class_of("0 0", "0 0 0"), seed);

    let o = gna(&["partition", "-m", "3", "-l", "5", "--max-cells", "100", "-o", d]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn run_writes_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let o = gna(&["run", &path("toy.toml"), "-o", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    assert!(out.contains("encoding gamma: 72 units"));
    assert!(out.contains("step          gamma vs delta: max |Δ| 0 -> invariant"));
    assert!(out.contains("amari         gamma vs delta"));
    for f in ["trace.csv", "observables.csv", "verdicts.csv", "step.svg", "amari.svg", "nda_gamma.csv", "orbit_delta.csv"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
}

#[test]
fn run_flags_and_divergence() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let o = gna(&["run", &path("toy.toml"), "-o", d, "--step-limit", "3", "--seed", "99"]);
    assert_eq!(o.status.code(), Some(0));
    let series = fs::read_to_string(dir.path().join("observables.csv")).unwrap();
    assert_eq!(series.lines().filter(|l| l.split(',').nth(3) == Some("step")).count(), 8);

    // no float network meets a zero oracle tolerance
    let text = fs::read_to_string(configs().join("toy.toml")).unwrap().replace("na_oracle = 1e-9", "na_oracle = 0.0");
    let cfg = dir.path().join("strict.toml");
    fs::write(&cfg, text.replace("grammar = \"toy.cfg\"", &format!("grammar = {:?}", path("toy.cfg")))).unwrap();
    let o = gna(&["run", cfg.to_str().unwrap(), "-o", d]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn check_exit_codes() {
    let o = gna(&["check", &path("toy.toml"), "--suite", "commutation", "--suite", "partition"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("all checks passed"));

    let o = gna(&["check", &path("toy_fault.toml"), "--suite", "commutation"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("counterexample: gamma: tape `"));

    let dir = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(configs().join("toy.toml")).unwrap();
    let start = text.find("suites = [").unwrap();
    let end = start + text[start..].find('\n').unwrap();
    let empty = format!("{}suites = []{}", &text[..start], &text[end..])
        .replace("grammar = \"toy.cfg\"", &format!("grammar = {:?}", path("toy.cfg")));
    let cfg = dir.path().join("empty.toml");
    fs::write(&cfg, empty).unwrap();
    let o = gna(&["check", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&o.stderr).contains("nothing to check"));
}

#[test]
fn usage_errors_exit_four() {
    assert_eq!(gna(&["frobnicate"]).status.code(), Some(4));
    assert_eq!(gna(&["--help"]).status.code(), Some(0));
}
