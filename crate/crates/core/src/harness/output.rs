//! CSV and SVG files for reports and partitions.
//!
//! Floats are written with Rust's shortest round-trip formatting, so a value
//! read back from a CSV is the value that was recorded.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use super::experiment::{verdicts_from_series, ExperimentReport, ObservableKind, SeriesRow, Verdict};
use super::svg::{partition_grid, step_chart, Series};
use crate::error::{Error, Result};
use crate::nda::decode_tape;
use crate::patterns::{Geometry, PatternClassMap};
use crate::shift::RunTrace;

/// How a float is rendered in every CSV and SVG.
pub fn format_value(v: f64) -> String {
    v.to_string()
}

fn parse_value(s: &str, line: usize) -> Result<f64> {
    s.parse().map_err(|_| Error::Parse {
        line,
        message: format!("`{s}` is not a number"),
    })
}

/// Columns `time, stack, input, operation`; the stack is in tape order.
pub fn write_trace_csv<W: Write>(trace: &RunTrace, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["time", "stack", "input", "operation"])?;
    for s in &trace.steps {
        w.write_record([
            s.time.to_string(),
            s.state.stack_tape_order().to_string(),
            s.state.input().to_string(),
            s.operation.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Columns `run_id, encoding, step, observable, value`; undefined values are
/// empty.
pub fn write_series_csv<W: Write>(rows: &[SeriesRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["run_id", "encoding", "step", "observable", "value"])?;
    for r in rows {
        w.write_record([
            r.run_id.clone(),
            r.encoding.clone(),
            r.step.to_string(),
            r.observable.to_string(),
            r.value.map(format_value).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_series_csv(text: &str) -> Result<Vec<SeriesRow>> {
    let mut rd = csv::Reader::from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for (k, rec) in rd.records().enumerate() {
        let rec = rec?;
        let line = k + 2;
        let field = |i: usize| rec.get(i).ok_or_else(|| Error::Parse { line, message: format!("missing column {}", i + 1) });
        let value = field(4)?;
        rows.push(SeriesRow {
            run_id: field(0)?.to_string(),
            encoding: field(1)?.to_string(),
            step: field(2)?.parse().map_err(|_| Error::Parse {
                line,
                message: "step is not an integer".into(),
            })?,
            observable: field(3)?.parse().map_err(|e: Error| Error::Parse {
                line,
                message: e.to_string(),
            })?,
            value: if value.is_empty() { None } else { Some(parse_value(value, line)?) },
        });
    }
    Ok(rows)
}

/// Columns `observable, encoding_a, encoding_b, steps, max_deviation,
/// tolerance, invariant, expected_invariant`.
pub fn write_verdicts_csv<W: Write>(verdicts: &[Verdict], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "observable",
        "encoding_a",
        "encoding_b",
        "steps",
        "max_deviation",
        "tolerance",
        "invariant",
        "expected_invariant",
    ])?;
    for v in verdicts {
        w.write_record([
            v.observable.to_string(),
            v.encoding_a.clone(),
            v.encoding_b.clone(),
            v.steps.to_string(),
            format_value(v.max_deviation),
            format_value(v.tolerance),
            v.invariant.to_string(),
            v.expected_invariant.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Rebuilds `verdicts.csv` from the text of `observables.csv`.
pub fn verdicts_from_csv(series_csv: &str, tolerance: f64) -> Result<String> {
    let rows = read_series_csv(series_csv)?;
    let mut out = Vec::new();
    write_verdicts_csv(&verdicts_from_series(&rows, tolerance), &mut out)?;
    Ok(String::from_utf8(out).expect("csv output is utf-8"))
}

/// One step chart per observable, one series per encoding.
pub fn observable_chart(rows: &[SeriesRow], observable: ObservableKind) -> String {
    let mut series: Vec<Series> = Vec::new();
    for r in rows.iter().filter(|r| r.observable == observable) {
        let Some(v) = r.value else { continue };
        let point = (r.step as f64, v, format_value(v));
        match series.iter_mut().find(|s| s.name == r.encoding) {
            Some(s) => s.points.push(point),
            None => series.push(Series {
                name: r.encoding.clone(),
                points: vec![point],
            }),
        }
    }
    step_chart(observable.name(), "macro step", observable.name(), &series)
}

/// Columns `class, size, coefficient`.
pub fn write_coefficients_csv<W: Write>(report: &ExperimentReport, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["class", "size", "coefficient"])?;
    let sizes = report.step_spec.classes().class_sizes();
    for (k, c) in report.step_spec.coefficients().iter().enumerate() {
        w.write_record([k.to_string(), sizes[k].to_string(), format_value(*c)])?;
    }
    w.flush()?;
    Ok(())
}

/// Columns `step, y1, y2, na_y1, na_y2, deviation, tape`: the exact orbit,
/// the network's macro boundaries and the decoded tape.
pub fn write_orbit_csv<W: Write>(report: &ExperimentReport, run: usize, out: W) -> Result<()> {
    let r = &report.runs[run];
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["step", "y1", "y2", "na_y1", "na_y2", "deviation", "tape"])?;
    let macros: Vec<_> = r.run.trajectory.macro_states().collect();
    for (t, p) in r.run.comparison.nda_orbit.iter().enumerate() {
        let tape = match decode_tape(p, &r.orderings, 64)? {
            Some(s) => s.to_string(),
            None => "?".into(),
        };
        w.write_record([
            t.to_string(),
            p.y1.to_string(),
            p.y2.to_string(),
            format_value(macros[t].x[0]),
            format_value(macros[t].x[1]),
            format_value(r.run.comparison.deviations[t]),
            tape,
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn create(dir: &Path, name: &str) -> Result<fs::File> {
    Ok(fs::File::create(dir.join(name))?)
}

/// Writes every report file into `dir` and returns the paths, in order.
pub fn write_report(report: &ExperimentReport, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let mut note = |name: String| {
        written.push(dir.join(&name));
        name
    };
    write_trace_csv(&report.trace, create(dir, &note("trace.csv".into()))?)?;
    for (k, run) in report.runs.iter().enumerate() {
        let n = &run.name;
        run.nda.write_csv(create(dir, &note(format!("nda_{n}.csv")))?)?;
        run.network.write_units_csv(create(dir, &note(format!("network_units_{n}.csv")))?)?;
        run.network.write_weights_csv(create(dir, &note(format!("network_weights_{n}.csv")))?)?;
        run.run.trajectory.write_csv(create(dir, &note(format!("trajectory_{n}.csv")))?)?;
        write_orbit_csv(report, k, create(dir, &note(format!("orbit_{n}.csv")))?)?;
    }
    write_series_csv(&report.series, create(dir, &note("observables.csv".into()))?)?;
    write_verdicts_csv(&report.verdicts, create(dir, &note("verdicts.csv".into()))?)?;
    write_coefficients_csv(report, create(dir, &note("step_coefficients.csv".into()))?)?;
    for obs in ObservableKind::ALL {
        if report.series.iter().any(|r| r.observable == obs) {
            let svg = observable_chart(&report.series, obs);
            fs::write(dir.join(note(format!("{}.svg", obs.name()))), svg)?;
        }
    }
    Ok(written)
}

/// Columns `cell, class, lo, hi` for an interval partition and
/// `cell, class, stack_digits, input_digits, y1_lo, y1_hi, y2_lo, y2_hi` for
/// a square one (y1 is the input side).
pub fn write_partition_csv<W: Write>(map: &PatternClassMap, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let digits = |d: &[usize]| d.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
    match map.geometry() {
        Geometry::Interval { .. } => {
            w.write_record(["cell", "class", "digits", "lo", "hi"])?;
            for cell in 0..map.cell_count() {
                let (iv, _) = map.cell_intervals(cell);
                let (d, _) = map.corner_digits(cell);
                w.write_record([
                    cell.to_string(),
                    map.class_of(cell).to_string(),
                    digits(&d),
                    iv.lo.to_string(),
                    iv.hi.to_string(),
                ])?;
            }
        }
        Geometry::Square { .. } => {
            w.write_record(["cell", "class", "stack_digits", "input_digits", "y1_lo", "y1_hi", "y2_lo", "y2_hi"])?;
            for cell in 0..map.cell_count() {
                let (stack, input) = map.cell_intervals(cell);
                let input = input.expect("square cells have two sides");
                let (ds, di) = map.corner_digits(cell);
                w.write_record([
                    cell.to_string(),
                    map.class_of(cell).to_string(),
                    digits(&ds),
                    digits(&di),
                    input.lo.to_string(),
                    input.hi.to_string(),
                    stack.lo.to_string(),
                    stack.hi.to_string(),
                ])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// `partition.csv` and `partition.svg` in `dir`.
pub fn write_partition(map: &PatternClassMap, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let csv_path = dir.join("partition.csv");
    write_partition_csv(map, fs::File::create(&csv_path)?)?;
    let svg_path = dir.join("partition.svg");
    fs::write(&svg_path, partition_grid(map))?;
    Ok(vec![csv_path, svg_path])
}
