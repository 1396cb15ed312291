//! One experiment: the symbolic run, then per encoding the exact automaton,
//! the network, its trajectory and the observable series at macro
//! boundaries. Verdicts are computed from the recorded series only.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use itertools::Itertools;

use super::config::ExperimentConfig;
use crate::error::{domain, Error, Result};
use crate::nda::{encode_tape, from_versatile_shift, Nda, Orderings};
use crate::neural::{NaRun, NetworkSpec, NeuralAutomaton, NeuralState};
use crate::observables::{amari, dissimilarity, harmony, step_observable, StepObservableSpec};
use crate::shift::{initial_tape, vs_run, RunTrace};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ObservableKind {
    Step,
    Amari,
    Harmony,
    Dissimilarity,
}

impl ObservableKind {
    pub const ALL: [ObservableKind; 4] = [
        ObservableKind::Step,
        ObservableKind::Amari,
        ObservableKind::Harmony,
        ObservableKind::Dissimilarity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ObservableKind::Step => "step",
            ObservableKind::Amari => "amari",
            ObservableKind::Harmony => "harmony",
            ObservableKind::Dissimilarity => "dissimilarity",
        }
    }

    /// Only the step observable is built to survive recoding.
    pub fn expected_invariant(self) -> bool {
        self == ObservableKind::Step
    }
}

impl fmt::Display for ObservableKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ObservableKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| domain(format!("unknown observable `{s}`")))
    }
}

/// One recorded value. `value` is `None` where the observable is undefined
/// (dissimilarity at step 0 or next to the zero state).
#[derive(Clone, Debug, PartialEq)]
pub struct SeriesRow {
    pub run_id: String,
    pub encoding: String,
    pub step: usize,
    pub observable: ObservableKind,
    pub value: Option<f64>,
}

/// Cross-encoding comparison of one observable.
#[derive(Clone, Debug, PartialEq)]
pub struct Verdict {
    pub observable: ObservableKind,
    pub encoding_a: String,
    pub encoding_b: String,
    pub steps: usize,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub invariant: bool,
    pub expected_invariant: bool,
}

impl Verdict {
    /// An observable expected to be invariant that is not.
    pub fn failed(&self) -> bool {
        self.expected_invariant && !self.invariant
    }
}

/// Compares every pair of encodings, observable by observable. A step that
/// one run recorded and the other did not counts as an infinite deviation.
pub fn verdicts_from_series(rows: &[SeriesRow], tolerance: f64) -> Vec<Verdict> {
    let encodings: Vec<&str> = rows.iter().map(|r| r.encoding.as_str()).unique().collect();
    let mut table: BTreeMap<(ObservableKind, &str), BTreeMap<usize, Option<f64>>> = BTreeMap::new();
    for r in rows {
        table
            .entry((r.observable, r.encoding.as_str()))
            .or_default()
            .insert(r.step, r.value);
    }
    let observables: Vec<ObservableKind> = rows.iter().map(|r| r.observable).unique().sorted().collect();
    let empty = BTreeMap::new();
    let mut out = Vec::new();
    for obs in observables {
        for (a, b) in encodings.iter().tuple_combinations() {
            let sa = table.get(&(obs, *a)).unwrap_or(&empty);
            let sb = table.get(&(obs, *b)).unwrap_or(&empty);
            let steps: Vec<usize> = sa.keys().chain(sb.keys()).copied().unique().collect();
            let mut max_deviation: f64 = 0.0;
            let mut compared = 0;
            for t in steps {
                match (sa.get(&t).copied().flatten(), sb.get(&t).copied().flatten()) {
                    (Some(x), Some(y)) => {
                        compared += 1;
                        max_deviation = max_deviation.max((x - y).abs());
                    }
                    (None, None) => {}
                    _ => max_deviation = f64::INFINITY,
                }
            }
            out.push(Verdict {
                observable: obs,
                encoding_a: a.to_string(),
                encoding_b: b.to_string(),
                steps: compared,
                max_deviation,
                tolerance,
                invariant: max_deviation <= tolerance,
                expected_invariant: obs.expected_invariant(),
            });
        }
    }
    out
}

/// Everything produced for one encoding.
#[derive(Clone, Debug)]
pub struct EncodingRun {
    pub name: String,
    pub orderings: Orderings,
    pub nda: Nda,
    pub network: NetworkSpec,
    pub run: NaRun,
}

#[derive(Clone, Debug)]
pub struct ExperimentReport {
    pub run_id: String,
    pub trace: RunTrace,
    pub runs: Vec<EncodingRun>,
    pub step_spec: StepObservableSpec,
    pub series: Vec<SeriesRow>,
    pub verdicts: Vec<Verdict>,
}

impl ExperimentReport {
    /// Some encoding strayed from its exact orbit.
    pub fn diverged(&self) -> bool {
        self.runs.iter().any(|r| r.run.comparison.diverged())
    }

    pub fn invariance_failed(&self) -> bool {
        self.verdicts.iter().any(Verdict::failed)
    }

    /// Values of one series in step order.
    pub fn series(&self, encoding: &str, observable: ObservableKind) -> Vec<Option<f64>> {
        self.series
            .iter()
            .filter(|r| r.encoding == encoding && r.observable == observable)
            .map(|r| r.value)
            .collect()
    }
}

fn run_encoding(cfg: &ExperimentConfig, name: &str, ord: &Orderings, spec: &StepObservableSpec) -> Result<(EncodingRun, Vec<SeriesRow>)> {
    let nda = from_versatile_shift(&cfg.machine, ord)?;
    let na = NeuralAutomaton::new(nda)?;
    let p0 = encode_tape(&initial_tape(&cfg.grammar, &cfg.sentence), ord)?;
    let run = na.run(&p0, cfg.max_macro_steps, cfg.tolerances.na_oracle)?;

    let mut rows = Vec::new();
    let mut push = |step, observable, value| {
        rows.push(SeriesRow {
            run_id: cfg.name.clone(),
            encoding: name.to_string(),
            step,
            observable,
            value,
        })
    };
    let macros: Vec<_> = run.trajectory.macro_states().collect();
    let o = &cfg.observables;
    for (t, x) in macros.iter().enumerate() {
        push(t, ObservableKind::Step, Some(step_observable(spec, x)));
        if o.amari {
            push(t, ObservableKind::Amari, Some(amari(x)));
        }
        if o.harmony {
            push(t, ObservableKind::Harmony, Some(harmony(x, &na.spec)?));
        }
        if o.dissimilarity {
            // a state within oracle tolerance of zero is the zero state,
            // where the angle is undefined
            let tiny = |x: &NeuralState| x.x.iter().all(|v| v.abs() <= cfg.tolerances.na_oracle);
            let v = match t {
                0 => None,
                _ if tiny(x) || tiny(macros[t - 1]) => None,
                _ => match dissimilarity(x, macros[t - 1]) {
                    Ok(v) => Some(v),
                    Err(Error::UndefinedInput(_)) => None,
                    Err(e) => return Err(e),
                },
            };
            push(t, ObservableKind::Dissimilarity, v);
        }
    }
    let NeuralAutomaton { spec: network, nda } = na;
    Ok((
        EncodingRun {
            name: name.to_string(),
            orderings: ord.clone(),
            nda,
            network,
            run,
        },
        rows,
    ))
}

/// Runs every configured encoding (in parallel) and merges the results in
/// configuration order.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let trace = vs_run(
        &cfg.machine,
        &initial_tape(&cfg.grammar, &cfg.sentence),
        cfg.max_macro_steps,
    )?;
    let first = &cfg.encodings[0].1;
    let [l, r] = cfg.observables.step_window;
    let step_spec = StepObservableSpec::new(
        first.m_in(),
        first.m_st(),
        l,
        r,
        cfg.observables.partition_mode()?,
        cfg.observables.seed,
    )?;

    let results: Vec<Result<(EncodingRun, Vec<SeriesRow>)>> = std::thread::scope(|scope| {
        let handles: Vec<_> = cfg
            .encodings
            .iter()
            .map(|(name, ord)| {
                let spec = &step_spec;
                scope.spawn(move || run_encoding(cfg, name, ord, spec))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("encoding run panicked"))
            .collect()
    });
    let mut runs = Vec::new();
    let mut series = Vec::new();
    for res in results {
        let (run, rows) = res?;
        runs.push(run);
        series.extend(rows);
    }
    let verdicts = verdicts_from_series(&series, cfg.tolerances.invariance);
    Ok(ExperimentReport {
        run_id: cfg.name.clone(),
        trace,
        runs,
        step_spec,
        series,
        verdicts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(enc: &str, step: usize, obs: ObservableKind, v: Option<f64>) -> SeriesRow {
        SeriesRow {
            run_id: "t".into(),
            encoding: enc.into(),
            step,
            observable: obs,
            value: v,
        }
    }

    #[test]
    fn verdict_arithmetic() {
        let rows = vec![
            row("a", 0, ObservableKind::Step, Some(0.5)),
            row("a", 1, ObservableKind::Step, Some(0.25)),
            row("b", 0, ObservableKind::Step, Some(0.5)),
            row("b", 1, ObservableKind::Step, Some(0.25)),
            row("a", 0, ObservableKind::Amari, Some(0.1)),
            row("b", 0, ObservableKind::Amari, Some(0.3)),
            row("a", 0, ObservableKind::Dissimilarity, None),
            row("b", 0, ObservableKind::Dissimilarity, Some(0.0)),
        ];
        let v = verdicts_from_series(&rows, 0.0);
        assert_eq!(v.len(), 3);
        assert!(v[0].invariant && v[0].expected_invariant && v[0].steps == 2);
        assert!(!v[1].invariant && !v[1].failed());
        assert!((v[1].max_deviation - 0.2).abs() < 1e-15);
        assert_eq!(v[2].max_deviation, f64::INFINITY);
        assert!(verdicts_from_series(&rows[..2], 0.0).is_empty());
    }

    #[test]
    fn observable_names_round_trip() {
        for k in ObservableKind::ALL {
            assert_eq!(k.name().parse::<ObservableKind>().unwrap(), k);
        }
        assert!("mean".parse::<ObservableKind>().is_err());
    }
}
