//! `gna`: batch driver for grammar-to-network experiments.
//!
//! Exit codes: 0 success, 1 check failure, 2 invariance verdict failure,
//! 3 network/automaton divergence, 4 configuration, parse or usage error.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use godel_automata::harness::check::run_checks;
use godel_automata::harness::config::ExperimentConfig;
use godel_automata::harness::experiment::run_experiment;
use godel_automata::harness::output::{format_value, write_partition, write_report, write_trace_csv};
use godel_automata::patterns::{interval_partition_bounded, orbit, square_partition_bounded, PartitionMode, SquareShape, DEFAULT_CELL_LIMIT};
use godel_automata::shift::{compile_cfg_topdown, initial_tape, vs_run, Cfg};
use godel_automata::symbols::Word;
use godel_automata::Error;

const EXIT_CHECK: u8 = 1;
const EXIT_INVARIANCE: u8 = 2;
const EXIT_DIVERGENCE: u8 = 3;
const EXIT_CONFIG: u8 = 4;

#[derive(Parser)]
#[command(name = "gna", version, about = "Goedel encodings, versatile shifts and neural automata")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the top-down recognizer of a grammar on a sentence and print the trace.
    Parse {
        /// Grammar file, one `LHS -> RHS` rule per line.
        grammar: PathBuf,
        /// Space-separated terminals; empty for the empty sentence.
        #[arg(default_value = "")]
        sentence: String,
        #[arg(long, default_value_t = 1000)]
        step_limit: usize,
        /// Also write trace.csv here.
        #[arg(short, long)]
        output_dir: Option<PathBuf>,
    },
    /// List the recoding orbit of a word.
    Orbit {
        /// Digits (`0120`) or letters (`aaabcabc`, a = 0).
        #[arg(default_value = "")]
        word: String,
        #[arg(short)]
        m: usize,
        /// Only recodings that keep digit 0 fixed.
        #[arg(long)]
        blank_pinned: bool,
    },
    /// Pattern-of-equality partition of the interval (`--l`) or the square
    /// (`--l` stack cells, `--r` input cells).
    Partition {
        #[arg(short)]
        m: usize,
        #[arg(short)]
        l: usize,
        #[arg(short)]
        r: Option<usize>,
        #[arg(long, default_value = "joint")]
        mode: String,
        #[arg(long)]
        blank_pinned: bool,
        #[arg(long, default_value_t = DEFAULT_CELL_LIMIT)]
        max_cells: u128,
        #[arg(short, long, default_value = "out")]
        output_dir: PathBuf,
    },
    /// Run an experiment config under every encoding and write the report.
    Run {
        config: PathBuf,
        #[arg(short, long)]
        output_dir: Option<PathBuf>,
        /// Seed of the step observable's coefficients.
        #[arg(long)]
        seed: Option<u64>,
        /// Invariance tolerance on max |Δ|.
        #[arg(long)]
        tolerance: Option<f64>,
        /// Number of macro steps.
        #[arg(long)]
        step_limit: Option<usize>,
    },
    /// Run the property-check suites.
    Check {
        config: PathBuf,
        /// Restrict to these suites (repeatable).
        #[arg(long = "suite")]
        suites: Vec<String>,
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_CONFIG)
        }
    }
}

fn dispatch(cmd: Command) -> Result<u8, Error> {
    match cmd {
        Command::Parse {
            grammar,
            sentence,
            step_limit,
            output_dir,
        } => cmd_parse(grammar, &sentence, step_limit, output_dir),
        Command::Orbit { word, m, blank_pinned } => cmd_orbit(&word, m, blank_pinned),
        Command::Partition {
            m,
            l,
            r,
            mode,
            blank_pinned,
            max_cells,
            output_dir,
        } => cmd_partition(m, l, r, &mode, blank_pinned, max_cells, output_dir),
        Command::Run {
            config,
            output_dir,
            seed,
            tolerance,
            step_limit,
        } => cmd_run(config, output_dir, seed, tolerance, step_limit),
        Command::Check { config, suites, seed } => cmd_check(config, suites, seed),
    }
}

fn cmd_parse(grammar: PathBuf, sentence: &str, step_limit: usize, output_dir: Option<PathBuf>) -> Result<u8, Error> {
    let text = fs::read_to_string(&grammar).map_err(|e| Error::Config(format!("{}: {e}", grammar.display())))?;
    let g = Cfg::parse(&text)?;
    let vs = compile_cfg_topdown(&g)?;
    let trace = vs_run(&vs, &initial_tape(&g, &Word::parse(sentence)), step_limit)?;
    let mut buf = Vec::new();
    write_trace_csv(&trace, &mut buf)?;
    print!("{}", String::from_utf8_lossy(&buf));
    if let Some(dir) = output_dir {
        fs::create_dir_all(&dir)?;
        fs::write(dir.join("trace.csv"), &buf)?;
    }
    Ok(0)
}

/// Digits as given, or letters counted from `a`.
fn word_digits(word: &str) -> Result<(Vec<usize>, bool), Error> {
    let word: String = word.split_whitespace().collect();
    if word.chars().all(|c| c.is_ascii_digit()) {
        return Ok((word.chars().map(|c| c as usize - '0' as usize).collect(), false));
    }
    if word.chars().all(|c| c.is_ascii_lowercase()) {
        return Ok((word.chars().map(|c| c as usize - 'a' as usize).collect(), true));
    }
    Err(Error::Domain(format!("`{word}` is neither all digits nor all lowercase letters")))
}

fn cmd_orbit(word: &str, m: usize, blank_pinned: bool) -> Result<u8, Error> {
    let (digits, letters) = word_digits(word)?;
    let members = orbit(&digits, m, blank_pinned)?;
    let show = |w: &[usize]| -> String {
        if w.is_empty() {
            return "ε".into();
        }
        w.iter()
            .map(|&d| if letters { char::from(b'a' + d as u8) } else { char::from(b'0' + d as u8) })
            .collect()
    };
    for w in &members {
        println!("{}", show(w));
    }
    let group: usize = (1..=if blank_pinned { m - 1 } else { m }).product();
    println!(
        "orbit size {} of {} candidates; divides group order {group}: {}",
        members.len(),
        m.pow(digits.len() as u32),
        group % members.len() == 0
    );
    Ok(0)
}

fn cmd_partition(
    m: usize,
    l: usize,
    r: Option<usize>,
    mode: &str,
    blank_pinned: bool,
    max_cells: u128,
    output_dir: PathBuf,
) -> Result<u8, Error> {
    let map = match r {
        None => interval_partition_bounded(m, l, blank_pinned, max_cells)?,
        Some(r) => {
            let mode: PartitionMode = mode.parse()?;
            square_partition_bounded(SquareShape::uniform(m, l, r), mode, blank_pinned, max_cells)?
        }
    };
    let files = write_partition(&map, &output_dir)?;
    println!("cells {} classes {}", map.cell_count(), map.class_count());
    for f in files {
        println!("wrote {}", f.display());
    }
    Ok(0)
}

fn cmd_run(
    config: PathBuf,
    output_dir: Option<PathBuf>,
    seed: Option<u64>,
    tolerance: Option<f64>,
    step_limit: Option<usize>,
) -> Result<u8, Error> {
    let mut cfg = ExperimentConfig::load(&config)?;
    if let Some(s) = seed {
        cfg.observables.seed = s;
    }
    if let Some(t) = tolerance {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::Config("tolerance must be finite and non-negative".into()));
        }
        cfg.tolerances.invariance = t;
    }
    if let Some(n) = step_limit {
        if n == 0 {
            return Err(Error::Config("step limit must be >= 1".into()));
        }
        cfg.max_macro_steps = n;
    }
    let dir = output_dir.unwrap_or_else(|| cfg.output_dir.clone());
    let report = run_experiment(&cfg)?;
    write_report(&report, &dir)?;

    println!("trace ({}):", report.trace.outcome());
    for s in &report.trace.steps {
        println!("  {} {} {}", s.time, s.state, s.operation);
    }
    for run in &report.runs {
        let c = &run.run.comparison;
        println!(
            "encoding {}: {} units, max deviation from the exact orbit {} (tolerance {})",
            run.name,
            run.network.n(),
            format_value(c.max_deviation),
            format_value(c.tolerance)
        );
    }
    if report.verdicts.is_empty() {
        println!("single encoding: no pairs to compare");
    }
    for v in &report.verdicts {
        println!(
            "{:<13} {} vs {}: max |Δ| {} -> {}{}",
            v.observable.name(),
            v.encoding_a,
            v.encoding_b,
            format_value(v.max_deviation),
            if v.invariant { "invariant" } else { "not invariant" },
            if v.failed() { " (expected invariant)" } else { "" }
        );
    }
    println!("wrote {}", dir.display());
    if report.diverged() {
        eprintln!("network diverged from the exact automaton");
        return Ok(EXIT_DIVERGENCE);
    }
    if report.invariance_failed() {
        eprintln!("an observable expected to be invariant is not");
        return Ok(EXIT_INVARIANCE);
    }
    Ok(0)
}

fn cmd_check(config: PathBuf, suites: Vec<String>, seed: Option<u64>) -> Result<u8, Error> {
    let mut cfg = ExperimentConfig::load(&config)?;
    if !suites.is_empty() {
        cfg.check.suites = suites;
    }
    if let Some(s) = seed {
        cfg.check.seed = s;
    }
    let report = run_checks(&cfg)?;
    print!("{}", report.render());
    if report.passed() {
        println!("all checks passed");
        Ok(0)
    } else {
        Ok(EXIT_CHECK)
    }
}
