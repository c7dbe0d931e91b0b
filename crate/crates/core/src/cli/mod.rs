//! Experiment runner: flat `key = value` configs, preset experiments and
//! JSON/CSV reports.

mod config;
mod report;
mod run;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use config::{
    keys_for, parse_config, parse_config_for, Experiment, ExperimentConfig, Kind, KeySpec, Value, DEFAULT_EPSILON,
    DEFAULT_SAMPLES, DEFAULT_SEED,
};
pub use report::{cell, emit_csv, emit_report, read_report, Check, Report, Table};
pub use run::{build_model, run_experiment, MODULES, SLOPE_TOLERANCE, Z};

use crate::error::{Error, Result};

/// Process exit status when every predicate holds.
pub const EXIT_PASS: i32 = 0;
/// Process exit status on an error.
pub const EXIT_ERROR: i32 = 1;
/// Process exit status when a predicate fails.
pub const EXIT_FAIL: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "mvnorm-pairs", version, about = "Exchangeable-pair normal approximation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Haar moment battery against exact Weingarten values.
    HaarCheck(RunArgs),
    /// Conditional audit of an exchangeable pair.
    PairAudit(RunArgs),
    /// Evaluate one error bound: `bound <theorem> --k 2 --n 20`.
    Bound(RunArgs),
    /// Solve the Stein equation for a built-in test function.
    SteinCheck(RunArgs),
    /// Empirical Wasserstein distance against a theorem bound.
    W1Compare(RunArgs),
    /// Block-diagonal family: Gram check, mix bound, transport comparison.
    DiagExample(RunArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Flat key = value configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the report's table as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Size of the worker pool.
    #[arg(long)]
    threads: Option<usize>,
    /// Further parameters as `--key value` or `key=value`.
    #[arg(trailing_var_arg = true, allow_hyphen_values = true, value_name = "PARAMS")]
    params: Vec<String>,
}

/// Splits trailing parameters into `(key, value)` pairs; a bare word is
/// taken as the theorem of a `bound` run.
fn parse_params(experiment: Experiment, params: &[String]) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    let mut it = params.iter().peekable();
    while let Some(p) = it.next() {
        if let Some(flag) = p.strip_prefix("--") {
            if let Some((k, v)) = flag.split_once('=') {
                out.push((k.replace('-', "_"), v.to_string()));
            } else {
                let v = it.next().ok_or_else(|| Error::Config(format!("--{flag} needs a value")))?;
                out.push((flag.replace('-', "_"), v.clone()));
            }
        } else if let Some((k, v)) = p.split_once('=') {
            out.push((k.to_string(), v.to_string()));
        } else if experiment == Experiment::Bound && !out.iter().any(|(k, _)| k == "theorem") {
            out.push(("theorem".into(), p.clone()));
        } else {
            return Err(Error::Config(format!("unexpected argument {p:?}")));
        }
    }
    Ok(out)
}

/// Pulls runner flags that were written after the first parameter (and so
/// captured as parameters) back into their fields.
fn hoist_flags(args: &mut RunArgs) -> Result<()> {
    let mut rest = Vec::new();
    let mut it = std::mem::take(&mut args.params).into_iter();
    while let Some(p) = it.next() {
        let (name, inline) = match p.strip_prefix("--").map(|f| f.split_once('=').map_or((f, None), |(a, b)| (a, Some(b)))) {
            Some((name @ ("csv" | "threads" | "config"), inline)) => (name.to_string(), inline.map(str::to_string)),
            _ => {
                rest.push(p);
                continue;
            }
        };
        let value = match inline {
            Some(v) => v,
            None => it.next().ok_or_else(|| Error::Config(format!("--{name} needs a value")))?,
        };
        match name.as_str() {
            "csv" => args.csv = Some(PathBuf::from(value)),
            "config" => args.config = Some(PathBuf::from(value)),
            _ => {
                args.threads =
                    Some(value.parse().map_err(|_| Error::Config(format!("--threads expects a count, got {value:?}")))?)
            }
        }
    }
    args.params = rest;
    Ok(())
}

fn configure(experiment: Experiment, args: &RunArgs) -> Result<ExperimentConfig> {
    let text = match &args.config {
        Some(path) => std::fs::read_to_string(path).map_err(|e| Error::from(e).context(path.display().to_string()))?,
        None => String::new(),
    };
    // command-line parameters are appended as extra lines
    let mut lines = text;
    lines.push('\n');
    for (k, v) in parse_params(experiment, &args.params)? {
        if k.contains('\n') || v.contains('\n') {
            return Err(Error::Config("parameters may not contain newlines".into()));
        }
        lines.push_str(&format!("{k}={v}\n"));
    }
    let mut cfg = parse_config_for(&lines, Some(experiment))?;
    if let Some(seed) = args.seed {
        cfg.set("seed", &seed.to_string())?;
    }
    Ok(cfg)
}

/// Runs the command line; returns the process exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_ERROR } else { EXIT_PASS };
        }
    };
    let (experiment, mut args) = match cli.command {
        Command::HaarCheck(a) => (Experiment::HaarCheck, a),
        Command::PairAudit(a) => (Experiment::PairAudit, a),
        Command::Bound(a) => (Experiment::Bound, a),
        Command::SteinCheck(a) => (Experiment::SteinCheck, a),
        Command::W1Compare(a) => (Experiment::W1Compare, a),
        Command::DiagExample(a) => (Experiment::DiagExample, a),
    };
    if let Err(e) = hoist_flags(&mut args) {
        eprintln!("error: {e}");
        return EXIT_ERROR;
    }
    match execute(experiment, &args) {
        Ok(report) if report.pass => EXIT_PASS,
        Ok(report) => {
            for c in report.failed_checks() {
                eprintln!("FAIL {}: {} > {}", c.name, c.value, c.limit);
            }
            EXIT_FAIL
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}

fn execute(experiment: Experiment, args: &RunArgs) -> Result<Report> {
    if let Some(t) = args.threads {
        if t == 0 {
            return Err(Error::Config("--threads must be positive".into()));
        }
        // a pool that is already built keeps its size
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    let cfg = configure(experiment, args)?;
    let report = run_experiment(&cfg)?;
    let out = args.out.clone().or_else(|| cfg.get("out").and_then(|_| cfg.text("out").ok()).map(PathBuf::from));
    match out {
        Some(path) => emit_report(&report, &path).map_err(|e| e.context(path.display().to_string()))?,
        None => print!("{}", report.to_json()?),
    }
    if let Some(path) = &args.csv {
        emit_csv(&report, path).map_err(|e| e.context(path.display().to_string()))?;
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn params_accept_both_spellings() {
        let p = parse_params(
            Experiment::SteinCheck,
            &["--g".into(), "sine".into(), "--k=1".into(), "nodes=32".into(), "--use-x".into(), "1".into()],
        )
        .unwrap();
        assert_eq!(
            p,
            vec![
                ("g".to_string(), "sine".to_string()),
                ("k".into(), "1".into()),
                ("nodes".into(), "32".into()),
                ("use_x".into(), "1".into())
            ]
        );
        let b = parse_params(Experiment::Bound, &["uthm".into(), "--k".into(), "2".into()]).unwrap();
        assert_eq!(b[0], ("theorem".to_string(), "uthm".to_string()));
        assert!(parse_params(Experiment::HaarCheck, &["stray".into()]).is_err());
        assert!(parse_params(Experiment::HaarCheck, &["--ns".into()]).is_err());
    }

    #[test]
    fn late_runner_flags_are_hoisted() {
        let cli = Cli::try_parse_from(["x", "w1-compare", "n=30", "--csv", "t.csv", "--threads=2", "--m", "50"]).unwrap();
        let Command::W1Compare(mut a) = cli.command else { panic!() };
        hoist_flags(&mut a).unwrap();
        assert_eq!(a.csv, Some(PathBuf::from("t.csv")));
        assert_eq!(a.threads, Some(2));
        assert_eq!(a.params, vec!["n=30", "--m", "50"]);
    }
}
