use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use confined_omp_bench::{read_config_file, run_experiment, BenchError, Experiment, ExperimentConfig, Result};

const USAGE: &str = "usage: bench <experiment> [--config <path>] [--out <csv>] [--trials N] [--seed S] \
[--workers W] [--key=value ...]
       bench list";

struct Args {
    experiment: Option<String>,
    config: Option<PathBuf>,
    out: Option<PathBuf>,
    overrides: Vec<(String, String)>,
}

fn parse_args(raw: impl IntoIterator<Item = String>) -> Result<Args> {
    let mut args = Args {
        experiment: None,
        config: None,
        out: None,
        overrides: Vec::new(),
    };
    let mut it = raw.into_iter();
    while let Some(a) = it.next() {
        let Some(flag) = a.strip_prefix("--") else {
            if args.experiment.replace(a.clone()).is_some() {
                return Err(BenchError::Config(format!("unexpected argument `{a}`")));
            }
            continue;
        };
        let (key, inline) = match flag.split_once('=') {
            Some((k, v)) => (k.to_string(), Some(v.to_string())),
            None => (flag.to_string(), None),
        };
        let takes_next = matches!(key.as_str(), "config" | "out" | "trials" | "seed" | "workers");
        let value = match inline {
            Some(v) => v,
            None if takes_next => it
                .next()
                .ok_or_else(|| BenchError::Config(format!("--{key} needs a value")))?,
            None => return Err(BenchError::Config(format!("expected --{key}=value"))),
        };
        match key.as_str() {
            "config" => args.config = Some(value.into()),
            "out" => args.out = Some(value.into()),
            _ => args.overrides.push((key, value)),
        }
    }
    Ok(args)
}

fn run(raw: Vec<String>) -> Result<()> {
    if raw.iter().any(|a| a == "--help" || a == "-h") {
        println!("{USAGE}");
        return Ok(());
    }
    if raw.first().map(String::as_str) == Some("list") {
        for e in Experiment::ALL {
            println!("{e}");
        }
        return Ok(());
    }
    let args = parse_args(raw)?;
    let mut pairs = match &args.config {
        Some(path) => read_config_file(path)?,
        None => Vec::new(),
    };
    let name = match &args.experiment {
        Some(n) => n.clone(),
        None => pairs
            .iter()
            .find(|(k, _)| k == "experiment")
            .map(|(_, v)| v.clone())
            .ok_or_else(|| BenchError::Config(format!("no experiment given\n{USAGE}")))?,
    };
    let experiment: Experiment = name.parse()?;
    pairs.extend(args.overrides);
    let cfg = ExperimentConfig::from_pairs(experiment, &pairs)?;
    let table = run_experiment(&cfg)?;
    match &args.out {
        Some(path) => table.emit_csv(path),
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            table
                .write_csv(&mut lock)
                .and_then(|_| lock.flush())
                .map_err(|source| BenchError::Io {
                    path: "<stdout>".into(),
                    source,
                })
        }
    }
}

fn main() -> ExitCode {
    match run(std::env::args().skip(1).collect()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("bench: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
