use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use sumofdm::harness::{
    ber::metric_dump, run_ber, run_bound, run_sync_demo, run_tables, spec_from_trace_header, BerCurve, ExperimentSpec,
    TraceMode, TABLES,
};
use sumofdm::trace::read_trace;
use sumofdm::Result;

/// Link-level simulator for super-mode OFDM with index modulation.
#[derive(Parser)]
#[command(name = "sumofdm", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Flat key=value configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output CSV (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads, 0 for all cores.
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long, value_parser = ["ml", "llr"])]
    detector: Option<String>,
    /// sum, ssum, ofdm, ofdm-im or ofdm-im(k).
    #[arg(long)]
    scheme: Option<String>,
    /// SNR grid in dB: `a,b,c` or `start:step:stop`.
    #[arg(long)]
    snr: Option<String>,
    /// Extra `key=value` overrides, applied last.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo BER with perfect channel knowledge.
    Ber {
        #[command(flatten)]
        common: Common,
        /// Also write LLR matrices of the first block at each point next to the output.
        #[arg(long)]
        dump_metrics: bool,
    },
    /// Union bound on the SNR grid.
    Bound {
        #[command(flatten)]
        common: Common,
        /// BER CSV to place alongside the bound.
        #[arg(long)]
        overlay: Option<PathBuf>,
    },
    /// Regenerate reference tables and compare with stored values.
    Tables {
        /// table1, table2, table4, distances or all.
        #[arg(default_value = "all")]
        which: String,
        /// Include enumerations that take minutes.
        #[arg(long)]
        long_run: bool,
    },
    /// Impaired synchronisation chain against perfect channel knowledge.
    SyncDemo {
        #[command(flatten)]
        common: Common,
        /// Write received samples to an IQ trace.
        #[arg(long, conflicts_with = "trace_in")]
        trace_out: Option<PathBuf>,
        /// Process received samples from an IQ trace; its header supplies the experiment.
        #[arg(long)]
        trace_in: Option<PathBuf>,
    },
}

fn build_spec(c: &Common, base: Option<ExperimentSpec>) -> Result<ExperimentSpec> {
    let mut spec = match (&c.config, base) {
        (_, Some(s)) => s,
        (Some(p), None) => ExperimentSpec::parse(&fs::read_to_string(p)?)?,
        (None, None) => ExperimentSpec::default(),
    };
    let mut kv = sumofdm::trace::TraceHeader::new();
    if let Some(v) = c.seed {
        kv.insert("seed".into(), v.to_string());
    }
    if let Some(v) = &c.detector {
        kv.insert("detector".into(), v.clone());
    }
    if let Some(v) = &c.scheme {
        kv.insert("scheme".into(), v.clone());
    }
    if let Some(v) = &c.snr {
        kv.insert("snr_db".into(), v.clone());
    }
    for s in &c.set {
        let (k, v) = s
            .split_once('=')
            .ok_or_else(|| sumofdm::Error::Parse(format!("--set expects key=value, got {s:?}")))?;
        kv.insert(k.trim().into(), v.trim().into());
    }
    spec.apply(&kv)?;
    if let Some(w) = c.workers {
        spec.workers = w;
    }
    Ok(spec)
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Ber { common, dump_metrics } => {
            let mut spec = build_spec(&common, None)?;
            spec.dump_metrics |= dump_metrics;
            let curve = run_ber(&spec)?;
            emit(&common.out, &curve.to_csv())?;
            if spec.dump_metrics {
                let stem = common.out.clone().unwrap_or_else(|| PathBuf::from("ber.csv"));
                for i in 0..spec.snr_db.len() {
                    let mut p = stem.clone().into_os_string();
                    p.push(format!(".metrics{i}.csv"));
                    fs::write(PathBuf::from(p), metric_dump(&spec, i)?)?;
                }
            }
        }
        Command::Bound { common, overlay } => {
            let spec = build_spec(&common, None)?;
            let bound = run_bound(&spec)?;
            let ber = match overlay {
                Some(p) => BerCurve::read_points(&fs::read_to_string(p)?)?,
                None => Vec::new(),
            };
            emit(&common.out, &bound.to_csv_with_overlay(&ber))?;
        }
        Command::Tables { which, long_run } => {
            let names: Vec<&str> = if which == "all" {
                TABLES.to_vec()
            } else {
                vec![which.as_str()]
            };
            let mut ok = true;
            for name in names {
                let r = run_tables(name, long_run)?;
                println!("== {} ==\n{}", r.name, r.text);
                for m in &r.mismatches {
                    println!("MISMATCH {}: {m}", r.name);
                }
                ok &= r.ok();
            }
            if !ok {
                return Ok(ExitCode::from(2));
            }
        }
        Command::SyncDemo {
            common,
            trace_out,
            trace_in,
        } => {
            let (spec, mode) = match (trace_in, trace_out) {
                (Some(p), _) => {
                    let (_, header) = read_trace(&p)?;
                    let mut spec = build_spec(&common, Some(spec_from_trace_header(&header)?))?;
                    spec.workers = common.workers.unwrap_or(0);
                    (spec, TraceMode::Replay(p))
                }
                (None, Some(p)) => (build_spec(&common, None)?, TraceMode::Record(p)),
                (None, None) => (build_spec(&common, None)?, TraceMode::Simulate),
            };
            let report = run_sync_demo(&spec, &mode)?;
            for p in report.points.iter().filter(|p| p.unreliable) {
                eprintln!(
                    "warning: {} dB marked unreliable ({} of {} frames failed to synchronise)",
                    p.snr_db, p.sync_failures, p.frames
                );
            }
            emit(&common.out, &report.to_csv())?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
