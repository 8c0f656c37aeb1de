//! Experiment configuration and the runners behind the command-line tool.

pub mod ber;
mod bound;
mod sync_demo;
mod tables;

pub use ber::{run_ber, BerCurve, BerPoint};
pub use bound::{run_bound, BoundCurve};
pub use sync_demo::{run_sync_demo, spec_from_trace_header, SyncPoint, SyncReport, TraceMode, SLOT_PAD};
pub use tables::{run_tables, TableReport, TABLES};

use std::fmt;
use std::path::PathBuf;

use crate::channel::Profile;
use crate::config::{Scheme, SystemConfig};
use crate::detect::{Combiner, DetectorKind};
use crate::error::{Error, Result};
use crate::modes::{partition_qam, ModeSet};
use crate::trace::{parse_kv, TraceHeader};

/// Everything that determines an experiment's output.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub scheme: Scheme,
    pub modes: usize,
    pub q: usize,
    pub n: usize,
    pub subcarriers: usize,
    pub cp_len: usize,
    pub taps: usize,
    pub detector: DetectorKind,
    pub combiner: Combiner,
    /// Strictly increasing Eb/N0 grid in dB; `inf` means no noise.
    pub snr_db: Vec<f64>,
    pub min_errors: u64,
    pub max_blocks: u64,
    /// Trials between stop-rule checks. Fixed so results do not depend on
    /// the worker count.
    pub chunk: u64,
    pub seed: u64,
    pub profile: Profile,
    /// Carrier frequency offset in subcarrier spacings (sync demo).
    pub cfo: f64,
    /// Timing offset in samples (sync demo).
    pub to_samples: usize,
    /// Frames per SNR point (sync demo).
    pub frames: u64,
    /// Optional mode table replacing the built-in partition.
    pub mode_file: Option<PathBuf>,
    /// Lifts enumeration budgets for long-running analyses.
    pub long_run: bool,
    /// Not part of the output identity.
    pub workers: usize,
    pub dump_metrics: bool,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        ExperimentSpec {
            scheme: Scheme::Sum,
            modes: 4,
            q: 4,
            n: 4,
            subcarriers: 128,
            cp_len: 16,
            taps: 10,
            detector: DetectorKind::Llr,
            combiner: Combiner::MaxLog,
            snr_db: vec![0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0],
            min_errors: 200,
            max_blocks: 1_000_000,
            chunk: 64,
            seed: 1,
            profile: Profile::Rayleigh,
            cfo: 0.0,
            to_samples: 0,
            frames: 1000,
            mode_file: None,
            long_run: false,
            workers: 0,
            dump_metrics: false,
        }
    }
}

/// Parses `a,b,c` or `start:step:stop` (inclusive), with `inf` allowed.
pub fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let bad = || Error::Parse(format!("bad SNR grid {s:?}"));
    let num = |t: &str| -> Result<f64> {
        match t.trim() {
            "inf" | "+inf" => Ok(f64::INFINITY),
            v => v.parse().map_err(|_| bad()),
        }
    };
    let parts: Vec<&str> = s.split(':').collect();
    match parts.len() {
        1 => s.split(',').map(num).collect(),
        3 => {
            let (a, st, b) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
            if st.is_nan() || st <= 0.0 || !a.is_finite() || !b.is_finite() {
                return Err(bad());
            }
            let count = ((b - a) / st + 1e-9).floor() as i64;
            Ok((0..=count).map(|i| a + st * i as f64).collect())
        }
        _ => Err(bad()),
    }
}

fn fmt_grid(g: &[f64]) -> String {
    g.iter().map(|v| fmt_num(*v)).collect::<Vec<_>>().join(",")
}

/// Shortest decimal that reads back to the same value.
pub(crate) fn fmt_num(v: f64) -> String {
    if v == f64::INFINITY {
        "inf".into()
    } else {
        format!("{v}")
    }
}

impl ExperimentSpec {
    /// Reads a flat `key=value` configuration over the defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut spec = ExperimentSpec::default();
        spec.apply(&parse_kv(text)?)?;
        Ok(spec)
    }

    /// Applies recognised keys; unknown keys are an error.
    pub fn apply(&mut self, kv: &TraceHeader) -> Result<()> {
        for (k, v) in kv {
            let int = || -> Result<u64> {
                v.parse()
                    .map_err(|_| Error::Parse(format!("{k}: expected an integer, got {v:?}")))
            };
            let float = || -> Result<f64> {
                v.parse()
                    .map_err(|_| Error::Parse(format!("{k}: expected a number, got {v:?}")))
            };
            let flag = || -> Result<bool> {
                match v.as_str() {
                    "1" | "true" | "yes" => Ok(true),
                    "0" | "false" | "no" => Ok(false),
                    _ => Err(Error::Parse(format!("{k}: expected a boolean, got {v:?}"))),
                }
            };
            match k.as_str() {
                "scheme" => self.scheme = v.parse()?,
                "modes" => self.modes = int()? as usize,
                "q" => self.q = int()? as usize,
                "n" => self.n = int()? as usize,
                "subcarriers" => self.subcarriers = int()? as usize,
                "cp_len" => self.cp_len = int()? as usize,
                "taps" => self.taps = int()? as usize,
                "detector" => self.detector = v.parse()?,
                "combiner" => self.combiner = v.parse()?,
                "snr_db" => self.snr_db = parse_grid(v)?,
                "min_errors" => self.min_errors = int()?,
                "max_blocks" => self.max_blocks = int()?,
                "chunk" => self.chunk = int()?,
                "seed" => self.seed = int()?,
                "channel" => self.profile = v.parse()?,
                "cfo" => self.cfo = float()?,
                "to_samples" => self.to_samples = int()? as usize,
                "frames" => self.frames = int()?,
                "mode_file" => self.mode_file = Some(PathBuf::from(v)),
                "long_run" => self.long_run = flag()?,
                "workers" => self.workers = int()? as usize,
                "dump_metrics" => self.dump_metrics = flag()?,
                _ => return Err(Error::Parse(format!("unknown configuration key {k:?}"))),
            }
        }
        Ok(())
    }

    /// Keys that determine the results, in a fixed order.
    pub fn to_kv(&self) -> Vec<(&'static str, String)> {
        let mut kv = vec![
            ("scheme", self.scheme.to_string()),
            ("modes", self.modes.to_string()),
            ("q", self.q.to_string()),
            ("n", self.n.to_string()),
            ("subcarriers", self.subcarriers.to_string()),
            ("cp_len", self.cp_len.to_string()),
            ("taps", self.taps.to_string()),
            ("detector", self.detector.to_string()),
            ("combiner", format!("{:?}", self.combiner).to_ascii_lowercase()),
            ("snr_db", fmt_grid(&self.snr_db)),
            ("min_errors", self.min_errors.to_string()),
            ("max_blocks", self.max_blocks.to_string()),
            ("chunk", self.chunk.to_string()),
            ("seed", self.seed.to_string()),
            ("channel", self.profile.to_string()),
            ("cfo", fmt_num(self.cfo)),
            ("to_samples", self.to_samples.to_string()),
            ("frames", self.frames.to_string()),
            ("long_run", self.long_run.to_string()),
        ];
        if let Some(p) = &self.mode_file {
            kv.push(("mode_file", p.display().to_string()));
        }
        kv
    }

    pub fn to_header(&self) -> TraceHeader {
        self.to_kv().into_iter().map(|(k, v)| (k.to_string(), v)).collect()
    }

    /// The system configuration, with `ofdm-im` defaulting to `n/2` active.
    pub fn system(&self) -> SystemConfig {
        let scheme = match self.scheme {
            Scheme::OfdmIm { active: 0 } => Scheme::OfdmIm { active: self.n / 2 },
            s => s,
        };
        SystemConfig {
            subcarriers: self.subcarriers,
            n: self.n,
            cp_len: self.cp_len,
            taps: self.taps,
            modes: self.modes,
            q: self.q,
            scheme,
            n0: 0.0,
        }
    }

    /// Mode set for the super-mode schemes.
    pub fn mode_set(&self) -> Result<Option<ModeSet>> {
        if !self.scheme.is_super_mode() {
            return Ok(None);
        }
        let ms = match &self.mode_file {
            Some(p) => ModeSet::load(p)?,
            None => partition_qam(self.modes, self.q)?,
        };
        Ok(Some(ms))
    }

    pub fn validate(&self) -> Result<()> {
        self.system().validate()?;
        if self.snr_db.is_empty()
            || self.snr_db.windows(2).any(|w| w[1] <= w[0])
            || self.snr_db.iter().any(|v| v.is_nan())
        {
            return Err(Error::Config(
                "SNR grid must be non-empty and strictly increasing".into(),
            ));
        }
        if self.min_errors == 0 || self.max_blocks == 0 || self.chunk == 0 || self.frames == 0 {
            return Err(Error::Config(
                "stop rule, chunk and frame counts must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Runs `f` on a pool of `workers` threads (all cores for 0).
    pub fn with_pool<T: Send>(&self, f: impl FnOnce() -> T + Send) -> Result<T> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.workers)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
        Ok(pool.install(f))
    }
}

impl fmt::Display for ExperimentSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in self.to_kv() {
            writeln!(f, "{k}={v}")?;
        }
        Ok(())
    }
}

/// `# key=value` lines for CSV preambles.
pub(crate) fn comment_header(kv: &[(&'static str, String)]) -> String {
    kv.iter().map(|(k, v)| format!("# {k}={v}\n")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_forms() {
        assert_eq!(parse_grid("0:5:20").unwrap(), vec![0.0, 5.0, 10.0, 15.0, 20.0]);
        assert_eq!(parse_grid("10,12.5,inf").unwrap(), vec![10.0, 12.5, f64::INFINITY]);
        assert!(parse_grid("1:0:5").is_err());
        assert!(parse_grid("a,b").is_err());
    }

    #[test]
    fn experiment_round_trip() {
        let spec = ExperimentSpec::parse(
            "# sweep config\nscheme=ssum\nmodes=8\nq=2\nsnr_db=5:5:15\nchannel=rician(10)\ntaps=3\n",
        )
        .unwrap();
        assert_eq!(spec.scheme, Scheme::SSum);
        assert_eq!(spec.snr_db, vec![5.0, 10.0, 15.0]);
        assert_eq!(spec.profile, Profile::Rician { k_db: 10.0 });
        let again = ExperimentSpec::parse(&spec.to_string()).unwrap();
        assert_eq!(again, spec);
        assert!(ExperimentSpec::parse("bogus=1").is_err());
        assert!(ExperimentSpec::parse("modes=x").is_err());
    }

    #[test]
    fn validation() {
        assert!(ExperimentSpec::default().validate().is_ok());
        let mut s = ExperimentSpec {
            snr_db: vec![10.0, 5.0],
            ..Default::default()
        };
        assert!(s.validate().is_err());
        s.snr_db = vec![5.0];
        s.min_errors = 0;
        assert!(s.validate().is_err());
        let im = ExperimentSpec::parse("scheme=ofdm-im").unwrap();
        assert_eq!(im.system().scheme, Scheme::OfdmIm { active: 2 });
    }
}
