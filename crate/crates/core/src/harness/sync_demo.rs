use std::fmt::Write as _;
use std::path::PathBuf;

use num_complex::Complex64;
use rayon::prelude::*;

use super::{comment_header, fmt_num, ExperimentSpec};
use crate::channel::{apply_impairments_time, draw_taps, ChannelRealization};
use crate::detect::{BlockDetector, Combiner, LlrWorkspace};
use crate::error::{Error, Result};
use crate::rng::{complex_normal, random_bits, trial_stream};
use crate::sync::{
    build_frame, data_values, energy_per_bit, estimate_snr, frame_capacity, front_end, quantize, FrameLayout, TO_FLOOR,
};
use crate::trace::{read_trace, write_trace, TraceHeader};
use crate::txrx::BlockEncoder;
use crate::Bit;

/// Samples after the nominal frame end kept in each trace slot; bounds the
/// timing search and the injected offset.
pub const SLOT_PAD: usize = 128;

/// Where received samples come from.
#[derive(Debug, Clone, PartialEq)]
pub enum TraceMode {
    Simulate,
    /// Simulate and write every received slot to this file.
    Record(PathBuf),
    /// Read received slots from this file instead of simulating them.
    Replay(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyncPoint {
    pub snr_db: f64,
    pub frames: u64,
    pub sync_failures: u64,
    /// Payload bits of the frames that synchronised.
    pub bits: u64,
    pub errors_impaired: u64,
    pub ber_impaired: f64,
    pub errors_perfect: u64,
    pub ber_perfect: f64,
    /// Fraction of synchronised frames with the exact timing offset.
    pub to_correct: f64,
    pub cfo_mae: f64,
    /// Mean decision-directed SNR estimate in dB.
    pub snr_est_db: f64,
    /// More than half the frames failed to synchronise.
    pub unreliable: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyncReport {
    pub header: Vec<(&'static str, String)>,
    pub points: Vec<SyncPoint>,
}

impl SyncReport {
    pub fn to_csv(&self) -> String {
        let mut s = comment_header(&self.header);
        s.push_str("snr_db,frames,sync_failures,bits,errors_impaired,ber_impaired,errors_perfect,ber_perfect,to_correct,cfo_mae,snr_est_db,unreliable\n");
        for p in &self.points {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{:e},{},{:e},{:.4},{:e},{:.3},{}",
                fmt_num(p.snr_db),
                p.frames,
                p.sync_failures,
                p.bits,
                p.errors_impaired,
                p.ber_impaired,
                p.errors_perfect,
                p.ber_perfect,
                p.to_correct,
                p.cfo_mae,
                p.snr_est_db,
                p.unreliable as u8
            );
        }
        s
    }
}

struct FrameOutcome {
    synced: bool,
    to_ok: bool,
    cfo_err: f64,
    snr_db: f64,
    errors_impaired: u64,
    errors_perfect: u64,
}

struct Setup {
    layout: FrameLayout,
    encoder: BlockEncoder,
    detector: BlockDetector,
    units: usize,
    payload: usize,
    slot: usize,
}

impl Setup {
    fn new(spec: &ExperimentSpec) -> Result<Self> {
        spec.validate()?;
        let layout = FrameLayout::default();
        if spec.taps > layout.cp {
            return Err(Error::Config(format!(
                "{} taps exceed the {}-sample CP",
                spec.taps, layout.cp
            )));
        }
        if spec.to_samples + spec.taps > SLOT_PAD {
            return Err(Error::Config(format!(
                "timing offset {} plus {} taps exceeds the {SLOT_PAD}-sample search window",
                spec.to_samples, spec.taps
            )));
        }
        let cfg = spec.system();
        let ms = spec.mode_set()?;
        let encoder = BlockEncoder::new(&cfg, ms.as_ref())?;
        let detector = BlockDetector::new(&encoder, spec.detector, spec.combiner)?;
        let (units, payload) = frame_capacity(&encoder, &layout);
        let slot = layout.frame_len() + SLOT_PAD;
        Ok(Setup {
            layout,
            encoder,
            detector,
            units,
            payload,
            slot,
        })
    }

    fn n0(&self, snr_db: f64) -> f64 {
        if snr_db == f64::INFINITY {
            0.0
        } else {
            energy_per_bit(&self.encoder, &self.layout) / 10f64.powf(snr_db / 10.0)
        }
    }

    fn count_errors(
        &self,
        bits: &[Bit],
        y: &[Complex64],
        c: &[Complex64],
        n0: f64,
        ws: &mut LlrWorkspace,
    ) -> Result<u64> {
        let decided = self.decide(y, c, n0, ws)?;
        Ok(bits.iter().zip(&decided).filter(|(a, b)| a != b).count() as u64)
    }

    fn decide(&self, y: &[Complex64], c: &[Complex64], n0: f64, ws: &mut LlrWorkspace) -> Result<Vec<Bit>> {
        let len = self.units * self.encoder.unit_len();
        Ok(self.detector.detect_block(&y[..len], &c[..len], n0, ws)?.bits)
    }

    /// Detection with an estimated channel. A first max-log pass supplies
    /// decisions for the SNR estimate; the Jacobian combiner then re-detects
    /// with the implied noise level. Returns `(bits, linear SNR estimate)`.
    fn decide_blind(&self, y: &[Complex64], c: &[Complex64], ws: &mut LlrWorkspace) -> Result<(Vec<Bit>, f64)> {
        let len = self.units * self.encoder.unit_len();
        let first = self.decide(y, c, 0.0, ws)?;
        let s = self.encoder.encode_block(&first, self.units)?;
        let snr = estimate_snr(&y[..len], &s, &c[..len]);
        let jacobian = matches!(&self.detector, BlockDetector::Llr(d) if d.combiner() == Combiner::Jacobian);
        if jacobian && snr.is_finite() {
            let signal = s.iter().zip(c).map(|(s, c)| (s * c).norm_sqr()).sum::<f64>() / len as f64;
            let n0_hat = signal / (snr - 1.0).max(f64::MIN_POSITIVE);
            return Ok((self.decide(y, c, n0_hat, ws)?, snr));
        }
        Ok((first, snr))
    }
}

/// Draws everything random about one frame and, unless `rx` is given,
/// simulates its received slot.
fn frame_trial(
    spec: &ExperimentSpec,
    setup: &Setup,
    point: u64,
    trial: u64,
    n0: f64,
    rx: Option<&[Complex64]>,
) -> Result<(FrameOutcome, Vec<Complex64>)> {
    let l = &setup.layout;
    let mut rng = trial_stream(spec.seed, point, trial);
    let bits = random_bits(&mut rng, setup.payload);
    let frame = build_frame(&bits, &setup.encoder, l)?;
    let ch = ChannelRealization::from_taps(draw_taps(&mut rng, spec.taps, spec.profile), l.fft_size);

    let mut padded = frame.time.clone();
    padded.resize(setup.slot, Complex64::default());
    let mut sim = apply_impairments_time(&padded, spec.cfo, spec.to_samples, &ch, l.fft_size, &mut rng, n0);
    sim.truncate(setup.slot);
    quantize(&mut sim);
    let rx: Vec<Complex64> = match rx {
        Some(r) => r.to_vec(),
        None => sim,
    };

    // reference path: same frame, true channel, frequency-domain noise
    let c_true: Vec<Complex64> = (0..l.used.len()).map(|j| ch.freq[l.bin(j)]).collect();
    let y_perfect: Vec<Complex64> = frame
        .used
        .iter()
        .zip(&c_true)
        .map(|(s, c)| {
            s * c
                + if n0 > 0.0 {
                    complex_normal(&mut rng, n0)
                } else {
                    Complex64::default()
                }
        })
        .collect();
    let mut ws = LlrWorkspace::default();
    let errors_perfect = setup.count_errors(
        &bits,
        &data_values(&y_perfect, l),
        &data_values(&c_true, l),
        n0,
        &mut ws,
    )?;

    let outcome = match front_end(&rx, l, SLOT_PAD, TO_FLOOR) {
        Ok(fe) => {
            let (decided, snr) =
                setup.decide_blind(&data_values(&fe.rx_used, l), &data_values(&fe.c_hat, l), &mut ws)?;
            let errors_impaired = bits.iter().zip(&decided).filter(|(a, b)| a != b).count() as u64;
            FrameOutcome {
                synced: true,
                to_ok: fe.to == spec.to_samples,
                cfo_err: (fe.cfo - spec.cfo).abs(),
                snr_db: 10.0 * snr.log10(),
                errors_impaired,
                errors_perfect,
            }
        }
        Err(Error::SyncFailure { .. }) => FrameOutcome {
            synced: false,
            to_ok: false,
            cfo_err: 0.0,
            snr_db: 0.0,
            errors_impaired: 0,
            errors_perfect,
        },
        Err(e) => return Err(e),
    };
    Ok((outcome, rx))
}

/// End-to-end chain (timing, CFO, pilot channel estimate, detection)
/// against the perfect-CSI chain on the same frames.
pub fn run_sync_demo(spec: &ExperimentSpec, trace: &TraceMode) -> Result<SyncReport> {
    let setup = Setup::new(spec)?;
    let frames = spec.frames;
    let total = spec.snr_db.len() as u64 * frames * setup.slot as u64;
    let replay = match trace {
        TraceMode::Replay(path) => {
            let (samples, header) = read_trace(path)?;
            check_header(spec, &header)?;
            if samples.len() as u64 != total {
                return Err(Error::Parse(format!(
                    "trace holds {} samples, expected {total}",
                    samples.len()
                )));
            }
            Some(samples)
        }
        _ => None,
    };

    let mut points = Vec::new();
    let mut recorded = Vec::new();
    for (pi, &snr) in spec.snr_db.iter().enumerate() {
        let n0 = setup.n0(snr);
        let results: Vec<(FrameOutcome, Vec<Complex64>)> = spec.with_pool(|| {
            (0..frames)
                .into_par_iter()
                .map(|t| {
                    let rx = replay.as_ref().map(|s| {
                        let off = ((pi as u64 * frames + t) as usize) * setup.slot;
                        &s[off..off + setup.slot]
                    });
                    frame_trial(spec, &setup, pi as u64, t, n0, rx)
                })
                .collect::<Result<Vec<_>>>()
        })??;
        let synced: Vec<&FrameOutcome> = results.iter().map(|r| &r.0).filter(|o| o.synced).collect();
        let ok = synced.len() as u64;
        let bits = ok * setup.payload as u64;
        let errors_impaired: u64 = synced.iter().map(|o| o.errors_impaired).sum();
        let errors_perfect: u64 = results.iter().map(|r| r.0.errors_perfect).sum();
        let mean = |f: &dyn Fn(&FrameOutcome) -> f64| {
            if ok == 0 {
                f64::NAN
            } else {
                synced.iter().map(|o| f(o)).sum::<f64>() / ok as f64
            }
        };
        points.push(SyncPoint {
            snr_db: snr,
            frames,
            sync_failures: frames - ok,
            bits,
            errors_impaired,
            ber_impaired: errors_impaired as f64 / bits as f64,
            errors_perfect,
            ber_perfect: errors_perfect as f64 / (frames * setup.payload as u64) as f64,
            to_correct: mean(&|o| o.to_ok as u8 as f64),
            cfo_mae: mean(&|o| o.cfo_err),
            snr_est_db: mean(&|o| o.snr_db),
            unreliable: 2 * (frames - ok) > frames,
        });
        if matches!(trace, TraceMode::Record(_)) {
            for (_, rx) in results {
                recorded.extend(rx);
            }
        }
    }
    if let TraceMode::Record(path) = trace {
        write_trace(path, &recorded, &trace_header(spec, &setup))?;
    }
    Ok(SyncReport {
        header: spec.to_kv(),
        points,
    })
}

fn trace_header(spec: &ExperimentSpec, setup: &Setup) -> TraceHeader {
    let mut h = spec.to_header();
    for (k, v) in setup.layout.fields() {
        h.insert(format!("layout.{k}"), v);
    }
    h.insert("slot".into(), setup.slot.to_string());
    h.insert("sample_rate".into(), "500000".into());
    h.insert("format".into(), "cf32le".into());
    h
}

fn check_header(spec: &ExperimentSpec, header: &TraceHeader) -> Result<()> {
    for (k, v) in spec.to_kv() {
        match header.get(k) {
            Some(h) if *h == v => {}
            other => {
                return Err(Error::Parse(format!(
                    "trace header {k}={} does not match the experiment ({v})",
                    other.map(String::as_str).unwrap_or("<missing>")
                )))
            }
        }
    }
    Ok(())
}

/// Experiment stored in a trace header.
pub fn spec_from_trace_header(header: &TraceHeader) -> Result<ExperimentSpec> {
    let mut spec = ExperimentSpec::default();
    let kv: TraceHeader = header
        .iter()
        .filter(|(k, _)| !k.starts_with("layout.") && !matches!(k.as_str(), "slot" | "sample_rate" | "format"))
        .map(|(k, v)| (k.clone(), v.clone()))
        .collect();
    spec.apply(&kv)?;
    Ok(spec)
}
