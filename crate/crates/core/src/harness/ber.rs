use std::fmt::Write as _;
use std::time::Instant;

use rayon::prelude::*;

use super::{comment_header, fmt_num, ExperimentSpec};
use crate::channel::{apply_channel_freq, draw_channel, Profile};
use crate::config::SystemConfig;
use crate::detect::{BlockDetector, LlrWorkspace};
use crate::error::{Error, Result};
use crate::rng::{random_bits, trial_stream};
use crate::txrx::BlockEncoder;

/// Monte Carlo result at one SNR.
#[derive(Debug, Clone, PartialEq)]
pub struct BerPoint {
    pub snr_db: f64,
    pub blocks: u64,
    pub bits_sent: u64,
    pub bit_errors: u64,
    pub ber: f64,
    /// Half-width of the 95 % normal-approximation interval.
    pub ci95: f64,
    /// Wall-clock seconds; the only non-deterministic field.
    pub elapsed: f64,
    pub cm_per_subcarrier: f64,
    /// The block cap ended the point before `min_errors` was reached.
    pub capped: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BerCurve {
    pub header: Vec<(&'static str, String)>,
    pub points: Vec<BerPoint>,
}

pub const BER_COLUMNS: &str = "snr_db,blocks,bits_sent,bit_errors,ber,ci95,cm_per_subcarrier,capped,elapsed_s";

impl BerCurve {
    pub fn to_csv(&self) -> String {
        let mut s = comment_header(&self.header);
        s.push_str(BER_COLUMNS);
        s.push('\n');
        for p in &self.points {
            let _ = writeln!(
                s,
                "{},{},{},{},{:e},{:e},{},{},{:.3}",
                fmt_num(p.snr_db),
                p.blocks,
                p.bits_sent,
                p.bit_errors,
                p.ber,
                p.ci95,
                p.cm_per_subcarrier,
                p.capped as u8,
                p.elapsed
            );
        }
        s
    }

    /// `(snr_db, ber)` pairs from a CSV written by [`BerCurve::to_csv`].
    pub fn read_points(csv: &str) -> Result<Vec<(f64, f64)>> {
        csv.lines()
            .filter(|l| !l.starts_with('#') && !l.starts_with("snr_db") && !l.trim().is_empty())
            .map(|l| {
                let f: Vec<&str> = l.split(',').collect();
                let num = |s: &str| -> Result<f64> {
                    if s == "inf" {
                        return Ok(f64::INFINITY);
                    }
                    s.parse().map_err(|_| Error::Parse(format!("bad BER row {l:?}")))
                };
                if f.len() < 5 {
                    return Err(Error::Parse(format!("bad BER row {l:?}")));
                }
                Ok((num(f[0])?, num(f[4])?))
            })
            .collect()
    }
}

/// Encoder, detector and channel for repeated trials.
pub(crate) struct Link {
    pub cfg: SystemConfig,
    pub encoder: BlockEncoder,
    pub detector: BlockDetector,
    pub profile: Profile,
    pub units: usize,
    pub bits: usize,
}

impl Link {
    pub fn new(spec: &ExperimentSpec) -> Result<Self> {
        spec.validate()?;
        let cfg = spec.system();
        let ms = spec.mode_set()?;
        let encoder = BlockEncoder::new(&cfg, ms.as_ref())?;
        let detector = BlockDetector::new(&encoder, spec.detector, spec.combiner)?;
        let units = cfg.subcarriers / encoder.unit_len();
        let bits = cfg.bits_per_block()?;
        Ok(Link {
            cfg,
            encoder,
            detector,
            profile: spec.profile,
            units,
            bits,
        })
    }

    /// One block: returns `(bit errors, CMs)`.
    pub fn trial(&self, seed: u64, point: u64, trial: u64, n0: f64, ws: &mut LlrWorkspace) -> Result<(u64, u64)> {
        let mut rng = trial_stream(seed, point, trial);
        let bits = random_bits(&mut rng, self.bits);
        let s = self.encoder.encode_block(&bits, self.units)?;
        let ch = draw_channel(&mut rng, &self.cfg, self.profile)?;
        let y = apply_channel_freq(&s, &ch, &mut rng, n0)?;
        let dec = self.detector.detect_block(&y, &ch.freq, n0, ws)?;
        let errors = bits.iter().zip(&dec.bits).filter(|(a, b)| a != b).count() as u64;
        Ok((errors, dec.cm_count))
    }
}

/// Monte Carlo BER over the experiment's SNR grid with perfect channel knowledge.
///
/// Trials run in chunks of `spec.chunk`; the stop rule is checked only
/// between chunks, so counts are independent of the worker count.
pub fn run_ber(spec: &ExperimentSpec) -> Result<BerCurve> {
    let link = Link::new(spec)?;
    spec.with_pool(|| ber_points(spec, &link))?
}

fn ber_points(spec: &ExperimentSpec, link: &Link) -> Result<BerCurve> {
    let mut points = Vec::with_capacity(spec.snr_db.len());
    for (pi, &snr) in spec.snr_db.iter().enumerate() {
        let n0 = link.cfg.n0_for_ebn0_db(snr)?;
        let start = Instant::now();
        let (mut blocks, mut errors, mut cms) = (0u64, 0u64, 0u64);
        while errors < spec.min_errors && blocks < spec.max_blocks {
            let count = spec.chunk.min(spec.max_blocks - blocks);
            let chunk: Vec<(u64, u64)> = (blocks..blocks + count)
                .into_par_iter()
                .map_init(LlrWorkspace::default, |ws, t| {
                    link.trial(spec.seed, pi as u64, t, n0, ws)
                })
                .collect::<Result<Vec<_>>>()?;
            for (e, c) in chunk {
                errors += e;
                cms += c;
            }
            blocks += count;
        }
        let bits_sent = blocks * link.bits as u64;
        let ber = errors as f64 / bits_sent as f64;
        points.push(BerPoint {
            snr_db: snr,
            blocks,
            bits_sent,
            bit_errors: errors,
            ber,
            ci95: 1.96 * (ber * (1.0 - ber) / bits_sent as f64).sqrt(),
            elapsed: start.elapsed().as_secs_f64(),
            cm_per_subcarrier: cms as f64 / (blocks as f64 * link.cfg.subcarriers as f64),
            capped: errors < spec.min_errors,
        });
    }
    Ok(BerCurve {
        header: spec.to_kv(),
        points,
    })
}

/// LLR matrices of every subblock of trial 0 at SNR point `point`, as CSV.
pub fn metric_dump(spec: &ExperimentSpec, point: usize) -> Result<String> {
    let link = Link::new(spec)?;
    let BlockDetector::Llr(det) = &link.detector else {
        return Err(Error::Config("metric dumps need the llr detector".into()));
    };
    let snr = *spec
        .snr_db
        .get(point)
        .ok_or_else(|| Error::Config(format!("no SNR point {point}")))?;
    let n0 = link.cfg.n0_for_ebn0_db(snr)?;
    let mut rng = trial_stream(spec.seed, point as u64, 0);
    let bits = random_bits(&mut rng, link.bits);
    let s = link.encoder.encode_block(&bits, link.units)?;
    let ch = draw_channel(&mut rng, &link.cfg, link.profile)?;
    let y = apply_channel_freq(&s, &ch, &mut rng, n0)?;
    let n = link.cfg.n;
    let yd = crate::txrx::deinterleave(&y, link.units, n);
    let cd = crate::txrx::deinterleave(&ch.freq, link.units, n);
    let mut ws = LlrWorkspace::default();
    let mut out = String::from("subblock,a1,a2,lambda\n");
    for k in 0..link.units {
        det.detect(&yd[k * n..(k + 1) * n], &cd[k * n..(k + 1) * n], n0, &mut ws)?;
        for row in ws.lambda_csv(det.codec().mapper().num_maps).lines().skip(1) {
            let _ = writeln!(out, "{k},{row}");
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick() -> ExperimentSpec {
        ExperimentSpec {
            snr_db: vec![10.0, f64::INFINITY],
            min_errors: 50,
            max_blocks: 40,
            chunk: 8,
            ..Default::default()
        }
    }

    #[test]
    fn noiseless_point_is_error_free() {
        let c = run_ber(&quick()).unwrap();
        assert_eq!(c.points[1].bit_errors, 0);
        assert!(c.points[1].capped);
        assert_eq!(c.points[1].bits_sent, 40 * 288);
        assert!((c.points[0].cm_per_subcarrier - 48.0).abs() < 1e-12);
    }

    #[test]
    fn same_seed_same_curve() {
        let a = run_ber(&quick()).unwrap();
        let mut spec = quick();
        spec.workers = 1;
        let b = run_ber(&spec).unwrap();
        for (p, q) in a.points.iter().zip(&b.points) {
            assert_eq!((p.blocks, p.bit_errors), (q.blocks, q.bit_errors));
        }
    }

    #[test]
    fn csv_shape_and_readback() {
        let c = run_ber(&quick()).unwrap();
        let csv = c.to_csv();
        assert!(csv.starts_with("# scheme=sum\n"));
        assert!(csv.contains(BER_COLUMNS));
        let pts = BerCurve::read_points(&csv).unwrap();
        assert_eq!(pts.len(), 2);
        assert_eq!(pts[0].0, 10.0);
        assert_eq!(pts[1], (f64::INFINITY, 0.0));
    }

    #[test]
    fn metric_dump_rows() {
        let dump = metric_dump(&quick(), 0).unwrap();
        assert_eq!(dump.lines().count(), 1 + 32 * 36);
        assert!(dump.contains(",-inf"));
    }
}
