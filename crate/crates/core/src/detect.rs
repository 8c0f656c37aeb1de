//! Subblock detectors: exhaustive ML and the LLR-based reduced-complexity
//! detector, plus block-level plumbing for every scheme.
//!
//! Complex-multiplication (CM) accounting:
//!
//! - ML: one CM per candidate codeword, `2^p` per subblock.
//! - LLR: one CM per pair metric formed for each (SAP, mode, symbol), i.e.
//!   `C(n, n/2) * M * Q * n/2` per subblock.
//! - Plain OFDM and OFDM-IM ML: `Q` per subcarrier.

use std::fmt::Write as _;

use num_complex::Complex64;

use crate::combinatorics::binomial;
use crate::error::{Error, Result};
use crate::txrx::{deinterleave, symbol_bits, BlockEncoder, OfdmImCodec, SubblockCodec};
use crate::Bit;

/// Largest codebook the exhaustive detector will search.
pub const ML_BUDGET: usize = 1 << 16;

/// `ln(e^a + e^b)`, exact for infinite arguments.
pub fn jacobian_max(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    a.max(b) + (-(a - b).abs()).exp().ln_1p()
}

/// How per-symbol metrics are folded over symbol hypotheses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Combiner {
    /// `max(a, b)`; makes the LLR detector decide exactly as ML.
    #[default]
    MaxLog,
    /// `ln(e^a + e^b)` via [`jacobian_max`].
    Jacobian,
}

impl Combiner {
    #[inline]
    fn fold(self, a: f64, b: f64) -> f64 {
        match self {
            Combiner::MaxLog => a.max(b),
            Combiner::Jacobian => jacobian_max(a, b),
        }
    }
}

impl std::str::FromStr for Combiner {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "maxlog" | "max-log" | "max" => Ok(Combiner::MaxLog),
            "jacobian" | "logsumexp" => Ok(Combiner::Jacobian),
            _ => Err(Error::Parse(format!("unknown combiner {s:?}"))),
        }
    }
}

/// Detector family for the super-mode schemes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DetectorKind {
    Ml,
    Llr,
}

impl std::str::FromStr for DetectorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ml" => Ok(DetectorKind::Ml),
            "llr" => Ok(DetectorKind::Llr),
            _ => Err(Error::Parse(format!("unknown detector {s:?}"))),
        }
    }
}

impl std::fmt::Display for DetectorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            DetectorKind::Ml => "ml",
            DetectorKind::Llr => "llr",
        })
    }
}

/// Outcome of one subblock detection.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectionResult {
    pub a1: usize,
    pub a2: usize,
    pub d: u64,
    pub x: Vec<usize>,
    pub bits: Vec<Bit>,
    pub cm_count: u64,
}

fn products(codec: &SubblockCodec, c: &[Complex64], out: &mut Vec<Complex64>) {
    let pts = codec.modes().num_modes() * codec.q();
    out.clear();
    for &cj in c {
        for m in codec.modes().modes() {
            out.extend(m.iter().map(|&p| cj * p));
        }
    }
    debug_assert_eq!(out.len(), c.len() * pts);
}

/// Exhaustive ML over the whole subblock codebook.
#[derive(Debug, Clone)]
pub struct MlDetector {
    codec: SubblockCodec,
    /// Flat point index per position, `n` entries per codeword.
    book: Vec<usize>,
}

impl MlDetector {
    pub fn new(codec: &SubblockCodec) -> Result<Self> {
        let len = codec.codebook_len();
        if len > ML_BUDGET {
            return Err(Error::Size(format!(
                "ML search over 2^{} codewords exceeds the budget of {ML_BUDGET}; use the llr detector",
                codec.budget().p
            )));
        }
        let n = codec.n();
        let mut book = vec![0; len * n];
        for (i, dst) in book.chunks_mut(n).enumerate() {
            let (a1, a2, x) = codec.codeword_labels(i);
            codec.place_indices(a1, a2, &x, dst);
        }
        Ok(MlDetector {
            codec: codec.clone(),
            book,
        })
    }

    pub fn codec(&self) -> &SubblockCodec {
        &self.codec
    }

    /// Squared distances `||y - c s||^2` for every codeword, in codeword order.
    pub fn metrics(&self, y: &[Complex64], c: &[Complex64]) -> Vec<f64> {
        let n = self.codec.n();
        let pts = self.codec.modes().num_modes() * self.codec.q();
        let mut cp = Vec::new();
        products(&self.codec, c, &mut cp);
        self.book
            .chunks(n)
            .map(|cw| {
                cw.iter()
                    .enumerate()
                    .map(|(j, &k)| (y[j] - cp[j * pts + k]).norm_sqr())
                    .sum()
            })
            .collect()
    }

    pub fn detect(&self, y: &[Complex64], c: &[Complex64]) -> Result<DetectionResult> {
        check_len(self.codec.n(), y, c)?;
        let metrics = self.metrics(y, c);
        let mut best = 0;
        for (i, &m) in metrics.iter().enumerate() {
            if m < metrics[best] {
                best = i;
            }
        }
        let (a1, a2, x) = self.codec.codeword_labels(best);
        let bits = self.codec.decode_subblock_bits(a1, a2, &x)?;
        Ok(DetectionResult {
            a1,
            a2,
            d: (a1 + self.codec.mapper().num_maps * a2) as u64,
            x,
            bits,
            cm_count: self.codec.codebook_len() as u64,
        })
    }
}

fn check_len(n: usize, y: &[Complex64], c: &[Complex64]) -> Result<()> {
    if y.len() != n || c.len() != n {
        return Err(Error::Size(format!(
            "subblock needs {n} observations and gains, got {} and {}",
            y.len(),
            c.len()
        )));
    }
    Ok(())
}

/// One-shot exhaustive ML detection.
pub fn ml_detect(y: &[Complex64], c: &[Complex64], codec: &SubblockCodec) -> Result<DetectionResult> {
    MlDetector::new(codec)?.detect(y, c)
}

/// Scratch tables of the LLR detector, reusable across calls.
#[derive(Debug, Clone, Default)]
pub struct LlrWorkspace {
    /// `delta1[(j * M + m) * Q + q] = -|y_j - c_j chi_{m,q}|^2 / N0`.
    pub delta1: Vec<f64>,
    /// Pair metrics `delta2[((s * P + h) * M + m) * Q + q]` for SAP rank `s`,
    /// repetition pair `h` of that SAP (`P = n/4` pairs), mode `m`, symbol `q`.
    pub delta2: Vec<f64>,
    /// `gamma[s * M + m]`: SAP `s` carrying mode `m`, symbols folded, null terms added.
    pub gamma: Vec<f64>,
    /// `lambda[a2 * C(M,2) + a1]`; illegal combinations hold `-inf`.
    pub lambda: Vec<f64>,
}

impl LlrWorkspace {
    /// `(a1, a2, value)` rows of the last LLR matrix.
    pub fn lambda_csv(&self, num_maps: usize) -> String {
        let mut s = String::from("a1,a2,lambda\n");
        for (i, v) in self.lambda.iter().enumerate() {
            let _ = writeln!(s, "{},{},{v:?}", i % num_maps, i / num_maps);
        }
        s
    }
}

/// LLR-based reduced-complexity ML detector.
#[derive(Debug, Clone)]
pub struct LlrDetector {
    codec: SubblockCodec,
    combiner: Combiner,
    num_saps: usize,
}

impl LlrDetector {
    pub fn new(codec: &SubblockCodec, combiner: Combiner) -> Result<Self> {
        let n = codec.n();
        if n < 4 || !n.is_power_of_two() {
            return Err(Error::Config(format!("LLR detector needs n = 2^r >= 4, got {n}")));
        }
        let num_saps = binomial(n, n / 2) as usize;
        // complements are looked up explicitly; for n <= 8 they must also sit at the mirrored rank
        if n <= 8 && !codec.mapper().mirror_is_reversal() {
            return Err(Error::Config("SAP complements are not at mirrored ranks".into()));
        }
        Ok(LlrDetector {
            codec: codec.clone(),
            combiner,
            num_saps,
        })
    }

    pub fn codec(&self) -> &SubblockCodec {
        &self.codec
    }

    pub fn combiner(&self) -> Combiner {
        self.combiner
    }

    pub fn cm_per_subblock(&self) -> u64 {
        let n = self.codec.n();
        (self.num_saps * self.codec.modes().num_modes() * self.codec.q() * n / 2) as u64
    }

    /// Detects one subblock. `n0 = 0` falls back to unit metric scaling and
    /// max-log folding.
    pub fn detect(&self, y: &[Complex64], c: &[Complex64], n0: f64, ws: &mut LlrWorkspace) -> Result<DetectionResult> {
        let codec = &self.codec;
        let n = codec.n();
        check_len(n, y, c)?;
        let modes = codec.modes().num_modes();
        let q = codec.q();
        let mapper = codec.mapper();
        let (scale, combiner) = if n0 > 0.0 {
            (1.0 / n0, self.combiner)
        } else {
            (1.0, Combiner::MaxLog)
        };
        let pairs = n / 4;

        // per-subcarrier symbol metrics
        ws.delta1.clear();
        for j in 0..n {
            for m in 0..modes {
                for s in 0..q {
                    let p = codec.modes().point(m, s);
                    ws.delta1.push(-(y[j] - c[j] * p).norm_sqr() * scale);
                }
            }
        }
        let d1 = |j: usize, m: usize, s: usize| ws.delta1[(j * modes + m) * q + s];
        let null: Vec<f64> = y.iter().map(|v| -v.norm_sqr() * scale).collect();

        // repetition-pair metrics per SAP
        let mut delta2 = std::mem::take(&mut ws.delta2);
        delta2.clear();
        for sap in &mapper.saps {
            for h in 0..pairs {
                let (j1, j2) = (sap[2 * h] - 1, sap[2 * h + 1] - 1);
                for m in 0..modes {
                    for s in 0..q {
                        delta2.push(d1(j1, m, s) + d1(j2, m, s));
                    }
                }
            }
        }

        // fold symbols, add null-hypothesis terms of the complementary positions
        ws.gamma.clear();
        for (r, sap) in mapper.saps.iter().enumerate() {
            let off: f64 = (0..n).filter(|j| !sap.contains(&(j + 1))).map(|j| null[j]).sum();
            for m in 0..modes {
                let mut g = off;
                for h in 0..pairs {
                    let base = ((r * pairs + h) * modes + m) * q;
                    let row = &delta2[base..base + q];
                    g += row[1..].iter().fold(row[0], |acc, &v| combiner.fold(acc, v));
                }
                ws.gamma.push(g);
            }
        }

        // joint MAP/SAP matrix with illegal entries masked
        let num_maps = mapper.num_maps;
        ws.lambda.clear();
        let mut best = (f64::NEG_INFINITY, 0usize, 0usize);
        let mut found = false;
        for a2 in 0..self.num_saps {
            let mirror = mapper.mirror[a2];
            for a1 in 0..num_maps {
                let v = if mapper.is_legal(a1, a2) {
                    let [v1, v2] = mapper.maps[a1];
                    ws.gamma[a2 * modes + v1 - 1] + ws.gamma[mirror * modes + v2 - 1]
                } else {
                    f64::NEG_INFINITY
                };
                ws.lambda.push(v);
                if mapper.is_legal(a1, a2) && (!found || v > best.0) {
                    best = (v, a1, a2);
                    found = true;
                }
            }
        }
        let (_, a1, a2) = best;

        // per-pair symbol decisions for the winning MAP/SAP
        let [v1, v2] = mapper.maps[a1];
        let mut x = Vec::with_capacity(n / 2);
        for (r, mode) in [(a2, v1 - 1), (mapper.mirror[a2], v2 - 1)] {
            for h in 0..pairs {
                let base = ((r * pairs + h) * modes + mode) * q;
                let row = &delta2[base..base + q];
                let mut arg = 0;
                for (s, &v) in row.iter().enumerate() {
                    if v > row[arg] {
                        arg = s;
                    }
                }
                x.push(arg);
            }
        }
        ws.delta2 = delta2;
        let bits = codec.decode_subblock_bits(a1, a2, &x)?;
        Ok(DetectionResult {
            a1,
            a2,
            d: (a1 + num_maps * a2) as u64,
            x,
            bits,
            cm_count: self.cm_per_subblock(),
        })
    }
}

/// One-shot LLR detection with a fresh workspace.
pub fn llr_detect(
    y: &[Complex64],
    c: &[Complex64],
    codec: &SubblockCodec,
    n0: f64,
    combiner: Combiner,
) -> Result<DetectionResult> {
    LlrDetector::new(codec, combiner)?.detect(y, c, n0, &mut LlrWorkspace::default())
}

/// Hard decision for plain OFDM: nearest scaled constellation point.
fn ofdm_decide(y: Complex64, c: Complex64, constellation: &[Complex64]) -> usize {
    let mut best = (f64::INFINITY, 0);
    for (i, &p) in constellation.iter().enumerate() {
        let m = (y - c * p).norm_sqr();
        if m < best.0 {
            best = (m, i);
        }
    }
    best.1
}

/// ML detection of one OFDM-IM subblock; returns `(pattern index, symbols)`.
pub fn ofdm_im_detect(y: &[Complex64], c: &[Complex64], codec: &OfdmImCodec) -> (usize, Vec<usize>) {
    let n = codec.n;
    let mut best_sym = vec![0usize; n];
    let mut best_metric = vec![0f64; n];
    for j in 0..n {
        let mut b = (f64::INFINITY, 0);
        for (s, &p) in codec.constellation.iter().enumerate() {
            let m = (y[j] - c[j] * p * codec.gain).norm_sqr();
            if m < b.0 {
                b = (m, s);
            }
        }
        best_metric[j] = b.0;
        best_sym[j] = b.1;
    }
    let null: Vec<f64> = y.iter().map(|v| v.norm_sqr()).collect();
    let total_null: f64 = null.iter().sum();
    let mut best = (f64::INFINITY, 0);
    for (i, pat) in codec.patterns.iter().enumerate() {
        let m = total_null + pat.iter().map(|&j| best_metric[j] - null[j]).sum::<f64>();
        if m < best.0 {
            best = (m, i);
        }
    }
    let pat = &codec.patterns[best.1];
    (best.1, pat.iter().map(|&j| best_sym[j]).collect())
}

/// Decoded bits and total CM count for one block.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockDecision {
    pub bits: Vec<Bit>,
    pub cm_count: u64,
}

/// Block-level detector for any scheme.
#[derive(Debug, Clone)]
pub enum BlockDetector {
    Ml(MlDetector),
    Llr(LlrDetector),
    Ofdm { constellation: Vec<Complex64> },
    OfdmIm(OfdmImCodec),
}

impl BlockDetector {
    /// `kind` and `combiner` only matter for the super-mode schemes.
    pub fn new(encoder: &BlockEncoder, kind: DetectorKind, combiner: Combiner) -> Result<Self> {
        Ok(match encoder {
            BlockEncoder::Sum(codec) => match kind {
                DetectorKind::Ml => BlockDetector::Ml(MlDetector::new(codec)?),
                DetectorKind::Llr => BlockDetector::Llr(LlrDetector::new(codec, combiner)?),
            },
            BlockEncoder::Ofdm { constellation } => BlockDetector::Ofdm {
                constellation: constellation.clone(),
            },
            BlockEncoder::OfdmIm(codec) => BlockDetector::OfdmIm(codec.clone()),
        })
    }

    fn unit_len(&self) -> usize {
        match self {
            BlockDetector::Ml(d) => d.codec().n(),
            BlockDetector::Llr(d) => d.codec().n(),
            BlockDetector::Ofdm { .. } => 1,
            BlockDetector::OfdmIm(c) => c.n,
        }
    }

    /// Deinterleaves `y`/`c` and detects every coding unit independently.
    pub fn detect_block(
        &self,
        y: &[Complex64],
        c: &[Complex64],
        n0: f64,
        ws: &mut LlrWorkspace,
    ) -> Result<BlockDecision> {
        if y.len() != c.len() || !y.len().is_multiple_of(self.unit_len()) {
            return Err(Error::Size(format!(
                "block of {} observations and {} gains does not split into units of {}",
                y.len(),
                c.len(),
                self.unit_len()
            )));
        }
        let len = self.unit_len();
        let units = y.len() / len;
        let mut bits = Vec::new();
        let mut cm = 0;
        match self {
            BlockDetector::Ofdm { constellation } => {
                let width = constellation.len().trailing_zeros() as usize;
                for (&yv, &cv) in y.iter().zip(c) {
                    bits.extend(symbol_bits(ofdm_decide(yv, cv, constellation), width));
                }
                cm = (constellation.len() * y.len()) as u64;
            }
            _ => {
                let yd = deinterleave(y, units, len);
                let cd = deinterleave(c, units, len);
                for (ys, cs) in yd.chunks(len).zip(cd.chunks(len)) {
                    match self {
                        BlockDetector::Ml(d) => {
                            let r = d.detect(ys, cs)?;
                            bits.extend(r.bits);
                            cm += r.cm_count;
                        }
                        BlockDetector::Llr(d) => {
                            let r = d.detect(ys, cs, n0, ws)?;
                            bits.extend(r.bits);
                            cm += r.cm_count;
                        }
                        BlockDetector::OfdmIm(codec) => {
                            let (pat, syms) = ofdm_im_detect(ys, cs, codec);
                            bits.extend(crate::combinatorics::u64_to_bits(pat as u64, codec.index_bits));
                            for s in syms {
                                bits.extend(symbol_bits(s, codec.symbol_width()));
                            }
                            cm += (codec.n * codec.q) as u64;
                        }
                        BlockDetector::Ofdm { .. } => unreachable!(),
                    }
                }
            }
        }
        Ok(BlockDecision { bits, cm_count: cm })
    }
}
