//! Subblock encoding, block assembly and the OFDM / OFDM-IM baselines.
//!
//! Bit layout of one SuM subblock (`p = p1 + p2` bits):
//!
//! ```text
//! | p1 index bits (MSB first) | n/4 symbols from mode v1 | n/4 symbols from mode v2 |
//! ```
//!
//! Each data symbol takes `log2 Q` bits read LSB first into its index. Symbol
//! `k` of the first group is written to subcarriers `u[2k-1], u[2k]`; symbol `k`
//! of the second group to `w[2k-1], w[2k]`.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::combinatorics::{binomial, bits_to_u64, combo_unrank, floor_log2, BitBudget, ImSelection, IndexMapper};
use crate::config::{Scheme, SystemConfig};
use crate::error::{Error, Result};
use crate::modes::ModeSet;
use crate::Bit;

/// Symbol index from `bits`, least significant bit first.
pub fn symbol_index(bits: &[Bit]) -> usize {
    bits.iter()
        .enumerate()
        .fold(0, |acc, (i, &b)| acc | (usize::from(b & 1) << i))
}

/// Inverse of [`symbol_index`].
pub fn symbol_bits(index: usize, width: usize) -> impl Iterator<Item = Bit> {
    (0..width).map(move |i| ((index >> i) & 1) as Bit)
}

/// One encoded subblock.
#[derive(Debug, Clone, PartialEq)]
pub struct Subblock {
    /// Frequency-domain values on the `n` subcarriers.
    pub symbols: Vec<Complex64>,
    pub selection: ImSelection,
    /// Data-symbol indices `x`, first `n/4` from mode `v1`, then `n/4` from `v2`.
    pub x: Vec<usize>,
}

/// Encoder/decoder for SuM-OFDM-IM subblocks.
#[derive(Debug, Clone)]
pub struct SubblockCodec {
    mapper: Arc<IndexMapper>,
    modes: ModeSet,
    n: usize,
    q: usize,
    budget: BitBudget,
}

impl SubblockCodec {
    pub fn new(cfg: &SystemConfig, modes: &ModeSet) -> Result<Self> {
        let selection = cfg
            .scheme
            .selection()
            .ok_or_else(|| Error::Config(format!("scheme {} has no super-mode subblocks", cfg.scheme)))?;
        cfg.validate()?;
        if modes.num_modes() != cfg.modes || modes.size() != cfg.q {
            return Err(Error::Config(format!(
                "mode set is {}x{}, configuration wants M = {}, Q = {}",
                modes.num_modes(),
                modes.size(),
                cfg.modes,
                cfg.q
            )));
        }
        Ok(SubblockCodec {
            mapper: Arc::new(IndexMapper::new(cfg.modes, cfg.n, selection)?),
            modes: modes.clone(),
            n: cfg.n,
            q: cfg.q,
            budget: cfg.budget()?,
        })
    }

    pub fn mapper(&self) -> &IndexMapper {
        &self.mapper
    }

    pub fn modes(&self) -> &ModeSet {
        &self.modes
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn budget(&self) -> BitBudget {
        self.budget
    }

    /// Bits per data symbol, `log2 Q`.
    pub fn symbol_width(&self) -> usize {
        self.q.trailing_zeros() as usize
    }

    /// Writes flat point indices `mode * Q + q` for ranks `(a1, a2)` and data
    /// indices `x` into `out`.
    pub fn place_indices(&self, a1: usize, a2: usize, x: &[usize], out: &mut [usize]) {
        let [v1, v2] = self.mapper.maps[a1];
        let u = &self.mapper.saps[a2];
        let w = &self.mapper.saps[self.mapper.mirror[a2]];
        let half = self.n / 4;
        for k in 0..half {
            let p1 = (v1 - 1) * self.q + x[k];
            let p2 = (v2 - 1) * self.q + x[half + k];
            out[u[2 * k] - 1] = p1;
            out[u[2 * k + 1] - 1] = p1;
            out[w[2 * k] - 1] = p2;
            out[w[2 * k + 1] - 1] = p2;
        }
    }

    /// Writes the subblock for ranks `(a1, a2)` and data indices `x` into `out`.
    pub fn place(&self, a1: usize, a2: usize, x: &[usize], out: &mut [Complex64]) {
        let mut idx = vec![0; self.n];
        self.place_indices(a1, a2, x, &mut idx);
        for (o, i) in out.iter_mut().zip(idx) {
            *o = self.modes.point(i / self.q, i % self.q);
        }
    }

    pub fn encode_subblock(&self, bits: &[Bit]) -> Result<Subblock> {
        if bits.len() != self.budget.p {
            return Err(Error::Codec(format!(
                "subblock needs {} bits, got {}",
                self.budget.p,
                bits.len()
            )));
        }
        let p1 = self.budget.p1;
        let selection = self.mapper.select(&bits[..p1])?;
        let width = self.symbol_width();
        let x: Vec<usize> = bits[p1..].chunks(width).map(symbol_index).collect();
        let mut symbols = vec![Complex64::default(); self.n];
        self.place(selection.a1 as usize, selection.a2 as usize, &x, &mut symbols);
        Ok(Subblock { symbols, selection, x })
    }

    /// Bits for detected ranks and data-symbol indices.
    pub fn decode_subblock_bits(&self, a1: usize, a2: usize, x: &[usize]) -> Result<Vec<Bit>> {
        if x.len() != self.n / 2 || x.iter().any(|&s| s >= self.q) {
            return Err(Error::Codec(format!("bad data-symbol indices {x:?}")));
        }
        let mut bits = self.mapper.deselect(a1, a2)?;
        let width = self.symbol_width();
        for &s in x {
            bits.extend(symbol_bits(s, width));
        }
        Ok(bits)
    }

    /// Number of distinct subblocks, `2^p`.
    pub fn codebook_len(&self) -> usize {
        1usize << self.budget.p
    }

    /// Splits a codeword index (the subblock's bits read MSB first) into
    /// `(a1, a2, x)`.
    pub fn codeword_labels(&self, index: usize) -> (usize, usize, Vec<usize>) {
        let p2 = self.budget.p2;
        let index_bits = crate::combinatorics::u64_to_bits((index >> p2) as u64, self.budget.p1);
        let sel = self.mapper.select(&index_bits).expect("index within 2^p1");
        let data = crate::combinatorics::u64_to_bits((index & ((1 << p2) - 1)) as u64, p2);
        let x = data.chunks(self.symbol_width()).map(symbol_index).collect();
        (sel.a1 as usize, sel.a2 as usize, x)
    }

    /// Every subblock, ordered by the integer value of its bits.
    pub fn codebook(&self) -> Vec<Vec<Complex64>> {
        (0..self.codebook_len())
            .map(|i| {
                let (a1, a2, x) = self.codeword_labels(i);
                let mut s = vec![Complex64::default(); self.n];
                self.place(a1, a2, &x, &mut s);
                s
            })
            .collect()
    }
}

/// Subcarrier-level block interleaver: position `j` of subblock `a` moves to
/// subcarrier `j * g + a`.
pub fn interleave<T: Copy>(input: &[T], g: usize, n: usize) -> Vec<T> {
    debug_assert_eq!(input.len(), g * n);
    let mut out = input.to_vec();
    for a in 0..g {
        for j in 0..n {
            out[j * g + a] = input[a * n + j];
        }
    }
    out
}

pub fn deinterleave<T: Copy>(input: &[T], g: usize, n: usize) -> Vec<T> {
    debug_assert_eq!(input.len(), g * n);
    let mut out = input.to_vec();
    for a in 0..g {
        for j in 0..n {
            out[a * n + j] = input[j * g + a];
        }
    }
    out
}

/// Unitary DFT pair of a fixed size.
#[derive(Clone)]
pub struct Dft {
    size: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Dft {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Dft").field("size", &self.size).finish()
    }
}

impl Dft {
    pub fn new(size: usize) -> Self {
        let mut planner = FftPlanner::new();
        Dft {
            size,
            forward: planner.plan_fft_forward(size),
            inverse: planner.plan_fft_inverse(size),
        }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn forward(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut buf = x.to_vec();
        self.forward.process(&mut buf);
        let s = (self.size as f64).sqrt().recip();
        buf.iter_mut().for_each(|v| *v *= s);
        buf
    }

    pub fn inverse(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut buf = x.to_vec();
        self.inverse.process(&mut buf);
        let s = (self.size as f64).sqrt().recip();
        buf.iter_mut().for_each(|v| *v *= s);
        buf
    }
}

/// Inverse DFT plus cyclic prefix, and the reverse.
#[derive(Debug, Clone)]
pub struct OfdmModem {
    dft: Dft,
    cp_len: usize,
}

impl OfdmModem {
    pub fn new(size: usize, cp_len: usize) -> Self {
        OfdmModem {
            dft: Dft::new(size),
            cp_len,
        }
    }

    pub fn size(&self) -> usize {
        self.dft.size()
    }

    pub fn cp_len(&self) -> usize {
        self.cp_len
    }

    /// `N` subcarrier values → `N + L` samples.
    pub fn modulate(&self, freq: &[Complex64]) -> Vec<Complex64> {
        let body = self.dft.inverse(freq);
        let mut out = Vec::with_capacity(body.len() + self.cp_len);
        out.extend_from_slice(&body[body.len() - self.cp_len..]);
        out.extend_from_slice(&body);
        out
    }

    /// `N + L` samples → `N` subcarrier values.
    pub fn demodulate(&self, time: &[Complex64]) -> Vec<Complex64> {
        self.dft.forward(&time[self.cp_len..self.cp_len + self.size()])
    }
}

/// Interleaves `g` subblocks into one block and OFDM-modulates it.
/// Returns `(frequency block, time block with CP)`.
pub fn assemble_block(
    subblocks: &[Vec<Complex64>],
    cfg: &SystemConfig,
    modem: &OfdmModem,
) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    if subblocks.len() != cfg.subblocks() || subblocks.iter().any(|s| s.len() != cfg.n) {
        return Err(Error::Codec(format!(
            "expected {} subblocks of {} values",
            cfg.subblocks(),
            cfg.n
        )));
    }
    let flat: Vec<Complex64> = subblocks.concat();
    let freq = interleave(&flat, cfg.subblocks(), cfg.n);
    let time = modem.modulate(&freq);
    Ok((freq, time))
}

/// Gray-labelled unit-power constellation for the baselines: BPSK, square QAM
/// for even `log2 Q`, PSK otherwise.
pub fn baseline_constellation(q: usize) -> Vec<Complex64> {
    let bits = q.trailing_zeros() as usize;
    if q == 2 {
        return vec![Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)];
    }
    let mut pts = vec![Complex64::default(); q];
    if bits.is_multiple_of(2) {
        let side = 1usize << (bits / 2);
        let scale = (2.0 * (q as f64 - 1.0) / 3.0).sqrt().recip();
        for ix in 0..side {
            for iy in 0..side {
                let label = (ix ^ (ix >> 1)) | (iy ^ (iy >> 1)) << (bits / 2);
                pts[label] =
                    Complex64::new((2 * ix) as f64 - (side - 1) as f64, (2 * iy) as f64 - (side - 1) as f64) * scale;
            }
        }
    } else {
        for k in 0..q {
            let phase = 2.0 * PI * k as f64 / q as f64 + PI / q as f64;
            pts[k ^ (k >> 1)] = Complex64::from_polar(1.0, phase);
        }
    }
    pts
}

/// OFDM-IM subblock codec: `k` of `n` subcarriers active, using the first
/// `2^floor(log2 C(n,k))` activation patterns in rank order.
#[derive(Debug, Clone)]
pub struct OfdmImCodec {
    pub n: usize,
    pub active: usize,
    pub q: usize,
    pub index_bits: usize,
    /// Legal patterns, 0-based subcarrier indices.
    pub patterns: Vec<Vec<usize>>,
    pub constellation: Vec<Complex64>,
    /// Amplitude scaling `sqrt(n/k)` keeping subblock energy at `n`.
    pub gain: f64,
}

impl OfdmImCodec {
    pub fn new(n: usize, active: usize, q: usize) -> Result<Self> {
        if active == 0 || active >= n || binomial(n, active) < 2 {
            return Err(Error::Config(format!("invalid OFDM-IM({n},{active})")));
        }
        let index_bits = floor_log2(binomial(n, active)) as usize;
        let patterns = (0..1u64 << index_bits)
            .map(|r| combo_unrank(r, active, n).map(|c| c.iter().map(|i| i - 1).collect()))
            .collect::<Result<Vec<_>>>()?;
        Ok(OfdmImCodec {
            n,
            active,
            q,
            index_bits,
            patterns,
            constellation: baseline_constellation(q),
            gain: (n as f64 / active as f64).sqrt(),
        })
    }

    pub fn bits_per_subblock(&self) -> usize {
        self.index_bits + self.active * self.symbol_width()
    }

    pub fn symbol_width(&self) -> usize {
        self.q.trailing_zeros() as usize
    }

    pub fn encode(&self, bits: &[Bit], out: &mut [Complex64]) {
        let pattern = &self.patterns[bits_to_u64(&bits[..self.index_bits]) as usize];
        out.iter_mut().for_each(|v| *v = Complex64::default());
        for (slot, chunk) in pattern.iter().zip(bits[self.index_bits..].chunks(self.symbol_width())) {
            out[*slot] = self.constellation[symbol_index(chunk)] * self.gain;
        }
    }
}

/// Frequency-domain block encoder for any supported scheme.
#[derive(Debug, Clone)]
pub enum BlockEncoder {
    Sum(SubblockCodec),
    Ofdm { constellation: Vec<Complex64> },
    OfdmIm(OfdmImCodec),
}

impl BlockEncoder {
    /// `modes` is required for the super-mode schemes and ignored otherwise.
    pub fn new(cfg: &SystemConfig, modes: Option<&ModeSet>) -> Result<Self> {
        cfg.validate()?;
        Ok(match cfg.scheme {
            Scheme::Sum | Scheme::SSum => {
                let ms = modes.ok_or_else(|| Error::Config("super-mode scheme needs a mode set".into()))?;
                BlockEncoder::Sum(SubblockCodec::new(cfg, ms)?)
            }
            Scheme::Ofdm => BlockEncoder::Ofdm {
                constellation: baseline_constellation(cfg.q),
            },
            Scheme::OfdmIm { active } => BlockEncoder::OfdmIm(OfdmImCodec::new(cfg.n, active, cfg.q)?),
        })
    }

    /// Bits per subblock (per subcarrier for plain OFDM).
    pub fn unit_bits(&self) -> usize {
        match self {
            BlockEncoder::Sum(c) => c.budget().p,
            BlockEncoder::Ofdm { constellation } => constellation.len().trailing_zeros() as usize,
            BlockEncoder::OfdmIm(c) => c.bits_per_subblock(),
        }
    }

    /// Subcarriers per coding unit.
    pub fn unit_len(&self) -> usize {
        match self {
            BlockEncoder::Sum(c) => c.n(),
            BlockEncoder::Ofdm { .. } => 1,
            BlockEncoder::OfdmIm(c) => c.n,
        }
    }

    /// Encodes `units` coding units, without interleaving.
    pub fn encode_units(&self, bits: &[Bit], units: usize) -> Result<Vec<Complex64>> {
        let per = self.unit_bits();
        if bits.len() != per * units {
            return Err(Error::Codec(format!(
                "expected {} bits, got {}",
                per * units,
                bits.len()
            )));
        }
        let len = self.unit_len();
        let mut out = vec![Complex64::default(); len * units];
        for (chunk, dst) in bits.chunks(per).zip(out.chunks_mut(len)) {
            match self {
                BlockEncoder::Sum(c) => dst.copy_from_slice(&c.encode_subblock(chunk)?.symbols),
                BlockEncoder::Ofdm { constellation } => dst[0] = constellation[symbol_index(chunk)],
                BlockEncoder::OfdmIm(c) => c.encode(chunk, dst),
            }
        }
        Ok(out)
    }

    /// Encodes and interleaves a full block of `units` units.
    pub fn encode_block(&self, bits: &[Bit], units: usize) -> Result<Vec<Complex64>> {
        let raw = self.encode_units(bits, units)?;
        Ok(match self {
            BlockEncoder::Ofdm { .. } => raw,
            _ => interleave(&raw, units, self.unit_len()),
        })
    }
}

/// Plain OFDM / OFDM-IM frequency block for `cfg` (no CP, not modulated).
pub fn encode_baseline(bits: &[Bit], cfg: &SystemConfig) -> Result<Vec<Complex64>> {
    if cfg.scheme.is_super_mode() {
        return Err(Error::Config("encode_baseline handles ofdm and ofdm-im only".into()));
    }
    let enc = BlockEncoder::new(cfg, None)?;
    let units = cfg.subcarriers / enc.unit_len();
    enc.encode_block(bits, units)
}

/// `subcarrier,re,im` rows (0-based subcarrier index).
pub fn freq_block_csv(block: &[Complex64]) -> String {
    let mut s = String::from("subcarrier,re,im\n");
    for (i, v) in block.iter().enumerate() {
        let _ = writeln!(s, "{i},{:?},{:?}", v.re, v.im);
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinatorics::u64_to_bits;
    use crate::modes::partition_qam;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn bits(s: &str) -> Vec<Bit> {
        s.bytes().map(|c| c - b'0').collect()
    }

    fn codec(m: usize, n: usize, q: usize) -> SubblockCodec {
        let cfg = SystemConfig::sum(m, n, q);
        SubblockCodec::new(&cfg, &partition_qam(m, q).unwrap()).unwrap()
    }

    #[test]
    fn worked_example_subblock() {
        let c = codec(4, 4, 4);
        let sb = c.encode_subblock(&bits("010011110")).unwrap();
        assert_eq!(sb.selection.v, [1, 4]);
        assert_eq!(sb.selection.u, vec![1, 3]);
        assert_eq!(sb.x, vec![3, 1]);
        let ms = c.modes();
        let chi14 = ms.point(0, 3);
        let chi42 = ms.point(3, 1);
        assert_eq!(sb.symbols, vec![chi14, chi42, chi14, chi42]);
        let back = c.decode_subblock_bits(3, 1, &sb.x).unwrap();
        assert_eq!(back, bits("010011110"));
    }

    #[test]
    fn zero_bits_give_first_symbols() {
        let c = codec(4, 4, 4);
        let sb = c.encode_subblock(&[0; 9]).unwrap();
        let (a, b) = (c.modes().point(0, 0), c.modes().point(1, 0));
        assert_eq!(sb.symbols, vec![a, a, b, b]);
        assert_eq!(c.decode_subblock_bits(0, 0, &sb.x).unwrap(), vec![0; 9]);
    }

    #[test]
    fn wrong_length_is_codec_error() {
        let c = codec(4, 4, 4);
        assert!(matches!(c.encode_subblock(&[0; 8]), Err(Error::Codec(_))));
        assert!(matches!(
            c.decode_subblock_bits(2, 5, &[0, 0]),
            Err(Error::IllegalCombination { .. })
        ));
    }

    #[test]
    fn repetition_structure_n8() {
        let c = codec(4, 8, 4);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let b: Vec<Bit> = (0..c.budget().p).map(|_| rng.random_range(0..2)).collect();
            let sb = c.encode_subblock(&b).unwrap();
            assert!(sb.symbols.iter().all(|s| s.norm() > 0.0));
            let sel = &sb.selection;
            for k in 0..2 {
                assert_eq!(sb.symbols[sel.u[2 * k] - 1], sb.symbols[sel.u[2 * k + 1] - 1]);
                assert_eq!(sb.symbols[sel.w[2 * k] - 1], sb.symbols[sel.w[2 * k + 1] - 1]);
            }
            let mut distinct = sb.x.iter().enumerate().map(|(i, &x)| (i / 2, x)).collect::<Vec<_>>();
            distinct.dedup();
            assert_eq!(sb.x.len(), 4);
            for &pos in &sel.u {
                assert!(c.modes().mode(sel.v[0] - 1).contains(&sb.symbols[pos - 1]));
            }
            for &pos in &sel.w {
                assert!(c.modes().mode(sel.v[1] - 1).contains(&sb.symbols[pos - 1]));
            }
            let back = c.decode_subblock_bits(sel.a1 as usize, sel.a2 as usize, &sb.x).unwrap();
            assert_eq!(back, b);
        }
    }

    #[test]
    fn codebook_follows_bit_order() {
        let c = codec(4, 4, 4);
        let book = c.codebook();
        assert_eq!(book.len(), 512);
        for (i, s) in book.iter().enumerate().step_by(37) {
            let sb = c.encode_subblock(&u64_to_bits(i as u64, 9)).unwrap();
            assert_eq!(&sb.symbols, s);
        }
        // mean subblock energy is n for a normalised mode set
        let e: f64 = book.iter().flatten().map(|v| v.norm_sqr()).sum::<f64>() / book.len() as f64;
        assert!((e - 4.0).abs() < 1e-9);
    }

    #[test]
    fn interleaver_order() {
        let x: Vec<usize> = (0..8).collect();
        // [s1(1..4), s2(1..4)] -> [s1(1), s2(1), s1(2), s2(2), ...]
        assert_eq!(interleave(&x, 2, 4), vec![0, 4, 1, 5, 2, 6, 3, 7]);
        let y: Vec<usize> = (0..128).collect();
        assert_eq!(deinterleave(&interleave(&y, 32, 4), 32, 4), y);
    }

    #[test]
    fn cyclic_prefix_and_unitary_roundtrip() {
        let modem = OfdmModem::new(128, 16);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x: Vec<Complex64> = (0..128)
            .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect();
        let t = modem.modulate(&x);
        assert_eq!(t.len(), 144);
        assert_eq!(&t[..16], &t[128..144]);
        let ef: f64 = x.iter().map(|v| v.norm_sqr()).sum();
        let et: f64 = t[16..].iter().map(|v| v.norm_sqr()).sum();
        assert!((ef - et).abs() < 1e-10);
        let back = modem.demodulate(&t);
        for (a, b) in x.iter().zip(&back) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn assembled_block_roundtrip() {
        let cfg = SystemConfig::sum(4, 4, 4);
        let c = codec(4, 4, 4);
        let modem = OfdmModem::new(128, 16);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let b: Vec<Bit> = (0..288).map(|_| rng.random_range(0..2)).collect();
        let subs: Vec<Vec<Complex64>> = b.chunks(9).map(|ch| c.encode_subblock(ch).unwrap().symbols).collect();
        let (freq, time) = assemble_block(&subs, &cfg, &modem).unwrap();
        let back = deinterleave(&modem.demodulate(&time), 32, 4);
        for (a, b) in subs.concat().iter().zip(&back) {
            assert!((a - b).norm() < 1e-10);
        }
        assert_eq!(freq.len(), 128);
        assert!(assemble_block(&subs[1..], &cfg, &modem).is_err());
    }

    #[test]
    fn baseline_constellations_unit_power() {
        for q in [2, 4, 8, 16, 64] {
            let c = baseline_constellation(q);
            let p = c.iter().map(|v| v.norm_sqr()).sum::<f64>() / q as f64;
            assert!((p - 1.0).abs() < 1e-12, "Q = {q}");
        }
    }

    #[test]
    fn baseline_block_sizes() {
        let ofdm = SystemConfig {
            q: 16,
            scheme: Scheme::Ofdm,
            ..Default::default()
        };
        let blk = encode_baseline(&vec![1; 512], &ofdm).unwrap();
        assert_eq!(blk.len(), 128);
        let im = SystemConfig {
            q: 2,
            scheme: Scheme::OfdmIm { active: 2 },
            ..Default::default()
        };
        let blk = encode_baseline(&[0; 128], &im).unwrap();
        let active = blk.iter().filter(|v| v.norm() > 0.0).count();
        assert_eq!(active, 64);
        let e: f64 = blk.iter().map(|v| v.norm_sqr()).sum();
        assert!((e - 128.0).abs() < 1e-9);
        assert!(encode_baseline(&[0; 3], &im).is_err());
    }
}
