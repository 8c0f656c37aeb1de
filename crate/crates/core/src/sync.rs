//! Preamble-based synchronisation, comb-pilot channel estimation and SNR
//! estimation for single-symbol frames.
//!
//! Frame layout (samples):
//!
//! ```text
//! | training half (128) | training half (128) | CP (32) | OFDM symbol (256) |
//! ```
//!
//! The 256 subcarriers hold 53 lower guards, 75 used, DC, 75 used and 52
//! upper guards. The first of every six used subcarriers (in ascending
//! frequency) is a pilot, giving 25 pilots and 125 data subcarriers.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::txrx::{BlockEncoder, Dft};
use crate::Bit;

// Both edge samples of the resulting half carry at least unit power. A weak
// leading sample lets the data after the preamble pull the timing peak one
// sample late.
const TRAINING_SEED: u64 = 0x5eed_0004;
const PILOT_SEED: u64 = 0x5eed_0002;

/// Default floor on the normalised timing metric.
pub const TO_FLOOR: f64 = 0.5;

/// Samples the FFT window is moved back into the cyclic prefix.
pub const CP_BACKOFF: usize = 2;

/// Subcarrier and sample layout of one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameLayout {
    pub fft_size: usize,
    pub cp: usize,
    /// Length of each training half.
    pub half: usize,
    pub guard_low: usize,
    pub guard_high: usize,
    /// Used subcarriers between two pilots, plus one.
    pub pilot_spacing: usize,
    /// Signed frequency index of every used subcarrier, ascending.
    pub used: Vec<i64>,
    /// Positions in `used` carrying pilots.
    pub pilots: Vec<usize>,
    /// Positions in `used` carrying data.
    pub data: Vec<usize>,
}

impl Default for FrameLayout {
    fn default() -> Self {
        FrameLayout::new(256, 32, 53, 52, 6).expect("default layout is consistent")
    }
}

impl FrameLayout {
    pub fn new(fft_size: usize, cp: usize, guard_low: usize, guard_high: usize, pilot_spacing: usize) -> Result<Self> {
        if fft_size < 8
            || !fft_size.is_multiple_of(2)
            || guard_low + guard_high + 1 >= fft_size
            || cp >= fft_size
            || pilot_spacing < 2
        {
            return Err(Error::Config(format!(
                "inconsistent frame layout: fft {fft_size}, cp {cp}, guards {guard_low}+{guard_high}, pilot spacing {pilot_spacing}"
            )));
        }
        let half = fft_size as i64 / 2;
        let lo = -half + guard_low as i64;
        let hi = half - 1 - guard_high as i64;
        let used: Vec<i64> = (lo..=hi).filter(|&k| k != 0).collect();
        let pilots: Vec<usize> = (0..used.len()).filter(|j| j % pilot_spacing == 0).collect();
        let data: Vec<usize> = (0..used.len()).filter(|j| j % pilot_spacing != 0).collect();
        if used.len() + guard_low + guard_high + 1 != fft_size {
            return Err(Error::Config("guard bands do not cover the spectrum".into()));
        }
        Ok(FrameLayout {
            fft_size,
            cp,
            half: fft_size / 2,
            guard_low,
            guard_high,
            pilot_spacing,
            used,
            pilots,
            data,
        })
    }

    /// FFT bin of used subcarrier `j`.
    pub fn bin(&self, j: usize) -> usize {
        self.used[j].rem_euclid(self.fft_size as i64) as usize
    }

    pub fn frame_len(&self) -> usize {
        2 * self.half + self.cp + self.fft_size
    }

    /// `(key, value)` pairs for trace headers and reports.
    pub fn fields(&self) -> Vec<(&'static str, String)> {
        vec![
            ("fft_size", self.fft_size.to_string()),
            ("cp", self.cp.to_string()),
            ("guard_low", self.guard_low.to_string()),
            ("guard_high", self.guard_high.to_string()),
            ("pilot_spacing", self.pilot_spacing.to_string()),
            ("data_subcarriers", self.data.len().to_string()),
            ("pilot_subcarriers", self.pilots.len().to_string()),
        ]
    }
}

fn qpsk_sequence(seed: u64, len: usize) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = std::f64::consts::FRAC_1_SQRT_2;
    (0..len)
        .map(|_| {
            let re = if rng.random::<bool>() { a } else { -a };
            let im = if rng.random::<bool>() { a } else { -a };
            Complex64::new(re, im)
        })
        .collect()
}

/// One training half: unitary inverse DFT of a fixed pseudo-random QPSK sequence.
pub fn training_half(layout: &FrameLayout) -> Vec<Complex64> {
    Dft::new(layout.half).inverse(&qpsk_sequence(TRAINING_SEED, layout.half))
}

/// Known pilot values in pilot order.
pub fn pilot_values(layout: &FrameLayout) -> Vec<Complex64> {
    qpsk_sequence(PILOT_SEED, layout.pilots.len())
}

/// Coding units that fit the data subcarriers, and bits they carry.
pub fn frame_capacity(encoder: &BlockEncoder, layout: &FrameLayout) -> (usize, usize) {
    let units = layout.data.len() / encoder.unit_len();
    (units, units * encoder.unit_bits())
}

/// Energy per payload bit of the frame's OFDM symbol including its CP.
/// Unused data subcarriers are left empty and do not count.
pub fn energy_per_bit(encoder: &BlockEncoder, layout: &FrameLayout) -> f64 {
    let (units, payload) = frame_capacity(encoder, layout);
    let active = (units * encoder.unit_len() + layout.pilots.len()) as f64;
    active * (layout.fft_size + layout.cp) as f64 / layout.fft_size as f64 / payload as f64
}

/// A transmitted frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    /// Preamble, CP and OFDM symbol.
    pub time: Vec<Complex64>,
    /// Values on every used subcarrier, in `layout.used` order.
    pub used: Vec<Complex64>,
}

pub fn build_frame(bits: &[Bit], encoder: &BlockEncoder, layout: &FrameLayout) -> Result<Frame> {
    let (units, capacity) = frame_capacity(encoder, layout);
    if units == 0 || bits.len() != capacity {
        return Err(Error::Config(format!(
            "frame carries {capacity} payload bits, got {}",
            bits.len()
        )));
    }
    let payload = encoder.encode_block(bits, units)?;
    let mut used = vec![Complex64::default(); layout.used.len()];
    for (&j, &v) in layout.data.iter().zip(&payload) {
        used[j] = v;
    }
    for (&j, &v) in layout.pilots.iter().zip(&pilot_values(layout)) {
        used[j] = v;
    }
    let mut bins = vec![Complex64::default(); layout.fft_size];
    for (j, &v) in used.iter().enumerate() {
        bins[layout.bin(j)] = v;
    }
    let body = Dft::new(layout.fft_size).inverse(&bins);
    let half = training_half(layout);
    let mut time = Vec::with_capacity(layout.frame_len());
    time.extend_from_slice(&half);
    time.extend_from_slice(&half);
    time.extend_from_slice(&body[layout.fft_size - layout.cp..]);
    time.extend_from_slice(&body);
    Ok(Frame { time, used })
}

/// Normalised repetition metric `|P(d)|^2 / (E1(d) E2(d))` at offset `d`,
/// where `P` correlates the two half-windows and `E1`, `E2` are their
/// energies. Bounded by 1, with equality when the halves are proportional.
pub fn timing_metric(rx: &[Complex64], d: usize, half: usize) -> f64 {
    let mut p = Complex64::default();
    let (mut e1, mut e2) = (0.0, 0.0);
    for k in 0..half {
        let (a, b) = (rx[d + k], rx[d + k + half]);
        p += a.conj() * b;
        e1 += a.norm_sqr();
        e2 += b.norm_sqr();
    }
    if e1 == 0.0 || e2 == 0.0 {
        0.0
    } else {
        p.norm_sqr() / (e1 * e2)
    }
}

/// Earliest offset maximising [`timing_metric`] over `0..=max_offset`.
pub fn estimate_to(rx: &[Complex64], layout: &FrameLayout, max_offset: usize, floor: f64) -> Result<usize> {
    let last = max_offset.min(rx.len().saturating_sub(2 * layout.half));
    if rx.len() < 2 * layout.half {
        return Err(Error::SyncFailure { peak: 0.0, floor });
    }
    let mut best = (f64::NEG_INFINITY, 0);
    for d in 0..=last {
        let m = timing_metric(rx, d, layout.half);
        if m > best.0 {
            best = (m, d);
        }
    }
    if best.0 < floor {
        return Err(Error::SyncFailure { peak: best.0, floor });
    }
    Ok(best.1)
}

/// Frequency offset in subcarrier spacings of the `fft_size`-point symbol,
/// from the two training halves starting at `start`.
pub fn estimate_cfo(rx: &[Complex64], start: usize, layout: &FrameLayout) -> f64 {
    let dft = Dft::new(layout.half);
    let t1 = dft.forward(&rx[start..start + layout.half]);
    let t2 = dft.forward(&rx[start + layout.half..start + 2 * layout.half]);
    let z: Complex64 = t1.iter().zip(&t2).map(|(a, b)| a.conj() * b).sum();
    z.im.atan2(z.re) * layout.fft_size as f64 / (2.0 * PI * layout.half as f64)
}

/// Linear interpolation of complex samples at real positions, with
/// nearest-point hold outside `[xs[0], xs[last]]`. `xs` must be ascending.
pub fn interpolate(xs: &[f64], vs: &[Complex64], at: &[f64]) -> Vec<Complex64> {
    at.iter()
        .map(|&x| {
            if x <= xs[0] {
                return vs[0];
            }
            if x >= xs[xs.len() - 1] {
                return vs[vs.len() - 1];
            }
            let i = xs.partition_point(|&p| p <= x) - 1;
            let t = (x - xs[i]) / (xs[i + 1] - xs[i]);
            vs[i] * (1.0 - t) + vs[i + 1] * t
        })
        .collect()
}

/// Least-squares pilot estimates interpolated over every used subcarrier.
/// `rx_used` holds the received values in `layout.used` order.
pub fn estimate_channel(rx_used: &[Complex64], pilots: &[Complex64], layout: &FrameLayout) -> Vec<Complex64> {
    let xs: Vec<f64> = layout.pilots.iter().map(|&j| layout.used[j] as f64).collect();
    let vs: Vec<Complex64> = layout
        .pilots
        .iter()
        .zip(pilots)
        .map(|(&j, &p)| rx_used[j] / p)
        .collect();
    let at: Vec<f64> = layout.used.iter().map(|&k| k as f64).collect();
    interpolate(&xs, &vs, &at)
}

/// `sum |y|^2 / sum |y - s c|^2`; `+inf` for a zero residual.
pub fn estimate_snr(y: &[Complex64], s: &[Complex64], c_hat: &[Complex64]) -> f64 {
    let num: f64 = y.iter().map(|v| v.norm_sqr()).sum();
    let den: f64 = y
        .iter()
        .zip(s)
        .zip(c_hat)
        .map(|((y, s), c)| (y - s * c).norm_sqr())
        .sum();
    if den == 0.0 {
        f64::INFINITY
    } else {
        num / den
    }
}

/// Receiver front end output for one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct FrontEnd {
    pub to: usize,
    pub cfo: f64,
    /// Received values on the used subcarriers.
    pub rx_used: Vec<Complex64>,
    /// Channel estimate on the used subcarriers.
    pub c_hat: Vec<Complex64>,
}

/// Timing, CFO correction, FFT and pilot-based channel estimation.
pub fn front_end(rx: &[Complex64], layout: &FrameLayout, max_offset: usize, floor: f64) -> Result<FrontEnd> {
    let to = estimate_to(rx, layout, max_offset, floor)?;
    let cfo = estimate_cfo(rx, to, layout);
    let n = layout.fft_size as f64;
    let start = to + 2 * layout.half + layout.cp - CP_BACKOFF;
    if start + layout.fft_size > rx.len() {
        return Err(Error::Size(format!(
            "stream of {} samples ends inside the frame at offset {to}",
            rx.len()
        )));
    }
    let window: Vec<Complex64> = (0..layout.fft_size)
        .map(|t| {
            let tau = (start + t - to) as f64;
            rx[start + t] * Complex64::from_polar(1.0, -2.0 * PI * cfo * tau / n)
        })
        .collect();
    let bins = Dft::new(layout.fft_size).forward(&window);
    // undo the linear phase of the early window so estimates refer to the frame start
    let rx_used: Vec<Complex64> = (0..layout.used.len())
        .map(|j| {
            let k = layout.used[j] as f64;
            bins[layout.bin(j)] * Complex64::from_polar(1.0, 2.0 * PI * k * CP_BACKOFF as f64 / n)
        })
        .collect();
    let c_hat = estimate_channel(&rx_used, &pilot_values(layout), layout);
    Ok(FrontEnd {
        to,
        cfo,
        rx_used,
        c_hat,
    })
}

/// Data-subcarrier values of `used`, in `layout.data` order.
pub fn data_values(used: &[Complex64], layout: &FrameLayout) -> Vec<Complex64> {
    layout.data.iter().map(|&j| used[j]).collect()
}

/// Rounds every sample to single precision, the resolution of IQ traces.
pub fn quantize(x: &mut [Complex64]) {
    for v in x {
        *v = Complex64::new(v.re as f32 as f64, v.im as f32 as f64);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{apply_impairments_time, ChannelRealization};
    use crate::config::SystemConfig;
    use crate::modes::partition_qam;
    use crate::rng::{random_bits, trial_stream};

    fn encoder() -> BlockEncoder {
        let cfg = SystemConfig::sum(4, 4, 4);
        BlockEncoder::new(&cfg, Some(&partition_qam(4, 4).unwrap())).unwrap()
    }

    #[test]
    fn layout_counts() {
        let l = FrameLayout::default();
        assert_eq!(l.used.len(), 150);
        assert_eq!(l.data.len(), 125);
        assert_eq!(l.pilots.len(), 25);
        assert_eq!(l.used[0], -75);
        assert_eq!(l.used[149], 75);
        assert_eq!(l.bin(0), 181);
        assert_eq!(l.frame_len(), 544);
        assert!(l.pilots.windows(2).all(|w| w[1] - w[0] == 6));
        assert!(FrameLayout::new(256, 32, 200, 100, 6).is_err());
    }

    #[test]
    fn training_edges_carry_power() {
        let t = training_half(&FrameLayout::default());
        let power = t.iter().map(|v| v.norm_sqr()).sum::<f64>() / t.len() as f64;
        assert!((power - 1.0).abs() < 1e-12);
        assert!(t[0].norm_sqr() >= 1.0 && t[t.len() - 1].norm_sqr() >= 1.0);
    }

    #[test]
    fn frame_structure() {
        let l = FrameLayout::default();
        let enc = encoder();
        let (units, bits) = frame_capacity(&enc, &l);
        assert_eq!((units, bits), (31, 279));
        let f = build_frame(&random_bits(&mut trial_stream(0, 0, 0), bits), &enc, &l).unwrap();
        assert_eq!(f.time.len(), 544);
        assert_eq!(&f.time[..128], &f.time[128..256]);
        assert_eq!(&f.time[256..288], &f.time[512..544]);
        // the unused data subcarrier is empty
        assert_eq!(f.used[l.data[124]], Complex64::default());
        assert!(build_frame(&[0; 10], &enc, &l).is_err());
    }

    #[test]
    fn noiseless_offsets_recovered() {
        let l = FrameLayout::default();
        let enc = encoder();
        let (_, nb) = frame_capacity(&enc, &l);
        let f = build_frame(&random_bits(&mut trial_stream(1, 0, 0), nb), &enc, &l).unwrap();
        let ch = ChannelRealization::identity(256);
        let rx = apply_impairments_time(&f.time, 0.1, 37, &ch, 256, &mut trial_stream(0, 0, 0), 0.0);
        let fe = front_end(&rx, &l, 64, TO_FLOOR).unwrap();
        assert_eq!(fe.to, 37);
        assert!((fe.cfo - 0.1).abs() < 1e-6);
        // flat channel: constant estimate, the phase accumulated before the frame
        let c0 = fe.c_hat[0];
        assert!((c0.norm() - 1.0).abs() < 1e-6);
        assert!(fe.c_hat.iter().all(|c| (c - c0).norm() < 1e-6));
        let rx0 = apply_impairments_time(&f.time, 0.0, 0, &ch, 256, &mut trial_stream(0, 0, 0), 0.0);
        assert_eq!(estimate_to(&rx0, &l, 64, TO_FLOOR).unwrap(), 0);
        assert!(estimate_cfo(&rx0, 0, &l).abs() < 1e-12);
    }

    #[test]
    fn global_phase_invariance() {
        let l = FrameLayout::default();
        let enc = encoder();
        let (_, nb) = frame_capacity(&enc, &l);
        let f = build_frame(&random_bits(&mut trial_stream(2, 0, 0), nb), &enc, &l).unwrap();
        let ch = ChannelRealization::identity(256);
        let rx = apply_impairments_time(&f.time, -0.2, 11, &ch, 256, &mut trial_stream(0, 0, 0), 0.01);
        let rot: Vec<Complex64> = rx.iter().map(|v| v * Complex64::from_polar(1.0, 1.234)).collect();
        let a = estimate_to(&rx, &l, 64, TO_FLOOR).unwrap();
        assert_eq!(a, estimate_to(&rot, &l, 64, TO_FLOOR).unwrap());
        assert!((estimate_cfo(&rx, a, &l) - estimate_cfo(&rot, a, &l)).abs() < 1e-12);
    }

    #[test]
    fn noise_only_fails_sync() {
        let l = FrameLayout::default();
        let mut r = trial_stream(3, 0, 0);
        let rx: Vec<Complex64> = (0..800).map(|_| crate::rng::complex_normal(&mut r, 1.0)).collect();
        assert!(matches!(
            estimate_to(&rx, &l, 64, TO_FLOOR),
            Err(Error::SyncFailure { .. })
        ));
    }

    #[test]
    fn interpolation_exact_for_affine() {
        let l = FrameLayout::default();
        let truth: Vec<Complex64> = l
            .used
            .iter()
            .map(|&k| Complex64::new(0.5 + 0.01 * k as f64, -0.02 * k as f64))
            .collect();
        let pv = pilot_values(&l);
        let rx: Vec<Complex64> = (0..150)
            .map(|j| match l.pilots.iter().position(|&p| p == j) {
                Some(i) => truth[j] * pv[i],
                None => Complex64::default(),
            })
            .collect();
        let est = estimate_channel(&rx, &pv, &l);
        let last_pilot = *l.pilots.last().unwrap();
        for j in 0..=last_pilot {
            assert!((est[j] - truth[j]).norm() < 1e-12, "j = {j}");
        }
        for j in last_pilot..150 {
            assert_eq!(est[j], est[last_pilot]);
        }
    }

    #[test]
    fn snr_estimator_edges() {
        let s = vec![Complex64::new(1.0, 0.0); 4];
        assert_eq!(estimate_snr(&s, &s, &s), f64::INFINITY);
        let y: Vec<Complex64> = s.iter().map(|v| v * 1.1).collect();
        let snr = estimate_snr(&y, &s, &s);
        assert!((snr - 1.21 / 0.01).abs() < 1e-9);
    }

    #[test]
    fn quantize_is_idempotent() {
        let mut x = vec![Complex64::new(0.1, 1.0 / 3.0)];
        quantize(&mut x);
        let y = x.clone();
        quantize(&mut x);
        assert_eq!(x, y);
    }
}
