//! Multipath channel realisations, AWGN, and time-domain impairments.

use std::f64::consts::PI;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;

use crate::config::SystemConfig;
use crate::error::{Error, Result};
use crate::rng::complex_normal;

/// Tap statistics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Profile {
    Rayleigh,
    /// Rician fading with the given K-factor in dB and a uniform power delay profile.
    Rician {
        k_db: f64,
    },
}

impl FromStr for Profile {
    type Err = Error;

    /// `rayleigh`, `rician` (K = 10 dB) or `rician(<K dB>)`.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_lowercase();
        match t.as_str() {
            "rayleigh" => Ok(Profile::Rayleigh),
            "rician" => Ok(Profile::Rician { k_db: 10.0 }),
            _ => t
                .strip_prefix("rician(")
                .and_then(|r| r.strip_suffix(')'))
                .and_then(|k| k.trim().parse().ok())
                .map(|k_db| Profile::Rician { k_db })
                .ok_or_else(|| Error::Parse(format!("unknown channel profile {s:?}"))),
        }
    }
}

impl std::fmt::Display for Profile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Profile::Rayleigh => write!(f, "rayleigh"),
            Profile::Rician { k_db } => write!(f, "rician({k_db})"),
        }
    }
}

/// One block-fading channel draw.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    /// Impulse response `c_T`.
    pub taps: Vec<Complex64>,
    /// `N`-point DFT of the zero-padded taps, `c_F`.
    pub freq: Vec<Complex64>,
}

impl ChannelRealization {
    pub fn from_taps(taps: Vec<Complex64>, size: usize) -> Self {
        let freq = (0..size)
            .map(|b| {
                taps.iter()
                    .enumerate()
                    .map(|(t, &c)| c * Complex64::from_polar(1.0, -2.0 * PI * (b * t % size) as f64 / size as f64))
                    .sum()
            })
            .collect();
        ChannelRealization { taps, freq }
    }

    /// Single unit tap.
    pub fn identity(size: usize) -> Self {
        Self::from_taps(vec![Complex64::new(1.0, 0.0)], size)
    }
}

/// Per-tap `(LOS power, scatter power)` for a uniform delay profile.
pub fn rician_powers(k_db: f64, taps: usize) -> (f64, f64) {
    let k = 10f64.powf(k_db / 10.0);
    let per_tap = 1.0 / taps as f64;
    (k / (k + 1.0) * per_tap, per_tap / (k + 1.0))
}

/// Draws taps with unit total average power.
pub fn draw_taps<R: Rng + ?Sized>(rng: &mut R, taps: usize, profile: Profile) -> Vec<Complex64> {
    let per_tap = 1.0 / taps as f64;
    match profile {
        Profile::Rayleigh => (0..taps).map(|_| complex_normal(rng, per_tap)).collect(),
        Profile::Rician { k_db } => {
            let (los_power, scatter) = rician_powers(k_db, taps);
            let los = los_power.sqrt();
            (0..taps)
                .map(|_| {
                    let phase = rng.random::<f64>() * 2.0 * PI;
                    Complex64::from_polar(los, phase) + complex_normal(rng, scatter)
                })
                .collect()
        }
    }
}

pub fn draw_channel<R: Rng + ?Sized>(rng: &mut R, cfg: &SystemConfig, profile: Profile) -> Result<ChannelRealization> {
    if cfg.taps == 0 || cfg.taps > cfg.cp_len {
        return Err(Error::Config(format!(
            "{} taps exceed the cyclic prefix length {}",
            cfg.taps, cfg.cp_len
        )));
    }
    Ok(ChannelRealization::from_taps(
        draw_taps(rng, cfg.taps, profile),
        cfg.subcarriers,
    ))
}

/// Adds CN(0, `n0`) noise in place. Does not touch the stream when `n0 = 0`.
pub fn add_awgn<R: Rng + ?Sized>(x: &mut [Complex64], rng: &mut R, n0: f64) {
    if n0 > 0.0 {
        x.iter_mut().for_each(|v| *v += complex_normal(rng, n0));
    }
}

/// `y(b) = s(b) c(b) + w(b)`.
pub fn apply_channel_freq<R: Rng + ?Sized>(
    s: &[Complex64],
    ch: &ChannelRealization,
    rng: &mut R,
    n0: f64,
) -> Result<Vec<Complex64>> {
    if s.len() != ch.freq.len() {
        return Err(Error::Size(format!(
            "block has {} values, channel has {}",
            s.len(),
            ch.freq.len()
        )));
    }
    let mut y: Vec<Complex64> = s.iter().zip(&ch.freq).map(|(a, b)| a * b).collect();
    add_awgn(&mut y, rng, n0);
    Ok(y)
}

/// Passes a CP-extended sample stream through the channel with timing and
/// frequency offsets.
///
/// The output is `to_samples` leading zeros followed by the full linear
/// convolution with the taps; sample `t` of that stream is rotated by
/// `exp(j 2 pi cfo t / fft_size)` and noise is added to every sample.
pub fn apply_impairments_time<R: Rng + ?Sized>(
    x: &[Complex64],
    cfo: f64,
    to_samples: usize,
    ch: &ChannelRealization,
    fft_size: usize,
    rng: &mut R,
    n0: f64,
) -> Vec<Complex64> {
    let taps = ch.taps.len().max(1);
    let mut y = vec![Complex64::default(); to_samples + x.len() + taps - 1];
    for (i, &xi) in x.iter().enumerate() {
        for (t, &c) in ch.taps.iter().enumerate() {
            y[to_samples + i + t] += xi * c;
        }
    }
    if cfo != 0.0 {
        let step = 2.0 * PI * cfo / fft_size as f64;
        for (t, v) in y.iter_mut().enumerate() {
            *v *= Complex64::from_polar(1.0, step * t as f64);
        }
    }
    add_awgn(&mut y, rng, n0);
    y
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::trial_stream;

    #[test]
    fn single_tap_is_flat() {
        let cfg = SystemConfig {
            taps: 1,
            ..Default::default()
        };
        let ch = draw_channel(&mut trial_stream(0, 0, 0), &cfg, Profile::Rayleigh).unwrap();
        let m = ch.freq[0].norm();
        assert!(ch.freq.iter().all(|c| (c.norm() - m).abs() < 1e-12));
    }

    #[test]
    fn too_many_taps_rejected() {
        let cfg = SystemConfig {
            taps: 17,
            ..Default::default()
        };
        assert!(matches!(
            draw_channel(&mut trial_stream(0, 0, 0), &cfg, Profile::Rayleigh),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn frequency_response_is_dft_of_taps() {
        let taps = vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.5)];
        let ch = ChannelRealization::from_taps(taps, 4);
        // beta = 1: 1 + 0.5j * e^{-j pi/2} = 1.5
        assert!((ch.freq[1] - Complex64::new(1.5, 0.0)).norm() < 1e-12);
        assert!((ch.freq[3] - Complex64::new(0.5, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn noiseless_identity_channel_is_transparent() {
        let ch = ChannelRealization::identity(8);
        let s: Vec<Complex64> = (0..8).map(|i| Complex64::new(i as f64, -1.0)).collect();
        let mut rng = trial_stream(0, 0, 0);
        assert_eq!(apply_channel_freq(&s, &ch, &mut rng, 0.0).unwrap(), s);
        let y = apply_impairments_time(&s, 0.0, 0, &ch, 8, &mut rng, 0.0);
        assert_eq!(y, s);
        assert!(apply_channel_freq(&s[1..], &ch, &mut rng, 0.0).is_err());
    }

    #[test]
    fn pure_noise_variance() {
        let ch = ChannelRealization::identity(100_000);
        let s = vec![Complex64::default(); 100_000];
        let y = apply_channel_freq(&s, &ch, &mut trial_stream(2, 0, 0), 0.2).unwrap();
        let v = y.iter().map(|v| v.norm_sqr()).sum::<f64>() / y.len() as f64;
        assert!((v - 0.2).abs() < 0.005);
    }

    #[test]
    fn cfo_phase_advance_and_energy() {
        let ch = ChannelRealization::identity(64);
        let x: Vec<Complex64> = (0..64)
            .map(|i| Complex64::from_polar(1.0 + i as f64 * 0.01, i as f64))
            .collect();
        let y = apply_impairments_time(&x, 0.1, 0, &ch, 64, &mut trial_stream(0, 0, 0), 0.0);
        let step = 2.0 * PI * 0.1 / 64.0;
        for t in 0..64 {
            let ph = (y[t] / x[t]).arg();
            let expect = Complex64::from_polar(1.0, step * t as f64).arg();
            assert!((ph - expect).abs() < 1e-12);
        }
        let ex: f64 = x.iter().map(|v| v.norm_sqr()).sum();
        let ey: f64 = y.iter().map(|v| v.norm_sqr()).sum();
        assert!((ex - ey).abs() < 1e-9);
    }

    #[test]
    fn timing_offset_delays() {
        let ch = ChannelRealization::identity(8);
        let x = vec![Complex64::new(1.0, 0.0); 4];
        let y = apply_impairments_time(&x, 0.0, 3, &ch, 8, &mut trial_stream(0, 0, 0), 0.0);
        assert_eq!(y.len(), 7);
        assert!(y[..3].iter().all(|v| v.norm() == 0.0));
        assert_eq!(&y[3..], &x[..]);
    }

    #[test]
    fn rayleigh_unit_average_gain() {
        let cfg = SystemConfig::default();
        let mut acc = 0.0;
        let draws = 20_000;
        for t in 0..draws {
            let ch = draw_channel(&mut trial_stream(5, 0, t), &cfg, Profile::Rayleigh).unwrap();
            acc += ch.freq.iter().map(|c| c.norm_sqr()).sum::<f64>() / 128.0;
        }
        assert!((acc / draws as f64 - 1.0).abs() < 0.01);
    }

    #[test]
    fn rician_los_to_scatter_ratio() {
        let (los, scatter) = rician_powers(10.0, 3);
        assert!((los / scatter - 10.0).abs() < 1e-9);
        assert!((3.0 * (los + scatter) - 1.0).abs() < 1e-12);
        let mut rng = trial_stream(3, 0, 0);
        let draws = 50_000;
        let mut total = 0.0;
        for _ in 0..draws {
            total += draw_taps(&mut rng, 3, Profile::Rician { k_db: 10.0 })
                .iter()
                .map(|c| c.norm_sqr())
                .sum::<f64>();
        }
        assert!((total / draws as f64 - 1.0).abs() < 0.01);
        assert_eq!("rician(10)".parse::<Profile>().unwrap(), Profile::Rician { k_db: 10.0 });
        assert!("nakagami".parse::<Profile>().is_err());
    }
}
