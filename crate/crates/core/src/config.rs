use std::fmt;
use std::str::FromStr;

use crate::combinatorics::{binomial, bits_per_subblock, floor_log2, validate_params, BitBudget};
use crate::error::{Error, Result};

/// How index bits pick the MAP and SAP.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Selection {
    /// One integer indexes the MAP × SAP product (SuM-OFDM-IM).
    Joint,
    /// Independent bit groups for MAP and SAP (S-SuM-OFDM-IM).
    Separate,
}

/// Transmission scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    Sum,
    SSum,
    /// Plain OFDM with `Q`-ary symbols on every subcarrier.
    Ofdm,
    /// OFDM-IM with `active` of `n` subcarriers on per subblock.
    OfdmIm {
        active: usize,
    },
}

impl Scheme {
    pub fn selection(&self) -> Option<Selection> {
        match self {
            Scheme::Sum => Some(Selection::Joint),
            Scheme::SSum => Some(Selection::Separate),
            _ => None,
        }
    }

    pub fn is_super_mode(&self) -> bool {
        self.selection().is_some()
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scheme::Sum => write!(f, "sum"),
            Scheme::SSum => write!(f, "ssum"),
            Scheme::Ofdm => write!(f, "ofdm"),
            Scheme::OfdmIm { active } => write!(f, "ofdm-im({active})"),
        }
    }
}

impl FromStr for Scheme {
    type Err = Error;

    /// Accepts `sum`, `ssum`, `ofdm`, `ofdm-im` (k = n/2) and `ofdm-im(k)`.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_lowercase().replace('_', "-");
        match t.as_str() {
            "sum" => Ok(Scheme::Sum),
            "ssum" | "s-sum" => Ok(Scheme::SSum),
            "ofdm" => Ok(Scheme::Ofdm),
            "ofdm-im" => Ok(Scheme::OfdmIm { active: 0 }),
            _ => {
                if let Some(k) = t.strip_prefix("ofdm-im(").and_then(|r| r.strip_suffix(')')) {
                    let active = k
                        .parse()
                        .map_err(|_| Error::Parse(format!("bad active count in {s:?}")))?;
                    Ok(Scheme::OfdmIm { active })
                } else {
                    Err(Error::Parse(format!("unknown scheme {s:?}")))
                }
            }
        }
    }
}

/// Scalar system parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    /// FFT size `N`.
    pub subcarriers: usize,
    /// Subblock size `n`.
    pub n: usize,
    /// Cyclic prefix length `L` in samples.
    pub cp_len: usize,
    /// Number of channel taps.
    pub taps: usize,
    /// Number of modes `M`.
    pub modes: usize,
    /// Points per mode `Q` (constellation size for the baselines).
    pub q: usize,
    pub scheme: Scheme,
    /// Noise variance per subcarrier.
    pub n0: f64,
}

impl Default for SystemConfig {
    fn default() -> Self {
        SystemConfig {
            subcarriers: 128,
            n: 4,
            cp_len: 16,
            taps: 10,
            modes: 4,
            q: 4,
            scheme: Scheme::Sum,
            n0: 0.0,
        }
    }
}

impl SystemConfig {
    /// SuM-OFDM-IM with the default OFDM numerology.
    pub fn sum(modes: usize, n: usize, q: usize) -> Self {
        SystemConfig {
            modes,
            n,
            q,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || !self.subcarriers.is_multiple_of(self.n) {
            return Err(Error::Config(format!(
                "N = {} not divisible by n = {}",
                self.subcarriers, self.n
            )));
        }
        if self.taps == 0 || self.taps > self.cp_len {
            return Err(Error::Config(format!(
                "{} channel taps need a cyclic prefix of at least that length (L = {})",
                self.taps, self.cp_len
            )));
        }
        if self.n0.is_nan() || self.n0 < 0.0 {
            return Err(Error::Config(format!("noise variance {} < 0", self.n0)));
        }
        match self.scheme {
            Scheme::Sum | Scheme::SSum => validate_params(self.modes, self.n, self.q),
            Scheme::Ofdm => check_q(self.q),
            Scheme::OfdmIm { active } => {
                check_q(self.q)?;
                if active == 0 || active >= self.n || binomial(self.n, active) < 2 {
                    return Err(Error::Config(format!(
                        "OFDM-IM needs 0 < k < n, got k = {active}, n = {}",
                        self.n
                    )));
                }
                Ok(())
            }
        }
    }

    /// Number of subblocks `g = N / n`.
    pub fn subblocks(&self) -> usize {
        self.subcarriers / self.n
    }

    /// Bits per subblock (per subcarrier for plain OFDM).
    pub fn budget(&self) -> Result<BitBudget> {
        let bq = self.q.trailing_zeros() as usize;
        match self.scheme {
            Scheme::Sum | Scheme::SSum => {
                bits_per_subblock(self.modes, self.n, self.q, self.scheme.selection().unwrap())
            }
            Scheme::Ofdm => Ok(BitBudget { p: bq, p1: 0, p2: bq }),
            Scheme::OfdmIm { active } => {
                let p1 = floor_log2(binomial(self.n, active)) as usize;
                Ok(BitBudget {
                    p: p1 + active * bq,
                    p1,
                    p2: active * bq,
                })
            }
        }
    }

    /// Bits per OFDM block, `m`.
    pub fn bits_per_block(&self) -> Result<usize> {
        let b = self.budget()?;
        Ok(match self.scheme {
            Scheme::Ofdm => self.subcarriers * b.p,
            _ => self.subblocks() * b.p,
        })
    }

    /// Spectral efficiency `m / N` in bit/s/Hz, CP overhead ignored.
    pub fn spectral_efficiency(&self) -> Result<f64> {
        Ok(self.bits_per_block()? as f64 / self.subcarriers as f64)
    }

    /// Average transmitted energy per bit, `(N + L) / m`.
    pub fn energy_per_bit(&self) -> Result<f64> {
        Ok((self.subcarriers + self.cp_len) as f64 / self.bits_per_block()? as f64)
    }

    /// Noise variance for a given `Eb/N0` in dB; `+inf` maps to zero noise.
    pub fn n0_for_ebn0_db(&self, ebn0_db: f64) -> Result<f64> {
        if ebn0_db == f64::INFINITY {
            return Ok(0.0);
        }
        Ok(self.energy_per_bit()? / 10f64.powf(ebn0_db / 10.0))
    }
}

fn check_q(q: usize) -> Result<()> {
    if q < 2 || !q.is_power_of_two() {
        return Err(Error::Config(format!("Q = {q} must be a power of two >= 2")));
    }
    Ok(())
}
