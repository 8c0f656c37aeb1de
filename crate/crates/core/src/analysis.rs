//! Pairwise error probabilities, the BER union bound and the rank spectrum.

use num_complex::Complex64;
use rayon::prelude::*;
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::txrx::SubblockCodec;

/// Default codebook-size limit for exhaustive pair enumeration.
pub const BOUND_BUDGET: usize = 1 << 13;

/// Numerical tolerance for a nonzero diagonal entry of `A`.
pub const RANK_TOL: f64 = 1e-9;

/// Gaussian tail probability.
pub fn q_function(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

/// Two-exponential approximation of [`q_function`].
pub fn q_approx(x: f64) -> f64 {
    (-x * x / 2.0).exp() / 12.0 + (-2.0 * x * x / 3.0).exp() / 4.0
}

/// Error event `S -> S_hat` between two subblock codewords.
#[derive(Debug, Clone, PartialEq)]
pub struct PairwiseEvent {
    /// Diagonal of `S - S_hat`.
    pub diff: Vec<Complex64>,
    /// Diagonal of `A = (S - S_hat)^H (S - S_hat)`, i.e. its eigenvalues.
    pub a: Vec<f64>,
    /// Bit errors between the two labels.
    pub e: u32,
}

impl PairwiseEvent {
    pub fn new(s: &[Complex64], s_hat: &[Complex64], e: u32) -> Self {
        let diff: Vec<Complex64> = s.iter().zip(s_hat).map(|(a, b)| a - b).collect();
        let a = diff.iter().map(|d| d.norm_sqr()).collect();
        PairwiseEvent { diff, a, e }
    }

    pub fn rank(&self) -> usize {
        self.a.iter().filter(|&&v| v > RANK_TOL).count()
    }

    /// Product of the nonzero eigenvalues of `A`.
    pub fn eigen_product(&self) -> f64 {
        self.a.iter().filter(|&&v| v > RANK_TOL).product()
    }
}

/// Pairwise error probability for a known channel, `Q(sqrt(rho/2 ||(S - S_hat) c||^2))`.
pub fn cpep(ev: &PairwiseEvent, c: &[Complex64], rho: f64) -> f64 {
    let d2: f64 = ev.diff.iter().zip(c).map(|(d, h)| (d * h).norm_sqr()).sum();
    q_function((rho / 2.0 * d2).sqrt())
}

/// Pairwise error probability averaged over i.i.d. CN(0,1) subcarrier gains.
pub fn upep(ev: &PairwiseEvent, n0: f64) -> f64 {
    upep_diag(&ev.a, n0)
}

fn upep_diag(a: &[f64], n0: f64) -> f64 {
    let (r1, r2) = (1.0 / (4.0 * n0), 1.0 / (3.0 * n0));
    let d1: f64 = a.iter().map(|v| 1.0 + r1 * v).product();
    let d2: f64 = a.iter().map(|v| 1.0 + r2 * v).product();
    (1.0 / 12.0) / d1 + 0.25 / d2
}

/// High-SNR form of [`upep`]: the identity terms of the determinants are
/// dropped, leaving `(rho1^-r / 12 + rho2^-r / 4) / prod(lambda)`.
pub fn upep_high_snr(ev: &PairwiseEvent, n0: f64) -> f64 {
    high_snr_term(ev.rank(), ev.eigen_product(), n0)
}

fn high_snr_term(r: usize, prod: f64, n0: f64) -> f64 {
    let (r1, r2) = (1.0 / (4.0 * n0), 1.0 / (3.0 * n0));
    (r1.powi(-(r as i32)) / 12.0 + r2.powi(-(r as i32)) / 4.0) / prod
}

/// Union bound and its high-SNR form at one noise level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundPoint {
    pub n0: f64,
    pub union: f64,
    pub high_snr: f64,
}

fn check_budget(codec: &SubblockCodec, budget: usize) -> Result<()> {
    if codec.codebook_len() > budget {
        return Err(Error::Size(format!(
            "2^{} codewords exceed the enumeration budget {budget}; raise the budget or subsample codewords",
            codec.budget().p
        )));
    }
    Ok(())
}

/// BER union bound over every ordered pair of distinct codewords, at each
/// noise level in `n0s`.
///
/// Work is split by outer codeword; partial sums are added in codeword order,
/// so the result does not depend on the thread count.
pub fn union_bound_curve(codec: &SubblockCodec, n0s: &[f64], budget: usize) -> Result<Vec<BoundPoint>> {
    check_budget(codec, budget)?;
    if n0s.iter().any(|&v| v.is_nan() || v <= 0.0) {
        return Err(Error::Domain("union bound needs N0 > 0".into()));
    }
    let book = codec.codebook();
    let k = n0s.len();
    let partial: Vec<Vec<f64>> = (0..book.len())
        .into_par_iter()
        .map(|i| {
            let mut acc = vec![0.0; 2 * k];
            for j in 0..book.len() {
                if i == j {
                    continue;
                }
                let ev = PairwiseEvent::new(&book[i], &book[j], ((i ^ j) as u64).count_ones());
                let (r, prod) = (ev.rank(), ev.eigen_product());
                for (t, &n0) in n0s.iter().enumerate() {
                    acc[t] += upep(&ev, n0) * ev.e as f64;
                    acc[k + t] += high_snr_term(r, prod, n0) * ev.e as f64;
                }
            }
            acc
        })
        .collect();
    let norm = (codec.budget().p * book.len()) as f64;
    Ok(n0s
        .iter()
        .enumerate()
        .map(|(t, &n0)| {
            let (mut u, mut h) = (0.0, 0.0);
            for p in &partial {
                u += p[t];
                h += p[k + t];
            }
            BoundPoint {
                n0,
                union: u / norm,
                high_snr: h / norm,
            }
        })
        .collect())
}

pub fn union_bound_ber(codec: &SubblockCodec, n0: f64, budget: usize) -> Result<BoundPoint> {
    Ok(union_bound_curve(codec, &[n0], budget)?[0])
}

/// Distribution of `rank(A)` over ordered pairs of distinct codewords.
#[derive(Debug, Clone, PartialEq)]
pub struct RankSpectrum {
    /// `counts[r]` pairs with rank `r`, for `r = 0..=n`.
    pub counts: Vec<u64>,
}

impl RankSpectrum {
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn percentage(&self, r: usize) -> f64 {
        100.0 * self.counts.get(r).copied().unwrap_or(0) as f64 / self.total() as f64
    }

    pub fn min_rank(&self) -> Option<usize> {
        self.counts.iter().position(|&c| c > 0)
    }

    /// `r,percentage` rows for `r >= 1`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("r,percentage\n");
        for r in 1..self.counts.len() {
            s.push_str(&format!("{r},{:.4}\n", self.percentage(r)));
        }
        s
    }
}

pub fn rank_spectrum(codec: &SubblockCodec, budget: usize) -> Result<RankSpectrum> {
    check_budget(codec, budget)?;
    let book = codec.codebook();
    let n = codec.n();
    let partial: Vec<Vec<u64>> = (0..book.len())
        .into_par_iter()
        .map(|i| {
            let mut c = vec![0u64; n + 1];
            for j in (0..book.len()).filter(|&j| j != i) {
                let r = book[i]
                    .iter()
                    .zip(&book[j])
                    .filter(|(a, b)| (*a - *b).norm_sqr() > RANK_TOL)
                    .count();
                c[r] += 1;
            }
            c
        })
        .collect();
    let mut counts = vec![0u64; n + 1];
    for p in partial {
        counts.iter_mut().zip(p).for_each(|(a, b)| *a += b);
    }
    Ok(RankSpectrum { counts })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::SystemConfig;
    use crate::modes::partition_qam;

    fn codec(m: usize, q: usize) -> SubblockCodec {
        SubblockCodec::new(&SystemConfig::sum(m, 4, q), &partition_qam(m, q).unwrap()).unwrap()
    }

    #[test]
    fn q_function_values() {
        assert!((q_function(0.0) - 0.5).abs() < 1e-15);
        let rel = |a: f64, b: f64| ((a - b) / b).abs();
        assert!(rel(q_function(1.0), 0.158_655_253_931_457) < 1e-9);
        assert!(rel(q_function(3.0), 1.349_898_031_630_09e-3) < 1e-9);
        assert!((q_approx(0.0) - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn q_approximation_accuracy() {
        // overestimates the tail from x = 0.75 on, within 30 % up to x = 6
        let mut x = 0.5;
        while x <= 6.0 {
            let rel = (q_approx(x) - q_function(x)) / q_function(x);
            assert!(rel.abs() < 0.30, "x = {x}: {rel}");
            if x >= 0.75 {
                assert!(rel > 0.0, "x = {x}");
            }
            x += 0.01;
        }
    }

    #[test]
    fn cpep_edge_cases() {
        let s = vec![Complex64::new(1.0, 0.0); 4];
        let same = PairwiseEvent::new(&s, &s, 0);
        assert_eq!(cpep(&same, &s, 10.0), 0.5);
        assert_eq!(same.rank(), 0);
        let mut t = s.clone();
        t[0] = Complex64::new(0.0, 0.0);
        let ev = PairwiseEvent::new(&s, &t, 1);
        // ||(S - S_hat) c||^2 = 1 = 2/rho at rho = 2
        assert!((cpep(&ev, &s, 2.0) - q_function(1.0)).abs() < 1e-15);
    }

    #[test]
    fn upep_hand_values() {
        let zero = PairwiseEvent {
            diff: vec![Complex64::default(); 4],
            a: vec![0.0; 4],
            e: 1,
        };
        assert!((upep(&zero, 0.1) - 1.0 / 3.0).abs() < 1e-15);
        let ev = PairwiseEvent {
            diff: vec![Complex64::default(); 4],
            a: vec![0.0, 0.0, 1.6, 1.6],
            e: 1,
        };
        let expect = (1.0 / 12.0) / 25.0 + 0.25 / (1.0f64 + 16.0 / 3.0).powi(2);
        assert!((upep(&ev, 0.1) - expect).abs() < 1e-15);
        let n0 = 1e-6;
        let ratio = upep(&ev, n0) / upep_high_snr(&ev, n0);
        assert!(ratio <= 1.0 && ratio > 0.9999);
    }

    #[test]
    fn worked_example_event_has_rank_two() {
        let c = codec(4, 4);
        let ms = c.modes();
        let (c11, c31, c32) = (ms.point(0, 0), ms.point(2, 0), ms.point(2, 1));
        let ev = PairwiseEvent::new(&[c11, c11, c31, c31], &[c11, c11, c32, c32], 1);
        assert_eq!(ev.rank(), 2);
        assert!((ev.a[2] - 1.6).abs() < 1e-12);
    }

    #[test]
    fn spectrum_n4_qam16() {
        let s = rank_spectrum(&codec(4, 4), BOUND_BUDGET).unwrap();
        assert_eq!(s.counts, vec![0, 0, 12544, 39424, 209664]);
        assert_eq!(s.min_rank(), Some(2));
        assert!((s.percentage(2) - 4.79).abs() < 0.005);
    }

    #[test]
    fn bound_decreases_and_scales_with_e() {
        let c = codec(4, 4);
        let pts = union_bound_curve(&c, &[0.1, 0.01, 0.001], BOUND_BUDGET).unwrap();
        assert!(pts[0].union > pts[1].union && pts[1].union > pts[2].union);
        for p in &pts {
            assert!(p.high_snr >= p.union);
        }
        assert!(union_bound_ber(&c, 0.0, BOUND_BUDGET).is_err());
        assert!(matches!(union_bound_ber(&c, 0.1, 256), Err(Error::Size(_))));
    }
}
