use std::fmt::Write as _;

use super::{comment_header, fmt_num, ExperimentSpec};
use crate::analysis::{union_bound_curve, BoundPoint, BOUND_BUDGET};
use crate::error::{Error, Result};
use crate::txrx::SubblockCodec;

#[derive(Debug, Clone, PartialEq)]
pub struct BoundCurve {
    pub header: Vec<(&'static str, String)>,
    /// `(snr_db, bound)`; points with no noise are skipped.
    pub points: Vec<(f64, BoundPoint)>,
}

impl BoundCurve {
    pub fn to_csv(&self) -> String {
        self.to_csv_with_overlay(&[])
    }

    /// Adds a `simulated_ber` column from `(snr_db, ber)` pairs where the SNR matches.
    pub fn to_csv_with_overlay(&self, ber: &[(f64, f64)]) -> String {
        let mut s = comment_header(&self.header);
        s.push_str("snr_db,union_bound,high_snr_bound");
        if !ber.is_empty() {
            s.push_str(",simulated_ber");
        }
        s.push('\n');
        for (snr, p) in &self.points {
            let _ = write!(s, "{},{:e},{:e}", fmt_num(*snr), p.union, p.high_snr);
            if !ber.is_empty() {
                match ber.iter().find(|(x, _)| x == snr) {
                    Some((_, b)) => {
                        let _ = write!(s, ",{b:e}");
                    }
                    None => s.push(','),
                }
            }
            s.push('\n');
        }
        s
    }
}

/// Union bound of the experiment's super-mode configuration on its SNR grid.
pub fn run_bound(spec: &ExperimentSpec) -> Result<BoundCurve> {
    spec.validate()?;
    let cfg = spec.system();
    let ms = spec
        .mode_set()?
        .ok_or_else(|| Error::Config(format!("no union bound for scheme {}", spec.scheme)))?;
    let codec = SubblockCodec::new(&cfg, &ms)?;
    let snrs: Vec<f64> = spec.snr_db.iter().copied().filter(|v| v.is_finite()).collect();
    let n0s = snrs
        .iter()
        .map(|&s| cfg.n0_for_ebn0_db(s))
        .collect::<Result<Vec<_>>>()?;
    let budget = if spec.long_run { 1 << 16 } else { BOUND_BUDGET };
    let pts = spec.with_pool(|| union_bound_curve(&codec, &n0s, budget))??;
    Ok(BoundCurve {
        header: spec.to_kv(),
        points: snrs.into_iter().zip(pts).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monotone_bound_with_overlay() {
        let spec = ExperimentSpec {
            snr_db: vec![10.0, 20.0, 30.0, f64::INFINITY],
            ..Default::default()
        };
        let b = run_bound(&spec).unwrap();
        assert_eq!(b.points.len(), 3);
        assert!(b.points.windows(2).all(|w| w[1].1.union < w[0].1.union));
        let csv = b.to_csv_with_overlay(&[(20.0, 1e-3)]);
        assert!(csv.contains("simulated_ber"));
        assert!(csv.lines().any(|l| l.starts_with("20,") && l.ends_with(",1e-3")));
        let ofdm = ExperimentSpec::parse("scheme=ofdm").unwrap();
        assert!(run_bound(&ofdm).is_err());
    }
}
