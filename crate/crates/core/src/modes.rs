//! Distinguishable constellation modes.
//!
//! Modes are obtained by partitioning an `MQ`-point QAM grid into `M` cosets of
//! `Q` points. For square grids with `sqrt(M)` an integer, mode `m` holds the
//! points whose column and row indices are congruent to `(m mod sqrt(M),
//! m div sqrt(M))` modulo `sqrt(M)`; every mode is then a scaled copy of a
//! `Q`-QAM grid and the intra-mode distance is `sqrt(M)` times the grid step.
//! The `(M, Q) = (8, 2)` case uses an 8×2 rectangular grid with a fixed pairing
//! table.
//!
//! Within a mode the symbol index `q` is formed from per-axis Gray labels,
//! `q = gray(col) | gray(row) << (log2 Q / 2)`, so neighbouring points in a mode
//! differ in one label bit.

use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::txrx::SubblockCodec;

/// Grid shape of the parent constellation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridShape {
    Square,
    Rectangular,
}

/// `M` constellations of `Q` points each with unit average power overall.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeSet {
    modes: Vec<Vec<Complex64>>,
}

impl ModeSet {
    /// Wraps explicit points. Points must be distinct and have unit mean power.
    pub fn new(modes: Vec<Vec<Complex64>>) -> Result<Self> {
        let q = modes.first().map(Vec::len).unwrap_or(0);
        if q == 0 || modes.iter().any(|m| m.len() != q) {
            return Err(Error::Config("modes must be non-empty and equal-sized".into()));
        }
        let all: Vec<Complex64> = modes.iter().flatten().copied().collect();
        let power = all.iter().map(|p| p.norm_sqr()).sum::<f64>() / all.len() as f64;
        if (power - 1.0).abs() > 1e-9 {
            return Err(Error::Config(format!("mean power {power} is not unity")));
        }
        for i in 0..all.len() {
            for j in i + 1..all.len() {
                if (all[i] - all[j]).norm() < 1e-12 {
                    return Err(Error::Config(format!("duplicate point {}", all[i])));
                }
            }
        }
        Ok(ModeSet { modes })
    }

    /// Scales `modes` to unit mean power, then validates.
    pub fn normalized(modes: Vec<Vec<Complex64>>) -> Result<Self> {
        let count = modes.iter().map(Vec::len).sum::<usize>().max(1);
        let power = modes.iter().flatten().map(|p| p.norm_sqr()).sum::<f64>() / count as f64;
        if power <= 0.0 {
            return Err(Error::Config("all-zero constellation".into()));
        }
        let scale = power.sqrt().recip();
        ModeSet::new(
            modes
                .into_iter()
                .map(|m| m.into_iter().map(|p| p * scale).collect())
                .collect(),
        )
    }

    pub fn num_modes(&self) -> usize {
        self.modes.len()
    }

    /// Points per mode.
    pub fn size(&self) -> usize {
        self.modes[0].len()
    }

    /// Point `q` (0-based) of mode `mode` (0-based).
    pub fn point(&self, mode: usize, q: usize) -> Complex64 {
        self.modes[mode][q]
    }

    pub fn mode(&self, mode: usize) -> &[Complex64] {
        &self.modes[mode]
    }

    pub fn modes(&self) -> &[Vec<Complex64>] {
        &self.modes
    }

    pub fn mean_power(&self) -> f64 {
        let n = (self.num_modes() * self.size()) as f64;
        self.modes.iter().flatten().map(|p| p.norm_sqr()).sum::<f64>() / n
    }

    /// Plain-text table, one `mode symbol re im` row per point (1-based indices).
    pub fn to_table(&self) -> String {
        let mut s = String::from("# mode_index symbol_index re im\n");
        for (m, pts) in self.modes.iter().enumerate() {
            for (q, p) in pts.iter().enumerate() {
                let _ = writeln!(s, "{} {} {:?} {:?}", m + 1, q + 1, p.re, p.im);
            }
        }
        s
    }

    /// Parses the format written by [`ModeSet::to_table`].
    pub fn from_table(text: &str) -> Result<Self> {
        let mut rows = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 4 {
                return Err(Error::Parse(format!("line {}: expected 4 fields", lineno + 1)));
            }
            let bad = |what: &str| Error::Parse(format!("line {}: bad {what}", lineno + 1));
            let m: usize = f[0].parse().map_err(|_| bad("mode index"))?;
            let q: usize = f[1].parse().map_err(|_| bad("symbol index"))?;
            let re: f64 = f[2].parse().map_err(|_| bad("real part"))?;
            let im: f64 = f[3].parse().map_err(|_| bad("imaginary part"))?;
            if m == 0 || q == 0 {
                return Err(bad("index (tables are 1-based)"));
            }
            rows.push((m - 1, q - 1, Complex64::new(re, im)));
        }
        let num_modes = rows.iter().map(|r| r.0 + 1).max().unwrap_or(0);
        let size = rows.iter().map(|r| r.1 + 1).max().unwrap_or(0);
        if rows.len() != num_modes * size {
            return Err(Error::Parse(format!(
                "{} rows do not fill a {num_modes}x{size} table",
                rows.len()
            )));
        }
        let mut modes = vec![vec![None; size]; num_modes];
        for (m, q, p) in rows {
            if modes[m][q].replace(p).is_some() {
                return Err(Error::Parse(format!("duplicate entry ({}, {})", m + 1, q + 1)));
            }
        }
        ModeSet::new(
            modes
                .into_iter()
                .map(|m| m.into_iter().map(Option::unwrap).collect())
                .collect(),
        )
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_table())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        ModeSet::from_table(&std::fs::read_to_string(path)?)
    }
}

fn gray(x: usize) -> usize {
    x ^ (x >> 1)
}

fn exact_sqrt(x: usize) -> Option<usize> {
    let r = (x as f64).sqrt().round() as usize;
    (r * r == x).then_some(r)
}

/// The `(M, Q)` pairs [`partition_qam`] accepts, described for error messages.
pub const SUPPORTED: &str = "square MQ-QAM with M and Q perfect squares (e.g. (4,4), (4,16), (16,4), (16,16)) or (8,2)";

/// Partitions an `MQ`-QAM constellation into `M` modes.
pub fn partition_qam(modes: usize, q: usize) -> Result<ModeSet> {
    if modes == 8 && q == 2 {
        return Ok(rectangular_8x2());
    }
    let unsupported = || Error::Config(format!("unsupported (M, Q) = ({modes}, {q}); supported: {SUPPORTED}"));
    if modes < 2 || q < 2 || !q.is_power_of_two() || !modes.is_power_of_two() {
        return Err(unsupported());
    }
    let side = exact_sqrt(modes * q).ok_or_else(unsupported)?;
    let step = exact_sqrt(modes).ok_or_else(unsupported)?;
    let sub = side / step;
    let bits = sub.trailing_zeros() as usize;
    let level = |i: usize| (2 * i) as f64 - (side - 1) as f64;
    let mut out = vec![vec![Complex64::default(); q]; modes];
    for ix in 0..side {
        for iy in 0..side {
            let mode = ix % step + step * (iy % step);
            let sym = gray(ix / step) | gray(iy / step) << bits;
            out[mode][sym] = Complex64::new(level(ix), level(iy));
        }
    }
    ModeSet::normalized(out)
}

/// 16 points on an 8×2 grid, paired so that every mode spans at least
/// `sqrt(10)` grid steps.
fn rectangular_8x2() -> ModeSet {
    // (column, row) pairs; columns 0..8, rows 0..2
    const PAIRS: [[(usize, usize); 2]; 8] = [
        [(0, 0), (3, 1)],
        [(0, 1), (3, 0)],
        [(4, 0), (7, 1)],
        [(4, 1), (7, 0)],
        [(1, 0), (5, 0)],
        [(1, 1), (5, 1)],
        [(2, 0), (6, 0)],
        [(2, 1), (6, 1)],
    ];
    let pt = |(c, r): (usize, usize)| Complex64::new(2.0 * c as f64 - 7.0, 2.0 * r as f64 - 1.0);
    let modes = PAIRS.iter().map(|p| vec![pt(p[0]), pt(p[1])]).collect();
    ModeSet::normalized(modes).expect("fixed table is valid")
}

/// Minimum inter-mode and intra-mode distances by exhaustive scan.
/// Either is `+inf` when no qualifying pair exists.
pub fn measure_distances(ms: &ModeSet) -> (f64, f64) {
    let mut inter = f64::INFINITY;
    let mut intra = f64::INFINITY;
    for (m1, a) in ms.modes().iter().enumerate() {
        for (i, &x) in a.iter().enumerate() {
            for (m2, b) in ms.modes().iter().enumerate().skip(m1) {
                let start = if m1 == m2 { i + 1 } else { 0 };
                for &y in &b[start..] {
                    let d = (x - y).norm();
                    if m1 == m2 {
                        intra = intra.min(d);
                    } else {
                        inter = inter.min(d);
                    }
                }
            }
        }
    }
    (inter, intra)
}

/// Closed-form maximum inter-mode distance for a unit-power `MQ`-QAM grid.
pub fn d_inter_closed(modes: usize, q: usize, shape: GridShape) -> f64 {
    let mq = (modes * q) as f64;
    match shape {
        GridShape::Rectangular => 2.0 * (6.0 / (5.0 * mq - 4.0)).sqrt(),
        GridShape::Square => (6.0 / (mq - 1.0)).sqrt(),
    }
}

/// Closed-form intra/inter distance ratio; two-point modes come from
/// rectangular grids.
pub fn intra_inter_ratio_closed(modes: usize, q: usize) -> f64 {
    if q == 2 {
        (5.0 * modes as f64).sqrt() / 2.0
    } else {
        (modes as f64).sqrt()
    }
}

/// Large-`MQ` approximation of the intra-mode distance. Diagnostic only.
pub fn d_intra_asymptotic(q: usize, shape: GridShape) -> f64 {
    match shape {
        GridShape::Rectangular if q != 2 => 2.0 * (6.0 / (5.0 * q as f64)).sqrt(),
        _ => (6.0 / q as f64).sqrt(),
    }
}

/// Default cap on subblock realisations for [`subblock_min_distances`].
pub const SUBBLOCK_ENUMERATION_BUDGET: usize = 1 << 14;

/// Minimum squared Frobenius distances between subblock matrices whose
/// difference has rank 1 (`eps1`) and rank 2 (`eps2`). `+inf` if no such pair.
pub fn subblock_min_distances(codec: &SubblockCodec, budget: usize) -> Result<(f64, f64)> {
    let count = 1usize
        .checked_shl(codec.budget().p as u32)
        .filter(|&c| c <= budget)
        .ok_or_else(|| {
            Error::Size(format!(
                "2^{} subblock realisations exceed the budget of {budget}",
                codec.budget().p
            ))
        })?;
    let book = codec.codebook();
    debug_assert_eq!(book.len(), count);
    let mut eps = [f64::INFINITY; 2];
    for (i, a) in book.iter().enumerate() {
        for b in &book[i + 1..] {
            let mut rank = 0;
            let mut dist = 0.0;
            for (x, y) in a.iter().zip(b) {
                let d = (x - y).norm_sqr();
                if d > 1e-18 {
                    rank += 1;
                    dist += d;
                }
            }
            if rank == 1 || rank == 2 {
                eps[rank - 1] = eps[rank - 1].min(dist);
            }
        }
    }
    Ok((eps[0], eps[1]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::SystemConfig;

    #[test]
    fn sixteen_qam_four_modes() {
        let ms = partition_qam(4, 4).unwrap();
        assert_eq!((ms.num_modes(), ms.size()), (4, 4));
        let (inter, intra) = measure_distances(&ms);
        assert!((inter - 0.6325).abs() < 1e-4);
        assert!((intra - 1.2649).abs() < 1e-4);
        assert!((inter - d_inter_closed(4, 4, GridShape::Square)).abs() < 1e-12);
    }

    #[test]
    fn coset_partitions_follow_closed_forms() {
        for (m, q) in [(4, 4), (4, 16), (16, 4), (16, 16), (4, 64)] {
            let ms = partition_qam(m, q).unwrap();
            assert!((ms.mean_power() - 1.0).abs() < 1e-9);
            let (inter, intra) = measure_distances(&ms);
            let want = d_inter_closed(m, q, GridShape::Square);
            assert!(((inter - want) / want).abs() < 1e-6, "({m},{q})");
            let ratio = intra / inter;
            let want = intra_inter_ratio_closed(m, q);
            assert!(((ratio - want) / want).abs() < 1e-6, "({m},{q}): {ratio}");
        }
    }

    #[test]
    fn coset_differences_lie_on_coarse_lattice() {
        for (m, q) in [(4, 4), (16, 4), (4, 16)] {
            let ms = partition_qam(m, q).unwrap();
            let (inter, _) = measure_distances(&ms);
            let coarse = (m as f64).sqrt() * inter;
            for pts in ms.modes() {
                for a in pts {
                    for b in pts {
                        let d = (a - b) / coarse;
                        assert!((d.re - d.re.round()).abs() < 1e-9);
                        assert!((d.im - d.im.round()).abs() < 1e-9);
                    }
                }
            }
        }
    }

    #[test]
    fn rectangular_pairing() {
        let ms = partition_qam(8, 2).unwrap();
        let (inter, intra) = measure_distances(&ms);
        let ratio = intra / inter;
        assert!((ratio - 40f64.sqrt() / 2.0).abs() / ratio < 1e-6);
        assert!((ratio - intra_inter_ratio_closed(8, 2)).abs() < 1e-9);
        assert!((ms.mean_power() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn unsupported_pairs_rejected() {
        for (m, q) in [(2, 8), (4, 2), (8, 4), (3, 4), (1, 4)] {
            let err = partition_qam(m, q).unwrap_err();
            assert!(matches!(err, Error::Config(ref s) if s.contains("supported")));
        }
    }

    #[test]
    fn single_mode_has_no_inter_distance() {
        let h = 0.5f64.sqrt();
        let qpsk = vec![vec![
            Complex64::new(h, h),
            Complex64::new(-h, h),
            Complex64::new(-h, -h),
            Complex64::new(h, -h),
        ]];
        let ms = ModeSet::new(qpsk).unwrap();
        let (inter, intra) = measure_distances(&ms);
        assert!(inter.is_infinite());
        assert!((intra - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn gray_labels_within_mode() {
        let ms = partition_qam(4, 16).unwrap();
        let (inter, intra) = measure_distances(&ms);
        assert!(inter > 0.0);
        for pts in ms.modes() {
            for (i, a) in pts.iter().enumerate() {
                for (j, b) in pts.iter().enumerate() {
                    if ((a - b).norm() - intra).abs() < 1e-9 {
                        assert_eq!((i ^ j).count_ones(), 1);
                    }
                }
            }
        }
    }

    #[test]
    fn worked_example_symbols() {
        let ms = partition_qam(4, 4).unwrap();
        // mode 1 is the (even column, even row) coset of the 4x4 grid
        let s = 10f64.sqrt();
        assert!((ms.point(0, 0) - Complex64::new(-3.0 / s, -3.0 / s)).norm() < 1e-12);
        assert!((ms.point(0, 3) - Complex64::new(1.0 / s, 1.0 / s)).norm() < 1e-12);
        assert!((ms.point(3, 1) - Complex64::new(3.0 / s, -1.0 / s)).norm() < 1e-12);
    }

    #[test]
    fn table_roundtrip() {
        let ms = partition_qam(16, 4).unwrap();
        let back = ModeSet::from_table(&ms.to_table()).unwrap();
        assert_eq!(ms, back);
        assert!(ModeSet::from_table("1 1 0.0 1.0\n1 3 1.0 0.0\n").is_err());
        assert!(ModeSet::from_table("1 1 x 1.0\n").is_err());
    }

    #[test]
    fn asymptotic_diagnostic() {
        assert!((d_intra_asymptotic(4, GridShape::Square) - 1.5f64.sqrt()).abs() < 1e-12);
        // exact intra distance approaches sqrt(6/Q) as M grows
        let exact = d_inter_closed(16, 16, GridShape::Square) * 4.0;
        assert!((exact - d_intra_asymptotic(16, GridShape::Square)).abs() < 0.01);
    }

    #[test]
    fn subblock_distances_n4() {
        let cfg = SystemConfig::sum(4, 4, 4);
        let ms = partition_qam(4, 4).unwrap();
        let codec = SubblockCodec::new(&cfg, &ms).unwrap();
        let (eps1, eps2) = subblock_min_distances(&codec, SUBBLOCK_ENUMERATION_BUDGET).unwrap();
        // repetition coding leaves no rank-1 difference
        assert!(eps1.is_infinite());
        // a single symbol error inside a mode gives 2 * d_intra^2 = 3.2
        assert!(eps2 <= 3.2 + 1e-12);
        // the closest rank-2 event swaps the mode on one repetition pair
        let (inter, _) = measure_distances(&ms);
        assert!((eps2 - 2.0 * inter * inter).abs() < 1e-12);
        assert!(subblock_min_distances(&codec, 256).is_err());
    }
}
