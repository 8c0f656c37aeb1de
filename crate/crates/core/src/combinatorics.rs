//! Mapping between index bits and mode/subcarrier activation patterns.
//!
//! Combinations are ranked with the combinatorial number system in
//! co-lexicographic order: a `k`-subset `{c_1 < ... < c_k}` of `{1..n}` has rank
//! `sum_i C(c_i - 1, i)`. For `k = 2, n = 4` this yields the sequence
//! `[1,2] [1,3] [2,3] [1,4] [2,4] [3,4]`, and for `k = n/2` the complement of the
//! combination at rank `r` sits at rank `C(n, n/2) - 1 - r`.
//!
//! All index lists exposed here are 1-based and strictly increasing.

use crate::config::Selection;
use crate::error::{Error, Result};
use crate::Bit;

/// Binomial coefficient `C(n, k)`, zero when `k > n`.
pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u64 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u64 / (i + 1) as u64;
    }
    acc
}

/// `floor(log2(x))` for `x >= 1`.
pub fn floor_log2(x: u64) -> u32 {
    assert!(x > 0, "floor_log2 of zero");
    63 - x.leading_zeros()
}

/// Returns the `k`-combination of `{1..n_total}` with the given rank.
pub fn combo_unrank(rank: u64, k: usize, n_total: usize) -> Result<Vec<usize>> {
    let total = binomial(n_total, k);
    if k == 0 || rank >= total {
        return Err(Error::Domain(format!(
            "rank {rank} out of range for C({n_total},{k}) = {total}"
        )));
    }
    let mut out = vec![0usize; k];
    let mut rem = rank;
    let mut upper = n_total;
    for slot in (1..=k).rev() {
        // largest c < upper with C(c, slot) <= rem
        let mut c = upper - 1;
        while binomial(c, slot) > rem {
            c -= 1;
        }
        rem -= binomial(c, slot);
        out[slot - 1] = c + 1;
        upper = c;
    }
    Ok(out)
}

/// Inverse of [`combo_unrank`].
pub fn combo_rank(indices: &[usize], n_total: usize) -> Result<u64> {
    if indices.is_empty() {
        return Err(Error::Domain("empty combination".into()));
    }
    let mut prev = 0usize;
    let mut rank = 0u64;
    for (i, &c) in indices.iter().enumerate() {
        if c == 0 || c > n_total {
            return Err(Error::Domain(format!("index {c} outside 1..={n_total}")));
        }
        if c <= prev {
            return Err(Error::Domain(format!(
                "indices must be strictly increasing, got {indices:?}"
            )));
        }
        rank += binomial(c - 1, i + 1);
        prev = c;
    }
    Ok(rank)
}

/// Indices of `{1..n}` not present in `indices`, increasing.
pub fn complement(indices: &[usize], n: usize) -> Vec<usize> {
    (1..=n).filter(|i| !indices.contains(i)).collect()
}

/// Reads bits MSB-first into an integer.
pub fn bits_to_u64(bits: &[Bit]) -> u64 {
    bits.iter().fold(0u64, |acc, &b| (acc << 1) | u64::from(b & 1))
}

/// Writes the `len` low bits of `value` MSB-first.
pub fn u64_to_bits(value: u64, len: usize) -> Vec<Bit> {
    (0..len).rev().map(|i| ((value >> i) & 1) as Bit).collect()
}

/// Bit budget of one subblock.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BitBudget {
    /// Total bits per subblock.
    pub p: usize,
    /// Index bits (MAP and SAP).
    pub p1: usize,
    /// Data-symbol bits.
    pub p2: usize,
}

/// Validates the SuM parameters shared by every component.
pub fn validate_params(modes: usize, n: usize, q: usize) -> Result<()> {
    if n < 4 || !n.is_power_of_two() {
        return Err(Error::Config(format!(
            "subblock size n = {n} must be a power of two >= 4"
        )));
    }
    if modes < 2 {
        return Err(Error::Config(format!("need at least two modes, got M = {modes}")));
    }
    if q < 2 || !q.is_power_of_two() {
        return Err(Error::Config(format!("mode size Q = {q} must be a power of two >= 2")));
    }
    if binomial(modes, 2).checked_mul(binomial(n, n / 2)).is_none() || n > 32 {
        return Err(Error::Config(format!("n = {n}, M = {modes} too large")));
    }
    Ok(())
}

/// Bits carried per subblock for joint or separate MAP/SAP selection.
pub fn bits_per_subblock(modes: usize, n: usize, q: usize, selection: Selection) -> Result<BitBudget> {
    validate_params(modes, n, q)?;
    let maps = binomial(modes, 2);
    let saps = binomial(n, n / 2);
    let p1 = match selection {
        Selection::Joint => floor_log2(maps * saps) as usize,
        Selection::Separate => (floor_log2(maps) + floor_log2(saps)) as usize,
    };
    let p2 = n / 2 * q.trailing_zeros() as usize;
    Ok(BitBudget { p: p1 + p2, p1, p2 })
}

/// Encoded or decoded index-modulation state of one subblock.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImSelection {
    /// Decimal value `a1 + C(M,2) * a2`.
    pub d: u64,
    /// MAP rank.
    pub a1: u64,
    /// SAP rank.
    pub a2: u64,
    /// Active modes, 1-based, `v[0] < v[1]`.
    pub v: [usize; 2],
    /// Subcarriers carrying mode `v[0]`, 1-based.
    pub u: Vec<usize>,
    /// Complementary subcarriers carrying mode `v[1]`.
    pub w: Vec<usize>,
}

impl ImSelection {
    /// Builds the selection for MAP rank `a1` and SAP rank `a2`.
    pub fn from_ranks(a1: u64, a2: u64, modes: usize, n: usize) -> Result<Self> {
        let maps = binomial(modes, 2);
        let v = combo_unrank(a1, 2, modes)?;
        let u = combo_unrank(a2, n / 2, n)?;
        let w = complement(&u, n);
        Ok(ImSelection {
            d: a1 + maps * a2,
            a1,
            a2,
            v: [v[0], v[1]],
            u,
            w,
        })
    }
}

/// Joint selection: `p1` bits → `d` → `(a1, a2) = (d mod C(M,2), d div C(M,2))`.
pub fn joint_select(p1_bits: &[Bit], modes: usize, n: usize) -> Result<ImSelection> {
    let maps = binomial(modes, 2);
    let saps = binomial(n, n / 2);
    let p1 = floor_log2(maps * saps) as usize;
    if p1_bits.len() != p1 {
        return Err(Error::Codec(format!("expected {p1} index bits, got {}", p1_bits.len())));
    }
    let d = bits_to_u64(p1_bits);
    ImSelection::from_ranks(d % maps, d / maps, modes, n)
}

/// Inverse of [`joint_select`].
pub fn joint_deselect(sel: &ImSelection, modes: usize, n: usize) -> Result<Vec<Bit>> {
    let maps = binomial(modes, 2);
    let p1 = floor_log2(maps * binomial(n, n / 2)) as usize;
    let d = sel.a1 + maps * sel.a2;
    if d >= 1u64 << p1 {
        return Err(Error::IllegalCombination { d, limit: 1u64 << p1 });
    }
    Ok(u64_to_bits(d, p1))
}

/// Separate selection: MAP and SAP ranks come from independent bit groups.
pub fn separate_select(map_bits: &[Bit], sap_bits: &[Bit], modes: usize, n: usize) -> Result<ImSelection> {
    let pa = floor_log2(binomial(modes, 2)) as usize;
    let pb = floor_log2(binomial(n, n / 2)) as usize;
    if map_bits.len() != pa || sap_bits.len() != pb {
        return Err(Error::Codec(format!(
            "expected {pa}+{pb} index bits, got {}+{}",
            map_bits.len(),
            sap_bits.len()
        )));
    }
    ImSelection::from_ranks(bits_to_u64(map_bits), bits_to_u64(sap_bits), modes, n)
}

/// Inverse of [`separate_select`].
pub fn separate_deselect(sel: &ImSelection, modes: usize, n: usize) -> Result<(Vec<Bit>, Vec<Bit>)> {
    let pa = floor_log2(binomial(modes, 2)) as usize;
    let pb = floor_log2(binomial(n, n / 2)) as usize;
    if sel.a1 >= 1u64 << pa || sel.a2 >= 1u64 << pb {
        return Err(Error::IllegalCombination {
            d: sel.d,
            limit: (1u64 << pa) * binomial(modes, 2),
        });
    }
    Ok((u64_to_bits(sel.a1, pa), u64_to_bits(sel.a2, pb)))
}

/// Precomputed MAP/SAP tables for one `(M, n, selection)` triple.
///
/// Detectors and encoders share one instance; it is immutable after
/// construction.
#[derive(Debug, Clone)]
pub struct IndexMapper {
    pub modes: usize,
    pub n: usize,
    pub selection: Selection,
    /// Number of index bits.
    pub p1: usize,
    /// `C(M, 2)`.
    pub num_maps: usize,
    /// `C(n, n/2)`.
    pub num_saps: usize,
    /// MAP rank → `[v1, v2]` (1-based).
    pub maps: Vec<[usize; 2]>,
    /// SAP rank → `u` (1-based).
    pub saps: Vec<Vec<usize>>,
    /// SAP rank → rank of its complement.
    pub mirror: Vec<usize>,
}

impl IndexMapper {
    pub fn new(modes: usize, n: usize, selection: Selection) -> Result<Self> {
        if modes < 2 || n < 4 || !n.is_power_of_two() {
            return Err(Error::Config(format!("invalid (M, n) = ({modes}, {n})")));
        }
        let num_maps = binomial(modes, 2) as usize;
        let num_saps = binomial(n, n / 2) as usize;
        let p1 = match selection {
            Selection::Joint => floor_log2((num_maps * num_saps) as u64) as usize,
            Selection::Separate => (floor_log2(num_maps as u64) + floor_log2(num_saps as u64)) as usize,
        };
        let maps = (0..num_maps as u64)
            .map(|r| combo_unrank(r, 2, modes).map(|v| [v[0], v[1]]))
            .collect::<Result<Vec<_>>>()?;
        let saps = (0..num_saps as u64)
            .map(|r| combo_unrank(r, n / 2, n))
            .collect::<Result<Vec<_>>>()?;
        let mirror = saps
            .iter()
            .map(|u| combo_rank(&complement(u, n), n).map(|r| r as usize))
            .collect::<Result<Vec<_>>>()?;
        Ok(IndexMapper {
            modes,
            n,
            selection,
            p1,
            num_maps,
            num_saps,
            maps,
            saps,
            mirror,
        })
    }

    /// Whether the complement of SAP `r` is always SAP `C(n,n/2) - 1 - r`.
    pub fn mirror_is_reversal(&self) -> bool {
        self.mirror.iter().enumerate().all(|(r, &m)| m == self.num_saps - 1 - r)
    }

    /// Whether `(a1, a2)` is ever transmitted.
    pub fn is_legal(&self, a1: usize, a2: usize) -> bool {
        if a1 >= self.num_maps || a2 >= self.num_saps {
            return false;
        }
        match self.selection {
            Selection::Joint => ((a1 + self.num_maps * a2) as u64) < (1u64 << self.p1),
            Selection::Separate => {
                let pa = floor_log2(self.num_maps as u64);
                let pb = floor_log2(self.num_saps as u64);
                (a1 as u64) < (1u64 << pa) && (a2 as u64) < (1u64 << pb)
            }
        }
    }

    /// Number of legal `(a1, a2)` pairs, always `2^p1`.
    pub fn num_legal(&self) -> usize {
        1usize << self.p1
    }

    pub fn selection_for(&self, a1: usize, a2: usize) -> ImSelection {
        let u = self.saps[a2].clone();
        let w = self.saps[self.mirror[a2]].clone();
        ImSelection {
            d: (a1 + self.num_maps * a2) as u64,
            a1: a1 as u64,
            a2: a2 as u64,
            v: self.maps[a1],
            u,
            w,
        }
    }

    /// Index bits → selection.
    pub fn select(&self, bits: &[Bit]) -> Result<ImSelection> {
        if bits.len() != self.p1 {
            return Err(Error::Codec(format!(
                "expected {} index bits, got {}",
                self.p1,
                bits.len()
            )));
        }
        let (a1, a2) = match self.selection {
            Selection::Joint => {
                let d = bits_to_u64(bits) as usize;
                (d % self.num_maps, d / self.num_maps)
            }
            Selection::Separate => {
                let pa = floor_log2(self.num_maps as u64) as usize;
                (bits_to_u64(&bits[..pa]) as usize, bits_to_u64(&bits[pa..]) as usize)
            }
        };
        Ok(self.selection_for(a1, a2))
    }

    /// Selection → index bits.
    pub fn deselect(&self, a1: usize, a2: usize) -> Result<Vec<Bit>> {
        if !self.is_legal(a1, a2) {
            return Err(Error::IllegalCombination {
                d: (a1 + self.num_maps * a2) as u64,
                limit: 1u64 << self.p1,
            });
        }
        Ok(match self.selection {
            Selection::Joint => u64_to_bits((a1 + self.num_maps * a2) as u64, self.p1),
            Selection::Separate => {
                let pa = floor_log2(self.num_maps as u64) as usize;
                let mut bits = u64_to_bits(a1 as u64, pa);
                bits.extend(u64_to_bits(a2 as u64, self.p1 - pa));
                bits
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn bits(s: &str) -> Vec<Bit> {
        s.bytes().map(|c| c - b'0').collect()
    }

    #[test]
    fn unrank_matches_selection_table() {
        let expected = [[1, 2], [1, 3], [2, 3], [1, 4], [2, 4], [3, 4]];
        for (r, e) in expected.iter().enumerate() {
            assert_eq!(combo_unrank(r as u64, 2, 4).unwrap(), e.to_vec());
        }
    }

    #[test]
    fn unrank_rejects_out_of_range() {
        assert!(matches!(combo_unrank(6, 2, 4), Err(Error::Domain(_))));
        assert!(combo_unrank(0, 5, 4).is_err());
    }

    #[test]
    fn rank_examples() {
        assert_eq!(combo_rank(&[2, 4], 4).unwrap(), 4);
        assert_eq!(combo_rank(&[1, 2], 4).unwrap(), 0);
        assert!(combo_rank(&[2, 2], 4).is_err());
        assert!(combo_rank(&[3, 1], 4).is_err());
        assert!(combo_rank(&[1, 5], 4).is_err());
        assert!(combo_rank(&[0, 1], 4).is_err());
    }

    #[test]
    fn rank_roundtrip_all_of_8_choose_4() {
        assert_eq!(binomial(8, 4), 70);
        for r in 0..70 {
            let c = combo_unrank(r, 4, 8).unwrap();
            assert_eq!(combo_rank(&c, 8).unwrap(), r);
        }
    }

    #[test]
    fn complement_is_mirrored_rank() {
        for n in [4usize, 8, 16] {
            let m = IndexMapper::new(2, n, Selection::Joint).unwrap();
            assert!(m.mirror_is_reversal(), "n = {n}");
        }
    }

    #[test]
    fn worked_example_selection() {
        let sel = joint_select(&bits("01001"), 4, 4).unwrap();
        assert_eq!(sel.d, 9);
        assert_eq!((sel.a1, sel.a2), (3, 1));
        assert_eq!(sel.v, [1, 4]);
        assert_eq!(sel.u, vec![1, 3]);
        assert_eq!(sel.w, vec![2, 4]);
        assert_eq!(joint_deselect(&sel, 4, 4).unwrap(), bits("01001"));
    }

    #[test]
    fn zero_bits_select_first_combinations() {
        let sel = joint_select(&bits("00000"), 4, 4).unwrap();
        assert_eq!((sel.a1, sel.a2), (0, 0));
        assert_eq!(sel.v, [1, 2]);
        assert_eq!(sel.u, vec![1, 2]);
        assert_eq!(joint_deselect(&sel, 4, 4).unwrap(), bits("00000"));
    }

    #[test]
    fn joint_selection_is_injective_and_invertible() {
        let mut seen = HashSet::new();
        for d in 0..32u64 {
            let b = u64_to_bits(d, 5);
            let sel = joint_select(&b, 4, 4).unwrap();
            assert!(sel.d < 32);
            assert_eq!(sel.d, sel.a1 + 6 * sel.a2);
            assert!(seen.insert((sel.v, sel.u.clone())));
            assert_eq!(joint_deselect(&sel, 4, 4).unwrap(), b);
        }
        assert_eq!(seen.len(), 32);
    }

    #[test]
    fn deselect_rejects_illegal_pairs() {
        let sel = ImSelection::from_ranks(2, 5, 4, 4).unwrap();
        assert_eq!(sel.d, 32);
        assert!(matches!(
            joint_deselect(&sel, 4, 4),
            Err(Error::IllegalCombination { d: 32, limit: 32 })
        ));
    }

    #[test]
    fn separate_selection() {
        let sel = separate_select(&bits("11"), &bits("00"), 4, 4).unwrap();
        assert_eq!(sel.a1, 3);
        assert_eq!(sel.v, [1, 4]);
        let (a, b) = separate_deselect(&sel, 4, 4).unwrap();
        assert_eq!(a, bits("11"));
        assert_eq!(b, bits("00"));
    }

    #[test]
    fn bit_budgets() {
        let j = bits_per_subblock(4, 4, 4, Selection::Joint).unwrap();
        assert_eq!((j.p, j.p1, j.p2), (9, 5, 4));
        let s = bits_per_subblock(4, 4, 4, Selection::Separate).unwrap();
        assert_eq!((s.p, s.p1, s.p2), (8, 4, 4));
        assert_eq!(j.p - s.p, 1);
        let b = bits_per_subblock(2, 4, 2, Selection::Joint).unwrap();
        assert_eq!((b.p, b.p1, b.p2), (4, 2, 2));
        let e = bits_per_subblock(4, 8, 4, Selection::Joint).unwrap();
        assert_eq!((e.p, e.p1, e.p2), (16, 8, 8));
    }

    #[test]
    fn invalid_params_rejected() {
        assert!(bits_per_subblock(4, 6, 4, Selection::Joint).is_err());
        assert!(bits_per_subblock(1, 4, 4, Selection::Joint).is_err());
        assert!(bits_per_subblock(4, 4, 3, Selection::Joint).is_err());
        assert!(bits_per_subblock(4, 2, 4, Selection::Joint).is_err());
    }

    #[test]
    fn mapper_roundtrip_exhaustive() {
        for (modes, n) in [(2, 4), (4, 4), (8, 4), (16, 4), (4, 8), (8, 8)] {
            for selection in [Selection::Joint, Selection::Separate] {
                let m = IndexMapper::new(modes, n, selection).unwrap();
                let mut seen = HashSet::new();
                for d in 0..(1u64 << m.p1) {
                    let b = u64_to_bits(d, m.p1);
                    let sel = m.select(&b).unwrap();
                    assert!(m.is_legal(sel.a1 as usize, sel.a2 as usize));
                    let mut all: Vec<usize> = sel.u.iter().chain(&sel.w).copied().collect();
                    all.sort_unstable();
                    assert_eq!(all, (1..=n).collect::<Vec<_>>());
                    assert!(seen.insert((sel.a1, sel.a2)));
                    assert_eq!(m.deselect(sel.a1 as usize, sel.a2 as usize).unwrap(), b);
                }
                let legal = (0..m.num_maps)
                    .flat_map(|a1| (0..m.num_saps).map(move |a2| (a1, a2)))
                    .filter(|&(a1, a2)| m.is_legal(a1, a2))
                    .count();
                assert_eq!(legal, m.num_legal());
            }
        }
    }

    #[test]
    fn mapper_agrees_with_free_functions() {
        let m = IndexMapper::new(4, 4, Selection::Joint).unwrap();
        for d in 0..32 {
            let b = u64_to_bits(d, 5);
            assert_eq!(m.select(&b).unwrap(), joint_select(&b, 4, 4).unwrap());
        }
    }
}
