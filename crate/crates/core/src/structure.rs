//! Structure functions `φ: 2^[n] → {0,1}` stored as packed truth tables.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::formula;
use crate::subset::{self, SubsetIndex, MAX_COMPONENTS};

/// A validated semicoherent structure function.
///
/// The table entry for subset `A` is `φ(A)`, the system state when exactly
/// the components of `A` work. Immutable after construction.
#[derive(Clone)]
pub struct StructureFunction {
    n: usize,
    words: Vec<u64>,
    mobius: OnceLock<Vec<i64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StandardKind {
    Series,
    Parallel,
    /// Works while at least `n - k + 1` components work, i.e. fails at the
    /// `k`th component failure.
    KOutOfN(usize),
    /// The five-component bridge with minimal path sets
    /// {1,4}, {2,5}, {1,3,5}, {2,3,4}.
    Bridge,
}

impl FromStr for StandardKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "series" => Ok(StandardKind::Series),
            "parallel" => Ok(StandardKind::Parallel),
            "bridge" => Ok(StandardKind::Bridge),
            other => Err(Error::InvalidParameter(format!(
                "unknown standard structure `{other}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Coherence {
    pub coherent: bool,
    /// 0-based indices of components that never affect the system state.
    pub irrelevant: Vec<usize>,
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParameter("a system needs at least one component".into()));
    }
    if n > MAX_COMPONENTS {
        return Err(Error::TooManyComponents {
            n,
            max: MAX_COMPONENTS,
        });
    }
    Ok(())
}

impl StructureFunction {
    /// Builds and validates a structure from `table[A] = φ(A)`.
    pub fn from_truth_table(n: usize, table: &[bool]) -> Result<Self> {
        check_n(n)?;
        let expected = 1usize << n;
        if table.len() != expected {
            return Err(Error::SizeMismatch {
                n,
                expected,
                actual: table.len(),
            });
        }
        Self::from_fn(n, |a| table[a.bits()])
    }

    /// Builds and validates a structure by evaluating `f` on every subset.
    pub fn from_fn(n: usize, mut f: impl FnMut(SubsetIndex) -> bool) -> Result<Self> {
        check_n(n)?;
        let size = 1usize << n;
        let mut words = vec![0u64; size.div_ceil(64)];
        for a in SubsetIndex::all(n) {
            if f(a) {
                words[a.bits() / 64] |= 1 << (a.bits() % 64);
            }
        }
        let phi = StructureFunction {
            n,
            words,
            mobius: OnceLock::new(),
        };
        phi.validate()?;
        Ok(phi)
    }

    fn validate(&self) -> Result<()> {
        let full = SubsetIndex::full(self.n);
        if self.value(SubsetIndex::EMPTY) {
            return Err(Error::NotSemicoherent {
                lower: SubsetIndex::EMPTY,
                upper: SubsetIndex::EMPTY,
                reason: "φ(∅) must be 0",
            });
        }
        if !self.value(full) {
            return Err(Error::NotSemicoherent {
                lower: full,
                upper: full,
                reason: "φ([n]) must be 1",
            });
        }
        for a in SubsetIndex::all(self.n) {
            if !self.value(a) {
                continue;
            }
            for i in a.complement(self.n).members() {
                if !self.value(a.with(i)) {
                    return Err(Error::NotSemicoherent {
                        lower: a,
                        upper: a.with(i),
                        reason: "φ is not monotone",
                    });
                }
            }
        }
        Ok(())
    }

    /// Decodes the little-endian hex encoding used in system-spec files.
    pub fn from_hex(n: usize, text: &str) -> Result<Self> {
        check_n(n)?;
        let bytes = hex::decode(text.trim()).map_err(|e| Error::Parse {
            position: 0,
            message: format!("bad truth_table_hex: {e}"),
        })?;
        let needed = (1usize << n).div_ceil(8);
        if bytes.len() != needed {
            return Err(Error::SizeMismatch {
                n,
                expected: needed * 2,
                actual: text.trim().len(),
            });
        }
        Self::from_fn(n, |a| bytes[a.bits() / 8] >> (a.bits() % 8) & 1 == 1)
    }

    /// Little-endian hex: subset 0 is the least significant bit of the
    /// first byte.
    pub fn to_hex(&self) -> String {
        let size = 1usize << self.n;
        let bytes: Vec<u8> = (0..size.div_ceil(8))
            .map(|k| {
                (0..8)
                    .filter(|b| k * 8 + b < size)
                    .fold(0u8, |acc, b| {
                        acc | (self.value(SubsetIndex((k * 8 + b) as u32)) as u8) << b
                    })
            })
            .collect();
        hex::encode(bytes)
    }

    pub fn parse_formula(text: &str, n: usize) -> Result<Self> {
        formula::parse(text, n)
    }

    pub fn make_standard(kind: StandardKind, n: usize) -> Result<Self> {
        check_n(n)?;
        match kind {
            StandardKind::Series => Self::from_fn(n, |a| a.len() == n),
            StandardKind::Parallel => Self::from_fn(n, |a| !a.is_empty()),
            StandardKind::KOutOfN(k) => {
                if k == 0 || k > n {
                    return Err(Error::InvalidParameter(format!(
                        "k-out-of-n needs 1 <= k <= n, got k = {k}, n = {n}"
                    )));
                }
                Self::from_fn(n, |a| a.len() > n - k)
            }
            StandardKind::Bridge => {
                if n != 5 {
                    return Err(Error::InvalidParameter(format!(
                        "the bridge structure has 5 components, got n = {n}"
                    )));
                }
                let paths = [
                    SubsetIndex::from_members([0, 3]),
                    SubsetIndex::from_members([1, 4]),
                    SubsetIndex::from_members([0, 2, 4]),
                    SubsetIndex::from_members([1, 2, 3]),
                ];
                Self::from_fn(5, |a| paths.iter().any(|p| p.is_subset_of(a)))
            }
        }
    }

    /// The system that works iff component `j` works.
    pub fn single_component(n: usize, j: usize) -> Result<Self> {
        if j >= n {
            return Err(Error::ComponentOutOfRange { j, n });
        }
        Self::from_fn(n, |a| a.contains(j))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn value(&self, a: SubsetIndex) -> bool {
        let i = a.bits();
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    #[inline]
    pub fn phi(&self, a: SubsetIndex) -> u8 {
        self.value(a) as u8
    }

    pub fn truth_table(&self) -> Vec<bool> {
        SubsetIndex::all(self.n).map(|a| self.value(a)).collect()
    }

    fn check_component(&self, j: usize) -> Result<()> {
        if j >= self.n {
            Err(Error::ComponentOutOfRange { j, n: self.n })
        } else {
            Ok(())
        }
    }

    /// Discrete derivative `φ(A∪{j}) − φ(A∖{j})`; 0-based `j`.
    pub fn delta(&self, j: usize, a: SubsetIndex) -> Result<u8> {
        self.check_component(j)?;
        if !a.fits(self.n) {
            return Err(Error::InvalidParameter(format!(
                "subset {a} does not fit in n = {}",
                self.n
            )));
        }
        Ok(self.delta_unchecked(j, a))
    }

    #[inline]
    pub(crate) fn delta_unchecked(&self, j: usize, a: SubsetIndex) -> u8 {
        self.phi(a.with(j)) - self.phi(a.without(j))
    }

    /// Möbius transform `m_φ(A) = Σ_{B⊆A} (−1)^{|A|−|B|} φ(B)`, computed once
    /// and cached.
    pub fn mobius_transform(&self) -> &[i64] {
        self.mobius.get_or_init(|| {
            let mut m: Vec<i64> = SubsetIndex::all(self.n).map(|a| self.phi(a) as i64).collect();
            subset::inverse_subset_sums(&mut m);
            m
        })
    }

    pub fn is_coherent(&self) -> Coherence {
        let irrelevant: Vec<usize> = (0..self.n)
            .filter(|&j| {
                !SubsetIndex::all(self.n)
                    .filter(|a| !a.contains(j))
                    .any(|a| self.delta_unchecked(j, a) == 1)
            })
            .collect();
        Coherence {
            coherent: irrelevant.is_empty(),
            irrelevant,
        }
    }

    /// `K` is a cut set iff `φ([n] ∖ K) = 0`.
    pub fn is_cut_set(&self, k: SubsetIndex) -> bool {
        !self.value(k.complement(self.n))
    }

    /// Relabels components: component `i` of `self` becomes component
    /// `perm[i]` of the result.
    pub fn relabel(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.n {
            return Err(Error::InvalidParameter("permutation length differs from n".into()));
        }
        let mut inverse = vec![usize::MAX; self.n];
        for (i, &p) in perm.iter().enumerate() {
            if p >= self.n || inverse[p] != usize::MAX {
                return Err(Error::InvalidParameter("not a permutation".into()));
            }
            inverse[p] = i;
        }
        Self::from_fn(self.n, |b| {
            self.value(SubsetIndex::from_members(b.members().map(|i| inverse[i])))
        })
    }
}

impl PartialEq for StructureFunction {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.words == other.words
    }
}

impl Eq for StructureFunction {}

impl std::hash::Hash for StructureFunction {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.n.hash(state);
        self.words.hash(state);
    }
}

impl fmt::Debug for StructureFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("StructureFunction")
            .field("n", &self.n)
            .field("table", &self.to_hex())
            .finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bits(v: &[u8]) -> Vec<bool> {
        v.iter().map(|&b| b == 1).collect()
    }

    fn set(one_based: &[usize]) -> SubsetIndex {
        SubsetIndex::from_members(one_based.iter().map(|i| i - 1))
    }

    #[test]
    fn single_component_identity() {
        let phi = StructureFunction::from_truth_table(1, &bits(&[0, 1])).unwrap();
        assert!(phi.value(SubsetIndex::full(1)));
        assert!(!phi.value(SubsetIndex::EMPTY));
    }

    #[test]
    fn series_of_two() {
        let phi = StructureFunction::from_truth_table(2, &bits(&[0, 0, 0, 1])).unwrap();
        assert_eq!(phi, StructureFunction::make_standard(StandardKind::Series, 2).unwrap());
    }

    #[test]
    fn rejects_endpoint_violation() {
        let err = StructureFunction::from_truth_table(2, &bits(&[1, 1, 1, 1])).unwrap_err();
        assert!(matches!(err, Error::NotSemicoherent { lower, .. } if lower == SubsetIndex::EMPTY));
        let err = StructureFunction::from_truth_table(2, &bits(&[0, 0, 0, 0])).unwrap_err();
        assert!(matches!(err, Error::NotSemicoherent { .. }));
    }

    #[test]
    fn rejects_non_monotone_with_witness() {
        // φ({1}) = 1 but φ({1,2}) = 0 is impossible with φ([2]) = 1, so use n = 3.
        let mut t = vec![false; 8];
        t[0b001] = true;
        t[0b111] = true;
        let err = StructureFunction::from_truth_table(3, &t).unwrap_err();
        match err {
            Error::NotSemicoherent { lower, upper, .. } => {
                assert!(lower.is_subset_of(upper));
                assert_eq!(lower, SubsetIndex(0b001));
                assert_eq!(upper.len(), 2);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_size_mismatch_and_limits() {
        assert!(matches!(
            StructureFunction::from_truth_table(2, &bits(&[0, 1])),
            Err(Error::SizeMismatch { .. })
        ));
        assert!(matches!(
            StructureFunction::make_standard(StandardKind::Series, 21),
            Err(Error::TooManyComponents { n: 21, max: 20 })
        ));
        assert!(StructureFunction::make_standard(StandardKind::KOutOfN(4), 3).is_err());
        assert!(StructureFunction::make_standard(StandardKind::Bridge, 4).is_err());
    }

    #[test]
    fn standard_tables() {
        let series = StructureFunction::make_standard(StandardKind::Series, 3).unwrap();
        for a in SubsetIndex::all(3) {
            assert_eq!(series.value(a), a == SubsetIndex::full(3));
        }
        let two_of_three = StructureFunction::make_standard(StandardKind::KOutOfN(2), 3).unwrap();
        for a in SubsetIndex::all(3) {
            assert_eq!(two_of_three.value(a), a.len() >= 2);
        }
        // k counts failures: the first failure stops a series system
        assert_eq!(
            StructureFunction::make_standard(StandardKind::KOutOfN(1), 3).unwrap(),
            series
        );
        assert_eq!(
            StructureFunction::make_standard(StandardKind::KOutOfN(3), 3).unwrap(),
            StructureFunction::make_standard(StandardKind::Parallel, 3).unwrap()
        );
    }

    #[test]
    fn bridge_derivative_of_component_three() {
        let bridge = StructureFunction::make_standard(StandardKind::Bridge, 5).unwrap();
        assert_eq!(bridge.delta(2, set(&[1, 5])).unwrap(), 1);
        assert_eq!(bridge.delta(2, set(&[1, 2])).unwrap(), 0);
        let pivotal: Vec<SubsetIndex> = SubsetIndex::all(5)
            .filter(|a| !a.contains(2) && bridge.delta_unchecked(2, *a) == 1)
            .collect();
        assert_eq!(pivotal, vec![set(&[2, 4]), set(&[1, 5])]);
    }

    #[test]
    fn series_derivative() {
        let series = StructureFunction::make_standard(StandardKind::Series, 3).unwrap();
        assert_eq!(series.delta(0, set(&[2, 3])).unwrap(), 1);
        assert!(series.delta(3, SubsetIndex::EMPTY).is_err());
    }

    #[test]
    fn mobius_small_cases() {
        let series = StructureFunction::make_standard(StandardKind::Series, 2).unwrap();
        assert_eq!(series.mobius_transform(), &[0, 0, 0, 1]);
        let parallel = StructureFunction::make_standard(StandardKind::Parallel, 2).unwrap();
        assert_eq!(parallel.mobius_transform(), &[0, 1, 1, -1]);
    }

    #[test]
    fn mobius_bridge_inverse_identity() {
        let bridge = StructureFunction::make_standard(StandardKind::Bridge, 5).unwrap();
        let m = bridge.mobius_transform();
        // Forward check against the definition, then the inverse identity.
        for a in SubsetIndex::all(5) {
            let direct: i64 = SubsetIndex::all(5)
                .filter(|b| b.is_subset_of(a))
                .map(|b| {
                    let sign = if (a.len() - b.len()) % 2 == 0 { 1 } else { -1 };
                    sign * bridge.phi(b) as i64
                })
                .sum();
            assert_eq!(m[a.bits()], direct, "{a}");
            let back: i64 = SubsetIndex::all(5)
                .filter(|b| b.is_subset_of(a))
                .map(|b| m[b.bits()])
                .sum();
            assert_eq!(back, bridge.phi(a) as i64);
        }
        for p in [&[1, 4][..], &[2, 5], &[1, 3, 5], &[2, 3, 4]] {
            assert_eq!(m[set(p).bits()], 1);
        }
        // Pairwise unions of the four paths give the five 4-subsets once each
        // plus the full set; every triple and the quadruple give the full set.
        for p in [&[1, 2, 3, 4][..], &[1, 2, 3, 5], &[1, 2, 4, 5], &[1, 3, 4, 5], &[2, 3, 4, 5]] {
            assert_eq!(m[set(p).bits()], -1, "{p:?}");
        }
        assert_eq!(m[SubsetIndex::full(5).bits()], -1 + 4 - 1);
        assert_eq!(m.iter().filter(|&&c| c != 0).count(), 10);
        assert_eq!(m.iter().sum::<i64>(), 1);
    }

    #[test]
    fn coherence() {
        let bridge = StructureFunction::make_standard(StandardKind::Bridge, 5).unwrap();
        assert_eq!(
            bridge.is_coherent(),
            Coherence {
                coherent: true,
                irrelevant: vec![]
            }
        );
        let dummy = StructureFunction::single_component(2, 0).unwrap();
        assert_eq!(dummy.is_coherent().irrelevant, vec![1]);
        assert!(!dummy.is_coherent().coherent);
        assert!(StructureFunction::make_standard(StandardKind::Series, 3)
            .unwrap()
            .is_coherent()
            .coherent);
    }

    #[test]
    fn cut_sets() {
        let series = StructureFunction::make_standard(StandardKind::Series, 3).unwrap();
        let parallel = StructureFunction::make_standard(StandardKind::Parallel, 3).unwrap();
        let bridge = StructureFunction::make_standard(StandardKind::Bridge, 5).unwrap();
        assert!(series.is_cut_set(set(&[2])));
        assert!(!parallel.is_cut_set(set(&[2])));
        assert!(!bridge.is_cut_set(set(&[3])));
        assert!(bridge.is_cut_set(set(&[1, 2])));
    }

    #[test]
    fn hex_round_trip_and_layout() {
        let series = StructureFunction::make_standard(StandardKind::Series, 2).unwrap();
        // Only subset 3 works: bit 3 of byte 0.
        assert_eq!(series.to_hex(), "08");
        let bridge = StructureFunction::make_standard(StandardKind::Bridge, 5).unwrap();
        let back = StructureFunction::from_hex(5, &bridge.to_hex()).unwrap();
        assert_eq!(back, bridge);
        assert!(StructureFunction::from_hex(5, "ff").is_err());
        assert!(StructureFunction::from_hex(2, "zz").is_err());
    }

    #[test]
    fn relabel_moves_components() {
        let dummy = StructureFunction::single_component(3, 0).unwrap();
        let moved = dummy.relabel(&[2, 0, 1]).unwrap();
        assert_eq!(moved, StructureFunction::single_component(3, 2).unwrap());
    }
}
