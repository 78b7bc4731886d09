//! Subsets of `[n]` encoded as bitmasks, and the subset/superset sum
//! transforms over the lattice `2^[n]`.
//!
//! Component `i` (0-based) is bit `i`. Displayed subsets use the 1-based
//! component labels, so `SubsetIndex(0b10001)` prints as `{1,5}`.

use std::fmt;
use std::ops::{AddAssign, SubAssign};

use serde::{Deserialize, Serialize};

/// Largest component count representable by a truth table.
pub const MAX_COMPONENTS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SubsetIndex(pub u32);

impl SubsetIndex {
    pub const EMPTY: SubsetIndex = SubsetIndex(0);

    pub fn full(n: usize) -> Self {
        debug_assert!(n <= 31);
        SubsetIndex(((1u64 << n) - 1) as u32)
    }

    pub fn singleton(i: usize) -> Self {
        SubsetIndex(1 << i)
    }

    /// Builds a subset from 0-based component indices.
    pub fn from_members<I: IntoIterator<Item = usize>>(members: I) -> Self {
        SubsetIndex(members.into_iter().fold(0u32, |acc, i| acc | (1 << i)))
    }

    #[inline]
    pub fn bits(self) -> usize {
        self.0 as usize
    }

    #[inline]
    pub fn contains(self, i: usize) -> bool {
        self.0 >> i & 1 == 1
    }

    #[inline]
    pub fn with(self, i: usize) -> Self {
        SubsetIndex(self.0 | (1 << i))
    }

    #[inline]
    pub fn without(self, i: usize) -> Self {
        SubsetIndex(self.0 & !(1 << i))
    }

    #[inline]
    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    #[inline]
    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    #[inline]
    pub fn is_subset_of(self, other: SubsetIndex) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn complement(self, n: usize) -> Self {
        SubsetIndex(!self.0 & SubsetIndex::full(n).0)
    }

    pub fn fits(self, n: usize) -> bool {
        (self.0 as u64) < (1u64 << n)
    }

    /// 0-based members in increasing order.
    pub fn members(self) -> impl Iterator<Item = usize> {
        let mut rest = self.0;
        std::iter::from_fn(move || {
            if rest == 0 {
                None
            } else {
                let i = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(i)
            }
        })
    }

    /// All subsets of `[n]`, in index order.
    pub fn all(n: usize) -> impl Iterator<Item = SubsetIndex> {
        (0..(1u32 << n)).map(SubsetIndex)
    }
}

impl fmt::Display for SubsetIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (k, i) in self.members().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{}", i + 1)?;
        }
        f.write_str("}")
    }
}

fn butterfly<T>(xs: &mut [T], mut step: impl FnMut(&mut T, &mut T)) {
    assert!(xs.len().is_power_of_two());
    let mut half = 1;
    while half < xs.len() {
        for block in xs.chunks_exact_mut(2 * half) {
            let (lo, hi) = block.split_at_mut(half);
            for (z, o) in lo.iter_mut().zip(hi) {
                step(z, o);
            }
        }
        half *= 2;
    }
}

/// In place: `xs[A] <- Σ_{B⊆A} xs[B]` (zeta transform).
pub fn subset_sums<T: Clone + for<'a> AddAssign<&'a T>>(xs: &mut [T]) {
    butterfly(xs, |z, o| *o += &*z);
}

/// In place: inverse of [`subset_sums`] (Möbius transform).
pub fn inverse_subset_sums<T: Clone + for<'a> SubAssign<&'a T>>(xs: &mut [T]) {
    butterfly(xs, |z, o| *o -= &*z);
}

/// In place: `xs[A] <- Σ_{B⊇A} xs[B]`.
pub fn superset_sums<T: Clone + for<'a> AddAssign<&'a T>>(xs: &mut [T]) {
    butterfly(xs, |z, o| *z += &*o);
}

/// In place: inverse of [`superset_sums`].
pub fn inverse_superset_sums<T: Clone + for<'a> SubAssign<&'a T>>(xs: &mut [T]) {
    butterfly(xs, |z, o| *z -= &*o);
}

/// `C(n, k)` for the small arguments used here.
pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) as u64 / (i + 1) as u64)
}
