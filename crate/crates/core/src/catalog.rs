//! Exhaustive enumeration of small structure functions.

use crate::error::{Error, Result};
use crate::structure::StructureFunction;
use crate::subset::SubsetIndex;

/// Largest `n` for which the catalog is enumerable (7581 monotone functions
/// at `n = 5`, about 7.8 million at `n = 6`).
pub const MAX_CATALOG_COMPONENTS: usize = 5;

/// All monotone Boolean functions of `n` variables as packed truth tables
/// (bit `A` is `f(A)`).
fn monotone_tables(n: usize) -> Vec<u64> {
    if n == 0 {
        return vec![0, 1];
    }
    let smaller = monotone_tables(n - 1);
    let shift = 1u32 << (n - 1);
    let mut out = Vec::new();
    for &hi in &smaller {
        for &lo in &smaller {
            if lo & !hi == 0 {
                out.push(lo | hi << shift);
            }
        }
    }
    out
}

/// Every semicoherent structure on `n` components, in a fixed order.
pub fn semicoherent_structures(n: usize) -> Result<Vec<StructureFunction>> {
    if n == 0 || n > MAX_CATALOG_COMPONENTS {
        return Err(Error::TooManyComponents {
            n,
            max: MAX_CATALOG_COMPONENTS,
        });
    }
    let full = 1u64 << ((1usize << n) - 1);
    monotone_tables(n)
        .into_iter()
        .filter(|t| t & 1 == 0 && t & full != 0)
        .map(|t| StructureFunction::from_fn(n, |a: SubsetIndex| t >> a.bits() & 1 == 1))
        .collect()
}

/// Semicoherent structures in which every component is relevant.
pub fn coherent_structures(n: usize) -> Result<Vec<StructureFunction>> {
    Ok(semicoherent_structures(n)?
        .into_iter()
        .filter(|phi| phi.is_coherent().coherent)
        .collect())
}
