//! Closed forms for independent Weibull lifetimes with a common shape.

use crate::error::{Error, Result};
use crate::lifetimes::model::IndependentWeibull;
use crate::lifetimes::ordering::independent_qj_marginals;
use crate::lifetimes::quadrature::QuadratureOptions;
use crate::subset::SubsetIndex;

/// Above this many free components the alternating sum for `q_j` is
/// replaced by quadrature.
pub const CANCELLATION_GUARD: usize = 12;

fn check(model: &IndependentWeibull, j: usize, a: SubsetIndex) -> Result<()> {
    let n = model.n();
    if j >= n {
        return Err(Error::ComponentOutOfRange { j, n });
    }
    if !a.fits(n) {
        return Err(Error::InvalidParameter(format!("subset {a} does not fit in n = {n}")));
    }
    if a.contains(j) {
        return Err(Error::JInA { j, subset: a });
    }
    Ok(())
}

pub(crate) fn powered(model: &IndependentWeibull) -> Vec<f64> {
    model.lambdas().iter().map(|l| l.powf(model.alpha())).collect()
}

/// `r_j(A) = λ_j^α / Σ_{i ∈ A∪{j}} λ_i^α`.
pub fn weibull_rj(model: &IndependentWeibull, j: usize, a: SubsetIndex) -> Result<f64> {
    check(model, j, a)?;
    Ok(rj_with(&powered(model), j, a))
}

#[inline]
pub(crate) fn rj_with(powered: &[f64], j: usize, a: SubsetIndex) -> f64 {
    let denom: f64 = powered[j] + a.members().map(|i| powered[i]).sum::<f64>();
    powered[j] / denom
}

/// Neumaier-compensated accumulator.
#[derive(Default)]
struct Compensated {
    sum: f64,
    carry: f64,
}

impl Compensated {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

/// `q_j(A) = Σ_{A ⊆ B ⊆ [n]∖{j}} (−1)^{|B|−|A|} r_j(B)`.
///
/// Falls back to quadrature at the default tolerance when more than
/// [`CANCELLATION_GUARD`] components are free.
pub fn weibull_qj(model: &IndependentWeibull, j: usize, a: SubsetIndex) -> Result<f64> {
    check(model, j, a)?;
    qj_with(model, &powered(model), j, a, QuadratureOptions::default())
}

pub(crate) fn qj_with(
    model: &IndependentWeibull,
    powered: &[f64],
    j: usize,
    a: SubsetIndex,
    quad: QuadratureOptions,
) -> Result<f64> {
    let n = model.n();
    let free = a.with(j).complement(n);
    if free.len() > CANCELLATION_GUARD {
        return independent_qj_marginals(&model.marginals(), j, a, quad).map(|i| i.value);
    }
    let base = powered[j] + a.members().map(|i| powered[i]).sum::<f64>();
    let free_members: Vec<usize> = free.members().collect();
    let mut acc = Compensated::default();
    for mask in 0u32..(1 << free_members.len()) {
        let mut denom = base;
        for (k, &i) in free_members.iter().enumerate() {
            if mask >> k & 1 == 1 {
                denom += powered[i];
            }
        }
        let term = powered[j] / denom;
        if mask.count_ones() % 2 == 0 {
            acc.add(term);
        } else {
            acc.add(-term);
        }
    }
    let v = acc.value();
    Ok(if v < 0.0 && v > -1e-9 {
        0.0
    } else if v > 1.0 && v < 1.0 + 1e-9 {
        1.0
    } else {
        v
    })
}
