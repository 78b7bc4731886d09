//! Barlow-Proschan importance, signatures and the entropy symmetry index.
//!
//! Every probabilistic index is a linear functional of the ordering tables
//! of [`crate::lifetimes`]; the structural indices `b` and `s` are their
//! exchangeable specializations and are always computed exactly.

use std::fmt;

use num::BigRational;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lifetimes::{
    ordering_probabilities, EvalOptions, JointLifetimeModel, Method, OrderingProbabilities, Tables,
};
use crate::lifetimes::{OrderingTables};
use crate::scalar::{self, Scalar};
use crate::structure::StructureFunction;
use crate::subset::{self, binomial, SubsetIndex};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum IndexKind {
    BarlowProschan,
    StructuralB,
    SignatureP,
    StructuralS,
    /// `Pr(T > X_{k:n})` for `k = 0..=n`.
    Tail,
}

impl fmt::Display for IndexKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            IndexKind::BarlowProschan => "bp",
            IndexKind::StructuralB => "b",
            IndexKind::SignatureP => "p",
            IndexKind::StructuralS => "s",
            IndexKind::Tail => "tail",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum IndexValues {
    Exact(Vec<BigRational>),
    Float(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Exactness {
    Rational,
    Float { tol: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct IndexVector {
    pub kind: IndexKind,
    pub values: IndexValues,
    pub exactness: Exactness,
}

impl IndexVector {
    fn exact(kind: IndexKind, values: Vec<BigRational>) -> Self {
        IndexVector {
            kind,
            values: IndexValues::Exact(values),
            exactness: Exactness::Rational,
        }
    }

    fn float(kind: IndexKind, values: Vec<f64>, tol: f64) -> Self {
        IndexVector {
            kind,
            values: IndexValues::Float(values),
            exactness: Exactness::Float { tol },
        }
    }

    /// Wraps user-supplied probabilities, e.g. for [`symmetry_index`].
    pub fn from_f64(kind: IndexKind, values: Vec<f64>) -> Self {
        Self::float(kind, values, 0.0)
    }

    pub fn len(&self) -> usize {
        match &self.values {
            IndexValues::Exact(v) => v.len(),
            IndexValues::Float(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.exactness, Exactness::Rational)
    }

    pub fn tolerance(&self) -> f64 {
        match self.exactness {
            Exactness::Rational => 0.0,
            Exactness::Float { tol } => tol,
        }
    }

    pub fn as_exact(&self) -> Option<&[BigRational]> {
        match &self.values {
            IndexValues::Exact(v) => Some(v),
            IndexValues::Float(_) => None,
        }
    }

    pub fn to_f64(&self) -> Vec<f64> {
        match &self.values {
            IndexValues::Exact(v) => v.iter().map(Scalar::to_f64).collect(),
            IndexValues::Float(v) => v.clone(),
        }
    }

    /// Entries as report strings: `"7/30"` when exact, shortest float text
    /// otherwise.
    pub fn render(&self) -> Vec<String> {
        match &self.values {
            IndexValues::Exact(v) => v.iter().map(scalar::format_rational).collect(),
            IndexValues::Float(v) => v.iter().map(|x| format!("{x}")).collect(),
        }
    }

    /// Checks nonnegativity and normalization (or the tail shape).
    pub fn validate(&self) -> Result<()> {
        let slack = (10.0 * self.tolerance()).max(if self.is_exact() { 0.0 } else { 1e-9 });
        let v = self.to_f64();
        let fail = |what: String| Err(Error::NotADistribution(format!("{} vector {what}", self.kind)));
        if let IndexValues::Exact(ex) = &self.values {
            if ex.iter().any(|x| !scalar::is_nonnegative(x)) {
                return fail("has a negative entry".into());
            }
        } else if v.iter().any(|&x| !(x >= -slack)) {
            return fail(format!("has a negative entry: {v:?}"));
        }
        if self.kind == IndexKind::Tail {
            let (first, last) = (v[0], v[v.len() - 1]);
            if (first - 1.0).abs() > slack || last.abs() > slack {
                return fail(format!("does not run from 1 to 0: {v:?}"));
            }
            if v.windows(2).any(|w| w[1] > w[0] + slack) {
                return fail(format!("is not nonincreasing: {v:?}"));
            }
            return Ok(());
        }
        let total = match &self.values {
            IndexValues::Exact(ex) => {
                let s = ex.iter().fold(scalar::rational_zero(), |acc, x| acc + x);
                if s != scalar::rational(1, 1) {
                    return fail(format!("sums to {s}"));
                }
                return Ok(());
            }
            IndexValues::Float(f) => f.iter().sum::<f64>(),
        };
        if (total - 1.0).abs() > slack {
            return fail(format!("sums to {total}"));
        }
        Ok(())
    }
}

fn check_dims(phi: &StructureFunction, n: usize) -> Result<()> {
    if phi.n() != n {
        Err(Error::ComponentMismatch {
            structure: phi.n(),
            model: n,
        })
    } else {
        Ok(())
    }
}

fn add_scaled<T: Scalar>(acc: &mut T, value: &T, coefficient: i64) {
    if coefficient == 0 {
        return;
    }
    let term = value.clone() * T::from_u64(coefficient.unsigned_abs());
    if coefficient > 0 {
        *acc += &term;
    } else {
        *acc -= &term;
    }
}

/// `Σ_{A⊆[n]∖{j}} q_j(A) Δ_jφ(A)` for each `j`.
pub fn bp_from_qj<T: Scalar>(phi: &StructureFunction, qj: &[Vec<T>]) -> Vec<T> {
    let n = phi.n();
    (0..n)
        .map(|j| {
            let mut acc = T::zero();
            for a in SubsetIndex::all(n).filter(|a| !a.contains(j)) {
                if phi.delta_unchecked(j, a) == 1 {
                    acc += &qj[j][a.bits()];
                }
            }
            acc
        })
        .collect()
}

/// `Σ_{A⊆[n]∖{j}} r_j(A) m_φ(A∪{j})` for each `j`.
pub fn bp_from_rj<T: Scalar>(phi: &StructureFunction, rj: &[Vec<T>]) -> Vec<T> {
    let n = phi.n();
    let m = phi.mobius_transform();
    (0..n)
        .map(|j| {
            let mut acc = T::zero();
            for a in SubsetIndex::all(n).filter(|a| !a.contains(j)) {
                add_scaled(&mut acc, &rj[j][a.bits()], m[a.with(j).bits()]);
            }
            acc
        })
        .collect()
}

/// `L_ℓ = Σ_{|A|=ℓ} q(A) φ(A)` for `ℓ = 0..=n`.
fn level_sums<T: Scalar>(phi: &StructureFunction, q: &[T]) -> Vec<T> {
    let n = phi.n();
    let mut levels = vec![T::zero(); n + 1];
    for a in SubsetIndex::all(n) {
        if phi.value(a) {
            levels[a.len()] += &q[a.bits()];
        }
    }
    levels
}

/// `p_k = L_{n−k+1} − L_{n−k}` for `k = 1..=n`.
pub fn signature_from_q<T: Scalar>(phi: &StructureFunction, q: &[T]) -> Vec<T> {
    let n = phi.n();
    let levels = level_sums(phi, q);
    (1..=n)
        .map(|k| levels[n - k + 1].clone() - levels[n - k].clone())
        .collect()
}

/// `Pr(T > X_{k:n}) = L_{n−k}` for `k = 0..=n`.
pub fn tail_from_q<T: Scalar>(phi: &StructureFunction, q: &[T]) -> Vec<T> {
    let n = phi.n();
    let levels = level_sums(phi, q);
    (0..=n).map(|k| levels[n - k].clone()).collect()
}

/// `p_k = Σ_A m_φ(A) Pr(X_{k:n} = min_{i∈A} X_i)`, where the probability is
/// `Σ_{B⊇A,|B|=n−k+1} q(B) − Σ_{B⊇A,|B|=n−k} q(B)`.
pub fn signature_mobius_from_q<T: Scalar>(phi: &StructureFunction, q: &[T]) -> Vec<T> {
    let n = phi.n();
    let m = phi.mobius_transform();
    // above[ℓ][A] = Σ_{B⊇A, |B|=ℓ} q(B)
    let above: Vec<Vec<T>> = (0..=n)
        .map(|level| {
            let mut row: Vec<T> = SubsetIndex::all(n)
                .map(|b| if b.len() == level { q[b.bits()].clone() } else { T::zero() })
                .collect();
            subset::superset_sums(&mut row);
            row
        })
        .collect();
    (1..=n)
        .map(|k| {
            let mut acc = T::zero();
            for a in SubsetIndex::all(n) {
                let coefficient = m[a.bits()];
                if coefficient != 0 {
                    let pr = above[n - k + 1][a.bits()].clone() - above[n - k][a.bits()].clone();
                    add_scaled(&mut acc, &pr, coefficient);
                }
            }
            acc
        })
        .collect()
}

/// Nominal tolerance of a vector built from `terms` table entries.
fn propagated(probs: &OrderingProbabilities, terms: usize) -> f64 {
    probs.tolerance() * terms as f64
}

fn build<F, G>(probs: &OrderingProbabilities, kind: IndexKind, terms: usize, exact: F, float: G) -> IndexVector
where
    F: FnOnce(&OrderingTables<BigRational>) -> Vec<BigRational>,
    G: FnOnce(&OrderingTables<f64>) -> Vec<f64>,
{
    match &probs.tables {
        Tables::Exact(t) => IndexVector::exact(kind, exact(t)),
        Tables::Float { tables, .. } => {
            let tol = propagated(probs, terms);
            IndexVector::float(kind, float(tables), tol)
        }
    }
}

pub fn bp_from_ordering(phi: &StructureFunction, probs: &OrderingProbabilities) -> Result<IndexVector> {
    check_dims(phi, probs.n())?;
    let terms = phi.n();
    Ok(build(
        probs,
        IndexKind::BarlowProschan,
        terms,
        |t| bp_from_qj(phi, &t.qj),
        |t| bp_from_qj(phi, &t.qj),
    ))
}

pub fn bp_mobius_from_ordering(phi: &StructureFunction, probs: &OrderingProbabilities) -> Result<IndexVector> {
    check_dims(phi, probs.n())?;
    let terms = phi.n() * phi.mobius_transform().iter().map(|c| c.unsigned_abs() as usize).sum::<usize>().max(1);
    Ok(build(
        probs,
        IndexKind::BarlowProschan,
        terms,
        |t| bp_from_rj(phi, &t.rj),
        |t| bp_from_rj(phi, &t.rj),
    ))
}

pub fn signature_from_ordering(phi: &StructureFunction, probs: &OrderingProbabilities) -> Result<IndexVector> {
    check_dims(phi, probs.n())?;
    Ok(build(
        probs,
        IndexKind::SignatureP,
        2 * phi.n(),
        |t| signature_from_q(phi, &t.q),
        |t| signature_from_q(phi, &t.q),
    ))
}

pub fn signature_mobius_from_ordering(phi: &StructureFunction, probs: &OrderingProbabilities) -> Result<IndexVector> {
    check_dims(phi, probs.n())?;
    let terms = 2 * phi.n() * phi.mobius_transform().iter().map(|c| c.unsigned_abs() as usize).sum::<usize>().max(1);
    Ok(build(
        probs,
        IndexKind::SignatureP,
        terms,
        |t| signature_mobius_from_q(phi, &t.q),
        |t| signature_mobius_from_q(phi, &t.q),
    ))
}

pub fn tail_from_ordering(phi: &StructureFunction, probs: &OrderingProbabilities) -> Result<IndexVector> {
    check_dims(phi, probs.n())?;
    Ok(build(
        probs,
        IndexKind::Tail,
        phi.n(),
        |t| tail_from_q(phi, &t.q),
        |t| tail_from_q(phi, &t.q),
    ))
}

fn ordering_for(phi: &StructureFunction, model: &JointLifetimeModel, opts: &EvalOptions) -> Result<OrderingProbabilities> {
    check_dims(phi, model.n())?;
    ordering_probabilities(model, opts)
}

/// Barlow-Proschan index `I_BP^(j) = Pr(T = X_j)` through the ordering
/// probabilities `q_j` and the discrete derivatives of `φ`.
pub fn barlow_proschan(phi: &StructureFunction, model: &JointLifetimeModel, opts: &EvalOptions) -> Result<IndexVector> {
    bp_from_ordering(phi, &ordering_for(phi, model, opts)?)
}

/// The same index through `r_j` and the Möbius transform of `φ`.
pub fn barlow_proschan_mobius(phi: &StructureFunction, model: &JointLifetimeModel, opts: &EvalOptions) -> Result<IndexVector> {
    if opts.method == Method::Exact && matches!(model, JointLifetimeModel::IndependentWeibull(_)) {
        return Err(Error::MethodUnavailable {
            method: "exact",
            model: model.kind(),
        });
    }
    bp_mobius_from_ordering(phi, &ordering_for(phi, model, opts)?)
}

/// Extended signature `p_k = Pr(T = X_{k:n})`.
pub fn signature_p(phi: &StructureFunction, model: &JointLifetimeModel, opts: &EvalOptions) -> Result<IndexVector> {
    signature_from_ordering(phi, &ordering_for(phi, model, opts)?)
}

pub fn signature_mobius(phi: &StructureFunction, model: &JointLifetimeModel, opts: &EvalOptions) -> Result<IndexVector> {
    signature_mobius_from_ordering(phi, &ordering_for(phi, model, opts)?)
}

pub fn tail_signature(phi: &StructureFunction, model: &JointLifetimeModel, opts: &EvalOptions) -> Result<IndexVector> {
    tail_from_ordering(phi, &ordering_for(phi, model, opts)?)
}

/// Shapley-Shubik value of `φ`: `b_j = Σ Δ_jφ(A) / (n C(n−1, |A|))`.
pub fn structural_b(phi: &StructureFunction) -> IndexVector {
    let n = phi.n();
    let weights: Vec<BigRational> = (0..n)
        .map(|k| BigRational::reciprocal_of(n as u64 * binomial(n - 1, k)))
        .collect();
    let values = (0..n)
        .map(|j| {
            // count pivotal sets per size first, then weight
            let mut counts = vec![0u64; n];
            for a in SubsetIndex::all(n).filter(|a| !a.contains(j)) {
                counts[a.len()] += phi.delta_unchecked(j, a) as u64;
            }
            counts
                .iter()
                .zip(&weights)
                .fold(scalar::rational_zero(), |acc, (&c, w)| acc + w.clone() * BigRational::from_u64(c))
        })
        .collect();
    IndexVector::exact(IndexKind::StructuralB, values)
}

/// Structural signature `s_k` from working-set counts per size.
pub fn structural_signature(phi: &StructureFunction) -> IndexVector {
    let n = phi.n();
    let mut working = vec![0u64; n + 1];
    for a in SubsetIndex::all(n) {
        working[a.len()] += phi.phi(a) as u64;
    }
    let level = |size: usize| BigRational::from_u64(working[size]) / BigRational::from_u64(binomial(n, size));
    let values = (1..=n).map(|k| level(n - k + 1) - level(n - k)).collect();
    IndexVector::exact(IndexKind::StructuralS, values)
}

/// Normalized Shannon entropy `−Σ w_i ln w_i / ln n`, with `0 ln 0 = 0`.
///
/// Entries down to `−1e-12` are treated as zero.
pub fn symmetry_index(v: &IndexVector) -> Result<f64> {
    symmetry_index_of(&v.to_f64(), v.tolerance())
}

pub fn symmetry_index_of(w: &[f64], tol: f64) -> Result<f64> {
    let n = w.len();
    if n < 2 {
        return Err(Error::NotADistribution("entropy needs at least two entries".into()));
    }
    if let Some(x) = w.iter().find(|&&x| !(x >= -1e-12)) {
        return Err(Error::NotADistribution(format!("negative entry {x}")));
    }
    let total: f64 = w.iter().sum();
    if (total - 1.0).abs() > (10.0 * tol).max(1e-9) {
        return Err(Error::NotADistribution(format!("entries sum to {total}")));
    }
    // float entries within rounding of zero carry no mass
    let floor = if tol > 0.0 { tol.max(1e-12) } else { 0.0 };
    let h: f64 = w
        .iter()
        .filter(|&&x| x > floor)
        .map(|&x| -x * x.ln())
        .sum();
    let h = h / (n as f64).ln();
    // also maps −0.0 to 0.0
    Ok(if h <= floor { 0.0 } else { h.min(1.0) })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BpEqualsB {
    /// `I_BP = b` for every structure on `n` components.
    pub holds_for_all_structures: bool,
    /// First `(j, A)` (0-based `j`) where `q_j(A) ≠ 1/(n C(n−1,|A|))`.
    pub witness: Option<(usize, SubsetIndex)>,
    /// Whether every `q_j(A)` is strictly positive.
    pub positive: bool,
}

fn float_slack(probs: &OrderingProbabilities) -> f64 {
    (10.0 * probs.tolerance()).max(1e-9)
}

/// Tests whether the ordering law makes `I_BP = b` for every structure.
pub fn bp_equals_b_check(model: &JointLifetimeModel, opts: &EvalOptions) -> Result<BpEqualsB> {
    bp_equals_b_from_ordering(&ordering_probabilities(model, opts)?)
}

pub fn bp_equals_b_from_ordering(probs: &OrderingProbabilities) -> Result<BpEqualsB> {
    let n = probs.n();
    let slack = float_slack(probs);
    let mut witness = None;
    let mut positive = true;
    for j in 0..n {
        for a in SubsetIndex::all(n).filter(|a| !a.contains(j)) {
            let matches = match &probs.tables {
                Tables::Exact(t) => {
                    let v = &t.qj[j][a.bits()];
                    positive &= *v > scalar::rational_zero();
                    *v == crate::lifetimes::exchangeable_qj(n, j, a)?
                }
                Tables::Float { tables, .. } => {
                    let v = tables.qj[j][a.bits()];
                    positive &= v > 0.0;
                    let target = 1.0 / (n as f64 * binomial(n - 1, a.len()) as f64);
                    (v - target).abs() <= slack
                }
            };
            if !matches && witness.is_none() {
                witness = Some((j, a));
            }
        }
    }
    Ok(BpEqualsB {
        holds_for_all_structures: witness.is_none(),
        witness,
        positive,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct QSymmetry {
    /// `q(A) = 1/C(n,|A|)` for every `A`, so `p = s` for every structure.
    pub symmetric: bool,
    pub witness: Option<SubsetIndex>,
}

pub fn q_symmetry_from_ordering(probs: &OrderingProbabilities) -> QSymmetry {
    let n = probs.n();
    let slack = float_slack(probs);
    let witness = SubsetIndex::all(n).find(|&a| match &probs.tables {
        Tables::Exact(t) => t.q[a.bits()] != BigRational::reciprocal_of(binomial(n, a.len())),
        Tables::Float { tables, .. } => {
            (tables.q[a.bits()] - 1.0 / binomial(n, a.len()) as f64).abs() > slack
        }
    });
    QSymmetry {
        symmetric: witness.is_none(),
        witness,
    }
}

pub fn q_symmetry_check(model: &JointLifetimeModel, opts: &EvalOptions) -> Result<QSymmetry> {
    Ok(q_symmetry_from_ordering(&ordering_probabilities(model, opts)?))
}
