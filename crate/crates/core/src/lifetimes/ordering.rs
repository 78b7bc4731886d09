use std::fmt;
use std::str::FromStr;

use num::{BigRational, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lifetimes::model::{
    IndependentMarginals, IndependentWeibull, JointLifetimeModel, LifetimeDistribution,
    MarginalDistribution, OrderDistribution,
};
use crate::lifetimes::quadrature::{self, Integral, QuadratureOptions};
use crate::lifetimes::sampling;
use crate::lifetimes::weibull;
use crate::scalar::Scalar;
use crate::subset::{self, binomial, SubsetIndex};

/// Ordering tables are materialized over all `n · 2^n` entries up to this
/// size.
pub const MAX_TABLE_COMPONENTS: usize = 16;

/// Monte Carlo tallies keep one counter per `(j, A)`.
pub const MAX_MONTE_CARLO_TABLE_COMPONENTS: usize = 12;

/// Tolerance attached to floating closed forms.
const CLOSED_FORM_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Auto,
    Exact,
    Quadrature,
    ClosedForm,
    MonteCarlo,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Auto => "auto",
            Method::Exact => "exact",
            Method::Quadrature => "quadrature",
            Method::ClosedForm => "closed_form",
            Method::MonteCarlo => "monte_carlo",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(Method::Auto),
            "exact" => Ok(Method::Exact),
            "quadrature" => Ok(Method::Quadrature),
            "closed_form" | "closed-form" => Ok(Method::ClosedForm),
            "monte_carlo" | "monte-carlo" | "mc" => Ok(Method::MonteCarlo),
            other => Err(Error::InvalidParameter(format!("unknown method `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalOptions {
    pub method: Method,
    /// Absolute tolerance per quadrature.
    pub tol: f64,
    pub max_subdivisions: usize,
    pub samples: u64,
    pub seed: u64,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            method: Method::Auto,
            tol: quadrature::DEFAULT_TOLERANCE,
            max_subdivisions: quadrature::DEFAULT_MAX_SUBDIVISIONS,
            samples: 100_000,
            seed: 0,
        }
    }
}

impl EvalOptions {
    pub fn with_method(method: Method) -> Self {
        EvalOptions {
            method,
            ..Default::default()
        }
    }

    fn quadrature(&self) -> QuadratureOptions {
        QuadratureOptions {
            tol: self.tol,
            max_subdivisions: self.max_subdivisions,
        }
    }
}

/// `qj[j][A]`, `q[A]` and `rj[j][A]` over all subsets. Entries of `qj[j]`
/// and `rj[j]` with `j ∈ A` are zero and carry no meaning.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderingTables<T> {
    pub n: usize,
    pub qj: Vec<Vec<T>>,
    pub q: Vec<T>,
    pub rj: Vec<Vec<T>>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Tables {
    Exact(OrderingTables<BigRational>),
    Float { tables: OrderingTables<f64>, tol: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrderingProbabilities {
    /// The evaluation path actually used.
    pub method: Method,
    pub tables: Tables,
    /// Tied draws rejected by the Monte Carlo path.
    pub redraws: u64,
}

impl OrderingProbabilities {
    pub fn n(&self) -> usize {
        match &self.tables {
            Tables::Exact(t) => t.n,
            Tables::Float { tables, .. } => tables.n,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.tables, Tables::Exact(_))
    }

    /// Per-entry tolerance; zero on the exact path.
    pub fn tolerance(&self) -> f64 {
        match &self.tables {
            Tables::Exact(_) => 0.0,
            Tables::Float { tol, .. } => *tol,
        }
    }

    pub fn qj(&self, j: usize, a: SubsetIndex) -> f64 {
        match &self.tables {
            Tables::Exact(t) => t.qj[j][a.bits()].to_f64(),
            Tables::Float { tables, .. } => tables.qj[j][a.bits()],
        }
    }

    pub fn q(&self, a: SubsetIndex) -> f64 {
        match &self.tables {
            Tables::Exact(t) => t.q[a.bits()].to_f64(),
            Tables::Float { tables, .. } => tables.q[a.bits()],
        }
    }

    pub fn rj(&self, j: usize, a: SubsetIndex) -> f64 {
        match &self.tables {
            Tables::Exact(t) => t.rj[j][a.bits()].to_f64(),
            Tables::Float { tables, .. } => tables.rj[j][a.bits()],
        }
    }

    pub fn to_float(&self) -> OrderingTables<f64> {
        match &self.tables {
            Tables::Float { tables, .. } => tables.clone(),
            Tables::Exact(t) => OrderingTables {
                n: t.n,
                qj: t.qj.iter().map(|row| row.iter().map(Scalar::to_f64).collect()).collect(),
                q: t.q.iter().map(Scalar::to_f64).collect(),
                rj: t.rj.iter().map(|row| row.iter().map(Scalar::to_f64).collect()).collect(),
            },
        }
    }
}

fn check_entry(n: usize, j: usize, a: SubsetIndex) -> Result<()> {
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

/// `1 / (n · C(n−1, |A|))`: the ordering probability under exchangeability.
pub fn exchangeable_qj(n: usize, j: usize, a: SubsetIndex) -> Result<BigRational> {
    check_entry(n, j, a)?;
    Ok(exchangeable_weight(n, a.len()))
}

pub(crate) fn exchangeable_weight<T: Scalar>(n: usize, size: usize) -> T {
    T::reciprocal_of(n as u64 * binomial(n - 1, size))
}

/// Sum of the probabilities of orderings whose last `|A|` entries are `A`
/// and whose entry just before them is `j`.
pub fn order_distribution_qj(model: &OrderDistribution, j: usize, a: SubsetIndex) -> Result<BigRational> {
    model.check_enumerable()?;
    let n = model.n();
    check_entry(n, j, a)?;
    let position = n - a.len() - 1;
    let mut total = BigRational::zero();
    for (perm, p) in model.support() {
        if perm[position] == j && SubsetIndex::from_members(perm[position + 1..].iter().copied()) == a {
            total += p;
        }
    }
    Ok(total)
}

pub(crate) fn independent_qj_marginals(
    marginals: &[MarginalDistribution],
    j: usize,
    a: SubsetIndex,
    opts: QuadratureOptions,
) -> Result<Integral> {
    let n = marginals.len();
    let survivors: Vec<&MarginalDistribution> = a.members().map(|i| &marginals[i]).collect();
    let failed: Vec<&MarginalDistribution> =
        a.with(j).complement(n).members().map(|i| &marginals[i]).collect();
    let fj = &marginals[j];
    quadrature::integrate_half_line(
        |t| {
            let mut v = fj.pdf(t);
            for m in &survivors {
                if v == 0.0 {
                    break;
                }
                v *= m.survival(t);
            }
            for m in &failed {
                if v == 0.0 {
                    break;
                }
                v *= m.cdf(t);
            }
            v
        },
        opts,
    )
}

pub(crate) fn independent_rj_marginals(
    marginals: &[MarginalDistribution],
    j: usize,
    a: SubsetIndex,
    opts: QuadratureOptions,
) -> Result<Integral> {
    if a.is_empty() {
        return Ok(Integral {
            value: 1.0,
            error: 0.0,
            subdivisions: 0,
        });
    }
    let survivors: Vec<&MarginalDistribution> = a.members().map(|i| &marginals[i]).collect();
    let fj = &marginals[j];
    quadrature::integrate_half_line(
        |t| {
            let mut v = fj.pdf(t);
            for m in &survivors {
                if v == 0.0 {
                    break;
                }
                v *= m.survival(t);
            }
            v
        },
        opts,
    )
}

/// `∫ f_j Π_{i∈A} (1 − F_i) Π_{i∉A∪{j}} F_i dt` by adaptive quadrature.
pub fn independent_qj(model: &IndependentMarginals, j: usize, a: SubsetIndex, tol: f64) -> Result<f64> {
    check_entry(model.n(), j, a)?;
    let opts = QuadratureOptions {
        tol,
        ..Default::default()
    };
    independent_qj_marginals(model.marginals(), j, a, opts).map(|i| i.value)
}

/// `∫ f_j Π_{i∈A} (1 − F_i) dt`; exactly 1 for `A = ∅`.
pub fn independent_rj(model: &IndependentMarginals, j: usize, a: SubsetIndex, tol: f64) -> Result<f64> {
    check_entry(model.n(), j, a)?;
    let opts = QuadratureOptions {
        tol,
        ..Default::default()
    };
    independent_rj_marginals(model.marginals(), j, a, opts).map(|i| i.value)
}

fn check_table<T>(table: &[Vec<T>]) -> Result<usize> {
    let n = table.len();
    if n == 0 || n > MAX_TABLE_COMPONENTS {
        return Err(Error::IncompleteTable(format!("table has {n} rows")));
    }
    for (j, row) in table.iter().enumerate() {
        if row.len() != 1 << n {
            return Err(Error::IncompleteTable(format!(
                "row {} has {} entries, expected {}",
                j + 1,
                row.len(),
                1usize << n
            )));
        }
    }
    Ok(n)
}

fn masked_rows<T: Scalar>(table: &[Vec<T>], transform: fn(&mut [T])) -> Vec<Vec<T>> {
    table
        .iter()
        .enumerate()
        .map(|(j, row)| {
            let mut out: Vec<T> = row
                .iter()
                .enumerate()
                .map(|(a, v)| if a >> j & 1 == 1 { T::zero() } else { v.clone() })
                .collect();
            transform(&mut out);
            out
        })
        .collect()
}

/// `r_j(A) = Σ_{B ⊇ A} q_j(B)` over `B ⊆ [n]∖{j}`.
pub fn rj_from_qj<T: Scalar>(qj: &[Vec<T>]) -> Result<Vec<Vec<T>>> {
    check_table(qj)?;
    Ok(masked_rows(qj, subset::superset_sums))
}

/// `q_j(A) = Σ_{B ⊇ A} (−1)^{|B|−|A|} r_j(B)` over `B ⊆ [n]∖{j}`.
pub fn qj_from_rj<T: Scalar>(rj: &[Vec<T>]) -> Result<Vec<Vec<T>>> {
    check_table(rj)?;
    Ok(masked_rows(rj, subset::inverse_superset_sums))
}

fn agree<T: Scalar>(a: &T, b: &T, tol: f64) -> bool {
    if T::is_exact() {
        a == b
    } else {
        (a.clone() - b.clone()).to_f64().abs() <= tol
    }
}

/// `q(A) = Σ_{j∉A} q_j(A)` with `q([n]) = 1`, cross-checked against
/// `q(A) = Σ_{j∈A} q_j(A∖{j})`.
pub fn q_from_qj<T: Scalar>(qj: &[Vec<T>], tol: f64) -> Result<Vec<T>> {
    let n = check_table(qj)?;
    let full = SubsetIndex::full(n);
    let mut q = Vec::with_capacity(1 << n);
    for a in SubsetIndex::all(n) {
        let below = a.members().fold(T::zero(), |acc, j| acc + qj[j][a.without(j).bits()].clone());
        if a == full {
            q.push(T::one());
            if !agree(&below, &T::one(), tol) {
                return Err(Error::InconsistentTable {
                    subset: a,
                    left: 1.0,
                    right: below.to_f64(),
                });
            }
            continue;
        }
        let above = a
            .complement(n)
            .members()
            .fold(T::zero(), |acc, j| acc + qj[j][a.bits()].clone());
        let reference = if a.is_empty() { T::one() } else { below };
        if !agree(&above, &reference, tol) {
            return Err(Error::InconsistentTable {
                subset: a,
                left: above.to_f64(),
                right: reference.to_f64(),
            });
        }
        q.push(if a.is_empty() { T::one() } else { above });
    }
    Ok(q)
}

fn consistency_tolerance(n: usize, tol: f64) -> f64 {
    2.0 * n as f64 * tol + 1e-12
}

fn assemble<T: Scalar>(n: usize, qj: Vec<Vec<T>>, rj: Option<Vec<Vec<T>>>, tol: f64) -> Result<OrderingTables<T>> {
    let q = q_from_qj(&qj, consistency_tolerance(n, tol))?;
    let rj = match rj {
        Some(r) => r,
        None => rj_from_qj(&qj)?,
    };
    Ok(OrderingTables { n, qj, q, rj })
}

fn check_table_size(n: usize, max: usize) -> Result<()> {
    if n > max {
        Err(Error::TooManyComponents { n, max })
    } else {
        Ok(())
    }
}

fn exchangeable_tables(n: usize) -> Result<OrderingTables<BigRational>> {
    check_table_size(n, MAX_TABLE_COMPONENTS)?;
    let weights: Vec<BigRational> = (0..n).map(|k| exchangeable_weight(n, k)).collect();
    let qj = (0..n)
        .map(|j| {
            SubsetIndex::all(n)
                .map(|a| {
                    if a.contains(j) {
                        BigRational::zero()
                    } else {
                        weights[a.len()].clone()
                    }
                })
                .collect()
        })
        .collect();
    assemble(n, qj, None, 0.0)
}

fn order_distribution_tables(d: &OrderDistribution) -> Result<OrderingTables<BigRational>> {
    d.check_enumerable()?;
    let n = d.n();
    let mut qj = vec![vec![BigRational::zero(); 1 << n]; n];
    for (perm, p) in d.support() {
        let mut better = SubsetIndex::EMPTY;
        for &j in perm.iter().rev() {
            qj[j][better.bits()] += p;
            better = better.with(j);
        }
    }
    assemble(n, qj, None, 0.0)
}

fn entries(n: usize) -> Vec<(usize, SubsetIndex)> {
    (0..n)
        .flat_map(|j| SubsetIndex::all(n).filter(move |a| !a.contains(j)).map(move |a| (j, a)))
        .collect()
}

fn scatter(n: usize, keys: &[(usize, SubsetIndex)], values: Vec<f64>) -> Vec<Vec<f64>> {
    let mut table = vec![vec![0.0; 1 << n]; n];
    for (&(j, a), v) in keys.iter().zip(values) {
        table[j][a.bits()] = v;
    }
    table
}

fn weibull_tables(w: &IndependentWeibull, opts: &EvalOptions) -> Result<(OrderingTables<f64>, f64)> {
    let n = w.n();
    check_table_size(n, MAX_TABLE_COMPONENTS)?;
    let powered = weibull::powered(w);
    let keys = entries(n);
    let quad = opts.quadrature();
    let qj: Vec<f64> = keys
        .par_iter()
        .map(|&(j, a)| weibull::qj_with(w, &powered, j, a, quad))
        .collect::<Result<_>>()?;
    let rj: Vec<f64> = keys.iter().map(|&(j, a)| weibull::rj_with(&powered, j, a)).collect();
    let tol = if n - 1 > weibull::CANCELLATION_GUARD {
        opts.tol.max(CLOSED_FORM_TOLERANCE)
    } else {
        CLOSED_FORM_TOLERANCE
    };
    let tables = assemble(n, scatter(n, &keys, qj), Some(scatter(n, &keys, rj)), tol)?;
    Ok((tables, tol))
}

fn quadrature_tables(marginals: &[MarginalDistribution], opts: &EvalOptions) -> Result<OrderingTables<f64>> {
    let n = marginals.len();
    check_table_size(n, MAX_TABLE_COMPONENTS)?;
    let keys = entries(n);
    let quad = opts.quadrature();
    let qj: Vec<f64> = keys
        .par_iter()
        .map(|&(j, a)| independent_qj_marginals(marginals, j, a, quad).map(|i| i.value))
        .collect::<Result<_>>()?;
    let rj: Vec<f64> = keys
        .par_iter()
        .map(|&(j, a)| independent_rj_marginals(marginals, j, a, quad).map(|i| i.value))
        .collect::<Result<_>>()?;
    assemble(n, scatter(n, &keys, qj), Some(scatter(n, &keys, rj)), opts.tol)
}

const MC_CHUNK: u64 = 4096;

fn monte_carlo_tables(model: &JointLifetimeModel, opts: &EvalOptions) -> Result<(OrderingTables<f64>, f64, u64)> {
    let n = model.n();
    check_table_size(n, MAX_MONTE_CARLO_TABLE_COMPONENTS)?;
    if opts.samples == 0 {
        return Err(Error::InvalidParameter("Monte Carlo needs at least one sample".into()));
    }
    let chunks: Vec<u64> = (0..opts.samples.div_ceil(MC_CHUNK)).collect();
    let tallies: Vec<(Vec<u64>, u64)> = chunks
        .par_iter()
        .map(|&c| {
            let mut counts = vec![0u64; n << n];
            let mut redraws = 0u64;
            let mut order: Vec<usize> = (0..n).collect();
            for i in c * MC_CHUNK..((c + 1) * MC_CHUNK).min(opts.samples) {
                let d = sampling::draw(model, opts.seed, i)?;
                redraws += d.redraws as u64;
                order.sort_by(|&x, &y| d.lifetimes[x].total_cmp(&d.lifetimes[y]));
                let mut better = SubsetIndex::EMPTY;
                for &j in order.iter().rev() {
                    counts[(j << n) | better.bits()] += 1;
                    better = better.with(j);
                }
            }
            Ok((counts, redraws))
        })
        .collect::<Result<_>>()?;
    let mut counts = vec![0u64; n << n];
    let mut redraws = 0;
    for (c, r) in tallies {
        for (acc, v) in counts.iter_mut().zip(c) {
            *acc += v;
        }
        redraws += r;
    }
    let total = opts.samples as f64;
    let qj: Vec<Vec<f64>> = (0..n)
        .map(|j| counts[j << n..(j + 1) << n].iter().map(|&c| c as f64 / total).collect())
        .collect();
    let tol = 4.0 * (0.25 / total).sqrt();
    Ok((assemble(n, qj, None, 1e-12)?, tol, redraws))
}

fn exact_to_float(t: OrderingTables<BigRational>) -> OrderingTables<f64> {
    let conv = |v: Vec<BigRational>| v.iter().map(Scalar::to_f64).collect::<Vec<f64>>();
    OrderingTables {
        n: t.n,
        qj: t.qj.into_iter().map(conv).collect(),
        q: conv(t.q),
        rj: t.rj.into_iter().map(conv).collect(),
    }
}

/// Evaluates `q_j`, `q` and `r_j` for every subset along the path selected by
/// `opts.method`.
///
/// `Auto` picks exact enumeration for exchangeable and ordering laws, the
/// closed form for Weibull families, quadrature for other independent
/// marginals and Monte Carlo for empirical samplers.
pub fn ordering_probabilities(model: &JointLifetimeModel, opts: &EvalOptions) -> Result<OrderingProbabilities> {
    use JointLifetimeModel as M;
    use Method::*;

    let unavailable = |method: Method| Error::MethodUnavailable {
        method: method.as_str(),
        model: model.kind(),
    };
    let float = |method, tables, tol| OrderingProbabilities {
        method,
        tables: Tables::Float { tables, tol },
        redraws: 0,
    };

    match (model, opts.method) {
        (_, MonteCarlo) | (M::EmpiricalSampler(_), Auto) => {
            let (tables, tol, redraws) = monte_carlo_tables(model, opts)?;
            Ok(OrderingProbabilities {
                method: MonteCarlo,
                tables: Tables::Float { tables, tol },
                redraws,
            })
        }
        (M::Exchangeable { n }, Auto | Exact | ClosedForm) => Ok(OrderingProbabilities {
            method: if opts.method == ClosedForm { ClosedForm } else { Exact },
            tables: Tables::Exact(exchangeable_tables(*n)?),
            redraws: 0,
        }),
        (M::OrderDistribution(d), Auto | Exact) => {
            let tables = order_distribution_tables(d)?;
            if d.is_exact() {
                Ok(OrderingProbabilities {
                    method: Exact,
                    tables: Tables::Exact(tables),
                    redraws: 0,
                })
            } else {
                Ok(float(Exact, exact_to_float(tables), 1e-12))
            }
        }
        (M::IndependentWeibull(w), Auto | ClosedForm) => {
            let (tables, tol) = weibull_tables(w, opts)?;
            Ok(float(ClosedForm, tables, tol))
        }
        (M::IndependentWeibull(w), Quadrature) => {
            Ok(float(Quadrature, quadrature_tables(&w.marginals(), opts)?, opts.tol))
        }
        (M::IndependentMarginals(m), ClosedForm) => {
            let w = m.as_weibull().ok_or_else(|| unavailable(ClosedForm))?;
            let (tables, tol) = weibull_tables(&w, opts)?;
            Ok(float(ClosedForm, tables, tol))
        }
        (M::IndependentMarginals(m), Auto | Quadrature) => {
            Ok(float(Quadrature, quadrature_tables(m.marginals(), opts)?, opts.tol))
        }
        (_, method) => Err(unavailable(method)),
    }
}
