use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num::{BigRational, One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::subset::MAX_COMPONENTS;

/// Permutation enumeration (`n!` orderings) is limited to this many
/// components.
pub const MAX_ENUMERATED_COMPONENTS: usize = 8;

/// A univariate lifetime law on `(0, ∞)` with `F(0) = 0` and no atoms.
pub trait LifetimeDistribution: Send + Sync {
    fn cdf(&self, t: f64) -> f64;
    fn pdf(&self, t: f64) -> f64;
    fn survival(&self, t: f64) -> f64 {
        1.0 - self.cdf(t)
    }
    /// Inverse of the survival function: the `t` with `S(t) = u`.
    fn survival_quantile(&self, u: f64) -> f64;
}

#[derive(Clone)]
pub enum MarginalDistribution {
    Exponential { rate: f64 },
    /// `F(t) = 1 − exp(−(λt)^α)`.
    Weibull { lambda: f64, alpha: f64 },
    Custom(Arc<dyn LifetimeDistribution>),
}

impl fmt::Debug for MarginalDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Exponential { rate } => f.debug_struct("Exponential").field("rate", rate).finish(),
            Self::Weibull { lambda, alpha } => f
                .debug_struct("Weibull")
                .field("lambda", lambda)
                .field("alpha", alpha)
                .finish(),
            Self::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidModel(format!("{name} must be positive and finite, got {v}")))
    }
}

impl MarginalDistribution {
    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Exponential { rate } => positive("rate", *rate),
            Self::Weibull { lambda, alpha } => {
                positive("lambda", *lambda)?;
                positive("alpha", *alpha)
            }
            Self::Custom(_) => Ok(()),
        }
    }

    /// `(λ, α)` when this marginal belongs to the Weibull family.
    pub fn weibull_parameters(&self) -> Option<(f64, f64)> {
        match self {
            Self::Exponential { rate } => Some((*rate, 1.0)),
            Self::Weibull { lambda, alpha } => Some((*lambda, *alpha)),
            Self::Custom(_) => None,
        }
    }
}

impl LifetimeDistribution for MarginalDistribution {
    fn cdf(&self, t: f64) -> f64 {
        match self {
            Self::Custom(d) => d.cdf(t),
            _ => -(-self.cumulative_hazard(t)).exp_m1(),
        }
    }

    fn pdf(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        match self {
            Self::Exponential { rate } => rate * (-rate * t).exp(),
            Self::Weibull { lambda, alpha } => {
                let z = (lambda * t).powf(*alpha);
                if z.is_infinite() {
                    return 0.0;
                }
                alpha * lambda * (lambda * t).powf(alpha - 1.0) * (-z).exp()
            }
            Self::Custom(d) => d.pdf(t),
        }
    }

    fn survival(&self, t: f64) -> f64 {
        match self {
            Self::Custom(d) => d.survival(t),
            _ => (-self.cumulative_hazard(t)).exp(),
        }
    }

    fn survival_quantile(&self, u: f64) -> f64 {
        match self {
            Self::Exponential { rate } => -u.ln() / rate,
            Self::Weibull { lambda, alpha } => (-u.ln()).powf(1.0 / alpha) / lambda,
            Self::Custom(d) => d.survival_quantile(u),
        }
    }
}

impl MarginalDistribution {
    fn cumulative_hazard(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        match self {
            Self::Exponential { rate } => rate * t,
            Self::Weibull { lambda, alpha } => (lambda * t).powf(*alpha),
            Self::Custom(d) => -d.survival(t).ln(),
        }
    }
}

/// A law on the failure orderings: `probs[σ] = Pr(X_σ(1) < … < X_σ(n))`.
///
/// Permutations are stored 0-based. Probabilities are exact rationals; the
/// model is flagged inexact when they only sum to one within `1e-12`.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderDistribution {
    n: usize,
    probs: BTreeMap<Vec<usize>, BigRational>,
    exact: bool,
}

impl OrderDistribution {
    pub fn new<I>(n: usize, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<usize>, BigRational)>,
    {
        if n == 0 || n > MAX_COMPONENTS {
            return Err(Error::InvalidModel(format!("invalid component count {n}")));
        }
        let mut probs = BTreeMap::new();
        let mut total = BigRational::zero();
        for (perm, p) in entries {
            check_permutation(&perm, n)?;
            if p.is_negative() {
                return Err(Error::InvalidModel(format!(
                    "negative probability for ordering {}",
                    permutation_key(&perm)
                )));
            }
            total += &p;
            if p.is_zero() {
                continue;
            }
            if probs.insert(perm.clone(), p).is_some() {
                return Err(Error::InvalidModel(format!(
                    "ordering {} listed twice",
                    permutation_key(&perm)
                )));
            }
        }
        let exact = total.is_one();
        if !exact {
            let gap = (total.to_f64().unwrap_or(f64::NAN) - 1.0).abs();
            if !(gap <= 1e-12) {
                return Err(Error::InvalidModel(format!(
                    "ordering probabilities sum to {total}, not 1"
                )));
            }
        }
        Ok(OrderDistribution { n, probs, exact })
    }

    /// Every ordering equally likely; the canonical exchangeable law.
    pub fn uniform(n: usize) -> Result<Self> {
        if n > MAX_ENUMERATED_COMPONENTS {
            return Err(Error::TooManyComponents {
                n,
                max: MAX_ENUMERATED_COMPONENTS,
            });
        }
        let perms = permutations(n);
        let p = BigRational::new(1.into(), perms.len().into());
        Self::new(n, perms.into_iter().map(|s| (s, p.clone())))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_exact(&self) -> bool {
        self.exact
    }

    /// Orderings with nonzero probability, in lexicographic order.
    pub fn support(&self) -> impl Iterator<Item = (&[usize], &BigRational)> {
        self.probs.iter().map(|(k, v)| (k.as_slice(), v))
    }

    pub fn probability(&self, perm: &[usize]) -> BigRational {
        self.probs.get(perm).cloned().unwrap_or_else(BigRational::zero)
    }

    pub(crate) fn check_enumerable(&self) -> Result<()> {
        if self.n > MAX_ENUMERATED_COMPONENTS {
            Err(Error::TooManyComponents {
                n: self.n,
                max: MAX_ENUMERATED_COMPONENTS,
            })
        } else {
            Ok(())
        }
    }
}

fn check_permutation(perm: &[usize], n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    if perm.len() != n {
        return Err(Error::InvalidModel(format!(
            "ordering {} has length {}, expected {n}",
            permutation_key(perm),
            perm.len()
        )));
    }
    for &c in perm {
        if c >= n || std::mem::replace(&mut seen[c], true) {
            return Err(Error::InvalidModel(format!(
                "ordering {} is not a permutation of 1..{n}",
                permutation_key(perm)
            )));
        }
    }
    Ok(())
}

/// All permutations of `0..n` in lexicographic order.
pub(crate) fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current: Vec<usize> = (0..n).collect();
    loop {
        out.push(current.clone());
        // next lexicographic permutation
        let Some(i) = (1..n).rev().find(|&i| current[i - 1] < current[i]) else {
            break;
        };
        let j = (i..n).rev().find(|&j| current[j] > current[i - 1]).unwrap();
        current.swap(i - 1, j);
        current[i..].reverse();
    }
    out
}

/// Parses `"132"` or `"1,3,2"` (1-based labels) into a 0-based permutation.
pub fn parse_permutation_key(key: &str) -> Result<Vec<usize>> {
    let bad = || Error::InvalidModel(format!("`{key}` is not a permutation key"));
    let labels: Vec<usize> = if key.contains(',') {
        key.split(',')
            .map(|s| s.trim().parse::<usize>().map_err(|_| bad()))
            .collect::<Result<_>>()?
    } else {
        key.chars()
            .map(|c| c.to_digit(10).map(|d| d as usize).ok_or_else(bad))
            .collect::<Result<_>>()?
    };
    if labels.is_empty() || labels.contains(&0) {
        return Err(bad());
    }
    Ok(labels.into_iter().map(|l| l - 1).collect())
}

pub(crate) fn permutation_key(perm: &[usize]) -> String {
    let labels: Vec<String> = perm.iter().map(|c| (c + 1).to_string()).collect();
    if perm.len() > 9 {
        labels.join(",")
    } else {
        labels.concat()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IndependentWeibull {
    lambdas: Vec<f64>,
    alpha: f64,
}

impl IndependentWeibull {
    pub fn new(lambdas: Vec<f64>, alpha: f64) -> Result<Self> {
        if lambdas.is_empty() || lambdas.len() > MAX_COMPONENTS {
            return Err(Error::InvalidModel(format!(
                "invalid component count {}",
                lambdas.len()
            )));
        }
        for &l in &lambdas {
            positive("lambda", l)?;
        }
        positive("alpha", alpha)?;
        Ok(IndependentWeibull { lambdas, alpha })
    }

    pub fn n(&self) -> usize {
        self.lambdas.len()
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn marginals(&self) -> Vec<MarginalDistribution> {
        self.lambdas
            .iter()
            .map(|&lambda| MarginalDistribution::Weibull {
                lambda,
                alpha: self.alpha,
            })
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct IndependentMarginals {
    marginals: Vec<MarginalDistribution>,
}

impl IndependentMarginals {
    pub fn new(marginals: Vec<MarginalDistribution>) -> Result<Self> {
        if marginals.is_empty() || marginals.len() > MAX_COMPONENTS {
            return Err(Error::InvalidModel(format!(
                "invalid component count {}",
                marginals.len()
            )));
        }
        for m in &marginals {
            m.validate()?;
        }
        Ok(IndependentMarginals { marginals })
    }

    pub fn n(&self) -> usize {
        self.marginals.len()
    }

    pub fn marginals(&self) -> &[MarginalDistribution] {
        &self.marginals
    }

    /// The equivalent Weibull model when every marginal is Weibull (or
    /// exponential) with one common shape.
    pub fn as_weibull(&self) -> Option<IndependentWeibull> {
        let params: Option<Vec<(f64, f64)>> =
            self.marginals.iter().map(|m| m.weibull_parameters()).collect();
        let params = params?;
        let alpha = params[0].1;
        if params.iter().any(|&(_, a)| a != alpha) {
            return None;
        }
        IndependentWeibull::new(params.iter().map(|&(l, _)| l).collect(), alpha).ok()
    }
}

/// Deterministic sampler: `(seed, draw index) -> lifetimes`.
pub type SamplerFn = dyn Fn(u64, u64) -> Vec<f64> + Send + Sync;

#[derive(Clone)]
pub struct EmpiricalSampler {
    n: usize,
    sampler: Arc<SamplerFn>,
}

impl EmpiricalSampler {
    pub fn new(n: usize, sampler: Arc<SamplerFn>) -> Result<Self> {
        if n == 0 || n > MAX_COMPONENTS {
            return Err(Error::InvalidModel(format!("invalid component count {n}")));
        }
        Ok(EmpiricalSampler { n, sampler })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub(crate) fn call(&self, seed: u64, index: u64) -> Vec<f64> {
        (self.sampler)(seed, index)
    }
}

impl fmt::Debug for EmpiricalSampler {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EmpiricalSampler").field("n", &self.n).finish_non_exhaustive()
    }
}

#[derive(Debug, Clone)]
pub enum JointLifetimeModel {
    /// Any exchangeable law; only the (uniform) ordering law matters.
    Exchangeable { n: usize },
    OrderDistribution(OrderDistribution),
    IndependentMarginals(IndependentMarginals),
    IndependentWeibull(IndependentWeibull),
    EmpiricalSampler(EmpiricalSampler),
}

impl JointLifetimeModel {
    pub fn exchangeable(n: usize) -> Result<Self> {
        if n == 0 || n > MAX_COMPONENTS {
            return Err(Error::InvalidModel(format!("invalid component count {n}")));
        }
        Ok(JointLifetimeModel::Exchangeable { n })
    }

    pub fn weibull(lambdas: Vec<f64>, alpha: f64) -> Result<Self> {
        Ok(JointLifetimeModel::IndependentWeibull(IndependentWeibull::new(
            lambdas, alpha,
        )?))
    }

    pub fn n(&self) -> usize {
        match self {
            Self::Exchangeable { n } => *n,
            Self::OrderDistribution(d) => d.n(),
            Self::IndependentMarginals(m) => m.n(),
            Self::IndependentWeibull(w) => w.n(),
            Self::EmpiricalSampler(s) => s.n(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Self::Exchangeable { .. } => "exchangeable",
            Self::OrderDistribution(_) => "order_distribution",
            Self::IndependentMarginals(_) => "independent",
            Self::IndependentWeibull(_) => "weibull",
            Self::EmpiricalSampler(_) => "empirical",
        }
    }
}
