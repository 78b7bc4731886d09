//! Direct simulation of the failure process, independent of the ordering
//! tables: components are removed in lifetime order and the removal that
//! brings the system down is recorded.

use num::{BigRational, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lifetimes::{self, JointLifetimeModel, OrderDistribution};
use crate::structure::StructureFunction;
use crate::subset::SubsetIndex;

const CHUNK: u64 = 4096;

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationRecord {
    pub lifetimes: Vec<f64>,
    /// Components in the order they fail, 0-based.
    pub failure_order: Vec<usize>,
    /// Component whose failure stops the system, 0-based.
    pub killer: usize,
    /// `k` such that the system fails at `X_{k:n}`, 1-based.
    pub rank: usize,
    pub system_lifetime: f64,
}

impl SimulationRecord {
    /// `killer = σ(rank)`, and `φ` is 1 on the survivors just before the
    /// killer fails and 0 just after.
    pub fn satisfies_invariants(&self, phi: &StructureFunction) -> bool {
        let Some(&at_rank) = self.failure_order.get(self.rank.wrapping_sub(1)) else {
            return false;
        };
        let before = self.failure_order[..self.rank - 1]
            .iter()
            .fold(SubsetIndex::full(phi.n()), |alive, &c| alive.without(c));
        at_rank == self.killer && phi.value(before) && !phi.value(before.without(self.killer))
    }
}

/// Removes components along `order` starting from the full set; returns the
/// killer and its 1-based position.
pub fn replay_order(phi: &StructureFunction, order: &[usize]) -> Result<(usize, usize)> {
    let n = phi.n();
    if order.len() != n {
        return Err(Error::SizeMismatch {
            n,
            expected: n,
            actual: order.len(),
        });
    }
    let mut alive = SubsetIndex::full(n);
    for (position, &c) in order.iter().enumerate() {
        if c >= n || !alive.contains(c) {
            return Err(Error::InvalidParameter(format!("{order:?} is not a failure order")));
        }
        alive = alive.without(c);
        if !phi.value(alive) {
            return Ok((c, position + 1));
        }
    }
    // φ(∅) = 0 for any semicoherent structure
    unreachable!("structure works with no components")
}

/// Replays one vector of lifetimes through `φ`.
pub fn replay_failure_sequence(phi: &StructureFunction, lifetimes: &[f64]) -> Result<SimulationRecord> {
    let n = phi.n();
    if lifetimes.len() != n {
        return Err(Error::SizeMismatch {
            n,
            expected: n,
            actual: lifetimes.len(),
        });
    }
    if lifetimes.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
        return Err(Error::InvalidLifetime);
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| lifetimes[a].total_cmp(&lifetimes[b]));
    if order.windows(2).any(|w| lifetimes[w[0]] == lifetimes[w[1]]) {
        return Err(Error::TiedLifetimes);
    }
    let (killer, rank) = replay_order(phi, &order)?;
    Ok(SimulationRecord {
        lifetimes: lifetimes.to_vec(),
        failure_order: order,
        killer,
        rank,
        system_lifetime: lifetimes[killer],
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct McEstimate {
    pub mean: Vec<f64>,
    /// Binomial standard error `sqrt(p(1−p)/N)` of each entry.
    pub stderr: Vec<f64>,
    pub samples: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarlo {
    pub bp: McEstimate,
    pub p: McEstimate,
    /// Draws rejected for ties over the whole run.
    pub redraws: u64,
}

fn estimate(counts: &[u64], samples: u64, seed: u64) -> McEstimate {
    let total = samples as f64;
    let mean: Vec<f64> = counts.iter().map(|&c| c as f64 / total).collect();
    let stderr = mean.iter().map(|p| (p * (1.0 - p) / total).sqrt()).collect();
    McEstimate {
        mean,
        stderr,
        samples,
        seed,
    }
}

/// Tallies killers and ranks over draws `0..samples` under `seed`.
///
/// Work is split into fixed index chunks and integer tallies are summed, so
/// the result does not depend on the thread count.
pub fn monte_carlo(phi: &StructureFunction, model: &JointLifetimeModel, samples: u64, seed: u64) -> Result<MonteCarlo> {
    let n = phi.n();
    if model.n() != n {
        return Err(Error::ComponentMismatch {
            structure: n,
            model: model.n(),
        });
    }
    if samples == 0 {
        return Err(Error::InvalidParameter("Monte Carlo needs at least one sample".into()));
    }
    let chunks: Vec<u64> = (0..samples.div_ceil(CHUNK)).collect();
    let tallies: Vec<(Vec<u64>, Vec<u64>, u64)> = chunks
        .par_iter()
        .map(|&c| {
            let mut killers = vec![0u64; n];
            let mut ranks = vec![0u64; n];
            let mut redraws = 0u64;
            for i in c * CHUNK..((c + 1) * CHUNK).min(samples) {
                let d = lifetimes::draw(model, seed, i)?;
                redraws += d.redraws as u64;
                let record = replay_failure_sequence(phi, &d.lifetimes)?;
                killers[record.killer] += 1;
                ranks[record.rank - 1] += 1;
            }
            Ok((killers, ranks, redraws))
        })
        .collect::<Result<_>>()?;
    let mut killers = vec![0u64; n];
    let mut ranks = vec![0u64; n];
    let mut redraws = 0;
    for (k, r, d) in tallies {
        killers.iter_mut().zip(k).for_each(|(a, v)| *a += v);
        ranks.iter_mut().zip(r).for_each(|(a, v)| *a += v);
        redraws += d;
    }
    Ok(MonteCarlo {
        bp: estimate(&killers, samples, seed),
        p: estimate(&ranks, samples, seed),
        redraws,
    })
}

pub fn mc_barlow_proschan(phi: &StructureFunction, model: &JointLifetimeModel, samples: u64, seed: u64) -> Result<McEstimate> {
    monte_carlo(phi, model, samples, seed).map(|m| m.bp)
}

pub fn mc_signature(phi: &StructureFunction, model: &JointLifetimeModel, samples: u64, seed: u64) -> Result<McEstimate> {
    monte_carlo(phi, model, samples, seed).map(|m| m.p)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PermutationOracle {
    pub bp: Vec<BigRational>,
    pub p: Vec<BigRational>,
}

/// Exact `I_BP` and `p` by replaying every ordering with positive
/// probability.
pub fn permutation_oracle(phi: &StructureFunction, law: &OrderDistribution) -> Result<PermutationOracle> {
    let n = phi.n();
    if law.n() != n {
        return Err(Error::ComponentMismatch {
            structure: n,
            model: law.n(),
        });
    }
    law.check_enumerable()?;
    let mut bp = vec![BigRational::zero(); n];
    let mut p = vec![BigRational::zero(); n];
    for (order, prob) in law.support() {
        let (killer, rank) = replay_order(phi, order)?;
        bp[killer] += prob;
        p[rank - 1] += prob;
    }
    Ok(PermutationOracle { bp, p })
}

/// Same as [`permutation_oracle`] for any model with an enumerable
/// ordering law.
pub fn permutation_oracle_for(phi: &StructureFunction, model: &JointLifetimeModel) -> Result<PermutationOracle> {
    match model {
        JointLifetimeModel::Exchangeable { n } => permutation_oracle(phi, &OrderDistribution::uniform(*n)?),
        JointLifetimeModel::OrderDistribution(d) => permutation_oracle(phi, d),
        other => Err(Error::MethodUnavailable {
            method: "permutation",
            model: other.kind(),
        }),
    }
}
