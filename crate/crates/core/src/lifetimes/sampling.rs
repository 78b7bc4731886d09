//! Deterministic lifetime sampling.
//!
//! Draw `i` under seed `s` comes from ChaCha8 keyed by `s` on stream `i`, so
//! any draw can be reproduced on its own and workers can split index ranges
//! freely. Draws with ties (or non-positive values) are rejected and redrawn
//! from the same stream.

use num::ToPrimitive;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::lifetimes::model::{JointLifetimeModel, LifetimeDistribution};

pub const MAX_CONSECUTIVE_REDRAWS: usize = 1000;

#[derive(Debug, Clone, PartialEq)]
pub struct Draw {
    pub lifetimes: Vec<f64>,
    /// Rejected draws before this one was accepted.
    pub redraws: usize,
}

/// Uniform on the open interval (0, 1).
fn open_unit(rng: &mut ChaCha8Rng) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn acceptable(x: &[f64]) -> bool {
    if x.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return false;
    }
    let mut sorted = x.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.windows(2).all(|w| w[0] < w[1])
}

fn propose(model: &JointLifetimeModel, rng: &mut ChaCha8Rng, seed: u64, index: u64, attempt: usize) -> Vec<f64> {
    match model {
        JointLifetimeModel::Exchangeable { n } => (0..*n).map(|_| open_unit(rng)).collect(),
        JointLifetimeModel::OrderDistribution(d) => {
            let u = open_unit(rng);
            let mut acc = 0.0;
            let mut chosen = None;
            let mut last = None;
            for (perm, p) in d.support() {
                acc += p.to_f64().unwrap_or(0.0);
                last = Some(perm);
                if u < acc {
                    chosen = Some(perm);
                    break;
                }
            }
            let perm = chosen.or(last).expect("order distribution has support");
            let mut times: Vec<f64> = (0..d.n()).map(|_| open_unit(rng)).collect();
            times.sort_by(f64::total_cmp);
            let mut x = vec![0.0; d.n()];
            for (rank, &c) in perm.iter().enumerate() {
                x[c] = times[rank];
            }
            x
        }
        JointLifetimeModel::IndependentMarginals(m) => m
            .marginals()
            .iter()
            .map(|d| d.survival_quantile(open_unit(rng)))
            .collect(),
        JointLifetimeModel::IndependentWeibull(w) => {
            let inv_alpha = 1.0 / w.alpha();
            w.lambdas()
                .iter()
                .map(|l| (-open_unit(rng).ln()).powf(inv_alpha) / l)
                .collect()
        }
        JointLifetimeModel::EmpiricalSampler(s) => {
            let seed = if attempt == 0 {
                seed
            } else {
                splitmix64(seed ^ splitmix64(attempt as u64))
            };
            s.call(seed, index)
        }
    }
}

/// Draw number `index` under `seed`.
pub fn draw(model: &JointLifetimeModel, seed: u64, index: u64) -> Result<Draw> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let n = model.n();
    for attempt in 0..=MAX_CONSECUTIVE_REDRAWS {
        let x = propose(model, &mut rng, seed, index, attempt);
        if x.len() != n {
            return Err(Error::InvalidModel(format!(
                "sampler returned {} lifetimes, expected {n}",
                x.len()
            )));
        }
        if acceptable(&x) {
            return Ok(Draw {
                lifetimes: x,
                redraws: attempt,
            });
        }
    }
    Err(Error::TieRejectionOverflow {
        index,
        limit: MAX_CONSECUTIVE_REDRAWS,
    })
}

/// Draws `0..count` under `seed`.
pub fn sample_lifetimes(
    model: &JointLifetimeModel,
    seed: u64,
    count: u64,
) -> impl Iterator<Item = Result<Vec<f64>>> + '_ {
    (0..count).map(move |i| draw(model, seed, i).map(|d| d.lifetimes))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lifetimes::model::{EmpiricalSampler, OrderDistribution};
    use crate::scalar::rational;
    use std::sync::atomic::{AtomicUsize, Ordering};
    use std::sync::Arc;

    #[test]
    fn reproducible_weibull_pairs() {
        let model = JointLifetimeModel::weibull(vec![1.0, 2.0], 1.0).unwrap();
        let a: Vec<Vec<f64>> = sample_lifetimes(&model, 42, 3).collect::<Result<_>>().unwrap();
        let b: Vec<Vec<f64>> = sample_lifetimes(&model, 42, 3).collect::<Result<_>>().unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 3);
        assert!(a.iter().flatten().all(|&t| t > 0.0));
        assert_eq!(draw(&model, 42, 2).unwrap().lifetimes, a[2]);
        let c: Vec<Vec<f64>> = sample_lifetimes(&model, 43, 3).collect::<Result<_>>().unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn exchangeable_best_component_frequency() {
        let model = JointLifetimeModel::exchangeable(3).unwrap();
        let n = 100_000;
        let best = sample_lifetimes(&model, 5, n)
            .map(|x| x.unwrap())
            .filter(|x| x[0] > x[1] && x[0] > x[2])
            .count();
        let p = best as f64 / n as f64;
        let sigma = (1.0 / 3.0 * 2.0 / 3.0 / n as f64).sqrt();
        assert!((p - 1.0 / 3.0).abs() < 3.0 * sigma, "{p}");
    }

    #[test]
    fn degenerate_order_distribution() {
        let d = OrderDistribution::new(3, [(vec![0, 1, 2], rational(1, 1))]).unwrap();
        let model = JointLifetimeModel::OrderDistribution(d);
        for x in sample_lifetimes(&model, 9, 1000) {
            let x = x.unwrap();
            assert!(x[0] < x[1] && x[1] < x[2]);
        }
    }

    #[test]
    fn ties_are_redrawn_and_counted() {
        let calls = Arc::new(AtomicUsize::new(0));
        let c = calls.clone();
        let sampler = EmpiricalSampler::new(
            2,
            Arc::new(move |seed, _index| {
                c.fetch_add(1, Ordering::Relaxed);
                // tie on the first attempt of every draw
                if seed == 7 {
                    vec![1.0, 1.0]
                } else {
                    vec![1.0, 2.0]
                }
            }),
        )
        .unwrap();
        let model = JointLifetimeModel::EmpiricalSampler(sampler);
        let d = draw(&model, 7, 0).unwrap();
        assert_eq!(d.redraws, 1);
        assert_eq!(d.lifetimes, vec![1.0, 2.0]);
        assert_eq!(calls.load(Ordering::Relaxed), 2);
    }

    #[test]
    fn persistent_ties_overflow() {
        let sampler = EmpiricalSampler::new(2, Arc::new(|_, _| vec![3.0, 3.0])).unwrap();
        let model = JointLifetimeModel::EmpiricalSampler(sampler);
        assert!(matches!(
            draw(&model, 0, 4),
            Err(Error::TieRejectionOverflow { index: 4, .. })
        ));
    }
}
