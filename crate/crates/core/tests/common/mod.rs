//! Generators and brute-force oracles shared by the integration tests.
//!
//! Nothing here calls the library's index or ordering code; every value is
//! recomputed from first principles on explicit permutations.
#![allow(dead_code)]

use bp_core::lifetimes::OrderDistribution;
use bp_core::scalar::rational;
use bp_core::{StructureFunction, SubsetIndex};
use num::{BigRational, Zero};
use rand::Rng;

/// φ(A) = 1 iff `A` contains one of the (nonempty) path sets.
pub fn from_paths(n: usize, paths: &[u32]) -> StructureFunction {
    StructureFunction::from_fn(n, |a| paths.iter().any(|&p| p & a.0 == p)).unwrap()
}

pub fn random_structure<R: Rng>(rng: &mut R, n: usize) -> StructureFunction {
    let count = rng.random_range(1..=4);
    let full = (1u32 << n) - 1;
    let paths: Vec<u32> = (0..count).map(|_| rng.random_range(1..=full)).collect();
    from_paths(n, &paths)
}

pub fn all_permutations(n: usize) -> Vec<Vec<usize>> {
    fn extend(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for c in 0..used.len() {
            if !used[c] {
                used[c] = true;
                prefix.push(c);
                extend(prefix, used, out);
                prefix.pop();
                used[c] = false;
            }
        }
    }
    let mut out = Vec::new();
    extend(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

/// Random rational law on a random subset of the orderings.
pub fn random_order_distribution<R: Rng>(rng: &mut R, n: usize) -> OrderDistribution {
    let perms = all_permutations(n);
    let weights: Vec<i64> = perms
        .iter()
        .map(|_| if rng.random_bool(0.6) { rng.random_range(1..=9) } else { 0 })
        .collect();
    let mut weights = weights;
    if weights.iter().all(|&w| w == 0) {
        weights[0] = 1;
    }
    let total: i64 = weights.iter().sum();
    let entries = perms
        .into_iter()
        .zip(weights)
        .filter(|(_, w)| *w > 0)
        .map(|(p, w)| (p, rational(w, total)));
    OrderDistribution::new(n, entries).unwrap()
}

/// Strictly positive rational law on every ordering.
pub fn positive_order_distribution<R: Rng>(rng: &mut R, n: usize) -> OrderDistribution {
    let perms = all_permutations(n);
    let weights: Vec<i64> = perms.iter().map(|_| rng.random_range(1..=9)).collect();
    let total: i64 = weights.iter().sum();
    OrderDistribution::new(n, perms.into_iter().zip(weights).map(|(p, w)| (p, rational(w, total)))).unwrap()
}

/// Killer and 1-based rank of the ordering `order` (first entry fails first).
pub fn killer(phi: &StructureFunction, order: &[usize]) -> (usize, usize) {
    let mut alive: u32 = (1u32 << order.len()) - 1;
    for (i, &c) in order.iter().enumerate() {
        alive &= !(1 << c);
        if !phi.value(SubsetIndex(alive)) {
            return (c, i + 1);
        }
    }
    panic!("system never failed");
}

/// Brute-force `I_BP` and `p` by summing the law over orderings.
pub fn brute_indices(phi: &StructureFunction, law: &[(Vec<usize>, BigRational)]) -> (Vec<BigRational>, Vec<BigRational>) {
    let n = phi.n();
    let mut bp = vec![BigRational::zero(); n];
    let mut p = vec![BigRational::zero(); n];
    for (order, prob) in law {
        let (j, k) = killer(phi, order);
        bp[j] += prob;
        p[k - 1] += prob;
    }
    (bp, p)
}

pub fn uniform_law(n: usize) -> Vec<(Vec<usize>, BigRational)> {
    let perms = all_permutations(n);
    let each = rational(1, perms.len() as i64);
    perms.into_iter().map(|p| (p, each.clone())).collect()
}

pub fn law_of(d: &OrderDistribution) -> Vec<(Vec<usize>, BigRational)> {
    d.support().map(|(p, q)| (p.to_vec(), q.clone())).collect()
}

/// `q_j(A)`: probability that the components outliving `j` are exactly `A`.
pub fn brute_qj(n: usize, law: &[(Vec<usize>, BigRational)]) -> Vec<Vec<BigRational>> {
    let mut qj = vec![vec![BigRational::zero(); 1 << n]; n];
    for (order, prob) in law {
        for (pos, &j) in order.iter().enumerate() {
            let later: u32 = order[pos + 1..].iter().map(|&c| 1u32 << c).sum();
            qj[j][later as usize] += prob;
        }
    }
    qj
}

/// Normalized Shannon entropy with `0 ln 0 = 0`.
pub fn entropy(w: &[f64]) -> f64 {
    -w.iter().filter(|&&x| x > 0.0).map(|x| x * x.ln()).sum::<f64>() / (w.len() as f64).ln()
}

pub fn to_f64(v: &[BigRational]) -> Vec<f64> {
    use num::ToPrimitive;
    v.iter().map(|x| x.to_f64().unwrap()).collect()
}
