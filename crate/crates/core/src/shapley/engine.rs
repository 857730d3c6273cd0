//! Game-agnostic Shapley estimators over vector-valued payoffs.
//!
//! Features are numbered `0..n` and a coalition is a bitmask over them. A
//! payoff maps a coalition to a fixed-length vector (one entry per output),
//! and every estimator returns one value per (feature, output).

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rayon::prelude::*;

use crate::error::{contract, Error, Result};
use crate::rng::seeded_rng;

pub const DEFAULT_EXACT_CAP: usize = 16;
/// Largest cap the bitmask representation supports.
pub const MAX_FEATURES: usize = 24;
pub const EFFICIENCY_TOLERANCE: f64 = 1e-9;

/// Set of features kept at their original values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Coalition(pub u32);

impl Coalition {
    pub const EMPTY: Coalition = Coalition(0);

    pub fn full(n: usize) -> Coalition {
        Coalition(((1u64 << n) - 1) as u32)
    }

    pub fn contains(self, i: usize) -> bool {
        self.0 >> i & 1 == 1
    }

    pub fn with(self, i: usize) -> Coalition {
        Coalition(self.0 | 1 << i)
    }

    pub fn without(self, i: usize) -> Coalition {
        Coalition(self.0 & !(1 << i))
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn members(self) -> impl Iterator<Item = usize> {
        (0..32).filter(move |&i| self.contains(i))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShapleyValues {
    /// `phi[feature][output]`.
    pub phi: Vec<Vec<f64>>,
    /// Per-feature standard errors, for sampled estimates.
    pub stderr: Option<Vec<Vec<f64>>>,
    pub v_full: Vec<f64>,
    pub v_empty: Vec<f64>,
    /// Distinct coalitions evaluated.
    pub evaluations: usize,
}

impl ShapleyValues {
    /// Largest `|sum_i phi_i - (v(N) - v(empty))|` over outputs.
    pub fn efficiency_residual(&self) -> f64 {
        (0..self.v_full.len())
            .map(|d| {
                let total = pairwise_sum(&self.phi.iter().map(|p| p[d]).collect::<Vec<_>>());
                (total - (self.v_full[d] - self.v_empty[d])).abs()
            })
            .fold(0.0, f64::max)
    }
}

/// `|S|! (n-1-|S|)! / n!` for a coalition of size `s` among `n` features.
pub fn shapley_weight(n: usize, s: usize) -> f64 {
    assert!(s < n, "coalition excluding the feature has at most n-1 members");
    // 1 / (n * C(n-1, s))
    let mut binom = 1.0f64;
    let k = s.min(n - 1 - s);
    for j in 0..k {
        binom = binom * (n - 1 - j) as f64 / (j + 1) as f64;
    }
    1.0 / (n as f64 * binom.round())
}

/// Pairwise (cascade) summation.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 8 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

fn evaluate_all<F>(masks: &[u32], payoff: &F) -> Result<Vec<Vec<f64>>>
where
    F: Fn(Coalition) -> Result<Vec<f64>> + Sync,
{
    let values = masks
        .par_iter()
        .map(|&m| payoff(Coalition(m)))
        .collect::<Result<Vec<_>>>()?;
    if let Some(first) = values.first() {
        if values.iter().any(|v| v.len() != first.len()) {
            return Err(contract("payoff vectors differ in length across coalitions"));
        }
    }
    Ok(values)
}

fn check_size(n: usize) -> Result<()> {
    if n == 0 {
        return Err(contract("a game needs at least one feature"));
    }
    if n > MAX_FEATURES {
        return Err(contract(format!("at most {MAX_FEATURES} features supported, got {n}")));
    }
    Ok(())
}

/// Exact Shapley values by enumerating all `2^n` coalitions. Coalition
/// payoffs are evaluated once each, in parallel; accumulation is sequential
/// in a fixed order, so results do not depend on the thread count.
pub fn exact_shapley<F>(n: usize, cap: usize, payoff: F) -> Result<ShapleyValues>
where
    F: Fn(Coalition) -> Result<Vec<f64>> + Sync,
{
    if n > cap {
        return Err(Error::CapExceeded { features: n, cap });
    }
    check_size(n)?;
    let masks: Vec<u32> = (0..1u32 << n).collect();
    let table = evaluate_all(&masks, &payoff)?;
    let outputs = table[0].len();
    let full = Coalition::full(n).0 as usize;
    let weights: Vec<f64> = (0..n).map(|s| shapley_weight(n, s)).collect();

    let phi: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let bit = 1usize << i;
            let mut terms = vec![Vec::with_capacity(1 << (n - 1)); outputs];
            for s in 0..=full {
                if s & bit != 0 {
                    continue;
                }
                let w = weights[(s as u32).count_ones() as usize];
                let (with, without) = (&table[s | bit], &table[s]);
                for (d, t) in terms.iter_mut().enumerate() {
                    t.push(w * (with[d] - without[d]));
                }
            }
            terms.iter().map(|t| pairwise_sum(t)).collect()
        })
        .collect();

    let result = ShapleyValues {
        phi,
        stderr: None,
        v_full: table[full].clone(),
        v_empty: table[0].clone(),
        evaluations: table.len(),
    };
    let scale = table.iter().flatten().fold(1.0f64, |a, v| a.max(v.abs()));
    let residual = result.efficiency_residual();
    if !(residual <= EFFICIENCY_TOLERANCE * scale) {
        return Err(Error::Efficiency { residual });
    }
    Ok(result)
}

/// Scalar-payoff convenience wrapper around [`exact_shapley`].
pub fn exact_shapley_scalar<F>(n: usize, payoff: F) -> Result<Vec<f64>>
where
    F: Fn(Coalition) -> f64 + Sync,
{
    let v = exact_shapley(n, MAX_FEATURES, |c| Ok(vec![payoff(c)]))?;
    Ok(v.phi.into_iter().map(|p| p[0]).collect())
}

/// Permutation-sampling estimator: the mean marginal contribution of each
/// feature over `m` seeded uniform permutations, with standard error
/// `sd / sqrt(m)` (undefined, reported as NaN, when `m == 1`).
pub fn sampled_shapley<F>(n: usize, m: usize, seed: u64, payoff: F) -> Result<ShapleyValues>
where
    F: Fn(Coalition) -> Result<Vec<f64>> + Sync,
{
    check_size(n)?;
    if m == 0 {
        return Err(contract("permutation sampling needs m >= 1"));
    }
    let mut rng = seeded_rng(seed);
    let mut order: Vec<usize> = (0..n).collect();
    let perms: Vec<Vec<usize>> = (0..m)
        .map(|_| {
            order.shuffle(&mut rng);
            order.clone()
        })
        .collect();

    let mut needed = BTreeSet::new();
    needed.insert(0u32);
    for p in &perms {
        let mut c = Coalition::EMPTY;
        for &i in p {
            c = c.with(i);
            needed.insert(c.0);
        }
    }
    let masks: Vec<u32> = needed.into_iter().collect();
    let values = evaluate_all(&masks, &payoff)?;
    let lookup = |c: Coalition| &values[masks.binary_search(&c.0).expect("coalition was evaluated")];
    let outputs = values[0].len();

    // marginals[i][d] over permutations, in permutation order
    let mut marginals = vec![vec![Vec::with_capacity(m); outputs]; n];
    for p in &perms {
        let mut c = Coalition::EMPTY;
        for &i in p {
            let next = c.with(i);
            let (hi, lo) = (lookup(next), lookup(c));
            for d in 0..outputs {
                marginals[i][d].push(hi[d] - lo[d]);
            }
            c = next;
        }
    }
    let mf = m as f64;
    let mut phi = vec![vec![0.0; outputs]; n];
    let mut stderr = vec![vec![f64::NAN; outputs]; n];
    for i in 0..n {
        for d in 0..outputs {
            let xs = &marginals[i][d];
            let mean = pairwise_sum(xs) / mf;
            phi[i][d] = mean;
            if m > 1 {
                let ss = pairwise_sum(&xs.iter().map(|x| (x - mean) * (x - mean)).collect::<Vec<_>>());
                stderr[i][d] = (ss / (mf - 1.0)).sqrt() / mf.sqrt();
            }
        }
    }
    let full = Coalition::full(n);
    Ok(ShapleyValues {
        phi,
        stderr: Some(stderr),
        v_full: lookup(full).clone(),
        v_empty: lookup(Coalition::EMPTY).clone(),
        evaluations: masks.len(),
    })
}

/// Leave-one-out deltas `v(N) - v(N \ {i})`.
pub fn leave_one_out<F>(n: usize, payoff: F) -> Result<ShapleyValues>
where
    F: Fn(Coalition) -> Result<Vec<f64>> + Sync,
{
    check_size(n)?;
    let full = Coalition::full(n);
    let mut masks: Vec<u32> = (0..n).map(|i| full.without(i).0).collect();
    masks.push(full.0);
    masks.push(0);
    masks.sort_unstable();
    masks.dedup();
    let values = evaluate_all(&masks, &payoff)?;
    let lookup = |c: Coalition| &values[masks.binary_search(&c.0).expect("coalition was evaluated")];
    let v_full = lookup(full).clone();
    let phi = (0..n)
        .map(|i| {
            let without = lookup(full.without(i));
            v_full.iter().zip(without).map(|(a, b)| a - b).collect()
        })
        .collect();
    Ok(ShapleyValues {
        phi,
        stderr: None,
        v_full,
        v_empty: lookup(Coalition::EMPTY).clone(),
        evaluations: masks.len(),
    })
}
