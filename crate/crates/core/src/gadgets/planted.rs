//! Planted-cover coverage functions and the two uniform-cost gadgets built
//! on top of them (one multi-agent, one multi-action with an extra
//! high-cost action).
//!
//! The planted-cover family realizes, at desk scale, a normalized unweighted
//! coverage function whose singletons are all exactly `1/k` and which hides a
//! k-item set covering the whole universe.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::bitset::BitSet;
use crate::error::{Error, Result};
use crate::itemset::ItemSet;
use crate::multiaction::{MultiActionInstance, NumericMode};
use crate::multiagent::MultiAgentInstance;
use crate::setfn::{CoverageFn, SetFunction};
use crate::value::{Rational, Value};

/// Builds a coverage function on `k` planted items plus `k * copies`
/// straddling items.
///
/// The universe splits into `k` blocks of size `k * copies` (size 1 when
/// `copies = 0`). Planted item `j` covers block `j` in full; every other item
/// covers `copies` elements inside each block, so all singletons are exactly
/// `1/k` and only unions of full blocks reach 1. Returns the function and the
/// planted set.
pub fn planted_cover_coverage(k: usize, copies: usize) -> Result<(CoverageFn, ItemSet)> {
    if k == 0 {
        return Err(Error::invalid("planted cover needs k >= 1"));
    }
    let block = (k * copies).max(1);
    let universe = k * block;
    let item_count = k + k * copies;
    let mut covers = Vec::with_capacity(item_count);
    for j in 0..k {
        let mut c = BitSet::new(universe);
        for u in j * block..(j + 1) * block {
            c.insert(u);
        }
        covers.push(c);
    }
    for s in 0..k * copies {
        let (shift, stride) = (s % k, s / k);
        let mut c = BitSet::new(universe);
        for i in 0..k {
            for j in 0..copies {
                c.insert(i * block + j * k + (i + shift + j * stride) % k);
            }
        }
        covers.push(c);
    }
    let f = CoverageFn::new(universe, covers)?;
    let planted = ItemSet::from_indices(item_count, &(0..k).collect::<Vec<_>>())?;
    Ok((f, planted))
}

fn require_uniform_singletons(k: usize, fprime: &CoverageFn) -> Result<()> {
    let expected = Rational::new(BigInt::one(), BigInt::from(k));
    for i in 0..fprime.item_count() {
        if fprime.singleton_value(i) != expected {
            return Err(Error::invalid(format!(
                "coverage item {i} has singleton value {} instead of 1/{k}",
                fprime.singleton_value(i)
            )));
        }
    }
    Ok(())
}

/// Multi-agent gadget: the coverage function as-is with uniform agent costs
/// `1/(2k^2)`. Requires every singleton of `fprime` to be exactly `1/k`.
pub fn multiagent_submodular_gadget(k: usize, fprime: CoverageFn) -> Result<MultiAgentInstance> {
    if k == 0 {
        return Err(Error::invalid("gadget needs k >= 1"));
    }
    require_uniform_singletons(k, &fprime)?;
    let cost = Value::ratio(1, (2 * k * k) as i64);
    let costs = vec![cost; fprime.item_count()];
    MultiAgentInstance::new(costs, SetFunction::coverage(fprime))
}

/// Multi-action gadget: the coverage function plus one fresh action, realized
/// again as a coverage function over the doubled universe `U' x {0,1}`.
///
/// Original actions keep their covers inside the tag-0 half and cost
/// `(1 - beta^2)/(2k)`; the fresh action covers the whole tag-1 half and
/// costs `(1 - beta^3)/2`. The fresh action is the last index. Overall
/// `f(S) = (f'(S ∩ A') + [fresh in S]) / 2`.
pub fn multiaction_submodular_gadget(
    k: usize,
    fprime: CoverageFn,
    beta: &Rational,
) -> Result<(MultiActionInstance, usize)> {
    if k == 0 {
        return Err(Error::invalid("gadget needs k >= 1"));
    }
    if !(beta > &Rational::zero() && beta < &Rational::new(BigInt::one(), BigInt::from(12))) {
        return Err(Error::invalid("beta must lie strictly inside (0, 1/12)"));
    }
    require_uniform_singletons(k, &fprime)?;

    let u_prime = fprime.universe_size();
    let universe = 2 * u_prime;
    let n_prime = fprime.item_count();
    let mut covers = Vec::with_capacity(n_prime + 1);
    for i in 0..n_prime {
        let mut c = BitSet::new(universe);
        for u in fprime.cover(i).iter_ones() {
            c.insert(u);
        }
        covers.push(c);
    }
    let mut fresh = BitSet::new(universe);
    for u in u_prime..universe {
        fresh.insert(u);
    }
    covers.push(fresh);
    let f = CoverageFn::new(universe, covers)?;

    let one = Rational::one();
    let beta2 = beta * beta;
    let beta3 = &beta2 * beta;
    let half = Rational::new(BigInt::one(), BigInt::from(2));
    let action_cost = Value::Exact((&one - &beta2) / Rational::from_integer(BigInt::from(2 * k)));
    let fresh_cost = Value::Exact(&half * (&one - &beta3));
    let mut costs = vec![action_cost; n_prime];
    costs.push(fresh_cost);

    let inst = MultiActionInstance::new(costs, SetFunction::coverage(f), NumericMode::Rational)?;
    Ok((inst, n_prime))
}

/// Exhaustive maximum of a coverage function over all item sets of the given
/// size. `combo_budget` caps the number of enumerated combinations.
pub fn max_coverage_at_size(
    cov: &CoverageFn,
    size: usize,
    combo_budget: u64,
) -> Result<(Rational, ItemSet)> {
    let n = cov.item_count();
    if size > n {
        return Err(Error::precondition(format!(
            "set size {size} exceeds item count {n}"
        )));
    }
    let mut combos: u64 = 1;
    for t in 0..size.min(n - size) {
        combos = combos.saturating_mul((n - t) as u64) / (t as u64 + 1);
        if combos > combo_budget {
            return Err(Error::CapExceeded {
                what: "coverage combination search",
                limit: combo_budget as usize,
                got: combos as usize,
            });
        }
    }

    let mut best_count = 0usize;
    let mut best: Vec<usize> = (0..size).collect();
    let mut chosen: Vec<usize> = Vec::with_capacity(size);
    // depth-first over combinations, tracking the running union
    fn recurse(
        cov: &CoverageFn,
        start: usize,
        remaining: usize,
        acc: &BitSet,
        chosen: &mut Vec<usize>,
        best_count: &mut usize,
        best: &mut Vec<usize>,
    ) {
        if remaining == 0 {
            let count = acc.count_ones();
            if count > *best_count {
                *best_count = count;
                best.clone_from(chosen);
            }
            return;
        }
        for i in start..=cov.item_count() - remaining {
            let mut next = acc.clone();
            next.union_with(cov.cover(i));
            chosen.push(i);
            recurse(cov, i + 1, remaining - 1, &next, chosen, best_count, best);
            chosen.pop();
        }
    }
    if size == 0 {
        best.clear();
        best_count = 0;
    } else {
        recurse(
            cov,
            0,
            size,
            &BitSet::new(cov.universe_size()),
            &mut chosen,
            &mut best_count,
            &mut best,
        );
    }
    let witness = ItemSet::from_indices(n, &best)?;
    Ok((
        Rational::new(BigInt::from(best_count), BigInt::from(cov.universe_size())),
        witness,
    ))
}
