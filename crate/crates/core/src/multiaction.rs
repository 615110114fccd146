//! The multi-action contract model: a single agent picks any subset of
//! actions, the principal posts one share `alpha`, and the agent best
//! responds with ties broken in favor of the principal. Optimal contracts
//! sit at breakpoints of the agent's piecewise-linear utility envelope.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::itemset::ItemSet;
use crate::setfn::SetFunction;
use crate::value::Value;

/// Cap for the pairwise breakpoint enumeration (2^n sets, all pairs).
pub const BREAKPOINT_CAP: usize = 12;
/// Cap for the envelope-based solver (2^n cached lines).
pub const ENVELOPE_CAP: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NumericMode {
    Rational,
    Real,
}

#[derive(Debug)]
pub struct MultiActionInstance {
    costs: Vec<Value>,
    f: SetFunction,
    mode: NumericMode,
    tables: OnceLock<Arc<Tables>>,
}

/// Per-mask value and cost tables, plus an integer-scaled view over common
/// denominators when the data is rational and fits: utility comparisons at
/// an exact share then reduce to i128 arithmetic.
#[derive(Debug)]
struct Tables {
    values: Vec<Value>,
    costs: Vec<Value>,
    scaled: Option<ScaledTables>,
}

#[derive(Debug)]
struct ScaledTables {
    f_num: Vec<i128>,
    c_num: Vec<i128>,
    f_den: i128,
    c_den: i128,
    f_max: i128,
    c_max: i128,
}

impl Clone for MultiActionInstance {
    fn clone(&self) -> Self {
        let tables = OnceLock::new();
        if let Some(t) = self.tables.get() {
            let _ = tables.set(Arc::clone(t));
        }
        MultiActionInstance {
            costs: self.costs.clone(),
            f: self.f.clone(),
            mode: self.mode,
            tables,
        }
    }
}

#[derive(Clone, Debug)]
pub struct MultiActionSolution {
    pub alpha: Value,
    pub best_response: ItemSet,
    pub principal_utility: Value,
}

impl MultiActionInstance {
    pub fn new(costs: Vec<Value>, f: SetFunction, mode: NumericMode) -> Result<Self> {
        let n = f.ground_size();
        if costs.len() != n {
            return Err(Error::Dimension {
                context: "cost vector vs action set",
                expected: n,
                got: costs.len(),
            });
        }
        for c in &costs {
            if c.is_negative() || c.is_infinite() {
                return Err(Error::invalid("costs must be finite and >= 0"));
            }
        }
        if mode == NumericMode::Rational && (!f.is_exact() || !costs.iter().all(Value::is_exact)) {
            return Err(Error::invalid(
                "rational mode requires exact function data and costs",
            ));
        }
        Ok(MultiActionInstance {
            costs,
            f,
            mode,
            tables: OnceLock::new(),
        })
    }

    pub fn n(&self) -> usize {
        self.f.ground_size()
    }

    pub fn costs(&self) -> &[Value] {
        &self.costs
    }

    pub fn f(&self) -> &SetFunction {
        &self.f
    }

    pub fn mode(&self) -> NumericMode {
        self.mode
    }

    pub fn cost_of(&self, s: &ItemSet) -> Value {
        s.iter().fold(Value::zero(), |acc, i| &acc + &self.costs[i])
    }

    /// Per-mask `f` and cost tables, computed once and shared.
    fn tables(&self) -> Arc<Tables> {
        self.tables
            .get_or_init(|| {
                let n = self.n();
                let size = 1usize << n;
                let mut values = Vec::with_capacity(size);
                for mask in 0..size as u64 {
                    values.push(
                        self.f
                            .value(&ItemSet::from_mask(n, mask))
                            .expect("ground size fixed"),
                    );
                }
                let mut costs = Vec::with_capacity(size);
                costs.push(Value::zero());
                for mask in 1..size as u64 {
                    let low = mask.trailing_zeros() as usize;
                    let rest = mask & (mask - 1);
                    costs.push(&costs[rest as usize] + &self.costs[low]);
                }
                let scaled = scale_tables(&values, &costs);
                Arc::new(Tables {
                    values,
                    costs,
                    scaled,
                })
            })
            .clone()
    }

    fn check_alpha(alpha: &Value) -> Result<()> {
        if alpha.is_negative() || alpha > &Value::one() {
            return Err(Error::precondition(format!(
                "contract share {alpha} outside [0, 1]"
            )));
        }
        Ok(())
    }
}

/// Rewrites two rational tables over common denominators with i128
/// numerators; `None` when any entry is inexact or out of range.
fn scale_tables(values: &[Value], costs: &[Value]) -> Option<ScaledTables> {
    use num_bigint::BigInt;
    use num_integer::Integer;
    use num_traits::{One, ToPrimitive};

    fn common_denominator(entries: &[Value]) -> Option<BigInt> {
        let mut den = BigInt::one();
        for v in entries {
            den = den.lcm(v.as_exact()?.denom());
        }
        Some(den)
    }
    fn scale(entries: &[Value], den: &BigInt) -> Option<(Vec<i128>, i128)> {
        let mut nums = Vec::with_capacity(entries.len());
        let mut biggest: i128 = 0;
        for v in entries {
            let r = v.as_exact()?;
            let scaled = r.numer() * (den / r.denom());
            let as_int = scaled.to_i128()?;
            biggest = biggest.max(as_int.checked_abs()?);
            nums.push(as_int);
        }
        Some((nums, biggest))
    }

    let f_den_big = common_denominator(values)?;
    let c_den_big = common_denominator(costs)?;
    let f_den = f_den_big.to_i128()?;
    let c_den = c_den_big.to_i128()?;
    let (f_num, f_max) = scale(values, &f_den_big)?;
    let (c_num, c_max) = scale(costs, &c_den_big)?;
    // keep well clear of overflow under one further multiplication pair
    let limit: i128 = i128::MAX / 8;
    if f_den > limit || c_den > limit || f_max > limit || c_max > limit {
        return None;
    }
    Some(ScaledTables {
        f_num,
        c_num,
        f_den,
        c_den,
        f_max,
        c_max,
    })
}

impl ScaledTables {
    /// Best-response argmax at `alpha = p/q` via integer comparisons, with
    /// the same tie-breaking as the rational path. `None` when the products
    /// could overflow.
    fn best_response_mask(&self, p: i128, q: i128) -> Option<u64> {
        let limit: i128 = i128::MAX / 4;
        // N(S) = f_num[S] * p * c_den - c_num[S] * f_den * q orders utilities
        let f_scale = p.checked_mul(self.c_den)?;
        let c_scale = self.f_den.checked_mul(q)?;
        if self.f_max.checked_mul(f_scale.checked_abs()?)? > limit
            || self.c_max.checked_mul(c_scale.checked_abs()?)? > limit
        {
            return None;
        }
        let mut best_mask = 0u64;
        let mut best_util = self.f_num[0] * f_scale - self.c_num[0] * c_scale;
        let mut best_f = self.f_num[0];
        for mask in 1..self.f_num.len() as u64 {
            let f = self.f_num[mask as usize];
            let util = f * f_scale - self.c_num[mask as usize] * c_scale;
            if util > best_util || (util == best_util && f > best_f) {
                best_util = util;
                best_f = f;
                best_mask = mask;
            }
        }
        Some(best_mask)
    }
}

/// Exhaustive best response at share `alpha`: argmax of
/// `f(S) * alpha - c(S)`, ties towards larger `f(S)`, then smaller bitmask.
pub fn agent_best_response(inst: &MultiActionInstance, alpha: &Value) -> Result<ItemSet> {
    use num_traits::ToPrimitive;

    let n = inst.n();
    ItemSet::check_enum_cap(n, "agent best response")?;
    MultiActionInstance::check_alpha(alpha)?;
    let tables = inst.tables();

    if let (Some(scaled), Some(r)) = (&tables.scaled, alpha.as_exact()) {
        if let (Some(p), Some(q)) = (r.numer().to_i128(), r.denom().to_i128()) {
            if let Some(mask) = scaled.best_response_mask(p, q) {
                return Ok(ItemSet::from_mask(n, mask));
            }
        }
    }

    let (values, costs) = (&tables.values, &tables.costs);
    let mut best_mask = 0u64;
    let mut best_util = &(&values[0] * alpha) - &costs[0];
    let mut best_f = values[0].clone();
    for mask in 1..(1u64 << n) {
        let f = &values[mask as usize];
        let util = &(f * alpha) - &costs[mask as usize];
        match util.cmp(&best_util) {
            Ordering::Greater => {
                best_util = util;
                best_f = f.clone();
                best_mask = mask;
            }
            Ordering::Equal => {
                if *f > best_f {
                    best_f = f.clone();
                    best_mask = mask;
                }
            }
            Ordering::Less => {}
        }
    }
    Ok(ItemSet::from_mask(n, best_mask))
}

/// `u_P(alpha) = f(best response) * (1 - alpha)`.
pub fn principal_utility(inst: &MultiActionInstance, alpha: &Value) -> Result<Value> {
    let br = agent_best_response(inst, alpha)?;
    let f = inst.f.value(&br)?;
    Ok(&f * &(&Value::one() - alpha))
}

/// All candidate shares where the best response can change: pairwise
/// crossings `(c(S) - c(T)) / (f(S) - f(T))` inside [0, 1], plus 0 and 1,
/// deduplicated (exactly, in rational mode) and sorted.
pub fn breakpoints(inst: &MultiActionInstance) -> Result<Vec<Value>> {
    let n = inst.n();
    if n > BREAKPOINT_CAP {
        return Err(Error::CapExceeded {
            what: "pairwise breakpoint enumeration",
            limit: BREAKPOINT_CAP,
            got: n,
        });
    }
    let tables = inst.tables();
    let (values, costs) = (&tables.values, &tables.costs);
    let size = 1usize << n;
    let mut out: BTreeSet<Value> = BTreeSet::new();
    out.insert(Value::zero());
    out.insert(Value::one());
    let (zero, one) = (Value::zero(), Value::one());
    for a in 0..size {
        for b in a + 1..size {
            let df = &values[a] - &values[b];
            if df.is_zero() {
                continue;
            }
            let alpha = &(&costs[a] - &costs[b]) / &df;
            if alpha >= zero && alpha <= one {
                out.insert(alpha);
            }
        }
    }
    Ok(out.into_iter().collect())
}

/// Evaluates the principal's utility at every breakpoint and keeps the best,
/// ties towards the smaller share. Between consecutive breakpoints the best
/// response is constant, so `u_P` only falls there.
pub fn solve_exact(inst: &MultiActionInstance) -> Result<MultiActionSolution> {
    let cands = breakpoints(inst)?;
    let mut best: Option<MultiActionSolution> = None;
    for alpha in cands {
        let br = agent_best_response(inst, &alpha)?;
        let up = &inst.f.value(&br)? * &(&Value::one() - &alpha);
        let better = match &best {
            None => true,
            Some(cur) => up > cur.principal_utility,
        };
        if better {
            best = Some(MultiActionSolution {
                alpha,
                best_response: br,
                principal_utility: up,
            });
        }
    }
    Ok(best.expect("breakpoint list always holds 0 and 1"))
}

/// The shares where the agent's best response changes, each paired with the
/// best response taking over there and the principal's utility at that
/// share. Computed from the upper envelope of the 2^n utility lines after
/// grouping by slope; pieces are returned in ascending share order.
pub fn envelope_candidates(inst: &MultiActionInstance) -> Result<Vec<MultiActionSolution>> {
    let n = inst.n();
    if n > ENVELOPE_CAP {
        return Err(Error::CapExceeded {
            what: "envelope solve",
            limit: ENVELOPE_CAP,
            got: n,
        });
    }
    let tables = inst.tables();
    let (values, costs) = (&tables.values, &tables.costs);

    // one line per distinct slope: keep the cheapest set, ties on cost keep
    // the smaller mask (it dominates or ties everywhere)
    let mut by_slope: BTreeMap<&Value, (&Value, u64)> = BTreeMap::new();
    for mask in 0..(1u64 << n) as usize {
        let slope = &values[mask];
        let cost = &costs[mask];
        match by_slope.get_mut(slope) {
            None => {
                by_slope.insert(slope, (cost, mask as u64));
            }
            Some(entry) => {
                if cost < entry.0 {
                    *entry = (cost, mask as u64);
                }
            }
        }
    }

    // upper envelope over ascending slopes; stack entries carry the share
    // from which their line is the agent's maximum
    struct Piece<'a> {
        slope: &'a Value,
        intercept: Value, // -cost
        mask: u64,
        start: Option<Value>, // None = minus infinity
    }
    let mut stack: Vec<Piece> = Vec::new();
    for (slope, (cost, mask)) in by_slope {
        let intercept = -cost;
        loop {
            match stack.last() {
                None => {
                    stack.push(Piece {
                        slope,
                        intercept,
                        mask,
                        start: None,
                    });
                    break;
                }
                Some(top) => {
                    let x = &(&top.intercept - &intercept) / &(slope - top.slope);
                    let cut = match &top.start {
                        None => false,
                        Some(s) => x <= *s,
                    };
                    if cut {
                        stack.pop();
                        continue;
                    }
                    stack.push(Piece {
                        slope,
                        intercept,
                        mask,
                        start: Some(x),
                    });
                    break;
                }
            }
        }
    }

    // piece i is the agent's maximum on [start_i, start_{i+1}); u_P falls on
    // each piece, so the candidates are the pieces' left ends clamped to 0
    let (zero, one) = (Value::zero(), Value::one());
    let mut out = Vec::new();
    for (idx, piece) in stack.iter().enumerate() {
        let alpha = match &piece.start {
            None => zero.clone(),
            Some(s) => {
                if *s > one {
                    continue;
                }
                s.clone().max_of(zero.clone())
            }
        };
        // the clamped candidate must still lie in this piece's interval
        if let Some(next) = stack.get(idx + 1) {
            let end = next.start.as_ref().expect("only the first start is open");
            if alpha >= *end {
                continue;
            }
        }
        let up = piece.slope * &(&one - &alpha);
        out.push(MultiActionSolution {
            alpha,
            best_response: ItemSet::from_mask(n, piece.mask),
            principal_utility: up,
        });
    }
    Ok(out)
}

/// Envelope-based exact solver; same contract as [`solve_exact`] with a
/// higher ground-set cap: picks the best envelope candidate, ties towards
/// the smaller share.
pub fn solve_envelope(inst: &MultiActionInstance) -> Result<MultiActionSolution> {
    let mut best: Option<MultiActionSolution> = None;
    for cand in envelope_candidates(inst)? {
        let better = match &best {
            None => true,
            Some(cur) => match cand.principal_utility.cmp(&cur.principal_utility) {
                Ordering::Greater => true,
                Ordering::Equal => cand.alpha < cur.alpha,
                Ordering::Less => false,
            },
        };
        if better {
            best = Some(cand);
        }
    }
    Ok(best.expect("the envelope always has at least one piece"))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// additive f with weights (0.4, 0.4), costs (0.1, 0.1), rational mode
    fn symmetric_two_actions() -> MultiActionInstance {
        let f = SetFunction::additive(vec![Value::ratio(2, 5), Value::ratio(2, 5)]).unwrap();
        MultiActionInstance::new(
            vec![Value::ratio(1, 10), Value::ratio(1, 10)],
            f,
            NumericMode::Rational,
        )
        .unwrap()
    }

    #[test]
    fn rational_mode_rejects_float_data() {
        let f = SetFunction::additive(vec![Value::real(0.4)]).unwrap();
        assert!(
            MultiActionInstance::new(vec![Value::ratio(1, 10)], f, NumericMode::Rational).is_err()
        );
    }

    #[test]
    fn best_response_below_threshold_is_empty() {
        let inst = symmetric_two_actions();
        let br = agent_best_response(&inst, &Value::ratio(1, 5)).unwrap();
        assert!(br.is_empty());
    }

    #[test]
    fn best_response_tie_favors_the_principal() {
        // at alpha = 1/4 every set ties at utility 0; the largest f wins
        let inst = symmetric_two_actions();
        let br = agent_best_response(&inst, &Value::ratio(1, 4)).unwrap();
        assert_eq!(br.indices(), vec![0, 1]);
    }

    #[test]
    fn breakpoints_of_the_symmetric_instance() {
        let inst = symmetric_two_actions();
        let bps = breakpoints(&inst).unwrap();
        assert_eq!(bps, vec![Value::zero(), Value::ratio(1, 4), Value::one()]);
    }

    #[test]
    fn single_action_breakpoints() {
        let f = SetFunction::additive(vec![Value::ratio(1, 2)]).unwrap();
        let inst =
            MultiActionInstance::new(vec![Value::ratio(1, 5)], f, NumericMode::Rational).unwrap();
        // crossing at c/p = 2/5
        assert_eq!(
            breakpoints(&inst).unwrap(),
            vec![Value::zero(), Value::ratio(2, 5), Value::one()]
        );
    }

    #[test]
    fn solve_finds_the_quarter_share() {
        let inst = symmetric_two_actions();
        let sol = solve_exact(&inst).unwrap();
        assert_eq!(sol.alpha, Value::ratio(1, 4));
        assert_eq!(sol.best_response.indices(), vec![0, 1]);
        assert_eq!(sol.principal_utility, Value::ratio(3, 5));
    }

    #[test]
    fn envelope_agrees_with_pairwise_solver() {
        let inst = symmetric_two_actions();
        let a = solve_exact(&inst).unwrap();
        let b = solve_envelope(&inst).unwrap();
        assert_eq!(a.alpha, b.alpha);
        assert_eq!(a.principal_utility, b.principal_utility);
        assert_eq!(a.best_response.indices(), b.best_response.indices());
    }

    #[test]
    fn utility_at_the_endpoints() {
        let inst = symmetric_two_actions();
        assert_eq!(
            principal_utility(&inst, &Value::one()).unwrap(),
            Value::zero()
        );
        // at alpha = 0 the agent does nothing and the principal gets f(empty) = 0
        assert_eq!(
            principal_utility(&inst, &Value::zero()).unwrap(),
            Value::zero()
        );
        assert!(principal_utility(&inst, &Value::ratio(3, 2)).is_err());
    }

    #[test]
    fn caps_are_enforced() {
        let f = SetFunction::additive(vec![Value::one(); 13]).unwrap();
        let inst =
            MultiActionInstance::new(vec![Value::zero(); 13], f, NumericMode::Rational).unwrap();
        assert!(matches!(breakpoints(&inst), Err(Error::CapExceeded { .. })));
    }

    #[test]
    fn integer_fast_path_matches_the_rational_scan() {
        use num_traits::ToPrimitive;
        use rand::{Rng, SeedableRng};

        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(99);
        for _ in 0..30 {
            let n = rng.random_range(2..=6);
            let values: Vec<Value> = (0..(1usize << n))
                .map(|i| {
                    if i == 0 {
                        Value::zero()
                    } else {
                        Value::ratio(rng.random_range(0..=12), 12)
                    }
                })
                .collect();
            let f = SetFunction::table(values).unwrap();
            let costs: Vec<Value> = (0..n)
                .map(|_| Value::ratio(rng.random_range(0..=8), 16))
                .collect();
            let inst = MultiActionInstance::new(costs, f, NumericMode::Rational).unwrap();
            let tables = inst.tables();
            let scaled = tables.scaled.as_ref().expect("rational data scales");
            for _ in 0..40 {
                let alpha = Value::ratio(rng.random_range(0..=24), 24);
                let fast = {
                    let r = alpha.as_exact().unwrap();
                    scaled
                        .best_response_mask(
                            r.numer().to_i128().unwrap(),
                            r.denom().to_i128().unwrap(),
                        )
                        .expect("no overflow at this scale")
                };
                // reference: the plain rational scan with identical tie-breaks
                let mut best_mask = 0u64;
                let mut best_util = &(&tables.values[0] * &alpha) - &tables.costs[0];
                let mut best_f = tables.values[0].clone();
                for mask in 1..(1u64 << n) {
                    let fv = &tables.values[mask as usize];
                    let util = &(fv * &alpha) - &tables.costs[mask as usize];
                    match util.cmp(&best_util) {
                        Ordering::Greater => {
                            best_util = util;
                            best_f = fv.clone();
                            best_mask = mask;
                        }
                        Ordering::Equal => {
                            if *fv > best_f {
                                best_f = fv.clone();
                                best_mask = mask;
                            }
                        }
                        Ordering::Less => {}
                    }
                }
                assert_eq!(fast, best_mask, "alpha = {alpha}");
            }
        }
    }
}
