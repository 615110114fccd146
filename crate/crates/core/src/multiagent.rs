//! The multi-agent contract model: each agent either exerts effort or not,
//! the principal pays agent `i` a share `alpha_i` on success, and the best
//! way to incentivize a set S is the payment vector
//! `alpha_i = c_i / f(i | S - i)`. The principal maximizes
//! `g(S) = (1 - sum of payments) * f(S)`.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::itemset::ItemSet;
use crate::setfn::{parallel_argmax_mask, SetFunction};
use crate::value::{Quad, Value, REAL_TOL};

#[derive(Clone, Debug)]
pub struct MultiAgentInstance {
    costs: Vec<Value>,
    f: SetFunction,
}

#[derive(Clone, Debug)]
pub struct MultiAgentSolution {
    pub set: ItemSet,
    pub payments: Vec<Value>,
    pub objective: Value,
}

/// Exact objective value in the quadratic extension.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum QuadObjective {
    NegInfinity,
    Finite(Quad),
}

impl MultiAgentInstance {
    pub fn new(costs: Vec<Value>, f: SetFunction) -> Result<Self> {
        let n = f.ground_size();
        if costs.len() != n {
            return Err(Error::Dimension {
                context: "cost vector vs ground set",
                expected: n,
                got: costs.len(),
            });
        }
        for c in &costs {
            if c.is_negative() || c.is_infinite() {
                return Err(Error::invalid("costs must be finite and >= 0"));
            }
        }
        Ok(MultiAgentInstance { costs, f })
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

    pub fn is_exact(&self) -> bool {
        self.f.is_exact() && self.costs.iter().all(Value::is_exact)
    }

    fn check_set(&self, s: &ItemSet) -> Result<()> {
        if s.ground_size() != self.n() {
            return Err(Error::Dimension {
                context: "set vs instance ground set",
                expected: self.n(),
                got: s.ground_size(),
            });
        }
        Ok(())
    }
}

/// The cheapest payments incentivizing exactly the set `s`:
/// `c_i / f(i | S - i)` inside, 0 outside. `0/0` reads as 0 and a positive
/// cost over a zero marginal as infinity.
pub fn equilibrium_payments(inst: &MultiAgentInstance, s: &ItemSet) -> Result<Vec<Value>> {
    inst.check_set(s)?;
    let f_s = inst.f.value(s)?;
    let mut payments = vec![Value::zero(); inst.n()];
    for i in s.iter() {
        let marg = &f_s - &inst.f.value(&s.without(i))?;
        let c = &inst.costs[i];
        payments[i] = if marg.is_zero() {
            if c.is_zero() {
                Value::zero()
            } else {
                Value::infinity()
            }
        } else {
            c / &marg
        };
    }
    Ok(payments)
}

/// `g(S) = (1 - sum of equilibrium payments) * f(S)`; minus infinity when
/// some required payment is infinite while `f(S) > 0`, and 0 when `f(S) = 0`.
pub fn objective_g(inst: &MultiAgentInstance, s: &ItemSet) -> Result<Value> {
    inst.check_set(s)?;
    let f_s = inst.f.value(s)?;
    let payments = equilibrium_payments(inst, s)?;
    if payments.iter().any(Value::is_infinite) {
        return Ok(if f_s.is_positive() {
            Value::neg_infinity()
        } else {
            Value::zero()
        });
    }
    if f_s.is_zero() {
        return Ok(Value::zero());
    }
    let total = payments.iter().fold(Value::zero(), |acc, p| &acc + p);
    Ok(&(&Value::one() - &total) * &f_s)
}

/// Exact evaluation of `g(S)` in the quadratic extension, for instances
/// whose function values and costs are exactly representable there.
pub fn objective_g_quad(inst: &MultiAgentInstance, s: &ItemSet) -> Result<Option<QuadObjective>> {
    inst.check_set(s)?;
    let Some(f_s) = inst.f.value_quad(s)? else {
        return Ok(None);
    };
    let mut total = Quad::from_int(0);
    for i in s.iter() {
        let Some(prev) = inst.f.value_quad(&s.without(i))? else {
            return Ok(None);
        };
        let marg = f_s.sub(&prev);
        let Some(cost) = inst.costs[i].as_exact() else {
            return Ok(None);
        };
        if marg.is_zero() {
            if num_traits::Zero::is_zero(cost) {
                continue;
            }
            return Ok(Some(if f_s.cmp(&Quad::from_int(0)).is_gt() {
                QuadObjective::NegInfinity
            } else {
                QuadObjective::Finite(Quad::from_int(0))
            }));
        }
        total = total.add(&Quad::rational(cost.clone()).div(&marg));
    }
    if f_s.is_zero() {
        return Ok(Some(QuadObjective::Finite(Quad::from_int(0))));
    }
    let g = Quad::from_int(1).sub(&total).mul(&f_s);
    Ok(Some(QuadObjective::Finite(g)))
}

/// Checks the two equilibrium constraint families for an arbitrary payment
/// vector: members must prefer exerting effort, non-members must not.
/// Comparisons are exact in rational mode, within `1e-9` otherwise.
pub fn verify_equilibrium(
    inst: &MultiAgentInstance,
    payments: &[Value],
    s: &ItemSet,
) -> Result<bool> {
    inst.check_set(s)?;
    if payments.len() != inst.n() {
        return Err(Error::Dimension {
            context: "payment vector vs ground set",
            expected: inst.n(),
            got: payments.len(),
        });
    }
    let exact = inst.is_exact() && payments.iter().all(|p| p.is_exact() || p.is_infinite());
    let tol = if exact { 0.0 } else { REAL_TOL };
    let f_s = inst.f.value(s)?;

    // alpha * marginal >= cost (inside) and alpha * marginal <= cost (outside),
    // stated in product form so infinite payments never hit inf - inf
    let ge = |lhs: &Value, rhs: &Value| {
        if exact {
            lhs >= rhs
        } else {
            lhs.to_f64() >= rhs.to_f64() - tol
        }
    };
    for (i, alpha) in payments.iter().enumerate() {
        let cost = &inst.costs[i];
        if s.contains(i) {
            let marg = &f_s - &inst.f.value(&s.without(i))?;
            let ok = if alpha.is_infinite() {
                marg.is_positive() || !cost.is_positive()
            } else {
                ge(&(alpha * &marg), cost)
            };
            if !ok {
                return Ok(false);
            }
        } else {
            let marg = &inst.f.value(&s.with(i))? - &f_s;
            let ok = if alpha.is_infinite() {
                !marg.is_positive()
            } else {
                ge(cost, &(alpha * &marg))
            };
            if !ok {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Exhaustive argmax of `g`, ties towards the smaller bitmask. Ground sets
/// beyond the 2^n enumeration cap are still searchable when `size_cap`
/// keeps the number of candidate sets at desk scale.
pub fn solve_exact(
    inst: &MultiAgentInstance,
    size_cap: Option<usize>,
) -> Result<MultiAgentSolution> {
    let n = inst.n();
    let set = if n <= crate::itemset::ENUM_CAP {
        let score = |mask: u64| -> Value {
            if let Some(cap) = size_cap {
                if mask.count_ones() as usize > cap {
                    return Value::neg_infinity();
                }
            }
            let s = ItemSet::from_mask(n, mask);
            objective_g(inst, &s).expect("ground size checked")
        };
        let (_, best_mask) = parallel_argmax_mask(n, score);
        ItemSet::from_mask(n, best_mask)
    } else {
        let cap = size_cap.ok_or(Error::CapExceeded {
            what: "multi-agent exhaustive solve",
            limit: crate::itemset::ENUM_CAP,
            got: n,
        })?;
        solve_by_size(inst, cap)?
    };
    let payments = equilibrium_payments(inst, &set)?;
    let objective = objective_g(inst, &set)?;
    Ok(MultiAgentSolution {
        set,
        payments,
        objective,
    })
}

/// Argmax over all sets of size at most `cap` by combination enumeration.
fn solve_by_size(inst: &MultiAgentInstance, cap: usize) -> Result<ItemSet> {
    let n = inst.n();
    let budget: u128 = 1 << crate::itemset::ENUM_CAP;
    let mut total: u128 = 1;
    let mut layer: u128 = 1;
    for z in 1..=cap.min(n) {
        layer = layer * (n - z + 1) as u128 / z as u128;
        total += layer;
        if total > budget {
            return Err(Error::CapExceeded {
                what: "size-capped combination search",
                limit: budget as usize,
                got: total.min(usize::MAX as u128) as usize,
            });
        }
    }

    let mut best_set = ItemSet::empty(n);
    let mut best_g = objective_g(inst, &best_set)?;
    for z in 1..=cap.min(n) {
        let mut picks: Vec<usize> = (0..z).collect();
        loop {
            let s = ItemSet::from_indices(n, &picks)?;
            let g = objective_g(inst, &s)?;
            if g > best_g || (g == best_g && s.mask_cmp(&best_set) == std::cmp::Ordering::Less) {
                best_g = g;
                best_set = s;
            }
            // advance to the next combination in lexicographic order
            let mut t = z;
            while t > 0 && picks[t - 1] == n - z + t - 1 {
                t -= 1;
            }
            if t == 0 {
                break;
            }
            picks[t - 1] += 1;
            for u in t..z {
                picks[u] = picks[u - 1] + 1;
            }
        }
    }
    Ok(best_set)
}

/// Pseudo-symmetric success probability: `f(S) = h(|S|) + v * [S = T]`.
/// Validated exhaustively for submodularity at construction.
#[derive(Clone, Debug)]
pub struct PseudoSymmetricSpec {
    profile: Vec<Value>,
    special: ItemSet,
    bonus: Value,
}

impl PseudoSymmetricSpec {
    pub fn new(profile: Vec<Value>, special: ItemSet, bonus: Value) -> Result<Self> {
        let n = special.ground_size();
        if profile.len() != n + 1 {
            return Err(Error::Dimension {
                context: "profile length vs ground set plus one",
                expected: n + 1,
                got: profile.len(),
            });
        }
        for w in profile.windows(2) {
            if w[1] < w[0] {
                return Err(Error::invalid("profile must be non-decreasing"));
            }
        }
        if profile[0].is_negative() || bonus.is_negative() {
            return Err(Error::invalid("profile and bonus must be non-negative"));
        }
        let spec = PseudoSymmetricSpec {
            profile,
            special,
            bonus,
        };
        let report = spec.to_set_function()?.check_classes()?;
        if !report.submodular {
            return Err(Error::invalid(format!(
                "pseudo-symmetric spec is not submodular, witness {:?}",
                report.submodular_witness
            )));
        }
        Ok(spec)
    }

    pub fn n(&self) -> usize {
        self.special.ground_size()
    }

    pub fn special(&self) -> &ItemSet {
        &self.special
    }

    pub fn bonus(&self) -> &Value {
        &self.bonus
    }

    pub fn value_of(&self, s: &ItemSet) -> Value {
        let base = self.profile[s.len()].clone();
        if *s == self.special {
            &base + &self.bonus
        } else {
            base
        }
    }

    /// Materializes the function as an explicit table.
    pub fn to_set_function(&self) -> Result<SetFunction> {
        let n = self.n();
        ItemSet::check_enum_cap(n, "pseudo-symmetric table")?;
        let values: Vec<Value> = (0..1u64 << n)
            .map(|mask| self.value_of(&ItemSet::from_mask(n, mask)))
            .collect();
        SetFunction::table(values)
    }

    pub fn build_instance(&self, costs: Vec<Value>) -> Result<MultiAgentInstance> {
        MultiAgentInstance::new(costs, self.to_set_function()?)
    }
}

/// The candidate family scanned by the pseudo-symmetric approximation:
/// the empty set, every cost-sorted prefix, and every set of size at most
/// `floor(2/eps)`, deduplicated. `order` lists agent indices by ascending
/// cost.
pub fn ptas_candidates(n: usize, eps: f64, order: &[usize]) -> Vec<ItemSet> {
    let limit = if eps > 0.0 {
        ((2.0 / eps).floor() as usize).min(n)
    } else {
        n
    };
    let mut seen: HashSet<u64> = HashSet::new();
    let mut out = Vec::new();
    let mut push = |mask: u64| {
        if seen.insert(mask) {
            out.push(ItemSet::from_mask(n, mask));
        }
    };
    push(0);
    let mut prefix = 0u64;
    for &i in order {
        prefix |= 1 << i;
        push(prefix);
    }
    for mask in 0u64..1 << n {
        if (mask.count_ones() as usize) <= limit {
            push(mask);
        }
    }
    out
}

/// Scans the pseudo-symmetric candidate family and returns its best member.
/// For a valid pseudo-symmetric submodular instance this is a `(1 - eps)`
/// approximation of the optimum.
pub fn solve_ptas_pseudosymmetric(
    inst: &MultiAgentInstance,
    eps: f64,
) -> Result<MultiAgentSolution> {
    if eps <= 0.0 {
        return Err(Error::precondition("eps must be positive".to_string()));
    }
    let n = inst.n();
    ItemSet::check_enum_cap(n, "pseudo-symmetric candidate scan")?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| inst.costs[a].cmp(&inst.costs[b]).then(a.cmp(&b)));

    let mut best: Option<(Value, ItemSet)> = None;
    for cand in ptas_candidates(n, eps, &order) {
        let g = objective_g(inst, &cand)?;
        let better = match &best {
            None => true,
            Some((bg, bs)) => {
                g > *bg || (g == *bg && cand.mask_cmp(bs) == std::cmp::Ordering::Less)
            }
        };
        if better {
            best = Some((g, cand));
        }
    }
    let (objective, set) = best.expect("candidate family is never empty");
    let payments = equilibrium_payments(inst, &set)?;
    Ok(MultiAgentSolution {
        set,
        payments,
        objective,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// additive f with weights (0.3, 0.5), costs (0.06, 0.10)
    fn two_agent_instance() -> MultiAgentInstance {
        let f = SetFunction::additive(vec![Value::ratio(3, 10), Value::ratio(5, 10)]).unwrap();
        MultiAgentInstance::new(vec![Value::ratio(6, 100), Value::ratio(10, 100)], f).unwrap()
    }

    #[test]
    fn payments_divide_costs_by_marginals() {
        let inst = two_agent_instance();
        let s = ItemSet::from_mask(2, 0b11);
        let p = equilibrium_payments(&inst, &s).unwrap();
        assert_eq!(p, vec![Value::ratio(1, 5), Value::ratio(1, 5)]);
    }

    #[test]
    fn zero_costs_mean_zero_payments() {
        let f = SetFunction::additive(vec![Value::ratio(3, 10), Value::ratio(5, 10)]).unwrap();
        let inst = MultiAgentInstance::new(vec![Value::zero(), Value::zero()], f).unwrap();
        let p = equilibrium_payments(&inst, &ItemSet::from_mask(2, 0b11)).unwrap();
        assert!(p.iter().all(Value::is_zero));
    }

    #[test]
    fn zero_marginal_with_positive_cost_is_infinite() {
        // both items cover the same universe element
        let f = SetFunction::coverage(
            crate::setfn::CoverageFn::from_index_covers(1, &[vec![0], vec![0]]).unwrap(),
        );
        let inst =
            MultiAgentInstance::new(vec![Value::ratio(1, 10), Value::ratio(1, 10)], f).unwrap();
        let p = equilibrium_payments(&inst, &ItemSet::from_mask(2, 0b11)).unwrap();
        assert!(p[0].is_infinite() && p[1].is_infinite());
        assert_eq!(
            objective_g(&inst, &ItemSet::from_mask(2, 0b11)).unwrap(),
            Value::neg_infinity()
        );
    }

    #[test]
    fn objective_on_the_running_example() {
        let inst = two_agent_instance();
        assert_eq!(
            objective_g(&inst, &ItemSet::from_mask(2, 0b11)).unwrap(),
            Value::ratio(48, 100)
        );
        assert_eq!(
            objective_g(&inst, &ItemSet::empty(2)).unwrap(),
            Value::zero()
        );
    }

    #[test]
    fn equilibrium_verification() {
        let inst = two_agent_instance();
        let s = ItemSet::from_mask(2, 0b11);
        let good = vec![Value::ratio(1, 5), Value::ratio(1, 5)];
        assert!(verify_equilibrium(&inst, &good, &s).unwrap());
        // underpaying agent 0 breaks the inside constraint
        let bad = vec![Value::ratio(1, 10), Value::ratio(1, 5)];
        assert!(!verify_equilibrium(&inst, &bad, &s).unwrap());
        // the empty set with zero payments is always an equilibrium here
        let zero = vec![Value::zero(), Value::zero()];
        assert!(verify_equilibrium(&inst, &zero, &ItemSet::empty(2)).unwrap());
    }

    #[test]
    fn solve_picks_both_agents() {
        let inst = two_agent_instance();
        let sol = solve_exact(&inst, None).unwrap();
        assert_eq!(sol.set.indices(), vec![0, 1]);
        assert_eq!(sol.objective, Value::ratio(12, 25));
        assert!(verify_equilibrium(&inst, &sol.payments, &sol.set).unwrap());
    }

    #[test]
    fn unprofitable_costs_pick_the_empty_set() {
        let f = SetFunction::additive(vec![Value::ratio(3, 10), Value::ratio(5, 10)]).unwrap();
        let inst = MultiAgentInstance::new(vec![Value::one(), Value::one()], f).unwrap();
        let sol = solve_exact(&inst, None).unwrap();
        assert!(sol.set.is_empty());
        assert_eq!(sol.objective, Value::zero());
    }

    #[test]
    fn size_cap_restricts_enumeration() {
        let inst = two_agent_instance();
        let sol = solve_exact(&inst, Some(1)).unwrap();
        assert_eq!(sol.set.indices(), vec![1]);
        assert_eq!(sol.objective, Value::ratio(2, 5));
    }

    #[test]
    fn size_cap_unlocks_wide_ground_sets() {
        // n = 64 sits beyond plain enumeration, but |S| <= 2 is searchable:
        // every pair has a zero marginal (both singleton terms tie at
        // sqrt(m)/n), so the best small set is the lowest-index singleton
        let hidden = crate::gadgets::HiddenSetFn::new(
            64,
            ItemSet::from_indices(64, &[0, 1, 2, 3]).unwrap(),
        )
        .unwrap();
        let inst = hidden.instance();
        assert!(matches!(
            solve_exact(&inst, None),
            Err(Error::CapExceeded { .. })
        ));
        let sol = solve_exact(&inst, Some(2)).unwrap();
        assert_eq!(sol.set.indices(), vec![0]);
        // g = (1 - (1/512)/(1/32)) * 1/32 = 15/512
        assert!((sol.objective.to_f64() - 15.0 / 512.0).abs() < 1e-12);
    }

    #[test]
    fn pseudo_symmetric_validation() {
        // concave profile: ok
        let profile = vec![
            Value::zero(),
            Value::ratio(1, 2),
            Value::ratio(3, 4),
            Value::ratio(7, 8),
        ];
        let special = ItemSet::from_indices(3, &[0, 1]).unwrap();
        assert!(PseudoSymmetricSpec::new(profile, special.clone(), Value::zero()).is_ok());
        // convex profile: not submodular
        let profile = vec![
            Value::zero(),
            Value::ratio(1, 8),
            Value::ratio(1, 2),
            Value::one(),
        ];
        assert!(PseudoSymmetricSpec::new(profile, special, Value::zero()).is_err());
    }

    #[test]
    fn candidate_family_count_at_eps_one() {
        // n = 6, eps = 1: all sets of size <= 2 (22) plus prefixes of sizes 3..6
        let order: Vec<usize> = (0..6).collect();
        let cands = ptas_candidates(6, 1.0, &order);
        assert_eq!(cands.len(), 26);
    }

    #[test]
    fn oversized_eps_degenerates_to_singletons_and_prefixes() {
        // eps = 2 keeps only sets of size <= 1 plus the prefixes: 2n sets
        let order: Vec<usize> = (0..4).collect();
        let cands = ptas_candidates(4, 2.0, &order);
        assert_eq!(cands.len(), 8);
        // the scan itself still runs and returns a well-formed solution
        let inst = two_agent_instance();
        let sol = solve_ptas_pseudosymmetric(&inst, 2.0).unwrap();
        assert!(verify_equilibrium(&inst, &sol.payments, &sol.set).unwrap());
    }

    #[test]
    fn quad_objective_matches_rational_path() {
        let inst = two_agent_instance();
        let s = ItemSet::from_mask(2, 0b11);
        match objective_g_quad(&inst, &s).unwrap().unwrap() {
            QuadObjective::Finite(q) => {
                assert_eq!(
                    q.as_rational().unwrap(),
                    Value::ratio(12, 25).as_exact().unwrap()
                );
            }
            QuadObjective::NegInfinity => panic!("finite objective expected"),
        }
    }
}
