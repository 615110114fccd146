//! The clique XOS gadget: given a graph G, a clique size delta, and an
//! approximation parameter beta, extend G with a fresh delta-clique and put
//!
//! `f(S) = (M + [S is a clique]) * |S| + min(|S|, delta) * eps`
//!
//! over the extended vertex set, where `eps = 2/beta - 1` and `M = |V'| + eps`.
//! All actions cost M. The agent's best response has exactly three regimes,
//! changing at `M/(M+1+eps)` and `M/(M+1)`.

use num_bigint::BigInt;
use num_traits::One;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::itemset::ItemSet;
use crate::multiaction::{MultiActionInstance, NumericMode};
use crate::setfn::SetFunction;
use crate::value::{Rational, Value};

#[derive(Clone, Debug)]
pub struct CliqueGadgetFn {
    extended: Graph,
    base_vertices: usize,
    delta: usize,
    epsilon: Rational,
    big_m: Rational,
}

impl CliqueGadgetFn {
    pub fn build(graph: &Graph, delta: usize, beta: &Rational) -> Result<Self> {
        if delta == 0 {
            return Err(Error::invalid("delta must be a positive integer"));
        }
        if !(beta > &Rational::from_integer(0.into()) && beta < &Rational::one()) {
            return Err(Error::invalid("beta must lie strictly inside (0, 1)"));
        }
        let extended = graph.with_fresh_clique(delta)?;
        let epsilon = Rational::new(BigInt::from(2), BigInt::one()) / beta - Rational::one();
        let big_m = Rational::from_integer(BigInt::from(extended.vertex_count())) + &epsilon;
        Ok(CliqueGadgetFn {
            extended,
            base_vertices: graph.vertex_count(),
            delta,
            epsilon,
            big_m,
        })
    }

    pub fn ground_size(&self) -> usize {
        self.extended.vertex_count()
    }

    pub fn base_vertices(&self) -> usize {
        self.base_vertices
    }

    pub fn delta(&self) -> usize {
        self.delta
    }

    pub fn epsilon(&self) -> &Rational {
        &self.epsilon
    }

    /// Recovers the approximation parameter: `beta = 2/(1 + eps)`.
    pub fn beta(&self) -> Rational {
        Rational::from_integer(BigInt::from(2)) / (Rational::one() + &self.epsilon)
    }

    pub fn big_m(&self) -> &Rational {
        &self.big_m
    }

    pub fn extended_graph(&self) -> &Graph {
        &self.extended
    }

    pub fn raw_value(&self, s: &ItemSet) -> Rational {
        self.raw_value_mask(s.as_mask())
    }

    pub fn raw_value_mask(&self, mask: u64) -> Rational {
        let size = mask.count_ones() as usize;
        let clique_bonus = if self.extended.is_clique_mask(mask) {
            1
        } else {
            0
        };
        let linear = (&self.big_m + Rational::from_integer(clique_bonus.into()))
            * Rational::from_integer(BigInt::from(size));
        linear + &self.epsilon * Rational::from_integer(BigInt::from(size.min(self.delta)))
    }

    /// `f(V')`, the maximum value; used for the optional normalization.
    pub fn full_value(&self) -> Rational {
        self.raw_value(&ItemSet::full(self.ground_size()))
    }

    /// Weight of the XOS clause indexed by a non-empty set `T`, summed over
    /// `S ∩ T`: each member of `T` carries
    /// `M + [T is a clique] + eps * min(|T|, delta) / |T|`.
    pub fn xos_clause_value(&self, t: &ItemSet, s: &ItemSet) -> Result<Value> {
        if t.is_empty() {
            return Err(Error::precondition(
                "XOS clause sets must be non-empty".to_string(),
            ));
        }
        let t_size = t.len();
        let clique_bonus: BigInt = if self.extended.is_clique_mask(t.as_mask()) {
            1.into()
        } else {
            0.into()
        };
        let per_item = &self.big_m
            + Rational::from_integer(clique_bonus)
            + &self.epsilon
                * Rational::new(BigInt::from(t_size.min(self.delta)), BigInt::from(t_size));
        let overlap = Rational::from_integer(BigInt::from(s.intersection_len(t)));
        Ok(Value::Exact(per_item * overlap))
    }

    /// The lower best-response change point `M/(M+1+eps)`.
    pub fn lower_candidate(&self) -> Rational {
        &self.big_m / (&self.big_m + Rational::one() + &self.epsilon)
    }

    /// The upper best-response change point `M/(M+1)`.
    pub fn upper_candidate(&self) -> Rational {
        &self.big_m / (&self.big_m + Rational::one())
    }

    /// The contract instance: all costs equal M; optionally both f and the
    /// costs are divided by `f(V')` so values live in [0, 1].
    pub fn instance(&self, normalize: bool) -> MultiActionInstance {
        let n = self.ground_size();
        let mut f = SetFunction::clique_gadget(self.clone());
        let mut cost = Value::Exact(self.big_m.clone());
        if normalize {
            let full = Value::Exact(self.full_value());
            f = f
                .with_normalization(full.clone())
                .expect("f(V') is positive");
            cost = &cost / &full;
        }
        MultiActionInstance::new(vec![cost; n], f, NumericMode::Rational)
            .expect("gadget data is rational by construction")
    }
}

/// Builds the gadget and its contract instance in one call.
pub fn clique_xos_instance(
    graph: &Graph,
    delta: usize,
    beta: &Rational,
    normalize: bool,
) -> Result<(MultiActionInstance, CliqueGadgetFn)> {
    let gadget = CliqueGadgetFn::build(graph, delta, beta)?;
    Ok((gadget.instance(normalize), gadget))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle_gadget() -> CliqueGadgetFn {
        let tri = Graph::complete(3).unwrap();
        CliqueGadgetFn::build(&tri, 1, &Rational::new(1.into(), 2.into())).unwrap()
    }

    #[test]
    fn triangle_constants() {
        let g = triangle_gadget();
        assert_eq!(g.epsilon(), &Rational::from_integer(3.into()));
        assert_eq!(g.big_m(), &Rational::from_integer(7.into()));
        assert_eq!(g.ground_size(), 4);
    }

    #[test]
    fn added_vertex_singleton_value() {
        // the fresh vertex alone is a clique: f = (7+1)*1 + min(1,1)*3 = 11
        let g = triangle_gadget();
        let v = g.raw_value(&ItemSet::singleton(4, 3));
        assert_eq!(v, Rational::from_integer(11.into()));
    }

    #[test]
    fn full_set_is_not_a_clique() {
        // V' mixes the triangle and the disconnected fresh vertex: 7*4 + 3 = 31
        let g = triangle_gadget();
        assert_eq!(g.full_value(), Rational::from_integer(31.into()));
    }

    #[test]
    fn non_clique_value_formula() {
        // a non-clique of size s >= delta: f = M*s + delta*eps
        let tri = Graph::complete(3).unwrap();
        let g = CliqueGadgetFn::build(&tri, 2, &Rational::new(1.into(), 2.into())).unwrap();
        // {0, 3}: a base vertex plus a fresh vertex, never adjacent
        let s = ItemSet::from_indices(5, &[0, 3]).unwrap();
        let expected = g.big_m().clone() * Rational::from_integer(2.into())
            + g.epsilon().clone() * Rational::from_integer(2.into());
        assert_eq!(g.raw_value(&s), expected);
    }

    #[test]
    fn clause_value_example() {
        // T an edge of the triangle, S one endpoint: 7 + 1 + 3*min(2,1)/2 = 9.5
        let g = triangle_gadget();
        let t = ItemSet::from_indices(4, &[0, 1]).unwrap();
        let s = ItemSet::singleton(4, 0);
        assert_eq!(g.xos_clause_value(&t, &s).unwrap(), Value::ratio(19, 2));
        assert!(g.xos_clause_value(&ItemSet::empty(4), &s).is_err());
    }

    #[test]
    fn clause_at_t_equals_s_recovers_f() {
        let g = triangle_gadget();
        for mask in 1..16u64 {
            let s = ItemSet::from_mask(4, mask);
            assert_eq!(
                g.xos_clause_value(&s, &s).unwrap(),
                Value::Exact(g.raw_value(&s))
            );
        }
    }

    #[test]
    fn candidates() {
        let g = triangle_gadget();
        assert_eq!(g.lower_candidate(), Rational::new(7.into(), 11.into()));
        assert_eq!(g.upper_candidate(), Rational::new(7.into(), 8.into()));
    }

    #[test]
    fn normalized_instance_scales_costs() {
        let g = triangle_gadget();
        let inst = g.instance(true);
        assert_eq!(inst.costs()[0], Value::ratio(7, 31));
        let full = inst.f().value(&ItemSet::full(4)).unwrap();
        assert_eq!(full, Value::one());
    }

    #[test]
    fn high_shares_elicit_a_maximum_clique() {
        let g = triangle_gadget();
        let inst = g.instance(false);
        let br = crate::multiaction::agent_best_response(&inst, &Value::ratio(7, 8)).unwrap();
        assert_eq!(br.len(), 3);
        assert!(g.extended_graph().is_clique(&br));
    }

    #[test]
    fn breakpoints_contain_both_candidates() {
        let g = triangle_gadget();
        let inst = g.instance(false);
        let bps = crate::multiaction::breakpoints(&inst).unwrap();
        assert!(bps.contains(&Value::ratio(7, 11)));
        assert!(bps.contains(&Value::ratio(7, 8)));
    }

    #[test]
    fn solving_the_triangle_gadget() {
        // u_P(7/11) = 11 * 4/11 = 4 beats u_P(7/8) = 27/8
        let g = triangle_gadget();
        let inst = g.instance(false);
        let sol = crate::multiaction::solve_exact(&inst).unwrap();
        assert_eq!(sol.alpha, Value::ratio(7, 11));
        assert_eq!(sol.principal_utility, Value::int(4));
        assert_eq!(
            crate::multiaction::principal_utility(&inst, &Value::ratio(7, 8)).unwrap(),
            Value::ratio(27, 8)
        );
        assert_eq!(
            crate::multiaction::principal_utility(&inst, &Value::ratio(1, 2)).unwrap(),
            Value::zero()
        );
    }

    #[test]
    fn clause_values_never_exceed_f_and_touch_it_at_t_equals_s() {
        // full witness scan on two small extended graphs (|V'| <= 8)
        for (graph, delta) in [
            (Graph::complete(3).unwrap(), 2),
            (Graph::cycle(5).unwrap(), 3),
        ] {
            let g =
                CliqueGadgetFn::build(&graph, delta, &Rational::new(1.into(), 2.into())).unwrap();
            let n = g.ground_size();
            assert!(n <= 8);
            for s_mask in 0..(1u64 << n) {
                let s = ItemSet::from_mask(n, s_mask);
                let f_s = Value::Exact(g.raw_value(&s));
                for t_mask in 1..(1u64 << n) {
                    let t = ItemSet::from_mask(n, t_mask);
                    let clause = g.xos_clause_value(&t, &s).unwrap();
                    assert!(clause <= f_s, "T={t_mask:b} S={s_mask:b}");
                }
                if s_mask != 0 {
                    assert_eq!(g.xos_clause_value(&s, &s).unwrap(), f_s);
                }
            }
        }
    }

    #[test]
    fn disjoint_clause_overlap_is_zero() {
        let g = triangle_gadget();
        let t = ItemSet::from_indices(4, &[0, 1]).unwrap();
        let s = ItemSet::from_indices(4, &[2, 3]).unwrap();
        assert_eq!(g.xos_clause_value(&t, &s).unwrap(), Value::zero());
    }
}
