//! The hidden-set XOS family: a uniformly random "good" set G of size
//! m = n^(1/3) is planted inside an otherwise symmetric function
//!
//! `f_G(S) = max(|S ∩ G|, sqrt(m), |S|/sqrt(m)) / n` for non-empty S,
//!
//! extended by `f_G(empty) = 0`, with uniform agent costs `1/(2mn)`.

use num_bigint::BigInt;
use rand::Rng;

use crate::error::{Error, Result};
use crate::itemset::ItemSet;
use crate::multiagent::MultiAgentInstance;
use crate::setfn::SetFunction;
use crate::value::{Quad, Rational, Value};

#[derive(Clone, Debug)]
pub struct HiddenSetFn {
    n: usize,
    m: usize,
    good: ItemSet,
}

fn exact_cube_root(n: usize) -> Option<usize> {
    let c = (n as f64).cbrt().round() as usize;
    (c.saturating_sub(1)..=c + 1).find(|m| m.checked_pow(3) == Some(n))
}

impl HiddenSetFn {
    /// Builds the function with an explicit good set; `n` must be a perfect
    /// cube and `|good| = n^(1/3)`.
    pub fn new(n: usize, good: ItemSet) -> Result<Self> {
        let m = exact_cube_root(n).ok_or_else(|| {
            Error::invalid(format!("hidden-set ground size {n} is not a perfect cube"))
        })?;
        if good.ground_size() != n {
            return Err(Error::Dimension {
                context: "good set ground size",
                expected: n,
                got: good.ground_size(),
            });
        }
        if good.len() != m {
            return Err(Error::invalid(format!(
                "good set must have exactly m = {m} members, got {}",
                good.len()
            )));
        }
        Ok(HiddenSetFn { n, m, good })
    }

    /// Draws the good set uniformly among all m-subsets.
    pub fn sample(n: usize, rng: &mut impl Rng) -> Result<Self> {
        let m = exact_cube_root(n).ok_or_else(|| {
            Error::invalid(format!("hidden-set ground size {n} is not a perfect cube"))
        })?;
        let picks = rand::seq::index::sample(rng, n, m);
        let mut good = ItemSet::empty(n);
        for i in picks {
            good.insert(i);
        }
        HiddenSetFn::new(n, good)
    }

    pub fn ground_size(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn good(&self) -> &ItemSet {
        &self.good
    }

    pub fn value_f64(&self, s: &ItemSet) -> f64 {
        if s.is_empty() {
            return 0.0;
        }
        let inter = s.intersection_len(&self.good) as f64;
        let sqrt_m = (self.m as f64).sqrt();
        let spread = s.len() as f64 / sqrt_m;
        inter.max(sqrt_m).max(spread) / self.n as f64
    }

    /// Exact value in `Q[sqrt(m)]`.
    pub fn value_quad(&self, s: &ItemSet) -> Quad {
        if s.is_empty() {
            return Quad::from_int(0);
        }
        let m = self.m as u64;
        let inter = Quad::from_int(s.intersection_len(&self.good) as i64);
        let sqrt_m = Quad::sqrt(m);
        // |S| / sqrt(m) = |S| * sqrt(m) / m
        let spread = Quad::new(
            Rational::from_integer(0.into()),
            Rational::new(BigInt::from(s.len()), BigInt::from(m)),
            m,
        );
        let mut best = inter;
        for cand in [sqrt_m, spread] {
            if cand.cmp(&best) == std::cmp::Ordering::Greater {
                best = cand;
            }
        }
        best.div(&Quad::from_int(self.n as i64))
    }

    /// A query is successful when `|S| <= m^1.5` and `|S ∩ G| > sqrt(m)`.
    /// Both conditions are decided by exact integer comparisons of squares.
    pub fn is_successful_query(&self, s: &ItemSet) -> bool {
        let size = s.len();
        let inter = s.intersection_len(&self.good);
        // |S| <= m^1.5  <=>  |S|^2 <= m^3 = n
        size * size <= self.n && inter * inter > self.m
    }

    /// The uniform effort cost `1/(2mn)`.
    pub fn cost(&self) -> Value {
        Value::ratio(1, (2 * self.m * self.n) as i64)
    }

    /// The multi-agent contract instance around this function.
    pub fn instance(&self) -> MultiAgentInstance {
        let costs = vec![self.cost(); self.n];
        MultiAgentInstance::new(costs, SetFunction::hidden_set(self.clone()))
            .expect("hidden-set instance data is valid by construction")
    }

    /// The explicit XOS representation: one clause per component.
    ///
    /// Component 1 is additive on G, component 2 is unit demand at
    /// `sqrt(m)/n` (one clause per singleton), component 3 is uniform
    /// additive at `1/(sqrt(m) n)`.
    pub fn as_xos_clauses(&self) -> Vec<Vec<f64>> {
        let n = self.n;
        let sqrt_m = (self.m as f64).sqrt();
        let mut clauses = Vec::with_capacity(n + 2);
        clauses.push(
            (0..n)
                .map(|i| {
                    if self.good.contains(i) {
                        1.0 / n as f64
                    } else {
                        0.0
                    }
                })
                .collect(),
        );
        clauses.push(vec![1.0 / (sqrt_m * n as f64); n]);
        for i in 0..n {
            let mut clause = vec![0.0; n];
            clause[i] = sqrt_m / n as f64;
            clauses.push(clause);
        }
        clauses
    }
}

/// Builds a hidden-set instance with an explicit good set.
pub fn hidden_set_instance(n: usize, good: ItemSet) -> Result<MultiAgentInstance> {
    Ok(HiddenSetFn::new(n, good)?.instance())
}

/// Builds a hidden-set instance with a seeded uniform good set.
pub fn hidden_set_instance_seeded(n: usize, seed: u64) -> Result<MultiAgentInstance> {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(seed);
    Ok(HiddenSetFn::sample(n, &mut rng)?.instance())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f8() -> HiddenSetFn {
        HiddenSetFn::new(8, ItemSet::from_indices(8, &[0, 1]).unwrap()).unwrap()
    }

    #[test]
    fn rejects_non_cubes() {
        assert!(HiddenSetFn::new(9, ItemSet::empty(9)).is_err());
        assert!(HiddenSetFn::new(8, ItemSet::from_indices(8, &[0]).unwrap()).is_err());
    }

    #[test]
    fn singleton_values_all_equal_sqrt_m_over_n() {
        // every singleton, inside or outside G, is dominated by the sqrt(m) term
        let f = f8();
        let expected = 2f64.sqrt() / 8.0;
        for i in 0..8 {
            let v = f.value_f64(&ItemSet::singleton(8, i));
            assert!((v - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn spread_term_dominates_mid_sets() {
        // f({0,1,2}) at n=8: max(2, sqrt 2, 3/sqrt 2) = 3/sqrt 2
        let f = f8();
        let v = f.value_f64(&ItemSet::from_indices(8, &[0, 1, 2]).unwrap());
        let expected = 3.0 / (8.0 * 2f64.sqrt());
        assert!((v - expected).abs() < 1e-12);
        assert!((expected - 0.265165).abs() < 1e-6);
    }

    #[test]
    fn quad_value_agrees_with_f64() {
        let f = f8();
        for mask in 0..256u64 {
            let s = ItemSet::from_mask(8, mask);
            assert!((f.value_quad(&s).to_f64() - f.value_f64(&s)).abs() < 1e-12);
        }
    }

    #[test]
    fn successful_query_examples() {
        let f = f8();
        // {0,1} = G: 2 > sqrt 2 and 2 <= 2^1.5
        assert!(f.is_successful_query(&ItemSet::from_indices(8, &[0, 1]).unwrap()));
        // the full set fails the size bound (8 > 2^1.5)
        assert!(!f.is_successful_query(&ItemSet::full(8)));
        // disjoint from G fails the intersection bound
        assert!(!f.is_successful_query(&ItemSet::from_indices(8, &[2, 3]).unwrap()));
    }

    #[test]
    fn costs_are_uniform() {
        assert_eq!(f8().cost(), Value::ratio(1, 32));
        let f27 = HiddenSetFn::new(27, ItemSet::from_indices(27, &[0, 1, 2]).unwrap()).unwrap();
        assert_eq!(f27.cost(), Value::ratio(1, 162));
    }

    #[test]
    fn xos_clauses_match_pointwise() {
        let f = f8();
        let xos = crate::setfn::SetFunction::xos(
            f.as_xos_clauses()
                .into_iter()
                .map(|c| c.into_iter().map(Value::real).collect())
                .collect(),
        )
        .unwrap();
        for mask in 0..256u64 {
            let s = ItemSet::from_mask(8, mask);
            let direct = f.value_f64(&s);
            let via_xos = xos.value(&s).unwrap().to_f64();
            assert!((direct - via_xos).abs() < 1e-12, "mask {mask}");
        }
    }

    #[test]
    fn sampling_is_uniform_in_shape() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(1);
        let f = HiddenSetFn::sample(27, &mut rng).unwrap();
        assert_eq!(f.m(), 3);
        assert_eq!(f.good().len(), 3);
    }

    #[test]
    fn the_n8_cube_is_monotone() {
        // the only perfect cube inside the class-check cap
        let report = crate::setfn::SetFunction::hidden_set(f8())
            .check_classes()
            .unwrap();
        assert!(report.monotone);
    }

    #[test]
    fn good_set_payments_below_the_one_over_n_regime() {
        // at m = 2 the marginal at G is (2 - sqrt 2)/8, not 1/n, so each
        // payment is (2 + sqrt 2)/8 rather than 1/4
        let f = f8();
        let inst = f.instance();
        let payments = crate::multiagent::equilibrium_payments(&inst, f.good()).unwrap();
        let expected = (2.0 + 2f64.sqrt()) / 8.0;
        for i in f.good().iter() {
            assert!((payments[i].to_f64() - expected).abs() < 1e-12);
        }
    }
}
