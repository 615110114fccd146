//! Coverage functions built from a k-prover question/answer protocol over
//! 3CNF-5 formulas.
//!
//! A verifier samples a random state `r` (a list of `ell` clauses plus a
//! variable position inside each), derives `ell` distinguished variables,
//! and sends each prover a question holding `ell/2` clause queries and
//! `ell/2` variable queries, selected by that prover's codeword. Items of
//! the coverage function are triples `(question, answer, prover)`; their
//! covers are unions of blocks `B(r, j, i)` inside the universe
//! `U = [k]^L x R`, where `j` indexes the assignment to the distinguished
//! variables induced by the answer.

use std::collections::HashMap;

use rand::seq::index::sample as index_sample;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::bitset::BitSet;
use crate::error::{Error, Result};
use crate::itemset::ItemSet;
use crate::setfn::CoverageFn;
use crate::value::Rational;

/// Desk cap on the universe size of a materialized construction.
pub const UNIVERSE_CAP: usize = 10_000_000;
/// Desk cap on total cover storage, in bits.
const COVER_BITS_CAP: u128 = 2_000_000_000;

/// A 3CNF-5 formula: `5n/3` clauses of three signed 1-based literals, every
/// variable occurring in exactly five clauses and never twice in a clause.
#[derive(Clone, Debug)]
pub struct Formula3Cnf5 {
    n_vars: usize,
    clauses: Vec<[i32; 3]>,
}

impl Formula3Cnf5 {
    pub fn new(n_vars: usize, clauses: Vec<[i32; 3]>) -> Result<Self> {
        if n_vars == 0 || !n_vars.is_multiple_of(3) {
            return Err(Error::invalid(
                "variable count must be a positive multiple of 3",
            ));
        }
        if clauses.len() != 5 * n_vars / 3 {
            return Err(Error::invalid(format!(
                "expected {} clauses for {n_vars} variables, got {}",
                5 * n_vars / 3,
                clauses.len()
            )));
        }
        let mut occurrences = vec![0usize; n_vars];
        for (ci, clause) in clauses.iter().enumerate() {
            let mut vars = [0usize; 3];
            for (t, &lit) in clause.iter().enumerate() {
                if lit == 0 || lit.unsigned_abs() as usize > n_vars {
                    return Err(Error::invalid(format!(
                        "clause {ci} has out-of-range literal {lit}"
                    )));
                }
                vars[t] = lit.unsigned_abs() as usize - 1;
            }
            if vars[0] == vars[1] || vars[0] == vars[2] || vars[1] == vars[2] {
                return Err(Error::invalid(format!("clause {ci} repeats a variable")));
            }
            for v in vars {
                occurrences[v] += 1;
            }
        }
        for (v, &c) in occurrences.iter().enumerate() {
            if c != 5 {
                return Err(Error::invalid(format!(
                    "variable {} occurs {c} times instead of 5",
                    v + 1
                )));
            }
        }
        Ok(Formula3Cnf5 { n_vars, clauses })
    }

    /// The smallest member of the family: three variables, five clauses, all
    /// satisfied by the all-true assignment.
    pub fn tiny_satisfiable() -> Self {
        Formula3Cnf5::new(
            3,
            vec![[1, 2, 3], [1, -2, -3], [-1, 2, -3], [-1, -2, 3], [1, 2, -3]],
        )
        .expect("the built-in formula is well-formed")
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn clause_count(&self) -> usize {
        self.clauses.len()
    }

    pub fn clauses(&self) -> &[[i32; 3]] {
        &self.clauses
    }

    /// 0-based variable at the given position of the given clause.
    pub fn var_at(&self, clause: usize, pos: usize) -> usize {
        self.clauses[clause][pos].unsigned_abs() as usize - 1
    }

    fn literal_satisfied(lit: i32, value: bool) -> bool {
        if lit > 0 {
            value
        } else {
            !value
        }
    }

    /// Whether the 3-bit pattern (bit `t` assigns position `t`'s variable)
    /// satisfies the clause.
    pub fn clause_pattern_satisfies(&self, clause: usize, pattern: u8) -> bool {
        self.clauses[clause]
            .iter()
            .enumerate()
            .any(|(t, &lit)| Self::literal_satisfied(lit, pattern >> t & 1 == 1))
    }

    pub fn satisfies(&self, assignment: &[bool]) -> bool {
        assignment.len() == self.n_vars
            && (0..self.clauses.len()).all(|c| {
                let pattern = (0..3).fold(0u8, |acc, t| {
                    acc | (u8::from(assignment[self.var_at(c, t)]) << t)
                });
                self.clause_pattern_satisfies(c, pattern)
            })
    }
}

/// Prover codebook: `k` codewords of even length `ell`, each of weight
/// `ell/2`, pairwise Hamming distance at least `ell/3`.
#[derive(Clone, Debug)]
pub struct KProverParams {
    k: usize,
    ell: usize,
    codewords: Vec<u64>,
}

impl KProverParams {
    pub fn new(k: usize, ell: usize, codewords: Vec<u64>) -> Result<Self> {
        if k < 2 {
            return Err(Error::invalid("need at least two provers"));
        }
        if ell == 0 || !ell.is_multiple_of(2) || ell > 16 {
            return Err(Error::invalid(
                "question split length must be even and in 2..=16",
            ));
        }
        if codewords.len() != k {
            return Err(Error::Dimension {
                context: "codeword count vs prover count",
                expected: k,
                got: codewords.len(),
            });
        }
        for &w in &codewords {
            if w >> ell != 0 {
                return Err(Error::invalid("codeword has bits beyond its length"));
            }
            if w.count_ones() as usize != ell / 2 {
                return Err(Error::invalid(format!(
                    "codeword {w:#b} must have weight {}",
                    ell / 2
                )));
            }
        }
        for a in 0..k {
            for b in a + 1..k {
                let dist = (codewords[a] ^ codewords[b]).count_ones() as usize;
                if 3 * dist < ell {
                    return Err(Error::invalid(format!(
                        "codewords {a} and {b} are at Hamming distance {dist} < {ell}/3"
                    )));
                }
            }
        }
        Ok(KProverParams { k, ell, codewords })
    }

    /// Greedy codebook: scan weight-`ell/2` words in ascending order and keep
    /// those far enough from everything kept so far.
    pub fn greedy(k: usize, ell: usize) -> Result<Self> {
        if ell == 0 || !ell.is_multiple_of(2) || ell > 16 {
            return Err(Error::invalid(
                "question split length must be even and in 2..=16",
            ));
        }
        let mut kept: Vec<u64> = Vec::new();
        for w in 0..(1u64 << ell) {
            if w.count_ones() as usize != ell / 2 {
                continue;
            }
            if kept
                .iter()
                .all(|&v| 3 * (v ^ w).count_ones() as usize >= ell)
            {
                kept.push(w);
                if kept.len() == k {
                    return KProverParams::new(k, ell, kept);
                }
            }
        }
        Err(Error::invalid(format!(
            "no codebook of {k} words exists greedily at length {ell}"
        )))
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn ell(&self) -> usize {
        self.ell
    }

    pub fn codewords(&self) -> &[u64] {
        &self.codewords
    }
}

/// One item of the coverage function: prover `prover` answers question
/// `question` with the bit pattern `answer`.
///
/// A question holds `ell/2` clause indices then `ell/2` variable indices.
/// The answer packs 3 bits per clause slot followed by 1 bit per variable
/// slot.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ProverItem {
    pub question: usize,
    pub answer: u64,
    pub prover: usize,
}

/// The materialized coverage function plus the protocol bookkeeping.
#[derive(Clone, Debug)]
pub struct KProverCoverage {
    formula: Formula3Cnf5,
    params: KProverParams,
    coverage: CoverageFn,
    items: Vec<ProverItem>,
    item_index: HashMap<ProverItem, usize>,
    q_count: usize,
    r_count: usize,
    assignment_count: usize, // L = 2^ell
    k_prime: usize,
}

struct Radix {
    n_clauses: usize,
    n_vars: usize,
    ell: usize,
}

impl Radix {
    fn decode_r(&self, mut r: usize) -> (Vec<usize>, Vec<usize>) {
        let mut pos = vec![0usize; self.ell];
        for t in (0..self.ell).rev() {
            pos[t] = r % 3;
            r /= 3;
        }
        let mut cls = vec![0usize; self.ell];
        for t in (0..self.ell).rev() {
            cls[t] = r % self.n_clauses;
            r /= self.n_clauses;
        }
        (cls, pos)
    }

    fn encode_q(&self, clause_digits: &[usize], var_digits: &[usize]) -> usize {
        let mut idx = 0usize;
        for &d in clause_digits {
            idx = idx * self.n_clauses + d;
        }
        for &d in var_digits {
            idx = idx * self.n_vars + d;
        }
        idx
    }

    fn decode_q(&self, mut q: usize, half: usize) -> (Vec<usize>, Vec<usize>) {
        let mut var_digits = vec![0usize; half];
        for t in (0..half).rev() {
            var_digits[t] = q % self.n_vars;
            q /= self.n_vars;
        }
        let mut clause_digits = vec![0usize; half];
        for t in (0..half).rev() {
            clause_digits[t] = q % self.n_clauses;
            q /= self.n_clauses;
        }
        (clause_digits, var_digits)
    }
}

impl KProverCoverage {
    pub fn build(formula: Formula3Cnf5, params: KProverParams) -> Result<Self> {
        let ell = params.ell();
        let k = params.k();
        let half = ell / 2;
        let n_clauses = formula.clause_count();
        let n_vars = formula.n_vars();
        let radix = Radix {
            n_clauses,
            n_vars,
            ell,
        };

        let assignment_count = 1usize << ell; // L
        let cap_err = || Error::CapExceeded {
            what: "prover coverage universe",
            limit: UNIVERSE_CAP,
            got: usize::MAX,
        };
        let checked_pow = |base: usize, exp: usize| -> Result<u128> {
            (base as u128)
                .checked_pow(u32::try_from(exp).map_err(|_| cap_err())?)
                .ok_or_else(cap_err)
        };
        let q_count_big = checked_pow(n_clauses, half)?
            .checked_mul(checked_pow(n_vars, half)?)
            .ok_or_else(cap_err)?;
        let r_count_big = checked_pow(n_clauses, ell)?
            .checked_mul(checked_pow(3, ell)?)
            .ok_or_else(cap_err)?;
        let digit_space = checked_pow(k, assignment_count)?;
        let universe = digit_space
            .checked_mul(r_count_big)
            .ok_or_else(cap_err)?;
        if universe > UNIVERSE_CAP as u128 {
            return Err(Error::CapExceeded {
                what: "prover coverage universe",
                limit: UNIVERSE_CAP,
                got: universe.min(usize::MAX as u128) as usize,
            });
        }
        let digit_space = digit_space as usize;
        let universe = universe as usize;
        let q_count = q_count_big as usize;
        let r_count = r_count_big as usize;

        // questions each prover asks under each random state
        let mut buckets: Vec<HashMap<usize, Vec<usize>>> = vec![HashMap::new(); k];
        for r in 0..r_count {
            let (cls, pos) = radix.decode_r(r);
            let distinguished: Vec<usize> =
                (0..ell).map(|j| formula.var_at(cls[j], pos[j])).collect();
            for (i, &w) in params.codewords().iter().enumerate() {
                let clause_digits: Vec<usize> = (0..ell)
                    .filter(|&j| w >> j & 1 == 1)
                    .map(|j| cls[j])
                    .collect();
                let var_digits: Vec<usize> = (0..ell)
                    .filter(|&j| w >> j & 1 == 0)
                    .map(|j| distinguished[j])
                    .collect();
                let q = radix.encode_q(&clause_digits, &var_digits);
                buckets[i].entry(q).or_default().push(r);
            }
        }

        // enumerate valid answers per question and assemble the items
        let mut items = Vec::new();
        for q in 0..q_count {
            let (clause_digits, _) = radix.decode_q(q, half);
            let mut answers: Vec<u64> = vec![0];
            for (t, &c) in clause_digits.iter().enumerate() {
                let satisfying: Vec<u64> = (0..8u8)
                    .filter(|&p| formula.clause_pattern_satisfies(c, p))
                    .map(u64::from)
                    .collect();
                answers = answers
                    .iter()
                    .flat_map(|&a| satisfying.iter().map(move |&p| a | p << (3 * t)))
                    .collect();
            }
            for t in 0..half {
                answers = answers
                    .iter()
                    .flat_map(|&a| [a, a | 1 << (3 * half + t)])
                    .collect();
            }
            for answer in answers {
                for prover in 0..k {
                    items.push(ProverItem {
                        question: q,
                        answer,
                        prover,
                    });
                }
            }
        }

        let total_bits = items.len() as u128 * universe as u128;
        if total_bits > COVER_BITS_CAP {
            return Err(Error::CapExceeded {
                what: "prover coverage storage bits",
                limit: COVER_BITS_CAP as usize,
                got: total_bits.min(usize::MAX as u128) as usize,
            });
        }

        // h((q, a, i)) = union over matching r of B(r, rho, i)
        let mut covers = Vec::with_capacity(items.len());
        for item in &items {
            let mut cover = BitSet::new(universe);
            if let Some(rs) = buckets[item.prover].get(&item.question) {
                for &r in rs {
                    let rho = Self::extract_rho(&params, &radix, item, r);
                    Self::insert_block(&mut cover, digit_space, k, r, rho, item.prover);
                }
            }
            covers.push(cover);
        }

        let coverage = CoverageFn::new(universe, covers)?;
        let item_index = items
            .iter()
            .enumerate()
            .map(|(idx, it)| (it.clone(), idx))
            .collect();
        Ok(KProverCoverage {
            formula,
            params,
            coverage,
            items,
            item_index,
            q_count,
            r_count,
            assignment_count,
            k_prime: k * q_count,
        })
    }

    /// The assignment to the distinguished variables induced by an answer,
    /// as an index in `[L]`.
    fn extract_rho(params: &KProverParams, radix: &Radix, item: &ProverItem, r: usize) -> usize {
        let ell = params.ell();
        let half = ell / 2;
        let w = params.codewords()[item.prover];
        let (_cls, pos) = radix.decode_r(r);
        let mut rho = 0usize;
        let (mut clause_slot, mut var_slot) = (0usize, 0usize);
        for (j, &p) in pos.iter().enumerate().take(ell) {
            let bit = if w >> j & 1 == 1 {
                // clause query: pick the distinguished variable's bit out of
                // the 3-bit clause answer
                let b = item.answer >> (3 * clause_slot + p) & 1;
                clause_slot += 1;
                b
            } else {
                let b = item.answer >> (3 * half + var_slot) & 1;
                var_slot += 1;
                b
            };
            rho |= (bit as usize) << j;
        }
        rho
    }

    fn insert_block(
        cover: &mut BitSet,
        digit_space: usize,
        k: usize,
        r: usize,
        rho: usize,
        prover: usize,
    ) {
        // all digit strings with digit `rho` equal to `prover`
        let low_span = k.pow(rho as u32);
        let high_span = digit_space / low_span / k;
        let base = r * digit_space;
        for high in 0..high_span {
            for low in 0..low_span {
                let digits = low + prover * low_span + high * low_span * k;
                cover.insert(base + digits);
            }
        }
    }

    pub fn coverage(&self) -> &CoverageFn {
        &self.coverage
    }

    pub fn items(&self) -> &[ProverItem] {
        &self.items
    }

    pub fn item_count(&self) -> usize {
        self.items.len()
    }

    pub fn k_prime(&self) -> usize {
        self.k_prime
    }

    pub fn question_count(&self) -> usize {
        self.q_count
    }

    pub fn randomness_count(&self) -> usize {
        self.r_count
    }

    /// `L`, the number of assignments to the distinguished variables.
    pub fn assignment_count(&self) -> usize {
        self.assignment_count
    }

    pub fn universe_size(&self) -> usize {
        self.coverage.universe_size()
    }

    pub fn formula(&self) -> &Formula3Cnf5 {
        &self.formula
    }

    pub fn params(&self) -> &KProverParams {
        &self.params
    }

    /// The set `{(q, a(q), i)}` induced by a satisfying assignment: every
    /// question answered according to the assignment, for every prover.
    pub fn planted_assignment_set(&self, assignment: &[bool]) -> Result<ItemSet> {
        if !self.formula.satisfies(assignment) {
            return Err(Error::precondition(
                "assignment does not satisfy the formula".to_string(),
            ));
        }
        let radix = Radix {
            n_clauses: self.formula.clause_count(),
            n_vars: self.formula.n_vars(),
            ell: self.params.ell(),
        };
        let half = self.params.ell() / 2;
        let mut set = ItemSet::empty(self.items.len());
        for q in 0..self.q_count {
            let (clause_digits, var_digits) = radix.decode_q(q, half);
            let mut answer = 0u64;
            for (t, &c) in clause_digits.iter().enumerate() {
                for p in 0..3 {
                    answer |= (assignment[self.formula.var_at(c, p)] as u64) << (3 * t + p);
                }
            }
            for (t, &v) in var_digits.iter().enumerate() {
                answer |= (assignment[v] as u64) << (3 * half + t);
            }
            for prover in 0..self.params.k() {
                let key = ProverItem {
                    question: q,
                    answer,
                    prover,
                };
                let idx = self.item_index.get(&key).ok_or_else(|| {
                    Error::invalid("derived answer missing from the item set".to_string())
                })?;
                set.insert(*idx);
            }
        }
        Ok(set)
    }

    /// Block union size within one `U_r` slice, as raw element counts inside
    /// the `[k]^L` digit space. `family` pairs are `(prover, assignment)`.
    fn family_union_count(&self, family: &[(usize, usize)]) -> usize {
        let k = self.params.k();
        let l = self.assignment_count;
        let digit_space = k.pow(l as u32);
        let mut seen = BitSet::new(digit_space);
        for &(prover, j) in family {
            let low_span = k.pow(j as u32);
            let high_span = digit_space / low_span / k;
            for high in 0..high_span {
                for low in 0..low_span {
                    seen.insert(low + prover * low_span + high * low_span * k);
                }
            }
        }
        seen.count_ones()
    }
}

/// Outcome of the sampled structural checks on the blocks `B(r, j, i)`.
#[derive(Clone, Debug)]
pub struct BlockClaimsReport {
    pub union_checks: usize,
    pub family_checks: usize,
    pub failures: Vec<String>,
}

impl BlockClaimsReport {
    pub fn pass(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Sampled verification that (a) the k blocks `B(r, j, i)` over all provers
/// tile `U_r`, and (b) for block families whose `j` indices are pairwise
/// distinct, the union covers exactly a `1 - (1 - 1/k)^|family|` fraction.
pub fn verify_block_claims(cov: &KProverCoverage, samples: usize, seed: u64) -> BlockClaimsReport {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let k = cov.params.k();
    let l = cov.assignment_count;
    let digit_space = k.pow(l as u32);
    let mut failures = Vec::new();

    let mut union_checks = 0;
    for _ in 0..samples {
        let j = rng.random_range(0..l);
        let family: Vec<(usize, usize)> = (0..k).map(|i| (i, j)).collect();
        let count = cov.family_union_count(&family);
        union_checks += 1;
        if count != digit_space {
            failures.push(format!(
                "blocks at assignment index {j} cover {count} of {digit_space} elements"
            ));
        }
    }

    let mut family_checks = 0;
    for _ in 0..samples {
        let size = rng.random_range(1..=l);
        let js = index_sample(&mut rng, l, size);
        let family: Vec<(usize, usize)> = js.iter().map(|j| (rng.random_range(0..k), j)).collect();
        let count = cov.family_union_count(&family);
        // exact closed form: k^L - (k-1)^z k^(L-z)
        let expected = digit_space - (k - 1).pow(size as u32) * k.pow((l - size) as u32);
        family_checks += 1;
        if count != expected {
            failures.push(format!(
                "disjoint family of size {size} covers {count}, expected {expected}"
            ));
        }
    }

    BlockClaimsReport {
        union_checks,
        family_checks,
        failures,
    }
}

/// `f(singleton)` for every item must equal `1/k'`.
pub fn singleton_values_uniform(cov: &KProverCoverage) -> bool {
    let expected = Rational::new(1.into(), (cov.k_prime() as i64).into());
    (0..cov.item_count()).all(|i| cov.coverage().singleton_value(i) == expected)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> KProverCoverage {
        let formula = Formula3Cnf5::tiny_satisfiable();
        let params = KProverParams::greedy(2, 2).unwrap();
        KProverCoverage::build(formula, params).unwrap()
    }

    #[test]
    fn tiny_formula_is_valid_and_satisfiable() {
        let f = Formula3Cnf5::tiny_satisfiable();
        assert_eq!(f.clause_count(), 5);
        assert!(f.satisfies(&[true, true, true]));
        assert!(!f.satisfies(&[false, false, false]));
    }

    #[test]
    fn formula_validation_rejects_bad_shapes() {
        assert!(Formula3Cnf5::new(3, vec![[1, 2, 3]; 4]).is_err());
        let mut clauses = Formula3Cnf5::tiny_satisfiable().clauses().to_vec();
        clauses[0] = [1, 1, 2];
        assert!(Formula3Cnf5::new(3, clauses).is_err());
    }

    #[test]
    fn greedy_codebook_smallest_case() {
        let p = KProverParams::greedy(2, 2).unwrap();
        assert_eq!(p.codewords(), &[0b01, 0b10]);
        assert!(KProverParams::new(2, 2, vec![0b01, 0b01]).is_err());
        assert!(KProverParams::new(2, 2, vec![0b11, 0b01]).is_err());
    }

    #[test]
    fn toy_scale_counts() {
        let cov = toy();
        assert_eq!(cov.question_count(), 15);
        assert_eq!(cov.k_prime(), 30);
        assert_eq!(cov.randomness_count(), 225);
        assert_eq!(cov.assignment_count(), 4);
        assert_eq!(cov.universe_size(), 3600);
        // 15 questions x 14 valid answers x 2 provers
        assert_eq!(cov.item_count(), 420);
    }

    #[test]
    fn singletons_are_uniform() {
        assert!(singleton_values_uniform(&toy()));
    }

    #[test]
    fn planted_assignment_covers_everything() {
        let cov = toy();
        let set = cov.planted_assignment_set(&[true, true, true]).unwrap();
        assert_eq!(set.len(), cov.k_prime());
        assert_eq!(
            cov.coverage().value_rational(&set),
            Rational::new(1.into(), 1.into())
        );
        assert!(cov.planted_assignment_set(&[false, false, false]).is_err());
    }

    #[test]
    fn block_claims_hold_on_the_toy() {
        let cov = toy();
        let report = verify_block_claims(&cov, 50, 7);
        assert!(report.pass(), "{:?}", report.failures);
    }

    #[test]
    fn family_counts_match_closed_form() {
        let cov = toy();
        // |I| = 1: k^(L-1) = 8; |I| = 2 disjoint: 12 of 16; |I| = L: 15 of 16
        assert_eq!(cov.family_union_count(&[(0, 0)]), 8);
        assert_eq!(cov.family_union_count(&[(0, 0), (1, 1)]), 12);
        assert_eq!(
            cov.family_union_count(&[(0, 0), (0, 1), (0, 2), (0, 3)]),
            15
        );
    }

    #[test]
    fn universe_cap_is_enforced() {
        let formula = Formula3Cnf5::tiny_satisfiable();
        let params = KProverParams::greedy(2, 4);
        // ell = 4 gives L = 16 and a universe of k^16 * |R|, far past the cap
        match params {
            Ok(p) => assert!(matches!(
                KProverCoverage::build(formula, p),
                Err(Error::CapExceeded { .. })
            )),
            Err(_) => panic!("greedy codebook at ell = 4 should exist"),
        }
    }
}
