//! Clique-size classification and approximation through a pluggable
//! contract-approximation oracle, plus an exact branch-and-bound baseline.
//!
//! `distinguish` builds the clique XOS gadget for `(G, delta, beta)`, asks
//! the oracle for an approximately optimal share, and classifies the clique
//! number by which side of `M/(M+1)` the share falls on. `approx_clique`
//! sweeps `delta = 2^i` to bracket the clique number within `beta^2/4`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gadgets::CliqueGadgetFn;
use crate::graph::Graph;
use crate::multiaction::{envelope_candidates, solve_envelope, MultiActionInstance};
use crate::value::{Rational, Value};

/// Cap for the exact clique baseline.
pub const CLIQUE_CAP: usize = 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum CliqueVerdict {
    Small,
    Large,
}

/// An algorithm producing a share guaranteed to be a beta-approximation of
/// the optimal contract.
pub trait ContractOracle: Sync {
    /// The approximation factor this oracle promises.
    fn declared_beta(&self) -> Rational;
    fn best_contract(&self, inst: &MultiActionInstance) -> Result<Value>;
}

/// The exact solver as an oracle; a beta-approximation for every beta.
#[derive(Clone, Copy, Debug, Default)]
pub struct ExactOracle;

impl ContractOracle for ExactOracle {
    fn declared_beta(&self) -> Rational {
        Rational::new(1.into(), 1.into())
    }

    fn best_contract(&self, inst: &MultiActionInstance) -> Result<Value> {
        Ok(solve_envelope(inst)?.alpha)
    }
}

/// Deliberately degraded oracle: among the best-response change points it
/// returns the worst share whose utility still meets the declared beta.
/// Exercises both classification branches in tests.
#[derive(Clone, Debug)]
pub struct WorstConformingOracle {
    beta: Rational,
}

impl WorstConformingOracle {
    pub fn new(beta: Rational) -> Result<Self> {
        if beta <= Rational::new(0.into(), 1.into()) || beta > Rational::new(1.into(), 1.into()) {
            return Err(Error::invalid("oracle beta must lie in (0, 1]"));
        }
        Ok(WorstConformingOracle { beta })
    }
}

impl ContractOracle for WorstConformingOracle {
    fn declared_beta(&self) -> Rational {
        self.beta.clone()
    }

    fn best_contract(&self, inst: &MultiActionInstance) -> Result<Value> {
        let cands = envelope_candidates(inst)?;
        let best = cands
            .iter()
            .map(|c| c.principal_utility.clone())
            .max()
            .ok_or_else(|| Error::invalid("no envelope candidates"))?;
        let floor = &Value::Exact(self.beta.clone()) * &best;
        let worst = cands
            .into_iter()
            .filter(|c| c.principal_utility >= floor)
            .min_by(|a, b| {
                a.principal_utility
                    .cmp(&b.principal_utility)
                    .then(b.alpha.cmp(&a.alpha))
            })
            .expect("the maximizer itself always conforms");
        Ok(worst.alpha)
    }
}

/// Exact maximum clique size by branch and bound.
pub fn max_clique_bruteforce(g: &Graph) -> Result<usize> {
    let n = g.vertex_count();
    if n > CLIQUE_CAP {
        return Err(Error::CapExceeded {
            what: "exact clique search",
            limit: CLIQUE_CAP,
            got: n,
        });
    }
    fn expand(g: &Graph, cand: u64, size: usize, best: &mut usize) {
        if size + cand.count_ones() as usize <= *best {
            return;
        }
        if cand == 0 {
            *best = size;
            return;
        }
        let v = cand.trailing_zeros() as usize;
        expand(g, cand & g.adjacency_mask(v), size + 1, best);
        expand(g, cand & !(1u64 << v), size, best);
    }
    let mut best = 0;
    let full = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    expand(g, full, 0, &mut best);
    Ok(best)
}

/// One classification round: the gadget, the oracle's share, the exact
/// threshold it was compared against, and the verdict.
#[derive(Clone, Debug)]
pub struct DistinguishOutcome {
    pub delta: usize,
    pub alpha: Value,
    pub threshold: Rational,
    pub verdict: CliqueVerdict,
}

/// Classifies a share against the `M/(M+1)` threshold with exact rational
/// comparison.
pub fn classify_share(alpha: &Value, threshold: &Rational) -> CliqueVerdict {
    if *alpha < Value::Exact(threshold.clone()) {
        CliqueVerdict::Small
    } else {
        CliqueVerdict::Large
    }
}

/// Builds the clique gadget for `(graph, delta, beta)`, queries the oracle,
/// and returns the full round record.
pub fn distinguish_outcome(
    graph: &Graph,
    delta: usize,
    beta: &Rational,
    oracle: &dyn ContractOracle,
) -> Result<DistinguishOutcome> {
    let gadget = CliqueGadgetFn::build(graph, delta, beta)?;
    let inst = gadget.instance(false);
    let alpha = oracle.best_contract(&inst)?;
    let threshold = gadget.upper_candidate();
    let verdict = classify_share(&alpha, &threshold);
    Ok(DistinguishOutcome {
        delta,
        alpha,
        threshold,
        verdict,
    })
}

/// SMALL when the oracle's share sits below `M/(M+1)`, LARGE otherwise.
pub fn distinguish(
    graph: &Graph,
    delta: usize,
    beta: &Rational,
    oracle: &dyn ContractOracle,
) -> Result<CliqueVerdict> {
    Ok(distinguish_outcome(graph, delta, beta, oracle)?.verdict)
}

#[derive(Clone, Debug)]
pub struct CliqueApproxReport {
    pub estimate: usize,
    pub rounds: Vec<DistinguishOutcome>,
}

/// Sweeps `delta = 2^i` for `i = 0..=log2(|V|)`; returns 1 when even
/// `delta = 1` classifies as SMALL, otherwise `2^i_max` for the largest
/// LARGE round. With a conforming beta-oracle the estimate lies in
/// `[beta^2/4 * omega, omega]`.
pub fn approx_clique(
    graph: &Graph,
    beta: &Rational,
    oracle: &dyn ContractOracle,
) -> Result<CliqueApproxReport> {
    let n = graph.vertex_count();
    if n == 0 {
        return Err(Error::precondition(
            "clique approximation needs at least one vertex".to_string(),
        ));
    }
    let mut rounds = Vec::new();
    for i in 0..=n.ilog2() {
        rounds.push(distinguish_outcome(graph, 1 << i, beta, oracle)?);
    }
    let estimate = if rounds[0].verdict == CliqueVerdict::Small {
        1
    } else {
        rounds
            .iter()
            .filter(|r| r.verdict == CliqueVerdict::Large)
            .map(|r| r.delta)
            .max()
            .expect("round 0 is LARGE here")
    };
    Ok(CliqueApproxReport { estimate, rounds })
}
