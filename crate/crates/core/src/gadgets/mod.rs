//! Generators for every instance family used by the verification harness:
//! hidden-set XOS instances, clique XOS gadgets, planted-cover coverage
//! functions with their uniform-cost contract gadgets, and the k-prover
//! coverage construction.

mod clique_xos;
mod hidden_set;
mod kprover;
mod planted;

pub use clique_xos::{clique_xos_instance, CliqueGadgetFn};
pub use hidden_set::{hidden_set_instance, hidden_set_instance_seeded, HiddenSetFn};
pub use kprover::{
    singleton_values_uniform, verify_block_claims, BlockClaimsReport, Formula3Cnf5,
    KProverCoverage, KProverParams, ProverItem, UNIVERSE_CAP,
};
pub use planted::{
    max_coverage_at_size, multiaction_submodular_gadget, multiagent_submodular_gadget,
    planted_cover_coverage,
};
