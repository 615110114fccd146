//! Combinatorial contract design at desk scale: the multi-agent and
//! multi-action linear-contract models, exact solvers, the instance
//! families used in their analysis, clique approximation through contract
//! oracles, and a brute-force/Monte-Carlo verification harness.

pub mod bitset;
pub mod cliquereduce;
pub mod error;
pub mod gadgets;
pub mod graph;
pub mod io;
pub mod itemset;
pub mod multiaction;
pub mod multiagent;
pub mod setfn;
pub mod value;
pub mod verify;

pub use error::{Error, Result};
pub use itemset::ItemSet;
pub use value::{Quad, Rational, Value};
