//! Verification toolchain for skillset-based autonomous systems.
//!
//! A skillset describes a robot's resources (small state machines), the
//! events its environment can trigger, and the skills it can execute. This
//! crate parses that description, translates it into a 1-safe Petri net with
//! transition priorities, explores the reachable state space, and runs a
//! fixed catalog of behavioral checks (deadlocks, dead transitions, token
//! invariants, skill liveness) with counterexample paths. A direct
//! interpreter of the skillset semantics doubles as an independent oracle
//! for the translation.

pub mod build;
pub mod checks;
pub mod explore;
pub mod export;
pub mod generate;
pub mod guard;
pub mod lower;
pub mod model;
pub mod net;
pub mod oracle;
pub mod parser;
pub mod printer;
pub mod report;
pub mod validate;

pub use build::{build_net, BuildOptions, BuildReport};
pub use checks::{
    check_dead, check_deadset, check_deadskill, check_live, check_safe, CheckResult, Verdict,
};
pub use explore::{explore, ExploreOptions, ReachabilityGraph};
pub use export::{export_net, to_dot, ExportOptions};
pub use model::{Guard, Skillset};
pub use net::{Marking, PetriNet};
pub use oracle::{check_equivalence, explore_direct, DirectLts};
pub use parser::{parse_skillset, ParseError};
pub use printer::print_skillset;
pub use report::Report;
pub use validate::{validate, ValidationReport};
