//! Multi-property safety checking for and-inverter-graph transition systems.
//!
//! Each property is proved *locally*: under the assumption that every other
//! expected-to-hold property is true on the present state. If all local
//! proofs succeed the aggregate holds globally; otherwise the locally failing
//! properties form the debugging set, the first properties to break on any
//! counterexample of the aggregate. Proofs use IC3/PDR on an in-crate CDCL
//! solver and may re-use strengthening clauses across properties.

pub mod aiger;
pub mod builder;
pub mod clause_db;
pub mod cube;
pub mod model;
pub mod oracle;
pub mod orchestrator;
pub mod pdr;
pub mod random;
pub mod report;
pub mod sat;
pub mod unroll;

pub use aiger::{
    emit_ascii, emit_binary, emit_witness, gen_counter, gen_counter_thresholds, parse,
    parse_witness,
};
pub use cube::{Clause, Cube};
pub use model::{
    eval_circuit, eval_transition, is_valid_local_transition, property_violated, replay_trace,
    Circuit, Counterexample, Lit, PropertyKind, PropertySpec, ReplayResult, TraceFrame,
};
pub use orchestrator::{
    run, Mode, RunReport, TaskOptions, Verdict, VerdictStatus, VerificationTask,
};
pub use pdr::{certify, check_property, LiftMode, PdrOptions, PdrOutcome, PdrStatus};
