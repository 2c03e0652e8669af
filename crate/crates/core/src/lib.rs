//! Rule-table learners on a single-tape interpreter.
//!
//! The crate is organised bottom-up:
//!
//! * [`tm`] parses rule tables and runs them with step and space accounting.
//! * [`language`] and [`oracle`] enumerate finite string universes and decide
//!   halting exactly for small machines, turning language classes into sets.
//! * [`learners`] dispatches a set of tables sequentially, in parallel, or in
//!   hang-aware hybrid lanes.
//! * [`history`] tracks a growing rule set and the classes it accepts.
//! * [`game`] scores strategies against each other and runs replicator dynamics.

pub mod fixtures;
pub mod game;
pub mod history;
pub mod language;
pub mod learners;
pub mod oracle;
pub mod random;
pub mod tm;

pub use language::{Engine, LanguageClass, StringUniverse};
pub use learners::{
    build_hybrid, hybrid_accept, is_complete, learner_class, par_accept, seq_accept, storage_size, HybridPlan,
    LearnerError, LearnerOutcome, LearnerResult, LearnerSpec, Mode, ModeKind, TableRun,
};
pub use oracle::{decide_halt, HaltDecision, Oracle, OracleError, Witness};
pub use tm::{run, Move, ParseError, RuleTable, RunOutcome, RunResult, TableError, TapeConfig, TmError};
