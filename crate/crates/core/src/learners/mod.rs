//! Dispatch strategies over a set of rule tables.
//!
//! * Sequential: tables run one after another in list order. A table that
//!   exhausts its budget blocks the learner; later tables are never tried.
//! * Parallel: one worker per table in lockstep with a monitor; the first
//!   accepting worker (lowest index on ties) stops everyone.
//! * Hybrid: lanes of hang-unrelated tables run sequentially inside a worker,
//!   lanes run in parallel.

mod hybrid;
mod lockstep;

use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

pub use hybrid::{build_hybrid, HybridPlan};

use crate::language::{LanguageClass, StringUniverse};
use crate::oracle::{check_alphabet, Oracle, OracleError};
use crate::tm::{self, RuleTable, RunOutcome, RunResult, TmError};

/// Storage charged for the interpreter itself, in the same units as table size.
pub const INTERPRETER_STORAGE: usize = 1;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LearnerError {
    #[error("a learner needs at least one rule table")]
    NoTables,
    #[error("table `{table}` does not share the learner's alphabet and blank")]
    AlphabetMismatch { table: String },
    #[error("invalid hybrid plan: {0}")]
    InvalidPlan(String),
    #[error(transparent)]
    Tm(#[from] TmError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeKind {
    Sequential,
    Parallel,
    Hybrid,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Mode {
    Sequential,
    Parallel,
    Hybrid(HybridPlan),
}

impl Mode {
    pub fn kind(&self) -> ModeKind {
        match self {
            Mode::Sequential => ModeKind::Sequential,
            Mode::Parallel => ModeKind::Parallel,
            Mode::Hybrid(_) => ModeKind::Hybrid,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LearnerOutcome {
    Accepted { index: usize, table: String },
    Rejected,
    Stuck { index: usize, table: String },
}

impl LearnerOutcome {
    pub fn is_accepted(&self) -> bool {
        matches!(self, LearnerOutcome::Accepted { .. })
    }

    pub fn accepting_index(&self) -> Option<usize> {
        match self {
            LearnerOutcome::Accepted { index, .. } => Some(*index),
            _ => None,
        }
    }
}

/// One table's run as seen by a learner.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TableRun {
    pub index: usize,
    pub table: String,
    #[serde(flatten)]
    pub result: RunResult,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LearnerResult {
    pub outcome: LearnerOutcome,
    /// Interpreter steps until the learner's verdict.
    pub time: u64,
    /// Tape cells in use when the verdict was reached.
    pub space: usize,
    pub per_table: Vec<TableRun>,
}

/// A named strategy: ordered tables, a dispatch mode and a per-table budget.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LearnerSpec {
    name: String,
    tables: Vec<Arc<RuleTable>>,
    mode: Mode,
    budget: u64,
}

impl LearnerSpec {
    pub fn new(
        name: impl Into<String>,
        tables: Vec<Arc<RuleTable>>,
        mode: Mode,
        budget: u64,
    ) -> Result<Self, LearnerError> {
        let first = tables.first().ok_or(LearnerError::NoTables)?;
        if budget == 0 {
            return Err(TmError::ZeroBudget.into());
        }
        let mut symbols: Vec<char> = first.alphabet().to_vec();
        symbols.sort_unstable();
        for t in &tables[1..] {
            let mut other = t.alphabet().to_vec();
            other.sort_unstable();
            if other != symbols || t.blank() != first.blank() {
                return Err(LearnerError::AlphabetMismatch { table: t.name().to_string() });
            }
        }
        if let Mode::Hybrid(plan) = &mode {
            HybridPlan::new(tables.len(), plan.lanes().to_vec(), plan.hang_order().clone())?;
        }
        Ok(Self { name: name.into(), tables, mode, budget })
    }

    pub fn sequential(name: impl Into<String>, tables: Vec<Arc<RuleTable>>, budget: u64) -> Result<Self, LearnerError> {
        Self::new(name, tables, Mode::Sequential, budget)
    }

    pub fn parallel(name: impl Into<String>, tables: Vec<Arc<RuleTable>>, budget: u64) -> Result<Self, LearnerError> {
        Self::new(name, tables, Mode::Parallel, budget)
    }

    /// Builds the hang relation with `oracle` and lanes the tables accordingly.
    pub fn hybrid(
        name: impl Into<String>,
        tables: Vec<Arc<RuleTable>>,
        universe: &Arc<StringUniverse>,
        oracle: &Oracle,
        budget: u64,
    ) -> Result<Self, LearnerError> {
        let plan = build_hybrid(&tables, universe, oracle)?;
        Self::new(name, tables, Mode::Hybrid(plan), budget)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn tables(&self) -> &[Arc<RuleTable>] {
        &self.tables
    }

    pub fn mode(&self) -> &Mode {
        &self.mode
    }

    pub fn budget(&self) -> u64 {
        self.budget
    }

    pub fn with_name(self, name: impl Into<String>) -> Self {
        Self { name: name.into(), ..self }
    }

    pub fn accept(&self, input: &str) -> Result<LearnerResult, LearnerError> {
        self.accept_with_budget(input, self.budget)
    }

    pub fn accept_with_budget(&self, input: &str, budget: u64) -> Result<LearnerResult, LearnerError> {
        let result = match &self.mode {
            Mode::Sequential => seq_accept(&self.tables, budget, input)?,
            Mode::Parallel => par_accept(&self.tables, budget, input)?,
            Mode::Hybrid(plan) => hybrid_accept(&self.tables, plan, budget, input)?,
        };
        Ok(result)
    }

    /// Same result as [`LearnerSpec::accept`], with workers of a macro-step
    /// advanced on the rayon pool.
    pub fn accept_concurrent(&self, input: &str) -> Result<LearnerResult, LearnerError> {
        let result = match &self.mode {
            Mode::Sequential => seq_accept(&self.tables, self.budget, input)?,
            Mode::Parallel => {
                check_input(&self.tables, self.budget, input)?;
                lockstep::run_lanes(
                    &self.tables,
                    HybridPlan::singletons(self.tables.len()).lanes(),
                    self.budget,
                    input,
                    true,
                )?
            }
            Mode::Hybrid(plan) => {
                check_input(&self.tables, self.budget, input)?;
                lockstep::run_lanes(&self.tables, plan.lanes(), self.budget, input, true)?
            }
        };
        Ok(result)
    }
}

fn check_input(tables: &[Arc<RuleTable>], budget: u64, input: &str) -> Result<(), TmError> {
    if budget == 0 {
        return Err(TmError::ZeroBudget);
    }
    tables.iter().try_for_each(|t| t.validate_input(input))
}

/// Runs tables in list order until one accepts, one exhausts the budget, or
/// all reject. Time is the sum of steps, space the largest single run.
pub fn seq_accept(tables: &[Arc<RuleTable>], budget: u64, input: &str) -> Result<LearnerResult, TmError> {
    check_input(tables, budget, input)?;
    let mut per_table = Vec::new();
    let mut time = 0;
    let mut space = 0;
    let mut outcome = LearnerOutcome::Rejected;
    for (index, table) in tables.iter().enumerate() {
        let result = tm::run(table, input, budget)?;
        time += result.steps;
        space = space.max(result.space);
        per_table.push(TableRun { index, table: table.name().to_string(), result });
        let name = table.name().to_string();
        match result.outcome {
            RunOutcome::Accepted => {
                outcome = LearnerOutcome::Accepted { index, table: name };
                break;
            }
            RunOutcome::BudgetExhausted => {
                outcome = LearnerOutcome::Stuck { index, table: name };
                break;
            }
            RunOutcome::Rejected | RunOutcome::Working => {}
        }
    }
    Ok(LearnerResult { outcome, time, space, per_table })
}

/// One lockstep worker per table. Time is the accepting worker's own steps;
/// space adds up every worker's tape at the halting macro-step.
pub fn par_accept(tables: &[Arc<RuleTable>], budget: u64, input: &str) -> Result<LearnerResult, TmError> {
    check_input(tables, budget, input)?;
    lockstep::run_lanes(tables, HybridPlan::singletons(tables.len()).lanes(), budget, input, false)
}

/// One lockstep worker per lane of `plan`, each running its lane sequentially.
pub fn hybrid_accept(
    tables: &[Arc<RuleTable>],
    plan: &HybridPlan,
    budget: u64,
    input: &str,
) -> Result<LearnerResult, TmError> {
    check_input(tables, budget, input)?;
    lockstep::run_lanes(tables, plan.lanes(), budget, input, false)
}

/// Strings of the universe the learner accepts when every table gets
/// `oracle.guard()` steps.
///
/// Any table that exhausts the guard must be proven divergent by the oracle;
/// otherwise the string's membership is undecided and this fails.
pub fn learner_class(
    spec: &LearnerSpec,
    universe: &Arc<StringUniverse>,
    oracle: &Oracle,
) -> Result<LanguageClass, LearnerError> {
    for t in spec.tables() {
        check_alphabet(t, universe)?;
    }
    let flags = oracle.engine().try_map(universe, |s| -> Result<bool, LearnerError> {
        let result = spec.accept_with_budget(s, oracle.guard())?;
        for run in result.per_table.iter().filter(|r| r.result.outcome == RunOutcome::BudgetExhausted) {
            oracle.decide_strict(&spec.tables()[run.index], s)?;
        }
        Ok(result.outcome.is_accepted())
    })?;
    Ok(LanguageClass::from_flags(universe, &flags))
}

/// Interpreter storage plus the size of every table. Mode does not enter.
pub fn storage_size(spec: &LearnerSpec) -> usize {
    INTERPRETER_STORAGE + spec.tables().iter().map(|t| t.size()).sum::<usize>()
}

/// Whether the learner accepts exactly the union of its tables' classes.
pub fn is_complete(spec: &LearnerSpec, universe: &Arc<StringUniverse>, oracle: &Oracle) -> Result<bool, LearnerError> {
    let union = oracle.union_class(spec.tables(), universe)?;
    Ok(learner_class(spec, universe, oracle)? == union)
}
