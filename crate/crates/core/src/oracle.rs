//! Exact halting decisions for small machines.
//!
//! Two divergence witnesses are recognised: a repeated full configuration,
//! and a head parked on an all-blank suffix whose blank transitions keep moving
//! right through a cycle of states. Both are proofs of non-termination. Runs
//! that neither halt nor produce a witness within the guard are `Unknown`, and
//! every class-level operation treats `Unknown` as an error.

use std::collections::HashSet;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::language::{Engine, LanguageClass, StringUniverse};
use crate::tm::{RuleTable, Status, TapeConfig, TmError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Witness {
    ConfigCycle,
    BlankRunaway,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum HaltDecision {
    HaltsAccept { steps: u64 },
    HaltsReject { steps: u64 },
    Diverges(Witness),
    Unknown,
}

impl HaltDecision {
    pub fn halts(&self) -> bool {
        matches!(self, HaltDecision::HaltsAccept { .. } | HaltDecision::HaltsReject { .. })
    }

    pub fn accepts(&self) -> bool {
        matches!(self, HaltDecision::HaltsAccept { .. })
    }

    pub fn diverges(&self) -> bool {
        matches!(self, HaltDecision::Diverges(_))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("halting of table `{table}` on input {input:?} is undecided within the guard")]
    Unknown { table: String, input: String },
    #[error("table `{table}` does not declare universe symbol `{symbol}`")]
    AlphabetMismatch { table: String, symbol: char },
    #[error(transparent)]
    Tm(#[from] TmError),
}

/// Decides whether `table` halts on `input`, simulating at most `guard` steps.
pub fn decide_halt(table: &RuleTable, input: &str, guard: u64) -> Result<HaltDecision, TmError> {
    if guard == 0 {
        return Err(TmError::ZeroBudget);
    }
    let mut config = TapeConfig::start(table, input)?;
    let mut seen = HashSet::new();
    loop {
        if config.sweeps_blanks_forever(table) {
            return Ok(HaltDecision::Diverges(Witness::BlankRunaway));
        }
        if !seen.insert(config.key(table)) {
            return Ok(HaltDecision::Diverges(Witness::ConfigCycle));
        }
        if config.steps() >= guard {
            return Ok(HaltDecision::Unknown);
        }
        match config.step(table)? {
            Status::Running => {}
            Status::Accepted => return Ok(HaltDecision::HaltsAccept { steps: config.steps() }),
            Status::Rejected => return Ok(HaltDecision::HaltsReject { steps: config.steps() }),
        }
    }
}

/// Verdicts of one table on every string of a universe, all definite.
#[derive(Debug, Clone)]
pub struct HaltProfile {
    universe: Arc<StringUniverse>,
    verdicts: Vec<HaltDecision>,
}

impl HaltProfile {
    pub fn verdicts(&self) -> &[HaltDecision] {
        &self.verdicts
    }

    pub fn accepted(&self) -> LanguageClass {
        let flags: Vec<bool> = self.verdicts.iter().map(HaltDecision::accepts).collect();
        LanguageClass::from_flags(&self.universe, &flags)
    }

    pub fn hangs(&self) -> LanguageClass {
        let flags: Vec<bool> = self.verdicts.iter().map(HaltDecision::diverges).collect();
        LanguageClass::from_flags(&self.universe, &flags)
    }

    pub fn halts(&self) -> LanguageClass {
        let flags: Vec<bool> = self.verdicts.iter().map(HaltDecision::halts).collect();
        LanguageClass::from_flags(&self.universe, &flags)
    }
}

/// Strict oracle: a guard plus the engine used to sweep universes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Oracle {
    guard: u64,
    engine: Engine,
}

impl Oracle {
    pub fn new(guard: u64) -> Self {
        Self { guard, engine: Engine::Serial }
    }

    pub fn with_engine(self, engine: Engine) -> Self {
        Self { engine, ..self }
    }

    pub fn guard(&self) -> u64 {
        self.guard
    }

    pub fn engine(&self) -> Engine {
        self.engine
    }

    pub fn decide(&self, table: &RuleTable, input: &str) -> Result<HaltDecision, TmError> {
        decide_halt(table, input, self.guard)
    }

    /// Like [`Oracle::decide`], but `Unknown` is an error.
    pub fn decide_strict(&self, table: &RuleTable, input: &str) -> Result<HaltDecision, OracleError> {
        match self.decide(table, input)? {
            HaltDecision::Unknown => {
                Err(OracleError::Unknown { table: table.name().to_string(), input: input.to_string() })
            }
            verdict => Ok(verdict),
        }
    }

    pub fn profile(&self, table: &RuleTable, universe: &Arc<StringUniverse>) -> Result<HaltProfile, OracleError> {
        check_alphabet(table, universe)?;
        let verdicts = self.engine.try_map(universe, |s| self.decide_strict(table, s))?;
        Ok(HaltProfile { universe: Arc::clone(universe), verdicts })
    }

    /// Strings of the universe the table accepts.
    pub fn language_of(&self, table: &RuleTable, universe: &Arc<StringUniverse>) -> Result<LanguageClass, OracleError> {
        Ok(self.profile(table, universe)?.accepted())
    }

    /// Strings of the universe on which the table never halts.
    pub fn hang_set(&self, table: &RuleTable, universe: &Arc<StringUniverse>) -> Result<LanguageClass, OracleError> {
        Ok(self.profile(table, universe)?.hangs())
    }

    pub fn union_class<T: AsRef<RuleTable>>(
        &self,
        tables: &[T],
        universe: &Arc<StringUniverse>,
    ) -> Result<LanguageClass, OracleError> {
        let mut union = LanguageClass::empty(universe);
        for t in tables {
            union = union.union(&self.language_of(t.as_ref(), universe)?);
        }
        Ok(union)
    }

    /// Strings some table accepts while every table in the set halts on them.
    /// This class does not depend on any dispatch order.
    pub fn sequential_class<T: AsRef<RuleTable>>(
        &self,
        tables: &[T],
        universe: &Arc<StringUniverse>,
    ) -> Result<LanguageClass, OracleError> {
        let profiles = tables.iter().map(|t| self.profile(t.as_ref(), universe)).collect::<Result<Vec<_>, _>>()?;
        let mut all_halt = LanguageClass::full(universe);
        for p in &profiles {
            all_halt = all_halt.intersection(&p.halts());
        }
        let mut class = LanguageClass::empty(universe);
        for p in &profiles {
            class = class.union(&p.accepted().intersection(&all_halt));
        }
        Ok(class)
    }
}

pub(crate) fn check_alphabet(table: &RuleTable, universe: &StringUniverse) -> Result<(), OracleError> {
    match universe.alphabet().iter().find(|c| !table.alphabet().contains(c)) {
        Some(&symbol) => Err(OracleError::AlphabetMismatch { table: table.name().to_string(), symbol }),
        None => Ok(()),
    }
}
