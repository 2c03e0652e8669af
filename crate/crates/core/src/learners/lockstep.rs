//! Worker/monitor execution for parallel and hybrid learners.
//!
//! Each lane is one worker that runs its tables one after another on fresh
//! tapes. A macro-step advances every running lane by exactly one interpreter
//! step; afterwards the monitor reads the shared sentinel cell. The first lane
//! (lowest index) that accepted during the macro-step wins and all other lanes
//! are stopped where they stand.

use std::sync::Arc;

use rayon::prelude::*;

use super::{LearnerOutcome, LearnerResult, TableRun};
use crate::tm::{RuleTable, RunOutcome, RunResult, Status, TapeConfig, TmError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum LaneState {
    Running,
    Accepted(usize),
    Rejected,
    Stuck(usize),
}

struct Lane<'a> {
    tables: &'a [Arc<RuleTable>],
    members: &'a [usize],
    pos: usize,
    current: Option<TapeConfig>,
    finished: Vec<TableRun>,
    steps: u64,
    state: LaneState,
}

impl<'a> Lane<'a> {
    fn new(tables: &'a [Arc<RuleTable>], members: &'a [usize]) -> Self {
        Self { tables, members, pos: 0, current: None, finished: Vec::new(), steps: 0, state: LaneState::Running }
    }

    fn advance(&mut self, input: &str, budget: u64) -> Result<(), TmError> {
        let index = self.members[self.pos];
        let table = &self.tables[index];
        let config = match &mut self.current {
            Some(config) => config,
            slot @ None => slot.insert(TapeConfig::start(table, input)?),
        };
        let status = config.step(table)?;
        self.steps += 1;
        let exhausted = status == Status::Running && config.steps() >= budget;
        if status == Status::Running && !exhausted {
            return Ok(());
        }
        let result = config.result(table, budget);
        self.finished.push(TableRun { index, table: table.name().to_string(), result });
        self.current = None;
        self.state = match status {
            Status::Accepted => LaneState::Accepted(index),
            Status::Running => LaneState::Stuck(index),
            Status::Rejected => {
                self.pos += 1;
                if self.pos == self.members.len() {
                    LaneState::Rejected
                } else {
                    LaneState::Running
                }
            }
        };
        Ok(())
    }

    fn space(&self) -> usize {
        let done = self.finished.iter().map(|r| r.result.space).max().unwrap_or(0);
        done.max(self.current.as_ref().map_or(0, TapeConfig::visited))
    }

    fn into_records(self, budget: u64) -> Vec<TableRun> {
        let mut records = self.finished;
        if let Some(config) = self.current {
            let index = self.members[self.pos];
            let table = &self.tables[index];
            let result = RunResult { outcome: RunOutcome::Working, ..config.result(table, budget) };
            records.push(TableRun { index, table: table.name().to_string(), result });
        }
        records
    }
}

pub(super) fn run_lanes(
    tables: &[Arc<RuleTable>],
    lanes: &[Vec<usize>],
    budget: u64,
    input: &str,
    concurrent: bool,
) -> Result<LearnerResult, TmError> {
    let mut workers: Vec<Lane<'_>> = lanes.iter().map(|members| Lane::new(tables, members)).collect();
    let mut clock: u64 = 0;
    loop {
        if concurrent {
            workers
                .par_iter_mut()
                .filter(|w| w.state == LaneState::Running)
                .map(|w| w.advance(input, budget))
                .collect::<Result<Vec<()>, _>>()?;
        } else {
            for w in workers.iter_mut().filter(|w| w.state == LaneState::Running) {
                w.advance(input, budget)?;
            }
        }
        clock += 1;

        let winner = workers.iter().position(|w| matches!(w.state, LaneState::Accepted(_)));
        let all_done = workers.iter().all(|w| w.state != LaneState::Running);
        if winner.is_none() && !all_done {
            continue;
        }

        let total_space: usize = workers.iter().map(Lane::space).sum();
        let outcome = match winner {
            Some(k) => {
                let LaneState::Accepted(index) = workers[k].state else { unreachable!() };
                LearnerOutcome::Accepted { index, table: tables[index].name().to_string() }
            }
            None => match workers.iter().find_map(|w| match w.state {
                LaneState::Stuck(index) => Some(index),
                _ => None,
            }) {
                Some(index) => LearnerOutcome::Stuck { index, table: tables[index].name().to_string() },
                None => LearnerOutcome::Rejected,
            },
        };
        let time = winner.map_or(clock, |k| workers[k].steps);
        let per_table = workers.into_iter().flat_map(|w| w.into_records(budget)).collect();
        return Ok(LearnerResult { outcome, time, space: total_space, per_table });
    }
}
