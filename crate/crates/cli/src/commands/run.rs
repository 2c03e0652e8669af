use serde::Serialize;
use tapelearn::{LearnerOutcome, Mode, TableRun};

use super::{label, PlanInfo};
use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::output::{Report, Table, SCHEMA_VERSION};

#[derive(Serialize)]
struct RunReport<'a> {
    command: &'static str,
    schema_version: u32,
    mode: String,
    input: &'a str,
    budget: u64,
    tables: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    plan: Option<PlanInfo>,
    outcome: &'a LearnerOutcome,
    time: u64,
    space: usize,
    per_table: &'a [TableRun],
}

/// Runs one learner on one input. The exit status is 0 on acceptance,
/// 1 on rejection and 2 when the learner is stuck on an exhausted budget.
pub fn run(cfg: &ExperimentConfig, input: &str) -> Result<(Report, u8), CliError> {
    let learner = cfg.learner(cfg.mode)?;
    let result = match cfg.engine {
        tapelearn::Engine::Serial => learner.accept(input)?,
        tapelearn::Engine::Threaded => learner.accept_concurrent(input)?,
    };
    let plan = match learner.mode() {
        Mode::Hybrid(plan) => Some(PlanInfo::new(plan, learner.tables())),
        _ => None,
    };
    let body = RunReport {
        command: "run",
        schema_version: SCHEMA_VERSION,
        mode: cfg.mode.to_string(),
        input,
        budget: cfg.budget,
        tables: cfg.table_names(),
        plan,
        outcome: &result.outcome,
        time: result.time,
        space: result.space,
        per_table: &result.per_table,
    };
    let mut table = Table::new(["index", "table", "outcome", "steps", "space"]);
    for r in &result.per_table {
        table.push(vec![
            r.index.to_string(),
            r.table.clone(),
            label(&r.result.outcome),
            r.result.steps.to_string(),
            r.result.space.to_string(),
        ]);
    }
    let status = match result.outcome {
        LearnerOutcome::Accepted { .. } => 0,
        LearnerOutcome::Rejected => 1,
        LearnerOutcome::Stuck { .. } => 2,
    };
    Ok((Report::new(&body, Some(table))?, status))
}
