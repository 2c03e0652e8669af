use rayon::prelude::*;
use serde::Serialize;
use tapelearn::{storage_size, Engine, LearnerResult, LearnerSpec, ModeKind};

use super::UniverseInfo;
use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::output::{Report, Table, SCHEMA_VERSION};

/// Sequential and parallel measurements of one string both modes accept.
#[derive(Debug, Clone, Serialize)]
pub struct CompareRow {
    pub string: String,
    /// Accepting table index of each mode.
    pub k_s: usize,
    pub k_p: usize,
    pub t_s: u64,
    pub t_p: u64,
    /// Steps spent by the tables the sequential learner rejected with first.
    pub t_rejected: u64,
    pub s_s: usize,
    pub s_p: usize,
    pub sigma_s: usize,
    pub sigma_p: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Violation {
    pub string: String,
    pub check: &'static str,
    pub detail: String,
}

#[derive(Serialize)]
struct CompareReport {
    command: &'static str,
    schema_version: u32,
    universe: UniverseInfo,
    budget: u64,
    tables: Vec<String>,
    accepted_by_sequential: usize,
    accepted_by_parallel: usize,
    accepted_by_both: usize,
    rows: Vec<CompareRow>,
    violations: Vec<Violation>,
}

pub const CHECKS: [&str; 7] = [
    "t_p <= t_s",
    "t_s = t_rejected + t_p",
    "s_s <= s_p",
    "sigma_s = sigma_p",
    "t_s = sum of per-table steps",
    "s_s = max of per-table spaces",
    "s_p = sum of per-table spaces",
];

/// Checks one string's measurements; returns the row when both modes accept.
pub fn compare_string(
    w: &str,
    s: &LearnerResult,
    p: &LearnerResult,
    sigma: (usize, usize),
    violations: &mut Vec<Violation>,
) -> Option<CompareRow> {
    let (Some(k_s), Some(k_p)) = (s.outcome.accepting_index(), p.outcome.accepting_index()) else {
        return None;
    };
    let t_rejected: u64 = s.per_table[..s.per_table.len() - 1].iter().map(|r| r.result.steps).sum();
    let row = CompareRow {
        string: w.to_string(),
        k_s,
        k_p,
        t_s: s.time,
        t_p: p.time,
        t_rejected,
        s_s: s.space,
        s_p: p.space,
        sigma_s: sigma.0,
        sigma_p: sigma.1,
    };
    let holds = [
        row.t_p <= row.t_s,
        row.t_s == row.t_rejected + row.t_p,
        row.s_s <= row.s_p,
        row.sigma_s == row.sigma_p,
        row.t_s == s.per_table.iter().map(|r| r.result.steps).sum::<u64>(),
        row.s_s == s.per_table.iter().map(|r| r.result.space).max().unwrap_or(0),
        row.s_p == p.per_table.iter().map(|r| r.result.space).sum::<usize>(),
    ];
    for (check, ok) in CHECKS.iter().zip(holds) {
        if !ok {
            violations.push(Violation {
                string: w.to_string(),
                check,
                detail: format!(
                    "t_s={} t_p={} t_rejected={} s_s={} s_p={} sigma_s={} sigma_p={} k_s={k_s} k_p={k_p}",
                    row.t_s, row.t_p, row.t_rejected, row.s_s, row.s_p, row.sigma_s, row.sigma_p
                ),
            });
        }
    }
    Some(row)
}

pub fn measure_both(
    seq: &LearnerSpec,
    par: &LearnerSpec,
    strings: &[String],
    engine: Engine,
) -> Result<Vec<(LearnerResult, LearnerResult)>, CliError> {
    let one = |w: &String| Ok::<_, CliError>((seq.accept(w)?, par.accept(w)?));
    match engine {
        Engine::Serial => strings.iter().map(one).collect(),
        Engine::Threaded => strings.par_iter().map(one).collect::<Vec<_>>().into_iter().collect(),
    }
}

/// Tabulates both modes over the universe. Any violated relation makes the
/// command fail after the report is written.
pub fn compare(cfg: &ExperimentConfig) -> Result<(Report, Vec<Violation>), CliError> {
    let seq = cfg.learner(ModeKind::Sequential)?;
    let par = cfg.learner(ModeKind::Parallel)?;
    let sigma = (storage_size(&seq), storage_size(&par));
    let strings = cfg.universe.strings();
    let results = measure_both(&seq, &par, strings, cfg.engine)?;

    let mut violations = Vec::new();
    let mut rows = Vec::new();
    for (w, (s, p)) in strings.iter().zip(&results) {
        rows.extend(compare_string(w, s, p, sigma, &mut violations));
    }

    let mut csv = Table::new(["string", "k_s", "k_p", "t_s", "t_p", "t_rejected", "s_s", "s_p", "sigma_s", "sigma_p"]);
    for r in &rows {
        csv.push(vec![
            r.string.clone(),
            r.k_s.to_string(),
            r.k_p.to_string(),
            r.t_s.to_string(),
            r.t_p.to_string(),
            r.t_rejected.to_string(),
            r.s_s.to_string(),
            r.s_p.to_string(),
            r.sigma_s.to_string(),
            r.sigma_p.to_string(),
        ]);
    }
    let body = CompareReport {
        command: "compare",
        schema_version: SCHEMA_VERSION,
        universe: super::UniverseInfo::of(&cfg.universe),
        budget: cfg.budget,
        tables: cfg.table_names(),
        accepted_by_sequential: results.iter().filter(|(s, _)| s.outcome.is_accepted()).count(),
        accepted_by_parallel: results.iter().filter(|(_, p)| p.outcome.is_accepted()).count(),
        accepted_by_both: rows.len(),
        rows,
        violations: violations.clone(),
    };
    Ok((Report::new(&body, Some(csv))?, violations))
}
