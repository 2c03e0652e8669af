use std::sync::Arc;

use serde::Serialize;
use tapelearn::history::{parse_manifest, Snapshot, SystemHistory};
use tapelearn::random::{definite_table_set, seeded};
use tapelearn::{
    fixtures, learner_class, storage_size, LearnerSpec, Mode, ModeKind, Oracle, RuleTable, StringUniverse,
};

use super::compare::{measure_both, CompareRow};
use super::UniverseInfo;
use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::output::{Report, SCHEMA_VERSION};

/// Attempts at drawing one random table set with definite oracle verdicts.
const DRAW_ATTEMPTS: usize = 1000;

#[derive(Debug, Serialize)]
pub struct SetReport {
    pub label: String,
    pub tables: Vec<String>,
    pub union_size: usize,
    pub parallel_equals_union: bool,
    pub hybrid_equals_parallel: bool,
    pub hybrid_lanes_are_antichains: bool,
    pub storage_equal: bool,
    pub order_free_core_in_sequential: bool,
    pub accepted_by_both: usize,
    /// Strings where `t_p > t_s` or `t_s` is not the sum of its per-table steps.
    pub time_violations: Vec<String>,
    /// Strings accepted by the same table in both modes with
    /// `t_s != t_rejected + t_p`.
    pub exact_time_violations: Vec<String>,
    /// Strings accepted by the same table in both modes, whose earlier
    /// sequential tables all finished within `t_p`, with `s_s > s_p`.
    pub space_violations: Vec<String>,
    /// Strings where the parallel winner differs from the sequential one.
    pub different_winner: usize,
    /// Strings with `s_s > s_p` when the conditions above do not hold.
    pub unconditioned_space_excess: usize,
}

impl SetReport {
    pub fn passed(&self) -> bool {
        self.parallel_equals_union
            && self.hybrid_equals_parallel
            && self.hybrid_lanes_are_antichains
            && self.storage_equal
            && self.order_free_core_in_sequential
            && self.time_violations.is_empty()
            && self.exact_time_violations.is_empty()
            && self.space_violations.is_empty()
    }
}

#[derive(Debug, Serialize)]
struct StepReport {
    t: usize,
    mode: String,
    tables: Vec<String>,
    class_size: usize,
    learned: Vec<String>,
    learning_occurred: bool,
    /// For a one-table addition: whether the new table accepts something new.
    adds_strings: Option<bool>,
}

#[derive(Debug, Serialize)]
struct HistoryReport {
    steps: Vec<StepReport>,
    is_filtration: bool,
    violations: Vec<String>,
}

#[derive(Serialize)]
struct FullReport {
    command: &'static str,
    schema_version: u32,
    universe: UniverseInfo,
    budget: u64,
    guard: u64,
    seed: u64,
    sets: Vec<SetReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    history: Option<HistoryReport>,
    passed: bool,
}

/// Runs every class, storage, time and space check on one table set.
pub fn check_set(
    label: &str,
    tables: &[Arc<RuleTable>],
    u: &Arc<StringUniverse>,
    o: &Oracle,
    budget: u64,
) -> Result<SetReport, CliError> {
    let seq = LearnerSpec::sequential("Seq", tables.to_vec(), budget)?;
    let par = LearnerSpec::parallel("Par", tables.to_vec(), budget)?;
    let hyb = LearnerSpec::hybrid("Hybrid", tables.to_vec(), u, o, budget)?;
    let union = o.union_class(tables, u)?;
    let par_class = learner_class(&par, u, o)?;
    let seq_class = learner_class(&seq, u, o)?;
    let hyb_class = learner_class(&hyb, u, o)?;
    let core = o.sequential_class(tables, u)?;

    let Mode::Hybrid(plan) = hyb.mode() else { unreachable!("hybrid learner has a plan") };
    let antichains = plan.lanes().iter().all(|lane| lane.iter().all(|&i| lane.iter().all(|&j| !plan.related(i, j))));

    let sigma = (storage_size(&seq), storage_size(&par));
    let mut report = SetReport {
        label: label.to_string(),
        tables: tables.iter().map(|t| t.name().to_string()).collect(),
        union_size: union.len(),
        parallel_equals_union: par_class == union,
        hybrid_equals_parallel: hyb_class == par_class,
        hybrid_lanes_are_antichains: antichains,
        storage_equal: sigma.0 == sigma.1 && storage_size(&hyb) == sigma.0,
        order_free_core_in_sequential: core.is_subset(&seq_class),
        accepted_by_both: 0,
        time_violations: Vec::new(),
        exact_time_violations: Vec::new(),
        space_violations: Vec::new(),
        different_winner: 0,
        unconditioned_space_excess: 0,
    };

    let results = measure_both(&seq, &par, u.strings(), o.engine())?;
    for (w, (s, p)) in u.strings().iter().zip(&results) {
        let mut scratch = Vec::new();
        let Some(row): Option<CompareRow> = super::compare::compare_string(w, s, p, sigma, &mut scratch) else {
            continue;
        };
        report.accepted_by_both += 1;
        let per_table_sum: u64 = s.per_table.iter().map(|r| r.result.steps).sum();
        if row.t_p > row.t_s || row.t_s != per_table_sum {
            report.time_violations.push(w.clone());
        }
        if row.k_s != row.k_p {
            report.different_winner += 1;
            if row.s_s > row.s_p {
                report.unconditioned_space_excess += 1;
            }
            continue;
        }
        if row.t_s != row.t_rejected + row.t_p {
            report.exact_time_violations.push(w.clone());
        }
        let earlier_done = s.per_table[..row.k_s].iter().all(|r| r.result.steps <= row.t_p);
        if !earlier_done {
            if row.s_s > row.s_p {
                report.unconditioned_space_excess += 1;
            }
        } else if row.s_s > row.s_p {
            report.space_violations.push(w.clone());
        }
    }
    Ok(report)
}

fn check_history(cfg: &ExperimentConfig, manifest: &str, path: &str) -> Result<HistoryReport, CliError> {
    let entries =
        parse_manifest(manifest).map_err(|e| CliError::Parse { path: path.into(), message: e.to_string() })?;
    let lookup = |name: &str| -> Result<Arc<RuleTable>, CliError> {
        let canonical = fixtures::by_name(name).map(|t| t.name().to_string());
        cfg.tables
            .iter()
            .find(|t| t.name() == name || Some(t.name()) == canonical.as_deref())
            .cloned()
            .ok_or_else(|| CliError::Usage(format!("{path}: table `{name}` is not among the loaded rules")))
    };
    let snapshots = entries
        .iter()
        .map(|e| {
            let tables = e.tables.iter().map(|n| lookup(n)).collect::<Result<Vec<_>, _>>()?;
            Ok(Snapshot { tables, mode: e.mode })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let h = SystemHistory::from_snapshots(&cfg.universe, snapshots)?;
    let o = &cfg.oracle;

    let mut steps = Vec::with_capacity(h.len());
    let mut violations = Vec::new();
    for (t, snap) in h.snapshots().iter().enumerate() {
        let class = h.class_at(t, o)?;
        let (learned, occurred, adds) = if t == 0 {
            (Vec::new(), false, None)
        } else {
            let learned = h.learned_set(t - 1, t, o)?;
            let occurred = h.learning_occurred(t - 1, t, o)?;
            let adds = h.addition_adds_strings(t, o)?;
            if occurred == learned.is_empty() {
                violations.push(format!("t{t}: learning_occurred disagrees with the learned set"));
            }
            let union_step = [t - 1, t].iter().all(|&k| h.snapshots()[k].mode != ModeKind::Sequential);
            if let (Some(a), true) = (adds, union_step) {
                if a != occurred {
                    violations.push(format!("t{t}: new table adds strings = {a} but learning occurred = {occurred}"));
                }
            }
            (learned.to_strings(), occurred, adds)
        };
        steps.push(StepReport {
            t,
            mode: snap.mode.to_string(),
            tables: snap.tables.iter().map(|t| t.name().to_string()).collect(),
            class_size: class.len(),
            learned,
            learning_occurred: occurred,
            adds_strings: adds,
        });
    }
    let is_filtration = h.is_filtration(o)?;
    let union_modes = h.snapshots().iter().all(|s| s.mode != ModeKind::Sequential);
    if union_modes && !is_filtration {
        violations.push("a history of parallel and hybrid snapshots is not a filtration".into());
    }
    Ok(HistoryReport { steps, is_filtration, violations })
}

/// Checks the fixture set, `random_sets` seeded random sets and optionally a
/// history manifest. Fails with a violation if any check does not hold.
pub fn report(cfg: &ExperimentConfig, random_sets: usize, history: Option<&str>) -> Result<(Report, bool), CliError> {
    let (u, o) = (&cfg.universe, &cfg.oracle);
    let mut sets = vec![check_set("loaded", &cfg.tables, u, o, cfg.budget)?];
    let mut rng = seeded(cfg.seed);
    for k in 0..random_sets {
        let tables = definite_table_set(&mut rng, &format!("s{k}_r"), u, o, DRAW_ATTEMPTS).ok_or_else(|| {
            CliError::Usage(format!("could not draw random set {k} with definite verdicts; raise --guard"))
        })?;
        sets.push(check_set(&format!("random {k}"), &tables, u, o, cfg.budget)?);
    }
    let history = match history {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|source| CliError::File { path: path.into(), source })?;
            Some(check_history(cfg, &text, path)?)
        }
        None => None,
    };
    let passed = sets.iter().all(SetReport::passed) && history.as_ref().is_none_or(|h| h.violations.is_empty());
    let body = FullReport {
        command: "report",
        schema_version: SCHEMA_VERSION,
        universe: UniverseInfo::of(u),
        budget: cfg.budget,
        guard: o.guard(),
        seed: cfg.seed,
        sets,
        history,
        passed,
    };
    Ok((Report::new(&body, None)?, passed))
}
