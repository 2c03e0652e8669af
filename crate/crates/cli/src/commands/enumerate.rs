use serde::Serialize;
use tapelearn::{is_complete, learner_class, Mode, ModeKind};

use super::{ClassInfo, PlanInfo, UniverseInfo};
use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::output::{Report, Table, SCHEMA_VERSION};

#[derive(Serialize)]
struct TableClass {
    name: String,
    size: usize,
    accepts: ClassInfo,
    hangs: ClassInfo,
}

#[derive(Serialize)]
struct EnumerateReport {
    command: &'static str,
    schema_version: u32,
    mode: String,
    universe: UniverseInfo,
    guard: u64,
    tables: Vec<TableClass>,
    union: ClassInfo,
    learner_class: ClassInfo,
    complete: bool,
    /// Strings every table halts on and some table accepts, which no
    /// dispatch order can lose. Sequential mode only.
    #[serde(skip_serializing_if = "Option::is_none")]
    order_free_sequential_class: Option<ClassInfo>,
    #[serde(skip_serializing_if = "Option::is_none")]
    plan: Option<PlanInfo>,
    storage_size: usize,
}

pub fn enumerate(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let (u, o) = (&cfg.universe, &cfg.oracle);
    let learner = cfg.learner(cfg.mode)?;
    let profiles = cfg.tables.iter().map(|t| o.profile(t, u)).collect::<Result<Vec<_>, _>>()?;
    let union = o.union_class(&cfg.tables, u)?;
    let class = learner_class(&learner, u, o)?;
    let complete = is_complete(&learner, u, o)?;
    let order_free = match cfg.mode {
        ModeKind::Sequential => Some(ClassInfo::from(&o.sequential_class(&cfg.tables, u)?)),
        _ => None,
    };
    let plan = match learner.mode() {
        Mode::Hybrid(plan) => Some(PlanInfo::new(plan, learner.tables())),
        _ => None,
    };

    let mut header = vec!["string".to_string()];
    header.extend(cfg.table_names());
    header.extend(["union".to_string(), "learner".to_string()]);
    let mut csv = Table::new(header);
    for (i, s) in u.strings().iter().enumerate() {
        let mut row = vec![s.clone()];
        for p in &profiles {
            let v = &p.verdicts()[i];
            row.push(
                if v.accepts() {
                    "accept"
                } else if v.diverges() {
                    "hang"
                } else {
                    "reject"
                }
                .to_string(),
            );
        }
        row.push(u8::from(union.contains(s)).to_string());
        row.push(u8::from(class.contains(s)).to_string());
        csv.push(row);
    }

    let body = EnumerateReport {
        command: "enumerate",
        schema_version: SCHEMA_VERSION,
        mode: cfg.mode.to_string(),
        universe: UniverseInfo::of(u),
        guard: o.guard(),
        tables: cfg
            .tables
            .iter()
            .zip(&profiles)
            .map(|(t, p)| TableClass {
                name: t.name().to_string(),
                size: t.size(),
                accepts: (&p.accepted()).into(),
                hangs: (&p.hangs()).into(),
            })
            .collect(),
        union: (&union).into(),
        learner_class: (&class).into(),
        complete,
        order_free_sequential_class: order_free,
        plan,
        storage_size: tapelearn::storage_size(&learner),
    };
    Report::new(&body, Some(csv))
}
