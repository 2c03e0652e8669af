use std::path::Path;

use serde::Serialize;
use tapelearn::game::{ess_verdict, payoff_matrix, replicate, superset_implies_ess, EssVerdict, Population};
use tapelearn::{learner_class, LearnerSpec, ModeKind};

use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::output::{num, write_bytes, Report, Table, SCHEMA_VERSION};

/// Share a strategy must reach to count as having taken over.
pub const TAKEOVER_SHARE: f64 = 0.99;

#[derive(Serialize)]
struct StrategyInfo {
    name: String,
    mode: String,
    class_size: usize,
    utility: f64,
    verdict: EssVerdict,
    /// Whether this strategy's class strictly contains every other class.
    superset: bool,
    initial_share: f64,
    final_share: f64,
    /// First generation with share at least 0.99.
    takeover_generation: Option<u64>,
}

#[derive(Serialize)]
struct EvolveReport {
    command: &'static str,
    schema_version: u32,
    tables: Vec<String>,
    generations: u64,
    strategies: Vec<StrategyInfo>,
    matrix: Vec<Vec<f64>>,
    trajectory: Vec<Vec<f64>>,
}

pub struct EvolveArgs<'a> {
    pub strategies: &'a [ModeKind],
    pub shares: Option<&'a [f64]>,
    pub generations: u64,
    pub matrix_out: Option<&'a Path>,
}

fn strategy_name(mode: ModeKind) -> &'static str {
    match mode {
        ModeKind::Sequential => "Seq",
        ModeKind::Parallel => "Par",
        ModeKind::Hybrid => "Hybrid",
    }
}

pub fn evolve(cfg: &ExperimentConfig, args: &EvolveArgs) -> Result<Report, CliError> {
    let n = args.strategies.len();
    if n < 2 {
        return Err(CliError::Usage("--strategies needs at least two entries".into()));
    }
    for (i, m) in args.strategies.iter().enumerate() {
        if args.strategies[..i].contains(m) {
            return Err(CliError::Usage(format!("strategy `{m}` is listed twice")));
        }
    }
    let shares = match args.shares {
        Some(s) if s.len() != n => {
            return Err(CliError::Usage(format!("--shares has {} entries for {n} strategies", s.len())));
        }
        Some(s) => s.to_vec(),
        None => vec![1.0 / n as f64; n],
    };

    let specs = args
        .strategies
        .iter()
        .map(|&m| Ok(cfg.learner(m)?.with_name(strategy_name(m))))
        .collect::<Result<Vec<LearnerSpec>, CliError>>()?;
    let (u, o) = (&cfg.universe, &cfg.oracle);
    let measure = cfg.utility_measure()?;
    let matrix = payoff_matrix(&specs, u, &measure, o)?;
    let names: Vec<String> = matrix.strategies().to_vec();
    let pop0 = Population::new(names.clone(), shares)?;
    let trajectory = replicate(&matrix, &pop0, args.generations)?;

    let mut strategies = Vec::with_capacity(n);
    for (i, spec) in specs.iter().enumerate() {
        let class = learner_class(spec, u, o)?;
        strategies.push(StrategyInfo {
            name: names[i].clone(),
            mode: args.strategies[i].to_string(),
            class_size: class.len(),
            utility: measure.utility(&class)?,
            verdict: ess_verdict(&matrix, i)?,
            superset: superset_implies_ess(&specs, i, u, &measure, o)?,
            initial_share: pop0.shares()[i],
            final_share: trajectory.last().map_or(0.0, |p| p.shares()[i]),
            takeover_generation: trajectory.iter().find(|p| p.shares()[i] >= TAKEOVER_SHARE).map(|p| p.generation),
        });
    }

    if let Some(path) = args.matrix_out {
        let mut m = Table::new(std::iter::once("strategy".to_string()).chain(names.iter().cloned()));
        for (name, row) in names.iter().zip(matrix.entries()) {
            m.push(std::iter::once(name.clone()).chain(row.iter().map(|&x| num(x))).collect());
        }
        write_bytes(&m.to_csv()?, Some(path))?;
    }

    let mut csv = Table::new(std::iter::once("generation".to_string()).chain(names.iter().cloned()));
    for p in &trajectory {
        csv.push(std::iter::once(p.generation.to_string()).chain(p.shares().iter().map(|&x| num(x))).collect());
    }
    let body = EvolveReport {
        command: "evolve",
        schema_version: SCHEMA_VERSION,
        tables: cfg.table_names(),
        generations: args.generations,
        strategies,
        matrix: matrix.entries().to_vec(),
        trajectory: trajectory.iter().map(|p| p.shares().to_vec()).collect(),
    };
    Report::new(&body, Some(csv))
}
