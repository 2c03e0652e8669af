//! Turns command-line flags into a validated experiment configuration.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, ValueEnum};
use tapelearn::game::UtilityMeasure;
use tapelearn::{fixtures, Engine, LearnerSpec, ModeKind, Oracle, RuleTable, StringUniverse};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EngineArg {
    Serial,
    Threaded,
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Rule tables: file paths or bundled fixture names (RA, RB, REPS), comma separated.
    #[arg(long, value_delimiter = ',')]
    pub rules: Vec<String>,
    /// Dispatch mode: seq, par or hybrid.
    #[arg(long, default_value = "par", value_parser = parse_mode)]
    pub mode: ModeKind,
    /// Table order by name; loads the named tables when --rules is absent.
    #[arg(long, value_delimiter = ',')]
    pub order: Vec<String>,
    /// Universe alphabet, e.g. `ab`. Defaults to the first table's alphabet.
    #[arg(long)]
    pub alphabet: Option<String>,
    /// Longest string in the universe.
    #[arg(long, default_value_t = 3)]
    pub max_len: usize,
    /// Step budget per table run.
    #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
    pub budget: u64,
    /// Step guard for the halting oracle.
    #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
    pub guard: u64,
    /// `counting`, or a weights file with `<string> <weight>` lines.
    #[arg(long, default_value = "counting")]
    pub measure: String,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Seed for randomized experiments.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// How per-string work is scheduled. Reports are identical either way.
    #[arg(long, value_enum, default_value_t = EngineArg::Serial)]
    pub engine: EngineArg,
}

fn parse_mode(s: &str) -> Result<ModeKind, String> {
    s.parse()
}

pub struct ExperimentConfig {
    /// Tables in dispatch order.
    pub tables: Vec<Arc<RuleTable>>,
    pub universe: Arc<StringUniverse>,
    pub oracle: Oracle,
    pub budget: u64,
    pub mode: ModeKind,
    pub measure: String,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub seed: u64,
    pub engine: Engine,
}

impl ExperimentConfig {
    pub fn from_args(args: &CommonArgs) -> Result<Self, CliError> {
        Self::build(args, false)
    }

    /// Like [`ExperimentConfig::from_args`] but falls back to the bundled
    /// fixtures when no tables are named.
    pub fn from_args_or_fixtures(args: &CommonArgs) -> Result<Self, CliError> {
        Self::build(args, true)
    }

    fn build(args: &CommonArgs, fixtures_by_default: bool) -> Result<Self, CliError> {
        let tokens = if args.rules.is_empty() { &args.order } else { &args.rules };
        let mut loaded = tokens.iter().map(|t| load_table(t)).collect::<Result<Vec<_>, _>>()?;
        if loaded.is_empty() {
            if !fixtures_by_default {
                return Err(CliError::Usage("no rule tables given; pass --rules or --order".into()));
            }
            loaded = fixtures::all().into_iter().map(|t| (t.name().to_string(), t)).collect();
        }
        for (i, (_, t)) in loaded.iter().enumerate() {
            if loaded[..i].iter().any(|(_, u)| u.name() == t.name()) {
                return Err(CliError::Usage(format!("rule table `{}` is given twice", t.name())));
            }
        }
        let tables = if args.rules.is_empty() || args.order.is_empty() {
            loaded.into_iter().map(|(_, t)| Arc::new(t)).collect()
        } else {
            apply_order(loaded, &args.order)?
        };

        let engine = match args.engine {
            EngineArg::Serial => Engine::Serial,
            EngineArg::Threaded => Engine::Threaded,
        };
        let alphabet: Vec<char> = match &args.alphabet {
            Some(a) => a.chars().filter(|c| *c != ',' && !c.is_whitespace()).collect(),
            None => tables[0].alphabet().to_vec(),
        };
        let universe = StringUniverse::new(alphabet, args.max_len).map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(Self {
            tables,
            universe,
            oracle: Oracle::new(args.guard).with_engine(engine),
            budget: args.budget,
            mode: args.mode,
            measure: args.measure.clone(),
            out: args.out.clone(),
            format: args.format,
            seed: args.seed,
            engine,
        })
    }

    pub fn table_names(&self) -> Vec<String> {
        self.tables.iter().map(|t| t.name().to_string()).collect()
    }

    pub fn learner(&self, mode: ModeKind) -> Result<LearnerSpec, CliError> {
        let tables = self.tables.clone();
        let spec = match mode {
            ModeKind::Sequential => LearnerSpec::sequential("Seq", tables, self.budget)?,
            ModeKind::Parallel => LearnerSpec::parallel("Par", tables, self.budget)?,
            ModeKind::Hybrid => LearnerSpec::hybrid("Hybrid", tables, &self.universe, &self.oracle, self.budget)?,
        };
        Ok(spec)
    }

    pub fn utility_measure(&self) -> Result<UtilityMeasure, CliError> {
        if self.measure == "counting" {
            return Ok(UtilityMeasure::counting(&self.universe));
        }
        let path = Path::new(&self.measure);
        let text = fs::read_to_string(path).map_err(|source| CliError::File { path: path.into(), source })?;
        UtilityMeasure::parse_weights(&self.universe, &text)
            .map_err(|e| CliError::Parse { path: self.measure.clone(), message: e.to_string() })
    }
}

/// Reads a table from a file, or from the bundled fixtures if no such file exists.
pub fn load_table(token: &str) -> Result<(String, RuleTable), CliError> {
    let path = Path::new(token);
    if path.is_file() {
        let text = fs::read_to_string(path).map_err(|source| CliError::File { path: path.into(), source })?;
        let table =
            RuleTable::parse(&text).map_err(|e| CliError::Parse { path: token.to_string(), message: e.to_string() })?;
        return Ok((token.to_string(), table));
    }
    match fixtures::by_name(token) {
        Some(t) => Ok((token.to_string(), t)),
        None => Err(CliError::File {
            path: path.into(),
            source: std::io::Error::new(std::io::ErrorKind::NotFound, "no such file or bundled fixture"),
        }),
    }
}

fn apply_order(loaded: Vec<(String, RuleTable)>, order: &[String]) -> Result<Vec<Arc<RuleTable>>, CliError> {
    if order.len() != loaded.len() {
        return Err(CliError::Usage(format!(
            "--order names {} tables but --rules loads {}",
            order.len(),
            loaded.len()
        )));
    }
    let mut used = vec![false; loaded.len()];
    let mut tables = Vec::with_capacity(order.len());
    for name in order {
        let canonical = fixtures::by_name(name).map(|t| t.name().to_string());
        let idx = loaded
            .iter()
            .position(|(token, t)| token == name || t.name() == name || Some(t.name()) == canonical.as_deref())
            .ok_or_else(|| CliError::Usage(format!("--order names `{name}`, which is not among --rules")))?;
        if used[idx] {
            return Err(CliError::Usage(format!("--order names `{name}` twice")));
        }
        used[idx] = true;
        tables.push(Arc::new(loaded[idx].1.clone()));
    }
    Ok(tables)
}

pub fn parse_list<T: std::str::FromStr>(flag: &str, raw: &str) -> Result<Vec<T>, CliError> {
    raw.split(',')
        .map(|s| s.trim().parse().map_err(|_| CliError::Usage(format!("{flag}: cannot parse `{s}`"))))
        .collect()
}
