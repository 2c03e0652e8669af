//! Rule tables and the single-tape interpreter that executes them.
//!
//! A [`RuleTable`] is one deterministic machine description. The tape is
//! semi-infinite to the right: cell 0 is the left wall and a left move there
//! leaves the head in place. A missing transition sends the machine to its
//! reject state without writing or moving, at the cost of one step.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

/// Head movement of a single transition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Move {
    Left,
    Right,
    Stay,
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Move::Left => "L",
            Move::Right => "R",
            Move::Stay => "S",
        })
    }
}

impl FromStr for Move {
    type Err = TableError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "L" => Ok(Move::Left),
            "R" => Ok(Move::Right),
            "S" => Ok(Move::Stay),
            other => Err(TableError::BadMove(other.to_string())),
        }
    }
}

/// A transition as written in a rule-table source, with named states.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransitionSpec {
    pub from: String,
    pub read: char,
    pub to: String,
    pub write: char,
    pub movement: Move,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TableError {
    #[error("missing header field `{0}`")]
    MissingHeader(&'static str),
    #[error("header field `{0}` given twice")]
    DuplicateHeader(String),
    #[error("unknown header field `{0}`")]
    UnknownHeader(String),
    #[error("malformed line `{0}`")]
    Malformed(String),
    #[error("symbol `{0}` must be a single character")]
    BadSymbol(String),
    #[error("symbol `{0}` listed twice in the alphabet")]
    DuplicateSymbol(char),
    #[error("move `{0}` is not one of L, R, S")]
    BadMove(String),
    #[error("symbol `{0}` is not declared")]
    UndeclaredSymbol(char),
    #[error("blank `{0}` must not be part of the alphabet")]
    BlankInAlphabet(char),
    #[error("accept and reject states must differ")]
    AcceptIsReject,
    #[error("start state `{0}` must not be a halting state")]
    StartIsHalting(String),
    #[error("duplicate transition for ({state}, {symbol})")]
    DuplicateTransition { state: String, symbol: char },
    #[error("transition out of halting state `{0}`")]
    TransitionFromHalt(String),
}

/// A [`TableError`] located in a rule-table source.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub kind: TableError,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TmError {
    #[error("input symbol `{symbol}` at position {position} is blank or not in the alphabet")]
    InvalidInput { symbol: char, position: usize },
    #[error("step budget must be at least 1")]
    ZeroBudget,
    #[error("configuration is already in a halting state")]
    AlreadyHalted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct Action {
    next: usize,
    write: u8,
    movement: Move,
}

/// One deterministic single-tape machine description.
///
/// States are stored in sorted name order, so two sources listing the same
/// transitions in a different order produce equal tables.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RuleTable {
    name: String,
    alphabet: Vec<char>,
    blank: char,
    states: Vec<String>,
    start: usize,
    accept: usize,
    reject: usize,
    // Dense `states x (alphabet + blank)` lookup; blank is the last column.
    actions: Vec<Option<Action>>,
    size: usize,
}

impl RuleTable {
    pub fn new(
        name: impl Into<String>,
        alphabet: Vec<char>,
        blank: char,
        start: impl Into<String>,
        accept: impl Into<String>,
        reject: impl Into<String>,
        transitions: impl IntoIterator<Item = TransitionSpec>,
    ) -> Result<Self, TableError> {
        let header = Header::new(name.into(), alphabet, blank, start.into(), accept.into(), reject.into())?;
        let mut seen = BTreeMap::new();
        for t in transitions {
            header.check(&t)?;
            insert_unique(&mut seen, t)?;
        }
        Ok(header.assemble(seen.into_values()))
    }

    /// Parses the line-oriented rule-table format.
    pub fn parse(text: &str) -> Result<Self, ParseError> {
        parse_source(text)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn alphabet(&self) -> &[char] {
        &self.alphabet
    }

    pub fn blank(&self) -> char {
        self.blank
    }

    pub fn start(&self) -> &str {
        &self.states[self.start]
    }

    pub fn accept(&self) -> &str {
        &self.states[self.accept]
    }

    pub fn reject(&self) -> &str {
        &self.states[self.reject]
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    /// Number of transition entries.
    pub fn size(&self) -> usize {
        self.size
    }

    /// Returns a copy of this table under a different name.
    pub fn renamed(&self, name: impl Into<String>) -> Self {
        Self { name: name.into(), ..self.clone() }
    }

    /// Transitions in (state name, symbol) order, blank last.
    pub fn transitions(&self) -> impl Iterator<Item = TransitionSpec> + '_ {
        let width = self.width();
        self.actions.iter().enumerate().filter_map(move |(i, a)| {
            a.map(|a| TransitionSpec {
                from: self.states[i / width].clone(),
                read: self.symbol_char((i % width) as u8),
                to: self.states[a.next].clone(),
                write: self.symbol_char(a.write),
                movement: a.movement,
            })
        })
    }

    pub fn transition(&self, state: &str, read: char) -> Option<TransitionSpec> {
        let s = self.states.binary_search_by(|n| n.as_str().cmp(state)).ok()?;
        let sym = self.symbol_index(read)?;
        self.action(s, sym).map(|a| TransitionSpec {
            from: state.to_string(),
            read,
            to: self.states[a.next].clone(),
            write: self.symbol_char(a.write),
            movement: a.movement,
        })
    }

    /// Index of `c` in the tape alphabet; the blank maps past the input symbols.
    fn symbol_index(&self, c: char) -> Option<u8> {
        if c == self.blank {
            Some(self.blank_index())
        } else {
            self.alphabet.iter().position(|&a| a == c).map(|i| i as u8)
        }
    }

    fn symbol_char(&self, i: u8) -> char {
        self.alphabet.get(i as usize).copied().unwrap_or(self.blank)
    }

    fn blank_index(&self) -> u8 {
        self.alphabet.len() as u8
    }

    fn width(&self) -> usize {
        self.alphabet.len() + 1
    }

    fn action(&self, state: usize, symbol: u8) -> Option<Action> {
        self.actions[state * self.width() + symbol as usize]
    }

    fn is_halting(&self, state: usize) -> bool {
        state == self.accept || state == self.reject
    }

    /// Checks that `input` only uses input symbols of this table.
    pub fn validate_input(&self, input: &str) -> Result<(), TmError> {
        for (position, symbol) in input.chars().enumerate() {
            if symbol == self.blank || !self.alphabet.contains(&symbol) {
                return Err(TmError::InvalidInput { symbol, position });
            }
        }
        Ok(())
    }
}

impl AsRef<RuleTable> for RuleTable {
    fn as_ref(&self) -> &RuleTable {
        self
    }
}

impl fmt::Display for RuleTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "name: {}", self.name)?;
        let alphabet: Vec<String> = self.alphabet.iter().map(char::to_string).collect();
        writeln!(f, "alphabet: {}", alphabet.join(" "))?;
        writeln!(f, "blank: {}", self.blank)?;
        writeln!(f, "start: {}", self.start())?;
        writeln!(f, "accept: {}", self.accept())?;
        writeln!(f, "reject: {}", self.reject())?;
        for t in self.transitions() {
            writeln!(f, "{} {} -> {} {} {}", t.from, t.read, t.to, t.write, t.movement)?;
        }
        Ok(())
    }
}

impl FromStr for RuleTable {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::parse(s)
    }
}

struct Header {
    name: String,
    alphabet: Vec<char>,
    blank: char,
    start: String,
    accept: String,
    reject: String,
}

impl Header {
    fn new(
        name: String,
        alphabet: Vec<char>,
        blank: char,
        start: String,
        accept: String,
        reject: String,
    ) -> Result<Self, TableError> {
        let mut seen = BTreeSet::new();
        for &c in &alphabet {
            if c == blank {
                return Err(TableError::BlankInAlphabet(c));
            }
            if !seen.insert(c) {
                return Err(TableError::DuplicateSymbol(c));
            }
        }
        if accept == reject {
            return Err(TableError::AcceptIsReject);
        }
        if start == accept || start == reject {
            return Err(TableError::StartIsHalting(start));
        }
        Ok(Self { name, alphabet, blank, start, accept, reject })
    }

    fn declared(&self, c: char) -> bool {
        c == self.blank || self.alphabet.contains(&c)
    }

    fn check(&self, t: &TransitionSpec) -> Result<(), TableError> {
        if t.from == self.accept || t.from == self.reject {
            return Err(TableError::TransitionFromHalt(t.from.clone()));
        }
        for c in [t.read, t.write] {
            if !self.declared(c) {
                return Err(TableError::UndeclaredSymbol(c));
            }
        }
        Ok(())
    }

    fn assemble(self, transitions: impl Iterator<Item = TransitionSpec>) -> RuleTable {
        let transitions: Vec<TransitionSpec> = transitions.collect();
        let mut names: BTreeSet<&str> = [self.start.as_str(), &self.accept, &self.reject].into();
        for t in &transitions {
            names.insert(&t.from);
            names.insert(&t.to);
        }
        let states: Vec<String> = names.into_iter().map(str::to_string).collect();
        let index = |s: &str| states.binary_search_by(|n| n.as_str().cmp(s)).expect("state collected above");
        let mut table = RuleTable {
            start: index(&self.start),
            accept: index(&self.accept),
            reject: index(&self.reject),
            actions: Vec::new(),
            size: transitions.len(),
            states: states.clone(),
            name: self.name,
            alphabet: self.alphabet,
            blank: self.blank,
        };
        table.actions = vec![None; states.len() * table.width()];
        for t in transitions {
            let read = table.symbol_index(t.read).expect("checked symbol");
            let write = table.symbol_index(t.write).expect("checked symbol");
            let slot = index(&t.from) * table.width() + read as usize;
            table.actions[slot] = Some(Action { next: index(&t.to), write, movement: t.movement });
        }
        table
    }
}

fn insert_unique(seen: &mut BTreeMap<(String, char), TransitionSpec>, t: TransitionSpec) -> Result<(), TableError> {
    let key = (t.from.clone(), t.read);
    if seen.contains_key(&key) {
        return Err(TableError::DuplicateTransition { state: key.0, symbol: key.1 });
    }
    seen.insert(key, t);
    Ok(())
}

fn single_char(token: &str) -> Result<char, TableError> {
    let mut chars = token.chars();
    match (chars.next(), chars.next()) {
        (Some(c), None) => Ok(c),
        _ => Err(TableError::BadSymbol(token.to_string())),
    }
}

fn parse_source(text: &str) -> Result<RuleTable, ParseError> {
    let at = |line: usize| move |kind: TableError| ParseError { line, kind };

    let mut headers: BTreeMap<&str, (usize, &str)> = BTreeMap::new();
    let mut transition_lines = Vec::new();
    let mut last_line = 0;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        last_line = line_no;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if line.contains("->") {
            transition_lines.push((line_no, line));
        } else if let Some((key, value)) = line.split_once(':') {
            let key = key.trim();
            if !matches!(key, "name" | "alphabet" | "blank" | "start" | "accept" | "reject") {
                return Err(at(line_no)(TableError::UnknownHeader(key.to_string())));
            }
            if headers.insert(key, (line_no, value.trim())).is_some() {
                return Err(at(line_no)(TableError::DuplicateHeader(key.to_string())));
            }
        } else {
            return Err(at(line_no)(TableError::Malformed(line.to_string())));
        }
    }

    let eof = last_line.max(1);
    let field = |key: &'static str| -> Result<(usize, &str), ParseError> {
        headers
            .get(key)
            .copied()
            .filter(|(_, v)| !v.is_empty() || key == "alphabet")
            .ok_or(ParseError { line: eof, kind: TableError::MissingHeader(key) })
    };
    let (_, name) = field("name")?;
    let (alphabet_line, alphabet_src) = field("alphabet")?;
    let alphabet =
        alphabet_src.split_whitespace().map(single_char).collect::<Result<Vec<_>, _>>().map_err(at(alphabet_line))?;
    let (blank_line, blank_src) = field("blank")?;
    let blank = single_char(blank_src).map_err(at(blank_line))?;
    let (_, start) = field("start")?;
    let (_, accept) = field("accept")?;
    let (reject_line, reject) = field("reject")?;

    let header =
        Header::new(name.to_string(), alphabet, blank, start.to_string(), accept.to_string(), reject.to_string())
            .map_err(at(reject_line.max(alphabet_line).max(blank_line)))?;

    let mut seen = BTreeMap::new();
    for (line_no, line) in transition_lines {
        let tokens: Vec<&str> = line.split_whitespace().collect();
        let [from, read, "->", to, write, movement] = tokens.as_slice() else {
            return Err(at(line_no)(TableError::Malformed(line.to_string())));
        };
        let spec = TransitionSpec {
            from: from.to_string(),
            read: single_char(read).map_err(at(line_no))?,
            to: to.to_string(),
            write: single_char(write).map_err(at(line_no))?,
            movement: movement.parse().map_err(at(line_no))?,
        };
        header.check(&spec).map_err(at(line_no))?;
        insert_unique(&mut seen, spec).map_err(at(line_no))?;
    }
    Ok(header.assemble(seen.into_values()))
}

/// How a run ended, or that it is still in progress.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RunOutcome {
    Accepted,
    Rejected,
    BudgetExhausted,
    /// Still working when a monitor stopped it. [`run`] never reports this.
    Working,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct RunResult {
    pub outcome: RunOutcome,
    pub steps: u64,
    /// Distinct tape cells the head has occupied.
    pub space: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Running,
    Accepted,
    Rejected,
}

/// Instantaneous description of one simulation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TapeConfig {
    state: usize,
    tape: Vec<u8>,
    head: usize,
    steps: u64,
    visited: usize,
}

/// Hashable `(state, head, tape)` triple with trailing blanks trimmed.
pub(crate) type ConfigKey = (usize, usize, Vec<u8>);

impl TapeConfig {
    /// Input written at cells `0..n`, head on cell 0, machine in its start state.
    pub fn start(table: &RuleTable, input: &str) -> Result<Self, TmError> {
        table.validate_input(input)?;
        let tape = input.chars().map(|c| table.symbol_index(c).expect("validated input")).collect();
        Ok(Self { state: table.start, tape, head: 0, steps: 0, visited: 1 })
    }

    pub fn state<'t>(&self, table: &'t RuleTable) -> &'t str {
        &table.states[self.state]
    }

    pub fn head(&self) -> usize {
        self.head
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn visited(&self) -> usize {
        self.visited
    }

    pub fn read(&self, table: &RuleTable, cell: usize) -> char {
        table.symbol_char(self.cell(table, cell))
    }

    /// Written tape contents with trailing blanks removed.
    pub fn tape(&self, table: &RuleTable) -> String {
        let len = self.trimmed_len(table);
        self.tape[..len].iter().map(|&s| table.symbol_char(s)).collect()
    }

    pub fn status(&self, table: &RuleTable) -> Status {
        if self.state == table.accept {
            Status::Accepted
        } else if self.state == table.reject {
            Status::Rejected
        } else {
            Status::Running
        }
    }

    fn cell(&self, table: &RuleTable, cell: usize) -> u8 {
        self.tape.get(cell).copied().unwrap_or(table.blank_index())
    }

    fn trimmed_len(&self, table: &RuleTable) -> usize {
        let blank = table.blank_index();
        self.tape.iter().rposition(|&s| s != blank).map_or(0, |i| i + 1)
    }

    /// Applies one transition.
    pub fn step(&mut self, table: &RuleTable) -> Result<Status, TmError> {
        if table.is_halting(self.state) {
            return Err(TmError::AlreadyHalted);
        }
        self.steps += 1;
        match table.action(self.state, self.cell(table, self.head)) {
            None => self.state = table.reject,
            Some(action) => {
                if self.head >= self.tape.len() {
                    if action.write != table.blank_index() {
                        self.tape.resize(self.head + 1, table.blank_index());
                        self.tape[self.head] = action.write;
                    }
                } else {
                    self.tape[self.head] = action.write;
                }
                match action.movement {
                    Move::Left => self.head = self.head.saturating_sub(1),
                    Move::Right => {
                        self.head += 1;
                        self.visited = self.visited.max(self.head + 1);
                    }
                    Move::Stay => {}
                }
                self.state = action.next;
            }
        }
        Ok(self.status(table))
    }

    pub(crate) fn key(&self, table: &RuleTable) -> ConfigKey {
        (self.state, self.head, self.tape[..self.trimmed_len(table)].to_vec())
    }

    /// True when every cell from the head rightwards is blank and the chain of
    /// blank-reading transitions from the current state moves right and
    /// revisits a state. Such a machine sweeps over fresh blanks forever.
    pub(crate) fn sweeps_blanks_forever(&self, table: &RuleTable) -> bool {
        if self.trimmed_len(table) > self.head {
            return false;
        }
        let mut seen = BTreeSet::new();
        let mut state = self.state;
        loop {
            if table.is_halting(state) || !seen.insert(state) {
                return !table.is_halting(state);
            }
            match table.action(state, table.blank_index()) {
                Some(a) if a.movement == Move::Right => state = a.next,
                _ => return false,
            }
        }
    }

    pub fn result(&self, table: &RuleTable, budget: u64) -> RunResult {
        let outcome = match self.status(table) {
            Status::Accepted => RunOutcome::Accepted,
            Status::Rejected => RunOutcome::Rejected,
            Status::Running if self.steps >= budget => RunOutcome::BudgetExhausted,
            Status::Running => RunOutcome::Working,
        };
        RunResult { outcome, steps: self.steps, space: self.visited }
    }
}

/// Simulates `table` on `input` for at most `budget` steps.
pub fn run(table: &RuleTable, input: &str, budget: u64) -> Result<RunResult, TmError> {
    if budget == 0 {
        return Err(TmError::ZeroBudget);
    }
    let mut config = TapeConfig::start(table, input)?;
    while config.steps < budget {
        if config.step(table)? != Status::Running {
            break;
        }
    }
    Ok(config.result(table, budget))
}
