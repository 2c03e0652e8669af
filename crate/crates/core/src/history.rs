//! Time evolution of a rule set under addition of whole tables.
//!
//! A [`SystemHistory`] is an immutable list of snapshots. Each snapshot holds
//! its predecessor's tables plus at most one new one; tables are never edited
//! or dropped. Classes are always measured over the history's universe.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use thiserror::Error;

use crate::language::{LanguageClass, StringUniverse};
use crate::learners::{learner_class, LearnerError, LearnerSpec, Mode, ModeKind};
use crate::oracle::{check_alphabet, Oracle, OracleError};
use crate::tm::RuleTable;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HistoryError {
    #[error("snapshot index {index} out of range for a history of {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("snapshot indices must satisfy t1 <= t2 (got {t1} > {t2})")]
    Reversed { t1: usize, t2: usize },
    #[error("a history needs at least one snapshot")]
    Empty,
    #[error("snapshot t{t}: {reason}")]
    AxiomViolation { t: usize, reason: String },
    #[error("table `{0}` differs from the table already registered under that name")]
    NameClash(String),
    #[error(transparent)]
    Learner(#[from] LearnerError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

impl FromStr for ModeKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "seq" | "sequential" => Ok(ModeKind::Sequential),
            "par" | "parallel" => Ok(ModeKind::Parallel),
            "hybrid" => Ok(ModeKind::Hybrid),
            other => Err(format!("unknown mode `{other}` (expected seq, par or hybrid)")),
        }
    }
}

impl fmt::Display for ModeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModeKind::Sequential => "seq",
            ModeKind::Parallel => "par",
            ModeKind::Hybrid => "hybrid",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Snapshot {
    pub tables: Vec<Arc<RuleTable>>,
    pub mode: ModeKind,
}

#[derive(Debug, Clone)]
pub struct SystemHistory {
    universe: Arc<StringUniverse>,
    snapshots: Vec<Snapshot>,
}

impl SystemHistory {
    pub fn new(
        universe: &Arc<StringUniverse>,
        tables: Vec<Arc<RuleTable>>,
        mode: ModeKind,
    ) -> Result<Self, HistoryError> {
        Self::from_snapshots(universe, vec![Snapshot { tables, mode }])
    }

    /// Validates that consecutive snapshots keep every table and add at most one.
    pub fn from_snapshots(universe: &Arc<StringUniverse>, snapshots: Vec<Snapshot>) -> Result<Self, HistoryError> {
        if snapshots.is_empty() {
            return Err(HistoryError::Empty);
        }
        let violation = |t: usize, reason: String| HistoryError::AxiomViolation { t, reason };
        for (t, snap) in snapshots.iter().enumerate() {
            for table in &snap.tables {
                check_alphabet(table, universe)?;
            }
            let mut names = BTreeSet::new();
            for table in &snap.tables {
                if !names.insert(table.name()) {
                    return Err(violation(t, format!("table `{}` listed twice", table.name())));
                }
            }
            LearnerSpec::new("check", snap.tables.clone(), Mode::Parallel, 1)?;
            if t == 0 {
                continue;
            }
            let prev = &snapshots[t - 1];
            for old in &prev.tables {
                match snap.tables.iter().find(|n| n.name() == old.name()) {
                    None => return Err(violation(t, format!("table `{}` was removed", old.name()))),
                    Some(new) if new != old => {
                        return Err(violation(t, format!("table `{}` was modified", old.name())))
                    }
                    Some(_) => {}
                }
            }
            if snap.tables.len() > prev.tables.len() + 1 {
                return Err(violation(t, "more than one table added in a single step".into()));
            }
        }
        Ok(Self { universe: Arc::clone(universe), snapshots })
    }

    pub fn universe(&self) -> &Arc<StringUniverse> {
        &self.universe
    }

    pub fn snapshots(&self) -> &[Snapshot] {
        &self.snapshots
    }

    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    /// Appends a snapshot with `r_new` added, keeping the latest mode.
    pub fn add_rule(&self, r_new: Arc<RuleTable>) -> Result<Self, HistoryError> {
        let mode = self.snapshots.last().expect("nonempty history").mode;
        self.add_rule_with_mode(r_new, mode)
    }

    pub fn add_rule_with_mode(&self, r_new: Arc<RuleTable>, mode: ModeKind) -> Result<Self, HistoryError> {
        let last = self.snapshots.last().expect("nonempty history");
        let mut tables = last.tables.clone();
        match tables.iter().find(|t| t.name() == r_new.name()) {
            Some(existing) if **existing != *r_new => return Err(HistoryError::NameClash(r_new.name().to_string())),
            Some(_) => {}
            None => tables.push(r_new),
        }
        let mut snapshots = self.snapshots.clone();
        snapshots.push(Snapshot { tables, mode });
        Self::from_snapshots(&self.universe, snapshots)
    }

    fn snapshot(&self, t: usize) -> Result<&Snapshot, HistoryError> {
        self.snapshots.get(t).ok_or(HistoryError::IndexOutOfRange { index: t, len: self.snapshots.len() })
    }

    /// The learner a snapshot describes, with the oracle guard as budget.
    pub fn learner(&self, t: usize, oracle: &Oracle) -> Result<LearnerSpec, HistoryError> {
        let snap = self.snapshot(t)?;
        let name = format!("S(t{t})");
        let spec = match snap.mode {
            ModeKind::Sequential => LearnerSpec::sequential(name, snap.tables.clone(), oracle.guard())?,
            ModeKind::Parallel => LearnerSpec::parallel(name, snap.tables.clone(), oracle.guard())?,
            ModeKind::Hybrid => LearnerSpec::hybrid(name, snap.tables.clone(), &self.universe, oracle, oracle.guard())?,
        };
        Ok(spec)
    }

    pub fn class_at(&self, t: usize, oracle: &Oracle) -> Result<LanguageClass, HistoryError> {
        Ok(learner_class(&self.learner(t, oracle)?, &self.universe, oracle)?)
    }

    /// Strings accepted at `t2` but not at `t1`.
    pub fn learned_set(&self, t1: usize, t2: usize, oracle: &Oracle) -> Result<LanguageClass, HistoryError> {
        self.check_pair(t1, t2)?;
        Ok(self.class_at(t2, oracle)?.difference(&self.class_at(t1, oracle)?))
    }

    /// Whether the class at `t1` is a proper subset of the class at `t2`.
    pub fn learning_occurred(&self, t1: usize, t2: usize, oracle: &Oracle) -> Result<bool, HistoryError> {
        self.check_pair(t1, t2)?;
        Ok(self.class_at(t1, oracle)?.is_proper_subset(&self.class_at(t2, oracle)?))
    }

    /// Whether every snapshot's class contains its predecessor's.
    pub fn is_filtration(&self, oracle: &Oracle) -> Result<bool, HistoryError> {
        let classes = (0..self.len()).map(|t| self.class_at(t, oracle)).collect::<Result<Vec<_>, _>>()?;
        Ok(classes.windows(2).all(|w| w[0].is_subset(&w[1])))
    }

    /// For the step into snapshot `t`, whether the added table accepts
    /// something the previous system did not. `None` if nothing was added.
    pub fn addition_adds_strings(&self, t: usize, oracle: &Oracle) -> Result<Option<bool>, HistoryError> {
        if t == 0 {
            return Ok(None);
        }
        let prev = self.snapshot(t - 1)?;
        let Some(r_new) = self.snapshot(t)?.tables.iter().find(|n| !prev.tables.iter().any(|p| p.name() == n.name()))
        else {
            return Ok(None);
        };
        let fresh = oracle.language_of(r_new, &self.universe)?.difference(&self.class_at(t - 1, oracle)?);
        Ok(Some(!fresh.is_empty()))
    }

    fn check_pair(&self, t1: usize, t2: usize) -> Result<(), HistoryError> {
        self.snapshot(t1)?;
        self.snapshot(t2)?;
        if t1 > t2 {
            return Err(HistoryError::Reversed { t1, t2 });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("manifest line {line}: {message}")]
pub struct ManifestError {
    pub line: usize,
    pub message: String,
}

/// One line of a history manifest: `t<i> mode=<seq|par|hybrid> tables=<a,b,...>`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub t: usize,
    pub mode: ModeKind,
    pub tables: Vec<String>,
}

/// Parses a manifest; snapshot indices must run `t0, t1, ...` in order.
pub fn parse_manifest(text: &str) -> Result<Vec<ManifestEntry>, ManifestError> {
    let mut entries = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let err = |message: String| ManifestError { line, message };
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut tokens = content.split_whitespace();
        let t = tokens
            .next()
            .and_then(|tok| tok.strip_prefix('t'))
            .and_then(|n| n.parse::<usize>().ok())
            .ok_or_else(|| err(format!("expected `t<index>` at the start of `{content}`")))?;
        if t != entries.len() {
            return Err(err(format!("expected snapshot t{} but found t{t}", entries.len())));
        }
        let (mut mode, mut tables) = (None, None);
        for tok in tokens {
            match tok.split_once('=') {
                Some(("mode", m)) => mode = Some(m.parse::<ModeKind>().map_err(err)?),
                Some(("tables", list)) => {
                    tables = Some(list.split(',').filter(|s| !s.is_empty()).map(str::to_string).collect::<Vec<_>>())
                }
                _ => return Err(err(format!("unexpected token `{tok}`"))),
            }
        }
        let mode = mode.ok_or_else(|| err("missing `mode=`".into()))?;
        let tables = tables.filter(|t| !t.is_empty()).ok_or_else(|| err("missing or empty `tables=`".into()))?;
        entries.push(ManifestEntry { t, mode, tables });
    }
    if entries.is_empty() {
        return Err(ManifestError { line: 0, message: "manifest lists no snapshots".into() });
    }
    Ok(entries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{r_a, r_b, r_eps};

    fn universe3() -> Arc<StringUniverse> {
        StringUniverse::new(vec!['a', 'b'], 3).unwrap()
    }

    fn names(s: &Snapshot) -> Vec<&str> {
        s.tables.iter().map(|t| t.name()).collect()
    }

    #[test]
    fn add_rule_examples() {
        let u = universe3();
        let h = SystemHistory::new(&u, vec![Arc::new(r_a())], ModeKind::Parallel).unwrap();
        let grown = h.add_rule(Arc::new(r_b())).unwrap();
        assert_eq!(grown.len(), 2);
        assert_eq!(names(&grown.snapshots()[0]), ["R_A"]);
        assert_eq!(names(&grown.snapshots()[1]), ["R_A", "R_B"]);
        assert_eq!(h.len(), 1, "original history untouched");

        let same = h.add_rule(Arc::new(r_a())).unwrap();
        assert_eq!(names(&same.snapshots()[1]), ["R_A"]);

        let three = grown.add_rule(Arc::new(r_eps())).unwrap();
        assert_eq!(names(three.snapshots().last().unwrap()), ["R_A", "R_B", "R_EPS"]);
    }

    #[test]
    fn modified_table_is_refused() {
        let u = universe3();
        let h = SystemHistory::new(&u, vec![Arc::new(r_a())], ModeKind::Parallel).unwrap();
        let impostor = r_b().renamed("R_A");
        assert_eq!(h.add_rule(Arc::new(impostor.clone())).unwrap_err(), HistoryError::NameClash("R_A".into()));

        let snaps = vec![
            Snapshot { tables: vec![Arc::new(r_a())], mode: ModeKind::Parallel },
            Snapshot { tables: vec![Arc::new(impostor)], mode: ModeKind::Parallel },
        ];
        assert!(matches!(SystemHistory::from_snapshots(&u, snaps), Err(HistoryError::AxiomViolation { t: 1, .. })));
    }

    #[test]
    fn removal_and_double_addition_are_refused() {
        let u = universe3();
        let snap = |tables: Vec<RuleTable>| Snapshot {
            tables: tables.into_iter().map(Arc::new).collect(),
            mode: ModeKind::Parallel,
        };
        let removed = vec![snap(vec![r_a(), r_b()]), snap(vec![r_a()])];
        assert!(SystemHistory::from_snapshots(&u, removed).is_err());
        let doubled = vec![snap(vec![r_a()]), snap(vec![r_a(), r_b(), r_eps()])];
        assert!(SystemHistory::from_snapshots(&u, doubled).is_err());
    }

    #[test]
    fn learned_set_examples() {
        let u = universe3();
        let o = Oracle::new(1000);
        let h = SystemHistory::new(&u, vec![Arc::new(r_a())], ModeKind::Parallel).unwrap();
        let eps = h.add_rule(Arc::new(r_eps())).unwrap();
        assert_eq!(eps.learned_set(0, 1, &o).unwrap().to_strings(), [""]);
        assert!(eps.learned_set(1, 1, &o).unwrap().is_empty());

        let b = h.add_rule(Arc::new(r_b())).unwrap();
        let learned = b.learned_set(0, 1, &o).unwrap();
        assert_eq!(learned.len(), 7);
        assert!(learned.iter().all(|s| s.starts_with('b')));

        assert_eq!(b.learned_set(0, 5, &o).unwrap_err(), HistoryError::IndexOutOfRange { index: 5, len: 2 });
        assert_eq!(b.learned_set(1, 0, &o).unwrap_err(), HistoryError::Reversed { t1: 1, t2: 0 });
    }

    #[test]
    fn learning_occurred_examples() {
        let u = universe3();
        let o = Oracle::new(1000);
        let h = SystemHistory::new(&u, vec![Arc::new(r_a())], ModeKind::Parallel).unwrap();
        assert!(h.add_rule(Arc::new(r_eps())).unwrap().learning_occurred(0, 1, &o).unwrap());

        let ab = SystemHistory::new(&u, vec![Arc::new(r_a()), Arc::new(r_b())], ModeKind::Parallel).unwrap();
        assert!(!ab.add_rule(Arc::new(r_a())).unwrap().learning_occurred(0, 1, &o).unwrap());

        // A table accepting only "ab" adds nothing to a class holding every a-prefixed string.
        let only_ab = RuleTable::parse(
            "name: R_AB\nalphabet: a b\nblank: _\nstart: q0\naccept: acc\nreject: rej\n\
             q0 a -> q1 a R\nq1 b -> q2 b R\nq2 _ -> acc _ S\n",
        )
        .unwrap();
        let all = ab.add_rule(Arc::new(r_eps())).unwrap();
        let h = all.add_rule(Arc::new(only_ab)).unwrap();
        assert!(!h.learning_occurred(1, 2, &o).unwrap());
        assert_eq!(h.addition_adds_strings(2, &o).unwrap(), Some(false));
        assert_eq!(h.addition_adds_strings(1, &o).unwrap(), Some(true));
        assert_eq!(h.addition_adds_strings(0, &o).unwrap(), None);
    }

    #[test]
    fn filtration_examples() {
        let u = universe3();
        let o = Oracle::new(1000);
        let par = SystemHistory::new(&u, vec![Arc::new(r_a())], ModeKind::Parallel)
            .unwrap()
            .add_rule(Arc::new(r_b()))
            .unwrap()
            .add_rule(Arc::new(r_eps()))
            .unwrap();
        assert!(par.is_filtration(&o).unwrap());

        let seq = SystemHistory::from_snapshots(
            &u,
            vec![
                Snapshot { tables: vec![Arc::new(r_a())], mode: ModeKind::Sequential },
                Snapshot { tables: vec![Arc::new(r_b()), Arc::new(r_a())], mode: ModeKind::Sequential },
            ],
        )
        .unwrap();
        assert!(!seq.is_filtration(&o).unwrap());

        let single = SystemHistory::new(&u, vec![Arc::new(r_b())], ModeKind::Sequential).unwrap();
        assert!(single.is_filtration(&o).unwrap());
    }

    #[test]
    fn manifest_parsing() {
        let text = "# growth\nt0 mode=par tables=R_A.tm\nt1 mode=par tables=R_A.tm,R_B.tm\n\nt2 mode=hybrid tables=R_A.tm,R_B.tm,R_EPS.tm\n";
        let entries = parse_manifest(text).unwrap();
        assert_eq!(entries.len(), 3);
        assert_eq!(entries[1].tables, ["R_A.tm", "R_B.tm"]);
        assert_eq!(entries[2].mode, ModeKind::Hybrid);

        assert_eq!(parse_manifest("t1 mode=par tables=a").unwrap_err().line, 1);
        assert!(parse_manifest("t0 mode=fast tables=a").is_err());
        assert!(parse_manifest("t0 mode=par").is_err());
        assert!(parse_manifest("t0 mode=par tables=a extra").is_err());
        assert!(parse_manifest("").is_err());
    }
}
