//! Utilities, payoffs and evolutionary stability of learning strategies.

use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::language::{LanguageClass, StringUniverse};
use crate::learners::{learner_class, LearnerError, LearnerSpec};
use crate::oracle::Oracle;

/// Allowed drift of population shares away from the simplex.
pub const SIMPLEX_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GameError {
    #[error("class and measure are defined over different universes")]
    UniverseMismatch,
    #[error("weight for {string:?} must be a positive finite number, got {weight}")]
    BadWeight { string: String, weight: f64 },
    #[error("string {0:?} is not in the measure's universe")]
    UnknownString(String),
    #[error("weights line {line}: {message}")]
    WeightsSyntax { line: usize, message: String },
    #[error("need at least one strategy")]
    NoStrategies,
    #[error("payoff matrix is not square with {0} strategies")]
    NotSquare(usize),
    #[error("payoff matrix violates {0}")]
    MatrixInvariant(String),
    #[error("strategy index {index} out of range for {len} strategies")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("population does not match the matrix strategies")]
    PopulationMismatch,
    #[error("population shares must be nonnegative and sum to 1 (sum = {sum})")]
    OffSimplex { sum: f64 },
    #[error("superset hypothesis held but its conclusion failed: {0}")]
    InvariantViolation(String),
    #[error(transparent)]
    Learner(#[from] LearnerError),
}

/// Strictly positive weights on the strings of a universe.
#[derive(Debug, Clone)]
pub struct UtilityMeasure {
    universe: Arc<StringUniverse>,
    weights: Vec<f64>,
}

impl UtilityMeasure {
    /// Every string weighs 1.
    pub fn counting(universe: &Arc<StringUniverse>) -> Self {
        Self { universe: Arc::clone(universe), weights: vec![1.0; universe.len()] }
    }

    /// Weight 1 except where overridden.
    pub fn weighted<S: AsRef<str>>(
        universe: &Arc<StringUniverse>,
        overrides: impl IntoIterator<Item = (S, f64)>,
    ) -> Result<Self, GameError> {
        let mut m = Self::counting(universe);
        for (s, weight) in overrides {
            let s = s.as_ref();
            let i = universe.index_of(s).ok_or_else(|| GameError::UnknownString(s.to_string()))?;
            if !(weight.is_finite() && weight > 0.0) {
                return Err(GameError::BadWeight { string: s.to_string(), weight });
            }
            m.weights[i] = weight;
        }
        Ok(m)
    }

    /// Reads `<string> <weight>` lines; `""` stands for the empty string and
    /// `#` starts a comment. Unlisted strings weigh 1.
    pub fn parse_weights(universe: &Arc<StringUniverse>, text: &str) -> Result<Self, GameError> {
        let mut overrides = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let syntax = |message: String| GameError::WeightsSyntax { line: i + 1, message };
            let mut parts = line.split_whitespace();
            let (Some(s), Some(w), None) = (parts.next(), parts.next(), parts.next()) else {
                return Err(syntax(format!("expected `<string> <weight>`, got `{line}`")));
            };
            let weight: f64 = w.parse().map_err(|_| syntax(format!("`{w}` is not a number")))?;
            let s = if s == "\"\"" { String::new() } else { s.to_string() };
            overrides.push((s, weight));
        }
        Self::weighted(universe, overrides)
    }

    pub fn universe(&self) -> &Arc<StringUniverse> {
        &self.universe
    }

    pub fn weight(&self, s: &str) -> Option<f64> {
        self.universe.index_of(s).map(|i| self.weights[i])
    }

    pub fn utility(&self, class: &LanguageClass) -> Result<f64, GameError> {
        if !class.universe().same_as(&self.universe) {
            return Err(GameError::UniverseMismatch);
        }
        Ok(class.indices().map(|i| self.weights[i]).sum())
    }
}

pub fn utility(class: &LanguageClass, measure: &UtilityMeasure) -> Result<f64, GameError> {
    measure.utility(class)
}

/// Utility of the first strategy's class minus the second's.
pub fn payoff(
    s1: &LearnerSpec,
    s2: &LearnerSpec,
    universe: &Arc<StringUniverse>,
    measure: &UtilityMeasure,
    oracle: &Oracle,
) -> Result<f64, GameError> {
    let u1 = measure.utility(&learner_class(s1, universe, oracle)?)?;
    let u2 = measure.utility(&learner_class(s2, universe, oracle)?)?;
    Ok(u1 - u2)
}

/// `entries[i][j]` is the payoff of strategy `i` against strategy `j`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PayoffMatrix {
    strategies: Vec<String>,
    entries: Vec<Vec<f64>>,
}

impl PayoffMatrix {
    /// Checks shape, zero diagonal and antisymmetry.
    pub fn new(strategies: Vec<String>, entries: Vec<Vec<f64>>) -> Result<Self, GameError> {
        let n = strategies.len();
        if n == 0 {
            return Err(GameError::NoStrategies);
        }
        if entries.len() != n || entries.iter().any(|row| row.len() != n) {
            return Err(GameError::NotSquare(n));
        }
        for (i, row) in entries.iter().enumerate() {
            if row[i] != 0.0 {
                return Err(GameError::MatrixInvariant(format!("zero diagonal at {i}")));
            }
            for (j, &x) in row[..i].iter().enumerate() {
                if x != -entries[j][i] {
                    return Err(GameError::MatrixInvariant(format!("antisymmetry at ({i}, {j})")));
                }
            }
        }
        Ok(Self { strategies, entries })
    }

    pub fn strategies(&self) -> &[String] {
        &self.strategies
    }

    pub fn entries(&self) -> &[Vec<f64>] {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i][j]
    }

    pub fn len(&self) -> usize {
        self.strategies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.strategies.is_empty()
    }
}

pub fn payoff_matrix(
    strategies: &[LearnerSpec],
    universe: &Arc<StringUniverse>,
    measure: &UtilityMeasure,
    oracle: &Oracle,
) -> Result<PayoffMatrix, GameError> {
    let utilities = strategies
        .iter()
        .map(|s| measure.utility(&learner_class(s, universe, oracle)?))
        .collect::<Result<Vec<f64>, GameError>>()?;
    let entries = utilities.iter().map(|ui| utilities.iter().map(|uj| ui - uj).collect()).collect();
    PayoffMatrix::new(strategies.iter().map(|s| s.name().to_string()).collect(), entries)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EssVerdict {
    /// Every other strategy does strictly worse against this one than it does
    /// against itself.
    StrictNash,
    /// Ties against itself, but beats every other strategy on its home turf.
    MaynardSmith,
    NotEss,
}

pub fn ess_verdict(matrix: &PayoffMatrix, i: usize) -> Result<EssVerdict, GameError> {
    let n = matrix.len();
    if i >= n {
        return Err(GameError::IndexOutOfRange { index: i, len: n });
    }
    let e = |a: usize, b: usize| matrix.get(a, b);
    let others = || (0..n).filter(move |&j| j != i);
    if others().all(|j| e(i, i) > e(j, i)) {
        Ok(EssVerdict::StrictNash)
    } else if others().all(|j| e(i, i) == e(j, i) && e(i, j) > e(j, j)) {
        Ok(EssVerdict::MaynardSmith)
    } else {
        Ok(EssVerdict::NotEss)
    }
}

/// Checks that a strategy whose class strictly contains every other class is
/// a strict Nash equilibrium, with payoffs equal to the utility of the class
/// difference. Returns whether the containment hypothesis held; a failed
/// conclusion is an error.
pub fn superset_implies_ess(
    strategies: &[LearnerSpec],
    e_index: usize,
    universe: &Arc<StringUniverse>,
    measure: &UtilityMeasure,
    oracle: &Oracle,
) -> Result<bool, GameError> {
    if e_index >= strategies.len() {
        return Err(GameError::IndexOutOfRange { index: e_index, len: strategies.len() });
    }
    let classes = strategies.iter().map(|s| learner_class(s, universe, oracle)).collect::<Result<Vec<_>, _>>()?;
    let top = &classes[e_index];
    let others = || (0..strategies.len()).filter(|&k| k != e_index);
    if !others().all(|k| classes[k].is_proper_subset(top)) {
        return Ok(false);
    }

    let utilities = classes.iter().map(|c| measure.utility(c)).collect::<Result<Vec<_>, _>>()?;
    let entries = utilities.iter().map(|ui| utilities.iter().map(|uj| ui - uj).collect()).collect();
    let matrix = PayoffMatrix::new(strategies.iter().map(|s| s.name().to_string()).collect(), entries)?;
    for k in others() {
        let gain = measure.utility(&top.difference(&classes[k]))?;
        let paid = matrix.get(e_index, k);
        if (paid - gain).abs() > 1e-9 * gain.abs().max(1.0) || paid <= 0.0 {
            return Err(GameError::InvariantViolation(format!(
                "payoff against `{}` is {paid}, utility of the class difference is {gain}",
                strategies[k].name()
            )));
        }
    }
    match ess_verdict(&matrix, e_index)? {
        EssVerdict::StrictNash => Ok(true),
        other => Err(GameError::InvariantViolation(format!("verdict was {other:?}, expected strict Nash"))),
    }
}

/// Strategy shares at one generation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Population {
    pub generation: u64,
    strategies: Vec<String>,
    shares: Vec<f64>,
}

impl Population {
    pub fn new(strategies: Vec<String>, shares: Vec<f64>) -> Result<Self, GameError> {
        if strategies.len() != shares.len() || strategies.is_empty() {
            return Err(GameError::PopulationMismatch);
        }
        let sum: f64 = shares.iter().sum();
        if shares.iter().any(|&s| s.is_nan() || s < 0.0 || !s.is_finite()) || (sum - 1.0).abs() > SIMPLEX_TOLERANCE {
            return Err(GameError::OffSimplex { sum });
        }
        let shares = shares.iter().map(|s| s / sum).collect();
        Ok(Self { generation: 0, strategies, shares })
    }

    pub fn strategies(&self) -> &[String] {
        &self.strategies
    }

    pub fn shares(&self) -> &[f64] {
        &self.shares
    }

    pub fn share_of(&self, strategy: &str) -> Option<f64> {
        self.strategies.iter().position(|s| s == strategy).map(|i| self.shares[i])
    }
}

/// Discrete replicator dynamics. Returns `generations + 1` states starting
/// with `pop0`.
///
/// Fitness is `f_i = sum_j x_j E[i][j]`; shares update as
/// `x_i (K + f_i) / (K + mean f)` with `K = 1 + max |E|` keeping factors positive.
pub fn replicate(matrix: &PayoffMatrix, pop0: &Population, generations: u64) -> Result<Vec<Population>, GameError> {
    if pop0.strategies != matrix.strategies {
        return Err(GameError::PopulationMismatch);
    }
    let n = matrix.len();
    let offset = 1.0 + matrix.entries.iter().flatten().fold(0.0_f64, |m, e| m.max(e.abs()));
    let mut trajectory = Vec::with_capacity(generations as usize + 1);
    let mut current = pop0.clone();
    current.generation = 0;
    for _ in 0..generations {
        let x = &current.shares;
        let fitness: Vec<f64> = (0..n).map(|i| (0..n).map(|j| x[j] * matrix.get(i, j)).sum()).collect();
        let mean: f64 = (0..n).map(|i| x[i] * fitness[i]).sum();
        let mut next: Vec<f64> = (0..n).map(|i| x[i] * (offset + fitness[i]) / (offset + mean)).collect();
        let total: f64 = next.iter().sum();
        next.iter_mut().for_each(|s| *s /= total);
        let successor =
            Population { generation: current.generation + 1, strategies: current.strategies.clone(), shares: next };
        trajectory.push(std::mem::replace(&mut current, successor));
    }
    trajectory.push(current);
    Ok(trajectory)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{r_a, r_b, r_eps};
    use crate::tm::RuleTable;

    fn universe3() -> Arc<StringUniverse> {
        StringUniverse::new(vec!['a', 'b'], 3).unwrap()
    }

    fn arcs(tables: Vec<RuleTable>) -> Vec<Arc<RuleTable>> {
        tables.into_iter().map(Arc::new).collect()
    }

    fn par_seq() -> [LearnerSpec; 2] {
        [
            LearnerSpec::parallel("Par", arcs(vec![r_a(), r_b()]), 1000).unwrap(),
            LearnerSpec::sequential("Seq", arcs(vec![r_b(), r_a()]), 1000).unwrap(),
        ]
    }

    fn fixture_matrix() -> PayoffMatrix {
        PayoffMatrix::new(vec!["Par".into(), "Seq".into()], vec![vec![0.0, 7.0], vec![-7.0, 0.0]]).unwrap()
    }

    #[test]
    fn utility_examples() {
        let u = universe3();
        let o = Oracle::new(1000);
        let m = UtilityMeasure::counting(&u);
        assert_eq!(utility(&LanguageClass::empty(&u), &m).unwrap(), 0.0);
        let [par, _] = par_seq();
        assert_eq!(utility(&learner_class(&par, &u, &o).unwrap(), &m).unwrap(), 14.0);
        assert_eq!(utility(&o.language_of(&r_b(), &u).unwrap(), &m).unwrap(), 7.0);
        let other = StringUniverse::new(vec!['a', 'b'], 2).unwrap();
        assert_eq!(m.utility(&LanguageClass::empty(&other)), Err(GameError::UniverseMismatch));
    }

    #[test]
    fn weights_file() {
        let u = universe3();
        let m = UtilityMeasure::parse_weights(&u, "# w\n\"\" 2.5\nab 0.5\n").unwrap();
        assert_eq!(m.weight(""), Some(2.5));
        assert_eq!(m.weight("ab"), Some(0.5));
        assert_eq!(m.weight("b"), Some(1.0));
        assert!(matches!(UtilityMeasure::parse_weights(&u, "ab 0\n"), Err(GameError::BadWeight { .. })));
        assert!(matches!(UtilityMeasure::parse_weights(&u, "abab 1\n"), Err(GameError::UnknownString(_))));
        assert!(matches!(UtilityMeasure::parse_weights(&u, "ab\n"), Err(GameError::WeightsSyntax { line: 1, .. })));
    }

    #[test]
    fn payoff_examples() {
        let u = universe3();
        let o = Oracle::new(1000);
        let m = UtilityMeasure::counting(&u);
        let [par, seq] = par_seq();
        assert_eq!(payoff(&par, &seq, &u, &m, &o).unwrap(), 7.0);
        assert_eq!(payoff(&seq, &seq, &u, &m, &o).unwrap(), 0.0);
        assert_eq!(payoff(&seq, &par, &u, &m, &o).unwrap(), -7.0);
    }

    #[test]
    fn matrix_examples() {
        let u = universe3();
        let o = Oracle::new(1000);
        let m = UtilityMeasure::counting(&u);
        let [par, seq] = par_seq();
        assert_eq!(payoff_matrix(&[par.clone(), seq.clone()], &u, &m, &o).unwrap(), fixture_matrix());
        assert_eq!(payoff_matrix(std::slice::from_ref(&seq), &u, &m, &o).unwrap().entries(), [vec![0.0]]);

        let hyb = LearnerSpec::hybrid("Hyb", arcs(vec![r_a(), r_b()]), &u, &o, 1000).unwrap();
        let mx = payoff_matrix(&[par, seq, hyb], &u, &m, &o).unwrap();
        assert_eq!(mx.entries()[2], mx.entries()[0]);
    }

    #[test]
    fn matrix_validation() {
        assert!(PayoffMatrix::new(vec!["a".into()], vec![vec![1.0]]).is_err());
        assert!(PayoffMatrix::new(vec!["a".into(), "b".into()], vec![vec![0.0, 1.0], vec![1.0, 0.0]]).is_err());
        assert!(PayoffMatrix::new(vec!["a".into(), "b".into()], vec![vec![0.0, 1.0]]).is_err());
        assert_eq!(PayoffMatrix::new(vec![], vec![]).unwrap_err(), GameError::NoStrategies);
    }

    #[test]
    fn verdict_examples() {
        let mx = fixture_matrix();
        assert_eq!(ess_verdict(&mx, 0).unwrap(), EssVerdict::StrictNash);
        assert_eq!(ess_verdict(&mx, 1).unwrap(), EssVerdict::NotEss);
        let zero = PayoffMatrix::new(vec!["a".into(), "b".into()], vec![vec![0.0; 2]; 2]).unwrap();
        assert_eq!(ess_verdict(&zero, 0).unwrap(), EssVerdict::NotEss);
        assert!(matches!(ess_verdict(&mx, 2), Err(GameError::IndexOutOfRange { .. })));
    }

    #[test]
    fn maynard_smith_branch() {
        // Generic (non-antisymmetric) payoffs are out of reach of PayoffMatrix::new,
        // so build one directly: E(S,S) = E(T,S) and E(S,T) > E(T,T).
        let mx =
            PayoffMatrix { strategies: vec!["S".into(), "T".into()], entries: vec![vec![1.0, 3.0], vec![1.0, 2.0]] };
        assert_eq!(ess_verdict(&mx, 0).unwrap(), EssVerdict::MaynardSmith);
    }

    #[test]
    fn superset_examples() {
        let u = universe3();
        let o = Oracle::new(1000);
        let m = UtilityMeasure::counting(&u);
        let [par, seq] = par_seq();
        assert!(superset_implies_ess(&[par.clone(), seq.clone()], 0, &u, &m, &o).unwrap());
        assert!(!superset_implies_ess(&[par.clone(), par.clone().with_name("Par2")], 0, &u, &m, &o).unwrap());

        let par3 = LearnerSpec::parallel("Par", arcs(vec![r_a(), r_b(), r_eps()]), 1000).unwrap();
        let seq3 = LearnerSpec::sequential("Seq", arcs(vec![r_b(), r_a(), r_eps()]), 1000).unwrap();
        assert_eq!(learner_class(&seq3, &u, &o).unwrap().len(), 8);
        assert!(superset_implies_ess(&[par3, seq3], 0, &u, &m, &o).unwrap());
    }

    #[test]
    fn replicator_examples() {
        let mx = fixture_matrix();
        let names = vec!["Par".to_string(), "Seq".to_string()];
        let half = Population::new(names.clone(), vec![0.5, 0.5]).unwrap();
        let traj = replicate(&mx, &half, 50).unwrap();
        assert_eq!(traj.len(), 51);
        for w in traj.windows(2) {
            assert!(w[1].shares()[0] > w[0].shares()[0] || w[0].shares()[0] == 1.0);
        }

        let vertex = Population::new(names.clone(), vec![1.0, 0.0]).unwrap();
        assert!(replicate(&mx, &vertex, 20).unwrap().iter().all(|p| p.shares() == [1.0, 0.0]));

        let low = Population::new(names.clone(), vec![0.1, 0.9]).unwrap();
        let traj = replicate(&mx, &low, 200).unwrap();
        assert!(traj.last().unwrap().share_of("Par").unwrap() > 0.99);
        assert_eq!(traj.last().unwrap().generation, 200);
    }

    #[test]
    fn replicator_input_checks() {
        let mx = fixture_matrix();
        let names = vec!["Par".to_string(), "Seq".to_string()];
        assert!(matches!(Population::new(names.clone(), vec![0.5, 0.6]), Err(GameError::OffSimplex { .. })));
        assert!(matches!(Population::new(names, vec![1.5, -0.5]), Err(GameError::OffSimplex { .. })));
        let wrong = Population::new(vec!["X".into(), "Y".into()], vec![0.5, 0.5]).unwrap();
        assert_eq!(replicate(&mx, &wrong, 1).unwrap_err(), GameError::PopulationMismatch);
    }
}
