//! Seeded generator of small random rule tables for property checks.
//!
//! This makes no claim about how rule tables arise; it only supplies varied
//! machines, including ones that diverge, for exercising the learners.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::language::StringUniverse;
use crate::oracle::Oracle;
use crate::tm::{Move, RuleTable, TransitionSpec};

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, Copy)]
pub struct TableShape {
    /// Working (non-halting) states, at least 1.
    pub max_states: usize,
    /// Probability that a (state, symbol) pair gets a transition.
    pub density: f64,
}

impl Default for TableShape {
    fn default() -> Self {
        Self { max_states: 3, density: 0.85 }
    }
}

pub fn random_table<R: Rng>(rng: &mut R, name: &str, alphabet: &[char], blank: char, shape: TableShape) -> RuleTable {
    let working = rng.gen_range(1..=shape.max_states.max(1));
    let states: Vec<String> = (0..working).map(|i| format!("q{i}")).collect();
    let mut targets = states.clone();
    targets.extend(["acc".to_string(), "rej".to_string()]);
    let mut symbols = alphabet.to_vec();
    symbols.push(blank);
    let moves = [Move::Left, Move::Right, Move::Stay];

    let mut transitions = Vec::new();
    for from in &states {
        for &read in &symbols {
            if !rng.gen_bool(shape.density) {
                continue;
            }
            transitions.push(TransitionSpec {
                from: from.clone(),
                read,
                to: targets.choose(rng).expect("nonempty").clone(),
                write: *symbols.choose(rng).expect("nonempty"),
                movement: *moves.choose(rng).expect("nonempty"),
            });
        }
    }
    RuleTable::new(name, alphabet.to_vec(), blank, "q0", "acc", "rej", transitions)
        .expect("generated table is well formed")
}

/// `count` random tables named `<prefix>0`, `<prefix>1`, ...
pub fn random_tables<R: Rng>(
    rng: &mut R,
    prefix: &str,
    count: usize,
    alphabet: &[char],
    blank: char,
) -> Vec<RuleTable> {
    (0..count).map(|i| random_table(rng, &format!("{prefix}{i}"), alphabet, blank, TableShape::default())).collect()
}

/// Draws table sets of 2 to 4 tables until one has definite oracle verdicts
/// on the whole universe. Returns `None` after `attempts` failures.
pub fn definite_table_set<R: Rng>(
    rng: &mut R,
    prefix: &str,
    universe: &Arc<StringUniverse>,
    oracle: &Oracle,
    attempts: usize,
) -> Option<Vec<Arc<RuleTable>>> {
    for _ in 0..attempts {
        let count = rng.gen_range(2..=4);
        let tables = random_tables(rng, prefix, count, universe.alphabet(), '_');
        if tables.iter().all(|t| oracle.profile(t, universe).is_ok()) {
            return Some(tables.into_iter().map(Arc::new).collect());
        }
    }
    None
}
