//! Finite string universes and the language classes carved out of them.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use thiserror::Error;

/// Largest universe we are willing to materialize.
pub const MAX_UNIVERSE: usize = 1 << 22;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum UniverseError {
    #[error("alphabet symbol `{0}` listed twice")]
    DuplicateSymbol(char),
    #[error("universe over {symbols} symbols up to length {max_len} exceeds {MAX_UNIVERSE} strings")]
    TooLarge { symbols: usize, max_len: usize },
}

/// Every string over `alphabet` of length at most `max_len`, in
/// length-then-lexicographic order (lexicographic by alphabet position).
#[derive(Clone)]
pub struct StringUniverse {
    alphabet: Vec<char>,
    max_len: usize,
    strings: Vec<String>,
    index: HashMap<String, usize>,
}

impl StringUniverse {
    pub fn new(alphabet: Vec<char>, max_len: usize) -> Result<Arc<Self>, UniverseError> {
        let mut seen = BTreeSet::new();
        for &c in &alphabet {
            if !seen.insert(c) {
                return Err(UniverseError::DuplicateSymbol(c));
            }
        }
        let mut total: usize = 0;
        let mut layer: usize = 1;
        for len in 0..=max_len {
            if len > 0 {
                layer = layer.saturating_mul(alphabet.len());
            }
            total = total.saturating_add(layer);
            if total > MAX_UNIVERSE {
                return Err(UniverseError::TooLarge { symbols: alphabet.len(), max_len });
            }
            if layer == 0 {
                break;
            }
        }

        let mut strings = Vec::with_capacity(total);
        let mut previous = vec![String::new()];
        strings.push(String::new());
        for _ in 0..max_len {
            let next: Vec<String> =
                previous.iter().flat_map(|p| alphabet.iter().map(move |&c| format!("{p}{c}"))).collect();
            if next.is_empty() {
                break;
            }
            strings.extend(next.iter().cloned());
            previous = next;
        }
        let index = strings.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
        Ok(Arc::new(Self { alphabet, max_len, strings, index }))
    }

    pub fn alphabet(&self) -> &[char] {
        &self.alphabet
    }

    pub fn max_len(&self) -> usize {
        self.max_len
    }

    pub fn strings(&self) -> &[String] {
        &self.strings
    }

    pub fn len(&self) -> usize {
        self.strings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.strings.is_empty()
    }

    pub fn index_of(&self, s: &str) -> Option<usize> {
        self.index.get(s).copied()
    }

    pub fn same_as(&self, other: &StringUniverse) -> bool {
        std::ptr::eq(self, other) || (self.alphabet == other.alphabet && self.max_len == other.max_len)
    }
}

impl fmt::Debug for StringUniverse {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("StringUniverse")
            .field("alphabet", &self.alphabet)
            .field("max_len", &self.max_len)
            .field("len", &self.strings.len())
            .finish()
    }
}

impl PartialEq for StringUniverse {
    fn eq(&self, other: &Self) -> bool {
        self.same_as(other)
    }
}

impl Eq for StringUniverse {}

/// A subset of a [`StringUniverse`].
///
/// Set operations between classes over different universes panic.
#[derive(Clone)]
pub struct LanguageClass {
    universe: Arc<StringUniverse>,
    members: BTreeSet<usize>,
}

impl LanguageClass {
    pub fn empty(universe: &Arc<StringUniverse>) -> Self {
        Self { universe: Arc::clone(universe), members: BTreeSet::new() }
    }

    pub fn full(universe: &Arc<StringUniverse>) -> Self {
        Self { universe: Arc::clone(universe), members: (0..universe.len()).collect() }
    }

    pub fn from_indices(universe: &Arc<StringUniverse>, members: impl IntoIterator<Item = usize>) -> Self {
        let members: BTreeSet<usize> = members.into_iter().collect();
        assert!(members.iter().all(|&i| i < universe.len()), "index outside universe");
        Self { universe: Arc::clone(universe), members }
    }

    /// Returns `None` if some string is not in the universe.
    pub fn from_strings<S: AsRef<str>>(
        universe: &Arc<StringUniverse>,
        strings: impl IntoIterator<Item = S>,
    ) -> Option<Self> {
        let members = strings.into_iter().map(|s| universe.index_of(s.as_ref())).collect::<Option<BTreeSet<_>>>()?;
        Some(Self { universe: Arc::clone(universe), members })
    }

    pub(crate) fn from_flags(universe: &Arc<StringUniverse>, flags: &[bool]) -> Self {
        Self::from_indices(universe, flags.iter().enumerate().filter(|(_, &f)| f).map(|(i, _)| i))
    }

    pub fn universe(&self) -> &Arc<StringUniverse> {
        &self.universe
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, s: &str) -> bool {
        self.universe.index_of(s).is_some_and(|i| self.members.contains(&i))
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.members.iter().copied()
    }

    /// Members in canonical (length-then-lexicographic) order.
    pub fn iter(&self) -> impl Iterator<Item = &str> + '_ {
        self.members.iter().map(|&i| self.universe.strings[i].as_str())
    }

    pub fn to_strings(&self) -> Vec<String> {
        self.iter().map(str::to_string).collect()
    }

    fn check(&self, other: &Self) {
        assert!(self.universe.same_as(&other.universe), "language classes over different universes");
    }

    pub fn union(&self, other: &Self) -> Self {
        self.check(other);
        Self { universe: Arc::clone(&self.universe), members: &self.members | &other.members }
    }

    pub fn intersection(&self, other: &Self) -> Self {
        self.check(other);
        Self { universe: Arc::clone(&self.universe), members: &self.members & &other.members }
    }

    pub fn difference(&self, other: &Self) -> Self {
        self.check(other);
        Self { universe: Arc::clone(&self.universe), members: &self.members - &other.members }
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        self.check(other);
        self.members.is_subset(&other.members)
    }

    pub fn is_proper_subset(&self, other: &Self) -> bool {
        self.is_subset(other) && self.members.len() < other.members.len()
    }
}

impl PartialEq for LanguageClass {
    fn eq(&self, other: &Self) -> bool {
        self.universe.same_as(&other.universe) && self.members == other.members
    }
}

impl Eq for LanguageClass {}

impl fmt::Debug for LanguageClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter().map(|s| if s.is_empty() { "ε" } else { s })).finish()
    }
}

/// How per-string work over a universe is scheduled.
///
/// Both engines return results in universe order, so the choice never
/// changes what is computed.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Engine {
    #[default]
    Serial,
    Threaded,
}

impl Engine {
    pub(crate) fn map<T, F>(self, universe: &StringUniverse, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(&str) -> T + Sync + Send,
    {
        match self {
            Engine::Serial => universe.strings.iter().map(|s| f(s)).collect(),
            Engine::Threaded => universe.strings.par_iter().map(|s| f(s)).collect(),
        }
    }

    /// Like [`Engine::map`] but stops at, and reports, the first error in
    /// universe order regardless of scheduling.
    pub(crate) fn try_map<T, E, F>(self, universe: &StringUniverse, f: F) -> Result<Vec<T>, E>
    where
        T: Send,
        E: Send,
        F: Fn(&str) -> Result<T, E> + Sync + Send,
    {
        match self {
            Engine::Serial => universe.strings.iter().map(|s| f(s)).collect(),
            Engine::Threaded => self.map(universe, f).into_iter().collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn universe_size_and_order() {
        let u = StringUniverse::new(vec!['a', 'b'], 3).unwrap();
        assert_eq!(u.len(), 1 + 2 + 4 + 8);
        assert_eq!(&u.strings()[..7], ["", "a", "b", "aa", "ab", "ba", "bb"]);
        assert_eq!(u.index_of("bbb"), Some(14));
    }

    #[test]
    fn universe_respects_alphabet_order() {
        let u = StringUniverse::new(vec!['b', 'a'], 1).unwrap();
        assert_eq!(u.strings(), ["", "b", "a"]);
    }

    #[test]
    fn empty_alphabet_holds_only_epsilon() {
        let u = StringUniverse::new(vec![], 5).unwrap();
        assert_eq!(u.strings(), [""]);
    }

    #[test]
    fn universe_limits() {
        assert!(matches!(StringUniverse::new(vec!['a', 'b'], 40), Err(UniverseError::TooLarge { .. })));
        assert_eq!(StringUniverse::new(vec!['a', 'a'], 1).unwrap_err(), UniverseError::DuplicateSymbol('a'));
    }

    #[test]
    fn set_algebra() {
        let u = StringUniverse::new(vec!['a', 'b'], 2).unwrap();
        let x = LanguageClass::from_strings(&u, ["a", "ab"]).unwrap();
        let y = LanguageClass::from_strings(&u, ["a", "b", "ab"]).unwrap();
        assert!(x.is_proper_subset(&y));
        assert!(!y.is_subset(&x));
        assert_eq!(y.difference(&x).to_strings(), ["b"]);
        assert_eq!(x.union(&y), y);
        assert_eq!(x.intersection(&y), x);
        assert!(LanguageClass::from_strings(&u, ["abc"]).is_none());
    }

    #[test]
    #[should_panic(expected = "different universes")]
    fn mixing_universes_panics() {
        let u2 = StringUniverse::new(vec!['a', 'b'], 2).unwrap();
        let u3 = StringUniverse::new(vec!['a', 'b'], 3).unwrap();
        let _ = LanguageClass::empty(&u2).union(&LanguageClass::empty(&u3));
    }

    #[test]
    fn engines_agree() {
        let u = StringUniverse::new(vec!['a', 'b'], 6).unwrap();
        let a = Engine::Serial.map(&u, |s| s.len());
        let b = Engine::Threaded.map(&u, |s| s.len());
        assert_eq!(a, b);
        let err = Engine::Threaded.try_map(&u, |s| if s.len() >= 2 { Err(s.to_string()) } else { Ok(()) });
        assert_eq!(err, Err("aa".to_string()));
    }
}
