pub mod compare;
pub mod enumerate;
pub mod evolve;
pub mod report;
pub mod run;

use serde::Serialize;
use tapelearn::{HybridPlan, LanguageClass, RuleTable, StringUniverse};

#[derive(Debug, Serialize)]
pub struct UniverseInfo {
    pub alphabet: String,
    pub max_len: usize,
    pub size: usize,
}

impl UniverseInfo {
    pub fn of(u: &StringUniverse) -> Self {
        Self { alphabet: u.alphabet().iter().collect(), max_len: u.max_len(), size: u.len() }
    }
}

#[derive(Debug, Serialize)]
pub struct ClassInfo {
    pub size: usize,
    pub strings: Vec<String>,
}

impl From<&LanguageClass> for ClassInfo {
    fn from(c: &LanguageClass) -> Self {
        Self { size: c.len(), strings: c.to_strings() }
    }
}

#[derive(Debug, Serialize)]
pub struct PlanInfo {
    pub lanes: Vec<Vec<String>>,
    /// `[i, j]`: table `i` hangs on some string table `j` accepts.
    pub hang_order: Vec<[String; 2]>,
}

impl PlanInfo {
    pub fn new<T: AsRef<RuleTable>>(plan: &HybridPlan, tables: &[T]) -> Self {
        let name = |i: usize| tables[i].as_ref().name().to_string();
        Self {
            lanes: plan.lanes().iter().map(|lane| lane.iter().map(|&i| name(i)).collect()).collect(),
            hang_order: plan.hang_order().iter().map(|&(i, j)| [name(i), name(j)]).collect(),
        }
    }
}

/// The snake_case tag serde gives a unit enum variant.
pub fn label<T: Serialize>(value: &T) -> String {
    match serde_json::to_value(value) {
        Ok(serde_json::Value::String(s)) => s,
        Ok(serde_json::Value::Object(map)) => map.keys().next().cloned().unwrap_or_default(),
        Ok(other) => other.to_string(),
        Err(_) => String::new(),
    }
}
