//! Hang relation between rule tables and its antichain lane partition.

use std::collections::BTreeSet;
use std::sync::Arc;

use serde::Serialize;

use super::LearnerError;
use crate::language::StringUniverse;
use crate::oracle::{Oracle, OracleError};
use crate::tm::RuleTable;

/// Lanes of mutually unrelated tables plus the relation they were built from.
///
/// A pair `(i, j)` in `hang_order` means some string accepted by table `j`
/// makes table `i` run forever.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HybridPlan {
    lanes: Vec<Vec<usize>>,
    hang_order: BTreeSet<(usize, usize)>,
}

impl HybridPlan {
    /// Validates that `lanes` partitions `0..table_count` into antichains.
    pub fn new(
        table_count: usize,
        lanes: Vec<Vec<usize>>,
        hang_order: BTreeSet<(usize, usize)>,
    ) -> Result<Self, LearnerError> {
        let invalid = |why: String| Err(LearnerError::InvalidPlan(why));
        if let Some(&(i, j)) = hang_order.iter().find(|&&(i, j)| i >= table_count || j >= table_count) {
            return invalid(format!("hang pair ({i}, {j}) refers to a missing table"));
        }
        let mut covered = vec![false; table_count];
        for lane in &lanes {
            if lane.is_empty() {
                return invalid("empty lane".into());
            }
            for &t in lane {
                match covered.get_mut(t) {
                    None => return invalid(format!("lane refers to missing table {t}")),
                    Some(true) => return invalid(format!("table {t} appears in two lanes")),
                    Some(seen) => *seen = true,
                }
            }
        }
        if let Some(t) = covered.iter().position(|c| !c) {
            return invalid(format!("table {t} is not assigned to a lane"));
        }
        let plan = Self { lanes, hang_order };
        for lane in &plan.lanes {
            for (a, &i) in lane.iter().enumerate() {
                if let Some(&j) = lane[a + 1..].iter().find(|&&j| plan.related(i, j)) {
                    return invalid(format!("tables {i} and {j} share a lane but are hang-related"));
                }
            }
        }
        Ok(plan)
    }

    /// One lane per table.
    pub fn singletons(table_count: usize) -> Self {
        Self { lanes: (0..table_count).map(|i| vec![i]).collect(), hang_order: BTreeSet::new() }
    }

    pub fn lanes(&self) -> &[Vec<usize>] {
        &self.lanes
    }

    pub fn hang_order(&self) -> &BTreeSet<(usize, usize)> {
        &self.hang_order
    }

    pub fn related(&self, i: usize, j: usize) -> bool {
        self.hang_order.contains(&(i, j)) || self.hang_order.contains(&(j, i))
    }
}

/// Computes the hang relation with the oracle and splits the tables into lanes.
///
/// Tables are scanned in order; each goes to the first lane holding no table
/// it is related to, or opens a new lane.
pub fn build_hybrid<T: AsRef<RuleTable>>(
    tables: &[T],
    universe: &Arc<StringUniverse>,
    oracle: &Oracle,
) -> Result<HybridPlan, OracleError> {
    let profiles = tables.iter().map(|t| oracle.profile(t.as_ref(), universe)).collect::<Result<Vec<_>, _>>()?;
    let accepted: Vec<_> = profiles.iter().map(|p| p.accepted()).collect();
    let hangs: Vec<_> = profiles.iter().map(|p| p.hangs()).collect();

    let mut hang_order = BTreeSet::new();
    for (i, hang) in hangs.iter().enumerate() {
        for (j, class) in accepted.iter().enumerate() {
            if !hang.intersection(class).is_empty() {
                hang_order.insert((i, j));
            }
        }
    }

    let mut plan = HybridPlan { lanes: Vec::new(), hang_order };
    for i in 0..tables.len() {
        match plan.lanes.iter().position(|lane| lane.iter().all(|&m| !plan.related(i, m))) {
            Some(k) => plan.lanes[k].push(i),
            None => plan.lanes.push(vec![i]),
        }
    }
    Ok(plan)
}
