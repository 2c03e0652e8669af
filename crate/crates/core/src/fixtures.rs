//! The three reference rule tables over alphabet `{a, b}` with blank `_`.
//!
//! * `R_A` accepts strings whose first symbol is `a` and halts everywhere.
//! * `R_B` accepts strings whose first symbol is `b` and diverges on `a...`.
//! * `R_EPS` accepts only the empty string.

use crate::tm::RuleTable;

pub const R_A_SOURCE: &str = include_str!("../fixtures/R_A.tm");
pub const R_B_SOURCE: &str = include_str!("../fixtures/R_B.tm");
pub const R_EPS_SOURCE: &str = include_str!("../fixtures/R_EPS.tm");

pub fn r_a() -> RuleTable {
    RuleTable::parse(R_A_SOURCE).expect("bundled fixture")
}

pub fn r_b() -> RuleTable {
    RuleTable::parse(R_B_SOURCE).expect("bundled fixture")
}

pub fn r_eps() -> RuleTable {
    RuleTable::parse(R_EPS_SOURCE).expect("bundled fixture")
}

pub fn all() -> Vec<RuleTable> {
    vec![r_a(), r_b(), r_eps()]
}

/// Looks up a bundled fixture by table name or short alias (`RA`, `RB`, `REPS`).
pub fn by_name(name: &str) -> Option<RuleTable> {
    match name {
        "R_A" | "RA" => Some(r_a()),
        "R_B" | "RB" => Some(r_b()),
        "R_EPS" | "REPS" => Some(r_eps()),
        _ => None,
    }
}
