//! Small hand-written networks shared by unit tests.

use crate::instance::{load_instance, Instance};

pub const T1_JSON: &str = include_str!("../tests/data/t1.json");
pub const T2_JSON: &str = include_str!("../tests/data/t2.json");

/// Three nodes, one commodity 1 -> 3 with load 10 and tat 11.
pub fn t1() -> Instance {
    load_instance(T1_JSON).unwrap()
}

pub fn t1_with_tat(tat: f64) -> Instance {
    let mut inst = t1();
    inst.commodities[0].tat = tat;
    inst
}

/// Consolidation case: two loads of 5 that fit one vehicle on (2, 3).
pub fn t2() -> Instance {
    load_instance(T2_JSON).unwrap()
}
