//! Built-in fixtures: the systems shipped under `examples/`.

use crate::fixpoint::FixpointDefinition;
use crate::nested::NestedSystem;
use crate::syntax::{parse_definition, parse_system};

pub const EXAMPLE1: &str = include_str!("../examples/example1.njs");
pub const RUNNING: &str = include_str!("../examples/running.njs");
pub const AGG_FLP: &str = include_str!("../examples/agg_flp.njs");
pub const AGG_GZ: &str = include_str!("../examples/agg_gz.njs");
pub const FD: &str = include_str!("../examples/fd.lfp");

pub fn example1() -> NestedSystem {
    parse_system(EXAMPLE1).expect("example1 fixture parses")
}

pub fn running() -> NestedSystem {
    parse_system(RUNNING).expect("running fixture parses")
}

pub fn agg_flp() -> NestedSystem {
    parse_system(AGG_FLP).expect("agg_flp fixture parses")
}

pub fn agg_gz() -> NestedSystem {
    parse_system(AGG_GZ).expect("agg_gz fixture parses")
}

pub fn fd() -> FixpointDefinition {
    parse_definition(FD).expect("fd fixture parses")
}

/// Every nested fixture with its name.
pub fn systems() -> Vec<(&'static str, NestedSystem)> {
    vec![
        ("example1", example1()),
        ("running", running()),
        ("agg_flp", agg_flp()),
        ("agg_gz", agg_gz()),
    ]
}
