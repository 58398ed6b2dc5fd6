//! The Rips machine and the moves it is built from.

mod imanishi;
mod machine;
mod moves;

pub use imanishi::{imanishi, AnnulusFree, ImanishiReport, Interval};
pub use machine::{interleaving_check, run_machine, AmbientMap, Halt, Interleaving, Move, Placement, Policy, RipsTrace, TraceStep};
pub use moves::{
    collapse, collapse_with_report, cut_component, cut_vertical, free_arcs, is_splitting_point, split,
    subdivide_band, CollapseReport, FreeArc,
};
