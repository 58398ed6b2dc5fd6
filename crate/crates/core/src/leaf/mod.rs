//! Leaves as graphs under the pseudogroup of band translations: balls and
//! finite-scale end counts, first return correspondences on a transversal,
//! and block decompositions.

mod ball;
mod blocks;
mod transversal;

pub use ball::{
    ball_svg, default_ladder, end_statistics, end_statistics_with, estimate_ends, trace_leaf, trace_leaf_capped,
    Crossing, EndClass, EndEstimate, EndSample, Histogram, LeafBall, LeafVertex, CALIBRATED_RADIUS, SAMPLE_DENOMINATOR,
};
pub use blocks::{block_decomposition, Arm, BindingArc, Block, BlockDecomposition, Strip, DEFAULT_EXTENSION_BUDGET};
pub use transversal::{first_return, realize, similar, Correspondence, Family, Member, Realized, Sign, Transversal};
