//! Entropic collapse: the two-branch sample model and its threshold, block
//! structure of the constraint matrix, the weight-exchange walk and its
//! outcome statistics, the similarity-cutoff propagator and the response
//! nonlinearity.

mod blocks;
mod channel;
mod cutoff;
mod toy;
mod walk;

pub use blocks::{block_decomposition, cohesion_pair, entropy_deficit_scan, DeficitPoint, DeficitScan};
pub use channel::{log_odds_statistic, tanh_response, LogOdds};
pub use cutoff::{path_distance, similarity_cutoff_propagator, CutoffReport};
pub use toy::{collapse_threshold, counted_toy_entropies, toy_entropies, CountedToy, ToyEntropies, ToyModelSpec};
pub use walk::{
    born_statistics, simulate_collapse, simulate_collapse_with, BornReport, CollapseRun, CollapseState, WalkOptions,
};
