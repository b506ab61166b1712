//! Google matrix analysis of the multiproduct world trade network.
//!
//! The pipeline runs from bilateral trade records to money matrices
//! ([`trade_data`]), to the direct and inverted Google matrices
//! ([`google`]), to PageRank/CheiRank vectors and rank tables ([`ranks`]),
//! to trade balances and their price sensitivities ([`sensitivity`]), and to
//! reduced Google matrices of selected countries ([`regomax`]).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod google;
pub mod ranks;
pub mod regomax;
pub mod sensitivity;
pub mod sparse;
pub mod synth;
pub mod trade_data;

pub use error::{Error, Result};
pub use google::{build_google, personalization_vector, Direction, GoogleMatrix};
pub use ranks::{assign_ranks, pagerank, rank_table, RankVector};
pub use regomax::{reduce, strongest_links, ReducedGoogleMatrix};
pub use sensitivity::{
    balance, balance_sensitivity, labor_cost_matrix, perturb_money, Description, Perturbation,
    SolverConfig,
};
pub use trade_data::{
    ingest_csv, merge_country_group, volume_probabilities, MoneyMatrixSet, VolumeProbabilities,
};

pub use nalgebra::DMatrix;
