//! Exhaustive reference enumerators. They are exponential by design and
//! guarded by node-count caps.

mod gmp;
mod lmp;
pub mod oracle;

pub use gmp::{count_gmp, gmp_candidate_count, list_gmp, DEFAULT_GMP_CAP};
pub use lmp::{
    brute_force_acs, for_each_ancestral_superset, is_maximal_ancestral, list_ci_bf, markov_blanket,
    MarkovBlanketResult, DEFAULT_ACS_CAP, DEFAULT_BF_CAP,
};
