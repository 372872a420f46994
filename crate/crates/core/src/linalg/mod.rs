//! Exact integer and rational linear algebra.

mod lp;
mod matrix;
mod rank;
mod smith;

pub use lp::feasible_nonnegative;
pub use matrix::{solve_rational, IntMatrix, RatMatrix};
pub(crate) use rank::is_prime_u64;
pub use rank::{
    modular_rank, rank_integer, rank_of_vectors, rank_rational, rank_rational_with, RankStrategy,
};
pub use smith::{
    cokernel, hermite_normal_form, smith_normal_form, solve_integer, Cokernel, SmithDecomposition,
};
