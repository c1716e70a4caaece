//! Exact analysis of the penalized least-squares objective
//! `F(u) = ||A u - d||^2 + beta * ||u||_0` for underdetermined `A`.
//!
//! Every strict local minimizer of `F` is the least-squares solution on a
//! support whose columns are independent, so small problems can be analysed
//! completely: enumerate those supports, solve, compare.
//!
//! ```
//! use l0_analysis::{experiments::noisy_reference_problem, global_minimizers, Budget};
//!
//! let p = noisy_reference_problem(1e3).unwrap();
//! let g = global_minimizers(&p, 5, &Budget::default()).unwrap();
//! assert_eq!(g.minimizers[0].support.to_string(), "{3,10}");
//! ```

pub mod enumeration;
pub mod error;
pub mod experiments;
pub mod global_analysis;
pub mod linalg;
pub mod minimizers;
pub mod model;

pub use enumeration::{enumerate_strict_minimizers, EnumerationResult};
pub use error::{Error, Result};
pub use global_analysis::{
    analyze, beta_k, ensemble_stats, global_minimizers, h1_check, sigma_k_margin, GlobalReport, H1Report,
    ThresholdMode,
};
pub use linalg::Matrix;
pub use minimizers::{
    coordinatewise_check, is_local_minimizer, is_strict_minimizer, minimizer_function,
    necessary_condition_margin, solve_restricted,
};
pub use model::{objective, Budget, CertifiedMinimizer, Problem, Support, Tolerances};

#[cfg(doctest)]
#[doc = include_str!("../../../README.md")]
mod readme {}

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/restricted.md")]
    mod restricted {}
    #[doc = include_str!("../../../book/src/enumeration.md")]
    mod enumeration {}
    #[doc = include_str!("../../../book/src/global.md")]
    mod global {}
    #[doc = include_str!("../../../book/src/projectors.md")]
    mod projectors {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
}
