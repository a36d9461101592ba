//! Asymptotic iteration method for relativistic DKP bound states, at
//! arbitrary precision.
//!
//! The book in `book/` walks through each module; its snippets run as
//! doc-tests of this crate.

pub mod aim;
pub mod closed_form;
pub mod error;
pub mod golden;
pub mod models;
pub mod oracle;
pub mod perturbation;
pub mod real;
pub mod series;

pub use error::*;
pub use real::{BigReal, Precision};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/series.md")]
    mod series {}
    #[doc = include_str!("../../../book/src/iteration.md")]
    mod iteration {}
    #[doc = include_str!("../../../book/src/closed-form.md")]
    mod closed_form {}
    #[doc = include_str!("../../../book/src/models.md")]
    mod models {}
    #[doc = include_str!("../../../book/src/perturbation.md")]
    mod perturbation {}
    #[doc = include_str!("../../../book/src/oracle.md")]
    mod oracle {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
    #[doc = include_str!("../../../book/src/verification.md")]
    mod verification {}
}

#[cfg(doctest)]
#[doc = include_str!("../../../README.md")]
mod readme {}
