//! The chapters of `book/`, included here so that `cargo test` runs their
//! code blocks.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/graphs.md")]
pub mod graphs {}

#[doc = include_str!("../../../book/src/clocks.md")]
pub mod clocks {}

#[doc = include_str!("../../../book/src/interchange.md")]
pub mod interchange {}

#[doc = include_str!("../../../book/src/walks.md")]
pub mod walks {}

#[doc = include_str!("../../../book/src/diagnostics.md")]
pub mod diagnostics {}

#[doc = include_str!("../../../book/src/estimators.md")]
pub mod estimators {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
