//! Chapters of the guide in `book/src`, included here so that every Rust
//! listing in the book runs as a doc-test.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/zeros-and-coefficients.md")]
pub mod zeros_and_coefficients {}
#[doc = include_str!("../../../book/src/synthesis.md")]
pub mod synthesis {}
#[doc = include_str!("../../../book/src/closed-forms.md")]
pub mod closed_forms {}
#[doc = include_str!("../../../book/src/verification.md")]
pub mod verification {}
#[doc = include_str!("../../../book/src/variants.md")]
pub mod variants {}
#[doc = include_str!("../../../book/src/command-line.md")]
pub mod command_line {}
