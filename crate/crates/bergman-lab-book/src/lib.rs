//! Doc-test harness for the guide in `book/`.
//!
//! Each module below embeds one chapter verbatim via `include_str!`, so
//! every ```` ```rust ```` fence in the book compiles and runs under
//! `cargo test -p bergman-lab-book`. The chapters render with `mdbook
//! build book/`; this crate exists purely to keep them honest.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/geometry.md")]
pub mod geometry {}

#[doc = include_str!("../../../book/src/weights-and-kernels.md")]
pub mod weights_and_kernels {}

#[doc = include_str!("../../../book/src/measures-and-quadrature.md")]
pub mod measures_and_quadrature {}

#[doc = include_str!("../../../book/src/transforms.md")]
pub mod transforms {}

#[doc = include_str!("../../../book/src/carleson.md")]
pub mod carleson {}

#[doc = include_str!("../../../book/src/composition-operators.md")]
pub mod composition_operators {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}

#[doc = include_str!("../../../book/src/determinism-and-testing.md")]
pub mod determinism_and_testing {}
