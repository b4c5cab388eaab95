//! The guide in `book/`, compiled so every Rust snippet runs as a doc-test.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/scaling.md")]
pub mod scaling {}
#[doc = include_str!("../../../book/src/sampling.md")]
pub mod sampling {}
#[doc = include_str!("../../../book/src/exact.md")]
pub mod exact {}
#[doc = include_str!("../../../book/src/endpoint.md")]
pub mod endpoint {}
#[doc = include_str!("../../../book/src/contours.md")]
pub mod contours {}
#[doc = include_str!("../../../book/src/gfunction.md")]
pub mod gfunction {}
#[doc = include_str!("../../../book/src/asymptotics.md")]
pub mod asymptotics {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
#[doc = include_str!("../../../README.md")]
pub mod readme {}
