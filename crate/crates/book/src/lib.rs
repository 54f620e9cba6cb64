//! Compiles every Rust listing in the guide as a doctest.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/enriched-contractions.md")]
pub mod enriched_contractions {}
#[doc = include_str!("../../../book/src/norms.md")]
pub mod norms {}
#[doc = include_str!("../../../book/src/averaged-iteration.md")]
pub mod averaged_iteration {}
#[doc = include_str!("../../../book/src/certificates.md")]
pub mod certificates {}
#[doc = include_str!("../../../book/src/modes.md")]
pub mod modes {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
