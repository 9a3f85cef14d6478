//! Compiles the guide in `book/` so its snippets run as doc-tests.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/reaction.md")]
pub mod reaction {}
#[doc = include_str!("../../../book/src/time_stepping.md")]
pub mod time_stepping {}
#[doc = include_str!("../../../book/src/kinetics.md")]
pub mod kinetics {}
#[doc = include_str!("../../../book/src/diagnostics.md")]
pub mod diagnostics {}
#[doc = include_str!("../../../book/src/configuration.md")]
pub mod configuration {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
#[doc = include_str!("../../../book/src/acceptance.md")]
pub mod acceptance {}
