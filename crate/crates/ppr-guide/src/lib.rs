//! The mdbook guide under `book/`, embedded chapter by chapter so that
//! every code block compiles and runs under `cargo test`. Edit the
//! markdown, not this file; the modules below only carry the docs.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/getting-started.md")]
pub mod getting_started {}

#[doc = include_str!("../../../book/src/encoding.md")]
pub mod encoding {}

#[doc = include_str!("../../../book/src/mechanisms.md")]
pub mod mechanisms {}

#[doc = include_str!("../../../book/src/privacy.md")]
pub mod privacy {}

#[doc = include_str!("../../../book/src/bounds.md")]
pub mod bounds {}

#[doc = include_str!("../../../book/src/codec.md")]
pub mod codec {}

#[doc = include_str!("../../../book/src/experiments.md")]
pub mod experiments {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
