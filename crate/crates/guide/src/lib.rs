// mdbook cannot run snippets that depend on workspace crates, so the chapters
// are compiled here and `cargo test --doc` runs them. The test below keeps
// this list, SUMMARY.md and the files on disk in step.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/simulator.md")]
pub mod simulator {}
#[doc = include_str!("../../../book/src/ansatz.md")]
pub mod ansatz {}
#[doc = include_str!("../../../book/src/derivatives.md")]
pub mod derivatives {}
#[doc = include_str!("../../../book/src/costs.md")]
pub mod costs {}
#[doc = include_str!("../../../book/src/ipg.md")]
pub mod ipg {}
#[doc = include_str!("../../../book/src/experiments.md")]
pub mod experiments {}

#[doc = include_str!("../../../README.md")]
#[cfg(doctest)]
pub struct ReadmeDoctests;
