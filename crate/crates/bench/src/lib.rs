//! Benchmark families and experiment plumbing for `ncopt`.

#![allow(clippy::needless_range_loop)]

pub mod cli;
pub mod families;
pub mod report;
pub mod runner;
