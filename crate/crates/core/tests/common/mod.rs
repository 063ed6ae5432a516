//! Oracles shared by the integration test targets.
#![allow(dead_code)]

pub mod hankel_table;
pub mod laplace;
