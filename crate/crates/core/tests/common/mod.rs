//! Helpers shared by the integration tests: an exhaustive residue-search
//! oracle for local solvability and the table of membership statements.
#![allow(dead_code)]

pub mod oracle;
pub mod props;
