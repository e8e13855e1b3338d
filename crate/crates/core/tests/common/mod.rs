//! Shared fixtures for the integration and acceptance tests.
#![allow(dead_code)]

pub mod bca;
pub mod gen;
pub mod reference;
