//! Experiment runner tying the numerical modules into reproducible named
//! experiments with machine-readable reports.

pub mod commands;
pub mod config;
pub mod experiments;
