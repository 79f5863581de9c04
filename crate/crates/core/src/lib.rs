#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod commands;
pub mod config;
pub mod control;
pub mod dos;
pub mod error;
pub mod matrix;
pub mod plant;
pub mod repro;
pub mod rng;
pub mod sim;
