//! Steady one-dimensional model of a Sabatier microchannel reactor together
//! with discrete-adjoint gradients and box-constrained quasi-Newton
//! optimization for kinetic fitting, wall-temperature control and flow-rate
//! maximization.

#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod dual;
pub mod kinetics;
pub mod linalg;
pub mod optim;
pub mod problems;
pub mod reactor;
pub mod species;
pub mod thermo;
pub mod transport;
