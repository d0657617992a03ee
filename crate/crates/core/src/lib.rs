//! Swift–Hohenberg dynamics on warped cones and surfaces of revolution.
pub mod asymptotics_fit;
pub mod banded;
pub mod config;
pub mod error;
pub mod field;
pub mod geometry;
pub mod grid;
pub mod integrator;
pub mod io;
pub mod mellin_analysis;
pub mod mellin_norms;
pub mod mms;
pub mod operator;
pub mod pipeline;
pub mod spline;
pub mod stencil;
pub mod verify;
