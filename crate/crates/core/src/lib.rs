//! Numerical laboratory for the learning dynamics of deep linear networks:
//! exact mode-wise learning curves, depth scaling of training time, weight
//! initialization schemes, and random-matrix isometry analyses.
//!
//! Everything is organized around the correlation statistics of a task
//! ([`tasks::CorrelationStats`]): their SVD defines the connectivity modes
//! whose strengths evolve independently from decoupled initial conditions,
//! and every other module either simulates ([`netsim`]), solves
//! ([`analytic`]), initializes ([`init`]), or probes ([`spectra`]) that
//! mode picture.
//!
//! All operations are pure given their seeds; types are immutable after
//! construction and safe to use from concurrent workers.

pub mod analytic;
pub mod error;
pub mod init;
pub mod linalg;
pub mod netsim;
pub mod ode;
pub mod quad;
pub mod spectra;
pub mod tasks;

pub use error::{Error, Result};
pub use netsim::{LinearNetwork, ModeTrajectory, TrainConfig};
pub use tasks::{CorrelationStats, Normalization, TaskDataset, TreeTaskConfig};
