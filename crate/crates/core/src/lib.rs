//! Interference and ranging performance of automotive radars on a road,
//! modelled with stochastic geometry.
//!
//! Interferers on each opposing lane are either a thinned Poisson process or
//! a thinned, randomly translated lattice. The crate provides the mean
//! interference, its characteristic function and Laplace transform, CDFs by
//! numerical inversion, ranging and spatial success probabilities,
//! duty-cycle optimization, and a seeded Monte-Carlo engine.
//!
//! ```
//! use radar_sg::model::Scenario;
//! use radar_sg::performance::optimal_duty_cycle;
//!
//! let s = Scenario::reference();
//! let d = s.derive(0).unwrap();
//! let opt = optimal_duty_cycle(&s.lanes[0], &d, 100.0).unwrap();
//! assert!(opt.xi_star > 0.0 && opt.xi_star <= 1.0);
//! ```

// `!(a > b)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod geometry;
pub mod interference;
pub mod model;
pub mod montecarlo;
pub mod numeric;
pub mod performance;
pub mod rng;
pub mod specfun;
pub mod stats;

pub use error::{Error, Result};
pub use model::{FadingModel, GeometryKind, Lane, MediumAccess, RadarParams, Scenario};
