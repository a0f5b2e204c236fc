//! Demand-response engine for residential natural-gas heating.
//!
//! The crate simulates thermostat-driven house thermodynamics, builds and
//! solves the decentralized (per-house look-ahead) and centralized
//! (aggregator, peak-shaving) optimal-control problems as mixed-integer
//! linear programs, and chains them over a receding horizon.
//!
//! Everything inside the engine is SI: kelvin, seconds, kilograms, metres.
//! Fahrenheit and minutes only appear at the file boundary in [`report`].

pub mod baseline;
pub mod error;
pub mod grid;
pub mod milp;
pub mod ocp;
pub mod report;
pub mod rh;
pub mod thermal;

pub use error::{Error, Result};
pub use grid::{ControlSchedule, Grid};
