//! Device-to-system simulator for stochastic spiking neural networks built
//! from spin-Hall-effect magnetic tunnel junctions (SHE-MTJs).
//!
//! The crate covers the full stack:
//!
//! - [`llgs`] — stochastic Landau-Lifshitz-Gilbert-Slonczewski macrospin
//!   integration (Heun scheme, thermal field, spin-orbit torque).
//! - [`demag`] — demagnetization factors of rectangular prisms.
//! - [`device`] — device geometry and material parameters.
//! - [`characterize`] — Monte Carlo switching-probability curves, logistic
//!   fits, barrier calibration, retention and dwell-time statistics.
//! - [`readout`] — behavioral model of the MTJ read path (divider plus
//!   inverter chain) for clocked and continuous operation.
//! - [`crossbar`] — mapping of signed synaptic weights onto conductance
//!   pairs and the column-current computation.
//! - [`network`] / [`dataset`] — layered network descriptions, weight-file
//!   ingestion, IDX image parsing and a procedural digit set.
//! - [`snn`] — stochastic spiking inference in synchronous or asynchronous
//!   mode, at device or behavioral fidelity.
//! - [`energy`] — per-classification energy accounting.
//! - [`sweeps`] — Monte Carlo robustness sweeps over device and circuit
//!   variations.
//! - [`cli`] / [`config`] — the command-line front end and its run
//!   configuration format.
//!
//! Everything downstream of a seed is deterministic: trajectories, network
//! runs and sweep results are pure functions of `(seed, configuration)`
//! regardless of worker count.

pub mod characterize;
pub mod cli;
pub mod config;
pub mod constants;
pub mod crossbar;
pub mod dataset;
pub mod demag;
pub mod device;
pub mod energy;
pub mod error;
pub mod export;
pub mod fit;
pub mod llgs;
pub mod network;
pub mod readout;
pub mod rng;
pub mod snn;
pub mod sweeps;
pub mod vec3;

pub use device::DeviceParams;
pub use error::{Error, Result};
pub use llgs::{SimConfig, Trajectory};
pub use vec3::Vec3;
