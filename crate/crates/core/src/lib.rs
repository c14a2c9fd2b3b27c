//! Forward simulation and inverse fitting of T1 relaxometry with NV centres
//! in nanodiamonds exposed to paramagnetic ions.
//!
//! The pipeline runs from bath parameters (surface spin density, solution
//! spin density) through per-NV dipolar relaxation rates to an ensemble
//! decay curve, and back from measured decays to surface densities and
//! competitive-adsorption parameters.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod adsorption;
pub mod config;
pub mod constants;
pub mod dipolar;
pub mod ensemble;
pub mod error;
pub mod fitting;
pub mod io;
pub mod model;
pub mod units;

pub use adsorption::LangmuirParams;
pub use ensemble::{AggregateSpec, DecayCurve, MeasurementRecord, MeasurementSettings, NvCount};
pub use error::{Error, Result};
pub use fitting::{BetaMode, ForwardModel, GridSpec};
pub use model::{BathState, ParticleModel, SpinSpecies};
