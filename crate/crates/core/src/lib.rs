//! Physical-layer security of IRS-assisted two-way communications.
//!
//! Two full-duplex users exchange messages through a passive reflecting
//! surface while a passive eavesdropper overhears both signals. The crate
//! provides
//!
//! * a link-level Monte Carlo engine for the proposed scheme and three
//!   baselines ([`montecarlo`], [`schemes`], [`channels`]),
//! * closed-form evaluators for the average-secrecy-rate lower bound and its
//!   scaling references ([`analytic`], [`specfun`]),
//! * a command-line front end with sweeps, figure presets and a validation
//!   suite ([`cli`], [`validation`]).
//!
//! All rates are computed in nats internally; conversion to bits happens only
//! when results are written out.

pub mod analytic;
pub mod channels;
pub mod cli;
pub mod error;
pub mod exec;
pub mod model;
pub mod montecarlo;
pub mod schemes;
pub mod specfun;
pub mod validation;

pub use error::{Error, Result};
