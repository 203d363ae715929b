//! Analysis of isolated resonance curves (IRCs) in a harmonically forced
//! single-degree-of-freedom oscillator with nonlinear damping.
//!
//! The library traces single-harmonic frequency responses exhaustively (so
//! detached branches are never overlooked), locates and classifies the
//! singularities that create and destroy IRCs, predicts onset and merging
//! from the averaged damping curve, and cross-verifies everything in the time
//! domain with shooting, Floquet stability, pseudo-arclength continuation and
//! basin-of-attraction mapping.
//!
//! Modules:
//! - [`model`]: the oscillator, damping laws and nondimensionalization
//! - [`hbcore`]: harmonic-balance manifold, amplitude solving, branch tracing
//! - [`singularity`]: closed-form singular points, classification, region chart
//! - [`energybalance`]: averaged damping and IRC event prediction
//! - [`timedomain`]: integration, shooting, continuation, basins
//! - [`verify`]: the four-column onset/merge comparison table

pub mod energybalance;
pub mod error;
pub mod export;
pub mod hbcore;
pub mod model;
pub mod numeric;
pub mod singularity;
pub mod timedomain;
pub mod verify;

pub use error::{Error, Result};
