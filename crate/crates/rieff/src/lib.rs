//! Wave curves, effective flux functions and Riemann solutions for 2x2
//! systems of conservation laws with Corey-type quadratic fluxes.
//!
//! The library traces Hugoniot loci by pseudo-arclength continuation,
//! integrates rarefaction curves, lifts wave groups to scalar effective
//! flux functions (EFFs), solves scalar Riemann problems on the lifted
//! flux by the convex-hull construction, assembles full two-family
//! Riemann solutions, and cross-checks them against a first-order
//! finite-volume simulation.

pub mod config;
pub mod eff;
pub mod error;
pub mod flux_model;
pub mod fvm;
pub mod hugoniot;
pub mod numerics;
pub mod output;
pub mod rarefaction;
pub mod riemann;
pub mod scalar_hull;
pub mod validate;

pub use config::Tolerances;
pub use error::{Result, RieffError};
pub use flux_model::{CharField, Family, FluxModel, State};
