//! Dissipative tunneling of Gaussian wave packets through an inverted
//! parabolic barrier.
//!
//! The moment equations of the damped inverted oscillator are solved in
//! closed form ([`propagator`]), numerically ([`moment_ode`]) and through
//! the Wigner-function Fokker-Planck equation ([`phase_space`]); the
//! penetrability follows from the Gaussian position density
//! ([`tunneling`]).

pub mod backend;
pub mod error;
pub mod model;
pub mod moment_ode;
pub mod phase_space;
pub mod propagator;
pub mod special;
pub mod state;
pub mod tunneling;

pub use backend::{BackendRegistry, MomentBackend};
pub use error::{Error, Result};
pub use model::{DimensionlessConfig, ModelParams, Units};
pub use propagator::{propagate, Regime};
pub use state::GaussianState;
