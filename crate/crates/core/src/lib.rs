//! Curve registration through local variation distributions.
//!
//! A curve's local variation distribution spreads unit mass over `[0, 1]` in
//! proportion to how much the curve moves there. Averaging these
//! distributions on the quantile scale gives a template, and each curve's
//! warp is its quantile function composed with the template cdf.

pub mod curve;
pub mod diagnostics;
pub mod error;
pub mod fpca;
pub mod registration;
pub mod simulate;
pub mod smoothing;
pub mod variation;
pub mod warp;

pub use curve::DiscreteCurve;
pub use error::{Error, Result};
pub use registration::{
    register_complete, register_discrete, register_noisy, DiscreteOptions, NoisyOptions, Regime,
    RegistrationResult,
};
pub use variation::{QuantileFn, StepCdf};
pub use warp::WarpMap;
