//! One-step-ahead stream turbidity forecasting from surrogate covariates.
//!
//! Three forecaster families — dynamic regression with ARIMA errors, a
//! generalized additive model with spline smooths and turbidity lags, and a
//! small LSTM — are evaluated by rolling-origin cross-validation, and a
//! random-forest meta-model trained on turbidity window features routes each
//! day's forecast to the sub-model expected to have the lowest absolute
//! error.

pub mod arima;
pub mod dataset;
pub mod error;
pub mod forecast;
pub mod forest;
pub mod gam;
pub mod harness;
pub mod lstm;
pub mod metamodel;
pub mod stats;
pub mod synthetic;
pub mod tsfeat;

pub use error::{Error, Result};
pub use forecast::{ForecastPoint, ModelTag};
