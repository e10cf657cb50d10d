//! Optimal tontine payout design.
//!
//! Prices fair and loaded life annuities, builds flat, natural and
//! CRRA-optimal tontine payout curves under a Gompertz survival law, and
//! compares them through discounted lifetime utility, indifference loadings
//! and certainty-equivalent ratios.

pub mod binomial;
pub mod error;
pub mod mortality;
pub mod pool_outcomes;
pub mod products;
pub mod quadrature;
pub mod roots;
pub mod scenario;
pub mod validation;
pub mod welfare;

pub use binomial::PoolSpec;
pub use error::{Result, TontineError};
pub use mortality::{MortalityBasis, SurvivalModel};
pub use products::{AnnuityQuote, CurveKind, PayoutCurve};
pub use quadrature::{EconomicBasis, Horizon, Valuation};
pub use welfare::WelfareReport;
