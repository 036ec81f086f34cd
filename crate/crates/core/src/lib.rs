//! Optimal capital structure with endogenous bankruptcy for a firm whose
//! log-asset value follows a spectrally negative jump diffusion.
//!
//! Bankruptcy costs and tax benefits may depend on the asset level: losses
//! grow less than proportionally with firm size and the tax shield phases in
//! with asset value. The crate provides
//!
//! * closed-form scale functions for Brownian motion with exponential
//!   downward jumps ([`scale`]),
//! * equity, debt and firm values for any bankruptcy barrier ([`valuation`]),
//! * the optimal barrier, its sufficient-condition report and the two-stage
//!   choice of face value ([`solver`]),
//! * an independent Monte Carlo estimator of the same expectations ([`mc`]).
//!
//! The analytic layers are generic over [`Real`] (`f32` or `f64`); the aliases
//! at the crate root fix `f64`.

pub mod error;
pub mod levy;
pub mod mc;
pub mod real;
pub mod scale;
pub mod solver;
pub mod valuation;

pub use error::{Error, Result};
pub use levy::{KappaRoots, LevyParams, MarketParams};
pub use real::Real;
pub use scale::ScaleEvaluator;
pub use valuation::{
    BankruptcyCost, CostTaxSpec, DebtSpec, Discount, Flow, ModelInstance, TaxProfile, Valuation,
};

pub type Levy = LevyParams<f64>;
pub type Market = MarketParams<f64>;
pub type Debt = DebtSpec<f64>;
pub type Costs = CostTaxSpec<f64>;
pub type Scale = ScaleEvaluator<f64>;
pub type Model = ModelInstance<f64>;
