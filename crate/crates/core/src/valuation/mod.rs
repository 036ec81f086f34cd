//! Equity, debt and firm values under an endogenous bankruptcy barrier.
//!
//! A [`ModelInstance`] binds the process, market, debt and cost/tax inputs and
//! caches the two scale evaluators every formula needs: one discounting at
//! `r` (firm value, tax shield) and one at `r + m` (debt).

mod costs;
mod kernels;
mod values;

pub use costs::{f1, tax_scale, BankruptcyCost, CostTaxSpec, DebtSpec, TaxProfile};
pub use values::{Flow, Valuation};

use crate::error::Result;
use crate::levy::{LevyParams, MarketParams};
use crate::real::Real;
use crate::scale::ScaleEvaluator;

/// Which of the two discount rates a functional uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Discount {
    /// The risk-free rate `r`.
    Rate,
    /// `r + m`, the rate at which a unit of debt is retired and discounted.
    RatePlusRetirement,
}

#[derive(Debug, Clone)]
pub struct ModelInstance<T> {
    levy: LevyParams<T>,
    market: MarketParams<T>,
    debt: DebtSpec<T>,
    costs: CostTaxSpec<T>,
    ev_r: ScaleEvaluator<T>,
    ev_rm: ScaleEvaluator<T>,
}

impl<T: Real> ModelInstance<T> {
    pub fn new(
        levy: LevyParams<T>,
        market: MarketParams<T>,
        debt: DebtSpec<T>,
        costs: CostTaxSpec<T>,
    ) -> Result<Self> {
        let ev_r = ScaleEvaluator::new(&levy, market.r)?;
        let ev_rm = ScaleEvaluator::new(&levy, market.r + debt.m())?;
        ev_r.gamma_slope()?;
        ev_rm.gamma_slope()?;
        Ok(Self {
            levy,
            market,
            debt,
            costs,
            ev_r,
            ev_rm,
        })
    }

    /// Same process and market, different debt. The scale evaluators are
    /// reused when the maturity rate is unchanged.
    pub fn with_debt(&self, debt: DebtSpec<T>) -> Result<Self> {
        if debt.m() == self.debt.m() {
            Ok(Self {
                debt,
                ..self.clone()
            })
        } else {
            Self::new(self.levy, self.market, debt, self.costs)
        }
    }

    pub fn with_costs(&self, costs: CostTaxSpec<T>) -> Self {
        Self {
            costs,
            ..self.clone()
        }
    }

    pub fn with_face_value(&self, face_value: T) -> Result<Self> {
        self.with_debt(self.debt.with_face_value(face_value)?)
    }

    pub fn levy(&self) -> &LevyParams<T> {
        &self.levy
    }

    pub fn market(&self) -> &MarketParams<T> {
        &self.market
    }

    pub fn debt(&self) -> &DebtSpec<T> {
        &self.debt
    }

    pub fn costs(&self) -> &CostTaxSpec<T> {
        &self.costs
    }

    pub fn evaluator(&self, discount: Discount) -> &ScaleEvaluator<T> {
        match discount {
            Discount::Rate => &self.ev_r,
            Discount::RatePlusRetirement => &self.ev_rm,
        }
    }

    pub fn rate(&self, discount: Discount) -> T {
        self.evaluator(discount).q()
    }

    pub fn phi(&self, discount: Discount) -> T {
        self.evaluator(discount).phi()
    }

    pub fn f1(&self) -> T {
        f1(&self.debt, &self.market)
    }

    pub fn f2(&self, x: T) -> T {
        self.costs.f2(&self.debt, &self.market, x)
    }
}
