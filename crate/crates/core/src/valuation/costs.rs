//! Bankruptcy cost, tax benefit and debt profile specifications.
//!
//! Log-asset units throughout: `x = log V`.

use crate::error::{Error, Result};
use crate::levy::MarketParams;
use crate::real::Real;

/// Bankruptcy loss as a function of the log-asset level at default.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BankruptcyCost<T> {
    /// Proportional loss `eta_bar(x) = eta0 (1 ∧ e^{-a(x-b)})`: flat below the
    /// kink `b`, then decaying so that the absolute loss grows like
    /// `e^{(1-a)x}`.
    Scaled { eta0: T, a: T, b: T },
    /// Fixed absolute loss `eta` irrespective of asset value.
    Constant { eta: T },
}

/// Tax benefit profile; the full rate applies above the threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TaxProfile<T> {
    /// `f_2(x) = A (e^{x-c} ∧ 1)`: marginal benefit convex in asset value.
    Convex { c: T },
    /// `f_2(x) = A 1{x >= log_threshold}`: benefit switched on at a fixed
    /// asset value.
    Cutoff { log_threshold: T },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostTaxSpec<T> {
    pub cost: BankruptcyCost<T>,
    pub tax: TaxProfile<T>,
}

/// Face value and exponential maturity profile of the debt.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DebtSpec<T> {
    face_value: T,
    m: T,
}

impl<T: Real> BankruptcyCost<T> {
    pub fn scaled(eta0: T, a: T, b: T) -> Result<Self> {
        let (zero, one) = (T::zero(), T::one());
        check("eta0", eta0, eta0 >= zero && eta0 <= one, "must lie in [0, 1]")?;
        check("a", a, a >= zero && a <= one, "must lie in [0, 1]")?;
        check("b", b, true, "must be finite")?;
        Ok(Self::Scaled { eta0, a, b })
    }

    pub fn constant(eta: T) -> Result<Self> {
        check("eta_const", eta, eta > T::zero(), "must be positive")?;
        Ok(Self::Constant { eta })
    }

    /// Fraction of the asset value lost at default from level `x`.
    pub fn eta_bar(&self, x: T) -> T {
        match *self {
            Self::Scaled { eta0, a, b } => eta0 * T::one().min((-a * (x - b)).exp()),
            Self::Constant { eta } => eta * (-x).exp(),
        }
    }

    /// Absolute loss at default from level `x`.
    pub fn eta(&self, x: T) -> T {
        match *self {
            Self::Scaled { eta0, a, b } => eta0 * x.min((T::one() - a) * x + a * b).exp(),
            Self::Constant { eta } => eta,
        }
    }

    /// Derivative of `eta`; the right derivative at the kink.
    pub fn eta_prime(&self, x: T) -> T {
        match *self {
            Self::Scaled { eta0, a, b } => {
                if x < b {
                    eta0 * x.exp()
                } else {
                    eta0 * (T::one() - a) * ((T::one() - a) * x + a * b).exp()
                }
            }
            Self::Constant { .. } => T::zero(),
        }
    }

    /// `∫_0^∞ e^{-(1+beta) w} eta_bar(x - w) dw`, the loss profile seen
    /// through one exponential jump.
    pub(crate) fn jump_average(&self, x: T, beta: T) -> T {
        let one = T::one();
        match *self {
            Self::Scaled { eta0, a, b } => {
                let below = (x - b).max(T::zero());
                let flat = (-below * (one + beta)).exp();
                let tail = (-a * below).exp();
                let ramp = -tail * T::expm1_ratio(one + beta - a, below);
                eta0 * (flat / (one + beta) + ramp)
            }
            Self::Constant { eta } => eta * (-x).exp() / beta,
        }
    }
}

impl<T: Real> TaxProfile<T> {
    pub fn convex(c: T) -> Result<Self> {
        check("c_tax", c, true, "must be finite")?;
        Ok(Self::Convex { c })
    }

    /// Cutoff profile from a threshold on the linear asset scale.
    pub fn cutoff(threshold_value: T) -> Result<Self> {
        check("tax_cutoff", threshold_value, threshold_value > T::zero(), "must be positive")?;
        Ok(Self::Cutoff {
            log_threshold: threshold_value.ln(),
        })
    }

    /// `f_2(x) / A` where `A = P gamma_hat rho_hat`.
    pub fn shape(&self, x: T) -> T {
        match *self {
            Self::Convex { c } => (x - c).exp().min(T::one()),
            Self::Cutoff { log_threshold } => {
                if x >= log_threshold {
                    T::one()
                } else {
                    T::zero()
                }
            }
        }
    }

    /// Level above which the full benefit applies.
    pub fn saturation(&self) -> T {
        match *self {
            Self::Convex { c } => c,
            Self::Cutoff { log_threshold } => log_threshold,
        }
    }
}

impl<T: Real> CostTaxSpec<T> {
    pub fn new(cost: BankruptcyCost<T>, tax: TaxProfile<T>) -> Self {
        Self { cost, tax }
    }

    pub fn eta_bar(&self, x: T) -> T {
        self.cost.eta_bar(x)
    }

    pub fn eta(&self, x: T) -> T {
        self.cost.eta(x)
    }

    pub fn eta_prime(&self, x: T) -> T {
        self.cost.eta_prime(x)
    }

    /// Tax benefit flow `f_2(x)`.
    pub fn f2(&self, debt: &DebtSpec<T>, market: &MarketParams<T>, x: T) -> T {
        tax_scale(debt, market) * self.tax.shape(x)
    }
}

impl<T: Real> DebtSpec<T> {
    pub fn new(face_value: T, m: T) -> Result<Self> {
        check("face_value", face_value, face_value >= T::zero(), "must be non-negative")?;
        check("m", m, m > T::zero(), "must be positive")?;
        Ok(Self { face_value, m })
    }

    pub fn face_value(&self) -> T {
        self.face_value
    }

    pub fn m(&self) -> T {
        self.m
    }

    /// Issuance rate `p = m P`.
    pub fn issuance_rate(&self) -> T {
        self.m * self.face_value
    }

    pub fn with_face_value(&self, face_value: T) -> Result<Self> {
        Self::new(face_value, self.m)
    }
}

/// Coupon plus principal flow `f_1 = P rho_hat + p`.
pub fn f1<T: Real>(debt: &DebtSpec<T>, market: &MarketParams<T>) -> T {
    debt.face_value * market.rho_hat + debt.issuance_rate()
}

/// `A = P gamma_hat rho_hat`, the full-rate tax benefit flow.
pub fn tax_scale<T: Real>(debt: &DebtSpec<T>, market: &MarketParams<T>) -> T {
    debt.face_value * market.gamma_hat * market.rho_hat
}

fn check<T: Real>(name: &'static str, value: T, ok: bool, reason: &'static str) -> Result<()> {
    if ok && value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value: value.as_f64(),
            reason,
        })
    }
}
