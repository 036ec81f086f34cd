//! Path functionals up to the bankruptcy time and the resulting claim values.
//!
//! For a barrier `B` and starting level `x >= B`, with `l = x - B`:
//!
//! ```text
//! Lambda(x; B) = E_x[e^{-q tau} eta(X_tau)]
//! M_i(x; B)    = E_x[∫_0^tau e^{-q t} f_i(X_t) dt]
//! D = e^x - e^B Gamma^{(r+m)}(l) + M_1^{(r+m)} - Lambda^{(r+m)}
//! V = e^x + M_2^{(r)} - Lambda^{(r)}
//! E = e^B Gamma^{(r+m)}(l) + (M_2^{(r)} - Lambda^{(r)}) - (M_1^{(r+m)} - Lambda^{(r+m)})
//! ```
//!
//! `x = B` is accepted and returns the limit from above.

use super::{BankruptcyCost, Discount, ModelInstance, TaxProfile};
use crate::error::{Error, Result};
use crate::real::Real;

/// Running cash flow paid until bankruptcy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Flow {
    /// `f_1`: coupon plus principal repayment to debt holders.
    Coupon,
    /// `f_2`: tax benefit accruing to the firm.
    Tax,
}

/// Equity, debt and firm value at one `(x, B)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Valuation<T> {
    pub equity: T,
    pub debt: T,
    pub firm: T,
}

impl<T: Real> ModelInstance<T> {
    fn distance(&self, x: T, b: T) -> Result<T> {
        let l = x - b;
        if !(l >= T::zero()) {
            return Err(Error::Domain {
                function: "valuation",
                value: l.as_f64(),
                reason: "requires x >= B",
            });
        }
        let cap = self.evaluator(Discount::RatePlusRetirement).max_argument();
        if l > cap {
            return Err(Error::OutOfRange {
                distance: l.as_f64(),
                cap: cap.as_f64(),
            });
        }
        Ok(l)
    }

    /// `G_i` for either flow.
    pub fn g(&self, discount: Discount, flow: Flow, b: T) -> T {
        match flow {
            Flow::Coupon => self.g1(discount),
            Flow::Tax => self.g2(discount, b),
        }
    }

    /// `∫_B^x W(x - y) f_i(y) dy` in closed form.
    pub fn integral_w_flow(&self, discount: Discount, flow: Flow, x: T, b: T) -> Result<T> {
        let l = self.distance(x, b)?;
        let ev = self.evaluator(discount);
        let phi = ev.phi();
        let one = T::one();
        // ∫_0^d W(s) ds, the flat part of the flow at its full rate.
        let flat = |d: T| {
            let grow = (phi * d).exp_m1() / phi;
            ev.terms()
                .fold(T::zero(), |acc, (c, xi)| acc + c * (grow + (-xi * d).exp_m1() / xi))
        };
        match flow {
            Flow::Coupon => Ok(self.f1() * flat(l)),
            Flow::Tax => {
                let scale = super::tax_scale(&self.debt, &self.market);
                let k = x.min(self.costs.tax.saturation()).max(b);
                let ramp = match self.costs.tax {
                    TaxProfile::Convex { c } => {
                        let up = -(phi * x - c - (phi - one) * b).exp()
                            * T::expm1_ratio(phi - one, k - b);
                        ev.terms().fold(T::zero(), |acc, (coef, xi)| {
                            let down = (-xi * x + (xi + one) * k - c).exp()
                                - (-xi * x + (xi + one) * b - c).exp();
                            acc + coef * (up - down / (xi + one))
                        })
                    }
                    TaxProfile::Cutoff { .. } => T::zero(),
                };
                Ok(scale * (ramp + flat(x - k)))
            }
        }
    }

    /// `∫ Pi(du) ∫_0^{u ∧ l} W(l - z) dz`.
    pub fn jump_window_w(&self, discount: Discount, l: T) -> T {
        let ev = self.evaluator(discount);
        let (lambda, beta) = (self.levy.lambda, self.levy.beta);
        if lambda == T::zero() || l <= T::zero() {
            return T::zero();
        }
        let phi = ev.phi();
        let decay = (-beta * l).exp();
        let grow = ((phi * l).exp() - decay) / (phi + beta);
        lambda
            * ev.terms().fold(T::zero(), |acc, (c, xi)| {
                acc + c * (grow + decay * T::expm1_ratio(xi - beta, l))
            })
    }

    /// `∫ Pi(du) ∫_0^{u ∧ l} W(l - z) eta(B + z - u) dz` with `l = x - B`.
    pub fn jump_window_w_eta(&self, discount: Discount, x: T, b: T) -> Result<T> {
        let l = self.distance(x, b)?;
        if l == T::zero() || self.levy.lambda == T::zero() {
            return Ok(T::zero());
        }
        let ev = self.evaluator(discount);
        let phi = ev.phi();
        let up = (phi * l + b).exp() * self.q_kernel(b, phi, l)?;
        let mut sum = T::zero();
        for (c, xi) in ev.terms() {
            let down = (-xi * l + b).exp() * self.q_kernel(b, -xi, l)?;
            sum = sum + c * (up - down);
        }
        Ok(sum)
    }

    /// `Lambda(x; B)`: discounted bankruptcy loss.
    ///
    /// Equal to `eta(B) (Z - q/Phi W) - W H + eta(B) Conv1 - Conv2` with the
    /// two convolutions from [`Self::jump_window_w`] and
    /// [`Self::jump_window_w_eta`]. The `e^{Phi l}` parts of those terms
    /// collapse to `e^B (Q(B; Phi, ∞) - Q(B; Phi, l))`, so only decaying
    /// exponentials are summed here.
    pub fn cost_at_default(&self, discount: Discount, x: T, b: T) -> Result<T> {
        let l = self.distance(x, b)?;
        let ev = self.evaluator(discount);
        let eta_b = self.costs.eta(b);
        let base = eta_b * ev.passage_transform(l);
        if let BankruptcyCost::Constant { .. } = self.costs.cost {
            return Ok(base);
        }
        let (lambda, beta, phi) = (self.levy.lambda, self.levy.beta, ev.phi());
        if lambda == T::zero() || l == T::zero() {
            return Ok(base);
        }
        let h = self.h_kernel(discount, b)?;
        let jump_avg = self.costs.cost.jump_average(b, beta);
        let decay_beta = (-beta * l).exp();
        let beyond = lambda * beta * (b - beta * l).exp() / (phi + beta) * jump_avg;
        let mut sum = T::zero();
        for (c, xi) in ev.terms() {
            let decay_xi = (-xi * l).exp();
            let window = lambda * decay_beta * (T::expm1_ratio(xi - beta, l) - T::one() / (phi + beta));
            let q_xi = (b - xi * l).exp() * self.q_kernel(b, -xi, l)?;
            sum = sum + c * (decay_xi * h + eta_b * window + q_xi + beyond);
        }
        Ok(base + sum)
    }

    /// `M_i(x; B)`: discounted running flow until bankruptcy.
    ///
    /// `W(l) G_i(B) - ∫_B^x W(x - y) f_i(y) dy`, rearranged as
    /// `sum_i C_i [G(x) - e^{-xi l} G(B) + ∫_B^x e^{-xi (x-y)} f(y) dy]`.
    pub fn flow_until_default(&self, discount: Discount, flow: Flow, x: T, b: T) -> Result<T> {
        let l = self.distance(x, b)?;
        if l == T::zero() {
            return Ok(T::zero());
        }
        let ev = self.evaluator(discount);
        let (g_x, g_b) = (self.g(discount, flow, x), self.g(discount, flow, b));
        Ok(ev.terms().fold(T::zero(), |acc, (c, xi)| {
            acc + c * (g_x - (-xi * l).exp() * g_b + self.decay_integral(flow, xi, x, b))
        }))
    }

    /// `∫_B^x e^{-xi (x - y)} f_i(y) dy`.
    fn decay_integral(&self, flow: Flow, xi: T, x: T, b: T) -> T {
        let one = T::one();
        // ∫ over the last `d` before x at unit flow rate.
        let flat = |d: T| -(-xi * d).exp_m1() / xi;
        match flow {
            Flow::Coupon => self.f1() * flat(x - b),
            Flow::Tax => {
                let scale = super::tax_scale(&self.debt, &self.market);
                let k = x.min(self.costs.tax.saturation()).max(b);
                let ramp = match self.costs.tax {
                    TaxProfile::Convex { c } => {
                        -(-xi * (x - k) + k - c).exp() * ((-(xi + one) * (k - b)).exp_m1()) / (xi + one)
                    }
                    TaxProfile::Cutoff { .. } => T::zero(),
                };
                scale * (ramp + flat(x - k))
            }
        }
    }

    /// `E_x[e^{-(r+m) tau + X_tau}] = e^x - e^B Gamma^{(r+m)}(x - B)`.
    pub fn recovery_at_default(&self, x: T, b: T) -> Result<T> {
        Ok(x.exp() - self.gamma_part(x, b)?)
    }

    fn gamma_part(&self, x: T, b: T) -> Result<T> {
        let l = self.distance(x, b)?;
        Ok(b.exp() * self.evaluator(Discount::RatePlusRetirement).gamma(l)?)
    }

    pub fn debt_value(&self, x: T, b: T) -> Result<T> {
        let rm = Discount::RatePlusRetirement;
        Ok(x.exp() - self.gamma_part(x, b)? + self.flow_until_default(rm, Flow::Coupon, x, b)?
            - self.cost_at_default(rm, x, b)?)
    }

    pub fn firm_value(&self, x: T, b: T) -> Result<T> {
        let r = Discount::Rate;
        Ok(x.exp() + self.flow_until_default(r, Flow::Tax, x, b)? - self.cost_at_default(r, x, b)?)
    }

    pub fn equity_value(&self, x: T, b: T) -> Result<T> {
        let (r, rm) = (Discount::Rate, Discount::RatePlusRetirement);
        let shield = self.flow_until_default(r, Flow::Tax, x, b)? - self.cost_at_default(r, x, b)?;
        let claim =
            self.flow_until_default(rm, Flow::Coupon, x, b)? - self.cost_at_default(rm, x, b)?;
        Ok(self.gamma_part(x, b)? + shield - claim)
    }

    /// All three values, sharing the intermediate functionals.
    pub fn valuation(&self, x: T, b: T) -> Result<Valuation<T>> {
        let (r, rm) = (Discount::Rate, Discount::RatePlusRetirement);
        let gamma = self.gamma_part(x, b)?;
        let shield = self.flow_until_default(r, Flow::Tax, x, b)? - self.cost_at_default(r, x, b)?;
        let claim =
            self.flow_until_default(rm, Flow::Coupon, x, b)? - self.cost_at_default(rm, x, b)?;
        let ex = x.exp();
        Ok(Valuation {
            equity: gamma + shield - claim,
            debt: ex - gamma + claim,
            firm: ex + shield,
        })
    }

    /// `∂E/∂B = -[Theta_{r+m}(l) K_1(B) + (Theta_r(l) - Theta_{r+m}(l)) K_2(B)]`.
    pub fn equity_db(&self, x: T, b: T) -> Result<T> {
        let l = self.distance(x, b)?;
        let theta_r = self.evaluator(Discount::Rate).theta(l)?;
        let theta_rm = self.evaluator(Discount::RatePlusRetirement).theta(l)?;
        Ok(-(theta_rm * self.k1(b)? + (theta_r - theta_rm) * self.k2(b)?))
    }
}

#[cfg(test)]
mod tests {
    use super::super::{BankruptcyCost, CostTaxSpec, DebtSpec, TaxProfile};
    use super::*;
    use crate::levy::{LevyParams, MarketParams};
    use proptest::prelude::*;

    fn case1() -> ModelInstance<f64> {
        let market = MarketParams::new(0.075, 0.07, 0.35, 0.08162).unwrap();
        let levy = LevyParams::calibrate(&market, 0.2, 0.5, 9.0).unwrap();
        let debt = DebtSpec::new(50.0, 0.2).unwrap();
        let costs = CostTaxSpec::new(
            BankruptcyCost::scaled(0.9, 0.5, 0.0).unwrap(),
            TaxProfile::convex(5.0).unwrap(),
        );
        ModelInstance::new(levy, market, debt, costs).unwrap()
    }

    #[test]
    fn values_at_the_barrier() {
        let inst = case1();
        for b in [-1.0, 2.0, 3.61, 5.5] {
            for d in [Discount::Rate, Discount::RatePlusRetirement] {
                assert!((inst.cost_at_default(d, b, b).unwrap() - inst.costs().eta(b)).abs() < 1e-12);
                assert_eq!(inst.flow_until_default(d, Flow::Coupon, b, b).unwrap(), 0.0);
                assert_eq!(inst.flow_until_default(d, Flow::Tax, b, b).unwrap(), 0.0);
            }
            assert!(inst.equity_value(b, b).unwrap().abs() < 1e-9);
        }
    }

    #[test]
    fn rejects_points_below_barrier() {
        let inst = case1();
        assert!(matches!(inst.equity_value(1.0, 2.0), Err(Error::Domain { .. })));
        assert!(matches!(inst.equity_value(30.0, 2.0), Err(Error::OutOfRange { .. })));
        assert!(inst.equity_db(2.0, 2.0).is_err());
    }

    #[test]
    fn zero_flows_vanish() {
        let inst = case1().with_face_value(0.0).unwrap();
        let x = 100f64.ln();
        assert_eq!(inst.flow_until_default(Discount::Rate, Flow::Tax, x, 3.0).unwrap(), 0.0);
        assert_eq!(
            inst.flow_until_default(Discount::RatePlusRetirement, Flow::Coupon, x, 3.0).unwrap(),
            0.0
        );
    }

    #[test]
    fn far_from_the_barrier_debt_is_riskless() {
        let inst = case1();
        let riskless = inst.f1() / inst.rate(Discount::RatePlusRetirement);
        let b = 3.6;
        let l = 0.99 * inst.evaluator(Discount::RatePlusRetirement).max_argument();
        let d = inst.debt_value(b + l, b).unwrap();
        assert!((d - riskless).abs() < 1e-6 * riskless, "{d} vs {riskless}");
        let v = inst.firm_value(b + l, b).unwrap();
        assert!(v > (b + l).exp());
    }

    /// The forms with the cancelling growth terms, from the public pieces.
    /// Each value comes with the largest magnitude among its summands, which
    /// bounds the round-off of the expanded form.
    fn expanded(inst: &ModelInstance<f64>, d: Discount, x: f64, b: f64) -> [(f64, f64); 3] {
        let ev = inst.evaluator(d);
        let l = x - b;
        let w = ev.w(l);
        let eta_b = inst.costs().eta(b);
        let lambda = [
            eta_b * ev.z(l),
            -eta_b * ev.q() / ev.phi() * w,
            -w * inst.h_kernel(d, b).unwrap(),
            eta_b * inst.jump_window_w(d, l),
            -inst.jump_window_w_eta(d, x, b).unwrap(),
        ];
        let flow = |f| [w * inst.g(d, f, b), -inst.integral_w_flow(d, f, x, b).unwrap()];
        let pack = |parts: &[f64]| {
            (parts.iter().sum(), parts.iter().fold(0.0f64, |a, p| a.max(p.abs())))
        };
        [pack(&lambda), pack(&flow(Flow::Coupon)), pack(&flow(Flow::Tax))]
    }

    proptest! {
        #[test]
        fn stable_forms_match_expanded(b in -1.0f64..6.0, l in 0.0f64..4.0, rate in any::<bool>()) {
            let d = if rate { Discount::Rate } else { Discount::RatePlusRetirement };
            let x = b + l;
            for inst in [case1(), case1().with_costs(CostTaxSpec::new(
                BankruptcyCost::scaled(0.5, 0.01, 5.0).unwrap(),
                TaxProfile::cutoff(60.0).unwrap(),
            ))] {
                let stable = [
                    inst.cost_at_default(d, x, b).unwrap(),
                    inst.flow_until_default(d, Flow::Coupon, x, b).unwrap(),
                    inst.flow_until_default(d, Flow::Tax, x, b).unwrap(),
                ];
                for (s, (e, size)) in stable.into_iter().zip(expanded(&inst, d, x, b)) {
                    prop_assert!((s - e).abs() <= 1e-13 * size.max(1.0), "{s} vs {e}");
                }
            }
        }

        #[test]
        fn equity_plus_debt_is_firm(b in 0.0f64..5.0, l in 0.0f64..4.0) {
            let inst = case1();
            let x = b + l;
            let e = inst.equity_value(x, b).unwrap();
            let d = inst.debt_value(x, b).unwrap();
            let v = inst.firm_value(x, b).unwrap();
            prop_assert!((e + d - v).abs() <= 1e-10 * v.abs());
            let all = inst.valuation(x, b).unwrap();
            prop_assert!((all.equity - e).abs() <= 1e-10 * v.abs());
        }
    }
}
