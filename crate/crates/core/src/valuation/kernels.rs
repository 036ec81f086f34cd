//! Boundary kernels: the functions of the barrier `B` alone that drive the
//! first-order condition for the optimal bankruptcy level.

use super::{BankruptcyCost, Discount, ModelInstance, TaxProfile};
use crate::error::{Error, Result};
use crate::real::{half, Real};

/// Below this distance from an apparent pole of the printed `Q` expression
/// the product form is used instead.
const POLE_GAP: f64 = 1e-8;

impl<T: Real> ModelInstance<T> {
    /// `G_1(B) = ∫_0^∞ e^{-Phi y} f_1(y + B) dy`; independent of `B`.
    pub fn g1(&self, discount: Discount) -> T {
        self.f1() / self.phi(discount)
    }

    /// `G_2(B) = ∫_0^∞ e^{-Phi y} f_2(y + B) dy`.
    pub fn g2(&self, discount: Discount, b: T) -> T {
        let phi = self.phi(discount);
        let scale = super::tax_scale(&self.debt, &self.market);
        let zero = T::zero();
        match self.costs.tax {
            TaxProfile::Convex { c } => {
                let k = (c - b).max(zero);
                let ramp = -(b - c).exp() * T::expm1_ratio(phi - T::one(), k);
                scale * (ramp + (-phi * k).exp() / phi)
            }
            TaxProfile::Cutoff { log_threshold } => {
                let k = (log_threshold - b).max(zero);
                scale * (-phi * k).exp() / phi
            }
        }
    }

    /// `Q(B; zeta, l) = ∫ Pi(du) ∫_0^{u ∧ l} e^{-(zeta-1) z - u} eta_bar(B - u + z) dz`.
    ///
    /// `l` may be `+∞`, in which case `zeta + beta > 0` is required. For the
    /// scaled cost profile the three-bracket expression is evaluated as
    /// written, switching to [`Self::q_kernel_product`] next to its removable
    /// poles at `zeta = 1`, `zeta = 1 - a` and `zeta = -beta`.
    pub fn q_kernel(&self, b: T, zeta: T, l: T) -> Result<T> {
        self.check_q_args(zeta, l)?;
        if l == T::zero() || self.levy.lambda == T::zero() {
            return Ok(T::zero());
        }
        let BankruptcyCost::Scaled { eta0, a, b: kink } = self.costs.cost else {
            return self.q_kernel_product(b, zeta, l);
        };
        let one = T::one();
        let gap = T::lit(POLE_GAP);
        if (zeta - one).abs() < gap
            || (zeta - one + a).abs() < gap
            || (zeta + self.levy.beta).abs() < gap
        {
            return self.q_kernel_product(b, zeta, l);
        }

        let beta = self.levy.beta;
        let lb = self.levy.lambda * beta;
        let bt = (b - kink).max(T::zero());
        let finite = l.is_finite();
        // exp(-rate * l), vanishing for l = ∞.
        let tail = |rate: T| if finite { (-rate * l).exp() } else { T::zero() };

        let e_one = (-bt * (one + beta)).exp();
        let e_zeta = (-bt * (zeta + beta) + (zeta - one) * bt).exp();
        let e_a = (-a * bt).exp();

        let first_tail = if finite {
            (-(l + bt) * (one + beta)).exp() * (one - (-(zeta - one) * l).exp()) / (one + beta)
        } else {
            T::zero()
        };
        let first = lb / (zeta - one)
            * (e_one / (one + beta) * (one - tail(one + beta))
                - e_zeta / (zeta + beta) * (one - tail(zeta + beta))
                + first_tail);

        let second_mid = if finite {
            (-(bt + l) * (zeta + beta) + bt * (zeta - one)).exp()
        } else {
            T::zero()
        };
        let second_tail = if finite {
            (-l * (beta + zeta) - bt * (beta + one - a) - a * bt).exp() / (beta + one - a)
        } else {
            T::zero()
        };
        let second = lb / (zeta - one + a)
            * ((e_a - e_one) / (beta + one - a) + (e_one - second_mid) / (zeta + beta) + second_tail);

        let third = -lb * e_a / (zeta - one + a)
            * ((one - tail(zeta + beta)) / (zeta + beta) + tail(zeta + beta) / (one - a + beta));

        Ok(eta0 * (first + second + third))
    }

    /// `Q` in product form. Substituting `w = u - z` separates the double
    /// integral into `lambda beta * ∫_0^l e^{-(zeta+beta) z} dz * ∫_0^∞
    /// e^{-(1+beta) w} eta_bar(B - w) dw`, which has no interior poles.
    pub fn q_kernel_product(&self, b: T, zeta: T, l: T) -> Result<T> {
        self.check_q_args(zeta, l)?;
        if l == T::zero() || self.levy.lambda == T::zero() {
            return Ok(T::zero());
        }
        let beta = self.levy.beta;
        let window = if l.is_finite() {
            -T::expm1_ratio(zeta + beta, l)
        } else {
            T::one() / (zeta + beta)
        };
        Ok(self.levy.lambda * beta * window * self.costs.cost.jump_average(b, beta))
    }

    fn check_q_args(&self, zeta: T, l: T) -> Result<()> {
        if !(l >= T::zero()) {
            return Err(Error::Domain {
                function: "q_kernel",
                value: l.as_f64(),
                reason: "requires l >= 0",
            });
        }
        if !l.is_finite() && !(zeta + self.levy.beta > T::zero()) {
            return Err(Error::Domain {
                function: "q_kernel",
                value: zeta.as_f64(),
                reason: "l = infinity requires zeta > -beta",
            });
        }
        Ok(())
    }

    /// `H(B) = ∫ Pi(du) ∫_0^u e^{-Phi z} [eta(B) - eta(B - u + z)] dz`.
    pub fn h_kernel(&self, discount: Discount, b: T) -> Result<T> {
        let lambda = self.levy.lambda;
        if lambda == T::zero() {
            return Ok(T::zero());
        }
        let phi = self.phi(discount);
        let q = self.q_kernel(b, phi, T::infinity())?;
        Ok(lambda * self.costs.eta(b) / (phi + self.levy.beta) - b.exp() * q)
    }

    /// `J(B) = ((r+m)/Phi(r+m) - r/Phi(r)) eta(B) - (H_r(B) - H_{r+m}(B))`.
    pub fn j_kernel(&self, b: T) -> Result<T> {
        let (rate, retire) = (Discount::Rate, Discount::RatePlusRetirement);
        let weight = self.rate(retire) / self.phi(retire) - self.rate(rate) / self.phi(rate);
        Ok(weight * self.costs.eta(b) - (self.h_kernel(rate, b)? - self.h_kernel(retire, b)?))
    }

    /// `J` through the diffusion and jump contributions separately:
    /// `sigma^2/2 (Phi(r+m) - Phi(r)) eta(B) + ∫ Pi(du) ∫_0^u (e^{-Phi(r) z}
    /// - e^{-Phi(r+m) z}) eta(B - u + z) dz`.
    pub fn j_kernel_dual(&self, b: T) -> Result<T> {
        let diffusion = self.diffusion_gap() * self.costs.eta(b);
        let jumps = b.exp() * self.q_gap(b)?;
        Ok(diffusion + jumps)
    }

    /// `j = sigma^2/2 (Phi(r+m) - Phi(r)) + ∫ Pi(du) e^{-u} [(1 - e^{-(Phi(r)-1)u})
    /// / (Phi(r)-1) - (1 - e^{-(Phi(r+m)-1)u}) / (Phi(r+m)-1)]`, integrated
    /// against the exponential Levy measure.
    pub fn small_j(&self) -> T {
        let beta = self.levy.beta;
        let one = T::one();
        let (pr, prm) = (self.phi(Discount::Rate), self.phi(Discount::RatePlusRetirement));
        let jumps = self.levy.lambda * beta / (beta + one) * (one / (beta + pr) - one / (beta + prm));
        self.diffusion_gap() + jumps
    }

    /// `(kappa(1) - q) / (1 - Phi(q))`.
    pub fn gamma_slope(&self, discount: Discount) -> Result<T> {
        self.evaluator(discount).gamma_slope()
    }

    /// `l(B)` with `K_1(B) = e^B l(B) - G_1 + G_2(B)`.
    pub fn k1_coefficient(&self, b: T) -> Result<T> {
        let slope = self.gamma_slope(Discount::RatePlusRetirement)?;
        Ok(slope - self.diffusion_gap() * self.costs.eta_bar(b) - self.q_gap(b)?)
    }

    /// First-order condition: `K_1(B) = 0` at the optimal barrier.
    pub fn k1(&self, b: T) -> Result<T> {
        let slope = self.gamma_slope(Discount::RatePlusRetirement)?;
        Ok(slope * b.exp() - self.g1(Discount::RatePlusRetirement) + self.g2(Discount::Rate, b)
            - self.j_kernel(b)?)
    }

    pub fn k2(&self, b: T) -> Result<T> {
        let sigma = self.levy.sigma;
        Ok(self.g2(Discount::Rate, b)
            + self.rate(Discount::Rate) / self.phi(Discount::Rate) * self.costs.eta(b)
            + self.h_kernel(Discount::Rate, b)?
            + half::<T>() * sigma * sigma * self.costs.eta_prime(b))
    }

    fn diffusion_gap(&self) -> T {
        let sigma = self.levy.sigma;
        half::<T>() * sigma * sigma
            * (self.phi(Discount::RatePlusRetirement) - self.phi(Discount::Rate))
    }

    fn q_gap(&self, b: T) -> Result<T> {
        let inf = T::infinity();
        Ok(self.q_kernel(b, self.phi(Discount::Rate), inf)?
            - self.q_kernel(b, self.phi(Discount::RatePlusRetirement), inf)?)
    }
}
