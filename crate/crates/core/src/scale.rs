//! Closed-form q-scale functions of the exponential-jump diffusion.
//!
//! With roots `Phi > 0 > -xi_1 > -beta > -xi_2` of `kappa(s) = q`, partial
//! fractions give
//!
//! ```text
//! 1 / (kappa(s) - q) = sum_k R_k / (s - s_k),   R_k = (beta + s_k) / p'(s_k)
//! ```
//!
//! where `p` is the cubic `(beta + s)(kappa(s) - q)`. Writing `C_i = -R_i` for
//! the two negative roots,
//!
//! ```text
//! W(x) = sum_i C_i (exp(Phi x) - exp(-xi_i x)),   x >= 0
//! ```
//!
//! Everything below is evaluated through `expm1` so that small arguments keep
//! full relative precision.

use crate::error::{Error, Result};
use crate::levy::{KappaRoots, LevyParams};
use crate::real::Real;

/// Cached roots and coefficients of `W^{(q)}` for one discount rate `q`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaleEvaluator<T> {
    q: T,
    phi: T,
    xi: [T; 2],
    coeffs: [T; 2],
    kappa_prime_at_roots: [T; 3],
    kappa_at_one: T,
}

impl<T: Real> ScaleEvaluator<T> {
    pub fn new(levy: &LevyParams<T>, q: T) -> Result<Self> {
        let KappaRoots { phi, xi1, xi2 } = levy.kappa_roots(q)?;
        let poly = levy.cubic(q);
        let dp = |s: T| (T::lit(3.0) * poly[0] * s + T::lit(2.0) * poly[1]) * s + poly[2];
        let residue = |s: T| (levy.beta + s) / dp(s);
        let coeffs = [-residue(-xi1), -residue(-xi2)];
        Ok(Self {
            q,
            phi,
            xi: [xi1, xi2],
            coeffs,
            kappa_prime_at_roots: [
                levy.kappa_prime(phi),
                levy.kappa_prime(-xi1),
                levy.kappa_prime(-xi2),
            ],
            kappa_at_one: levy.kappa(T::one()),
        })
    }

    pub fn q(&self) -> T {
        self.q
    }

    pub fn phi(&self) -> T {
        self.phi
    }

    pub fn xi(&self) -> [T; 2] {
        self.xi
    }

    /// `C_{1,q}`, `C_{2,q}`.
    pub fn coeffs(&self) -> [T; 2] {
        self.coeffs
    }

    /// `kappa'` at `Phi`, `-xi_1`, `-xi_2`.
    pub fn kappa_prime_at_roots(&self) -> [T; 3] {
        self.kappa_prime_at_roots
    }

    /// Residue of `1/(kappa(s) - q)` at `Phi(q)`; also `lim e^{-Phi x} W(x)`.
    pub fn phi_residue(&self) -> T {
        self.coeffs[0] + self.coeffs[1]
    }

    /// Iterator over `(C_i, xi_i)`.
    pub fn terms(&self) -> impl Iterator<Item = (T, T)> + '_ {
        self.coeffs.iter().copied().zip(self.xi.iter().copied())
    }

    /// Largest argument accepted by callers that guard against overflow.
    pub fn max_argument(&self) -> T {
        T::lit(60.0) / self.phi
    }

    pub fn w(&self, x: T) -> T {
        if x <= T::zero() {
            return T::zero();
        }
        let grow = (self.phi * x).exp_m1();
        self.terms()
            .fold(T::zero(), |acc, (c, xi)| acc + c * (grow - (-xi * x).exp_m1()))
    }

    pub fn z(&self, x: T) -> T {
        if x <= T::zero() {
            return T::one();
        }
        let grow = (self.phi * x).exp_m1() / self.phi;
        let sum = self
            .terms()
            .fold(T::zero(), |acc, (c, xi)| acc + c * (grow + (-xi * x).exp_m1() / xi));
        T::one() + self.q * sum
    }

    pub fn w_prime(&self, x: T) -> Result<T> {
        self.positive("w_prime", x)?;
        let grow = self.phi * (self.phi * x).exp();
        Ok(self
            .terms()
            .fold(T::zero(), |acc, (c, xi)| acc + c * (grow + xi * (-xi * x).exp())))
    }

    /// `W'(0+)`, equal to `2 / sigma^2`.
    pub fn w_prime_at_zero(&self) -> T {
        self.terms()
            .fold(T::zero(), |acc, (c, xi)| acc + c * (self.phi + xi))
    }

    /// `Theta(x) = W'(x) - Phi W(x)`, written without the cancelling growth term.
    pub fn theta(&self, x: T) -> Result<T> {
        self.positive("theta", x)?;
        Ok(self.theta_unchecked(x))
    }

    pub(crate) fn theta_unchecked(&self, x: T) -> T {
        self.terms()
            .fold(T::zero(), |acc, (c, xi)| acc + c * (self.phi + xi) * (-xi * x).exp())
    }

    /// `W_Phi(x) = e^{-Phi x} W(x)`.
    pub fn scaled_w(&self, x: T) -> T {
        if x <= T::zero() {
            return T::zero();
        }
        -self
            .terms()
            .fold(T::zero(), |acc, (c, xi)| acc + c * (-(self.phi + xi) * x).exp_m1())
    }

    /// `(kappa(1) - q) / (1 - Phi(q))`, the coefficient of `W` in `Gamma`.
    pub fn gamma_slope(&self) -> Result<T> {
        let gap = T::one() - self.phi;
        if gap.abs() < T::lit(1e-10) {
            return Err(Error::Singularity {
                function: "gamma",
                gap: gap.abs().as_f64(),
            });
        }
        Ok((self.kappa_at_one - self.q) / gap)
    }

    /// `Gamma(y)`, with `e^y - Gamma(y)` the discounted value of `e^X` at
    /// first passage below zero. Continuous at `y = 0` where it vanishes.
    ///
    /// The `e^{Phi y}` terms of `W` and of `∫ e^{y-z} W(z) dz` cancel exactly,
    /// leaving `sum_i C_i (e^y - e^{-xi_i y}) (slope - (kappa(1) - q) / (1 + xi_i))`.
    pub fn gamma(&self, y: T) -> Result<T> {
        let slope = self.gamma_slope()?;
        if y <= T::zero() {
            return Ok(T::zero());
        }
        let one = T::one();
        let ey = y.exp();
        Ok(self.terms().fold(T::zero(), |acc, (c, xi)| {
            let spread = -ey * (-(one + xi) * y).exp_m1();
            acc + c * spread * (slope - (self.kappa_at_one - self.q) / (one + xi))
        }))
    }

    /// `Z(x) - q/Phi W(x) = E_x[e^{-q tau_0^-}]`, computed without the
    /// cancelling `e^{Phi x}` terms.
    pub fn passage_transform(&self, x: T) -> T {
        if x <= T::zero() {
            return T::one();
        }
        let sum = self.terms().fold(T::zero(), |acc, (c, xi)| {
            acc - c * (-xi * x).exp_m1() * (T::one() / self.phi + T::one() / xi)
        });
        T::one() - self.q * sum
    }

    fn positive(&self, function: &'static str, x: T) -> Result<()> {
        if x > T::zero() {
            Ok(())
        } else {
            Err(Error::Domain {
                function,
                value: x.as_f64(),
                reason: "requires x > 0",
            })
        }
    }
}
