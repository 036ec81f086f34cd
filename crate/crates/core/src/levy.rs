//! Spectrally negative jump diffusion: Brownian motion with drift minus a
//! compound Poisson process with exponentially distributed jump sizes.
//!
//! The Laplace exponent is
//!
//! ```text
//! kappa(s) = mu s + sigma^2 s^2 / 2 + lambda (beta / (beta + s) - 1),   s > -beta
//! ```
//!
//! Multiplying `kappa(s) - q` by `beta + s` gives a cubic with three real
//! roots for every `q > 0`: `Phi(q) > 0`, `-xi_1` in `(-beta, 0)` and
//! `-xi_2 < -beta`. All scale-function coefficients are built from them.

use crate::error::{Error, Result};
use crate::real::{half, Real};

/// Drift, volatility and jump data of the log-asset process.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevyParams<T> {
    /// Linear drift per unit time.
    pub mu: T,
    /// Diffusion volatility; strictly positive (unbounded variation).
    pub sigma: T,
    /// Jump intensity.
    pub lambda: T,
    /// Rate of the exponential jump size distribution; must exceed 1.
    pub beta: T,
}

/// Risk-free rate, payout rate, tax rate and coupon rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarketParams<T> {
    pub r: T,
    pub delta: T,
    pub gamma_hat: T,
    pub rho_hat: T,
}

/// The three real roots of `kappa(s) = q`: `phi`, `-xi1` and `-xi2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KappaRoots<T> {
    pub phi: T,
    pub xi1: T,
    pub xi2: T,
}

impl<T: Real> KappaRoots<T> {
    /// Roots as points on the real line, largest first.
    pub fn as_array(&self) -> [T; 3] {
        [self.phi, -self.xi1, -self.xi2]
    }
}

fn param<T: Real>(name: &'static str, value: T, ok: bool, reason: &'static str) -> Result<()> {
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

impl<T: Real> MarketParams<T> {
    pub fn new(r: T, delta: T, gamma_hat: T, rho_hat: T) -> Result<Self> {
        let zero = T::zero();
        param("r", r, r > zero, "must be positive")?;
        param("delta", delta, delta > zero, "must be positive")?;
        param(
            "gamma_hat",
            gamma_hat,
            gamma_hat >= zero && gamma_hat <= T::one(),
            "must lie in [0, 1]",
        )?;
        param("rho_hat", rho_hat, rho_hat > zero, "must be positive")?;
        Ok(Self {
            r,
            delta,
            gamma_hat,
            rho_hat,
        })
    }

    /// Growth rate `r - delta` that `kappa(1)` must reproduce.
    pub fn martingale_rate(&self) -> T {
        self.r - self.delta
    }
}

impl<T: Real> LevyParams<T> {
    pub fn new(mu: T, sigma: T, lambda: T, beta: T) -> Result<Self> {
        let zero = T::zero();
        param("mu", mu, true, "must be finite")?;
        param("sigma", sigma, sigma > zero, "must be positive")?;
        param("lambda", lambda, lambda >= zero, "must be non-negative")?;
        param("beta", beta, beta > T::one(), "must exceed 1")?;
        Ok(Self {
            mu,
            sigma,
            lambda,
            beta,
        })
    }

    /// Picks the drift so that `kappa(1) = r - delta`.
    pub fn calibrate(market: &MarketParams<T>, sigma: T, lambda: T, beta: T) -> Result<Self> {
        param("beta", beta, beta > T::one(), "must exceed 1")?;
        let one = T::one();
        let mu = market.martingale_rate()
            - half::<T>() * sigma * sigma
            - lambda * (beta / (beta + one) - one);
        Self::new(mu, sigma, lambda, beta)
    }

    /// `kappa(s)` for `s > -beta`.
    pub fn laplace_exponent(&self, s: T) -> Result<T> {
        if !(s > -self.beta) {
            return Err(Error::Domain {
                function: "laplace_exponent",
                value: s.as_f64(),
                reason: "requires s > -beta",
            });
        }
        Ok(self.kappa(s))
    }

    /// Unchecked `kappa(s)`; meaningful away from the pole at `-beta`.
    #[inline]
    pub fn kappa(&self, s: T) -> T {
        let one = T::one();
        self.mu * s
            + half::<T>() * self.sigma * self.sigma * s * s
            + self.lambda * (self.beta / (self.beta + s) - one)
    }

    #[inline]
    pub fn kappa_prime(&self, s: T) -> T {
        let d = self.beta + s;
        self.mu + self.sigma * self.sigma * s - self.lambda * self.beta / (d * d)
    }

    #[inline]
    pub fn kappa_second(&self, s: T) -> T {
        let d = self.beta + s;
        self.sigma * self.sigma + T::lit(2.0) * self.lambda * self.beta / (d * d * d)
    }

    /// Coefficients `[a3, a2, a1, a0]` of `(beta + s)(kappa(s) - q)`.
    pub fn cubic(&self, q: T) -> [T; 4] {
        let s2 = half::<T>() * self.sigma * self.sigma;
        [
            s2,
            self.mu + s2 * self.beta,
            self.mu * self.beta - self.lambda - q,
            -q * self.beta,
        ]
    }

    /// Largest root of `kappa(s) = q`.
    pub fn phi(&self, q: T) -> Result<T> {
        Ok(self.kappa_roots(q)?.phi)
    }

    /// All three real roots of `kappa(s) = q`.
    pub fn kappa_roots(&self, q: T) -> Result<KappaRoots<T>> {
        if !(q > T::zero()) || !q.is_finite() {
            return Err(Error::Domain {
                function: "kappa_roots",
                value: q.as_f64(),
                reason: "requires q > 0",
            });
        }
        let poly = self.cubic(q);
        let zero = T::zero();

        let mut hi = T::one();
        while eval(&poly, hi) <= zero {
            hi = hi * T::lit(2.0);
            if !hi.is_finite() {
                return Err(Error::NoConvergence {
                    what: "Phi(q) bracket",
                    residual: eval(&poly, hi).as_f64(),
                });
            }
        }
        let phi = polish(&poly, zero, hi, "Phi(q)")?;

        let (xi1, xi2) = if self.lambda > zero {
            let near = polish(&poly, -self.beta, zero, "-xi_1")?;
            let mut lo = -self.beta - T::one();
            while eval(&poly, lo) >= zero {
                lo = -self.beta + (lo + self.beta) * T::lit(2.0);
                if !lo.is_finite() {
                    return Err(Error::NoConvergence {
                        what: "-xi_2 bracket",
                        residual: eval(&poly, lo).as_f64(),
                    });
                }
            }
            let far = polish(&poly, lo, -self.beta, "-xi_2")?;
            (-self.refine(q, near), -self.refine(q, far))
        } else {
            // No jumps: the factor (beta + s) divides the cubic and the
            // remaining quadratic supplies the negative root.
            let s2 = half::<T>() * self.sigma * self.sigma;
            let neg = -q / (s2 * phi);
            let (a, b) = if -neg < self.beta {
                (-neg, self.beta)
            } else {
                (self.beta, -neg)
            };
            (a, b)
        };

        let roots = KappaRoots { phi, xi1, xi2 };
        self.check_roots(q, &roots)?;
        Ok(roots)
    }

    /// Newton steps on `kappa(s) - q` itself. Next to the pole the cubic is
    /// flat while `kappa` is steep, so a root that is exact for the cubic can
    /// still leave a visible residual in `kappa`.
    fn refine(&self, q: T, root: T) -> T {
        let side = self.beta + root > T::zero();
        let mut s = root;
        let mut res = (self.kappa(s) - q).abs();
        for _ in 0..4 {
            let next = s - (self.kappa(s) - q) / self.kappa_prime(s);
            let next_res = (self.kappa(next) - q).abs();
            if !(next_res < res) || (self.beta + next > T::zero()) != side {
                break;
            }
            s = next;
            res = next_res;
        }
        s
    }

    fn check_roots(&self, q: T, roots: &KappaRoots<T>) -> Result<()> {
        let pts = roots.as_array();
        let scale = T::one() + pts.iter().fold(T::zero(), |m, p| m.max(p.abs()));
        let sep = T::lit(1e-8) * scale;
        for i in 0..3 {
            for j in (i + 1)..3 {
                if (pts[i] - pts[j]).abs() <= sep {
                    return Err(Error::DegenerateRoots {
                        q: q.as_f64(),
                        detail: format!("roots {} and {} coincide", pts[i], pts[j]),
                    });
                }
            }
        }
        if self.lambda > T::zero() {
            let tol = T::epsilon().sqrt();
            for &s in &pts {
                let res = self.kappa(s) - q;
                let slope = self.kappa_prime(s).abs().max(T::one());
                if !(res.abs() <= tol * slope * (T::one() + s.abs())) {
                    return Err(Error::DegenerateRoots {
                        q: q.as_f64(),
                        detail: format!("residual {res} at root {s}"),
                    });
                }
            }
        }
        Ok(())
    }
}

#[inline]
fn eval<T: Real>(p: &[T; 4], s: T) -> T {
    ((p[0] * s + p[1]) * s + p[2]) * s + p[3]
}

#[inline]
fn eval_prime<T: Real>(p: &[T; 4], s: T) -> T {
    (T::lit(3.0) * p[0] * s + T::lit(2.0) * p[1]) * s + p[2]
}

/// Safeguarded Newton on a sign-changing bracket of the cubic.
fn polish<T: Real>(p: &[T; 4], lo: T, hi: T, what: &'static str) -> Result<T> {
    let zero = T::zero();
    let (mut lo, mut hi) = (lo, hi);
    let f_lo = eval(p, lo);
    let f_hi = eval(p, hi);
    if f_lo == zero {
        return Ok(lo);
    }
    if f_hi == zero {
        return Ok(hi);
    }
    if (f_lo > zero) == (f_hi > zero) {
        return Err(Error::NoConvergence {
            what,
            residual: f_lo.min(f_hi).as_f64(),
        });
    }
    let rising = f_hi > zero;
    let mut s = half::<T>() * (lo + hi);
    for _ in 0..400 {
        let f = eval(p, s);
        if f == zero {
            return Ok(s);
        }
        if (f > zero) == rising {
            hi = s;
        } else {
            lo = s;
        }
        let d = eval_prime(p, s);
        let newton = s - f / d;
        let next = if d != zero && newton > lo && newton < hi {
            newton
        } else {
            half::<T>() * (lo + hi)
        };
        let tol = T::epsilon() * T::lit(4.0) * (T::one() + next.abs());
        if (next - s).abs() <= tol || (hi - lo) <= tol {
            return Ok(next);
        }
        s = next;
    }
    Err(Error::NoConvergence {
        what,
        residual: eval(p, s).as_f64(),
    })
}
