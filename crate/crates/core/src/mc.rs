//! Monte Carlo estimates of the first-passage functionals behind the closed
//! forms, used as an independent check.
//!
//! Simulation scheme:
//!
//! * Jump times are exact exponential arrivals; jump sizes are exponential.
//! * Between jumps the Brownian part is advanced on a grid. With the bridge
//!   correction on, the step adapts to the distance from the barrier, from
//!   `dt` next to it up to `max_step` far away, and the path carries a
//!   survival weight: on each step the probability that the Brownian bridge
//!   touched the barrier, `exp(-2 (X - B)(X' - B) / (sigma^2 h))`, is booked
//!   as a default at the step midpoint at level `B`, and the remaining
//!   weight continues.
//! * A grid point at or below the barrier is a creeping default at the
//!   linearly interpolated time, at level `B`. A jump to or below the barrier
//!   defaults at the post-jump level.
//! * Running flows are integrated with the survival-weighted trapezoid rule.
//!
//! Each path draws from its own ChaCha stream (`seed`, stream = path index)
//! and paths are reduced in fixed-size chunks merged in index order, so
//! results are bit-identical for any thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::levy::{LevyParams, MarketParams};
use crate::valuation::{Discount, ModelInstance};

const CHUNK: usize = 256;
const MIN_WEIGHT: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McConfig {
    pub n_paths: usize,
    /// Smallest diffusion step, used next to the barrier (and everywhere when
    /// the bridge correction is off).
    pub dt: f64,
    /// Truncation time.
    pub horizon: f64,
    pub seed: u64,
    pub bridge_correction: bool,
    /// Largest diffusion step far from the barrier.
    pub max_step: f64,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            n_paths: 200_000,
            dt: 1e-3,
            horizon: 200.0,
            seed: 0,
            bridge_correction: true,
            max_step: 0.05,
        }
    }
}

impl McConfig {
    /// Checks the step sizes and that discounting at `rate` over the horizon
    /// leaves less than `1e-6`.
    pub fn validate(&self, rate: f64) -> Result<()> {
        let bad = |name, value, reason| Err(Error::InvalidParameter { name, value, reason });
        if self.n_paths == 0 {
            return bad("n_paths", 0.0, "must be at least 1");
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return bad("dt", self.dt, "must be positive");
        }
        if !(self.max_step >= self.dt) || !self.max_step.is_finite() {
            return bad("max_step", self.max_step, "must be at least dt");
        }
        if !((-rate * self.horizon).exp() < 1e-6) {
            return bad("horizon", self.horizon, "exp(-r horizon) must be below 1e-6");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n_paths: usize,
}

impl McEstimate {
    /// `|value - mean|` in standard errors; infinite if the estimate has no
    /// spread and the value differs.
    pub fn z_score(&self, value: f64) -> f64 {
        let gap = (value - self.mean).abs();
        if gap == 0.0 {
            0.0
        } else {
            gap / self.std_error
        }
    }
}

/// Estimates of every functional entering the claim values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McFunctionals {
    /// `E[e^{-r tau} eta(X_tau)]`
    pub lambda_r: McEstimate,
    /// `E[e^{-(r+m) tau} eta(X_tau)]`
    pub lambda_rm: McEstimate,
    /// `E[∫_0^tau e^{-(r+m) t} f_1 dt]`
    pub m1_rm: McEstimate,
    /// `E[∫_0^tau e^{-r t} f_2(X_t) dt]`
    pub m2_r: McEstimate,
    /// `E[e^{-(r+m) tau + X_tau}]`
    pub gamma_term: McEstimate,
    pub equity: McEstimate,
    pub debt: McEstimate,
    pub firm: McEstimate,
}

impl McFunctionals {
    /// `(name, estimate)` pairs in a fixed order.
    pub fn named(&self) -> [(&'static str, McEstimate); 8] {
        [
            ("Lambda_r", self.lambda_r),
            ("Lambda_rm", self.lambda_rm),
            ("M1_rm", self.m1_rm),
            ("M2_r", self.m2_r),
            ("Gamma_term", self.gamma_term),
            ("Equity", self.equity),
            ("Debt", self.debt),
            ("Firm", self.firm),
        ]
    }
}

const LAMBDA_R: usize = 0;
const LAMBDA_RM: usize = 1;
const M1_RM: usize = 2;
const M2_R: usize = 3;
const GAMMA: usize = 4;
const EQUITY: usize = 5;
const DEBT: usize = 6;
const FIRM: usize = 7;
const N_OUT: usize = 8;

/// Running mean and sum of squared deviations.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: f64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, v: f64) {
        self.n += 1.0;
        let d = v - self.mean;
        self.mean += d / self.n;
        self.m2 += d * (v - self.mean);
    }

    fn merge(&mut self, o: &Moments) {
        if o.n == 0.0 {
            return;
        }
        let n = self.n + o.n;
        let d = o.mean - self.mean;
        self.mean += d * o.n / n;
        self.m2 += o.m2 + d * d * self.n * o.n / n;
        self.n = n;
    }

    fn estimate(&self) -> McEstimate {
        let var = if self.n > 1.0 { self.m2 / (self.n - 1.0) } else { 0.0 };
        McEstimate {
            mean: self.mean,
            std_error: (var / self.n).sqrt(),
            n_paths: self.n as usize,
        }
    }
}

struct PathModel<'a> {
    inst: &'a ModelInstance<f64>,
    mu: f64,
    sigma: f64,
    lambda: f64,
    beta: f64,
    r: f64,
    rm: f64,
    f1: f64,
    x0: f64,
    barrier: f64,
    cfg: McConfig,
}

impl PathModel<'_> {
    fn eta(&self, x: f64) -> f64 {
        self.inst.costs().eta(x)
    }

    fn f2(&self, x: f64) -> f64 {
        self.inst.f2(x)
    }

    fn book_default(&self, acc: &mut [f64; 5], mass: f64, tau: f64, level: f64) {
        let eta = self.eta(level);
        let disc_r = (-self.r * tau).exp();
        let disc_rm = (-self.rm * tau).exp();
        acc[LAMBDA_R] += mass * disc_r * eta;
        acc[LAMBDA_RM] += mass * disc_rm * eta;
        acc[GAMMA] += mass * disc_rm * level.exp();
    }

    fn step_size(&self, x: f64) -> f64 {
        if self.cfg.bridge_correction {
            let d = (x - self.barrier) / (5.0 * self.sigma);
            (d * d).clamp(self.cfg.dt, self.cfg.max_step)
        } else {
            self.cfg.dt
        }
    }

    fn next_arrival(&self, rng: &mut ChaCha8Rng, t: f64) -> f64 {
        if self.lambda > 0.0 {
            let e: f64 = rng.sample(Exp1);
            t + e / self.lambda
        } else {
            f64::INFINITY
        }
    }

    fn run(&self, rng: &mut ChaCha8Rng) -> [f64; 5] {
        let mut acc = [0.0; 5];
        let (b, sigma, mu) = (self.barrier, self.sigma, self.mu);
        let horizon = self.cfg.horizon;
        let mut t = 0.0;
        let mut x = self.x0;
        let mut w = 1.0;
        let mut f2_x = self.f2(x);
        let mut next_jump = self.next_arrival(rng, t);

        while t < horizon && w >= MIN_WEIGHT {
            let mut h = self.step_size(x).min(horizon - t);
            let jump_now = next_jump - t <= h;
            if jump_now {
                h = next_jump - t;
            }
            let z: f64 = rng.sample(StandardNormal);
            let x_new = x + mu * h + sigma * h.sqrt() * z;
            let t_new = if jump_now { next_jump } else { t + h };
            let (disc_r, disc_rm) = ((-self.r * t).exp(), (-self.rm * t).exp());

            if x_new <= b {
                let tau = t + h * (x - b) / (x - x_new);
                let span = 0.5 * (tau - t) * w;
                acc[M1_RM] += span * self.f1 * (disc_rm + (-self.rm * tau).exp());
                acc[M2_R] += span * (disc_r * f2_x + (-self.r * tau).exp() * self.f2(b));
                self.book_default(&mut acc, w, tau, b);
                return acc;
            }

            let w_new = if self.cfg.bridge_correction && h > 0.0 {
                let touch = (-2.0 * (x - b) * (x_new - b) / (sigma * sigma * h)).exp();
                let killed = w * touch;
                if killed > 0.0 {
                    self.book_default(&mut acc, killed, t + 0.5 * h, b);
                }
                w - killed
            } else {
                w
            };

            let f2_new = self.f2(x_new);
            let (disc_r_new, disc_rm_new) = ((-self.r * t_new).exp(), (-self.rm * t_new).exp());
            acc[M1_RM] += 0.5 * h * self.f1 * (w * disc_rm + w_new * disc_rm_new);
            acc[M2_R] += 0.5 * h * (w * disc_r * f2_x + w_new * disc_r_new * f2_new);

            t = t_new;
            x = x_new;
            w = w_new;
            f2_x = f2_new;

            if jump_now {
                let size: f64 = rng.sample(Exp1);
                x -= size / self.beta;
                if x <= b {
                    self.book_default(&mut acc, w, t, x);
                    return acc;
                }
                f2_x = self.f2(x);
                next_jump = self.next_arrival(rng, t);
            }
        }
        acc
    }
}

fn path_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// Reduces `n` per-path samples in fixed chunks merged in index order.
fn reduce<const K: usize, F>(n: usize, sample: F) -> [McEstimate; K]
where
    F: Fn(usize) -> [f64; K] + Sync,
{
    let chunks: Vec<[Moments; K]> = (0..n.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut m = [Moments::default(); K];
            for i in (c * CHUNK)..((c + 1) * CHUNK).min(n) {
                let s = sample(i);
                for (mk, v) in m.iter_mut().zip(s) {
                    mk.push(v);
                }
            }
            m
        })
        .collect();
    let mut total = [Moments::default(); K];
    for chunk in &chunks {
        for (t, c) in total.iter_mut().zip(chunk) {
            t.merge(c);
        }
    }
    total.map(|m| m.estimate())
}

/// Simulates the first-passage functionals from `x` with barrier `b`.
pub fn simulate_functionals(
    inst: &ModelInstance<f64>,
    x: f64,
    b: f64,
    cfg: &McConfig,
) -> Result<McFunctionals> {
    cfg.validate(inst.rate(Discount::Rate))?;
    if !(x > b) {
        return Err(Error::Domain {
            function: "simulate_functionals",
            value: x - b,
            reason: "requires x > B",
        });
    }
    let levy = inst.levy();
    let model = PathModel {
        inst,
        mu: levy.mu,
        sigma: levy.sigma,
        lambda: levy.lambda,
        beta: levy.beta,
        r: inst.rate(Discount::Rate),
        rm: inst.rate(Discount::RatePlusRetirement),
        f1: inst.f1(),
        x0: x,
        barrier: b,
        cfg: *cfg,
    };
    let ex = x.exp();
    let est = reduce::<N_OUT, _>(cfg.n_paths, |i| {
        let mut rng = path_rng(cfg.seed, i);
        let a = model.run(&mut rng);
        let firm = ex + a[M2_R] - a[LAMBDA_R];
        let debt = a[M1_RM] + a[GAMMA] - a[LAMBDA_RM];
        [
            a[LAMBDA_R],
            a[LAMBDA_RM],
            a[M1_RM],
            a[M2_R],
            a[GAMMA],
            firm - debt,
            debt,
            firm,
        ]
    });
    Ok(McFunctionals {
        lambda_r: est[LAMBDA_R],
        lambda_rm: est[LAMBDA_RM],
        m1_rm: est[M1_RM],
        m2_r: est[M2_R],
        gamma_term: est[GAMMA],
        equity: est[EQUITY],
        debt: est[DEBT],
        firm: est[FIRM],
    })
}

/// Exact simulation of `e^{-(r - delta) T} e^{X_T}` without a barrier; its
/// mean is `e^x` when the drift is calibrated.
pub fn martingale_check(
    levy: &LevyParams<f64>,
    market: &MarketParams<f64>,
    x: f64,
    maturity: f64,
    n_paths: usize,
    seed: u64,
) -> McEstimate {
    let growth = market.martingale_rate();
    let [est] = reduce::<1, _>(n_paths, |i| {
        let mut rng = path_rng(seed, i);
        let z: f64 = rng.sample(StandardNormal);
        let mut level = x + levy.mu * maturity + levy.sigma * maturity.sqrt() * z;
        if levy.lambda > 0.0 {
            let mut t: f64 = rng.sample::<f64, _>(Exp1) / levy.lambda;
            while t <= maturity {
                level -= rng.sample::<f64, _>(Exp1) / levy.beta;
                t += rng.sample::<f64, _>(Exp1) / levy.lambda;
            }
        }
        [(-growth * maturity + level).exp()]
    });
    est
}
