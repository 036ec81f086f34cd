//! Optimal bankruptcy barrier, its optimality certificate, and the two-stage
//! choice of face value.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::real::Real;
use crate::valuation::{BankruptcyCost, ModelInstance, TaxProfile, Valuation};

const ROOT_TOL: f64 = 1e-10;
const INITIAL_HALF_WIDTH: f64 = 10.0;
const MAX_HALF_WIDTH: f64 = 50.0;
const CHECK_POINTS: usize = 400;

/// Sufficient conditions for the root of `K_1` to be the optimal barrier,
/// checked on grids.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConditionReport {
    /// `K_1` strictly increasing on `[B* - 5, B* + 5]`.
    pub k1_monotone_on_grid: bool,
    /// `K_2 >= 0` on `[B*, B* + 10]`.
    pub k2_nonneg_above_root: bool,
}

impl ConditionReport {
    pub fn certifies_optimality(&self) -> bool {
        self.k1_monotone_on_grid && self.k2_nonneg_above_root
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Optimality {
    /// Both sufficient conditions hold on their grids.
    Optimal,
    /// A root of `K_1`, but the grid checks did not certify it.
    Candidate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult<T> {
    pub b_star: T,
    pub bankruptcy_asset_level: T,
    pub k1_residual: T,
    pub conditions: ConditionReport,
    pub status: Optimality,
    /// Values at the requested starting level, when it lies above `B*`.
    pub values: Option<Valuation<T>>,
}

/// Root of `K_1`: expanding bracket, then bisection.
pub fn solve_bankruptcy_level<T: Real>(
    inst: &ModelInstance<T>,
    x: Option<T>,
) -> Result<SolveResult<T>> {
    if inst.debt().face_value() == T::zero() {
        return Err(Error::Unlevered);
    }
    let k1 = |b: T| inst.k1(b);

    let mut half = T::lit(INITIAL_HALF_WIDTH);
    let limit = T::lit(MAX_HALF_WIDTH);
    let (mut lo, mut hi, mut k_lo, mut k_hi);
    loop {
        lo = -half;
        hi = half;
        k_lo = k1(lo)?;
        k_hi = k1(hi)?;
        if (k_lo <= T::zero()) != (k_hi <= T::zero()) || half >= limit {
            break;
        }
        half = (half * T::lit(2.0)).min(limit);
    }
    if (k_lo <= T::zero()) == (k_hi <= T::zero()) {
        return Err(Error::NoSignChange {
            lo: lo.as_f64(),
            hi: hi.as_f64(),
            k_lo: k_lo.as_f64(),
            k_hi: k_hi.as_f64(),
        });
    }

    let tol = T::lit(ROOT_TOL);
    let rising = k_hi > T::zero();
    let (mut b, mut residual) = if k_lo.abs() < k_hi.abs() { (lo, k_lo) } else { (hi, k_hi) };
    for _ in 0..300 {
        let mid = lo + (hi - lo) * T::lit(0.5);
        if mid <= lo || mid >= hi {
            break;
        }
        let k_mid = k1(mid)?;
        if k_mid.abs() <= residual.abs() {
            b = mid;
            residual = k_mid;
        }
        if k_mid == T::zero() {
            break;
        }
        if (k_mid > T::zero()) == rising {
            hi = mid;
        } else {
            lo = mid;
        }
        if residual.abs() < tol && hi - lo < tol {
            break;
        }
    }

    let conditions = check_conditions(inst, b)?;
    let values = match x {
        Some(x) if x >= b => Some(inst.valuation(x, b)?),
        _ => None,
    };
    Ok(SolveResult {
        b_star: b,
        bankruptcy_asset_level: b.exp(),
        k1_residual: residual,
        conditions,
        status: if conditions.certifies_optimality() {
            Optimality::Optimal
        } else {
            Optimality::Candidate
        },
        values,
    })
}

fn linspace<T: Real>(lo: T, hi: T, n: usize) -> impl Iterator<Item = T> {
    let step = (hi - lo) / T::lit((n - 1) as f64);
    (0..n).map(move |i| lo + step * T::lit(i as f64))
}

fn check_conditions<T: Real>(inst: &ModelInstance<T>, b_star: T) -> Result<ConditionReport> {
    let five = T::lit(5.0);
    let mut monotone = true;
    let mut prev: Option<T> = None;
    for b in linspace(b_star - five, b_star + five, CHECK_POINTS) {
        let k = inst.k1(b)?;
        if let Some(p) = prev {
            monotone &= k > p;
        }
        prev = Some(k);
    }
    let mut nonneg = true;
    for b in linspace(b_star, b_star + T::lit(10.0), CHECK_POINTS) {
        nonneg &= inst.k2(b)? >= T::zero();
    }
    Ok(ConditionReport {
        k1_monotone_on_grid: monotone,
        k2_nonneg_above_root: nonneg,
    })
}

/// Outcome of moving the barrier away from `B*` by `offset`.
#[derive(Debug, Clone, PartialEq)]
pub struct BarrierShift<T> {
    pub offset: T,
    /// Smallest equity value over the grid points at or above the barrier.
    pub min_equity: T,
    /// Largest `E(x; B* + offset) - E(x; B*)` over the same points.
    pub max_excess_over_optimum: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LimitedLiabilityReport<T> {
    pub min_equity_at_optimum: T,
    pub feasible_at_optimum: bool,
    pub below: Vec<BarrierShift<T>>,
    pub above: Vec<BarrierShift<T>>,
}

impl<T: Real> LimitedLiabilityReport<T> {
    /// Every lower barrier produces negative equity somewhere.
    pub fn lower_barriers_violate(&self) -> bool {
        self.below.iter().all(|s| s.min_equity < T::zero())
    }

    /// Every higher barrier is pointwise dominated by `B*`.
    pub fn higher_barriers_dominated(&self, tol: T) -> bool {
        self.above.iter().all(|s| s.max_excess_over_optimum <= tol)
    }
}

/// Grid from just above `b_star - 0.2` to `x_max`, clustered near the lower
/// end where limited-liability violations appear.
pub fn liability_grid(b_star: f64, x_max: f64, n: usize) -> Vec<f64> {
    let lo = b_star - 0.2;
    (1..=n)
        .map(|i| {
            let t = i as f64 / n as f64;
            lo + (x_max - lo) * t * t
        })
        .collect()
}

/// Checks `E(x; B*) >= -1e-9` on the grid, and compares barriers shifted by
/// `-0.1, -0.2` (expected infeasible) and `+0.1, +0.2` (expected dominated).
pub fn verify_limited_liability<T: Real>(
    inst: &ModelInstance<T>,
    result: &SolveResult<T>,
    x_grid: &[T],
) -> Result<LimitedLiabilityReport<T>> {
    let b_star = result.b_star;
    let offsets_below = [T::lit(-0.1), T::lit(-0.2)];
    let offsets_above = [T::lit(0.1), T::lit(0.2)];

    let mut min_opt = T::infinity();
    for &x in x_grid.iter().filter(|&&x| x >= b_star) {
        min_opt = min_opt.min(inst.equity_value(x, b_star)?);
    }

    let shift = |offset: T| -> Result<BarrierShift<T>> {
        let b = b_star + offset;
        let mut min_equity = T::infinity();
        let mut excess = T::neg_infinity();
        for &x in x_grid.iter().filter(|&&x| x >= b) {
            let e = inst.equity_value(x, b)?;
            min_equity = min_equity.min(e);
            if x >= b_star {
                excess = excess.max(e - inst.equity_value(x, b_star)?);
            }
        }
        Ok(BarrierShift {
            offset,
            min_equity,
            max_excess_over_optimum: excess,
        })
    };

    Ok(LimitedLiabilityReport {
        min_equity_at_optimum: min_opt,
        feasible_at_optimum: min_opt >= T::lit(-1e-9),
        below: offsets_below.into_iter().map(shift).collect::<Result<_>>()?,
        above: offsets_above.into_iter().map(shift).collect::<Result<_>>()?,
    })
}

/// Face values examined by the two-stage search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FaceValueGrid {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
    /// Width at which the golden-section refinement stops.
    pub refine_tol: f64,
}

impl Default for FaceValueGrid {
    fn default() -> Self {
        Self {
            lo: 0.0,
            hi: 100.0,
            step: 1.0,
            refine_tol: 0.05,
        }
    }
}

impl FaceValueGrid {
    pub fn points(&self) -> Vec<f64> {
        let n = ((self.hi - self.lo) / self.step + 1e-9).floor() as usize;
        (0..=n).map(|i| self.lo + self.step * i as f64).collect()
    }
}

/// One face value on the two-stage grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FaceValueSample {
    pub face_value: f64,
    /// `None` for the unlevered firm.
    pub b_star: Option<f64>,
    pub firm_value: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwoStageResult {
    pub p_star: f64,
    pub b_star: Option<f64>,
    pub firm_value: f64,
    pub samples: Vec<FaceValueSample>,
}

/// Firm value at `x` when equity holders default optimally, for face value
/// `p`. Returns the barrier alongside. If `x` is already at or below the
/// barrier the firm defaults immediately and is worth `e^x - eta(x)`.
pub fn levered_firm_value(
    template: &ModelInstance<f64>,
    x: f64,
    face_value: f64,
) -> Result<(Option<f64>, f64)> {
    if face_value == 0.0 {
        return Ok((None, x.exp()));
    }
    let inst = template.with_face_value(face_value)?;
    let solved = solve_bankruptcy_level(&inst, None)?;
    let b = solved.b_star;
    let v = if x > b {
        inst.firm_value(x, b)?
    } else {
        x.exp() - inst.costs().eta(x)
    };
    Ok((Some(b), v))
}

/// Maximises the levered firm value over the face value: grid scan, then
/// golden-section refinement between the neighbours of the best grid point.
/// Ties go to the smaller face value. Grid points whose solve fails are kept
/// in the sample table with their error and skipped.
pub fn solve_two_stage(
    template: &ModelInstance<f64>,
    x: f64,
    grid: &FaceValueGrid,
) -> Result<TwoStageResult> {
    let points = grid.points();
    let samples: Vec<FaceValueSample> = points
        .par_iter()
        .map(|&p| match levered_firm_value(template, x, p) {
            Ok((b, v)) => FaceValueSample {
                face_value: p,
                b_star: b,
                firm_value: Some(v),
                error: None,
            },
            Err(e) => FaceValueSample {
                face_value: p,
                b_star: None,
                firm_value: None,
                error: Some(e.to_string()),
            },
        })
        .collect();

    let mut best: Option<(usize, f64)> = None;
    for (i, s) in samples.iter().enumerate() {
        if let Some(v) = s.firm_value {
            let better = match best {
                None => true,
                Some((_, bv)) => v > bv + 1e-12 * bv.abs(),
            };
            if better {
                best = Some((i, v));
            }
        }
    }
    let (i_best, _) = best.ok_or(Error::NoConvergence {
        what: "two-stage grid (every face value failed)",
        residual: f64::NAN,
    })?;

    let lo = samples[i_best.saturating_sub(1)].face_value;
    let hi = samples[(i_best + 1).min(samples.len() - 1)].face_value;
    let objective = |p: f64| levered_firm_value(template, x, p).ok().map(|(_, v)| v);
    let (p_ref, v_ref) = golden_section_max(objective, lo, hi, grid.refine_tol);

    let grid_best = &samples[i_best];
    let (p_star, firm_value) = match (p_ref, v_ref) {
        (p, Some(v)) if v > grid_best.firm_value.unwrap_or(f64::NEG_INFINITY) => (p, v),
        _ => (grid_best.face_value, grid_best.firm_value.unwrap_or(f64::NAN)),
    };
    let (b_star, _) = levered_firm_value(template, x, p_star)?;
    Ok(TwoStageResult {
        p_star,
        b_star,
        firm_value,
        samples,
    })
}

/// Golden-section search for a maximum on `[lo, hi]`. Returns the best point
/// evaluated; failed evaluations count as `-∞`.
pub fn golden_section_max<F>(f: F, lo: f64, hi: f64, tol: f64) -> (f64, Option<f64>)
where
    F: Fn(f64) -> Option<f64>,
{
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let score = |v: Option<f64>| v.unwrap_or(f64::NEG_INFINITY);
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol {
        if score(fc) >= score(fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    if score(fc) >= score(fd) {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Cost/tax parameter varied by a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Knob {
    /// Bankruptcy cost concavity `a`.
    CostConcavity,
    /// Tax convexity threshold `c`.
    TaxConvexity,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SweepMode {
    FixedFaceValue,
    TwoStage(FaceValueGrid),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub knob_value: f64,
    pub b_star: f64,
    pub bankruptcy_asset_level: f64,
    pub equity: f64,
    pub debt: f64,
    pub firm: f64,
    pub leverage: f64,
    pub p_star: Option<f64>,
}

/// A sweep row, or the reason the point was skipped.
pub type SweepOutcome = std::result::Result<SweepRow, String>;

fn with_knob(template: &ModelInstance<f64>, knob: Knob, value: f64) -> Result<ModelInstance<f64>> {
    let mut costs = *template.costs();
    match (knob, costs.cost, costs.tax) {
        (Knob::CostConcavity, BankruptcyCost::Scaled { eta0, b, .. }, _) => {
            costs.cost = BankruptcyCost::scaled(eta0, value, b)?;
        }
        (Knob::TaxConvexity, _, TaxProfile::Convex { .. }) => {
            costs.tax = TaxProfile::convex(value)?;
        }
        (Knob::CostConcavity, ..) => {
            return Err(Error::InvalidParameter {
                name: "a",
                value,
                reason: "the concavity knob needs the scaled cost profile",
            })
        }
        (Knob::TaxConvexity, ..) => {
            return Err(Error::InvalidParameter {
                name: "c_tax",
                value,
                reason: "the convexity knob needs the convex tax profile",
            })
        }
    }
    Ok(template.with_costs(costs))
}

fn sweep_point(template: &ModelInstance<f64>, x: f64, knob: Knob, value: f64, mode: SweepMode) -> Result<SweepRow> {
    let base = with_knob(template, knob, value)?;
    let (inst, p_star) = match mode {
        SweepMode::FixedFaceValue => (base, None),
        SweepMode::TwoStage(grid) => {
            let two = solve_two_stage(&base, x, &grid)?;
            (base.with_face_value(two.p_star)?, Some(two.p_star))
        }
    };
    let solved = solve_bankruptcy_level(&inst, Some(x))?;
    let v = solved.values.ok_or(Error::Domain {
        function: "sweep",
        value: x,
        reason: "starting level lies below the optimal barrier",
    })?;
    Ok(SweepRow {
        knob_value: value,
        b_star: solved.b_star,
        bankruptcy_asset_level: solved.bankruptcy_asset_level,
        equity: v.equity,
        debt: v.debt,
        firm: v.firm,
        leverage: v.debt / v.equity,
        p_star,
    })
}

/// Solves at each knob value; rows come back in the order of `values`.
pub fn sweep_scale_effects(
    template: &ModelInstance<f64>,
    x: f64,
    knob: Knob,
    values: &[f64],
    mode: SweepMode,
) -> Vec<SweepOutcome> {
    values
        .par_iter()
        .map(|&v| sweep_point(template, x, knob, v, mode).map_err(|e| e.to_string()))
        .collect()
}
