//! Test-only oracles and fixtures shared by the integration tests.
#![allow(dead_code)]

pub mod oracle;

use levcap::{BankruptcyCost, CostTaxSpec, DebtSpec, LevyParams, MarketParams, Model, TaxProfile};

const GK_NODES: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const GK_WEIGHTS: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const GAUSS_WEIGHTS: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = GK_WEIGHTS[7] * fc;
    let mut g = GAUSS_WEIGHTS[3] * fc;
    for i in 0..7 {
        let dx = h * GK_NODES[i];
        let s = f(c - dx) + f(c + dx);
        k += GK_WEIGHTS[i] * s;
        if i % 2 == 1 {
            g += GAUSS_WEIGHTS[i / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

fn adapt<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    let (val, err) = kronrod(f, a, b);
    // The second bound stops refinement once the estimate is at round-off.
    if err <= tol || err <= 1e-15 * val.abs() || depth == 0 || (b - a).abs() < 1e-14 {
        return val;
    }
    let m = 0.5 * (a + b);
    adapt(f, a, m, 0.5 * tol, depth - 1) + adapt(f, m, b, 0.5 * tol, depth - 1)
}

fn edges(a: f64, b: f64, breaks: &[f64]) -> Vec<f64> {
    let mut pts: Vec<f64> = breaks.iter().copied().filter(|&p| p > a && p < b).collect();
    pts.sort_by(f64::total_cmp);
    let mut edges = vec![a];
    edges.extend(pts);
    edges.push(b);
    edges
}

/// Adaptive Gauss-Kronrod (7/15) quadrature of `f` over `[a, b]` to absolute
/// tolerance `tol`, split at the given interior breakpoints.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, breaks: &[f64], tol: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let edges = edges(a, b, breaks);
    let share = tol / (edges.len() - 1) as f64;
    edges.windows(2).map(|w| adapt(&f, w[0], w[1], share, 40)).sum()
}

/// As [`integrate`], with the tolerance relative to the size of the integral
/// as estimated by a coarse adaptive pass.
pub fn integrate_rel<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, breaks: &[f64], rel: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let edges = edges(a, b, breaks);
    let mut scale = edges
        .windows(2)
        .map(|w| kronrod(&f, w[0], w[1]).0.abs())
        .fold(0.0, f64::max);
    if scale == 0.0 {
        scale = f64::MIN_POSITIVE;
    }
    let rough = integrate(&f, a, b, breaks, 1e-4 * scale).abs().max(f64::MIN_POSITIVE);
    integrate(&f, a, b, breaks, rel * rough)
}

pub const REL: f64 = 1e-12;

pub fn market() -> MarketParams<f64> {
    MarketParams::new(0.075, 0.07, 0.35, 0.08162).unwrap()
}

pub fn levy_with(lambda: f64) -> LevyParams<f64> {
    LevyParams::calibrate(&market(), 0.2, lambda, 9.0).unwrap()
}

pub fn model(levy: LevyParams<f64>, cost: BankruptcyCost<f64>, tax: TaxProfile<f64>, p: f64) -> Model {
    let debt = DebtSpec::new(p, 0.2).unwrap();
    Model::new(levy, market(), debt, CostTaxSpec::new(cost, tax)).unwrap()
}

pub fn case1_with(lambda: f64, p: f64) -> Model {
    model(
        levy_with(lambda),
        BankruptcyCost::scaled(0.9, 0.5, 0.0).unwrap(),
        TaxProfile::convex(5.0).unwrap(),
        p,
    )
}

pub fn case2_with(lambda: f64, p: f64) -> Model {
    model(
        levy_with(lambda),
        BankruptcyCost::scaled(0.5, 0.01, 5.0).unwrap(),
        TaxProfile::convex(0.0).unwrap(),
        p,
    )
}

pub fn case1() -> Model {
    case1_with(0.5, 50.0)
}

pub fn case2() -> Model {
    case2_with(0.5, 50.0)
}

/// Constant proportional loss with a cutoff tax benefit.
pub fn reduction_model(eta_hat: f64, v_t: f64) -> Model {
    model(
        levy_with(0.5),
        BankruptcyCost::scaled(eta_hat, 0.0, 0.0).unwrap(),
        TaxProfile::cutoff(v_t).unwrap(),
        50.0,
    )
}

pub fn constant_loss_model() -> Model {
    model(
        levy_with(0.5),
        BankruptcyCost::constant(20.0).unwrap(),
        TaxProfile::convex(5.0).unwrap(),
        50.0,
    )
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

pub fn x0() -> f64 {
    100f64.ln()
}
