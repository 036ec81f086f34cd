//! Direct numerical integration of the defining integrals, independent of the
//! closed forms in the library.

use super::{integrate_rel as integrate, REL};
use levcap::{BankruptcyCost, Discount, Flow, Model, TaxProfile};

const INNER: f64 = 1e-13;

fn jump_cut(m: &Model) -> f64 {
    40.0 / m.levy().beta
}

fn levy_density(m: &Model, u: f64) -> f64 {
    let p = m.levy();
    p.lambda * p.beta * (-p.beta * u).exp()
}

fn kink(m: &Model) -> Option<f64> {
    match m.costs().cost {
        BankruptcyCost::Scaled { b, .. } => Some(b),
        BankruptcyCost::Constant { .. } => None,
    }
}

fn flow_at(m: &Model, flow: Flow, y: f64) -> f64 {
    match flow {
        Flow::Coupon => m.f1(),
        Flow::Tax => m.f2(y),
    }
}

fn saturation(m: &Model) -> f64 {
    match m.costs().tax {
        TaxProfile::Convex { c } => c,
        TaxProfile::Cutoff { log_threshold } => log_threshold,
    }
}

/// `∫_0^∞ e^{-Phi y} f_i(y + B) dy`.
pub fn g(m: &Model, d: Discount, flow: Flow, b: f64) -> f64 {
    let phi = m.phi(d);
    integrate(
        |y| (-phi * y).exp() * flow_at(m, flow, y + b),
        0.0,
        45.0 / phi,
        &[saturation(m) - b],
        REL,
    )
}

/// `∫ Pi(du) ∫_0^{u ∧ l} e^{-(zeta-1) z - u} eta_bar(B - u + z) dz`.
pub fn q(m: &Model, b: f64, zeta: f64, l: f64) -> f64 {
    let k = kink(m);
    let inner = |u: f64| {
        let top = u.min(l);
        let breaks: Vec<f64> = k.map(|k| k - b + u).into_iter().collect();
        integrate(
            |z| (-(zeta - 1.0) * z - u).exp() * m.costs().eta_bar(b - u + z),
            0.0,
            top,
            &breaks,
            INNER,
        )
    };
    let mut breaks = vec![];
    if l.is_finite() {
        breaks.push(l);
    }
    if let Some(k) = k {
        breaks.push(b - k);
        breaks.push(l + b - k);
    }
    // Past the window the integrand decays like e^{-(1+beta) u}; with an
    // infinite window like e^{-(zeta+beta) u}.
    let beta = m.levy().beta;
    let cut = if l.is_finite() {
        l + 40.0 / (1.0 + beta)
    } else {
        40.0 / (zeta + beta)
    };
    integrate(|u| levy_density(m, u) * inner(u), 0.0, cut, &breaks, REL)
}

/// `∫ Pi(du) ∫_0^u e^{-Phi z} [eta(B) - eta(B - u + z)] dz`.
pub fn h(m: &Model, d: Discount, b: f64) -> f64 {
    let phi = m.phi(d);
    let eta_b = m.costs().eta(b);
    let k = kink(m);
    let inner = |u: f64| {
        let breaks: Vec<f64> = k.map(|k| k - b + u).into_iter().collect();
        integrate(
            |z| (-phi * z).exp() * (eta_b - m.costs().eta(b - u + z)),
            0.0,
            u,
            &breaks,
            INNER,
        )
    };
    let breaks: Vec<f64> = k.map(|k| b - k).into_iter().collect();
    integrate(|u| levy_density(m, u) * inner(u), 0.0, jump_cut(m), &breaks, REL)
}

/// Jump part of `J` through its double integral:
/// `∫ Pi(du) ∫_0^u (e^{-Phi(r) z} - e^{-Phi(r+m) z}) eta(B - u + z) dz`.
pub fn j_jumps(m: &Model, b: f64) -> f64 {
    let (pr, prm) = (m.phi(Discount::Rate), m.phi(Discount::RatePlusRetirement));
    let k = kink(m);
    let inner = |u: f64| {
        let breaks: Vec<f64> = k.map(|k| k - b + u).into_iter().collect();
        integrate(
            |z| ((-pr * z).exp() - (-prm * z).exp()) * m.costs().eta(b - u + z),
            0.0,
            u,
            &breaks,
            INNER,
        )
    };
    integrate(|u| levy_density(m, u) * inner(u), 0.0, jump_cut(m), &[], REL)
}

/// `sigma^2/2 (Phi(r+m) - Phi(r)) + ∫ Pi(du) e^{-u} [...]` with the measure
/// integral done numerically.
pub fn small_j(m: &Model) -> f64 {
    let (pr, prm) = (m.phi(Discount::Rate), m.phi(Discount::RatePlusRetirement));
    let sigma = m.levy().sigma;
    let bracket = |u: f64| {
        (1.0 - (-(pr - 1.0) * u).exp()) / (pr - 1.0) - (1.0 - (-(prm - 1.0) * u).exp()) / (prm - 1.0)
    };
    0.5 * sigma * sigma * (prm - pr)
        + integrate(|u| levy_density(m, u) * (-u).exp() * bracket(u), 0.0, jump_cut(m), &[], REL)
}

/// `∫_B^x W(x - y) f_i(y) dy`.
pub fn integral_w_flow(m: &Model, d: Discount, flow: Flow, x: f64, b: f64) -> f64 {
    let ev = m.evaluator(d);
    integrate(|y| ev.w(x - y) * flow_at(m, flow, y), b, x, &[saturation(m)], REL)
}

/// `∫ Pi(du) ∫_0^{u ∧ l} W(l - z) dz`.
pub fn jump_window_w(m: &Model, d: Discount, l: f64) -> f64 {
    let ev = m.evaluator(d);
    let inner = |u: f64| integrate(|z| ev.w(l - z), 0.0, u.min(l), &[], INNER);
    integrate(|u| levy_density(m, u) * inner(u), 0.0, jump_cut(m), &[l], REL)
}

/// `∫ Pi(du) ∫_0^{u ∧ l} W(l - z) eta(z + B - u) dz`.
pub fn jump_window_w_eta(m: &Model, d: Discount, x: f64, b: f64) -> f64 {
    let ev = m.evaluator(d);
    let l = x - b;
    let k = kink(m);
    let inner = |u: f64| {
        let breaks: Vec<f64> = k.map(|k| k - b + u).into_iter().collect();
        integrate(
            |z| ev.w(l - z) * m.costs().eta(z + b - u),
            0.0,
            u.min(l),
            &breaks,
            INNER,
        )
    };
    integrate(|u| levy_density(m, u) * inner(u), 0.0, jump_cut(m), &[l], REL)
}

/// `∫_0^∞ e^{-s x} W(x) dx`, truncated once the integrand has decayed by
/// `e^{-40}`.
pub fn laplace_w(m: &Model, d: Discount, s: f64) -> f64 {
    let ev = m.evaluator(d);
    let decay = s - ev.phi();
    let top = 40.0 / decay;
    integrate(|x| (-s * x).exp() * ev.w(x), 0.0, top, &[], REL)
}

/// `1 + q ∫_0^x W(y) dy`.
pub fn z(m: &Model, d: Discount, x: f64) -> f64 {
    let ev = m.evaluator(d);
    1.0 + ev.q() * integrate(|y| ev.w(y), 0.0, x, &[], REL)
}

/// `Gamma(y)` from its defining integral.
pub fn gamma(m: &Model, d: Discount, y: f64) -> f64 {
    let ev = m.evaluator(d);
    let kappa_one = m.levy().kappa(1.0);
    let slope = (kappa_one - ev.q()) / (1.0 - ev.phi());
    slope * ev.w(y)
        + (kappa_one - ev.q()) * y.exp() * integrate(|z| (-z).exp() * ev.w(z), 0.0, y, &[], REL)
}
