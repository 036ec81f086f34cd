use std::path::Path;

use levcap::mc::simulate_functionals;
use levcap::solver::{
    solve_bankruptcy_level, solve_two_stage, sweep_scale_effects, Knob, Optimality, SweepMode,
};
use levcap::{Discount, Flow, Model};
use serde_json::{json, Map, Value};

use crate::config::RunConfig;
use crate::output::{attach_table, emit, number, Cell, Table};
use crate::CliError;

const Z_LIMIT: f64 = 3.0;
const DEFAULT_VALUE_POINTS: usize = 200;
const BARRIER_OFFSETS: [f64; 5] = [-0.2, -0.1, 0.0, 0.1, 0.2];

fn object(v: Value) -> Map<String, Value> {
    match v {
        Value::Object(m) => m,
        _ => unreachable!("reports are built from json! objects"),
    }
}

pub fn solve(cfg: &RunConfig, out: Option<&Path>) -> Result<(), CliError> {
    let model = cfg.model()?;
    let x = cfg.x0()?;
    let mut table = Table::new(vec![
        "B_star",
        "bankruptcy_asset_level",
        "K1_residual",
        "optimal",
        "V0",
        "equity",
        "debt",
        "firm",
    ]);
    let mut body = if model.debt().face_value() == 0.0 {
        table.push(vec![Cell::Empty, Cell::Empty, Cell::Empty, Cell::Empty, cfg.v0.into(), cfg.v0.into(), 0.0.into(), cfg.v0.into()]);
        object(json!({
            "B_star": null,
            "bankruptcy_asset_level": null,
            "K1_residual": null,
            "optimality_flag": null,
            "V0": cfg.v0,
            "equity": cfg.v0,
            "debt": 0.0,
            "firm": cfg.v0,
        }))
    } else {
        let solved = solve_bankruptcy_level(&model, Some(x))?;
        let flag = match solved.status {
            Optimality::Optimal => "optimal",
            Optimality::Candidate => "candidate",
        };
        let v = solved.values;
        table.push(vec![
            solved.b_star.into(),
            solved.bankruptcy_asset_level.into(),
            solved.k1_residual.into(),
            Cell::Text(flag.into()),
            cfg.v0.into(),
            v.map(|v| v.equity).into(),
            v.map(|v| v.debt).into(),
            v.map(|v| v.firm).into(),
        ]);
        object(json!({
            "B_star": solved.b_star,
            "bankruptcy_asset_level": solved.bankruptcy_asset_level,
            "K1_residual": solved.k1_residual,
            "optimality_flag": flag,
            "conditions": {
                "k1_monotone_on_grid": solved.conditions.k1_monotone_on_grid,
                "k2_nonneg_above_root": solved.conditions.k2_nonneg_above_root,
            },
            "V0": cfg.v0,
            "equity": v.map(|v| number(v.equity)),
            "debt": v.map(|v| number(v.debt)),
            "firm": v.map(|v| number(v.firm)),
        }))
    };
    if let Some(path) = out {
        table.write(path)?;
        body.insert("csv".into(), Value::String(path.display().to_string()));
    }
    emit("solve", body)
}

pub fn value(cfg: &RunConfig, out: Option<&Path>) -> Result<(), CliError> {
    let model = cfg.model()?;
    let (barriers, b_star) = match &cfg.value.barriers {
        Some(list) if !list.is_empty() => (list.clone(), None),
        Some(_) => return Err(CliError::Config("value.barriers: must not be empty".into())),
        None => {
            let b = solve_bankruptcy_level(&model, None)?.b_star;
            (BARRIER_OFFSETS.iter().map(|o| b + o).collect(), Some(b))
        }
    };
    let v_max = cfg.value.v0_max.unwrap_or(2.0 * cfg.v0);
    if !(v_max > 0.0) {
        return Err(CliError::Config("value.v0_max: must be positive".into()));
    }
    let n = cfg.value.points.unwrap_or(DEFAULT_VALUE_POINTS).max(2);
    let lo = barriers.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = v_max.ln();
    if !(hi > lo) {
        return Err(CliError::Config("value.v0_max: must exceed the lowest barrier".into()));
    }
    let grid: Vec<f64> = (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect();

    let mut table = Table::new(vec!["B", "V0", "equity", "debt", "firm"]);
    for &b in &barriers {
        let xs = std::iter::once(b).chain(grid.iter().copied().filter(|&x| x > b));
        for x in xs {
            let v = model
                .valuation(x, b)
                .map_err(|e| CliError::Config(format!("value grid at B={b}, x={x}: {e}")))?;
            table.push(vec![b.into(), x.exp().into(), v.equity.into(), v.debt.into(), v.firm.into()]);
        }
    }
    let mut body = object(json!({
        "B_star": b_star,
        "barriers": barriers,
        "V0_max": v_max,
    }));
    attach_table(&mut body, &table, out)?;
    emit("value", body)
}

pub fn two_stage(cfg: &RunConfig, out: Option<&Path>) -> Result<(), CliError> {
    let model = cfg.model()?;
    let x = cfg.x0()?;
    let grid = cfg.face_value_grid()?;
    let result = solve_two_stage(&model, x, &grid)?;

    let mut table = Table::new(vec!["P", "B_star", "firm_value", "error"]);
    for s in &result.samples {
        table.push(vec![
            s.face_value.into(),
            s.b_star.into(),
            s.firm_value.into(),
            s.error.clone().map_or(Cell::Empty, Cell::Text),
        ]);
    }
    let values: Vec<f64> = result.samples.iter().filter_map(|s| s.firm_value).collect();
    let mut body = object(json!({
        "P_star": result.p_star,
        "B_star": result.b_star,
        "bankruptcy_asset_level": result.b_star.map(f64::exp),
        "firm_value": result.firm_value,
        "V0": cfg.v0,
        "single_peaked_on_grid": single_peaked(&values),
        "failed_grid_points": result.samples.iter().filter(|s| s.error.is_some()).count(),
    }));
    attach_table(&mut body, &table, out)?;
    emit("two-stage", body)
}

/// Non-decreasing up to the largest value, non-increasing after it.
fn single_peaked(values: &[f64]) -> bool {
    let Some(peak) = values
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
    else {
        return false;
    };
    values[..=peak].windows(2).all(|w| w[1] >= w[0]) && values[peak..].windows(2).all(|w| w[1] <= w[0])
}

/// Parses `lo:hi:steps` into `steps` evenly spaced values.
pub fn parse_range(text: &str) -> Result<Vec<f64>, CliError> {
    let bad = || CliError::Config(format!("--range {text}: expected lo:hi:steps with steps >= 1"));
    let parts: Vec<&str> = text.split(':').collect();
    let [lo, hi, steps] = parts.as_slice() else {
        return Err(bad());
    };
    let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
    let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
    let steps: usize = steps.trim().parse().map_err(|_| bad())?;
    if steps == 0 || !lo.is_finite() || !hi.is_finite() {
        return Err(bad());
    }
    if steps == 1 {
        return Ok(vec![lo]);
    }
    Ok((0..steps).map(|i| lo + (hi - lo) * i as f64 / (steps - 1) as f64).collect())
}

pub fn sweep(
    cfg: &RunConfig,
    knob: Knob,
    values: &[f64],
    two_stage_mode: bool,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let model = cfg.model()?;
    let x = cfg.x0()?;
    let mode = if two_stage_mode {
        SweepMode::TwoStage(cfg.face_value_grid()?)
    } else {
        SweepMode::FixedFaceValue
    };
    let rows = sweep_scale_effects(&model, x, knob, values, mode);

    let mut table = Table::new(vec![
        "knob", "B_star", "exp_B_star", "equity", "debt", "firm", "D_over_E", "P_star", "error",
    ]);
    let mut failed = 0;
    for (&k, row) in values.iter().zip(&rows) {
        match row {
            Ok(r) => table.push(vec![
                k.into(),
                r.b_star.into(),
                r.bankruptcy_asset_level.into(),
                r.equity.into(),
                r.debt.into(),
                r.firm.into(),
                r.leverage.into(),
                r.p_star.into(),
                Cell::Empty,
            ]),
            Err(e) => {
                failed += 1;
                let mut cells = vec![Cell::Num(k)];
                cells.extend(std::iter::repeat_with(|| Cell::Empty).take(7));
                cells.push(Cell::Text(e.clone()));
                table.push(cells);
            }
        }
    }
    let mut body = object(json!({
        "knob": match knob { Knob::CostConcavity => "a", Knob::TaxConvexity => "c" },
        "mode": if two_stage_mode { "two_stage" } else { "fixed_P" },
        "points": values.len(),
        "failed_points": failed,
    }));
    attach_table(&mut body, &table, out)?;
    emit("sweep", body)
}

/// Closed-form counterparts of the simulated functionals, in the order of
/// `McFunctionals::named`.
fn closed_forms(model: &Model, x: f64, b: f64) -> Result<[f64; 8], levcap::Error> {
    let (r, rm) = (Discount::Rate, Discount::RatePlusRetirement);
    let v = model.valuation(x, b)?;
    Ok([
        model.cost_at_default(r, x, b)?,
        model.cost_at_default(rm, x, b)?,
        model.flow_until_default(rm, Flow::Coupon, x, b)?,
        model.flow_until_default(r, Flow::Tax, x, b)?,
        model.recovery_at_default(x, b)?,
        v.equity,
        v.debt,
        v.firm,
    ])
}

/// `NAME=DELTA` shifts applied to closed-form values before comparison.
pub fn parse_perturbations(items: &[String]) -> Result<Vec<(String, f64)>, CliError> {
    items
        .iter()
        .map(|item| {
            let (name, delta) = item
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("--perturb {item}: expected NAME=DELTA")))?;
            let delta: f64 = delta
                .parse()
                .map_err(|_| CliError::Config(format!("--perturb {item}: bad number")))?;
            Ok((name.to_string(), delta))
        })
        .collect()
}

pub fn validate(cfg: &RunConfig, perturb: &[(String, f64)], out: Option<&Path>) -> Result<(), CliError> {
    let model = cfg.model()?;
    let x = cfg.x0()?;
    let b = match cfg.mc.barrier {
        Some(b) => b,
        None => solve_bankruptcy_level(&model, None)?.b_star,
    };
    let mc = cfg.mc();
    mc.validate(model.rate(Discount::Rate))
        .map_err(|e| CliError::Config(format!("mc: {e}")))?;
    let est = simulate_functionals(&model, x, b, &mc)?;
    let mut closed = closed_forms(&model, x, b)?;

    let named = est.named();
    for (name, delta) in perturb {
        let i = named
            .iter()
            .position(|(n, _)| n == name)
            .ok_or_else(|| CliError::Config(format!("--perturb: unknown functional {name}")))?;
        closed[i] += delta;
    }

    let mut table = Table::new(vec!["functional", "closed_form", "mc_mean", "std_error", "z", "pass"]);
    let mut offenders = Vec::new();
    for ((name, e), value) in named.iter().zip(closed) {
        let z = e.z_score(value);
        let pass = z <= Z_LIMIT;
        if !pass {
            offenders.push(name.to_string());
        }
        table.push(vec![
            Cell::Text(name.to_string()),
            value.into(),
            e.mean.into(),
            e.std_error.into(),
            z.into(),
            Cell::Text(pass.to_string()),
        ]);
    }
    let mut body = object(json!({
        "B": b,
        "V0": cfg.v0,
        "mc": {
            "n_paths": mc.n_paths,
            "dt": mc.dt,
            "horizon": mc.horizon,
            "seed": mc.seed,
            "bridge_correction": mc.bridge_correction,
            "max_step": mc.max_step,
        },
        "z_limit": Z_LIMIT,
        "pass": offenders.is_empty(),
        "failed": offenders,
    }));
    attach_table(&mut body, &table, out)?;
    emit("validate", body)?;
    if offenders.is_empty() {
        Ok(())
    } else {
        Err(CliError::Validation(offenders))
    }
}
