//! Run configuration: a JSON file with market, jump, debt and cost inputs.
//!
//! Rates are decimals. Asset values are on the linear scale (`v0`), and are
//! converted to log units when a model is built.

use std::path::Path;

use levcap::mc::McConfig;
use levcap::solver::FaceValueGrid;
use levcap::{BankruptcyCost, CostTaxSpec, DebtSpec, LevyParams, MarketParams, Model, TaxProfile};
use serde::Deserialize;

use crate::CliError;

/// Tolerance on `|kappa(1) - (r - delta)|` for an explicitly given drift.
const MARTINGALE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub market: MarketInput,
    pub levy: LevyInput,
    pub debt: DebtInput,
    pub costs: CostInput,
    #[serde(default = "default_v0")]
    pub v0: f64,
    #[serde(default)]
    pub grid: GridInput,
    #[serde(default)]
    pub value: ValueInput,
    #[serde(default)]
    pub mc: McInput,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarketInput {
    pub r: f64,
    pub delta: f64,
    pub gamma_hat: f64,
    pub rho_hat: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevyInput {
    pub sigma: f64,
    pub lambda: f64,
    pub beta: f64,
    /// Calibrated from the martingale condition when absent.
    pub mu: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DebtInput {
    #[serde(rename = "P")]
    pub face_value: f64,
    pub m: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostInput {
    pub variant: CostVariant,
    pub eta0: Option<f64>,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub eta: Option<f64>,
    pub c_tax: Option<f64>,
    /// Asset value (linear scale) from which the full tax benefit applies.
    pub tax_cutoff: Option<f64>,
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum CostVariant {
    Scaled,
    ConstantEta,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridInput {
    #[serde(default = "default_p_lo")]
    pub p_lo: f64,
    #[serde(default = "default_p_hi")]
    pub p_hi: f64,
    #[serde(default = "default_p_step")]
    pub p_step: f64,
    #[serde(default = "default_refine_tol")]
    pub refine_tol: f64,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValueInput {
    /// Barriers in log units; `B* - 0.2, ..., B* + 0.2` when absent.
    pub barriers: Option<Vec<f64>>,
    /// Largest asset value of the grid; `2 v0` when absent.
    pub v0_max: Option<f64>,
    pub points: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McInput {
    #[serde(default = "default_paths")]
    pub n_paths: usize,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_horizon")]
    pub horizon: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_true")]
    pub bridge_correction: bool,
    #[serde(default = "default_max_step")]
    pub max_step: f64,
    /// Barrier for validation, log units; the optimal barrier when absent.
    #[serde(rename = "B")]
    pub barrier: Option<f64>,
}

fn default_v0() -> f64 {
    100.0
}
fn default_p_lo() -> f64 {
    0.0
}
fn default_p_hi() -> f64 {
    100.0
}
fn default_p_step() -> f64 {
    1.0
}
fn default_refine_tol() -> f64 {
    0.05
}
fn default_paths() -> usize {
    200_000
}
fn default_dt() -> f64 {
    1e-3
}
fn default_horizon() -> f64 {
    200.0
}
fn default_true() -> bool {
    true
}
fn default_max_step() -> f64 {
    0.05
}

impl Default for GridInput {
    fn default() -> Self {
        Self {
            p_lo: default_p_lo(),
            p_hi: default_p_hi(),
            p_step: default_p_step(),
            refine_tol: default_refine_tol(),
        }
    }
}

impl Default for McInput {
    fn default() -> Self {
        Self {
            n_paths: default_paths(),
            dt: default_dt(),
            horizon: default_horizon(),
            seed: 0,
            bridge_correction: true,
            max_step: default_max_step(),
            barrier: None,
        }
    }
}

fn field(name: &str, message: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{name}: {message}"))
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn x0(&self) -> Result<f64, CliError> {
        if self.v0 > 0.0 && self.v0.is_finite() {
            Ok(self.v0.ln())
        } else {
            Err(field("v0", "must be a positive asset value"))
        }
    }

    pub fn market(&self) -> Result<MarketParams<f64>, CliError> {
        let m = &self.market;
        MarketParams::new(m.r, m.delta, m.gamma_hat, m.rho_hat).map_err(|e| field("market", e))
    }

    pub fn levy(&self, market: &MarketParams<f64>) -> Result<LevyParams<f64>, CliError> {
        let l = &self.levy;
        match l.mu {
            None => LevyParams::calibrate(market, l.sigma, l.lambda, l.beta).map_err(|e| field("levy", e)),
            Some(mu) => {
                let levy = LevyParams::new(mu, l.sigma, l.lambda, l.beta).map_err(|e| field("levy", e))?;
                let gap = levy.kappa(1.0) - market.martingale_rate();
                if gap.abs() < MARTINGALE_TOL {
                    Ok(levy)
                } else {
                    let calibrated = LevyParams::calibrate(market, l.sigma, l.lambda, l.beta)
                        .map_err(|e| field("levy", e))?;
                    Err(field(
                        "levy.mu",
                        format!(
                            "kappa(1) - (r - delta) = {gap:e} violates the martingale condition; \
                             the calibrated drift is {}",
                            calibrated.mu
                        ),
                    ))
                }
            }
        }
    }

    pub fn costs(&self) -> Result<CostTaxSpec<f64>, CliError> {
        let c = &self.costs;
        let need = |name: &str, v: Option<f64>| {
            v.ok_or_else(|| field(&format!("costs.{name}"), "required for this variant"))
        };
        let cost = match c.variant {
            CostVariant::Scaled => {
                if c.eta.is_some() {
                    return Err(field("costs.eta", "only used by the constant_eta variant"));
                }
                BankruptcyCost::scaled(need("eta0", c.eta0)?, need("a", c.a)?, need("b", c.b)?)
            }
            CostVariant::ConstantEta => {
                if c.eta0.is_some() || c.a.is_some() || c.b.is_some() {
                    return Err(field("costs", "eta0, a and b belong to the scaled variant"));
                }
                BankruptcyCost::constant(need("eta", c.eta)?)
            }
        }
        .map_err(|e| field("costs", e))?;
        let tax = match (c.c_tax, c.tax_cutoff) {
            (Some(c_tax), None) => TaxProfile::convex(c_tax),
            (None, Some(cutoff)) => TaxProfile::cutoff(cutoff),
            _ => return Err(field("costs", "give exactly one of c_tax and tax_cutoff")),
        }
        .map_err(|e| field("costs", e))?;
        Ok(CostTaxSpec::new(cost, tax))
    }

    pub fn model(&self) -> Result<Model, CliError> {
        let market = self.market()?;
        let levy = self.levy(&market)?;
        let debt = DebtSpec::new(self.debt.face_value, self.debt.m).map_err(|e| field("debt", e))?;
        Model::new(levy, market, debt, self.costs()?).map_err(|e| field("model", e))
    }

    pub fn face_value_grid(&self) -> Result<FaceValueGrid, CliError> {
        let g = &self.grid;
        if !(g.p_lo >= 0.0 && g.p_hi > g.p_lo && g.p_step > 0.0 && g.refine_tol > 0.0) {
            return Err(field("grid", "need 0 <= p_lo < p_hi, p_step > 0 and refine_tol > 0"));
        }
        Ok(FaceValueGrid {
            lo: g.p_lo,
            hi: g.p_hi,
            step: g.p_step,
            refine_tol: g.refine_tol,
        })
    }

    pub fn mc(&self) -> McConfig {
        let m = &self.mc;
        McConfig {
            n_paths: m.n_paths,
            dt: m.dt,
            horizon: m.horizon,
            seed: m.seed,
            bridge_correction: m.bridge_correction,
            max_step: m.max_step,
        }
    }
}
