//! Declarative scenario documents: TOML or JSON, one command per scenario,
//! validated at parse time.

use serde::{Deserialize, Serialize};

use crate::bounds::{ScalingProbe, SearchBudget, MAX_SEARCH_P};
use crate::error::{Error, Result};
use crate::funcspace::FunctionSpec;
use crate::gls::{PsiFunction, MIN_GRID};
use crate::specfun::{ExponentPair, TransformParams, WeightedExponents};
use crate::transform::{EvalGrid, KernelSpec, DEFAULT_REL_TOL};

fn default_rel_tol() -> f64 {
    DEFAULT_REL_TOL
}

fn default_restarts() -> usize {
    SearchBudget::default().restarts
}

fn default_iterations() -> usize {
    SearchBudget::default().iterations
}

fn default_bump_samples() -> usize {
    SearchBudget::default().bump_samples
}

fn default_grid_size() -> usize {
    64
}

fn default_lambda_grid() -> Vec<f64> {
    ScalingProbe::log_grid(0.25, 4.0, 9)
}

fn default_indicator() -> FunctionSpec {
    FunctionSpec::Indicator { b: 1.0 }
}

fn default_scaling_f() -> FunctionSpec {
    FunctionSpec::BumpMix {
        seed: 0,
        count: 3,
        nonnegative: false,
    }
}

/// A kernel/function pair for the Hölder and Hardy–Mellin checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelCheck {
    pub kernel: KernelSpec,
    pub f: FunctionSpec,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case", deny_unknown_fields)]
pub enum Scenario {
    Constants {
        kappa: f64,
        r: f64,
        p: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        mu: Option<f64>,
    },
    /// Pointwise evaluation. Without `kernel` the transform with `(kappa, r)`
    /// is used, weighted by `t^{mu-1}` when `mu` is given.
    Eval {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        kappa: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        r: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        kernel: Option<KernelSpec>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        mu: Option<f64>,
        f: FunctionSpec,
        points: Vec<f64>,
        #[serde(default = "default_rel_tol")]
        rel_tol: f64,
    },
    Norm {
        f: FunctionSpec,
        #[serde(with = "crate::extreal::field")]
        p: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        mu: Option<f64>,
    },
    Bounds {
        kappa: f64,
        r: f64,
        p: f64,
        #[serde(default)]
        seed: u64,
        #[serde(default = "default_restarts")]
        restarts: usize,
        #[serde(default = "default_iterations")]
        iterations: usize,
        #[serde(default = "default_bump_samples")]
        bump_samples: usize,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        kernel_checks: Vec<KernelCheck>,
    },
    Sharpness {
        kappa: f64,
        r: f64,
        p_grid: Vec<f64>,
    },
    Scaling {
        kappa: f64,
        r: f64,
        p: f64,
        q_candidates: Vec<f64>,
        #[serde(default = "default_lambda_grid")]
        lambda_grid: Vec<f64>,
        #[serde(default = "default_scaling_f")]
        f: FunctionSpec,
    },
    Weighted {
        kappa: f64,
        r: f64,
        p: f64,
        mu: f64,
        #[serde(default)]
        seed: u64,
        #[serde(default = "default_restarts")]
        restarts: usize,
        #[serde(default = "default_iterations")]
        iterations: usize,
        #[serde(default = "default_bump_samples")]
        bump_samples: usize,
    },
    Gls {
        kappa: f64,
        r: f64,
        f: FunctionSpec,
        psi: PsiFunction,
        #[serde(default = "default_grid_size")]
        grid_size: usize,
    },
    Limit {
        r: f64,
        kappas: Vec<f64>,
        #[serde(default = "default_indicator")]
        f: FunctionSpec,
        points: Vec<f64>,
        #[serde(default = "default_rel_tol")]
        rel_tol: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BatchFile {
    scenario: Vec<Scenario>,
}

fn search_budget(
    seed: u64,
    restarts: usize,
    iterations: usize,
    bump_samples: usize,
) -> SearchBudget {
    SearchBudget {
        restarts,
        iterations,
        bump_samples,
        seed,
        ..SearchBudget::default()
    }
}

fn require_unit_interval_p(p: f64) -> Result<ExponentPair> {
    ExponentPair::new(p)
}

fn require_search_p(p: f64) -> Result<()> {
    if p > MAX_SEARCH_P + 1e-12 {
        return Err(Error::Precondition(format!(
            "quotient search needs p <= {MAX_SEARCH_P}, got {p}"
        )));
    }
    Ok(())
}

impl Scenario {
    pub fn command(&self) -> &'static str {
        match self {
            Scenario::Constants { .. } => "constants",
            Scenario::Eval { .. } => "eval",
            Scenario::Norm { .. } => "norm",
            Scenario::Bounds { .. } => "bounds",
            Scenario::Sharpness { .. } => "sharpness",
            Scenario::Scaling { .. } => "scaling",
            Scenario::Weighted { .. } => "weighted",
            Scenario::Gls { .. } => "gls",
            Scenario::Limit { .. } => "limit",
        }
    }

    /// Search settings of `bounds` and `weighted` scenarios.
    pub fn search_budget(&self) -> Option<SearchBudget> {
        match *self {
            Scenario::Bounds {
                seed,
                restarts,
                iterations,
                bump_samples,
                ..
            }
            | Scenario::Weighted {
                seed,
                restarts,
                iterations,
                bump_samples,
                ..
            } => Some(search_budget(seed, restarts, iterations, bump_samples)),
            _ => None,
        }
    }

    /// Checks every hypothesis the command relies on, so that a bad document
    /// is rejected before any computation starts.
    pub fn validate(&self) -> Result<()> {
        match self {
            Scenario::Constants { kappa, r, p, mu } => {
                let params = TransformParams::new(*kappa, *r)?;
                params.require_upper_bound()?;
                match mu {
                    None => {
                        require_unit_interval_p(*p)?;
                    }
                    Some(mu) => {
                        WeightedExponents::new(*p, *mu)?;
                    }
                }
            }
            Scenario::Eval {
                kappa,
                r,
                kernel,
                mu,
                f,
                points,
                rel_tol,
            } => {
                match (kernel, kappa, r) {
                    (Some(k), None, None) => {
                        k.validate()?;
                        if mu.is_some() {
                            return Err(Error::Scenario(
                                "mu applies only to the (kappa, r) kernel".into(),
                            ));
                        }
                    }
                    (None, Some(kappa), Some(r)) => {
                        TransformParams::new(*kappa, *r)?;
                    }
                    _ => {
                        return Err(Error::Scenario(
                            "eval needs either `kernel` or both `kappa` and `r`".into(),
                        ))
                    }
                }
                if let Some(mu) = mu {
                    if !(*mu > 0.0) || !mu.is_finite() {
                        return Err(Error::Domain(format!("mu > 0 required, got {mu}")));
                    }
                }
                f.validate()?;
                EvalGrid::new(points.clone(), *rel_tol)?;
            }
            Scenario::Norm { f, p, mu } => {
                f.validate()?;
                if !(*p >= 1.0) {
                    return Err(Error::Domain(format!("p >= 1 required, got {p}")));
                }
                if let Some(mu) = mu {
                    if !(*mu > 0.0) || !mu.is_finite() {
                        return Err(Error::Domain(format!("mu > 0 required, got {mu}")));
                    }
                    if !p.is_finite() {
                        return Err(Error::Domain("weighted norm needs a finite p".into()));
                    }
                }
            }
            Scenario::Bounds {
                kappa,
                r,
                p,
                restarts,
                iterations,
                kernel_checks,
                ..
            } => {
                let params = TransformParams::new(*kappa, *r)?;
                params.require_upper_bound()?;
                require_unit_interval_p(*p)?;
                require_search_p(*p)?;
                if *restarts == 0 || *iterations == 0 {
                    return Err(Error::Scenario(
                        "restarts and iterations must be positive".into(),
                    ));
                }
                for c in kernel_checks {
                    c.kernel.validate()?;
                    c.f.validate()?;
                    require_unit_interval_p(c.p)?;
                }
            }
            Scenario::Sharpness { kappa, r, p_grid } => {
                let params = TransformParams::new(*kappa, *r)?;
                params.require_lower_bound()?;
                if p_grid.is_empty() {
                    return Err(Error::Scenario("p_grid is empty".into()));
                }
                if p_grid.windows(2).any(|w| !(w[1] > w[0])) {
                    return Err(Error::Scenario("p_grid must be strictly increasing".into()));
                }
                for &p in p_grid {
                    require_unit_interval_p(p)?;
                    if p >= 2.0 {
                        return Err(Error::Scenario(format!(
                            "p_grid entries must be < 2, where the trial function has infinite norm; got {p}"
                        )));
                    }
                }
            }
            Scenario::Scaling {
                kappa,
                r,
                p,
                q_candidates,
                lambda_grid,
                f,
            } => {
                let params = TransformParams::new(*kappa, *r)?;
                params.require_upper_bound()?;
                require_unit_interval_p(*p)?;
                f.validate()?;
                if q_candidates.is_empty() {
                    return Err(Error::Scenario("q_candidates is empty".into()));
                }
                if q_candidates.iter().any(|&q| !(q > 1.0) || !q.is_finite()) {
                    return Err(Error::Scenario(
                        "q_candidates must be finite and > 1".into(),
                    ));
                }
                if lambda_grid.len() < 2 {
                    return Err(Error::Scenario(
                        "lambda_grid needs at least 2 points".into(),
                    ));
                }
                if lambda_grid.iter().any(|&l| !(l > 0.0) || !l.is_finite()) {
                    return Err(Error::Scenario(
                        "lambda_grid entries must be finite and > 0".into(),
                    ));
                }
            }
            Scenario::Weighted {
                kappa,
                r,
                p,
                mu,
                restarts,
                iterations,
                ..
            } => {
                let params = TransformParams::new(*kappa, *r)?;
                params.require_upper_bound()?;
                WeightedExponents::new(*p, *mu)?;
                if *p > 2.0 / mu + 1e-12 {
                    return Err(Error::Constraint(format!(
                        "p <= 2/mu violated: p = {p}, 2/mu = {}",
                        2.0 / mu
                    )));
                }
                if *mu == 1.0 {
                    require_search_p(*p)?;
                }
                if *restarts == 0 || *iterations == 0 {
                    return Err(Error::Scenario(
                        "restarts and iterations must be positive".into(),
                    ));
                }
            }
            Scenario::Gls {
                kappa,
                r,
                f,
                psi,
                grid_size,
            } => {
                let params = TransformParams::new(*kappa, *r)?;
                params.require_upper_bound()?;
                f.validate()?;
                psi.validate()?;
                if *grid_size < MIN_GRID {
                    return Err(Error::Scenario(format!(
                        "grid_size must be >= {MIN_GRID}, got {grid_size}"
                    )));
                }
            }
            Scenario::Limit {
                r,
                kappas,
                f,
                points,
                rel_tol,
            } => {
                if kappas.is_empty() {
                    return Err(Error::Scenario("kappas is empty".into()));
                }
                if kappas.windows(2).any(|w| !(w[1] > w[0])) {
                    return Err(Error::Scenario("kappas must be strictly increasing".into()));
                }
                for &kappa in kappas {
                    TransformParams::new(kappa, *r)?.require_upper_bound()?;
                }
                f.validate()?;
                EvalGrid::new(points.clone(), *rel_tol)?;
            }
        }
        Ok(())
    }
}

fn looks_like_json(text: &str) -> bool {
    text.trim_start().starts_with('{')
}

/// Parses and validates one scenario. JSON is recognised by a leading `{`;
/// anything else is read as TOML.
pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let s: Scenario = if looks_like_json(text) {
        serde_json::from_str(text).map_err(|e| Error::Scenario(e.to_string()))?
    } else {
        toml::from_str(text).map_err(|e| Error::Scenario(e.to_string()))?
    };
    s.validate()?;
    Ok(s)
}

/// Parses a batch document (`[[scenario]]` tables, or a JSON object with a
/// `scenario` array). A single scenario is accepted as a batch of one.
/// Each scenario is validated; the first failure is reported with its index.
pub fn parse_batch(text: &str) -> Result<Vec<Scenario>> {
    let batch: std::result::Result<BatchFile, String> = if looks_like_json(text) {
        serde_json::from_str(text).map_err(|e| e.to_string())
    } else {
        toml::from_str(text).map_err(|e| e.to_string())
    };
    let scenarios = match batch {
        Ok(b) => b.scenario,
        Err(batch_err) => match parse_scenario(text) {
            Ok(s) => return Ok(vec![s]),
            Err(Error::Scenario(_)) => return Err(Error::Scenario(batch_err)),
            Err(e) => return Err(e),
        },
    };
    if scenarios.is_empty() {
        return Err(Error::Scenario("batch contains no scenarios".into()));
    }
    for (i, s) in scenarios.iter().enumerate() {
        s.validate()
            .map_err(|e| Error::Scenario(format!("scenario {i} ({}): {e}", s.command())))?;
    }
    Ok(scenarios)
}
