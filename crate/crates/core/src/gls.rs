//! Grand Lebesgue Space norms `‖f‖ = sup_p |f|_p / ψ(p)` and the embedding
//! of the fractional Laplace transform between them.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::funcspace::{critical_exponent, lp_norm, FunctionSpec};
use crate::specfun::{z_const, ExponentPair, TransformParams};
use crate::transform::{KernelOperator, KernelSpec};

/// Exponents above this are not sampled on unbounded supports.
pub const EXPONENT_CAP: f64 = 1e3;

/// Smallest accepted grid refinement.
pub const MIN_GRID: usize = 16;

const OUTPUT_REL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Support {
    pub lo: f64,
    #[serde(with = "crate::extreal::field")]
    pub hi: f64,
}

impl Support {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        let s = Support { lo, hi };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lo >= 1.0) || !self.lo.is_finite() || !(self.hi > self.lo) {
            return Err(Error::Domain(format!(
                "psi support ({}, {}) must satisfy 1 <= A < B <= inf",
                self.lo, self.hi
            )));
        }
        Ok(())
    }

    pub fn contains(&self, p: f64) -> bool {
        p > self.lo && p < self.hi
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PsiDescriptor {
    Constant {
        value: f64,
    },
    /// `coef · p^exponent`
    PowerLaw {
        coef: f64,
        exponent: f64,
    },
    /// Linear interpolation in `p`, constant beyond the end knots.
    Table {
        knots: Vec<f64>,
        values: Vec<f64>,
    },
    /// `ψ(p) = |f|_p`
    NaturalOf {
        f: FunctionSpec,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PsiFunction {
    pub support: Support,
    pub descriptor: PsiDescriptor,
}

impl PsiFunction {
    pub fn new(support: Support, descriptor: PsiDescriptor) -> Result<Self> {
        let psi = PsiFunction {
            support,
            descriptor,
        };
        psi.validate()?;
        Ok(psi)
    }

    pub fn constant(lo: f64, hi: f64, value: f64) -> Result<Self> {
        Self::new(Support::new(lo, hi)?, PsiDescriptor::Constant { value })
    }

    /// Checks the support, the descriptor, and positivity on a dense grid.
    pub fn validate(&self) -> Result<()> {
        self.support.validate()?;
        match &self.descriptor {
            PsiDescriptor::Table { knots, values } => {
                if knots.len() != values.len() || knots.is_empty() {
                    return Err(Error::Domain("psi table needs one value per knot".into()));
                }
                if knots.windows(2).any(|w| !(w[1] > w[0])) {
                    return Err(Error::Domain("psi table knots must be increasing".into()));
                }
            }
            PsiDescriptor::NaturalOf { f } => {
                let crit = critical_exponent(f)?;
                if crit < self.support.hi {
                    return Err(Error::Divergence(format!(
                        "|f|_p is infinite for p >= {crit}, inside the support ({}, {})",
                        self.support.lo, self.support.hi
                    )));
                }
            }
            _ => {}
        }
        let grid = exponent_grid(&self.support, 4 * MIN_GRID);
        for &p in &grid {
            let v = self.eval_unchecked(p)?;
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Domain(format!(
                    "psi must be positive and finite, got psi({p}) = {v}"
                )));
            }
        }
        Ok(())
    }

    /// `ψ(p)` on the open support.
    pub fn eval(&self, p: f64) -> Result<f64> {
        if !self.support.contains(p) {
            return Err(Error::Domain(format!(
                "p = {p} outside the psi support ({}, {})",
                self.support.lo, self.support.hi
            )));
        }
        self.eval_unchecked(p)
    }

    /// The formula extended to any `p >= 1`, used for endpoint limits.
    fn eval_unchecked(&self, p: f64) -> Result<f64> {
        Ok(match &self.descriptor {
            PsiDescriptor::Constant { value } => *value,
            PsiDescriptor::PowerLaw { coef, exponent } => coef * p.powf(*exponent),
            PsiDescriptor::Table { knots, values } => {
                let i = knots.partition_point(|&k| k <= p);
                if i == 0 {
                    values[0]
                } else if i == knots.len() {
                    values[i - 1]
                } else {
                    let t = (p - knots[i - 1]) / (knots[i] - knots[i - 1]);
                    values[i - 1] + t * (values[i] - values[i - 1])
                }
            }
            PsiDescriptor::NaturalOf { f } => lp_norm(f, p)?,
        })
    }

    /// `ψ` restricted to a sub-interval of its support.
    pub fn restrict(&self, lo: f64, hi: f64) -> Result<Self> {
        if lo < self.support.lo || hi > self.support.hi {
            return Err(Error::Domain(
                "restriction must lie inside the support".into(),
            ));
        }
        Ok(PsiFunction {
            support: Support::new(lo, hi)?,
            descriptor: self.descriptor.clone(),
        })
    }
}

/// Nested exponent grid on `(A, B)`: `n - 1` interior points (uniform for
/// finite `B`, geometric up to [`EXPONENT_CAP`] otherwise) plus points at
/// relative offsets `10^{-k}`, `k = 1..6`, from each finite endpoint.
/// The grid for `2n` contains the grid for `n`.
pub fn exponent_grid(support: &Support, n: usize) -> Vec<f64> {
    let (a, b) = (support.lo, support.hi);
    let mut pts = Vec::with_capacity(n + 12);
    if b.is_finite() {
        pts.extend((1..n).map(|j| a + (b - a) * j as f64 / n as f64));
        for k in 1..=6 {
            let d = (b - a) * 10f64.powi(-k);
            pts.push(a + d);
            pts.push(b - d);
        }
    } else {
        let top = EXPONENT_CAP.max(2.0 * a);
        pts.extend((1..=n).map(|j| a * (top / a).powf(j as f64 / n as f64)));
        for k in 1..=6 {
            pts.push(a * (1.0 + 10f64.powi(-k)));
        }
    }
    pts.retain(|&p| support.contains(p));
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

fn check_grid(grid_size: usize) -> Result<()> {
    if grid_size < MIN_GRID {
        Err(Error::Precondition(format!(
            "grid size must be at least {MIN_GRID}, got {grid_size}"
        )))
    } else {
        Ok(())
    }
}

/// `sup_{p ∈ (A,B)} |f|_p / ψ(p)` over the nested grid. Returns `+∞` when
/// `|f|_p` is infinite somewhere in the support, or blows up at `B` while
/// `ψ` stays bounded there.
pub fn gls_norm(f: &FunctionSpec, psi: &PsiFunction, grid_size: usize) -> Result<f64> {
    check_grid(grid_size)?;
    f.validate()?;
    if f.is_zero() {
        return Ok(0.0);
    }
    let crit = critical_exponent(f)?;
    let (a, b) = (psi.support.lo, psi.support.hi);
    if crit < b {
        return Ok(f64::INFINITY);
    }
    if crit == b && b.is_finite() && !matches!(psi.descriptor, PsiDescriptor::NaturalOf { .. }) {
        if psi.eval_unchecked(b)?.is_finite() {
            return Ok(f64::INFINITY);
        }
    }
    debug_assert!(a < crit);
    let grid = exponent_grid(&psi.support, grid_size);
    let quotients: Vec<f64> = grid
        .par_iter()
        .map(|&p| Ok(lp_norm(f, p)? / psi.eval(p)?))
        .collect::<Result<_>>()?;
    Ok(quotients.into_iter().fold(0.0, f64::max))
}

/// `ψ_f(p) = |f|_p` on `support`.
pub fn natural_psi(f: &FunctionSpec, support: Support) -> Result<PsiFunction> {
    support.validate()?;
    let crit = critical_exponent(f)?;
    if crit < support.hi {
        return Err(Error::Divergence(format!(
            "|f|_p is infinite for p >= {crit}, inside ({}, {})",
            support.lo, support.hi
        )));
    }
    PsiFunction::new(support, PsiDescriptor::NaturalOf { f: f.clone() }).map_err(|e| match e {
        Error::Domain(msg) => Error::Degenerate(msg),
        other => other,
    })
}

/// Conjugate exponent `λ(q) = q/(q-1)`, an involution on `[1, ∞]`.
pub fn conjugate(q: f64) -> f64 {
    if q == 1.0 {
        f64::INFINITY
    } else if q == f64::INFINITY {
        1.0
    } else {
        q / (q - 1.0)
    }
}

/// `ν(q) = z_{κ,r}(λ(q)) · ψ(λ(q))` on `(b′, a′)` where
/// `(a, b) = supp ψ ∩ (1, 2)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NuFunction {
    pub base: PsiFunction,
    pub params: TransformParams,
    /// `(a, b)`, the part of the base support inside `(1, 2)`.
    pub restricted: Support,
    /// `(b′, a′)`
    pub support: Support,
}

impl NuFunction {
    pub fn eval(&self, q: f64) -> Result<f64> {
        if !self.support.contains(q) {
            return Err(Error::Domain(format!(
                "q = {q} outside ({}, {})",
                self.support.lo, self.support.hi
            )));
        }
        self.eval_unchecked(q)
    }

    fn eval_unchecked(&self, q: f64) -> Result<f64> {
        let p = conjugate(q);
        let z = z_const(&self.params, &ExponentPair::new(p)?)?;
        Ok(z * self.base.eval_unchecked(p)?)
    }
}

pub fn build_nu(psi: &PsiFunction, params: &TransformParams) -> Result<NuFunction> {
    params.require_upper_bound()?;
    let a = psi.support.lo.max(1.0);
    let b = psi.support.hi.min(2.0);
    if !(a < b) {
        return Err(Error::EmptyIntersection(format!(
            "psi support ({}, {}) does not meet (1, 2)",
            psi.support.lo, psi.support.hi
        )));
    }
    Ok(NuFunction {
        base: psi.clone(),
        params: *params,
        restricted: Support { lo: a, hi: b },
        support: Support {
            lo: conjugate(b),
            hi: conjugate(a),
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EmbeddingCheck {
    /// `‖L f‖` in the space built from `ν`.
    #[serde(with = "crate::extreal::field")]
    pub lhs: f64,
    /// `‖f‖` in the space built from `ψ` restricted to `(a, b)`.
    #[serde(with = "crate::extreal::field")]
    pub rhs: f64,
    pub restricted: Support,
    /// Exponent `q` attaining `lhs`.
    #[serde(with = "crate::extreal::field")]
    pub q_at_max: f64,
}

impl EmbeddingCheck {
    pub fn holds(&self, rel_tol: f64) -> bool {
        self.lhs <= self.rhs * (1.0 + rel_tol)
    }

    /// `lhs / rhs`, the embedding constant seen by this `f`.
    pub fn ratio(&self) -> f64 {
        if self.lhs == 0.0 {
            0.0
        } else {
            self.lhs / self.rhs
        }
    }
}

/// Compares `‖L_{κ,r} f‖_{G(ν)}` with `‖f‖_{G(ψ_{a,b})}`; the transform maps
/// the second space into the first with constant 1. The `q`-grid is the
/// conjugate image of the `p`-grid, so each `q` pairs with a sampled `p`.
pub fn embedding_check(
    f: &FunctionSpec,
    psi: &PsiFunction,
    params: &TransformParams,
    grid_size: usize,
) -> Result<EmbeddingCheck> {
    check_grid(grid_size)?;
    let nu = build_nu(psi, params)?;
    let restricted = psi.restrict(nu.restricted.lo, nu.restricted.hi)?;
    let rhs = gls_norm(f, &restricted, grid_size)?;
    if rhs == 0.0 {
        return Ok(EmbeddingCheck {
            lhs: 0.0,
            rhs,
            restricted: nu.restricted,
            q_at_max: f64::NAN,
        });
    }
    let op = KernelOperator::new(KernelSpec::Flt(*params), f, 1.0)?;
    let mut qs: Vec<f64> = exponent_grid(&nu.restricted, grid_size)
        .into_iter()
        .map(conjugate)
        .filter(|&q| q <= EXPONENT_CAP)
        .collect();
    if nu.restricted.lo == 1.0 {
        qs.push(f64::INFINITY);
    }
    let quotients: Vec<(f64, f64)> = qs
        .par_iter()
        .map(|&q| {
            let out = op.output_norm(q, 0.0, OUTPUT_REL_TOL)?.value;
            Ok((out / nu.eval_unchecked(q)?, q))
        })
        .collect::<Result<_>>()?;
    let (lhs, q_at_max) =
        quotients.into_iter().fold(
            (0.0, f64::NAN),
            |best, c| if c.0 > best.0 { c } else { best },
        );
    Ok(EmbeddingCheck {
        lhs,
        rhs,
        restricted: nu.restricted,
        q_at_max,
    })
}
