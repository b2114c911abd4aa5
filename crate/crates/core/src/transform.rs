//! Product-argument kernel operators `T f(s) = ∫₀^∞ t^{μ-1} K(s t) f(t) dt`
//! on compiled test functions, their Mellin symbols, and L_q norms of the
//! outputs over `s ∈ (0, ∞)`.
//!
//! The fractional Laplace kernel is `K(u) = (1 + u/κ)^{-κ-r}`, so the
//! fractional Laplace transform is this operator with `μ = 1`, and the
//! weighted transform is the same operator with general `μ`.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::funcspace::{Compiled, FunctionSpec, Piece, Shape};
use crate::quad::{self, Integral, Tolerance};
use crate::specfun::{beta, log_gamma, TransformParams};

pub const DEFAULT_REL_TOL: f64 = 1e-10;

/// Largest `ln s` the output-norm engine will reach before giving up on
/// tail convergence.
const LN_S_CAP: f64 = 690.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case", deny_unknown_fields)]
pub enum CustomKernel {
    /// `e^{-u²}`
    Gaussian,
    /// `e^{-u} cos(ω u)`; changes sign, so it is excluded from the
    /// non-negative-kernel checks.
    DampedCosine { omega: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KernelSpec {
    /// `(1 + u/κ)^{-κ-r}`
    Flt(TransformParams),
    /// `e^{-u}`
    Exp,
    Custom(CustomKernel),
}

impl KernelSpec {
    pub fn flt(kappa: f64, r: f64) -> Result<Self> {
        Ok(KernelSpec::Flt(TransformParams::new(kappa, r)?))
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            KernelSpec::Flt(p) => TransformParams::new(p.kappa, p.r).map(|_| ()),
            KernelSpec::Custom(CustomKernel::DampedCosine { omega }) if !omega.is_finite() => Err(
                Error::Domain("damped cosine frequency must be finite".into()),
            ),
            _ => Ok(()),
        }
    }

    pub fn eval(&self, u: f64) -> f64 {
        match self {
            KernelSpec::Flt(p) => p.kernel(u),
            KernelSpec::Exp => (-u).exp(),
            KernelSpec::Custom(CustomKernel::Gaussian) => (-u * u).exp(),
            KernelSpec::Custom(CustomKernel::DampedCosine { omega }) => {
                (-u).exp() * (omega * u).cos()
            }
        }
    }

    /// Argument scale where the kernel leaves its plateau.
    pub fn scale(&self) -> f64 {
        match self {
            KernelSpec::Flt(p) => p.kappa,
            _ => 1.0,
        }
    }

    /// `α` with `K(u) ~ u^{-α}` at infinity; `+∞` for faster-than-algebraic decay.
    pub fn decay_exponent(&self) -> f64 {
        match self {
            KernelSpec::Flt(p) => p.order(),
            _ => f64::INFINITY,
        }
    }

    pub fn is_nonnegative(&self) -> bool {
        !matches!(self, KernelSpec::Custom(CustomKernel::DampedCosine { .. }))
    }

    /// Open strip of `σ` on which the Mellin transform converges absolutely.
    pub fn mellin_strip(&self) -> (f64, f64) {
        (0.0, self.decay_exponent())
    }

    fn check_strip(&self, sigma: f64) -> Result<()> {
        let (lo, hi) = self.mellin_strip();
        if sigma > lo && sigma < hi {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "Mellin argument {sigma} outside the convergence strip ({lo}, {hi})"
            )))
        }
    }

    /// `|K|_q` over `(0, ∞)`.
    pub fn lq_norm(&self, q: f64) -> Result<f64> {
        if !(q >= 1.0) {
            return Err(Error::Domain(format!("kernel norm needs q >= 1, got {q}")));
        }
        if q == f64::INFINITY {
            return Ok(1.0);
        }
        let integral = match self {
            KernelSpec::Flt(p) => {
                let mq = p.order() * q;
                if mq <= 1.0 {
                    return Err(Error::Divergence(format!(
                        "kernel L_q norm needs q(kappa + r) > 1, got {mq}"
                    )));
                }
                p.kappa / (mq - 1.0)
            }
            KernelSpec::Exp => 1.0 / q,
            KernelSpec::Custom(CustomKernel::Gaussian) => 0.5 * (std::f64::consts::PI / q).sqrt(),
            KernelSpec::Custom(CustomKernel::DampedCosine { .. }) => {
                let k = *self;
                let hi = 800.0 / q;
                quad::adaptive(
                    |u: f64| k.eval(u).abs().powf(q),
                    &quad::partition(0.0, hi, 0.25),
                    Tolerance::relative(1e-13),
                    20_000,
                )
                .value
            }
        };
        Ok(integral.powf(1.0 / q))
    }
}

/// `ζ(σ) = ∫₀^∞ x^{σ-1} K(x) dx` in closed form.
pub fn mellin_zeta(kernel: &KernelSpec, sigma: f64) -> Result<f64> {
    kernel.validate()?;
    kernel.check_strip(sigma)?;
    match kernel {
        KernelSpec::Flt(p) => Ok(p.kappa.powf(sigma) * beta(sigma, p.order() - sigma)?),
        KernelSpec::Exp => Ok(log_gamma(sigma)?.exp()),
        KernelSpec::Custom(CustomKernel::Gaussian) => Ok(0.5 * log_gamma(0.5 * sigma)?.exp()),
        KernelSpec::Custom(CustomKernel::DampedCosine { omega }) => {
            // Re Γ(σ)(1 - iω)^{-σ}
            let g = log_gamma(sigma)?.exp();
            Ok(g * (1.0 + omega * omega).powf(-0.5 * sigma) * (sigma * omega.atan()).cos())
        }
    }
}

/// Same quantity as [`mellin_zeta`], by direct quadrature of the defining
/// integral. Returns `ToleranceNotMet` when the estimate misses `rel_tol`.
pub fn mellin_zeta_by_quadrature(kernel: &KernelSpec, sigma: f64, rel_tol: f64) -> Result<f64> {
    kernel.validate()?;
    kernel.check_strip(sigma)?;
    let k = *kernel;
    let tol = Tolerance::relative(rel_tol);
    let r = match kernel {
        KernelSpec::Custom(CustomKernel::DampedCosine { .. }) => {
            // oscillatory, exponentially decaying: singular head plus panels
            let head = quad::tanh_sinh(|x: f64| x.powf(sigma - 1.0) * k.eval(x), 0.0, 1.0, tol);
            let body = quad::adaptive(
                |x: f64| x.powf(sigma - 1.0) * k.eval(x),
                &quad::partition(1.0, 60.0 + 40.0 * sigma, 0.25),
                tol,
                20_000,
            );
            head.add(body)
        }
        _ => quad::half_line(|x: f64| x.powf(sigma - 1.0) * k.eval(x), k.scale(), tol),
    };
    check_converged(r, rel_tol).map(|r| r.value)
}

fn check_converged(r: Integral, rel_tol: f64) -> Result<Integral> {
    if r.converged {
        Ok(r)
    } else {
        Err(Error::ToleranceNotMet {
            requested: rel_tol,
            achieved: r.error / r.value.abs().max(f64::MIN_POSITIVE),
        })
    }
}

/// Estimate of an output norm `[∫₀^∞ s^β |T f(s)|^q ds]^{1/q}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormEstimate {
    #[serde(with = "crate::extreal::field")]
    pub value: f64,
    /// Absolute error estimate on `value`.
    pub error: f64,
    pub converged: bool,
    /// Decay exponent `α` of the output, `|T f(s)| ~ C s^{-α}`.
    #[serde(with = "crate::extreal::field")]
    pub tail_exponent: f64,
}

impl NormEstimate {
    fn exact(value: f64, tail_exponent: f64) -> Self {
        NormEstimate {
            value,
            error: 0.0,
            converged: true,
            tail_exponent,
        }
    }
}

/// A kernel operator bound to one test function and one weight exponent.
#[derive(Debug, Clone)]
pub struct KernelOperator {
    kernel: KernelSpec,
    /// `μ - 1`
    weight: f64,
    f: Compiled,
}

impl KernelOperator {
    /// `T f(s) = ∫₀^∞ t^{μ-1} K(st) f(t) dt`. Fails when the integral
    /// diverges at the origin, i.e. when `t^{μ-1} f(t)` is not integrable there.
    pub fn new(kernel: KernelSpec, f: &FunctionSpec, mu: f64) -> Result<Self> {
        kernel.validate()?;
        f.validate()?;
        if !(mu > 0.0 && mu <= 1.0) {
            return Err(Error::Domain(format!(
                "weight exponent needs 0 < mu <= 1, got {mu}"
            )));
        }
        let op = KernelOperator {
            kernel,
            weight: mu - 1.0,
            f: f.compile(),
        };
        if let Some(ea) = op.origin_exponent() {
            if ea >= 1.0 {
                return Err(Error::Divergence(format!(
                    "t^(mu-1) f(t) behaves like t^(-{ea}) at 0, not integrable"
                )));
            }
        }
        Ok(op)
    }

    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }

    /// Effective power `e` with `t^{μ-1} f(t) ~ c t^{-e}` at the origin.
    fn origin_exponent(&self) -> Option<f64> {
        self.f
            .pieces
            .iter()
            .filter_map(|p| p.origin_power())
            .map(|(_, a)| a - self.weight)
            .reduce(f64::max)
    }

    /// Exponent `α` with `|T f(s)| ~ C s^{-α}` as `s → ∞`.
    pub fn tail_exponent(&self) -> f64 {
        let from_f = self.origin_exponent().map_or(f64::INFINITY, |ea| 1.0 - ea);
        from_f.min(self.kernel.decay_exponent())
    }

    pub fn is_zero(&self) -> bool {
        self.f.is_zero()
    }

    /// `T f(s)` with quadrature error estimate.
    pub fn eval(&self, s: f64, rel_tol: f64) -> Result<Integral> {
        if !(s >= 0.0) || !s.is_finite() {
            return Err(Error::Domain(format!(
                "evaluation point must be finite and >= 0, got {s}"
            )));
        }
        // the absolute floor is shared between pieces
        let tol = Tolerance {
            rel: rel_tol,
            abs: quad::ABS_FLOOR / self.f.pieces.len().max(1) as f64,
        };
        let mut total = Integral::ZERO;
        let mut magnitude = 0.0;
        for piece in &self.f.pieces {
            let r = self.piece_integral(piece, s, tol);
            magnitude += r.value.abs();
            total = total.add(r);
        }
        total.converged = total.error <= quad::ABS_FLOOR + rel_tol * magnitude;
        Ok(total)
    }

    /// [`Self::eval`], failing with `ToleranceNotMet` instead of returning an
    /// unconverged estimate.
    pub fn value(&self, s: f64, rel_tol: f64) -> Result<f64> {
        let r = self.eval(s, rel_tol)?;
        if r.converged {
            Ok(r.value)
        } else {
            Err(Error::ToleranceNotMet {
                requested: rel_tol,
                achieved: r.error / r.value.abs().max(f64::MIN_POSITIVE),
            })
        }
    }

    fn piece_integral(&self, piece: &Piece, s: f64, tol: Tolerance) -> Integral {
        let k = self.kernel;
        let turn = if s > 0.0 {
            k.scale() / s
        } else {
            f64::INFINITY
        };
        let w = self.weight;
        match (piece.origin_power(), piece.shape) {
            (Some((coef, a)), _) => {
                // ∫₀^hi c t^{-e} K(st) dt with t = y^{1/β}, β = 1 - e.
                let b = 1.0 - (a - w);
                let inv_b = 1.0 / b;
                let y_hi = piece.hi.powf(b);
                let mut pts = vec![0.0];
                pts.extend(
                    geometric_breaks(turn, 0.0, piece.hi)
                        .into_iter()
                        .map(|t| t.powf(b)),
                );
                pts.push(y_hi);
                pts.dedup();
                quad::adaptive(|y: f64| k.eval(s * y.powf(inv_b)), &pts, tol, 4000)
                    .scale(coef * inv_b)
            }
            (None, Shape::Power { coef: 0.0, .. }) => Integral::ZERO,
            _ => {
                let mut pts = vec![piece.lo];
                pts.extend(geometric_breaks(turn, piece.lo, piece.hi));
                if let Shape::Bump { center, .. } = piece.shape {
                    pts.push(center);
                    pts.sort_by(f64::total_cmp);
                }
                pts.push(piece.hi);
                pts.dedup();
                let weighted = w != 0.0;
                quad::adaptive(
                    |t: f64| {
                        let v = k.eval(s * t) * piece.value(t);
                        if weighted {
                            v * t.powf(w)
                        } else {
                            v
                        }
                    },
                    &pts,
                    tol,
                    4000,
                )
            }
        }
    }

    /// `[∫₀^∞ s^β |T f(s)|^q ds]^{1/q}`, or the sup norm for `q = ∞` (then
    /// `β` must be 0). Returns a `+∞` value when the integral diverges.
    pub fn output_norm(&self, q: f64, beta: f64, rel_tol: f64) -> Result<NormEstimate> {
        if !(q >= 1.0) {
            return Err(Error::Domain(format!("output norm needs q >= 1, got {q}")));
        }
        let alpha = self.tail_exponent();
        if self.is_zero() {
            return Ok(NormEstimate::exact(0.0, alpha));
        }
        if q == f64::INFINITY {
            if beta != 0.0 {
                return Err(Error::Domain("sup norm takes no power weight".into()));
            }
            return self.sup_norm(rel_tol);
        }
        let inner_tol = (0.1 * rel_tol).max(1e-13);
        let mut engine = NormEngine {
            op: self,
            q,
            beta,
            inner_tol,
            cache: HashMap::new(),
            worst_rel_error: 0.0,
        };
        let g0 = self.eval(0.0, inner_tol)?.value;
        if beta <= -1.0 && g0 != 0.0 {
            return Ok(NormEstimate::exact(f64::INFINITY, alpha));
        }
        let gamma = q * alpha - 1.0 - beta;
        if gamma <= 0.0 {
            return Ok(NormEstimate::exact(f64::INFINITY, alpha));
        }
        let ustar = self.kernel.scale();
        let s_lo = 1e-9 * ustar / self.f.support_hi();
        let s_start = 1e3 * ustar / self.f.inner_scale();
        let (u_lo, mut u_hi) = (s_lo.ln(), s_start.ln().max(s_lo.ln() + 1.0));

        // Log-domain normalization: shift by the largest sampled log-integrand.
        let probe = quad::partition(u_lo, u_hi, 1.0);
        let mut shift = f64::NEG_INFINITY;
        for &u in &probe {
            shift = shift.max(engine.log_integrand(u));
        }
        if g0 != 0.0 {
            shift = shift.max((beta + 1.0) * u_lo + q * g0.abs().ln());
        }
        if !shift.is_finite() {
            return Ok(NormEstimate::exact(0.0, alpha));
        }
        let tol = Tolerance {
            rel: rel_tol,
            abs: 0.0,
        };
        let lower = if g0 == 0.0 {
            0.0
        } else {
            ((beta + 1.0) * u_lo + q * g0.abs().ln() - shift).exp() / (beta + 1.0)
        };
        let mut main = engine.integrate(u_lo, u_hi, shift, tol);
        let step = 100f64.ln();
        let tail_error;
        let tail;
        if alpha.is_finite() {
            loop {
                let g_hi = engine.g(u_hi.exp());
                let g_prev = engine.g((u_hi - step).exp());
                let (ln_c, ln_c_prev) = (
                    g_hi.abs().ln() + alpha * u_hi,
                    g_prev.abs().ln() + alpha * (u_hi - step),
                );
                let t = if g_hi == 0.0 {
                    0.0
                } else {
                    (q * ln_c - gamma * u_hi - shift).exp() / gamma
                };
                let drift = if g_hi == 0.0 || g_prev == 0.0 {
                    0.0
                } else {
                    q * ((ln_c - ln_c_prev).exp() - 1.0).abs()
                };
                let total = main.value + lower + t;
                if t * drift <= rel_tol * total || u_hi + step > LN_S_CAP {
                    tail = t;
                    tail_error = t * drift;
                    break;
                }
                main = main.add(engine.integrate(u_hi, u_hi + step, shift, tol));
                u_hi += step;
            }
        } else {
            loop {
                let extra = engine.integrate(u_hi, u_hi + step, shift, tol);
                main = main.add(extra);
                u_hi += step;
                if extra.value.abs() <= 0.01 * rel_tol * (main.value + lower)
                    || u_hi + step > LN_S_CAP
                {
                    tail = 0.0;
                    tail_error = extra.value.abs();
                    break;
                }
            }
        }
        let integral = main.value + lower + tail;
        let quad_error = main.error + tail_error + integral * q * engine.worst_rel_error;
        let value = ((shift + integral.ln()) / q).exp();
        // d(I^{1/q}) = I^{1/q-1}/q dI
        let error = value * quad_error / (q * integral);
        Ok(NormEstimate {
            value,
            error,
            converged: error <= rel_tol * value.max(f64::MIN_POSITIVE) * 10.0,
            tail_exponent: alpha,
        })
    }

    fn sup_norm(&self, rel_tol: f64) -> Result<NormEstimate> {
        let alpha = self.tail_exponent();
        let ustar = self.kernel.scale();
        let s_lo = 1e-9 * ustar / self.f.support_hi();
        let s_hi = 1e9 * ustar / self.f.inner_scale();
        let n = 400;
        let inner_tol = (0.1 * rel_tol).max(1e-13);
        let us: Vec<f64> = (0..=n)
            .map(|i| s_lo.ln() + (s_hi / s_lo).ln() * i as f64 / n as f64)
            .collect();
        let vals: Vec<f64> = us
            .par_iter()
            .map(|&u| self.eval(u.exp(), inner_tol).map(|r| r.value.abs()))
            .collect::<Result<_>>()?;
        let g0 = self.eval(0.0, inner_tol)?.value.abs();
        let (i_best, &v_best) = vals
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1).then(b.0.cmp(&a.0)))
            .expect("nonempty grid");
        let mut best = v_best.max(g0);
        if v_best > g0 && i_best > 0 && i_best < n {
            let refined = golden_max(
                |u| self.eval(u.exp(), inner_tol).map_or(0.0, |r| r.value.abs()),
                us[i_best - 1],
                us[i_best + 1],
                60,
            );
            best = best.max(refined);
        }
        Ok(NormEstimate {
            value: best,
            error: best * rel_tol,
            converged: true,
            tail_exponent: alpha,
        })
    }
}

/// Breakpoints `turn · 10^k` inside `(lo, hi)`.
fn geometric_breaks(turn: f64, lo: f64, hi: f64) -> Vec<f64> {
    if !turn.is_finite() {
        return Vec::new();
    }
    (-3..=40)
        .map(|k| turn * 10f64.powi(k))
        .filter(|&t| t > lo && t < hi)
        .collect()
}

fn golden_max<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, iters: usize) -> f64 {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    let mut best = fc.max(fd);
    for _ in 0..iters {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
        best = best.max(fc).max(fd);
    }
    best
}

struct NormEngine<'a> {
    op: &'a KernelOperator,
    q: f64,
    beta: f64,
    inner_tol: f64,
    cache: HashMap<u64, f64>,
    worst_rel_error: f64,
}

impl NormEngine<'_> {
    fn g(&mut self, s: f64) -> f64 {
        if let Some(&v) = self.cache.get(&s.to_bits()) {
            return v;
        }
        let r = self
            .op
            .eval(s, self.inner_tol)
            .expect("evaluation points are finite and nonnegative");
        if r.value != 0.0 {
            self.worst_rel_error = self.worst_rel_error.max((r.error / r.value.abs()).min(1.0));
        }
        self.cache.insert(s.to_bits(), r.value);
        r.value
    }

    /// `ln(s^{β+1} |g(s)|^q)` at `s = e^u`.
    fn log_integrand(&mut self, u: f64) -> f64 {
        let g = self.g(u.exp());
        (self.beta + 1.0) * u + self.q * g.abs().ln()
    }

    fn integrate(&mut self, a: f64, b: f64, shift: f64, tol: Tolerance) -> Integral {
        let pts = quad::partition(a, b, 1.0);
        quad::adaptive(|u| (self.log_integrand(u) - shift).exp(), &pts, tol, 4000)
    }
}

/// `∫₀^∞ (1 + st/κ)^{-κ-r} f(t) dt`.
pub fn flt_eval(params: &TransformParams, f: &FunctionSpec, s: f64, rel_tol: f64) -> Result<f64> {
    KernelOperator::new(KernelSpec::Flt(*params), f, 1.0)?.value(s, rel_tol)
}

/// `∫₀^∞ e^{-st} f(t) dt`.
pub fn laplace_eval(f: &FunctionSpec, s: f64, rel_tol: f64) -> Result<f64> {
    KernelOperator::new(KernelSpec::Exp, f, 1.0)?.value(s, rel_tol)
}

/// `∫₀^∞ t^{μ-1} (1 + ts/κ)^{-κ-r} f(t) dt`, `0 < μ ≤ 1`.
pub fn weighted_psi_eval(
    params: &TransformParams,
    mu: f64,
    f: &FunctionSpec,
    s: f64,
    rel_tol: f64,
) -> Result<f64> {
    KernelOperator::new(KernelSpec::Flt(*params), f, mu)?.value(s, rel_tol)
}

/// `∫₀^∞ K(x y) f(y) dy`.
pub fn generic_kernel_eval(
    kernel: &KernelSpec,
    f: &FunctionSpec,
    x: f64,
    rel_tol: f64,
) -> Result<f64> {
    KernelOperator::new(*kernel, f, 1.0)?.value(x, rel_tol)
}

/// Gap `|L_{κ,r} f(s) − L f(s)|` for each `κ`, with `r` fixed.
pub fn flt_limit_check(
    kappas: &[f64],
    r: f64,
    f: &FunctionSpec,
    s: f64,
    rel_tol: f64,
) -> Result<Vec<(f64, f64)>> {
    if kappas.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Domain("kappa sequence must be increasing".into()));
    }
    let laplace = laplace_eval(f, s, rel_tol)?;
    kappas
        .iter()
        .map(|&kappa| {
            let params = TransformParams::new(kappa, r)?;
            params.require_upper_bound()?;
            Ok((kappa, (flt_eval(&params, f, s, rel_tol)? - laplace).abs()))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalGrid {
    pub points: Vec<f64>,
    #[serde(default = "default_rel_tol")]
    pub rel_tol: f64,
}

fn default_rel_tol() -> f64 {
    DEFAULT_REL_TOL
}

impl EvalGrid {
    pub fn new(points: Vec<f64>, rel_tol: f64) -> Result<Self> {
        let g = EvalGrid { points, rel_tol };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.points.is_empty() {
            return Err(Error::Domain("evaluation grid is empty".into()));
        }
        if self.points.iter().any(|&s| !(s >= 0.0) || !s.is_finite()) {
            return Err(Error::Domain(
                "evaluation points must be finite and >= 0".into(),
            ));
        }
        if self.points.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Domain(
                "evaluation points must be strictly increasing".into(),
            ));
        }
        if !(self.rel_tol > 0.0) {
            return Err(Error::Domain("rel_tol must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvalPoint {
    pub s: f64,
    pub value: f64,
    pub error: f64,
}

/// Evaluates the operator at every grid point, in parallel; output order
/// follows the grid.
pub fn evaluate_grid(op: &KernelOperator, grid: &EvalGrid) -> Result<Vec<EvalPoint>> {
    grid.validate()?;
    grid.points
        .par_iter()
        .map(|&s| {
            let r = check_converged(op.eval(s, grid.rel_tol)?, grid.rel_tol)?;
            Ok(EvalPoint {
                s,
                value: r.value,
                error: r.error,
            })
        })
        .collect()
}
