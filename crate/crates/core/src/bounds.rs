//! Operator-norm bounds: analytic constants, empirical quotients maximized
//! over trial families, the dilation probe, and the Hölder and
//! Hardy–Mellin inequality checks for product-argument kernels.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::funcspace::{dilate, lp_norm, power_weighted_integral, FunctionSpec};
use crate::optimize::NelderMead;
use crate::specfun::{
    theta_const, trial_lower_bound, weighted_trial_lower_bound, z_const, BoundConstants,
    ExponentPair, ThetaValues, TransformParams, WeightedExponents,
};
use crate::transform::{mellin_zeta, KernelOperator, KernelSpec, DEFAULT_REL_TOL};

/// Largest exponent accepted by the quotient search; the trial function's
/// norm blows up at `p = 2`.
pub const MAX_SEARCH_P: f64 = 1.99;

/// Default relative slack when comparing empirical quotients with analytic bounds.
pub const DEFAULT_ERROR_BUDGET: f64 = 1e-6;

/// `|T f|_q / |f|_p` for the operator `∫ t^{μ-1} K(st) f(t) dt`.
pub fn quotient(
    kernel: &KernelSpec,
    mu: f64,
    p: f64,
    q: f64,
    f: &FunctionSpec,
    rel_tol: f64,
) -> Result<f64> {
    let fp = lp_norm(f, p)?;
    if fp == 0.0 || !fp.is_finite() {
        return Err(Error::Degenerate(format!(
            "|f|_p = {fp}; the quotient needs 0 < |f|_p < inf"
        )));
    }
    let out = KernelOperator::new(*kernel, f, mu)?.output_norm(q, 0.0, rel_tol)?;
    Ok(out.value / fp)
}

/// `|L_{κ,r} f|_q / |f|_p` with `q = p′`.
pub fn ratio(params: &TransformParams, exps: &ExponentPair, f: &FunctionSpec) -> Result<f64> {
    quotient(
        &KernelSpec::Flt(*params),
        1.0,
        exps.p(),
        exps.q(),
        f,
        DEFAULT_REL_TOL,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchBudget {
    pub restarts: usize,
    pub iterations: usize,
    pub bump_samples: usize,
    pub seed: u64,
    /// Quadrature tolerance used while searching; the witness is re-evaluated
    /// at [`DEFAULT_REL_TOL`].
    pub search_rel_tol: f64,
    pub error_budget: f64,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget {
            restarts: 5,
            iterations: 200,
            bump_samples: 50,
            seed: 0,
            search_rel_tol: 1e-8,
            error_budget: DEFAULT_ERROR_BUDGET,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub params: TransformParams,
    pub p: f64,
    /// Output exponent: `p′` unweighted, `Q` weighted.
    #[serde(with = "crate::extreal::field")]
    pub q: f64,
    pub mu: Option<f64>,
    pub constants: BoundConstants,
    pub theta: Option<ThetaValues>,
    /// The analytic upper bound the quotient is checked against.
    pub upper: f64,
    /// The trial-function lower bound, when its hypotheses hold.
    pub lower: Option<f64>,
    pub empirical_ratio: f64,
    pub witness: FunctionSpec,
    pub quadrature_error_budget: f64,
    pub search_converged: bool,
    pub evaluations: usize,
    pub seed: u64,
    pub warnings: Vec<String>,
}

impl BoundReport {
    pub fn lower_holds(&self) -> bool {
        self.lower.map_or(true, |l| {
            l - self.quadrature_error_budget * l.max(1.0) <= self.empirical_ratio
        })
    }

    pub fn upper_holds(&self) -> bool {
        self.empirical_ratio <= self.upper + self.quadrature_error_budget * self.upper.max(1.0)
    }

    pub fn sandwich_holds(&self) -> bool {
        self.lower_holds() && self.upper_holds()
    }
}

#[derive(Debug, Clone)]
struct Candidate {
    ratio: f64,
    /// Tie-break key: family tag followed by the family parameters.
    key: Vec<f64>,
    witness: FunctionSpec,
    converged: bool,
    evaluations: usize,
}

fn better(a: Candidate, b: Candidate) -> Candidate {
    let evaluations = a.evaluations + b.evaluations;
    let converged = a.converged && b.converged;
    let keep_a = match a.ratio.total_cmp(&b.ratio) {
        std::cmp::Ordering::Greater => true,
        std::cmp::Ordering::Less => false,
        std::cmp::Ordering::Equal => a.key <= b.key,
    };
    let winner = if keep_a { a } else { b };
    Candidate {
        evaluations,
        converged,
        ..winner
    }
}

const LN_B_RANGE: (f64, f64) = (-2.302_585_092_994_046, 4.605_170_185_988_092);

/// Maximizes the quotient over power cutoffs `t^{-a} 1_{(0,b)}` with
/// `a ∈ [0, a_max]`, `b ∈ [0.1, 100]`, the fixed trial function, and seeded
/// bump mixtures.
fn search(
    kernel: KernelSpec,
    mu: f64,
    p: f64,
    q: f64,
    a_max: f64,
    trial_a: f64,
    budget: &SearchBudget,
) -> Result<Candidate> {
    let tol = budget.search_rel_tol;
    let objective = |x: &[f64]| -> f64 {
        let (a, ln_b) = (x[0], x[1]);
        if !(0.0..=a_max).contains(&a) || !(LN_B_RANGE.0..=LN_B_RANGE.1).contains(&ln_b) {
            return f64::INFINITY;
        }
        match FunctionSpec::power_cutoff(a, ln_b.exp())
            .and_then(|f| quotient(&kernel, mu, p, q, &f, tol))
        {
            Ok(r) => -r,
            Err(_) => f64::INFINITY,
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(budget.seed);
    let starts: Vec<[f64; 2]> = (0..budget.restarts)
        .map(|_| {
            [
                rng.gen_range(0.0..a_max),
                rng.gen_range(LN_B_RANGE.0..LN_B_RANGE.1),
            ]
        })
        .collect();
    let bump_seeds: Vec<(u64, usize)> = (0..budget.bump_samples)
        .map(|_| (rng.gen::<u64>(), rng.gen_range(1..=4)))
        .collect();
    let nm = NelderMead {
        max_iterations: budget.iterations,
        ftol: 0.1 * tol,
    };
    let restarts = starts.par_iter().map(|start| {
        let step = [0.1 * a_max, 1.0];
        let m = nm.minimize(objective, start, &step);
        let (a, b) = (m.x[0], m.x[1].exp());
        Ok(Candidate {
            ratio: if m.value.is_finite() {
                -m.value
            } else {
                f64::NEG_INFINITY
            },
            key: vec![0.0, a, b],
            witness: FunctionSpec::PowerCutoff { a, b },
            converged: m.converged,
            evaluations: m.evaluations,
        })
    });
    let bumps = bump_seeds.par_iter().map(|&(seed, count)| {
        let f = FunctionSpec::BumpMix {
            seed,
            count,
            nonnegative: false,
        };
        Ok(Candidate {
            ratio: quotient(&kernel, mu, p, q, &f, tol)?,
            key: vec![1.0, seed as f64, count as f64],
            witness: f,
            converged: true,
            evaluations: 1,
        })
    });
    let trial = FunctionSpec::power_cutoff(trial_a, 1.0)?;
    let fixed = Candidate {
        ratio: quotient(&kernel, mu, p, q, &trial, tol)?,
        key: vec![0.0, trial_a, 1.0],
        witness: trial,
        converged: true,
        evaluations: 1,
    };
    let found: Vec<Candidate> = restarts.chain(bumps).collect::<Result<_>>()?;
    Ok(found.into_iter().fold(fixed, better))
}

fn finish(
    kernel: KernelSpec,
    mu: f64,
    p: f64,
    q: f64,
    best: Candidate,
    budget: &SearchBudget,
    mut warnings: Vec<String>,
) -> Result<(f64, FunctionSpec, bool, usize, Vec<String>)> {
    let fp = lp_norm(&best.witness, p)?;
    let out =
        KernelOperator::new(kernel, &best.witness, mu)?.output_norm(q, 0.0, DEFAULT_REL_TOL)?;
    if !out.converged {
        warnings.push(format!(
            "witness output norm error estimate {:.3e} above the requested tolerance",
            out.error / out.value
        ));
    }
    if !best.converged {
        warnings.push("simplex search hit its iteration budget before converging".into());
    }
    if budget.bump_samples == 0 || budget.restarts == 0 {
        warnings.push("search budget excludes part of the candidate families".into());
    }
    Ok((
        out.value / fp,
        best.witness,
        best.converged,
        best.evaluations,
        warnings,
    ))
}

/// Lower estimate of `K_{κ,r}(p, p′)` by quotient maximization, with the
/// analytic sandwich constants attached.
pub fn empirical_norm(
    params: &TransformParams,
    exps: &ExponentPair,
    budget: &SearchBudget,
) -> Result<BoundReport> {
    params.require_upper_bound()?;
    let p = exps.p();
    if p > MAX_SEARCH_P + 1e-12 {
        return Err(Error::Precondition(format!(
            "quotient search needs p <= {MAX_SEARCH_P}, got {p}; trial norms diverge at p = 2"
        )));
    }
    let constants = BoundConstants::unweighted(params, exps)?;
    let kernel = KernelSpec::Flt(*params);
    let a_max = 0.999 / p;
    let best = search(kernel, 1.0, p, exps.q(), a_max, 0.5, budget)?;
    let (empirical_ratio, witness, search_converged, evaluations, warnings) =
        finish(kernel, 1.0, p, exps.q(), best, budget, Vec::new())?;
    Ok(BoundReport {
        params: *params,
        p,
        q: exps.q(),
        mu: None,
        upper: z_const(params, exps)?,
        lower: trial_lower_bound(params, p).ok(),
        constants,
        theta: None,
        empirical_ratio,
        witness,
        quadrature_error_budget: budget.error_budget,
        search_converged,
        evaluations,
        seed: budget.seed,
        warnings,
    })
}

/// Weighted analogue of [`empirical_norm`] for `Ψ` from `L_p` to `L_Q`,
/// `1/Q = μ − 1/p`. The upper bound is the quadrature value of the Young
/// constant; `μ = 1` falls back to the unweighted constant.
pub fn weighted_empirical_norm(
    params: &TransformParams,
    p: f64,
    mu: f64,
    budget: &SearchBudget,
) -> Result<BoundReport> {
    params.require_upper_bound()?;
    if p > 2.0 / mu + 1e-12 {
        return Err(Error::Constraint(format!(
            "p <= 2/mu violated: p = {p}, 2/mu = {}",
            2.0 / mu
        )));
    }
    let ex = WeightedExponents::new(p, mu)?;
    let mut warnings = Vec::new();
    let (q, upper, theta, lower) = if mu == 1.0 {
        let exps = ExponentPair::new(p)?;
        if p > MAX_SEARCH_P + 1e-12 {
            return Err(Error::Precondition(format!(
                "quotient search needs p <= {MAX_SEARCH_P}, got {p}"
            )));
        }
        (
            exps.q(),
            z_const(params, &exps)?,
            None,
            trial_lower_bound(params, p).ok(),
        )
    } else {
        let theta = theta_const(params, p, mu)?;
        let lower = match weighted_trial_lower_bound(params, p, mu) {
            Ok(l) => Some(l),
            Err(e) => {
                warnings.push(format!("weighted lower bound unavailable: {e}"));
                None
            }
        };
        if (theta.as_written - theta.oracle()).abs() > 1e-9 * theta.oracle() {
            warnings.push(format!(
                "Young constant with kappa exponent 1 - sigma/p ({:.12e}) differs from its defining integral ({:.12e})",
                theta.as_written,
                theta.oracle()
            ));
        }
        (ex.big_q(), theta.oracle(), Some(theta), lower)
    };
    let constants = BoundConstants::weighted(params, p, mu)?;
    let kernel = KernelSpec::Flt(*params);
    let a_max = 0.999 * mu.min(1.0 / p);
    let best = search(kernel, mu, p, q, a_max, 0.5 * mu, budget)?;
    let (empirical_ratio, witness, search_converged, evaluations, warnings) =
        finish(kernel, mu, p, q, best, budget, warnings)?;
    Ok(BoundReport {
        params: *params,
        p,
        q,
        mu: Some(mu),
        constants,
        theta,
        upper,
        lower,
        empirical_ratio,
        witness,
        quadrature_error_budget: budget.error_budget,
        search_converged,
        evaluations,
        seed: budget.seed,
        warnings,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalingProbe {
    pub lambda_grid: Vec<f64>,
    pub p: f64,
    pub q_candidates: Vec<f64>,
    pub f: FunctionSpec,
}

impl ScalingProbe {
    /// `n` log-spaced dilations on `[lo, hi]`.
    pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        (0..n)
            .map(|i| (lo.ln() + (hi / lo).ln() * i as f64 / (n - 1).max(1) as f64).exp())
            .collect()
    }
}

/// Tolerance on fitted slopes; also the threshold for calling a slope zero.
pub const SLOPE_TOL: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalingRow {
    pub q: f64,
    pub slope: f64,
    /// `1/p + 1/q − 1`
    pub expected: f64,
    pub conjugate: bool,
    /// `|slope| < SLOPE_TOL`
    pub invariant: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingTable {
    pub rows: Vec<ScalingRow>,
    pub warnings: Vec<String>,
}

/// Least-squares slope of `ln ratio(T_λ f)` against `ln λ` for each
/// candidate `q`. The quotient is dilation invariant exactly when `q = p′`.
pub fn scaling_sweep(probe: &ScalingProbe, params: &TransformParams) -> Result<ScalingTable> {
    let grid = &probe.lambda_grid;
    if grid.len() < 2 {
        return Err(Error::Precondition(
            "slope fit needs at least two dilation factors".into(),
        ));
    }
    if grid.iter().any(|&l| !(l > 0.0) || !l.is_finite()) {
        return Err(Error::Domain("dilation factors must be positive".into()));
    }
    if !(probe.p >= 1.0) || probe.q_candidates.iter().any(|&q| !(q >= 1.0)) {
        return Err(Error::Domain("exponents must be >= 1".into()));
    }
    let mut warnings = Vec::new();
    let (lo, hi) = grid
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(a, b), &l| (a.min(l), b.max(l)));
    if grid.len() < 9 {
        warnings.push(format!(
            "slope fitted from {} points; 9 or more recommended",
            grid.len()
        ));
    }
    if hi / lo < 100.0 {
        warnings.push(format!(
            "dilation grid spans {:.2} decades; two or more recommended",
            (hi / lo).log10()
        ));
    }
    let conj = if probe.p == 1.0 {
        f64::INFINITY
    } else {
        probe.p / (probe.p - 1.0)
    };
    let has_conj = probe
        .q_candidates
        .iter()
        .any(|&q| (q - conj).abs() <= 1e-12 * conj);
    let others = probe.q_candidates.len() - usize::from(has_conj);
    if !has_conj || others < 2 {
        warnings.push("candidates should include p' and at least two other exponents".into());
    }
    let kernel = KernelSpec::Flt(*params);
    let dilated: Vec<FunctionSpec> = grid
        .iter()
        .map(|&l| dilate(&probe.f, l))
        .collect::<Result<_>>()?;
    let rows = probe
        .q_candidates
        .iter()
        .map(|&q| {
            let logs: Vec<(f64, f64)> = grid
                .par_iter()
                .zip(&dilated)
                .map(|(&l, f)| {
                    Ok((
                        l.ln(),
                        quotient(&kernel, 1.0, probe.p, q, f, DEFAULT_REL_TOL)?.ln(),
                    ))
                })
                .collect::<Result<_>>()?;
            let slope = least_squares_slope(&logs);
            let inv_q = if q == f64::INFINITY { 0.0 } else { 1.0 / q };
            Ok(ScalingRow {
                q,
                slope,
                expected: 1.0 / probe.p + inv_q - 1.0,
                conjugate: (q - conj).abs() <= 1e-12 * conj,
                invariant: slope.abs() < SLOPE_TOL,
            })
        })
        .collect::<Result<_>>()?;
    Ok(ScalingTable { rows, warnings })
}

fn least_squares_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SharpnessRow {
    pub p: f64,
    pub ratio: f64,
    pub z: f64,
    pub lower37: f64,
}

/// Quotient of the fixed trial function `t^{-1/2} 1_{(0,1)}` against the
/// sandwich constants across `p_grid`.
pub fn sharpness_profile(params: &TransformParams, p_grid: &[f64]) -> Result<Vec<SharpnessRow>> {
    params.require_lower_bound()?;
    if p_grid.is_empty() {
        return Err(Error::Precondition("empty exponent grid".into()));
    }
    if p_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Precondition(
            "exponent grid must be increasing".into(),
        ));
    }
    if !(p_grid[0] >= 1.0) || !(p_grid[p_grid.len() - 1] < 2.0) {
        return Err(Error::Precondition(
            "exponent grid must lie in [1, 2)".into(),
        ));
    }
    let f0 = FunctionSpec::power_cutoff(0.5, 1.0)?;
    p_grid
        .par_iter()
        .map(|&p| {
            let exps = ExponentPair::new(p)?;
            Ok(SharpnessRow {
                p,
                ratio: ratio(params, &exps, &f0)?,
                z: z_const(params, &exps)?,
                lower37: trial_lower_bound(params, p)?,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HolderCheck {
    /// `max_x x^{1/q} |T f(x)|` over the sample grid.
    pub lhs: f64,
    /// `|K|_q |f|_p`
    pub rhs: f64,
    pub argmax: f64,
}

impl HolderCheck {
    pub fn holds(&self, rel_tol: f64) -> bool {
        self.lhs <= self.rhs * (1.0 + rel_tol)
    }
}

/// Samples `x^{1/q} |T f(x)|` on 200 log-spaced points of `[1e-3, 1e3]`
/// against the Hölder bound `|K|_q |f|_p`.
pub fn holder_sup_bound_check(
    kernel: &KernelSpec,
    f: &FunctionSpec,
    exps: &ExponentPair,
) -> Result<HolderCheck> {
    let kq = kernel.lq_norm(exps.q())?;
    let fp = lp_norm(f, exps.p())?;
    if !fp.is_finite() {
        return Err(Error::Divergence(format!(
            "|f|_p is infinite at p = {}",
            exps.p()
        )));
    }
    let op = KernelOperator::new(*kernel, f, 1.0)?;
    let xs = ScalingProbe::log_grid(1e-3, 1e3, 200);
    let vals: Vec<f64> = xs
        .par_iter()
        .map(|&x| Ok(x.powf(exps.inv_q()) * op.value(x, DEFAULT_REL_TOL)?.abs()))
        .collect::<Result<_>>()?;
    let (i, &lhs) = vals
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1).then(b.0.cmp(&a.0)))
        .expect("nonempty grid");
    Ok(HolderCheck {
        lhs,
        rhs: kq * fp,
        argmax: xs[i],
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MellinCheck {
    pub p: f64,
    /// `|T f|_p^p`
    pub first_lhs: f64,
    /// `∫ x^{p-2} |f|^p dx`
    pub first_weighted_input: f64,
    pub zeta_inv_p: f64,
    /// `lhs / (ζ(1/p) ∫ x^{p-2}|f|^p)`
    pub first_ratio_zeta: f64,
    /// `lhs / (ζ(1/p)^p ∫ x^{p-2}|f|^p)`, the form implied by Mellin convolution
    pub first_ratio_zeta_pow: f64,
    /// `∫ x^{p-2} |T f|^p dx`
    pub second_lhs: f64,
    /// `ζ(1 - 1/p)^p |f|_p^p`
    pub second_rhs: f64,
    pub second_ratio: f64,
}

impl MellinCheck {
    /// Only the second display is asserted.
    pub fn holds(&self, rel_tol: f64) -> bool {
        self.second_ratio <= 1.0 + rel_tol
    }
}

fn safe_ratio(num: f64, den: f64) -> f64 {
    if num == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Both Hardy–Mellin inequalities for a non-negative kernel and a
/// non-negative `f`, evaluated by quadrature.
pub fn mellin_bound_check(kernel: &KernelSpec, f: &FunctionSpec, p: f64) -> Result<MellinCheck> {
    if !kernel.is_nonnegative() {
        return Err(Error::Precondition(
            "Hardy-Mellin bounds need a non-negative kernel".into(),
        ));
    }
    if !f.is_nonnegative() {
        return Err(Error::Precondition(
            "Hardy-Mellin bounds need a non-negative f".into(),
        ));
    }
    if !(p > 1.0) || !p.is_finite() {
        return Err(Error::Domain(format!(
            "Hardy-Mellin bounds need 1 < p < inf, got {p}"
        )));
    }
    let zeta_a = mellin_zeta(kernel, 1.0 / p)?;
    let zeta_b = mellin_zeta(kernel, 1.0 - 1.0 / p)?;
    let weighted_input = power_weighted_integral(f, p - 2.0, p)?;
    let fp = lp_norm(f, p)?.powf(p);
    let op = KernelOperator::new(*kernel, f, 1.0)?;
    let first_lhs = op.output_norm(p, 0.0, DEFAULT_REL_TOL)?.value.powf(p);
    let second_lhs = op.output_norm(p, p - 2.0, DEFAULT_REL_TOL)?.value.powf(p);
    if [weighted_input, fp, first_lhs, second_lhs]
        .iter()
        .any(|v| !v.is_finite())
    {
        return Err(Error::Divergence(
            "a side of the Hardy-Mellin inequalities is infinite".into(),
        ));
    }
    let second_rhs = zeta_b.powf(p) * fp;
    Ok(MellinCheck {
        p,
        first_lhs,
        first_weighted_input: weighted_input,
        zeta_inv_p: zeta_a,
        first_ratio_zeta: safe_ratio(first_lhs, zeta_a * weighted_input),
        first_ratio_zeta_pow: safe_ratio(first_lhs, zeta_a.powf(p) * weighted_input),
        second_lhs,
        second_rhs,
        second_ratio: safe_ratio(second_lhs, second_rhs),
    })
}
