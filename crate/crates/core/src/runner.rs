//! Executes scenarios and assembles their reports.

use std::time::Instant;

use serde_json::Value;

use crate::bounds::{
    empirical_norm, holder_sup_bound_check, mellin_bound_check, scaling_sweep, sharpness_profile,
    weighted_empirical_norm, BoundReport, ScalingProbe, SLOPE_TOL,
};
use crate::error::{Error, Result};
use crate::funcspace::{critical_exponent, lp_norm, lp_norm_by_quadrature, weighted_lp_norm};
use crate::gls::embedding_check;
use crate::quad::{self, Tolerance};
use crate::report::{Cell, Provenance, Report, Table};
use crate::scenario::{KernelCheck, Scenario};
use crate::specfun::{
    theta_const, trial_lower_bound, v_const, w_const, weighted_trial_lower_bound, y_const, z_const,
    ExponentPair, TransformParams, WeightedExponents,
};
use crate::transform::{evaluate_grid, flt_limit_check, EvalGrid, KernelOperator, KernelSpec};

/// Relative agreement required between a closed form and its quadrature.
const AGREEMENT_TOL: f64 = 1e-8;
const EMBEDDING_TOL: f64 = 1e-6;
const LIMIT_GAP: f64 = 1e-4;

fn agree(a: f64, b: f64) -> bool {
    (a - b).abs() <= AGREEMENT_TOL * a.abs().max(b.abs())
}

fn agreement(report: &mut Report, name: &str, closed: f64, oracle: f64) {
    report.check(
        name,
        agree(closed, oracle),
        format!(
            "closed form {closed:.15e} vs quadrature {oracle:.15e} (rel. diff {:.2e})",
            (closed - oracle).abs() / closed.abs().max(f64::MIN_POSITIVE)
        ),
    );
}

fn v_by_quadrature(params: &TransformParams) -> f64 {
    let m = params.order();
    quad::half_line(
        |x: f64| x.powf(-0.5) * (-m * x.ln_1p()).exp(),
        1.0,
        Tolerance::relative(1e-13),
    )
    .value
}

fn y_by_quadrature(params: &TransformParams) -> f64 {
    quad::tanh_sinh(
        |z: f64| params.kernel(z),
        0.0,
        1.0,
        Tolerance::relative(1e-13),
    )
    .value
}

/// Runs one scenario. Failures become error reports rather than panics.
pub fn run(scenario: &Scenario) -> Report {
    let start = Instant::now();
    let echo = serde_json::to_value(scenario).unwrap_or(Value::Null);
    let mut report = match scenario
        .validate()
        .and_then(|_| dispatch(scenario, echo.clone()))
    {
        Ok(r) => r,
        Err(e) => Report::failed(scenario.command(), echo, &e),
    };
    report.wall_time = Some(start.elapsed());
    report
}

/// Runs scenarios in order; each report is independent of the others.
pub fn run_batch(scenarios: &[Scenario]) -> Vec<Report> {
    scenarios.iter().map(run).collect()
}

fn dispatch(scenario: &Scenario, echo: Value) -> Result<Report> {
    let mut report = Report::new(scenario.command(), echo);
    match scenario {
        Scenario::Constants { kappa, r, p, mu } => constants(&mut report, *kappa, *r, *p, *mu)?,
        Scenario::Eval {
            kappa,
            r,
            kernel,
            mu,
            f,
            points,
            rel_tol,
        } => {
            let kernel = match kernel {
                Some(k) => *k,
                None => KernelSpec::flt(kappa.unwrap_or(f64::NAN), r.unwrap_or(f64::NAN))?,
            };
            let op = KernelOperator::new(kernel, f, mu.unwrap_or(1.0))?;
            let values = evaluate_grid(&op, &EvalGrid::new(points.clone(), *rel_tol)?)?;
            let mut t = Table::new("values", &["s", "value", "error"]);
            for v in values {
                t.push(vec![v.s.into(), v.value.into(), v.error.into()]);
            }
            report.tables.push(t);
        }
        Scenario::Norm { f, p, mu } => {
            let value = lp_norm(f, *p)?;
            report.quantity("norm", value, Provenance::ClosedForm("piecewise-lp-norm"));
            report.quantity(
                "critical_exponent",
                critical_exponent(f)?,
                Provenance::ClosedForm("origin-singularity"),
            );
            if p.is_finite() && value.is_finite() {
                let oracle = lp_norm_by_quadrature(f, *p)?;
                report.quantity("norm", oracle, Provenance::Oracle);
                agreement(&mut report, "norm agreement", value, oracle);
            }
            if let Some(mu) = mu {
                report.quantity(
                    "weighted_norm",
                    weighted_lp_norm(f, *mu, *p)?,
                    Provenance::ClosedForm("power-weighted-lp-norm"),
                );
            }
        }
        Scenario::Bounds {
            kappa,
            r,
            p,
            kernel_checks,
            ..
        } => {
            let params = TransformParams::new(*kappa, *r)?;
            let exps = ExponentPair::new(*p)?;
            let budget = scenario.search_budget().expect("bounds carries a budget");
            let b = empirical_norm(&params, &exps, &budget)?;
            bound_report(&mut report, &b)?;
            if !kernel_checks.is_empty() {
                kernel_check_tables(&mut report, kernel_checks)?;
            }
        }
        Scenario::Sharpness { kappa, r, p_grid } => {
            let params = TransformParams::new(*kappa, *r)?;
            let rows = sharpness_profile(&params, p_grid)?;
            let mut t = Table::new("profile", &["p", "ratio", "z", "lower37"]);
            for row in &rows {
                t.push(vec![
                    row.p.into(),
                    row.ratio.into(),
                    row.z.into(),
                    row.lower37.into(),
                ]);
                report.check(
                    &format!("sandwich at p = {}", row.p),
                    row.lower37 <= row.ratio * (1.0 + 1e-9) && row.ratio <= row.z * (1.0 + 1e-9),
                    format!(
                        "{:.10e} <= {:.10e} <= {:.10e}",
                        row.lower37, row.ratio, row.z
                    ),
                );
            }
            report.tables.push(t);
            let upper_half: Vec<f64> = rows
                .iter()
                .filter(|r| r.p >= 1.5)
                .map(|r| r.ratio / r.z)
                .collect();
            if upper_half.len() >= 2 {
                let monotone = upper_half.windows(2).all(|w| w[1] >= w[0]);
                report.observe(
                    "ratio/z nondecreasing for p >= 1.5",
                    monotone,
                    format!("{upper_half:.6?}"),
                );
            }
            if let Some(last) = rows.last() {
                report.quantity(
                    "ratio_over_z_at_last_p",
                    last.ratio / last.z,
                    Provenance::Empirical,
                );
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
            let probe = ScalingProbe {
                lambda_grid: lambda_grid.clone(),
                p: *p,
                q_candidates: q_candidates.clone(),
                f: f.clone(),
            };
            let table = scaling_sweep(&probe, &params)?;
            let mut t = Table::new(
                "slopes",
                &["q", "slope", "expected", "conjugate", "invariant"],
            );
            for row in &table.rows {
                t.push(vec![
                    row.q.into(),
                    row.slope.into(),
                    row.expected.into(),
                    row.conjugate.into(),
                    row.invariant.into(),
                ]);
                report.check(
                    &format!("slope at q = {}", row.q),
                    (row.slope - row.expected).abs() < SLOPE_TOL,
                    format!(
                        "fitted {:.6e}, expected 1/p + 1/q - 1 = {:.6e}",
                        row.slope, row.expected
                    ),
                );
                report.check(
                    &format!("invariance at q = {}", row.q),
                    row.invariant == row.conjugate,
                    format!(
                        "invariant = {}, conjugate = {}",
                        row.invariant, row.conjugate
                    ),
                );
            }
            report.tables.push(t);
            report.warnings.extend(table.warnings);
        }
        Scenario::Weighted {
            kappa, r, p, mu, ..
        } => {
            let params = TransformParams::new(*kappa, *r)?;
            let budget = scenario.search_budget().expect("weighted carries a budget");
            let b = weighted_empirical_norm(&params, *p, *mu, &budget)?;
            let ex = WeightedExponents::new(*p, *mu)?;
            report.quantity("Q", ex.big_q(), Provenance::ClosedForm("output-exponent"));
            report.quantity(
                "sigma",
                ex.sigma(),
                Provenance::ClosedForm("young-exponent"),
            );
            if let Some(t) = &b.theta {
                report.quantity(
                    "theta_as_written",
                    t.as_written,
                    Provenance::ClosedForm("young-constant-variant"),
                );
                report.quantity(
                    "M",
                    t.m_half_line_closed_form,
                    Provenance::ClosedForm("young-constant"),
                );
                report.quantity("M", t.m_half_line_quadrature, Provenance::Oracle);
                report.quantity("M_full_line", t.m_full_line_quadrature, Provenance::Oracle);
                report.notes.push(
                    "the upper bound uses the half-line Young constant M; the full-line integral is 2^(1/sigma) times larger"
                        .into(),
                );
            }
            bound_report(&mut report, &b)?;
        }
        Scenario::Gls {
            kappa,
            r,
            f,
            psi,
            grid_size,
        } => {
            let params = TransformParams::new(*kappa, *r)?;
            let c = embedding_check(f, psi, &params, *grid_size)?;
            report.quantity("lhs", c.lhs, Provenance::Empirical);
            report.quantity("rhs", c.rhs, Provenance::Empirical);
            report.quantity("ratio", c.ratio(), Provenance::Empirical);
            report.quantity(
                "restricted_lo",
                c.restricted.lo,
                Provenance::ClosedForm("restricted-support"),
            );
            report.quantity(
                "restricted_hi",
                c.restricted.hi,
                Provenance::ClosedForm("restricted-support"),
            );
            report.quantity("q_at_max", c.q_at_max, Provenance::Empirical);
            report.check(
                "embedding",
                c.holds(EMBEDDING_TOL),
                format!("{:.10e} <= {:.10e}", c.lhs, c.rhs),
            );
        }
        Scenario::Limit {
            r,
            kappas,
            f,
            points,
            rel_tol,
        } => {
            let mut t = Table::new("gaps", &["kappa", "s", "gap"]);
            for &s in points {
                let gaps = flt_limit_check(kappas, *r, f, s, *rel_tol)?;
                for &(kappa, gap) in &gaps {
                    t.push(vec![kappa.into(), s.into(), gap.into()]);
                }
                let (first, last) = (gaps[0], gaps[gaps.len() - 1]);
                if gaps.len() > 1 {
                    report.check(
                        &format!("gap shrinks at s = {s}"),
                        last.1 <= first.1,
                        format!(
                            "{:.3e} at kappa = {} -> {:.3e} at kappa = {}",
                            first.1, first.0, last.1, last.0
                        ),
                    );
                }
                if last.0 >= 1e4 {
                    report.check(
                        &format!("gap below {LIMIT_GAP:e} at s = {s}"),
                        last.1 < LIMIT_GAP,
                        format!("{:.3e} at kappa = {}", last.1, last.0),
                    );
                }
            }
            report.tables.push(t);
        }
    }
    Ok(report)
}

fn constants(report: &mut Report, kappa: f64, r: f64, p: f64, mu: Option<f64>) -> Result<()> {
    let params = TransformParams::new(kappa, r)?;
    report.quantity("m", params.order(), Provenance::ClosedForm("kappa-plus-r"));
    let v = v_const(&params)?;
    report.quantity("v", v, Provenance::ClosedForm("beta-moment"));
    let vq = v_by_quadrature(&params);
    report.quantity("v", vq, Provenance::Oracle);
    agreement(report, "v agreement", v, vq);
    report.quantity(
        "w",
        w_const(&params)?,
        Provenance::ClosedForm("scaled-beta-moment"),
    );
    if params.lower_bound_valid() {
        let y = y_const(&params)?;
        report.quantity("Y", y, Provenance::ClosedForm("kernel-average"));
        let yq = y_by_quadrature(&params);
        report.quantity("Y", yq, Provenance::Oracle);
        agreement(report, "Y agreement", y, yq);
    } else {
        report
            .notes
            .push("kappa + r <= 1: the trial lower bound is undefined".into());
    }
    let unweighted = mu.map_or(true, |m| m == 1.0);
    if unweighted {
        let exps = ExponentPair::new(p)?;
        let z = z_const(&params, &exps)?;
        report.quantity("q", exps.q(), Provenance::ClosedForm("conjugate-exponent"));
        report.quantity("z", z, Provenance::ClosedForm("upper-constant"));
        if params.lower_bound_valid() {
            let lower = trial_lower_bound(&params, p)?;
            report.quantity("trial_lower", lower, Provenance::ClosedForm("trial-lower"));
            report.check(
                "trial lower <= upper",
                lower <= z,
                format!("{lower:.10e} <= {z:.10e}"),
            );
        }
    }
    if let Some(mu) = mu {
        let ex = WeightedExponents::new(p, mu)?;
        report.quantity("Q", ex.big_q(), Provenance::ClosedForm("output-exponent"));
        report.quantity(
            "sigma",
            ex.sigma(),
            Provenance::ClosedForm("young-exponent"),
        );
        if ex.inv_big_q > 0.0 {
            let t = theta_const(&params, p, mu)?;
            report.quantity(
                "theta_as_written",
                t.as_written,
                Provenance::ClosedForm("young-constant-variant"),
            );
            report.quantity(
                "M",
                t.m_half_line_closed_form,
                Provenance::ClosedForm("young-constant"),
            );
            report.quantity("M", t.m_half_line_quadrature, Provenance::Oracle);
            report.quantity("M_full_line", t.m_full_line_quadrature, Provenance::Oracle);
            agreement(
                report,
                "M agreement",
                t.m_half_line_closed_form,
                t.m_half_line_quadrature,
            );
            report.observe(
                "variant constant equals M",
                agree(t.as_written, t.m_half_line_quadrature),
                format!("{:.12e} vs {:.12e}", t.as_written, t.m_half_line_quadrature),
            );
        }
        match weighted_trial_lower_bound(&params, p, mu) {
            Ok(l) => report.quantity(
                "weighted_trial_lower",
                l,
                Provenance::ClosedForm("weighted-trial-lower"),
            ),
            Err(e) => report
                .notes
                .push(format!("weighted lower bound unavailable: {e}")),
        }
    }
    Ok(())
}

fn bound_report(report: &mut Report, b: &BoundReport) -> Result<()> {
    let c = &b.constants;
    for (name, value, label) in [
        ("v", c.v, "beta-moment"),
        ("w", c.w, "scaled-beta-moment"),
        ("Y", c.y, "kernel-average"),
    ] {
        if let Some(v) = value {
            report.quantity(name, v, Provenance::ClosedForm(label));
        }
    }
    report.quantity("q", b.q, Provenance::ClosedForm("output-exponent"));
    report.quantity("upper", b.upper, Provenance::ClosedForm("upper-constant"));
    if let Some(l) = b.lower {
        report.quantity("lower", l, Provenance::ClosedForm("trial-lower"));
    }
    report.quantity_with_error(
        "empirical_ratio",
        b.empirical_ratio,
        Provenance::Empirical,
        b.quadrature_error_budget * b.empirical_ratio,
    );
    report.objects.insert(
        "witness".into(),
        serde_json::to_value(&b.witness).map_err(|e| Error::Scenario(e.to_string()))?,
    );
    report
        .objects
        .insert("search_converged".into(), Value::Bool(b.search_converged));
    report
        .objects
        .insert("evaluations".into(), Value::from(b.evaluations));
    report.objects.insert("seed".into(), Value::from(b.seed));
    if let Some(l) = b.lower {
        report.check(
            "lower <= empirical",
            b.lower_holds(),
            format!("{l:.10e} <= {:.10e}", b.empirical_ratio),
        );
    }
    report.check(
        "empirical <= upper",
        b.upper_holds(),
        format!("{:.10e} <= {:.10e}", b.empirical_ratio, b.upper),
    );
    if b.lower.is_some() {
        report.notes.push(
            "the lower bound comes from the pointwise estimate L f(s) >= Y s^(-1/2) for s >= 1 on the trial function t^(-1/2) on (0, 1)"
                .into(),
        );
    }
    report.warnings.extend(b.warnings.iter().cloned());
    Ok(())
}

fn kernel_label(k: &KernelSpec) -> String {
    serde_json::to_string(k).unwrap_or_default()
}

fn kernel_check_tables(report: &mut Report, checks: &[KernelCheck]) -> Result<()> {
    let mut holder = Table::new("holder", &["kernel", "p", "lhs", "rhs", "argmax"]);
    let mut mellin = Table::new(
        "mellin",
        &[
            "kernel",
            "p",
            "first_ratio_zeta",
            "first_ratio_zeta_pow",
            "second_ratio",
        ],
    );
    for c in checks {
        let exps = ExponentPair::new(c.p)?;
        let h = holder_sup_bound_check(&c.kernel, &c.f, &exps)?;
        let label = kernel_label(&c.kernel);
        holder.push(vec![
            label.clone().into(),
            c.p.into(),
            h.lhs.into(),
            h.rhs.into(),
            h.argmax.into(),
        ]);
        report.check(
            &format!("sup bound {label} p = {}", c.p),
            h.holds(1e-8),
            format!("{:.10e} <= {:.10e}", h.lhs, h.rhs),
        );
        if c.kernel.is_nonnegative() && c.f.is_nonnegative() && c.p > 1.0 {
            let m = mellin_bound_check(&c.kernel, &c.f, c.p)?;
            mellin.push(vec![
                Cell::Text(label.clone()),
                c.p.into(),
                m.first_ratio_zeta.into(),
                m.first_ratio_zeta_pow.into(),
                m.second_ratio.into(),
            ]);
            report.check(
                &format!("weighted Hardy bound {label} p = {}", c.p),
                m.holds(1e-8),
                format!("ratio {:.10e} <= 1", m.second_ratio),
            );
            report.observe(
                &format!("unweighted Hardy display {label} p = {}", c.p),
                m.first_ratio_zeta <= 1.0,
                format!(
                    "ratio against zeta(1/p): {:.6e}; against zeta(1/p)^p: {:.6e}",
                    m.first_ratio_zeta, m.first_ratio_zeta_pow
                ),
            );
        }
    }
    report.tables.push(holder);
    if !mellin.rows.is_empty() {
        report.tables.push(mellin);
    }
    Ok(())
}
