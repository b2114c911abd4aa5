//! End-to-end acceptance checks. Runs as a plain binary so every criterion
//! prints its PASS/FAIL line; the process fails if any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use flt_core::bounds::{
    empirical_norm, holder_sup_bound_check, quotient, ratio, scaling_sweep, sharpness_profile,
    weighted_empirical_norm, ScalingProbe, SearchBudget, SLOPE_TOL,
};
use flt_core::funcspace::{lp_norm, weighted_lp_norm, FunctionSpec};
use flt_core::gls::{embedding_check, natural_psi, PsiDescriptor, PsiFunction, Support};
use flt_core::report::{emit_all, Format};
use flt_core::runner::run_batch;
use flt_core::scenario::parse_batch;
use flt_core::specfun::{
    trial_lower_bound, v_const, weighted_trial_lower_bound, y_const, z_const, BoundConstants,
    ExponentPair, TransformParams,
};
use flt_core::transform::{flt_eval, mellin_zeta, weighted_psi_eval, KernelSpec, DEFAULT_REL_TOL};

type Outcome = Result<String, String>;

/// Double-exponential rule on 8 equal panels of `[a, b]`.
fn de(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let h = (b - a) / 8.0;
    (0..8)
        .map(|i| {
            let lo = a + h * i as f64;
            quadrature::double_exponential::integrate(&f, lo, lo + h, 1e-16).integral
        })
        .sum()
}

/// `∫₀^c y^{α-1} h(y) dy`; for `α < 1` the substitution `y = u^{1/α}`
/// removes the endpoint singularity.
fn de_power(alpha: f64, h: impl Fn(f64) -> f64, c: f64) -> f64 {
    if alpha < 1.0 {
        de(|u| h(u.powf(1.0 / alpha)), 0.0, c.powf(alpha)) / alpha
    } else {
        de(|y| y.powf(alpha - 1.0) * h(y), 0.0, c)
    }
}

/// `∫₀^∞ x^{σ-1} (1 + x/κ)^{-m} dx`, split at `x = κ` with `x = κ/t` above.
fn flt_mellin_oracle(kappa: f64, m: f64, sigma: f64) -> f64 {
    let lower = de_power(sigma, |u| (1.0 + u).powf(-m), 1.0);
    let upper = de_power(m - sigma, |t| (1.0 + t).powf(-m), 1.0);
    kappa.powf(sigma) * (lower + upper)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn ensure(ok: bool, msg: String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg)
    }
}

fn constant_oracles() -> Outcome {
    let mut worst: f64 = 0.0;
    for &kappa in &[0.5, 1.0, 2.0, 5.0, 20.0] {
        for &r in &[0.6, 1.0, 1.5, 2.0, 4.0] {
            let params = TransformParams::new(kappa, r).unwrap();
            let m = params.order();
            let v = v_const(&params).map_err(|e| e.to_string())?;
            let v_oracle = flt_mellin_oracle(1.0, m, 0.5);
            let y = y_const(&params).map_err(|e| e.to_string())?;
            let y_oracle = de(|z| (1.0 + z / kappa).powf(-m), 0.0, 1.0);
            let mut errs = vec![(rel(v, v_oracle), "v"), (rel(y, y_oracle), "y")];
            for frac in [0.2, 0.5, 0.8] {
                let sigma = frac * m;
                let zeta =
                    mellin_zeta(&KernelSpec::Flt(params), sigma).map_err(|e| e.to_string())?;
                errs.push((rel(zeta, flt_mellin_oracle(kappa, m, sigma)), "zeta"));
            }
            for (e, name) in errs {
                worst = worst.max(e);
                ensure(
                    e < 1e-8,
                    format!("{name} at kappa={kappa}, r={r}: rel. error {e:.2e}"),
                )?;
            }
        }
    }
    Ok(format!("worst relative error {worst:.2e}"))
}

fn sandwich() -> Outcome {
    let budget = SearchBudget::default();
    let mut tightest = f64::INFINITY;
    for &(kappa, r) in &[(1.0, 1.0), (2.0, 0.5), (0.6, 1.0), (10.0, 2.0)] {
        let params = TransformParams::new(kappa, r).unwrap();
        for &p in &[1.0, 1.25, 1.5, 1.75, 1.9, 1.99] {
            let exps = ExponentPair::new(p).unwrap();
            let rep = empirical_norm(&params, &exps, &budget).map_err(|e| e.to_string())?;
            let lower = trial_lower_bound(&params, p).map_err(|e| e.to_string())?;
            let z = z_const(&params, &exps).map_err(|e| e.to_string())?;
            let x = rep.empirical_ratio;
            ensure(
                lower - 1e-6 <= x && x <= z + 1e-6,
                format!("kappa={kappa}, r={r}, p={p}: {lower} <= {x} <= {z} fails"),
            )?;
            tightest = tightest.min(z - x);
        }
    }
    Ok(format!(
        "24 cases; smallest gap to the upper constant {tightest:.3e}"
    ))
}

fn sharpness() -> Outcome {
    let params = TransformParams::new(1.0, 1.0).unwrap();
    let grid = [1.5, 1.6, 1.7, 1.8, 1.9, 1.95, 1.99];
    let rows = sharpness_profile(&params, &grid).map_err(|e| e.to_string())?;
    let fracs: Vec<f64> = rows.iter().map(|r| r.ratio / r.z).collect();
    ensure(
        fracs.windows(2).all(|w| w[1] >= w[0]),
        format!("ratio/z not nondecreasing: {fracs:.4?}"),
    )?;
    let last = fracs[fracs.len() - 1];
    ensure(
        last >= 0.9,
        format!("ratio/z = {last:.4} < 0.9 at p = 1.99"),
    )?;
    Ok(format!("ratio/z rises from {:.4} to {last:.4}", fracs[0]))
}

fn scaling() -> Outcome {
    let params = TransformParams::new(1.0, 1.0).unwrap();
    let probe = ScalingProbe {
        lambda_grid: ScalingProbe::log_grid(0.25, 4.0, 9),
        p: 1.5,
        q_candidates: vec![2.0, 3.0, 4.0],
        f: FunctionSpec::BumpMix {
            seed: 7,
            count: 3,
            nonnegative: false,
        },
    };
    let table = scaling_sweep(&probe, &params).map_err(|e| e.to_string())?;
    let mut slopes = Vec::new();
    for row in &table.rows {
        let expected = 1.0 / 1.5 + 1.0 / row.q - 1.0;
        ensure(
            (row.slope - expected).abs() < SLOPE_TOL,
            format!("q={}: slope {:.6} vs {expected:.6}", row.q, row.slope),
        )?;
        ensure(
            row.invariant == (row.q == 3.0),
            format!("q={}: invariant = {}", row.q, row.invariant),
        )?;
        slopes.push(row.slope);
    }
    Ok(format!("slopes {slopes:.5?}"))
}

fn laplace_limit() -> Outcome {
    let params = TransformParams::new(1e4, 1.0).unwrap();
    let f = FunctionSpec::Indicator { b: 1.0 };
    let mut worst: f64 = 0.0;
    for &s in &[0.5, 1.0, 2.0, 5.0, 10.0] {
        let exact = (1.0 - (-s as f64).exp()) / s;
        let gap =
            (flt_eval(&params, &f, s, DEFAULT_REL_TOL).map_err(|e| e.to_string())? - exact).abs();
        ensure(gap < 1e-4, format!("s={s}: gap {gap:.3e}"))?;
        worst = worst.max(gap);
    }
    Ok(format!("largest gap {worst:.3e}"))
}

fn weighted() -> Outcome {
    let cases: [(f64, f64, f64, FunctionSpec, f64); 10] = [
        (1.0, 1.0, 1.5, FunctionSpec::Indicator { b: 1.0 }, 0.7),
        (
            2.0,
            0.5,
            1.2,
            FunctionSpec::PowerCutoff { a: 0.3, b: 2.0 },
            1.0,
        ),
        (
            0.6,
            1.0,
            1.9,
            FunctionSpec::PowerCutoff { a: 0.5, b: 1.0 },
            3.0,
        ),
        (10.0, 2.0, 1.0, FunctionSpec::Indicator { b: 0.5 }, 0.2),
        (
            1.0,
            2.0,
            1.75,
            FunctionSpec::BumpMix {
                seed: 1,
                count: 3,
                nonnegative: false,
            },
            0.05,
        ),
        (
            3.0,
            0.0,
            1.3,
            FunctionSpec::BumpMix {
                seed: 2,
                count: 2,
                nonnegative: true,
            },
            0.01,
        ),
        (
            0.8,
            0.8,
            1.6,
            FunctionSpec::Grid {
                knots: vec![0.5, 1.0, 2.0],
                values: vec![1.0, -0.5, 0.25],
            },
            1.5,
        ),
        (
            5.0,
            1.0,
            1.1,
            FunctionSpec::PowerCutoff { a: 0.8, b: 0.3 },
            10.0,
        ),
        (1.5, 0.25, 1.45, FunctionSpec::Indicator { b: 4.0 }, 0.3),
        (
            2.0,
            3.0,
            1.99,
            FunctionSpec::PowerCutoff { a: 0.1, b: 5.0 },
            2.0,
        ),
    ];
    let e = |x: flt_core::Error| x.to_string();
    let mut worst: f64 = 0.0;
    for (kappa, r, p, f, s) in &cases {
        let params = TransformParams::new(*kappa, *r).unwrap();
        let exps = ExponentPair::new(*p).unwrap();
        let pairs = [
            (
                weighted_psi_eval(&params, 1.0, f, *s, DEFAULT_REL_TOL).map_err(e)?,
                flt_eval(&params, f, *s, DEFAULT_REL_TOL).map_err(e)?,
                "pointwise",
            ),
            (
                weighted_lp_norm(f, 1.0, *p).map_err(e)?,
                lp_norm(f, *p).map_err(e)?,
                "input norm",
            ),
            (
                quotient(
                    &KernelSpec::Flt(params),
                    1.0,
                    *p,
                    exps.q(),
                    f,
                    DEFAULT_REL_TOL,
                )
                .map_err(e)?,
                ratio(&params, &exps, f).map_err(e)?,
                "quotient",
            ),
            (
                BoundConstants::weighted(&params, *p, 1.0)
                    .map_err(e)?
                    .z
                    .unwrap_or(f64::NAN),
                z_const(&params, &exps).map_err(e)?,
                "upper constant",
            ),
            (
                weighted_trial_lower_bound(&params, *p, 1.0).unwrap_or(f64::NAN),
                trial_lower_bound(&params, *p).unwrap_or(f64::NAN),
                "lower constant",
            ),
        ];
        for (w, u, what) in pairs {
            if w.is_nan() && u.is_nan() {
                continue;
            }
            let d = if u == 0.0 { w.abs() } else { rel(w, u) };
            ensure(
                d <= 1e-6,
                format!("{what} at kappa={kappa}, r={r}, p={p}: {w} vs {u}"),
            )?;
            worst = worst.max(d);
        }
    }
    let budget = SearchBudget::default();
    let params = TransformParams::new(1.0, 1.0).unwrap();
    let full_w = weighted_empirical_norm(&params, 1.5, 1.0, &budget).map_err(e)?;
    let full_u = empirical_norm(&params, &ExponentPair::new(1.5).unwrap(), &budget).map_err(e)?;
    ensure(
        rel(full_w.empirical_ratio, full_u.empirical_ratio) <= 1e-6,
        format!(
            "searched norms differ: {} vs {}",
            full_w.empirical_ratio, full_u.empirical_ratio
        ),
    )?;

    let params = TransformParams::new(1.0, 2.0).unwrap();
    let mu = 0.8;
    let mut lines = Vec::new();
    for &p in &[1.3, 1.6, 2.0, 2.4] {
        if !(p > 1.0 / mu && p <= 2.0 / mu) {
            continue;
        }
        let rep = weighted_empirical_norm(&params, p, mu, &budget).map_err(e)?;
        let lower = weighted_trial_lower_bound(&params, p, mu).map_err(e)?;
        let m = rep
            .theta
            .map(|t| t.m_half_line_quadrature)
            .ok_or("missing Young constant")?;
        let x = rep.empirical_ratio;
        ensure(
            lower <= x && x <= m,
            format!("mu=0.8, p={p}: {lower} <= {x} <= {m} fails"),
        )?;
        lines.push(format!("p={p}: {lower:.4} <= {x:.4} <= {m:.4}"));
    }
    Ok(format!(
        "mu=1 worst rel. diff {worst:.1e}; {}",
        lines.join(", ")
    ))
}

fn gls_embedding() -> Outcome {
    let fs = [
        FunctionSpec::Indicator { b: 1.0 },
        FunctionSpec::PowerCutoff { a: 0.25, b: 1.0 },
        FunctionSpec::PowerCutoff { a: 0.45, b: 2.0 },
        FunctionSpec::BumpMix {
            seed: 3,
            count: 3,
            nonnegative: false,
        },
        FunctionSpec::Grid {
            knots: vec![0.2, 1.0, 3.0],
            values: vec![2.0, -1.0, 0.5],
        },
    ];
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for &kappa in &[0.5, 1.0, 4.0] {
        for &r in &[0.5, 1.0, 3.0] {
            let params = TransformParams::new(kappa, r).unwrap();
            for (i, f) in fs.iter().enumerate() {
                let psi = if i % 2 == 0 {
                    natural_psi(f, Support::new(1.0, 2.0).unwrap())
                } else {
                    PsiFunction::new(
                        Support::new(1.0, 3.0).unwrap(),
                        PsiDescriptor::PowerLaw {
                            coef: 1.0,
                            exponent: 1.0,
                        },
                    )
                }
                .map_err(|e| e.to_string())?;
                let c = embedding_check(f, &psi, &params, 16).map_err(|e| e.to_string())?;
                ensure(
                    c.lhs <= c.rhs * (1.0 + 1e-4),
                    format!("kappa={kappa}, r={r}, f#{i}: {} > {}", c.lhs, c.rhs),
                )?;
                worst = worst.max(c.ratio());
                cases += 1;
            }
        }
    }
    Ok(format!("{cases} cases; largest lhs/rhs {worst:.4}"))
}

fn holder() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    let mut done = 0;
    while done < 20 {
        let p: f64 = rng.gen_range(1.0..=2.0);
        let exps = ExponentPair::new(p).unwrap();
        let kernel = match rng.gen_range(0..4) {
            0 => KernelSpec::flt(rng.gen_range(0.5..5.0), rng.gen_range(0.0..3.0)).unwrap(),
            1 => KernelSpec::Exp,
            2 => KernelSpec::Custom(flt_core::transform::CustomKernel::Gaussian),
            _ => KernelSpec::Custom(flt_core::transform::CustomKernel::DampedCosine {
                omega: rng.gen_range(0.5..3.0),
            }),
        };
        if kernel.lq_norm(exps.q()).is_err() {
            continue;
        }
        let f = match rng.gen_range(0..3) {
            0 => FunctionSpec::PowerCutoff {
                a: rng.gen_range(0.0..0.95 / p),
                b: rng.gen_range(0.5..3.0),
            },
            1 => FunctionSpec::Indicator {
                b: rng.gen_range(0.1..5.0),
            },
            _ => FunctionSpec::BumpMix {
                seed: rng.gen(),
                count: rng.gen_range(1..5),
                nonnegative: false,
            },
        };
        let c = holder_sup_bound_check(&kernel, &f, &exps).map_err(|e| e.to_string())?;
        ensure(
            c.lhs <= c.rhs,
            format!("{kernel:?}, {f:?}, p={p}: {} > {}", c.lhs, c.rhs),
        )?;
        worst = worst.max(c.lhs / c.rhs);
        done += 1;
    }
    Ok(format!("20 cases; largest lhs/rhs {worst:.4}"))
}

const BATCH: &str = r#"
[[scenario]]
command = "bounds"
kappa = 2
r = 0.5
p = 1.5
seed = 11
restarts = 3
bump_samples = 20

[[scenario]]
command = "weighted"
kappa = 1
r = 2
p = 1.6
mu = 0.8
seed = 5
restarts = 2
bump_samples = 10

[[scenario]]
command = "sharpness"
kappa = 1
r = 1
p_grid = [1.5, 1.75, 1.99]

[[scenario]]
command = "constants"
kappa = 3
r = 1
p = 1.3
mu = 0.9
"#;

fn determinism() -> Outcome {
    let scenarios = parse_batch(BATCH).map_err(|e| e.to_string())?;
    let render = || -> Result<(String, String), String> {
        let reports = run_batch(&scenarios);
        if let Some(err) = reports.iter().find_map(|r| r.error.clone()) {
            return Err(err);
        }
        Ok((
            emit_all(&reports, Format::Json, false).map_err(|e| e.to_string())?,
            emit_all(&reports, Format::Csv, false).map_err(|e| e.to_string())?,
        ))
    };
    let first = render()?;
    let second = render()?;
    ensure(
        first.0 == second.0,
        "JSON reports differ between runs".into(),
    )?;
    ensure(
        first.1 == second.1,
        "CSV reports differ between runs".into(),
    )?;
    Ok(format!(
        "{} JSON bytes identical across runs",
        first.0.len()
    ))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("constant oracles", constant_oracles),
        ("norm sandwich", sandwich),
        ("sharpness near p = 2", sharpness),
        ("scaling necessity", scaling),
        ("Laplace limit", laplace_limit),
        ("weighted regime", weighted),
        ("grand Lebesgue embedding", gls_embedding),
        ("Hölder sup bound", holder),
        ("determinism", determinism),
    ];
    let filter: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let n = i + 1;
        if !filter.is_empty() && !filter.iter().any(|f| f == &n.to_string()) {
            continue;
        }
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(msg) => println!("criterion {n} ({name}): PASS [{secs:.1} s] {msg}"),
            Err(msg) => {
                failed += 1;
                println!("criterion {n} ({name}): FAIL [{secs:.1} s] {msg}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
