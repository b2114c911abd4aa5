//! Gamma/Beta primitives and the closed-form operator-norm constants of the
//! fractional Laplace transform.
//!
//! Every constant is assembled in the log domain and exponentiated once, so
//! large shape parameters (κ in the millions) stay finite.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{self, Tolerance};

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural logarithm of the Gamma function for `x > 0`.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("log_gamma requires x > 0, got {x}")));
    }
    Ok(ln_gamma_pos(x))
}

fn ln_gamma_pos(x: f64) -> f64 {
    use std::f64::consts::PI;
    if x < 0.5 {
        // reflection: Γ(x)Γ(1-x) = π / sin(πx)
        return (PI / (PI * x).sin()).ln() - ln_gamma_pos(1.0 - x);
    }
    let x = x - 1.0;
    let mut sum = LANCZOS_COEF[0];
    for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        sum += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (x + 0.5) * t.ln() - t + sum.ln()
}

/// `ln B(a, b)`.
pub fn log_beta(a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0) || !(b > 0.0) {
        return Err(Error::Domain(format!(
            "beta requires a > 0 and b > 0, got a = {a}, b = {b}"
        )));
    }
    Ok(ln_gamma_pos(a) + ln_gamma_pos(b) - ln_gamma_pos(a + b))
}

pub fn beta(a: f64, b: f64) -> Result<f64> {
    log_beta(a, b).map(f64::exp)
}

/// `base^exponent` with `0^0 := 1`, the limit value used at the endpoints of
/// the trial lower bounds.
fn pow0(base: f64, exponent: f64) -> f64 {
    if exponent == 0.0 {
        1.0
    } else {
        base.max(0.0).powf(exponent)
    }
}

/// Shape parameters `(κ, r)` of the kernel `(1 + st/κ)^{-κ-r}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransformParams {
    pub kappa: f64,
    pub r: f64,
}

impl TransformParams {
    pub fn new(kappa: f64, r: f64) -> Result<Self> {
        if !(kappa > 0.0) || !kappa.is_finite() {
            return Err(Error::Domain(format!("kappa > 0 required, got {kappa}")));
        }
        if !r.is_finite() {
            return Err(Error::Domain(format!("r must be finite, got {r}")));
        }
        Ok(TransformParams { kappa, r })
    }

    /// Total decay exponent `κ + r` of the kernel.
    pub fn order(&self) -> f64 {
        self.kappa + self.r
    }

    /// `κ + r > 1/2`: the kernel has a finite `t^{-1/2}` moment, which the
    /// upper bound needs.
    pub fn upper_bound_valid(&self) -> bool {
        self.order() > 0.5
    }

    /// `κ + r > 1`: the trial-function lower bound is defined.
    pub fn lower_bound_valid(&self) -> bool {
        self.order() > 1.0
    }

    pub fn require_upper_bound(&self) -> Result<()> {
        if self.upper_bound_valid() {
            Ok(())
        } else {
            Err(Error::Hypothesis(format!(
                "kappa + r = {} <= 1/2 violates the upper-bound hypothesis kappa + r > 1/2",
                self.order()
            )))
        }
    }

    pub fn require_lower_bound(&self) -> Result<()> {
        if self.lower_bound_valid() {
            Ok(())
        } else {
            Err(Error::Hypothesis(format!(
                "kappa + r = {} <= 1 violates the lower-bound hypothesis kappa + r > 1",
                self.order()
            )))
        }
    }

    /// Kernel value `(1 + x/κ)^{-κ-r}` for `x ≥ 0`.
    pub fn kernel(&self, x: f64) -> f64 {
        (-self.order() * (x / self.kappa).ln_1p()).exp()
    }
}

/// A conjugate pair `1/p + 1/q = 1` with `p ∈ [1, 2]`.
///
/// Only `1/p` and `1/q = 1 - 1/p` are stored. For `p ∈ [1, 2]` the
/// subtraction is exact, so the conjugacy defect is exactly zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentPair {
    p: f64,
    inv_p: f64,
    inv_q: f64,
}

impl ExponentPair {
    pub fn new(p: f64) -> Result<Self> {
        if !(1.0..=2.0).contains(&p) {
            return Err(Error::Domain(format!("p must lie in [1, 2], got {p}")));
        }
        let inv_p = 1.0 / p;
        Ok(ExponentPair {
            p,
            inv_p,
            inv_q: 1.0 - inv_p,
        })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// Conjugate exponent; `+∞` when `p = 1`.
    pub fn q(&self) -> f64 {
        if self.inv_q == 0.0 {
            f64::INFINITY
        } else {
            1.0 / self.inv_q
        }
    }

    pub fn inv_p(&self) -> f64 {
        self.inv_p
    }

    pub fn inv_q(&self) -> f64 {
        self.inv_q
    }

    pub fn conjugacy_defect(&self) -> f64 {
        self.inv_p + self.inv_q - 1.0
    }
}

impl Serialize for ExponentPair {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("ExponentPair", 2)?;
        st.serialize_field("p", &self.p)?;
        st.serialize_field("q", &crate::extreal::ExtReal(self.q()))?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for ExponentPair {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            p: f64,
        }
        let raw = Raw::deserialize(d)?;
        ExponentPair::new(raw.p).map_err(serde::de::Error::custom)
    }
}

fn ln_v(params: &TransformParams) -> Result<f64> {
    params.require_upper_bound()?;
    let m = params.order();
    Ok(0.5 * std::f64::consts::PI.ln() + ln_gamma_pos(m - 0.5) - ln_gamma_pos(m))
}

/// `∫₀^∞ x^{-1/2} (1+x)^{-(κ+r)} dx = √π Γ(κ+r-1/2) / Γ(κ+r)`.
pub fn v_const(params: &TransformParams) -> Result<f64> {
    ln_v(params).map(f64::exp)
}

/// `w = √κ · v`, the L2 operator norm of the transform.
pub fn w_const(params: &TransformParams) -> Result<f64> {
    Ok((0.5 * params.kappa.ln() + ln_v(params)?).exp())
}

/// Upper operator-norm constant `w^{2/q}`; equals 1 at `p = 1` and `w` at `p = 2`.
pub fn z_const(params: &TransformParams, exps: &ExponentPair) -> Result<f64> {
    let ln_w = 0.5 * params.kappa.ln() + ln_v(params)?;
    Ok((2.0 * exps.inv_q() * ln_w).exp())
}

/// `Y = ∫₀¹ (1 + z/κ)^{-(κ+r)} dz = κ/(κ+r-1) · [1 - (κ/(κ+1))^{κ+r-1}]`.
pub fn y_const(params: &TransformParams) -> Result<f64> {
    params.require_lower_bound()?;
    let k = params.kappa;
    let e = params.order() - 1.0;
    Ok(k / e * -(-e * (1.0 / k).ln_1p()).exp_m1())
}

/// Trial-function lower bound `(p-1)^{1-1/p} (1-p/2)^{2/p-1} Y` for
/// `p ∈ [1, 2]`, with `0^0 := 1` at the endpoints.
pub fn trial_lower_bound(params: &TransformParams, p: f64) -> Result<f64> {
    let y = y_const(params)?;
    if !(1.0..=2.0).contains(&p) {
        return Err(Error::Domain(format!("p must lie in [1, 2], got {p}")));
    }
    Ok(pow0(p - 1.0, 1.0 - 1.0 / p) * pow0(1.0 - 0.5 * p, 2.0 / p - 1.0) * y)
}

/// Weighted trial lower bound `Y (1-μp/2)^{2/p-μ} (μp-1)^{μ-1/p}` for
/// `1/μ ≤ p ≤ 2/μ`. At `μ = 1` this is [`trial_lower_bound`].
pub fn weighted_trial_lower_bound(params: &TransformParams, p: f64, mu: f64) -> Result<f64> {
    let y = y_const(params)?;
    check_mu(mu)?;
    let slack = 1e-12;
    if p * mu < 1.0 - slack {
        return Err(Error::Constraint(format!(
            "p = {p} < 1/mu = {}: the weighted lower bound needs 1/mu <= p",
            1.0 / mu
        )));
    }
    if p * mu > 2.0 + slack {
        return Err(Error::Constraint(format!(
            "p = {p} > 2/mu = {}: the weighted lower bound needs p <= 2/mu",
            2.0 / mu
        )));
    }
    let mp = mu * p;
    Ok(y * pow0(1.0 - 0.5 * mp, 2.0 / p - mu) * pow0(mp - 1.0, mu - 1.0 / p))
}

fn check_mu(mu: f64) -> Result<()> {
    if mu > 0.0 && mu <= 1.0 {
        Ok(())
    } else {
        Err(Error::Constraint(format!(
            "mu = {mu} outside the weight range 0 < mu <= 1"
        )))
    }
}

/// Exponent bookkeeping of the weighted transform
/// `Ψ[f](s) = ∫₀^∞ t^{μ-1} (1 + ts/κ)^{-κ-r} f(t) dt`:
/// `1/Q = μ - 1/p` and `1/σ = 1 + μ - 2/p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeightedExponents {
    pub p: f64,
    pub mu: f64,
    /// `1/Q`; zero means `Q = ∞`.
    pub inv_big_q: f64,
    /// `1/σ`; zero means `σ = ∞`.
    pub inv_sigma: f64,
}

impl WeightedExponents {
    /// Validates `0 < μ ≤ 1` and `1/μ ≤ p ≤ 2/μ`, `p ≥ 1`.
    pub fn new(p: f64, mu: f64) -> Result<Self> {
        check_mu(mu)?;
        if !(p >= 1.0) {
            return Err(Error::Constraint(format!("p = {p} < 1")));
        }
        let inv_big_q = mu - 1.0 / p;
        if inv_big_q < -1e-15 {
            return Err(Error::Constraint(format!(
                "1/mu < p violated: p = {p}, 1/mu = {} (Q would be nonpositive)",
                1.0 / mu
            )));
        }
        let inv_sigma = 1.0 + mu - 2.0 / p;
        if p * mu > 2.0 * (1.0 + 1e-15) {
            return Err(Error::Constraint(format!(
                "p <= 2/mu violated: p = {p}, 2/mu = {} (would need p > Q)",
                2.0 / mu
            )));
        }
        Ok(WeightedExponents {
            p,
            mu,
            inv_big_q: inv_big_q.max(0.0),
            inv_sigma: inv_sigma.max(0.0),
        })
    }

    pub fn big_q(&self) -> f64 {
        if self.inv_big_q == 0.0 {
            f64::INFINITY
        } else {
            1.0 / self.inv_big_q
        }
    }

    pub fn sigma(&self) -> f64 {
        if self.inv_sigma == 0.0 {
            f64::INFINITY
        } else {
            1.0 / self.inv_sigma
        }
    }

    /// `σ / p'`, i.e. `σ (1 - 1/p)`.
    fn sigma_over_conj(&self) -> f64 {
        self.sigma() * (1.0 - 1.0 / self.p)
    }
}

/// The weighted upper constant computed three ways.
///
/// `as_written` is the closed form `[κ^{1-σ/p} B(1-σ/p', (κ+r)σ+σ/p'-1)]^{1/σ}`.
/// The `m_*` fields evaluate `[∫ |t|^{-σ/p'} h(|t|)^σ dt]^{1/σ}` directly by
/// quadrature over the half line and over the whole line. The half-line
/// value is the valid bound for the transform on `(0, ∞)`; its closed form is
/// `[κ^{1-σ/p'} B(...)]^{1/σ}`, which differs from `as_written` unless κ = 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThetaValues {
    pub as_written: f64,
    pub m_half_line_closed_form: f64,
    pub m_half_line_quadrature: f64,
    pub m_full_line_quadrature: f64,
}

impl ThetaValues {
    /// The value used as the weighted upper bound.
    pub fn oracle(&self) -> f64 {
        self.m_half_line_quadrature
    }
}

/// Validates the weighted-regime constraints and evaluates the weighted
/// upper constant (see [`ThetaValues`]).
pub fn theta_const(params: &TransformParams, p: f64, mu: f64) -> Result<ThetaValues> {
    let ex = WeightedExponents::new(p, mu)?;
    if ex.inv_big_q <= 0.0 {
        return Err(Error::Constraint(format!(
            "1/mu < p violated: p = {p}, 1/mu = {}",
            1.0 / mu
        )));
    }
    if ex.inv_sigma <= 0.0 {
        return Err(Error::Constraint(format!(
            "sigma < p' violated at p = {p}, mu = {mu}"
        )));
    }
    let sigma = ex.sigma();
    let soc = ex.sigma_over_conj();
    if soc >= 1.0 {
        return Err(Error::Constraint(format!(
            "sigma < p' violated: sigma = {sigma}, p' = {}",
            p / (p - 1.0)
        )));
    }
    let m = params.order();
    let second = m * sigma + soc - 1.0;
    if second <= 0.0 {
        return Err(Error::Constraint(format!(
            "(kappa + r) sigma + sigma/p' > 1 violated: value {}",
            second + 1.0
        )));
    }
    let ln_b = log_beta(1.0 - soc, second)?;
    let ln_k = params.kappa.ln();
    let as_written = ((1.0 - sigma / p) * ln_k + ln_b) / sigma;
    let closed = ((1.0 - soc) * ln_k + ln_b) / sigma;

    let tol = Tolerance::relative(1e-13);
    let integrand = |t: f64| t.powf(-soc) * params.kernel(t).powf(sigma);
    let half = quad::half_line(integrand, params.kappa, tol).value;
    Ok(ThetaValues {
        as_written: as_written.exp(),
        m_half_line_closed_form: closed.exp(),
        m_half_line_quadrature: half.powf(1.0 / sigma),
        m_full_line_quadrature: (2.0 * half).powf(1.0 / sigma),
    })
}

/// Analytic constants attached to a bound report. `None` where the
/// corresponding hypothesis does not hold.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct BoundConstants {
    pub v: Option<f64>,
    pub w: Option<f64>,
    pub z: Option<f64>,
    pub y: Option<f64>,
    pub theta: Option<f64>,
    pub m: Option<f64>,
    pub trial_lower: Option<f64>,
    pub weighted_trial_lower: Option<f64>,
}

impl BoundConstants {
    pub fn unweighted(params: &TransformParams, exps: &ExponentPair) -> Result<Self> {
        let v = v_const(params)?;
        let w = w_const(params)?;
        let z = z_const(params, exps)?;
        let y = y_const(params).ok();
        let trial_lower = trial_lower_bound(params, exps.p()).ok();
        Ok(BoundConstants {
            v: Some(v),
            w: Some(w),
            z: Some(z),
            y,
            trial_lower,
            ..Default::default()
        })
    }

    pub fn weighted(params: &TransformParams, p: f64, mu: f64) -> Result<Self> {
        let ex = WeightedExponents::new(p, mu)?;
        let mut c = BoundConstants {
            v: v_const(params).ok(),
            w: w_const(params).ok(),
            y: y_const(params).ok(),
            weighted_trial_lower: weighted_trial_lower_bound(params, p, mu).ok(),
            ..Default::default()
        };
        if mu == 1.0 {
            if let Ok(exps) = ExponentPair::new(p) {
                c.z = z_const(params, &exps).ok();
                c.trial_lower = trial_lower_bound(params, p).ok();
            }
        }
        if ex.inv_big_q > 0.0 {
            if let Ok(t) = theta_const(params, p, mu) {
                c.theta = Some(t.as_written);
                c.m = Some(t.oracle());
            }
        }
        Ok(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn params(kappa: f64, r: f64) -> TransformParams {
        TransformParams::new(kappa, r).unwrap()
    }

    #[test]
    fn log_gamma_small_integers() {
        assert!(log_gamma(1.0).unwrap().abs() < 1e-15);
        assert_relative_eq!(log_gamma(5.0).unwrap(), 24f64.ln(), max_relative = 1e-14);
        assert_relative_eq!(
            log_gamma(21.0).unwrap(),
            2_432_902_008_176_640_000f64.ln(),
            max_relative = 1e-14
        );
    }

    #[test]
    fn log_gamma_half_against_gamma_integral() {
        // oracle: ∫₀^∞ t^{-1/2} e^{-t} dt
        let oracle = quad::half_line(
            |t: f64| t.powf(-0.5) * (-t).exp(),
            1.0,
            Tolerance::relative(1e-14),
        );
        assert_relative_eq!(
            log_gamma(0.5).unwrap(),
            oracle.value.ln(),
            max_relative = 1e-12
        );
        assert_relative_eq!(
            log_gamma(0.5).unwrap(),
            0.572_364_942_924_700_1,
            max_relative = 1e-13
        );
    }

    #[test]
    fn log_gamma_large_argument_matches_stirling() {
        // Stirling series through 1/(1260 x^5) is far below f64 resolution at 1e6.
        let x: f64 = 1e6;
        let stirling = (x - 0.5) * x.ln() - x + 0.5 * (2.0 * PI).ln() + 1.0 / (12.0 * x)
            - 1.0 / (360.0 * x.powi(3));
        let got = log_gamma(x).unwrap();
        assert!((got - stirling).abs() <= 1e-12 * stirling.abs());
    }

    #[test]
    fn log_gamma_domain() {
        assert!(matches!(log_gamma(0.0), Err(Error::Domain(_))));
        assert!(matches!(log_gamma(-2.5), Err(Error::Domain(_))));
    }

    #[test]
    fn beta_examples() {
        assert_relative_eq!(beta(1.0, 1.0).unwrap(), 1.0, max_relative = 1e-14);
        assert_relative_eq!(beta(2.0, 3.0).unwrap(), 1.0 / 12.0, max_relative = 1e-14);
        // oracle: ∫₀¹ t^{-1/2}(1-t)^{-1/2} dt, split so each singularity sits at 0
        let tol = Tolerance::relative(1e-14);
        let half = quad::tanh_sinh(|t: f64| t.powf(-0.5) * (1.0 - t).powf(-0.5), 0.0, 0.5, tol);
        assert_relative_eq!(
            beta(0.5, 0.5).unwrap(),
            2.0 * half.value,
            max_relative = 1e-12
        );
        assert_relative_eq!(beta(0.5, 0.5).unwrap(), PI, max_relative = 1e-13);
        assert!(beta(0.0, 1.0).is_err());
        assert!(beta(1.0, -1.0).is_err());
    }

    #[test]
    fn v_const_examples() {
        assert_relative_eq!(
            v_const(&params(0.5, 0.5)).unwrap(),
            PI,
            max_relative = 1e-13
        );
        assert_relative_eq!(
            v_const(&params(1.0, 0.5)).unwrap(),
            2.0,
            max_relative = 1e-13
        );
        assert!(matches!(
            v_const(&params(1.0, -0.6)),
            Err(Error::Hypothesis(_))
        ));
    }

    #[test]
    fn w_const_examples() {
        assert_relative_eq!(
            w_const(&params(1.0, 0.0)).unwrap(),
            PI,
            max_relative = 1e-13
        );
        assert_relative_eq!(
            w_const(&params(1.0, 0.5)).unwrap(),
            2.0,
            max_relative = 1e-13
        );
        // √(4π) Γ(1) / Γ(3/2) = 2√π / (√π/2) = 4
        assert_relative_eq!(
            w_const(&params(4.0, -2.5)).unwrap(),
            4.0,
            max_relative = 1e-13
        );
    }

    #[test]
    fn z_const_examples() {
        let p = params(1.0, 0.0);
        assert_eq!(
            z_const(&params(3.0, 1.0), &ExponentPair::new(1.0).unwrap()).unwrap(),
            1.0
        );
        assert_relative_eq!(
            z_const(&p, &ExponentPair::new(2.0).unwrap()).unwrap(),
            PI,
            max_relative = 1e-13
        );
        assert_relative_eq!(
            z_const(&p, &ExponentPair::new(4.0 / 3.0).unwrap()).unwrap(),
            PI.sqrt(),
            max_relative = 1e-13
        );
    }

    #[test]
    fn y_const_examples() {
        assert_relative_eq!(
            y_const(&params(1.0, 1.0)).unwrap(),
            0.5,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            y_const(&params(2.0, 0.0)).unwrap(),
            2.0 / 3.0,
            max_relative = 1e-14
        );
        assert!(matches!(
            y_const(&params(1.0, 0.0)),
            Err(Error::Hypothesis(_))
        ));
    }

    #[test]
    fn trial_lower_bound_examples() {
        let p11 = params(1.0, 1.0);
        assert_relative_eq!(
            trial_lower_bound(&p11, 2.0).unwrap(),
            0.5,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            trial_lower_bound(&p11, 1.0).unwrap(),
            0.25,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            trial_lower_bound(&p11, 1.5).unwrap(),
            0.25,
            max_relative = 1e-14
        );
    }

    #[test]
    fn trial_lower_bound_endpoint_continuity() {
        let p = params(2.0, 0.5);
        let at1 = trial_lower_bound(&p, 1.0).unwrap();
        let near = trial_lower_bound(&p, 1.0 + 1e-9).unwrap();
        assert!((at1 - near).abs() < 1e-6);
    }

    #[test]
    fn weighted_lower_bound_examples() {
        let p11 = params(1.0, 1.0);
        for &p in &[1.0, 1.2, 1.5, 1.9, 2.0] {
            let a = weighted_trial_lower_bound(&p11, p, 1.0).unwrap();
            let b = trial_lower_bound(&p11, p).unwrap();
            assert_relative_eq!(a, b, max_relative = 1e-14);
        }
        assert_relative_eq!(
            weighted_trial_lower_bound(&p11, 2.5, 0.8).unwrap(),
            0.5,
            max_relative = 1e-12
        );
        // at μp = 1: Y · (1/2)^{2/p - μ} · 0^0 = 0.5 · 0.5^{0.8}
        assert_relative_eq!(
            weighted_trial_lower_bound(&p11, 1.25, 0.8).unwrap(),
            0.287_174_588_749_258_7,
            max_relative = 1e-12
        );
        assert!(weighted_trial_lower_bound(&p11, 1.2, 0.8).is_err());
    }

    #[test]
    fn theta_constraints() {
        let p = params(1.0, 2.0);
        match theta_const(&p, 1.2, 0.8) {
            Err(Error::Constraint(msg)) => assert!(msg.contains("1/mu < p")),
            other => panic!("expected constraint error, got {other:?}"),
        }
        assert!(theta_const(&p, 2.6, 0.8).is_err());
        assert!(theta_const(&p, 2.0, 1.5).is_err());
    }

    #[test]
    fn theta_oracle_at_unit_kappa() {
        // κ=1, r=2, μ=0.8, p=2: σ = 5/4, σ/p' = 5/8, M = B(3/8, 27/8)^{4/5}.
        let t = theta_const(&params(1.0, 2.0), 2.0, 0.8).unwrap();
        assert_relative_eq!(
            t.m_half_line_quadrature,
            1.424_133_332_860_149_3,
            max_relative = 1e-10
        );
        assert_relative_eq!(
            t.m_half_line_closed_form,
            t.m_half_line_quadrature,
            max_relative = 1e-10
        );
        // κ = 1 makes the exponent on κ irrelevant
        assert_relative_eq!(t.as_written, t.m_half_line_quadrature, max_relative = 1e-10);
        assert_relative_eq!(
            t.m_full_line_quadrature,
            2f64.powf(0.8) * t.m_half_line_quadrature,
            max_relative = 1e-12
        );
    }

    #[test]
    fn theta_as_written_differs_away_from_unit_kappa() {
        let t = theta_const(&params(3.0, 1.0), 1.6, 0.8).unwrap();
        assert_relative_eq!(
            t.m_half_line_closed_form,
            t.m_half_line_quadrature,
            max_relative = 1e-9
        );
        assert!((t.as_written / t.m_half_line_quadrature - 1.0).abs() > 1e-3);
    }

    #[test]
    fn conjugacy_is_exact() {
        for i in 0..=1000 {
            let p = 1.0 + i as f64 / 1000.0;
            let e = ExponentPair::new(p).unwrap();
            assert_eq!(e.conjugacy_defect(), 0.0);
        }
        assert_eq!(ExponentPair::new(1.0).unwrap().q(), f64::INFINITY);
        assert!(ExponentPair::new(2.5).is_err());
    }

    #[test]
    fn w_decreases_in_r() {
        for &kappa in &[0.5, 1.0, 2.0, 10.0, 100.0] {
            let mut prev = f64::INFINITY;
            for i in 0..40 {
                let r = 0.6 - kappa + 0.25 * i as f64;
                let w = w_const(&params(kappa, r)).unwrap();
                assert!(w < prev, "kappa={kappa} r={r}");
                prev = w;
            }
        }
    }
}
