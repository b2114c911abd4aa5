//! Quadrature backbone: globally adaptive Gauss–Kronrod (7/15) with
//! user-supplied breakpoints, and tanh–sinh for integrands with algebraic
//! endpoint singularities.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

/// Absolute error floor applied to every tolerance check.
pub const ABS_FLOOR: f64 = 1e-14;

/// A quadrature result together with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
    pub converged: bool,
}

impl Integral {
    pub const ZERO: Integral = Integral {
        value: 0.0,
        error: 0.0,
        evaluations: 0,
        converged: true,
    };

    pub fn add(self, other: Integral) -> Integral {
        Integral {
            value: self.value + other.value,
            error: self.error + other.error,
            evaluations: self.evaluations + other.evaluations,
            converged: self.converged && other.converged,
        }
    }

    pub fn scale(self, factor: f64) -> Integral {
        Integral {
            value: self.value * factor,
            error: self.error * factor.abs(),
            ..self
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
}

impl Tolerance {
    pub fn relative(rel: f64) -> Self {
        Tolerance {
            rel,
            abs: ABS_FLOOR,
        }
    }

    fn allows(&self, value: f64, error: f64) -> bool {
        error <= self.abs.max(self.rel * value.abs())
    }
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_838_258_730,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut scaled = err.abs();
    if res_asc != 0.0 && scaled != 0.0 {
        scaled = res_asc * (200.0 * scaled / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        scaled = scaled.max(50.0 * f64::EPSILON * res_abs);
    }
    scaled
}

/// One 15-point Kronrod panel on `[a, b]`. Returns `(value, error)`.
pub fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let f_center = f(center);
    let mut res_g = f_center * WG[3];
    let mut res_k = f_center * WGK[7];
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[7] * (f_center - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = res_k * half;
    let err = rescale_error(
        (res_k - res_g) * half,
        res_abs * half.abs(),
        res_asc * half.abs(),
    );
    (value, err)
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .partial_cmp(&other.error)
            .unwrap_or(Ordering::Equal)
    }
}

/// Globally adaptive Gauss–Kronrod integration over the partition given by
/// `points` (sorted, at least two entries). The panel with the largest error
/// is bisected until the total error meets `tol` or `max_panels` is reached.
pub fn adaptive<F: FnMut(f64) -> f64>(
    mut f: F,
    points: &[f64],
    tol: Tolerance,
    max_panels: usize,
) -> Integral {
    debug_assert!(points.len() >= 2);
    let mut heap = BinaryHeap::new();
    let mut value = 0.0;
    let mut error = 0.0;
    let mut evaluations = 0;
    for w in points.windows(2) {
        if w[1] <= w[0] {
            continue;
        }
        let (v, e) = gk15(&mut f, w[0], w[1]);
        evaluations += 15;
        value += v;
        error += e;
        heap.push(Panel {
            a: w[0],
            b: w[1],
            value: v,
            error: e,
        });
    }
    while !tol.allows(value, error) && heap.len() < max_panels {
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Panel cannot be split further in floating point.
            heap.push(Panel {
                error: 0.0,
                ..worst
            });
            error -= worst.error;
            continue;
        }
        let (v1, e1) = gk15(&mut f, worst.a, mid);
        let (v2, e2) = gk15(&mut f, mid, worst.b);
        evaluations += 30;
        value += v1 + v2 - worst.value;
        error += e1 + e2 - worst.error;
        heap.push(Panel {
            a: worst.a,
            b: mid,
            value: v1,
            error: e1,
        });
        heap.push(Panel {
            a: mid,
            b: worst.b,
            value: v2,
            error: e2,
        });
    }
    // Re-sum to shed accumulated cancellation in the running totals.
    let (value, error) = heap
        .iter()
        .fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.error.max(0.0)));
    Integral {
        value,
        error,
        evaluations,
        converged: tol.allows(value, error),
    }
}

/// Uniform partition of `[a, b]` into panels no wider than `width`.
pub fn partition(a: f64, b: f64, width: f64) -> Vec<f64> {
    let n = (((b - a) / width).ceil() as usize).max(1);
    let mut pts: Vec<f64> = (0..n).map(|i| a + (b - a) * i as f64 / n as f64).collect();
    pts.push(b);
    pts
}

/// Tanh–sinh quadrature on a finite interval. Nodes near each endpoint are
/// placed as an exact offset from that endpoint, so integrable power
/// singularities sitting at `a = 0` are resolved down to subnormal distances.
pub fn tanh_sinh<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: Tolerance) -> Integral {
    use std::f64::consts::FRAC_PI_2;
    let width = b - a;
    if width == 0.0 {
        return Integral::ZERO;
    }
    let mut eval = |t: f64| -> f64 {
        // x = a + width * sigma(t), sigma(t) = 1 / (1 + exp(-pi sinh t))
        let sh = FRAC_PI_2 * t.sinh();
        let ch = FRAC_PI_2 * t.cosh();
        let e = (-2.0 * sh).exp();
        let x = if t <= 0.0 {
            // distance from a: width / (1 + exp(-2 sh))
            a + width / (1.0 + e)
        } else {
            b - width * e / (1.0 + e)
        };
        if x <= a || x >= b {
            return 0.0;
        }
        // dx/dt = width * 2 ch * e / (1 + e)^2
        let jac = width * 2.0 * ch * e / ((1.0 + e) * (1.0 + e));
        let y = f(x) * jac;
        if y.is_finite() {
            y
        } else {
            0.0
        }
    };
    let t_max = 6.5;
    let mut h = 0.5;
    let mut sum = eval(0.0);
    let mut k = 1;
    let mut evaluations = 1;
    while k as f64 * h <= t_max {
        let t = k as f64 * h;
        sum += eval(t) + eval(-t);
        evaluations += 2;
        k += 1;
    }
    let mut estimate = sum * h;
    let mut error = f64::INFINITY;
    for _level in 0..12 {
        h *= 0.5;
        let mut k = 1;
        while k as f64 * h <= t_max {
            let t = k as f64 * h;
            sum += eval(t) + eval(-t);
            evaluations += 2;
            k += 2;
        }
        let next = sum * h;
        error = (next - estimate).abs();
        estimate = next;
        if tol.allows(estimate, error * 10.0) && error.is_finite() {
            return Integral {
                value: estimate,
                error,
                evaluations,
                converged: true,
            };
        }
    }
    Integral {
        value: estimate,
        error,
        evaluations,
        converged: tol.allows(estimate, error),
    }
}

/// `∫₀^∞ f(x) dx`, split at `split` with the upper half mapped by `x = split/t`.
/// Both halves go through tanh–sinh, so algebraic behaviour at 0 and
/// algebraic decay at infinity are both handled.
pub fn half_line<F: FnMut(f64) -> f64>(mut f: F, split: f64, tol: Tolerance) -> Integral {
    let lower = tanh_sinh(&mut f, 0.0, split, tol);
    let upper = tanh_sinh(
        |t| {
            let x = split / t;
            if x.is_finite() {
                f(x) * split / (t * t)
            } else {
                0.0
            }
        },
        0.0,
        1.0,
        tol,
    );
    lower.add(upper)
}
