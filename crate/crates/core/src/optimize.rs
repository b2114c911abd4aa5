//! Derivative-free Nelder–Mead minimization.

#[derive(Debug, Clone, Copy)]
pub struct NelderMead {
    pub max_iterations: usize,
    /// Stop once the spread of simplex values falls below this.
    pub ftol: f64,
}

impl Default for NelderMead {
    fn default() -> Self {
        NelderMead {
            max_iterations: 200,
            ftol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
}

impl NelderMead {
    /// Minimizes `f` from the simplex `start, start + step_i e_i`. Infeasible
    /// points should map to `+∞`; NaN is treated the same way.
    pub fn minimize<F: FnMut(&[f64]) -> f64>(
        &self,
        mut f: F,
        start: &[f64],
        step: &[f64],
    ) -> Minimum {
        let n = start.len();
        let mut evaluations = 0;
        let mut eval = |x: &[f64]| {
            evaluations += 1;
            let v = f(x);
            if v.is_nan() {
                f64::INFINITY
            } else {
                v
            }
        };
        let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
        simplex.push((start.to_vec(), eval(start)));
        for i in 0..n {
            let mut x = start.to_vec();
            x[i] += step[i];
            let v = eval(&x);
            simplex.push((x, v));
        }
        let mut iterations = 0;
        let mut converged = false;
        while iterations < self.max_iterations {
            simplex.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| cmp_vec(&a.0, &b.0)));
            let (best, worst) = (simplex[0].1, simplex[n].1);
            if best.is_finite() && (worst - best).abs() <= self.ftol * (1.0 + best.abs()) {
                converged = true;
                break;
            }
            iterations += 1;
            let centroid: Vec<f64> = (0..n)
                .map(|j| simplex[..n].iter().map(|(x, _)| x[j]).sum::<f64>() / n as f64)
                .collect();
            let along = |t: f64| -> Vec<f64> {
                centroid
                    .iter()
                    .zip(&simplex[n].0)
                    .map(|(c, w)| c + t * (w - c))
                    .collect()
            };
            let xr = along(-1.0);
            let fr = eval(&xr);
            if fr < simplex[0].1 {
                let xe = along(-2.0);
                let fe = eval(&xe);
                simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
                continue;
            }
            if fr < simplex[n - 1].1 {
                simplex[n] = (xr, fr);
                continue;
            }
            let (xc, fc) = if fr < simplex[n].1 {
                let xc = along(-0.5);
                let fc = eval(&xc);
                (xc, fc)
            } else {
                let xc = along(0.5);
                let fc = eval(&xc);
                (xc, fc)
            };
            if fc < fr.min(simplex[n].1) {
                simplex[n] = (xc, fc);
                continue;
            }
            let x0 = simplex[0].0.clone();
            for vertex in simplex.iter_mut().skip(1) {
                let x: Vec<f64> = x0
                    .iter()
                    .zip(&vertex.0)
                    .map(|(b, v)| b + 0.5 * (v - b))
                    .collect();
                let v = eval(&x);
                *vertex = (x, v);
            }
        }
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| cmp_vec(&a.0, &b.0)));
        let (x, value) = simplex.swap_remove(0);
        Minimum {
            x,
            value,
            iterations,
            evaluations,
            converged,
        }
    }
}

fn cmp_vec(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(std::cmp::Ordering::Equal)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_rosenbrock_minimum() {
        let nm = NelderMead {
            max_iterations: 2000,
            ftol: 1e-14,
        };
        let m = nm.minimize(
            |x| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2),
            &[-1.2, 1.0],
            &[0.5, 0.5],
        );
        assert!(m.converged);
        assert!(
            (m.x[0] - 1.0).abs() < 1e-4 && (m.x[1] - 1.0).abs() < 1e-4,
            "{:?}",
            m.x
        );
    }

    #[test]
    fn respects_infeasible_region() {
        // minimum of (x-2)² restricted to x <= 1 sits on the boundary
        let m = NelderMead::default().minimize(
            |x| {
                if x[0] > 1.0 {
                    f64::INFINITY
                } else {
                    (x[0] - 2.0).powi(2)
                }
            },
            &[0.0],
            &[0.3],
        );
        assert!(m.x[0] <= 1.0 && m.x[0] > 0.99);
    }

    #[test]
    fn is_deterministic() {
        let f = |x: &[f64]| (x[0] - 0.3).powi(2) + (x[1] + 0.7).abs();
        let a = NelderMead::default().minimize(f, &[1.0, 1.0], &[0.2, 0.2]);
        let b = NelderMead::default().minimize(f, &[1.0, 1.0], &[0.2, 0.2]);
        assert_eq!(a, b);
    }
}
