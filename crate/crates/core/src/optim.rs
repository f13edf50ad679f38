//! Box-constrained limited-memory quasi-Newton minimization.
//!
//! A projected L-BFGS: the search direction comes from the two-loop recursion
//! restricted to the variables that are not pinned against a bound, steps are
//! projected back into the box, and a backtracking line search enforces
//! sufficient decrease along the projected path. Gradients are central finite
//! differences.

/// Stopping rules and numerical settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxQnSettings {
    /// Stop once the projected gradient's infinity norm falls below this.
    pub grad_tol: f64,
    pub max_iter: usize,
    /// Central-difference step.
    pub fd_step: f64,
    /// Correction pairs kept in memory.
    pub memory: usize,
}

impl Default for BoxQnSettings {
    fn default() -> Self {
        BoxQnSettings {
            grad_tol: 1e-6,
            max_iter: 500,
            fd_step: 1e-3,
            memory: 10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    /// Projected gradient below tolerance.
    Gradient,
    /// No step along the best available direction decreases the objective.
    Stalled,
    MaxIterations,
    /// The objective returned a non-finite value.
    NonFinite,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoxQnResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub termination: Termination,
}

impl BoxQnResult {
    /// Reached a point where no local improvement is found.
    pub fn converged(&self) -> bool {
        matches!(self.termination, Termination::Gradient | Termination::Stalled)
    }
}

fn project(x: &mut [f64], lo: &[f64], hi: &[f64]) {
    for ((v, &l), &h) in x.iter_mut().zip(lo).zip(hi) {
        *v = v.clamp(l, h);
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn central_gradient<F: Fn(&[f64]) -> f64>(f: &F, x: &[f64], h: f64) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            probe[i] = x[i] + h;
            let up = f(&probe);
            probe[i] = x[i] - h;
            let down = f(&probe);
            probe[i] = x[i];
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// Components whose descent direction would leave the box.
fn pinned(x: &[f64], g: &[f64], lo: &[f64], hi: &[f64]) -> Vec<bool> {
    (0..x.len())
        .map(|i| (x[i] <= lo[i] && g[i] > 0.0) || (x[i] >= hi[i] && g[i] < 0.0))
        .collect()
}

/// Minimizes `f` over the box `[lo, hi]` starting from `x0` (projected into the box).
///
/// `f` is evaluated at points up to `fd_step` outside the box when
/// differentiating at a bound, so it must be defined there.
pub fn minimize_box<F: Fn(&[f64]) -> f64>(
    f: F,
    x0: &[f64],
    lo: &[f64],
    hi: &[f64],
    settings: &BoxQnSettings,
) -> BoxQnResult {
    let n = x0.len();
    assert!(lo.len() == n && hi.len() == n, "bounds must match the dimension");

    let mut x = x0.to_vec();
    project(&mut x, lo, hi);
    let mut fx = f(&x);
    if !fx.is_finite() {
        return BoxQnResult {
            x,
            value: fx,
            iterations: 0,
            termination: Termination::NonFinite,
        };
    }
    let mut g = central_gradient(&f, &x, settings.fd_step);
    let mut history: Vec<(Vec<f64>, Vec<f64>, f64)> = Vec::with_capacity(settings.memory);

    for iter in 0..settings.max_iter {
        let fixed = pinned(&x, &g, lo, hi);
        let pg_norm = (0..n)
            .filter(|&i| !fixed[i])
            .map(|i| g[i].abs())
            .fold(0.0, f64::max);
        if pg_norm < settings.grad_tol {
            return BoxQnResult {
                x,
                value: fx,
                iterations: iter,
                termination: Termination::Gradient,
            };
        }

        let mut use_memory = !history.is_empty();
        loop {
            let dir = if use_memory {
                two_loop(&g, &history, &fixed)
            } else {
                (0..n).map(|i| if fixed[i] { 0.0 } else { -g[i] }).collect()
            };
            let slope = dot(&dir, &g);
            if slope >= 0.0 && use_memory {
                use_memory = false;
                continue;
            }

            // First steepest step moves the largest coordinate by about one unit.
            let mut step = if use_memory { 1.0 } else { 1.0 / pg_norm.max(1.0) };
            let mut accepted = None;
            for _ in 0..50 {
                let mut trial: Vec<f64> = x.iter().zip(&dir).map(|(xi, di)| xi + step * di).collect();
                project(&mut trial, lo, hi);
                let moved: Vec<f64> = trial.iter().zip(&x).map(|(a, b)| a - b).collect();
                if moved.iter().all(|m| m.abs() < 1e-14) {
                    break;
                }
                let ft = f(&trial);
                if ft.is_finite() && ft <= fx + 1e-4 * dot(&g, &moved) {
                    accepted = Some((trial, ft));
                    break;
                }
                step *= 0.5;
            }

            match accepted {
                Some((trial, ft)) => {
                    let g_new = central_gradient(&f, &trial, settings.fd_step);
                    let s: Vec<f64> = trial.iter().zip(&x).map(|(a, b)| a - b).collect();
                    let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
                    let sy = dot(&s, &y);
                    if sy > 1e-12 {
                        if history.len() == settings.memory {
                            history.remove(0);
                        }
                        history.push((s, y, 1.0 / sy));
                    }
                    let gain = fx - ft;
                    x = trial;
                    fx = ft;
                    g = g_new;
                    if gain <= 1e-15 * fx.abs().max(1.0) {
                        return BoxQnResult {
                            x,
                            value: fx,
                            iterations: iter + 1,
                            termination: Termination::Stalled,
                        };
                    }
                    break;
                }
                None if use_memory => {
                    history.clear();
                    use_memory = false;
                }
                None => {
                    return BoxQnResult {
                        x,
                        value: fx,
                        iterations: iter + 1,
                        termination: Termination::Stalled,
                    };
                }
            }
        }
    }

    BoxQnResult {
        x,
        value: fx,
        iterations: settings.max_iter,
        termination: Termination::MaxIterations,
    }
}

/// L-BFGS two-loop recursion on the free variables; pinned ones get no motion.
fn two_loop(g: &[f64], history: &[(Vec<f64>, Vec<f64>, f64)], fixed: &[bool]) -> Vec<f64> {
    let mask = |v: &[f64]| -> Vec<f64> {
        v.iter()
            .zip(fixed)
            .map(|(&a, &f)| if f { 0.0 } else { a })
            .collect()
    };
    let mut q = mask(g);
    let mut alphas = vec![0.0; history.len()];
    for (k, (s, y, rho)) in history.iter().enumerate().rev() {
        let a = rho * dot(&mask(s), &q);
        alphas[k] = a;
        for (qi, yi) in q.iter_mut().zip(mask(y)) {
            *qi -= a * yi;
        }
    }
    if let Some((s, y, _)) = history.last() {
        let (s, y) = (mask(s), mask(y));
        let yy = dot(&y, &y);
        let sy = dot(&s, &y);
        if yy > 0.0 && sy > 0.0 {
            let scale = sy / yy;
            q.iter_mut().for_each(|v| *v *= scale);
        }
    }
    for (k, (s, y, rho)) in history.iter().enumerate() {
        let b = rho * dot(&mask(y), &q);
        for (qi, si) in q.iter_mut().zip(mask(s)) {
            *qi += (alphas[k] - b) * si;
        }
    }
    q.iter().zip(fixed).map(|(&v, &f)| if f { 0.0 } else { -v }).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unconstrained_quadratic() {
        let f = |x: &[f64]| (x[0] - 3.0).powi(2) + 10.0 * (x[1] + 1.0).powi(2);
        let r = minimize_box(f, &[0.0, 0.0], &[-10.0, -10.0], &[10.0, 10.0], &BoxQnSettings::default());
        assert!(r.converged(), "{r:?}");
        assert!((r.x[0] - 3.0).abs() < 1e-4 && (r.x[1] + 1.0).abs() < 1e-4, "{r:?}");
    }

    #[test]
    fn active_bound() {
        let f = |x: &[f64]| (x[0] - 5.0).powi(2) + (x[1] - 0.5).powi(2);
        let r = minimize_box(f, &[1.0, 1.0], &[0.0, 0.0], &[2.0, 2.0], &BoxQnSettings::default());
        assert!(r.converged());
        assert_eq!(r.x[0], 2.0);
        assert!((r.x[1] - 0.5).abs() < 1e-4);
    }

    #[test]
    fn rosenbrock_in_a_box() {
        let f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let s = BoxQnSettings {
            fd_step: 1e-6,
            ..Default::default()
        };
        let r = minimize_box(f, &[-1.2, 1.0], &[-2.0, -2.0], &[2.0, 2.0], &s);
        assert!((r.x[0] - 1.0).abs() < 1e-3 && (r.x[1] - 1.0).abs() < 2e-3, "{r:?}");
    }

    #[test]
    fn degenerate_box_returns_the_point() {
        let f = |x: &[f64]| -x[0] * x[1];
        let r = minimize_box(f, &[7.0, 9.0], &[3.0, 4.0], &[3.0, 4.0], &BoxQnSettings::default());
        assert_eq!(r.x, vec![3.0, 4.0]);
        assert!(r.converged());
    }

    #[test]
    fn non_finite_start_is_reported() {
        let f = |_: &[f64]| f64::NAN;
        let r = minimize_box(f, &[1.0], &[0.0], &[2.0], &BoxQnSettings::default());
        assert_eq!(r.termination, Termination::NonFinite);
        assert!(!r.converged());
    }
}
