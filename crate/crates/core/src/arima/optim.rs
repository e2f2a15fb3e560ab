//! Quasi-Newton minimizer with numeric gradients, plus the partial
//! autocorrelation transform that keeps AR/MA searches unconstrained.

/// Hard cap on the magnitude of transformed partial autocorrelations;
/// keeps characteristic roots strictly outside the unit circle.
const PACF_CLAMP: f64 = 0.98;

/// Map unconstrained reals to a stationary AR coefficient vector through
/// tanh-ed partial autocorrelations and the Durbin-Levinson recursion.
pub(crate) fn unconstrained_to_ar(u: &[f64]) -> Vec<f64> {
    let pacf: Vec<f64> = u.iter().map(|v| v.tanh().clamp(-PACF_CLAMP, PACF_CLAMP)).collect();
    durbin_levinson(&pacf)
}

/// Same map negated: yields an invertible MA coefficient vector for the
/// polynomial 1 + theta_1 z + ... + theta_q z^q.
pub(crate) fn unconstrained_to_ma(u: &[f64]) -> Vec<f64> {
    unconstrained_to_ar(u).into_iter().map(|v| -v).collect()
}

fn durbin_levinson(pacf: &[f64]) -> Vec<f64> {
    let p = pacf.len();
    let mut phi = vec![0.0; p];
    let mut work = vec![0.0; p];
    for (k, &a) in pacf.iter().enumerate() {
        work[..k].copy_from_slice(&phi[..k]);
        for i in 0..k {
            phi[i] = work[i] - a * work[k - 1 - i];
        }
        phi[k] = a;
    }
    phi
}

/// Inverse of [`unconstrained_to_ar`]; `None` when the coefficients are not
/// strictly stationary (used only to seed the optimizer).
pub(crate) fn ar_to_unconstrained(phi: &[f64]) -> Option<Vec<f64>> {
    let p = phi.len();
    let mut current = phi.to_vec();
    let mut pacf = vec![0.0; p];
    for k in (0..p).rev() {
        let a = current[k];
        if a.abs() >= 1.0 {
            return None;
        }
        pacf[k] = a;
        if k > 0 {
            let denom = 1.0 - a * a;
            let prev: Vec<f64> = (0..k)
                .map(|i| (current[i] + a * current[k - 1 - i]) / denom)
                .collect();
            current[..k].copy_from_slice(&prev);
        }
    }
    Some(
        pacf.iter()
            .map(|&r| r.clamp(-0.98, 0.98).atanh())
            .collect(),
    )
}

#[cfg(test)]
pub(crate) fn ma_to_unconstrained(theta: &[f64]) -> Option<Vec<f64>> {
    let negated: Vec<f64> = theta.iter().map(|v| -v).collect();
    ar_to_unconstrained(&negated)
}

#[derive(Debug, Clone)]
#[allow(dead_code)] // diagnostic fields are read by tests
pub(crate) struct OptimResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Objective value after each accepted step (non-increasing).
    pub history: Vec<f64>,
}

/// BFGS with central-difference gradients and Armijo backtracking.
///
/// Converges when the relative objective change falls below `tol` or the
/// gradient vanishes; infinite objective values are treated as out-of-range
/// by the line search.
pub(crate) fn minimize<F>(f: F, x0: &[f64], max_iter: usize, tol: f64) -> OptimResult
where
    F: Fn(&[f64]) -> f64,
{
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut fx = f(&x);
    let mut history = vec![fx];

    if n == 0 || !fx.is_finite() {
        return OptimResult {
            x,
            value: fx,
            iterations: 0,
            converged: fx.is_finite(),
            history,
        };
    }

    // Inverse Hessian approximation, started at the identity.
    let mut h_inv = identity(n);
    let mut grad = numeric_gradient(&f, &x, fx);

    for iter in 0..max_iter {
        let grad_norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        if grad_norm < 1e-8 {
            return OptimResult {
                x,
                value: fx,
                iterations: iter,
                converged: true,
                history,
            };
        }

        // Search direction d = -H g.
        let mut dir = vec![0.0; n];
        for i in 0..n {
            for j in 0..n {
                dir[i] -= h_inv[i * n + j] * grad[j];
            }
        }
        let descent: f64 = dir.iter().zip(&grad).map(|(d, g)| d * g).sum();
        if descent >= 0.0 {
            // Reset a corrupted Hessian approximation to steepest descent.
            h_inv = identity(n);
            for (d, g) in dir.iter_mut().zip(&grad) {
                *d = -g;
            }
        }
        let descent: f64 = dir.iter().zip(&grad).map(|(d, g)| d * g).sum();

        // Armijo backtracking.
        let mut step = 1.0;
        let mut x_new = vec![0.0; n];
        let mut f_new = f64::INFINITY;
        let mut accepted = false;
        for _ in 0..50 {
            for i in 0..n {
                x_new[i] = x[i] + step * dir[i];
            }
            f_new = f(&x_new);
            if f_new.is_finite() && f_new <= fx + 1e-4 * step * descent {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            // No decrease possible along this direction: local optimum.
            return OptimResult {
                x,
                value: fx,
                iterations: iter,
                converged: true,
                history,
            };
        }

        let grad_new = numeric_gradient(&f, &x_new, f_new);

        // BFGS update with curvature guard.
        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let yv: Vec<f64> = grad_new.iter().zip(&grad).map(|(a, b)| a - b).collect();
        let sy: f64 = s.iter().zip(&yv).map(|(a, b)| a * b).sum();
        if sy > 1e-12 {
            bfgs_update(&mut h_inv, &s, &yv, sy, n);
        }

        let rel_change = (fx - f_new).abs() / fx.abs().max(1.0);
        x = x_new;
        fx = f_new;
        grad = grad_new;
        history.push(fx);

        if rel_change < tol {
            return OptimResult {
                x,
                value: fx,
                iterations: iter + 1,
                converged: true,
                history,
            };
        }
    }

    OptimResult {
        x,
        value: fx,
        iterations: max_iter,
        converged: false,
        history,
    }
}

fn identity(n: usize) -> Vec<f64> {
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        m[i * n + i] = 1.0;
    }
    m
}

fn numeric_gradient<F>(f: &F, x: &[f64], fx: f64) -> Vec<f64>
where
    F: Fn(&[f64]) -> f64,
{
    let n = x.len();
    let mut grad = vec![0.0; n];
    let mut probe = x.to_vec();
    for i in 0..n {
        let h = 6.0e-6 * (1.0 + x[i].abs());
        probe[i] = x[i] + h;
        let fp = f(&probe);
        probe[i] = x[i] - h;
        let fm = f(&probe);
        probe[i] = x[i];
        grad[i] = if fp.is_finite() && fm.is_finite() {
            (fp - fm) / (2.0 * h)
        } else if fp.is_finite() {
            (fp - fx) / h
        } else if fm.is_finite() {
            (fx - fm) / h
        } else {
            0.0
        };
    }
    grad
}

fn bfgs_update(h_inv: &mut [f64], s: &[f64], y: &[f64], sy: f64, n: usize) {
    // H <- (I - s y'/sy) H (I - y s'/sy) + s s'/sy
    let rho = 1.0 / sy;
    let mut hy = vec![0.0; n];
    for i in 0..n {
        for j in 0..n {
            hy[i] += h_inv[i * n + j] * y[j];
        }
    }
    let yhy: f64 = y.iter().zip(&hy).map(|(a, b)| a * b).sum();
    for i in 0..n {
        for j in 0..n {
            h_inv[i * n + j] += rho * rho * (sy + yhy) * s[i] * s[j]
                - rho * (hy[i] * s[j] + s[i] * hy[j]);
        }
    }
}
