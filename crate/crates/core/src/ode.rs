//! Fixed-step classical Runge–Kutta.

/// One RK4 step of `y' = f(x, y)`.
pub fn rk4_step<const N: usize>(f: &impl Fn(f64, &[f64; N]) -> [f64; N], x: f64, y: &[f64; N], h: f64) -> [f64; N] {
    let axpy = |a: &[f64; N], k: &[f64; N], c: f64| -> [f64; N] {
        let mut out = *a;
        for (o, kk) in out.iter_mut().zip(k) {
            *o += c * kk;
        }
        out
    };
    let k1 = f(x, y);
    let k2 = f(x + 0.5 * h, &axpy(y, &k1, 0.5 * h));
    let k3 = f(x + 0.5 * h, &axpy(y, &k2, 0.5 * h));
    let k4 = f(x + h, &axpy(y, &k3, h));
    let mut out = *y;
    for n in 0..N {
        out[n] += h / 6.0 * (k1[n] + 2.0 * k2[n] + 2.0 * k3[n] + k4[n]);
    }
    out
}

/// Number of equal steps covering `span` with steps no longer than `step`.
/// A span that is an integer multiple of `step` (to rounding) is split exactly.
pub fn step_count(span: f64, step: f64) -> usize {
    let ratio = span.abs() / step;
    let rounded = ratio.round();
    if (ratio - rounded).abs() < 1e-9 * ratio.max(1.0) {
        (rounded as usize).max(1)
    } else {
        (ratio.ceil() as usize).max(1)
    }
}

/// Value at the midpoint between nodes `k` and `k + 1` of a uniformly sampled
/// line, from the 4-point Lagrange interpolant (fourth order).
pub fn midpoint_value(f: &[f64], k: usize) -> f64 {
    let n = f.len();
    debug_assert!(n >= 4 && k + 1 < n);
    if k == 0 {
        (5.0 * f[0] + 15.0 * f[1] - 5.0 * f[2] + f[3]) / 16.0
    } else if k + 2 == n {
        (5.0 * f[n - 1] + 15.0 * f[n - 2] - 5.0 * f[n - 3] + f[n - 4]) / 16.0
    } else {
        (-f[k - 1] + 9.0 * f[k] + 9.0 * f[k + 1] - f[k + 2]) / 16.0
    }
}
