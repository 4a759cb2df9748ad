//! Small trapezoid-rule and interpolation helpers shared by the analytics.

pub(crate) fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    x.windows(2)
        .zip(y.windows(2))
        .map(|(xs, ys)| 0.5 * (ys[0] + ys[1]) * (xs[1] - xs[0]))
        .sum()
}

/// Running trapezoid integral, starting at 0 on the first abscissa.
pub(crate) fn cumulative_trapezoid(x: &[f64], y: &[f64]) -> Vec<f64> {
    debug_assert_eq!(x.len(), y.len());
    let mut out = Vec::with_capacity(x.len());
    let mut acc = 0.0;
    out.push(0.0);
    for i in 1..x.len() {
        acc += 0.5 * (y[i - 1] + y[i]) * (x[i] - x[i - 1]);
        out.push(acc);
    }
    out
}

pub(crate) fn is_strictly_increasing(x: &[f64]) -> bool {
    x.iter().all(|v| v.is_finite()) && x.windows(2).all(|w| w[1] > w[0])
}

/// `n` equally spaced points covering [0, 1] with exact endpoints.
pub(crate) fn unit_grid(n: usize) -> Vec<f64> {
    let last = (n - 1) as f64;
    (0..n).map(|i| i as f64 / last).collect()
}

/// Linear interpolation of (x, y) at `t` for nondecreasing `x`; clamps outside the range.
/// Zero-length segments are skipped so a repeated abscissa resolves to its last value.
pub(crate) fn interp(x: &[f64], y: &[f64], t: f64) -> f64 {
    let n = x.len();
    if t <= x[0] {
        return y[0];
    }
    if t >= x[n - 1] {
        return y[n - 1];
    }
    // first index with x[idx] > t
    let idx = x.partition_point(|&v| v <= t);
    let (x0, x1) = (x[idx - 1], x[idx]);
    let (y0, y1) = (y[idx - 1], y[idx]);
    y0 + (y1 - y0) * (t - x0) / (x1 - x0)
}
