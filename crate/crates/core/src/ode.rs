//! Fixed-step fourth-order Runge-Kutta stepping shared by the closed-loop
//! simulator and the reference integrations used to calibrate the predictor.

use nalgebra::DVector;

/// One classical RK4 step of length `h` for `x' = f(t, x)`.
pub fn rk4_step<F>(f: &F, t: f64, x: &DVector<f64>, h: f64) -> DVector<f64>
where
    F: Fn(f64, &DVector<f64>) -> DVector<f64>,
{
    let k1 = f(t, x);
    let k2 = f(t + 0.5 * h, &(x + &k1 * (0.5 * h)));
    let k3 = f(t + 0.5 * h, &(x + &k2 * (0.5 * h)));
    let k4 = f(t + h, &(x + &k3 * h));
    x + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0)
}

/// Integrates `x' = f(t, x)` over `[t0, t1]` with uniform steps no longer
/// than `h_max`. The right-hand side must be smooth on the whole span;
/// callers split at input discontinuities and freeze held values per span.
pub fn integrate_span<F>(f: &F, t0: f64, t1: f64, x0: DVector<f64>, h_max: f64) -> DVector<f64>
where
    F: Fn(f64, &DVector<f64>) -> DVector<f64>,
{
    assert!(h_max > 0.0 && t1 >= t0);
    let span = t1 - t0;
    if span == 0.0 {
        return x0;
    }
    let steps = (span / h_max).ceil().max(1.0) as usize;
    let h = span / steps as f64;
    let mut x = x0;
    for k in 0..steps {
        // Step endpoints computed from the span, not accumulated.
        let tk = t0 + h * k as f64;
        x = rk4_step(f, tk, &x, h);
    }
    x
}
