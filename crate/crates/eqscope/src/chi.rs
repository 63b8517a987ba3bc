//! Perturbation-budget calibration: the sum-of-squares distance of i.i.d.
//! Gaussian entry noise is sigma^2 times a chi-square variable, so a
//! high-probability budget is sigma^2 times a chi-square quantile.

use statrs::function::gamma::gamma_lr;

/// `sigma^2 * Q` where `Q` is the chi-square quantile at `level` with `dof`
/// degrees of freedom, found by bisection on the regularized lower
/// incomplete gamma `P(dof/2, x/2)` to absolute tolerance 1e-8.
pub fn chi_square_delta(dof: usize, level: f64, sigma: f64) -> Result<f64, String> {
    if dof == 0 {
        return Err("dof must be positive".into());
    }
    if !(0.0 < level && level < 1.0) {
        return Err(format!("level {level} outside (0, 1)"));
    }
    let a = dof as f64 / 2.0;
    let cdf = |x: f64| gamma_lr(a, x / 2.0);
    let mut lo = 0.0f64;
    let mut hi = dof as f64;
    while cdf(hi) < level {
        hi *= 2.0;
        if hi > 1e300 {
            return Err("quantile bracket overflow".into());
        }
    }
    while hi - lo > 1e-8 {
        let mid = 0.5 * (lo + hi);
        if cdf(mid) < level {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(sigma * sigma * 0.5 * (lo + hi))
}
