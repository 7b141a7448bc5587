use crate::error::{Error, Result};

/// Central-difference gradient of `f` at `params`.
pub fn fd_gradient<F>(f: F, params: &[f64], step: f64) -> Vec<f64>
where
    F: Fn(&[f64]) -> f64,
{
    let mut p = params.to_vec();
    (0..params.len())
        .map(|i| {
            let orig = p[i];
            p[i] = orig + step;
            let up = f(&p);
            p[i] = orig - step;
            let down = f(&p);
            p[i] = orig;
            (up - down) / (2.0 * step)
        })
        .collect()
}

/// max_i |analyticᵢ − fdᵢ| / max(1, |analyticᵢ|) against central differences.
pub fn fd_check<F>(f: F, params: &[f64], analytic: &[f64], step: f64) -> Result<f64>
where
    F: Fn(&[f64]) -> f64,
{
    if !(step > 0.0) {
        return Err(Error::Usage(format!("finite-difference step must be positive, got {step}")));
    }
    if analytic.len() != params.len() {
        return Err(Error::Usage(format!(
            "gradient has {} entries for {} parameters",
            analytic.len(),
            params.len()
        )));
    }
    let fd = fd_gradient(f, params, step);
    Ok(analytic
        .iter()
        .zip(&fd)
        .map(|(a, n)| (a - n).abs() / a.abs().max(1.0))
        .fold(0.0, f64::max))
}
