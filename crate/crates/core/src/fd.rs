//! Central finite differences, used only by the brute-force oracles.

use crate::error::Result;

/// Central-difference Jacobian: `out[d][c] = ∂f_c/∂x_d`.
///
/// The step along axis `d` is `h · max(1, |x_d|)`. With `richardson`,
/// one extrapolation step `(4 D(h/2) − D(h)) / 3` removes the `h²` term.
pub fn jacobian<F>(f: F, x: &[f64], h: f64, richardson: bool) -> Result<Vec<Vec<f64>>>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let mut out = Vec::with_capacity(x.len());
    for d in 0..x.len() {
        let step = h * x[d].abs().max(1.0);
        let coarse = central(&f, x, d, step)?;
        if richardson {
            let fine = central(&f, x, d, 0.5 * step)?;
            out.push(fine.iter().zip(&coarse).map(|(a, b)| (4.0 * a - b) / 3.0).collect());
        } else {
            out.push(coarse);
        }
    }
    Ok(out)
}

fn central<F>(f: &F, x: &[f64], d: usize, step: f64) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let mut xp = x.to_vec();
    let mut xm = x.to_vec();
    xp[d] += step;
    xm[d] -= step;
    let fp = f(&xp)?;
    let fm = f(&xm)?;
    Ok(fp.iter().zip(&fm).map(|(a, b)| (a - b) / (2.0 * step)).collect())
}

/// Scalar derivative of a one-parameter family, central difference.
pub fn derivative<F>(f: F, t: f64, h: f64) -> Result<Vec<f64>>
where
    F: Fn(f64) -> Result<Vec<f64>>,
{
    let fp = f(t + h)?;
    let fm = f(t - h)?;
    Ok(fp.iter().zip(&fm).map(|(a, b)| (a - b) / (2.0 * h)).collect())
}
