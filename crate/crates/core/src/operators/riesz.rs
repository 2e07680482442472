use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::GridFunction;

fn check(f: &GridFunction, alpha: f64) -> Result<()> {
    if f.dim() != 1 {
        return Err(Error::param("the fractional integral is implemented for d = 1 only"));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::param(format!("fractional integral needs 0 < alpha < d = 1, got {alpha}")));
    }
    Ok(())
}

/// `∫_a^b |x - y|^(alpha-1) dy` in closed form.
fn kernel_mass(x: f64, a: f64, b: f64, alpha: f64) -> f64 {
    if x <= a {
        ((b - x).powf(alpha) - (a - x).powf(alpha)) / alpha
    } else if x >= b {
        ((x - a).powf(alpha) - (x - b).powf(alpha)) / alpha
    } else {
        ((x - a).powf(alpha) + (b - x).powf(alpha)) / alpha
    }
}

/// `I_alpha f(x) = ∫ f(y) |x - y|^(alpha - d) dy` at an arbitrary point of `[0,1]`.
pub fn frac_integral_at(f: &GridFunction, alpha: f64, x: f64) -> Result<f64> {
    check(f, alpha)?;
    let h = f.cell_measure();
    Ok(f.values()
        .iter()
        .enumerate()
        .filter(|(_, v)| **v != 0.0)
        .map(|(i, v)| v * kernel_mass(x, i as f64 * h, (i + 1) as f64 * h, alpha))
        .sum())
}

/// `I_alpha f` at the cell midpoints, as a grid function on the cells of `f`.
///
/// At midpoints the per-cell kernel masses depend only on the cell offset,
/// `h^alpha g(|j|)`, so one table of `g` serves every target.
pub fn frac_integral(f: &GridFunction, alpha: f64) -> Result<GridFunction> {
    check(f, alpha)?;
    let n = f.len();
    let h = f.cell_measure();
    let g: Vec<f64> = (0..n)
        .map(|j| {
            if j == 0 {
                2.0 * 0.5f64.powf(alpha) / alpha
            } else {
                let j = j as f64;
                ((j + 0.5).powf(alpha) - (j - 0.5).powf(alpha)) / alpha
            }
        })
        .collect();
    let scale = h.powf(alpha);
    let vals = f.values();
    let out = (0..n)
        .into_par_iter()
        .map(|t| {
            let s: f64 = vals.iter().enumerate().map(|(c, v)| v * g[c.abs_diff(t)]).sum();
            s * scale
        })
        .collect();
    GridFunction::new(1, f.depth(), out)
}

/// `(x_i, I_alpha f(x_i))` at the lattice nodes `x_i = i 2^-K`, `i = 0..=2^K`.
pub fn frac_integral_nodes(f: &GridFunction, alpha: f64) -> Result<Vec<(f64, f64)>> {
    check(f, alpha)?;
    let h = f.cell_measure();
    (0..=f.len())
        .into_par_iter()
        .map(|i| {
            let x = i as f64 * h;
            frac_integral_at(f, alpha, x).map(|v| (x, v))
        })
        .collect()
}
