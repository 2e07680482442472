use super::{check_alpha, frac_factor};
use crate::dyadic::{cells_per_level, parent_linear};
use crate::error::{Error, Result};
use crate::grid::{GridFunction, Pyramid};
use crate::weights::Weight;

/// Top-down running max of `value(level, index)` over the ancestors of
/// every cell, using levels `0..=top` only, written onto the cells of
/// `depth >= top`.
fn ancestor_max(dim: u8, depth: u32, top: u32, value: impl Fn(u32, u64) -> f64) -> Vec<f64> {
    let mut cur = vec![value(0, 0)];
    for k in 1..=depth {
        cur = (0..cells_per_level(dim, k))
            .map(|i| {
                let up = cur[parent_linear(dim, k, i) as usize];
                if k <= top {
                    up.max(value(k, i))
                } else {
                    up
                }
            })
            .collect();
    }
    cur
}

/// Dyadic fractional maximal function
/// `M_alpha f(x) = max_{x in Q, level(Q) <= K} <f>_{alpha,Q}` on the cells of `f`.
pub fn frac_maximal(f: &GridFunction, alpha: f64, depth_limit: u32) -> Result<GridFunction> {
    check_alpha(f.dim(), alpha)?;
    let (dim, depth) = (f.dim(), f.depth());
    let py = f.pyramid();
    let top = depth_limit.min(depth);
    let values = ancestor_max(dim, depth, top, |k, i| frac_factor(dim, k, alpha) * py.level(k)[i as usize]);
    GridFunction::new(dim, depth, values)
}

/// `M_{sigma,nu} f = (M_sigma(f^nu))^(1/nu)` with
/// `M_sigma g(x) = max_{x in Q} sigma(Q)^-1 ∫_Q g sigma`; `nu = 1` gives `M_sigma`.
pub fn weighted_maximal(f: &GridFunction, sigma: &Weight, nu: f64) -> Result<GridFunction> {
    if !(nu > 0.0 && nu.is_finite()) {
        return Err(Error::param(format!("nu = {nu} must be positive")));
    }
    if f.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            found: sigma.dim(),
        });
    }
    let (dim, depth) = (f.dim(), f.depth());
    let sig = sigma.cell_masses(1.0, depth)?;
    let num: Vec<f64> = f.values().iter().zip(&sig).map(|(v, s)| v.powf(nu) * s).collect();
    let num = Pyramid::from_cell_masses(dim, depth, num);
    let den = Pyramid::from_cell_masses(dim, depth, sig);
    let values = ancestor_max(dim, depth, depth, |k, i| {
        num.level(k)[i as usize] / den.level(k)[i as usize]
    });
    GridFunction::new(dim, depth, values.into_iter().map(|v| v.powf(1.0 / nu)).collect())
}
