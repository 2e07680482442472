//! Sparse operators, maximal functions, the fractional integral and the
//! level-set decomposition of a sparse family.

mod levels;
mod maximal;
mod riesz;

pub use levels::{decompose_levels, LevelSetDecomposition, RetentionReport, SplitReport, TailReport};
pub use maximal::{frac_maximal, weighted_maximal};
pub use riesz::{frac_integral, frac_integral_at, frac_integral_nodes};

use crate::dyadic::{cells_per_level, DyadicCube, ExponentParams, SparseFamily};
use crate::error::{Error, Result};
use crate::grid::{accumulate_down, GridFunction, Pyramid};
use crate::weights::Weight;

/// `|Q|^(alpha/d - 1)` for a level-`k` cube in dimension `dim`.
pub(crate) fn frac_factor(dim: u8, k: u32, alpha: f64) -> f64 {
    2f64.powf(k as f64 * (dim as f64 - alpha))
}

pub(crate) fn check_alpha(dim: u8, alpha: f64) -> Result<()> {
    if !(alpha >= 0.0 && alpha < dim as f64) {
        return Err(Error::param(format!("alpha = {alpha} must satisfy 0 <= alpha < d = {dim}")));
    }
    Ok(())
}

/// Fractional average `<f>_{alpha,Q} = |Q|^(alpha/d - 1) ∫_Q f`.
pub fn frac_average(f: &GridFunction, q: &DyadicCube, alpha: f64) -> Result<f64> {
    check_alpha(f.dim(), alpha)?;
    Ok(frac_factor(f.dim(), q.level(), alpha) * f.integral(q)?)
}

/// Masses of `f sigma` on every dyadic cube of level `<= depth(f)`.
pub fn weighted_masses(f: &GridFunction, sigma: &Weight) -> Result<Pyramid> {
    if f.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            found: sigma.dim(),
        });
    }
    let cells = sigma.cell_masses(1.0, f.depth())?;
    let masses = f.values().iter().zip(&cells).map(|(a, b)| a * b).collect();
    Ok(Pyramid::from_cell_masses(f.dim(), f.depth(), masses))
}

fn check_family_depth(cubes: &[DyadicCube], dim: u8, depth: u32) -> Result<()> {
    for q in cubes {
        if q.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: q.dim(),
            });
        }
        if q.level() > depth {
            return Err(Error::TooDeep {
                cube: *q,
                level: q.level(),
                depth,
            });
        }
    }
    Ok(())
}

/// `sum_{Q in cubes} <mu>_{alpha,Q}^nu 1_Q` on the depth-`depth` cells,
/// where `mu` is given by its mass pyramid. No root is taken.
pub(crate) fn nu_sum(
    cubes: &[DyadicCube],
    masses: &Pyramid,
    alpha: f64,
    nu: f64,
) -> Result<Vec<f64>> {
    let (dim, depth) = (masses.dim(), masses.depth());
    check_family_depth(cubes, dim, depth)?;
    let mut levels: Vec<Vec<f64>> = (0..=depth)
        .map(|k| vec![0.0; cells_per_level(dim, k) as usize])
        .collect();
    for q in cubes {
        let avg = frac_factor(dim, q.level(), alpha) * masses.mass(q);
        levels[q.level() as usize][q.linear_index() as usize] += avg.powf(nu);
    }
    Ok(accumulate_down(dim, levels))
}

fn root(sum: Vec<f64>, nu: f64, dim: u8, depth: u32) -> Result<GridFunction> {
    let values = if nu == 1.0 {
        sum
    } else {
        sum.into_iter().map(|v| v.powf(1.0 / nu)).collect()
    };
    GridFunction::new(dim, depth, values)
}

/// `A^S_{alpha,nu}(f) = (sum_{Q in S} <f>_{alpha,Q}^nu 1_Q)^(1/nu)`, exact on
/// the cells of `f`.
pub fn sparse_apply(s: &SparseFamily, f: &GridFunction, prm: &ExponentParams) -> Result<GridFunction> {
    check_alpha(f.dim(), prm.alpha())?;
    let sum = nu_sum(s.cubes(), &f.pyramid(), prm.alpha(), prm.nu())?;
    root(sum, prm.nu(), f.dim(), f.depth())
}

/// `A^S_{alpha,nu}(f sigma)`.
pub fn sparse_apply_weighted(
    s: &SparseFamily,
    f: &GridFunction,
    sigma: &Weight,
    prm: &ExponentParams,
) -> Result<GridFunction> {
    check_alpha(f.dim(), prm.alpha())?;
    let sum = nu_sum(s.cubes(), &weighted_masses(f, sigma)?, prm.alpha(), prm.nu())?;
    root(sum, prm.nu(), f.dim(), f.depth())
}

/// Overlap count `b = sum_{Q in cubes} 1_Q` on the depth-`depth` lattice.
pub fn level_overlap_function(cubes: &[DyadicCube], dim: u8, depth: u32) -> Result<GridFunction> {
    check_family_depth(cubes, dim, depth)?;
    let mut levels: Vec<Vec<f64>> = (0..=depth)
        .map(|k| vec![0.0; cells_per_level(dim, k) as usize])
        .collect();
    for q in cubes {
        levels[q.level() as usize][q.linear_index() as usize] += 1.0;
    }
    GridFunction::new(dim, depth, accumulate_down(dim, levels))
}
