use serde::Serialize;

use super::characteristics::lattice_sup;
use super::{a_infty_char, Weight};
use crate::dyadic::DyadicCube;
use crate::error::{Error, Result};

/// Outcome of checking `<w^r>_Q^(1/r) <= 2 <w>_Q` on every dyadic cube of
/// level `<= depth`, with `r = 1 + 1/(c [w]_{A_inf})`.
#[derive(Debug, Clone, Serialize)]
pub struct ReverseHolderReport {
    pub c: f64,
    pub a_infty: f64,
    pub r: f64,
    pub worst_ratio: f64,
    pub worst_cube: DyadicCube,
    pub depth: u32,
    pub pass: bool,
}

pub fn reverse_holder_check(w: &Weight, c: f64, depth: u32) -> Result<ReverseHolderReport> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::param(format!("reverse Hölder constant c = {c} must be positive")));
    }
    let a_infty = a_infty_char(w, depth)?;
    let r = 1.0 + 1.0 / (c * a_infty);
    let dim = w.dim();
    // The ratio is scale invariant; normalizing keeps w^r finite for large r.
    let unit = match w {
        Weight::Grid(g) => w.scaled(1.0 / g.max_value())?,
        Weight::Power { .. } => w.clone(),
    };
    let hi = unit.pyramid(r, depth)?;
    let lo = unit.pyramid(1.0, depth)?;
    let worst = lattice_sup(dim, depth, |k, i| {
        let m = 0.5f64.powi((k * dim as u32) as i32);
        (hi.level(k)[i as usize] / m).powf(1.0 / r) / (lo.level(k)[i as usize] / m)
    });
    Ok(ReverseHolderReport {
        c,
        a_infty,
        r,
        worst_ratio: worst.value,
        worst_cube: worst.cube,
        depth,
        pass: worst.value <= 2.0,
    })
}

fn passes(corpus: &[Weight], c: f64, depth: u32) -> Result<bool> {
    for w in corpus {
        match reverse_holder_check(w, c, depth) {
            Ok(rep) if rep.pass => {}
            Ok(_) | Err(Error::NonIntegrable { .. }) => return Ok(false),
            Err(e) => return Err(e),
        }
    }
    Ok(true)
}

/// Smallest `c` (to relative precision `rtol`) for which every weight of the
/// corpus passes. The worst ratio decreases as `c` grows (r moves towards
/// 1), so the passing set is a half-line and bisection in `log c` applies.
pub fn calibrate_reverse_holder(corpus: &[Weight], depth: u32, rtol: f64) -> Result<f64> {
    if corpus.is_empty() {
        return Err(Error::param("reverse Hölder calibration needs a nonempty corpus"));
    }
    let (mut lo, mut hi) = (1.0f64, 1.0f64);
    while !passes(corpus, hi, depth)? {
        hi *= 2.0;
        if hi > 1e12 {
            return Err(Error::Hypothesis("no reverse Hölder constant below 1e12 passes".into()));
        }
    }
    loop {
        lo /= 2.0;
        if lo < 1e-12 || !passes(corpus, lo, depth)? {
            break;
        }
        hi = lo;
    }
    if lo < 1e-12 {
        return Ok(hi);
    }
    while hi / lo - 1.0 > rtol {
        let mid = (lo * hi).sqrt();
        if passes(corpus, mid, depth)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}
