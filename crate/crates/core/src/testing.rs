//! The testing constant and the closed-form upper-bound formulas, plus the
//! two-sided report comparing them with certified lower bounds.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::dyadic::{conjugate, same, DyadicCube, ExponentParams, SparseFamily};
use crate::error::{Error, Result};
use crate::norms::{weak_opnorm_lower, TestFunction};
use crate::operators::frac_factor;
use crate::weights::{a_infty_char, a_pq_alpha_char, a_pq_char, Weight};

/// Characteristic values consumed by the two-weight bound formulas.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Characteristics {
    /// `[w, sigma]_{A^alpha_{p,q}}`
    pub a_pq_alpha: f64,
    /// `[w]_{A_inf}`
    pub w_a_infty: f64,
    /// `[sigma]_{A_inf}`
    pub sigma_a_infty: f64,
}

impl Characteristics {
    pub fn compute(w: &Weight, sigma: &Weight, prm: &ExponentParams, depth: u32) -> Result<Self> {
        Ok(Characteristics {
            a_pq_alpha: a_pq_alpha_char(w, sigma, prm, depth)?,
            w_a_infty: a_infty_char(w, depth)?,
            sigma_a_infty: a_infty_char(sigma, depth)?,
        })
    }
}

/// A formula value with the case it was selected from. `branches` lists
/// every case of the formula evaluated at the same inputs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LabeledBound {
    pub label: String,
    pub value: f64,
    pub branches: BTreeMap<String, f64>,
    pub flag: Option<String>,
}

impl LabeledBound {
    fn pick(label: &str, branches: BTreeMap<String, f64>, flag: Option<String>) -> Self {
        LabeledBound {
            label: label.to_string(),
            value: branches[label],
            branches,
            flag,
        }
    }
}

fn pos(x: f64) -> f64 {
    x.max(0.0)
}

pub const THM11_DIAGONAL: &str = "p=q>nu,alpha>0";
pub const THM11_MIDDLE: &str = "p<=nu<=q";
pub const THM11_OTHER: &str = "other";

/// Weak-type bound for the sparse operator in terms of the two-weight
/// characteristic and the `A_inf` characteristics of `w` and `sigma`.
pub fn thm11_formula(ch: &Characteristics, prm: &ExponentParams) -> LabeledBound {
    let (p, q, nu) = (prm.p(), prm.q(), prm.nu());
    let base = ch.a_pq_alpha.powf(1.0 / q);
    let t = (nu / p).powi(2);
    let mut branches = BTreeMap::new();
    branches.insert(
        THM11_DIAGONAL.to_string(),
        base * ch.w_a_infty.powf((1.0 - t) / nu) * ch.sigma_a_infty.powf(t / nu),
    );
    branches.insert(THM11_MIDDLE.to_string(), base * ch.sigma_a_infty.powf(1.0 / q));
    branches.insert(THM11_OTHER.to_string(), base * ch.w_a_infty.powf(pos(1.0 / nu - 1.0 / p)));
    let diagonal = same(p, q) && p > nu;
    if diagonal && prm.alpha() > 0.0 {
        LabeledBound::pick(THM11_DIAGONAL, branches, None)
    } else if p <= nu && nu <= q {
        LabeledBound::pick(THM11_MIDDLE, branches, None)
    } else {
        let flag = (diagonal && prm.alpha() == 0.0)
            .then(|| "p=q>nu with alpha=0: third case applied, first case reported alongside".to_string());
        LabeledBound::pick(THM11_OTHER, branches, flag)
    }
}

pub fn bound_thm11(w: &Weight, sigma: &Weight, prm: &ExponentParams, depth: u32) -> Result<LabeledBound> {
    Ok(thm11_formula(&Characteristics::compute(w, sigma, prm, depth)?, prm))
}

fn require_p_above_nu(prm: &ExponentParams) -> Result<()> {
    if prm.p() > prm.nu() {
        Ok(())
    } else {
        Err(Error::Hypothesis(format!(
            "the testing characterization needs p > nu, got p = {}, nu = {}",
            prm.p(),
            prm.nu()
        )))
    }
}

pub const PROP13_DIAGONAL: &str = "p=q,alpha>0";

/// Upper bound for the testing constant.
pub fn prop13_formula(ch: &Characteristics, prm: &ExponentParams) -> Result<LabeledBound> {
    require_p_above_nu(prm)?;
    let (p, q, nu) = (prm.p(), prm.q(), prm.nu());
    let base = ch.a_pq_alpha.powf(nu / q);
    let t = (nu / p).powi(2);
    let mut branches = BTreeMap::new();
    branches.insert(
        PROP13_DIAGONAL.to_string(),
        base * ch.w_a_infty.powf(1.0 - t) * ch.sigma_a_infty.powf(t),
    );
    branches.insert(THM11_OTHER.to_string(), base * ch.w_a_infty.powf(1.0 - nu / p));
    let label = if same(p, q) && prm.alpha() > 0.0 {
        PROP13_DIAGONAL
    } else {
        THM11_OTHER
    };
    Ok(LabeledBound::pick(label, branches, None))
}

pub fn bound_prop13(w: &Weight, sigma: &Weight, prm: &ExponentParams, depth: u32) -> Result<LabeledBound> {
    require_p_above_nu(prm)?;
    prop13_formula(&Characteristics::compute(w, sigma, prm, depth)?, prm)
}

/// `1 + log_+ x`.
pub fn log1(x: f64) -> f64 {
    1.0 + x.ln().max(0.0)
}

fn require_one_weight(prm: &ExponentParams) -> Result<()> {
    prm.require_sobolev()?;
    if prm.nu() < 1.0 {
        return Err(Error::param(format!("one-weight bounds need nu >= 1, got {}", prm.nu())));
    }
    Ok(())
}

/// `[w]_{A_{p,q}}^max(1/q, 1/nu - alpha/d)`, the power part of the
/// one-weight bounds (also the exponent identity for the mixed bound).
pub fn one_weight_exponent(prm: &ExponentParams) -> f64 {
    (1.0 / prm.q()).max(1.0 / prm.nu() - prm.alpha_ratio())
}

/// Upper end `nu/(1 - nu alpha/d)` of the logarithmic window (infinite when
/// the denominator is not positive).
pub fn log_window_top(prm: &ExponentParams) -> f64 {
    let den = 1.0 - prm.nu() * prm.alpha_ratio();
    if den > 0.0 {
        prm.nu() / den
    } else {
        f64::INFINITY
    }
}

/// One-weight bound with the window-restricted logarithmic factor.
/// Inputs: `[w]_{A_{p,q}}` and `[w^q]_{A_inf}`.
pub fn thm43_formula(a_pq: f64, wq_a_infty: f64, prm: &ExponentParams) -> Result<LabeledBound> {
    require_one_weight(prm)?;
    let power = a_pq.powf(one_weight_exponent(prm));
    let log = log1(wq_a_infty).powf(1.0 / prm.nu());
    let mut branches = BTreeMap::new();
    branches.insert("log-window".to_string(), power * log);
    branches.insert("other".to_string(), power);
    let inside = prm.nu() <= prm.q() && prm.q() <= log_window_top(prm);
    Ok(LabeledBound::pick(if inside { "log-window" } else { "other" }, branches, None))
}

/// One-weight bound with the logarithmic factor for every `q >= nu`.
pub fn thm45_formula(a_pq: f64, wq_a_infty: f64, prm: &ExponentParams) -> Result<LabeledBound> {
    require_one_weight(prm)?;
    let power = a_pq.powf(one_weight_exponent(prm));
    let mut branches = BTreeMap::new();
    branches.insert("q<nu".to_string(), power);
    branches.insert("q>=nu".to_string(), power * log1(wq_a_infty).powf(1.0 / prm.nu()));
    Ok(LabeledBound::pick(if prm.q() < prm.nu() { "q<nu" } else { "q>=nu" }, branches, None))
}

fn one_weight_inputs(w: &Weight, prm: &ExponentParams, depth: u32) -> Result<(f64, f64)> {
    let a = a_pq_char(w, prm.p(), prm.q(), depth)?;
    let wq = w.powf(prm.q())?;
    Ok((a, a_infty_char(&wq, depth)?))
}

pub fn bound_thm43(w: &Weight, prm: &ExponentParams, depth: u32) -> Result<LabeledBound> {
    require_one_weight(prm)?;
    let (a, b) = one_weight_inputs(w, prm, depth)?;
    thm43_formula(a, b, prm)
}

pub fn bound_thm45(w: &Weight, prm: &ExponentParams, depth: u32) -> Result<LabeledBound> {
    require_one_weight(prm)?;
    let (a, b) = one_weight_inputs(w, prm, depth)?;
    thm45_formula(a, b, prm)
}

/// Inputs of the square-function corollaries.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SquareInputs {
    /// `[w]_{A_{p,q}}`
    pub a_pq: f64,
    /// `[w^q]_{A_inf}`
    pub wq_a_infty: f64,
    /// `[w^(-p')]_{A_inf}`
    pub wneg_a_infty: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SquareBounds {
    pub mixed: LabeledBound,
    pub pure: LabeledBound,
}

/// Mixed `A_{p,q}`-`A_inf` and pure `A_{p,q}` bounds for the square function
/// (`nu = 2`).
pub fn square_function_formulas(x: &SquareInputs, prm: &ExponentParams) -> Result<SquareBounds> {
    prm.require_sobolev()?;
    if !same(prm.nu(), 2.0) {
        return Err(Error::param(format!("square-function bounds need nu = 2, got {}", prm.nu())));
    }
    let (p, q, a) = (prm.p(), prm.q(), prm.alpha_ratio());
    let top = log_window_top(prm);
    let window = (2.0..=top).contains(&q) || (q >= 2.0 && top.is_infinite());
    let base = x.a_pq.powf(1.0 / q);
    let mut mixed = BTreeMap::new();
    mixed.insert("2<=q<=2/(1-2a/d)".to_string(), base * x.wneg_a_infty.powf(1.0 / q));
    mixed.insert("other".to_string(), base * x.wq_a_infty.powf(pos(0.5 - 1.0 / p)));
    let mixed = LabeledBound::pick(if window { "2<=q<=2/(1-2a/d)" } else { "other" }, mixed, None);

    let pp = prm.p_prime();
    let mut pure = BTreeMap::new();
    pure.insert("2<=q<=2/(1-2a/d)".to_string(), x.a_pq.powf(pp / q * (1.0 - a)));
    pure.insert("q>2/(1-2a/d)".to_string(), x.a_pq.powf(0.5 - a));
    pure.insert("q<2".to_string(), x.a_pq.powf(1.0 / q));
    let label = if q < 2.0 {
        "q<2"
    } else if window {
        "2<=q<=2/(1-2a/d)"
    } else {
        "q>2/(1-2a/d)"
    };
    Ok(SquareBounds {
        mixed,
        pure: LabeledBound::pick(label, pure, None),
    })
}

pub fn bound_cor41_cor42(w: &Weight, prm: &ExponentParams, depth: u32) -> Result<SquareBounds> {
    prm.require_sobolev()?;
    let (a_pq, wq_a_infty) = one_weight_inputs(w, prm, depth)?;
    let wneg = w.powf(-prm.p_prime())?;
    let x = SquareInputs {
        a_pq,
        wq_a_infty,
        wneg_a_infty: a_infty_char(&wneg, depth)?,
    };
    square_function_formulas(&x, prm)
}

/// Testing constant
/// `sup_{R in S} w(R)^(-1/(q/nu)') || sum_{Q in S, Q ⊆ R} <sigma>_{alpha,Q}^(nu-1) <w>_{alpha,Q} 1_Q ||_{L^{(p/nu)'}(sigma)}`.
pub fn testing_constant(s: &SparseFamily, w: &Weight, sigma: &Weight, prm: &ExponentParams) -> Result<f64> {
    testing_constant_with_witness(s, w, sigma, prm).map(|(v, _)| v)
}

pub fn testing_constant_with_witness(
    s: &SparseFamily,
    w: &Weight,
    sigma: &Weight,
    prm: &ExponentParams,
) -> Result<(f64, DyadicCube)> {
    require_p_above_nu(prm)?;
    let dim = s.dim();
    if w.dim() != dim || sigma.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: if w.dim() != dim { w.dim() } else { sigma.dim() },
        });
    }
    let lp = conjugate(prm.p() / prm.nu()).expect("p > nu");
    let lq = conjugate(prm.q() / prm.nu()).expect("q >= p > nu");
    let depth = s.max_level();
    let wp = w.pyramid(1.0, depth)?;
    let sp = sigma.pyramid(1.0, depth)?;
    let cells = sigma.cell_masses(1.0, depth)?;
    let alpha = prm.alpha();
    let coef: Vec<f64> = s
        .cubes()
        .iter()
        .map(|q| {
            let f = frac_factor(dim, q.level(), alpha);
            (f * sp.mass(q)).powf(prm.nu() - 1.0) * f * wp.mass(q)
        })
        .collect();
    let values: Vec<f64> = s
        .cubes()
        .par_iter()
        .map(|r| {
            let cell_ids = r.cells_at(depth);
            let mut local = vec![0.0; cell_ids.len()];
            for (q, c) in s.cubes().iter().zip(&coef) {
                if r.contains(q) {
                    for lin in q.cells_at(depth) {
                        let i = cell_ids.binary_search(&lin).expect("sub-cube cell");
                        local[i] += c;
                    }
                }
            }
            let sum: f64 = cell_ids
                .iter()
                .zip(&local)
                .map(|(lin, g)| g.powf(lp) * cells[*lin as usize])
                .sum();
            sum.powf(1.0 / lp) * wp.mass(r).powf(-1.0 / lq)
        })
        .collect();
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    Ok((values[best], s.cubes()[best]))
}

/// Lower bound, testing constant and formula bounds for one instance.
#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub lower: f64,
    pub lower_nu: f64,
    pub lower_witness: String,
    pub testing: f64,
    pub characteristics: Characteristics,
    pub thm11: LabeledBound,
    pub prop13: LabeledBound,
    pub formula_bounds: BTreeMap<String, f64>,
    pub ratios: BTreeMap<String, f64>,
}

pub const RATIO_LOWER_TESTING: &str = "lower^nu/testing";
pub const RATIO_TESTING_PROP13: &str = "testing/prop13";

pub fn two_sided_report(
    s: &SparseFamily,
    w: &Weight,
    sigma: &Weight,
    prm: &ExponentParams,
    tests: &[TestFunction],
    depth: u32,
) -> Result<BoundReport> {
    require_p_above_nu(prm)?;
    let lower = weak_opnorm_lower(s, w, sigma, prm, tests)?;
    let testing = testing_constant(s, w, sigma, prm)?;
    let ch = Characteristics::compute(w, sigma, prm, depth)?;
    let thm11 = thm11_formula(&ch, prm);
    let prop13 = prop13_formula(&ch, prm)?;
    let lower_nu = lower.value.powf(prm.nu());
    let mut formula_bounds = BTreeMap::new();
    for (k, v) in &thm11.branches {
        formula_bounds.insert(format!("thm11[{k}]"), *v);
    }
    for (k, v) in &prop13.branches {
        formula_bounds.insert(format!("prop13[{k}]"), *v);
    }
    let mut ratios = BTreeMap::new();
    ratios.insert(RATIO_LOWER_TESTING.to_string(), lower_nu / testing);
    ratios.insert(RATIO_TESTING_PROP13.to_string(), testing / prop13.value);
    ratios.insert("lower/thm11".to_string(), lower.value / thm11.value);
    Ok(BoundReport {
        lower: lower.value,
        lower_nu,
        lower_witness: lower.witness_test_id,
        testing,
        characteristics: ch,
        thm11,
        prop13,
        formula_bounds,
        ratios,
    })
}
