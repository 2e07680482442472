//! Extremal power-weight constructions and the exponent-recovery sweeps built
//! on them.
//!
//! All sweeps run over the tower `{[0, 2^-k)}` on `[0,1)`, whose E-sets are
//! the right halves. Power weights make every quantity closed form on the
//! annuli of [`Annuli`], so the sweeps reach lattice depths in the thousands.

mod annuli;

pub use annuli::Annuli;

use std::f64::consts::LN_2;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::defaults;
use crate::dyadic::ExponentParams;
use crate::error::{Error, Result};
use crate::fit::{loglog, LineFit, MIN_POINTS};
use crate::grid::GridFunction;
use crate::operators::LevelSetDecomposition;
use crate::testing::thm45_formula;
use crate::weights::{a_1_char, a_infty_char, a_pq_char, Weight};

fn check_theta(theta: f64) -> Result<()> {
    if theta > 0.0 && theta <= 1.0 {
        Ok(())
    } else {
        Err(Error::param(format!("theta must lie in (0, 1], got {theta}")))
    }
}

/// Theta grids must be strictly decreasing, inside `(0, 1]`, and long enough
/// to fit.
pub fn check_theta_grid(thetas: &[f64]) -> Result<()> {
    if thetas.len() < MIN_POINTS {
        return Err(Error::DegenerateFit(format!(
            "theta grid has {} points, need at least {MIN_POINTS}",
            thetas.len()
        )));
    }
    for t in thetas {
        check_theta(*t)?;
    }
    if thetas.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::param("theta grid must be strictly decreasing"));
    }
    Ok(())
}

fn require_1d(prm: &ExponentParams) -> Result<()> {
    if prm.d() != 1 {
        return Err(Error::param("extremal constructions are one-dimensional"));
    }
    Ok(())
}

/// `w(x) = x^((theta - 1)/q)`.
pub fn extremal_weight(theta: f64, q: f64) -> Result<Weight> {
    check_theta(theta)?;
    Weight::power((theta - 1.0) / q)
}

/// Exponent `e` with `w^(-p') = x^(e - 1)` for the extremal weight.
pub fn dual_exponent(theta: f64, prm: &ExponentParams) -> f64 {
    1.0 + (1.0 - theta) * prm.p_prime() / prm.q()
}

fn sequence_power(theta: f64, nu: f64) -> f64 {
    theta.ln() * (1.0 / (nu - 1.0) - 1.0 / nu)
}

fn require_nu_above_one(nu: f64) -> Result<()> {
    if nu > 1.0 {
        Ok(())
    } else {
        Err(Error::param(format!(
            "the extremal sequence needs nu > 1, got {nu}; use the case2 chain for nu = 1"
        )))
    }
}

/// `ln a_k` on annulus `i`: `theta^(1/(nu-1) - 1/nu) 2^(-theta (i + 1 - k))`
/// for `k <= i`, zero elsewhere.
fn log_ak(theta: f64, nu: f64, k: usize, i: usize) -> f64 {
    if i < k {
        f64::NEG_INFINITY
    } else {
        sequence_power(theta, nu) - theta * (i + 1 - k) as f64 * LN_2
    }
}

/// The extremal sequence `a_k` on the depth-`depth` lattice, with the
/// defining sum truncated at `j = depth`.
pub fn extremal_sequence(theta: f64, nu: f64, k: u32, depth: u32) -> Result<GridFunction> {
    check_theta(theta)?;
    require_nu_above_one(nu)?;
    if depth == 0 || depth > crate::dyadic::MAX_LEVEL {
        return Err(Error::param(format!("depth {depth} out of range")));
    }
    let values = (0..1u64 << depth)
        .map(|c| {
            if c == 0 {
                0.0
            } else {
                log_ak(theta, nu, k as usize, Annuli::annulus_of_cell(c, depth)).exp()
            }
        })
        .collect();
    GridFunction::new(1, depth, values)
}

/// Number of annuli used for `theta`: the truncated tail of `a_0` stays below
/// [`defaults::TRUNCATION_TOLERANCE`] of its sum, and another `26/theta`
/// levels keep the same bound for every `I_k` carrying `u`-mass above
/// `2^-26 u([0,1))`.
pub fn truncation_depth(theta: f64) -> usize {
    let lead = (1.0 / (defaults::TRUNCATION_TOLERANCE * -(-theta * LN_2).exp_m1())).log2() / theta;
    (lead.ceil() + (26.0 / theta).ceil()) as usize
}

/// Log-domain data of one extremal instance on the tower.
struct Instance {
    theta: f64,
    prm: ExponentParams,
    cells: Annuli,
    /// `ln u(C)`, `u = w^q = x^(theta - 1)`
    lu: Vec<f64>,
    /// `ln sigma(C)`, `sigma = w^(-p')`
    ls: Vec<f64>,
}

impl Instance {
    fn new(theta: f64, prm: &ExponentParams, n: usize) -> Result<Self> {
        check_theta(theta)?;
        require_1d(prm)?;
        let cells = Annuli::new(n)?;
        Ok(Instance {
            theta,
            prm: *prm,
            lu: cells.log_power_masses(theta)?,
            ls: cells.log_power_masses(dual_exponent(theta, prm))?,
            cells,
        })
    }

    /// `ln (||A(f sigma)||_{L^{q,inf}(u)} / ||f||_{L^p(sigma)})`.
    fn log_ratio(&self, log_f: &[f64]) -> f64 {
        let a = self.cells.log_apply(log_f, &self.ls, self.prm.alpha(), self.prm.nu());
        let num = self.cells.step(a, self.lu.clone()).log_weak(self.prm.q());
        let den = self.cells.step(log_f.to_vec(), self.ls.clone()).log_lp(self.prm.p());
        num - den
    }

    fn log_indicator_ratio(&self, k: usize) -> f64 {
        let f: Vec<f64> = (0..self.cells.cells())
            .map(|i| if i < k { f64::NEG_INFINITY } else { 0.0 })
            .collect();
        self.log_ratio(&f)
    }

    /// `ln <a_k u>_{alpha,I_k}` for `k = 0..=n`.
    fn log_ak_averages(&self) -> Vec<f64> {
        let n = self.cells.n();
        let (theta, nu) = (self.theta, self.prm.nu());
        // T_k = ln sum_{i=k}^{n-1} 2^(-theta (i+1)) u(A_i)
        let mut t = vec![f64::NEG_INFINITY; n + 1];
        for i in (0..n).rev() {
            t[i] = crate::norms::log_add(t[i + 1], -theta * (i + 1) as f64 * LN_2 + self.lu[i]);
        }
        (0..=n)
            .map(|k| sequence_power(theta, nu) + theta * k as f64 * LN_2 + t[k] + k as f64 * (1.0 - self.prm.alpha()) * LN_2)
            .collect()
    }

    /// `ln H` with `H = (sum_k <a_k u>_{alpha,I_k}^nu 1_{I_k})^(1/nu)`.
    fn log_h(&self) -> Vec<f64> {
        self.cells.log_tower_sum(&self.log_ak_averages(), self.prm.nu())
    }

    /// `ln (sum_k a_k^nu)^(1/nu)` per cell, by the geometric sum over `k <= i`.
    fn log_sequence_norm(&self) -> Vec<f64> {
        let n = self.cells.n();
        let nu = self.prm.nu();
        let r = nu * self.theta * LN_2;
        (0..=n)
            .map(|i| {
                if i == n {
                    return f64::NEG_INFINITY;
                }
                // sum_{m=1}^{i+1} 2^(-nu theta m) = 2^(-nu theta) (1 - 2^(-nu theta (i+1))) / (1 - 2^(-nu theta))
                let geo = -r + (-(-r * (i + 1) as f64).exp_m1()).ln() - (-(-r).exp_m1()).ln();
                (nu * sequence_power(self.theta, nu) + geo) / nu
            })
            .collect()
    }

    /// Primal test induced by the sequence: `f = H^(p' - 1)`.
    fn log_extremal_ratio(&self) -> f64 {
        let pp = self.prm.p_prime();
        let f: Vec<f64> = self.log_h().iter().map(|h| (pp - 1.0) * h).collect();
        self.log_ratio(&f)
    }
}

/// Both sides of the duality inequality for the extremal weight and the
/// sequence `a_k` over `n` annuli.
pub fn duality_sides(theta: f64, prm: &ExponentParams, n: usize) -> Result<(f64, f64)> {
    require_nu_above_one(prm.nu())?;
    prm.require_sobolev()?;
    let inst = Instance::new(theta, prm, n)?;
    let lhs = inst.cells.step(inst.log_h(), inst.ls.clone()).log_lp(prm.p_prime());
    let qq = prm.q_prime();
    let rhs = inst.cells.step(inst.log_sequence_norm(), inst.lu.clone()).log_lorentz(qq);
    Ok((lhs.exp(), rhs.exp()))
}

/// `ln max_x sum_k a_k(x)^nu` over `n` annuli.
pub fn log_sequence_sum_max(theta: f64, nu: f64, n: usize) -> Result<f64> {
    check_theta(theta)?;
    require_nu_above_one(nu)?;
    let prm = ExponentParams::new(1, 2.0, 2.0, 0.0, nu)?;
    let inst = Instance::new(theta, &prm, n)?;
    Ok(inst
        .log_sequence_norm()
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max)
        * nu)
}

/// Which test functions the sharpness sweep certifies with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TestGenerator {
    /// `1_{I_k}` for the first few tower levels.
    Indicator,
    /// `f = H^(p'-1)` built from the extremal sequence (needs `nu > 1`).
    Extremal,
}

/// Tower levels tried by the indicator generator.
const INDICATOR_LEVELS: usize = 8;

#[derive(Debug, Clone, Serialize)]
pub struct SweepRecord {
    pub theta: f64,
    pub n_annuli: usize,
    pub a_pq: f64,
    pub wq_a_infty: f64,
    pub lower: f64,
    pub lower_indicator: Option<f64>,
    pub lower_extremal: Option<f64>,
    /// One-weight upper bound with the logarithmic factor, when the
    /// exponents satisfy its hypotheses.
    pub bound: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepResult {
    pub params: ExponentParams,
    pub theta_grid: Vec<f64>,
    pub records: Vec<SweepRecord>,
    /// `max(1/q, 1/nu - alpha/d)`
    pub target: f64,
    pub fitted_slope: f64,
    pub slope_stderr: f64,
    pub intercept: f64,
}

impl SweepResult {
    pub fn within(&self, lo: f64, hi: f64) -> bool {
        self.fitted_slope >= lo && self.fitted_slope <= hi
    }
}

/// Certified lower bounds for the extremal weights, fitted against
/// `[w]_{A_{p,q}}` on a log-log scale. Characteristics use lattice depth
/// `depth`.
pub fn sharpness_sweep(
    prm: &ExponentParams,
    theta_grid: &[f64],
    generators: &[TestGenerator],
    depth: u32,
) -> Result<SweepResult> {
    check_theta_grid(theta_grid)?;
    require_1d(prm)?;
    if generators.is_empty() {
        return Err(Error::EmptyTestFamily);
    }
    let use_ind = generators.contains(&TestGenerator::Indicator);
    let use_ext = generators.contains(&TestGenerator::Extremal) && prm.nu() > 1.0;
    if !use_ind && !use_ext {
        return Err(Error::param("the extremal generator needs nu > 1 and no other generator was given"));
    }
    let bounded = prm.is_sobolev() && prm.nu() >= 1.0;
    let records = theta_grid
        .par_iter()
        .map(|&theta| {
            let w = extremal_weight(theta, prm.q())?;
            let a_pq = a_pq_char(&w, prm.p(), prm.q(), depth)?;
            let wq_a_infty = a_infty_char(&w.powf(prm.q())?, depth)?;
            let n = truncation_depth(theta);
            let inst = Instance::new(theta, prm, n)?;
            let lower_indicator = use_ind.then(|| {
                (0..INDICATOR_LEVELS.min(n))
                    .map(|k| inst.log_indicator_ratio(k))
                    .fold(f64::NEG_INFINITY, f64::max)
                    .exp()
            });
            let lower_extremal = use_ext.then(|| inst.log_extremal_ratio().exp());
            let lower = lower_indicator.unwrap_or(0.0).max(lower_extremal.unwrap_or(0.0));
            let bound = if bounded {
                Some(thm45_formula(a_pq, wq_a_infty, prm)?.value)
            } else {
                None
            };
            Ok(SweepRecord {
                theta,
                n_annuli: n,
                a_pq,
                wq_a_infty,
                lower,
                lower_indicator,
                lower_extremal,
                bound,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let x: Vec<f64> = records.iter().map(|r| r.a_pq).collect();
    let y: Vec<f64> = records.iter().map(|r| r.lower).collect();
    let fit = loglog(&x, &y)?;
    Ok(SweepResult {
        params: *prm,
        theta_grid: theta_grid.to_vec(),
        records,
        target: (1.0 / prm.q()).max(1.0 / prm.nu() - prm.alpha_ratio()),
        fitted_slope: fit.slope,
        slope_stderr: fit.stderr,
        intercept: fit.intercept,
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct DualityRecord {
    pub theta: f64,
    pub n_annuli: usize,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DualityResult {
    pub params: ExponentParams,
    pub records: Vec<DualityRecord>,
    /// Slopes are against `ln theta`.
    pub lhs_fit: LineFit,
    pub rhs_fit: LineFit,
    /// `-(1 + 1/nu - 1/(nu-1) + 1/p')`
    pub lhs_target: f64,
    /// `-(2 - nu/(nu-1) + 1/q')`
    pub rhs_target: f64,
}

impl DualityResult {
    pub fn within(&self, tol: f64) -> bool {
        (self.lhs_fit.slope - self.lhs_target).abs() <= tol && (self.rhs_fit.slope - self.rhs_target).abs() <= tol
    }
}

pub fn duality_sweep(prm: &ExponentParams, theta_grid: &[f64]) -> Result<DualityResult> {
    check_theta_grid(theta_grid)?;
    let records = theta_grid
        .par_iter()
        .map(|&theta| {
            let n = truncation_depth(theta);
            let (lhs, rhs) = duality_sides(theta, prm, n)?;
            Ok(DualityRecord {
                theta,
                n_annuli: n,
                lhs,
                rhs,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let nu = prm.nu();
    let lhs_fit = loglog(theta_grid, &records.iter().map(|r| r.lhs).collect::<Vec<_>>())?;
    let rhs_fit = loglog(theta_grid, &records.iter().map(|r| r.rhs).collect::<Vec<_>>())?;
    Ok(DualityResult {
        params: *prm,
        records,
        lhs_fit,
        rhs_fit,
        lhs_target: -(1.0 + 1.0 / nu - 1.0 / (nu - 1.0) + 1.0 / prm.p_prime()),
        rhs_target: -(2.0 - nu / (nu - 1.0) + 1.0 / prm.q_prime()),
    })
}

/// Quantities of the `nu = 1` lower-bound chain for `u = x^(theta - 1)` and
/// `f = 1_{[0,1)}`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Case2Record {
    pub theta: f64,
    /// `[u]_{A_1}` on the lattice
    pub a1: f64,
    /// `u([0,1)) = 1/theta`
    pub u_ball: f64,
    /// `||f||_{L^p(u)} = u([0,1))^(1/p)`
    pub f_norm: f64,
    /// `x_theta = 2^(-d/(alpha theta))`
    pub x_theta: f64,
    /// `c_{alpha,d} = 2^(alpha/d - 1) d/alpha`
    pub c_alpha_d: f64,
    /// `(c/(2 theta)) u([0, x_theta))^(1/q)`
    pub lower: f64,
    /// `lower / f_norm`
    pub ratio: f64,
}

fn require_case2(prm: &ExponentParams) -> Result<()> {
    require_1d(prm)?;
    if prm.nu() != 1.0 {
        return Err(Error::param(format!("the case2 chain needs nu = 1, got {}", prm.nu())));
    }
    if prm.alpha() <= 0.0 {
        return Err(Error::param("the case2 chain needs alpha > 0"));
    }
    prm.require_sobolev()
}

/// `c_{alpha,d}/theta (1 - x^(theta alpha/d))`, the closed form of
/// `∫_x^1 y^((theta-1) alpha/d) (2y)^(alpha/d - 1) dy` in `d = 1`.
pub fn case2_kernel_bound(theta: f64, alpha: f64, x: f64) -> f64 {
    let c = 2f64.powf(alpha - 1.0) / alpha;
    c / theta * (1.0 - x.powf(theta * alpha))
}

pub fn case2_chain(theta: f64, prm: &ExponentParams, depth: u32) -> Result<Case2Record> {
    require_case2(prm)?;
    check_theta(theta)?;
    let a = prm.alpha_ratio();
    let u = Weight::power(theta - 1.0)?;
    let u_ball = 1.0 / theta;
    let x_theta = 0.5f64.powf(1.0 / (a * theta));
    let c = 2f64.powf(a - 1.0) / a;
    let lower = c / (2.0 * theta) * (x_theta.powf(theta) / theta).powf(1.0 / prm.q());
    let f_norm = u_ball.powf(1.0 / prm.p());
    Ok(Case2Record {
        theta,
        a1: a_1_char(&u, depth)?,
        u_ball,
        f_norm,
        x_theta,
        c_alpha_d: c,
        lower,
        ratio: lower / f_norm,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct Case2Result {
    pub params: ExponentParams,
    pub records: Vec<Case2Record>,
    /// Slope of `ln ratio` against `ln(1/theta)`.
    pub fit: LineFit,
    /// `1 - alpha/d`
    pub target: f64,
}

pub fn case2_sweep(prm: &ExponentParams, theta_grid: &[f64], depth: u32) -> Result<Case2Result> {
    check_theta_grid(theta_grid)?;
    require_case2(prm)?;
    let records = theta_grid
        .par_iter()
        .map(|&t| case2_chain(t, prm, depth))
        .collect::<Result<Vec<_>>>()?;
    let inv: Vec<f64> = theta_grid.iter().map(|t| 1.0 / t).collect();
    let fit = loglog(&inv, &records.iter().map(|r| r.ratio).collect::<Vec<_>>())?;
    Ok(Case2Result {
        params: *prm,
        records,
        fit,
        target: 1.0 - prm.alpha_ratio(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct CharacteristicSweep {
    pub p: f64,
    pub q: f64,
    pub depth: u32,
    pub theta_grid: Vec<f64>,
    pub values: Vec<f64>,
    /// Slope of `ln [w]_{A_{p,q}}` against `ln(1/theta)`.
    pub fit: LineFit,
}

pub fn characteristic_slope(p: f64, q: f64, theta_grid: &[f64], depth: u32) -> Result<CharacteristicSweep> {
    check_theta_grid(theta_grid)?;
    let values = theta_grid
        .par_iter()
        .map(|&t| a_pq_char(&extremal_weight(t, q)?, p, q, depth))
        .collect::<Result<Vec<_>>>()?;
    let inv: Vec<f64> = theta_grid.iter().map(|t| 1.0 / t).collect();
    let fit = loglog(&inv, &values)?;
    Ok(CharacteristicSweep {
        p,
        q,
        depth,
        theta_grid: theta_grid.to_vec(),
        values,
        fit,
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct TailMassRecord {
    pub m0: u32,
    /// `u(sum_{m >= m0} (A^{S_m}(f sigma))^nu > 1)`, `u = w^q`
    pub lhs: f64,
    /// `[w]_{A_{p,q}} ([w^q]_{A_inf} / 2^m0)^q`
    pub rhs: f64,
    pub ratio: f64,
}

pub fn tail_mass_experiment(
    dec: &LevelSetDecomposition,
    w: &Weight,
    prm: &ExponentParams,
    m0_list: &[u32],
) -> Result<Vec<TailMassRecord>> {
    let depth = dec.depth();
    let a = a_pq_char(w, prm.p(), prm.q(), depth)?;
    let wq = w.powf(prm.q())?;
    let inf = a_infty_char(&wq, depth)?;
    let cells = wq.cell_masses(1.0, depth)?;
    m0_list
        .iter()
        .map(|&m0| {
            let sum = dec.tail_sum(m0)?;
            let lhs: f64 = sum.iter().zip(&cells).filter(|(s, _)| **s > 1.0).map(|(_, c)| c).sum();
            let rhs = a * (inf / 2f64.powi(m0 as i32)).powf(prm.q());
            Ok(TailMassRecord {
                m0,
                lhs,
                rhs,
                ratio: lhs / rhs,
            })
        })
        .collect()
}
