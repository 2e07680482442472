//! Weighted Lebesgue, weak-type and Lorentz norms of step functions, and
//! certified operator-norm lower bounds over families of test functions.

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::Serialize;

use crate::dyadic::{conjugate, DyadicCube, ExponentParams, SparseFamily};
use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::operators::{frac_factor, sparse_apply_weighted};
use crate::random::{self, InstanceRng};
use crate::weights::{Supremum, Weight};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormReport {
    pub value: f64,
    pub witness_lambda: f64,
}

/// Distinct positive values of a step function (descending) with the
/// measure of `{g >= v}` for each.
pub(crate) fn distribution(values: &[f64], masses: &[f64]) -> Vec<(f64, f64)> {
    let mut pairs: Vec<(f64, f64)> = values
        .iter()
        .zip(masses)
        .filter(|(v, _)| **v > 0.0)
        .map(|(v, m)| (*v, *m))
        .collect();
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut out: Vec<(f64, f64)> = Vec::new();
    let mut cum = 0.0;
    for (v, m) in pairs {
        cum += m;
        match out.last_mut() {
            Some(last) if last.0 == v => last.1 = cum,
            _ => out.push((v, cum)),
        }
    }
    out
}

fn cell_masses(g: &GridFunction, w: &Weight) -> Result<Vec<f64>> {
    if g.dim() != w.dim() {
        return Err(Error::DimensionMismatch {
            expected: g.dim(),
            found: w.dim(),
        });
    }
    w.cell_masses(1.0, g.depth())
}

fn check_exponent(name: &str, p: f64) -> Result<()> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::param(format!("{name} = {p} must be finite and >= 1")));
    }
    Ok(())
}

/// `(sum_cells |g|^p w(cell))^(1/p)`.
pub fn lp_norm(g: &GridFunction, w: &Weight, p: f64) -> Result<f64> {
    check_exponent("p", p)?;
    let m = cell_masses(g, w)?;
    Ok(lp_from_masses(g.values(), &m, p))
}

pub(crate) fn lp_from_masses(values: &[f64], masses: &[f64], p: f64) -> f64 {
    let s: f64 = values.iter().zip(masses).map(|(v, m)| v.abs().powf(p) * m).sum();
    s.powf(1.0 / p)
}

/// `sup_l l w({g > l})^(1/q)`, attained as `l` increases to one of the
/// values of `g`; that value is returned as the witness.
pub fn weak_norm(g: &GridFunction, w: &Weight, q: f64) -> Result<NormReport> {
    check_exponent("q", q)?;
    let m = cell_masses(g, w)?;
    Ok(weak_from_masses(g.values(), &m, q))
}

pub(crate) fn weak_from_masses(values: &[f64], masses: &[f64], q: f64) -> NormReport {
    let mut best = NormReport {
        value: 0.0,
        witness_lambda: 0.0,
    };
    for (v, cum) in distribution(values, masses) {
        let x = v * cum.powf(1.0 / q);
        if x > best.value {
            best = NormReport {
                value: x,
                witness_lambda: v,
            };
        }
    }
    best
}

/// Lorentz `L^{r,1}(w)` norm in layer-cake form `r ∫_0^inf w({g > s})^(1/r) ds`.
pub fn lorentz_norm(g: &GridFunction, w: &Weight, r: f64) -> Result<f64> {
    if !(r > 1.0 && r.is_finite()) {
        return Err(Error::param(format!("Lorentz index r = {r} must exceed 1")));
    }
    let m = cell_masses(g, w)?;
    Ok(lorentz_from_masses(g.values(), &m, r))
}

/// `L^{q',1}(w)` norm, the dual space of `L^{q,inf}(w)`.
pub fn lorentz_q1_norm(g: &GridFunction, w: &Weight, q: f64) -> Result<f64> {
    let qp = conjugate(q).ok_or_else(|| Error::param(format!("q = {q} has no conjugate > 1")))?;
    lorentz_norm(g, w, qp)
}

pub(crate) fn lorentz_from_masses(values: &[f64], masses: &[f64], r: f64) -> f64 {
    let dist = distribution(values, masses);
    let mut s = 0.0;
    for (i, &(v, cum)) in dist.iter().enumerate() {
        let next = dist.get(i + 1).map_or(0.0, |d| d.0);
        s += (v - next) * cum.powf(1.0 / r);
    }
    r * s
}

/// Numerically stable `ln(sum exp(x_i))`.
pub fn log_sum_exp(xs: impl IntoIterator<Item = f64>) -> f64 {
    let xs: Vec<f64> = xs.into_iter().collect();
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Log-domain step function: `ln g` and `ln w(cell)` per cell, for data
/// whose dynamic range exceeds f64 (geometrically shrinking cells).
#[derive(Debug, Clone)]
pub struct LogStep {
    pub log_values: Vec<f64>,
    pub log_masses: Vec<f64>,
}

impl LogStep {
    fn sorted(&self) -> Vec<(f64, f64)> {
        let mut pairs: Vec<(f64, f64)> = self
            .log_values
            .iter()
            .zip(&self.log_masses)
            .filter(|(v, _)| v.is_finite())
            .map(|(v, m)| (*v, *m))
            .collect();
        pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
        let mut out: Vec<(f64, f64)> = Vec::new();
        let mut cum = f64::NEG_INFINITY;
        for (v, m) in pairs {
            cum = log_add(cum, m);
            match out.last_mut() {
                Some(last) if last.0 == v => last.1 = cum,
                _ => out.push((v, cum)),
            }
        }
        out
    }

    /// `ln ||g||_{L^p(w)}`.
    pub fn log_lp(&self, p: f64) -> f64 {
        log_sum_exp(self.log_values.iter().zip(&self.log_masses).map(|(v, m)| p * v + m)) / p
    }

    /// `ln ||g||_{L^{q,inf}(w)}`.
    pub fn log_weak(&self, q: f64) -> f64 {
        self.sorted()
            .into_iter()
            .map(|(v, cum)| v + cum / q)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// `ln ||g||_{L^{r,1}(w)}`.
    pub fn log_lorentz(&self, r: f64) -> f64 {
        let dist = self.sorted();
        let terms = dist.iter().enumerate().map(|(i, &(v, cum))| {
            let gap = match dist.get(i + 1) {
                // ln(e^v - e^next)
                Some(&(next, _)) => v + (-(-(v - next)).exp_m1()).ln(),
                None => v,
            };
            gap + cum / r
        });
        r.ln() + log_sum_exp(terms)
    }
}

pub(crate) fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// A named test function for operator-norm lower bounds.
#[derive(Debug, Clone)]
pub struct TestFunction {
    pub id: String,
    pub f: GridFunction,
}

/// Result of maximizing the weak-type ratio over a test family.
#[derive(Debug, Clone, Serialize)]
pub struct OpnormLower {
    pub value: f64,
    pub witness_test_id: String,
    pub witness_index: usize,
    pub witness_lambda: f64,
}

/// `max_f ||A(f sigma)||_{L^{q,inf}(w)} / ||f||_{L^p(sigma)}` over the tests.
/// Ties go to the first test in family order.
pub fn weak_opnorm_lower(
    s: &SparseFamily,
    w: &Weight,
    sigma: &Weight,
    prm: &ExponentParams,
    tests: &[TestFunction],
) -> Result<OpnormLower> {
    if tests.is_empty() {
        return Err(Error::EmptyTestFamily);
    }
    let scores = tests
        .par_iter()
        .map(|t| {
            let den = lp_norm(&t.f, sigma, prm.p())?;
            if den == 0.0 {
                return Ok((0.0, 0.0));
            }
            let a = sparse_apply_weighted(s, &t.f, sigma, prm)?;
            let n = weak_norm(&a, w, prm.q())?;
            Ok((n.value / den, n.witness_lambda))
        })
        .collect::<Result<Vec<(f64, f64)>>>()?;
    let mut best = 0;
    for (i, sc) in scores.iter().enumerate() {
        if sc.0 > scores[best].0 {
            best = i;
        }
    }
    Ok(OpnormLower {
        value: scores[best].0,
        witness_test_id: tests[best].id.clone(),
        witness_index: best,
        witness_lambda: scores[best].1,
    })
}

/// `sup_Q ||<1_Q sigma>_{alpha,Q} 1_Q||_{L^{q,inf}(w)} / ||1_Q||_{L^p(sigma)}`
/// over dyadic cubes of level `<= depth`: the best lower bound obtainable
/// from one cube of the family tested on its own indicator.
pub fn holder_indicator_bound(
    w: &Weight,
    sigma: &Weight,
    prm: &ExponentParams,
    depth: u32,
) -> Result<Supremum> {
    let dim = prm.d();
    let cubes: Vec<DyadicCube> = DyadicCube::lattice(dim, depth).collect();
    let vals = cubes
        .par_iter()
        .map(|q| {
            let ind = GridFunction::indicator(dim, depth, q, 1.0)?;
            let avg = frac_factor(dim, q.level(), prm.alpha()) * sigma.integrate(1.0, q)?;
            let weak = weak_norm(&ind.scale(avg)?, w, prm.q())?.value;
            Ok(weak / lp_norm(&ind, sigma, prm.p())?)
        })
        .collect::<Result<Vec<f64>>>()?;
    let mut best = 0;
    for (i, v) in vals.iter().enumerate() {
        if v.partial_cmp(&vals[best]) == Some(Ordering::Greater) {
            best = i;
        }
    }
    Ok(Supremum {
        value: vals[best],
        cube: cubes[best],
    })
}

/// Indicators of every dyadic cube of level `<= depth`, coarse first.
pub fn dyadic_indicators(dim: u8, depth: u32) -> Vec<TestFunction> {
    DyadicCube::lattice(dim, depth)
        .map(|q| TestFunction {
            id: format!("indicator:{}:{:?}", q.level(), q.index()),
            f: GridFunction::indicator(dim, depth, &q, 1.0).expect("cube inside lattice"),
        })
        .collect()
}

pub fn random_masks(rng: &mut InstanceRng, dim: u8, depth: u32, n: usize) -> Vec<TestFunction> {
    (0..n)
        .map(|i| TestFunction {
            id: format!("mask:{i}"),
            f: random::mask_grid(rng, dim, depth),
        })
        .collect()
}

pub fn random_positive(rng: &mut InstanceRng, dim: u8, depth: u32, n: usize) -> Vec<TestFunction> {
    (0..n)
        .map(|i| TestFunction {
            id: format!("positive:{i}"),
            f: random::positive_grid(rng, dim, depth),
        })
        .collect()
}

/// Indicators, random masks and random positive cells.
pub fn structured_tests(rng: &mut InstanceRng, dim: u8, depth: u32, n_random: usize) -> Vec<TestFunction> {
    let mut t = dyadic_indicators(dim, depth);
    t.extend(random_masks(rng, dim, depth, n_random));
    t.extend(random_positive(rng, dim, depth, n_random));
    t
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::weights::a_pq_alpha_char;

    fn unit() -> Weight {
        Weight::constant(1, 1.0).unwrap()
    }

    #[test]
    fn lp_examples() {
        let one = GridFunction::constant(1, 3, 1.0).unwrap();
        for p in [1.0, 2.0, 7.5] {
            assert!((lp_norm(&one, &unit(), p).unwrap() - 1.0).abs() < 1e-15);
        }
        let q = DyadicCube::interval(1, 0).unwrap();
        let g = GridFunction::indicator(1, 2, &q, 2.0).unwrap();
        assert!((lp_norm(&g, &unit(), 2.0).unwrap() - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn weak_examples() {
        let q = DyadicCube::interval(2, 1).unwrap();
        let g = GridFunction::indicator(1, 3, &q, 3.0).unwrap();
        let w = Weight::power(-0.5).unwrap();
        let n = weak_norm(&g, &w, 2.0).unwrap();
        assert!((n.value - 3.0 * w.integrate(1.0, &q).unwrap().sqrt()).abs() < 1e-14);
        assert_eq!(n.witness_lambda, 3.0);
        let g = GridFunction::new(1, 2, vec![2.0, 1.0, 1.0, 1.0]).unwrap();
        let n = weak_norm(&g, &unit(), 1.0).unwrap();
        assert_eq!(n.value, 1.0);
        assert_eq!(n.witness_lambda, 1.0);
    }

    #[test]
    fn lorentz_examples() {
        let q = DyadicCube::interval(1, 1).unwrap();
        let g = GridFunction::indicator(1, 2, &q, 1.0).unwrap();
        let (qq, qp) = (3.0, 1.5);
        let v = lorentz_q1_norm(&g, &unit(), qq).unwrap();
        assert!((v - qp * 0.5f64.powf(1.0 / qp)).abs() < 1e-15);
        let zero = GridFunction::zeros(1, 3);
        assert_eq!(lorentz_q1_norm(&zero, &unit(), 2.0).unwrap(), 0.0);
    }

    #[test]
    fn lorentz_matches_quadrature() {
        let g = GridFunction::new(1, 2, vec![3.0, 1.0, 1.0, 0.0]).unwrap();
        let w = Weight::power(0.7).unwrap();
        let r = 1.6;
        let exact = lorentz_norm(&g, &w, r).unwrap();
        let masses = w.cell_masses(1.0, 2).unwrap();
        let n = 10_000;
        let top = 3.0;
        let mut quad = 0.0;
        for i in 0..n {
            let s = (i as f64 + 0.5) * top / n as f64;
            let level: f64 = g.values().iter().zip(&masses).filter(|(v, _)| **v > s).map(|(_, m)| m).sum();
            quad += level.powf(1.0 / r) * top / n as f64;
        }
        quad *= r;
        assert!((exact / quad - 1.0).abs() < 1e-3);
    }

    #[test]
    fn log_domain_agrees() {
        let g = GridFunction::new(1, 3, vec![3.0, 1.0, 1.0, 0.5, 0.25, 2.0, 0.0, 1.0]).unwrap();
        let w = Weight::power(-0.4).unwrap();
        let m = w.cell_masses(1.0, 3).unwrap();
        let ls = LogStep {
            log_values: g.values().iter().map(|v| v.ln()).collect(),
            log_masses: m.iter().map(|v| v.ln()).collect(),
        };
        assert!((ls.log_lp(2.5).exp() / lp_norm(&g, &w, 2.5).unwrap() - 1.0).abs() < 1e-12);
        assert!((ls.log_weak(2.5).exp() / weak_norm(&g, &w, 2.5).unwrap().value - 1.0).abs() < 1e-12);
        assert!((ls.log_lorentz(1.7).exp() / lorentz_norm(&g, &w, 1.7).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn trivial_operator_norm() {
        let s = SparseFamily::verify([DyadicCube::unit(1)], 0.5).unwrap();
        let prm = ExponentParams::new(1, 2.0, 2.0, 0.0, 1.7).unwrap();
        let tests = vec![TestFunction {
            id: "one".into(),
            f: GridFunction::constant(1, 2, 1.0).unwrap(),
        }];
        let r = weak_opnorm_lower(&s, &unit(), &unit(), &prm, &tests).unwrap();
        assert!((r.value - 1.0).abs() < 1e-15);
        assert!(matches!(weak_opnorm_lower(&s, &unit(), &unit(), &prm, &[]), Err(Error::EmptyTestFamily)));
    }

    #[test]
    fn structured_tests_near_exhaustive_maximum() {
        let mut rng = random::rng(11);
        for _ in 0..5 {
            let s = random::sparse_family(&mut rng, 1, 3, 0.5);
            let w = random::grid_weight(&mut rng, 1, 3);
            let sigma = random::grid_weight(&mut rng, 1, 3);
            let prm = ExponentParams::new(1, 2.0, 3.0, 0.25, 1.5).unwrap();
            let all: Vec<TestFunction> = (1u32..256)
                .map(|bits| TestFunction {
                    id: format!("{bits}"),
                    f: GridFunction::new(1, 3, (0..8).map(|i| ((bits >> i) & 1) as f64).collect()).unwrap(),
                })
                .collect();
            let exhaustive = weak_opnorm_lower(&s, &w, &sigma, &prm, &all).unwrap().value;
            let tests = structured_tests(&mut rng, 1, 3, 8);
            let structured = weak_opnorm_lower(&s, &w, &sigma, &prm, &tests).unwrap().value;
            assert!(structured * 2.0 >= exhaustive, "{structured} vs {exhaustive}");
        }
    }

    #[test]
    fn indicator_bound_is_the_characteristic() {
        let mut rng = random::rng(3);
        let w = random::grid_weight(&mut rng, 1, 4);
        let sigma = random::grid_weight(&mut rng, 1, 4);
        let prm = ExponentParams::new(1, 1.5, 4.0, 0.5, 2.0).unwrap();
        let h = holder_indicator_bound(&w, &sigma, &prm, 4).unwrap();
        let c = a_pq_alpha_char(&w, &sigma, &prm, 4).unwrap();
        assert!((h.value / c.powf(1.0 / prm.q()) - 1.0).abs() < 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn weak_below_strong_and_homogeneous(seed in any::<u64>(), q in 1.0f64..6.0, t in 0.0f64..20.0) {
            let mut rng = random::rng(seed);
            let g = random::positive_grid(&mut rng, 1, 5);
            let g = if seed % 3 == 0 { g.mul(&random::mask_grid(&mut rng, 1, 5)).unwrap() } else { g };
            let w = random::grid_weight(&mut rng, 1, 5);
            let weak = weak_norm(&g, &w, q).unwrap().value;
            let strong = lp_norm(&g, &w, q).unwrap();
            prop_assert!(weak <= strong * (1.0 + 1e-12));
            let scaled = weak_norm(&g.scale(t).unwrap(), &w, q).unwrap().value;
            prop_assert!((scaled - t * weak).abs() <= 1e-12 * (1.0 + t * weak));
        }

        #[test]
        fn lp_matches_direct_sum(seed in any::<u64>(), p in 1.0f64..5.0) {
            let mut rng = random::rng(seed);
            let g = random::positive_grid(&mut rng, 1, 5);
            let w = random::grid_weight(&mut rng, 1, 5);
            let mut s = 0.0;
            for i in 0..g.len() {
                s += g.values()[i].powf(p) * w.integrate(1.0, &g.cell(i)).unwrap();
            }
            let direct = s.powf(1.0 / p);
            prop_assert!((lp_norm(&g, &w, p).unwrap() / direct - 1.0).abs() < 1e-12);
        }

        #[test]
        fn lorentz_dominates_lebesgue_on_indicators(seed in any::<u64>(), r in 1.05f64..6.0) {
            let mut rng = random::rng(seed);
            let g = random::mask_grid(&mut rng, 1, 5);
            let w = random::grid_weight(&mut rng, 1, 5);
            let lor = lorentz_norm(&g, &w, r).unwrap();
            let leb = lp_norm(&g, &w, r).unwrap();
            prop_assert!(lor >= leb * (1.0 - 1e-12));
        }

        #[test]
        fn witness_is_deterministic(seed in any::<u64>()) {
            let mut rng = random::rng(seed);
            let s = random::sparse_family(&mut rng, 1, 4, 0.5);
            let w = random::grid_weight(&mut rng, 1, 4);
            let tests = structured_tests(&mut rng, 1, 4, 4);
            let prm = ExponentParams::new(1, 2.0, 2.0, 0.0, 1.0).unwrap();
            let a = weak_opnorm_lower(&s, &w, &w, &prm, &tests).unwrap();
            let b = weak_opnorm_lower(&s, &w, &w, &prm, &tests).unwrap();
            prop_assert_eq!(a.witness_index, b.witness_index);
            prop_assert_eq!(a.value, b.value);
        }
    }
}
