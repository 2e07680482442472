use serde::Serialize;

use super::{check_alpha, frac_factor, level_overlap_function, nu_sum, weighted_masses};
use crate::defaults;
use crate::dyadic::{CubeIndex, DyadicCube, ExponentParams, SparseFamily};
use crate::error::{Error, Result};
use crate::grid::{GridFunction, Pyramid};
use crate::weights::Weight;

/// Partition of a sparse family by the dyadic size of `<f sigma>_{alpha,Q}`:
///
/// * `S'`: average `> 1`;
/// * `S_m`, `0 <= m <= m_max`: `2^(-m-1) < average <= 2^-m`;
/// * dropped: average `<= 2^(-m_max-1)` (including zero).
#[derive(Debug, Clone, Serialize)]
pub struct LevelSetDecomposition {
    dim: u8,
    depth: u32,
    alpha: f64,
    nu: f64,
    m_max: u32,
    extra_sparse: bool,
    s_prime: Vec<DyadicCube>,
    families: Vec<Vec<DyadicCube>>,
    dropped: Vec<DyadicCube>,
    #[serde(skip)]
    averages: Vec<(DyadicCube, f64)>,
    #[serde(skip)]
    indices: Vec<CubeIndex>,
    #[serde(skip)]
    masses: Pyramid,
}

/// Worst case of `<f sigma 1_{E_Q}>_{alpha,Q} / <f sigma>_{alpha,Q}` over all
/// cubes of all `S_m`.
#[derive(Debug, Clone, Serialize)]
pub struct RetentionReport {
    pub checked: usize,
    pub min_ratio: f64,
    pub worst: Option<(u32, DyadicCube)>,
    pub violations: usize,
}

/// Successive tail ratios `t(l+1)/t(l)` of the localized overlap functions
/// `b_Q = sum_{Q' in S_m, Q' ⊆ Q} 1_{Q'}`, `t(l) = |{b_Q > l}|/|Q|`.
#[derive(Debug, Clone, Serialize)]
pub struct TailReport {
    pub lambda_min: u32,
    pub ratios_checked: usize,
    pub max_ratio: f64,
    pub worst: Option<(u32, DyadicCube, u32)>,
    pub max_overlap: u32,
}

/// Both sides of `w({A(f sigma) > l0}) <= II_1 + II_2`.
#[derive(Debug, Clone, Serialize)]
pub struct SplitReport {
    pub lambda0: f64,
    pub epsilon: f64,
    pub lhs: f64,
    pub ii1: f64,
    pub ii2: f64,
    pub s_prime_cover: f64,
    pub holds: bool,
}

/// `l0` with `l0^nu / 2 = sum_{m >= 0} 2^(-eps m)`, `eps = (nu - q)/2`,
/// defined for `q < nu`.
pub fn lambda0(nu: f64, q: f64) -> Result<(f64, f64)> {
    if !(q < nu) {
        return Err(Error::Hypothesis(format!(
            "the level-set threshold needs q < nu, got q = {q}, nu = {nu}"
        )));
    }
    let eps = (nu - q) / 2.0;
    let sum = 1.0 / (1.0 - 2f64.powf(-eps));
    Ok(((2.0 * sum).powf(1.0 / nu), eps))
}

enum Slot {
    Prime,
    Level(u32),
    Dropped,
}

fn classify(avg: f64, m_max: u32) -> Slot {
    if avg > 1.0 {
        return Slot::Prime;
    }
    if !(avg > 0.0) || avg <= 2f64.powi(-(m_max as i32) - 1) {
        return Slot::Dropped;
    }
    let mut m = (-avg.log2()).floor().max(0.0) as i32;
    while avg > 2f64.powi(-m) {
        m -= 1;
    }
    while avg <= 2f64.powi(-m - 1) {
        m += 1;
    }
    Slot::Level(m as u32)
}

pub fn decompose_levels(
    s: &SparseFamily,
    f: &GridFunction,
    sigma: &Weight,
    prm: &ExponentParams,
) -> Result<LevelSetDecomposition> {
    LevelSetDecomposition::new(s, f, sigma, prm, defaults::M_MAX)
}

impl LevelSetDecomposition {
    pub fn new(
        s: &SparseFamily,
        f: &GridFunction,
        sigma: &Weight,
        prm: &ExponentParams,
        m_max: u32,
    ) -> Result<Self> {
        check_alpha(f.dim(), prm.alpha())?;
        if s.dim() != f.dim() {
            return Err(Error::DimensionMismatch {
                expected: f.dim(),
                found: s.dim(),
            });
        }
        if s.max_level() > f.depth() {
            let q = *s.cubes().iter().max_by_key(|q| q.level()).expect("nonempty family");
            return Err(Error::TooDeep {
                cube: q,
                level: q.level(),
                depth: f.depth(),
            });
        }
        let masses = weighted_masses(f, sigma)?;
        let alpha = prm.alpha();
        let mut s_prime = Vec::new();
        let mut families = vec![Vec::new(); m_max as usize + 1];
        let mut dropped = Vec::new();
        let mut averages = Vec::with_capacity(s.len());
        for q in s.cubes() {
            let avg = frac_factor(f.dim(), q.level(), alpha) * masses.mass(q);
            averages.push((*q, avg));
            match classify(avg, m_max) {
                Slot::Prime => s_prime.push(*q),
                Slot::Level(m) if m <= m_max => families[m as usize].push(*q),
                _ => dropped.push(*q),
            }
        }
        let indices = families.iter().map(CubeIndex::new).collect();
        Ok(LevelSetDecomposition {
            dim: f.dim(),
            depth: f.depth(),
            alpha,
            nu: prm.nu(),
            m_max,
            extra_sparse: s.check_extra_sparsification(alpha),
            s_prime,
            families,
            dropped,
            averages,
            indices,
            masses,
        })
    }

    pub fn m_max(&self) -> u32 {
        self.m_max
    }

    /// Lattice depth of the decomposed function.
    pub fn depth(&self) -> u32 {
        self.depth
    }

    /// `sum_{m >= m0} (A^{S_m}(f sigma))^nu` on the cells.
    pub fn tail_sum(&self, m0: u32) -> Result<Vec<f64>> {
        let cubes: Vec<DyadicCube> = self.families.iter().skip(m0 as usize).flatten().copied().collect();
        nu_sum(&cubes, &self.masses, self.alpha, self.nu)
    }

    /// Whether the underlying family satisfies the strengthened sparseness
    /// condition for this `alpha`.
    pub fn extra_sparse(&self) -> bool {
        self.extra_sparse
    }

    pub fn s_prime(&self) -> &[DyadicCube] {
        &self.s_prime
    }

    pub fn family(&self, m: u32) -> &[DyadicCube] {
        self.families.get(m as usize).map_or(&[], |v| v.as_slice())
    }

    pub fn dropped(&self) -> &[DyadicCube] {
        &self.dropped
    }

    /// Nonempty levels, ascending.
    pub fn levels(&self) -> impl Iterator<Item = u32> + '_ {
        (0..=self.m_max).filter(|&m| !self.families[m as usize].is_empty())
    }

    pub fn average(&self, q: &DyadicCube) -> Option<f64> {
        self.averages
            .binary_search_by(|(c, _)| c.cmp(q))
            .ok()
            .map(|i| self.averages[i].1)
    }

    /// `E_Q = Q minus its maximal proper subcubes in S_m`.
    pub fn e_set(&self, m: u32, q: &DyadicCube) -> Vec<DyadicCube> {
        self.indices[m as usize].remainder(q)
    }

    /// `<f sigma 1_{E_Q}>_{alpha,Q}` for `Q` in `S_m`.
    pub fn retained_average(&self, m: u32, q: &DyadicCube) -> f64 {
        let mass: f64 = self.e_set(m, q).iter().map(|c| self.masses.mass(c)).sum();
        frac_factor(self.dim, q.level(), self.alpha) * mass
    }

    pub fn retention(&self) -> RetentionReport {
        let mut rep = RetentionReport {
            checked: 0,
            min_ratio: f64::INFINITY,
            worst: None,
            violations: 0,
        };
        for m in self.levels().collect::<Vec<_>>() {
            for q in self.family(m) {
                let avg = self.average(q).expect("cube of the family");
                let ratio = self.retained_average(m, q) / avg;
                rep.checked += 1;
                if ratio < 0.5 {
                    rep.violations += 1;
                }
                if ratio < rep.min_ratio {
                    rep.min_ratio = ratio;
                    rep.worst = Some((m, *q));
                }
            }
        }
        rep
    }

    /// `b = sum_{Q in S_m} 1_Q` on the cells.
    pub fn overlap(&self, m: u32) -> Result<GridFunction> {
        level_overlap_function(self.family(m), self.dim, self.depth)
    }

    /// Generation measures `t(0), t(1), ...` of `b_Q` below `Q in S_m`.
    pub fn tails(&self, m: u32, q: &DyadicCube) -> Vec<f64> {
        let idx = &self.indices[m as usize];
        let mut out = Vec::new();
        let mut gen = vec![*q];
        while !gen.is_empty() {
            out.push(gen.iter().map(DyadicCube::measure).sum::<f64>() / q.measure());
            gen = gen.iter().flat_map(|c| idx.maximal_proper_subcubes(c)).collect();
        }
        out
    }

    pub fn tail_report(&self, lambda_min: u32) -> TailReport {
        let mut rep = TailReport {
            lambda_min,
            ratios_checked: 0,
            max_ratio: 0.0,
            worst: None,
            max_overlap: 0,
        };
        for m in self.levels().collect::<Vec<_>>() {
            for q in self.family(m) {
                let t = self.tails(m, q);
                rep.max_overlap = rep.max_overlap.max(t.len() as u32);
                for l in lambda_min as usize..t.len().saturating_sub(1) {
                    let r = t[l + 1] / t[l];
                    rep.ratios_checked += 1;
                    if r > rep.max_ratio {
                        rep.max_ratio = r;
                        rep.worst = Some((m, *q, l as u32));
                    }
                }
            }
        }
        rep
    }

    /// Checks the split of the level set `{A(f sigma) > l0}` into the
    /// `S_m` part (dropped cubes included) and the `S'` part.
    pub fn split(&self, w: &Weight, q: f64) -> Result<SplitReport> {
        let (l0, eps) = lambda0(self.nu, q)?;
        let cells = w.cell_masses(1.0, self.depth)?;
        let half = l0.powf(self.nu) / 2.0;
        let mut low: Vec<DyadicCube> = self.families.iter().flatten().copied().collect();
        low.extend(&self.dropped);
        let a = nu_sum(&low, &self.masses, self.alpha, self.nu)?;
        let b = nu_sum(&self.s_prime, &self.masses, self.alpha, self.nu)?;
        let cover = level_overlap_function(&self.s_prime, self.dim, self.depth)?;
        let (mut lhs, mut ii1, mut ii2, mut s_cover) = (0.0, 0.0, 0.0, 0.0);
        for i in 0..cells.len() {
            if (a[i] + b[i]).powf(1.0 / self.nu) > l0 {
                lhs += cells[i];
            }
            if a[i] > half {
                ii1 += cells[i];
            }
            if b[i] > half {
                ii2 += cells[i];
            }
            if cover.values()[i] > 0.0 {
                s_cover += cells[i];
            }
        }
        Ok(SplitReport {
            lambda0: l0,
            epsilon: eps,
            lhs,
            ii1,
            ii2,
            s_prime_cover: s_cover,
            holds: lhs <= (ii1 + ii2) * (1.0 + 1e-12) && ii2 <= s_cover * (1.0 + 1e-12),
        })
    }
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::random;

    fn iv(k: u32, j: u64) -> DyadicCube {
        DyadicCube::interval(k, j).unwrap()
    }

    fn unit() -> Weight {
        Weight::constant(1, 1.0).unwrap()
    }

    #[test]
    fn constant_functions() {
        let s = SparseFamily::verify([iv(0, 0), iv(1, 0), iv(3, 2)], 0.5).unwrap();
        let prm = ExponentParams::new(1, 2.0, 2.0, 0.0, 3.0).unwrap();
        let one = GridFunction::constant(1, 4, 1.0).unwrap();
        let d = decompose_levels(&s, &one, &unit(), &prm).unwrap();
        assert_eq!(d.family(0).len(), 3);
        assert!(d.s_prime().is_empty());
        let three = GridFunction::constant(1, 4, 3.0).unwrap();
        let d = decompose_levels(&s, &three, &unit(), &prm).unwrap();
        assert_eq!(d.s_prime().len(), 3);
        assert_eq!(d.levels().count(), 0);
    }

    #[test]
    fn e_sets_inside_one_level() {
        let s = SparseFamily::verify([iv(0, 0), iv(1, 0)], 0.5).unwrap();
        let prm = ExponentParams::new(1, 2.0, 2.0, 0.0, 1.0).unwrap();
        let one = GridFunction::constant(1, 3, 1.0).unwrap();
        let d = decompose_levels(&s, &one, &unit(), &prm).unwrap();
        assert_eq!(d.e_set(0, &iv(0, 0)), vec![iv(1, 1)]);
        assert_eq!(d.e_set(0, &iv(1, 0)), vec![iv(1, 0)]);
    }

    #[test]
    fn classify_boundaries() {
        assert!(matches!(classify(1.0, 40), Slot::Level(0)));
        assert!(matches!(classify(0.5, 40), Slot::Level(1)));
        assert!(matches!(classify(0.5000001, 40), Slot::Level(0)));
        assert!(matches!(classify(1.0000001, 40), Slot::Prime));
        assert!(matches!(classify(0.0, 40), Slot::Dropped));
        assert!(matches!(classify(2f64.powi(-41), 40), Slot::Dropped));
        assert!(matches!(classify(2f64.powi(-40), 40), Slot::Level(40)));
    }

    #[test]
    fn lambda0_needs_q_below_nu() {
        let (l0, eps) = lambda0(3.0, 1.0).unwrap();
        assert_eq!(eps, 1.0);
        assert!((l0.powf(3.0) / 2.0 - 2.0).abs() < 1e-12);
        assert!(matches!(lambda0(2.0, 2.0), Err(Error::Hypothesis(_))));
    }

    /// The half-retention bound can fail once alpha > 0: with alpha/d = 1/2
    /// a single child of half the measure is allowed, and if it carries all
    /// of the mass both cubes can sit in S_0 while E_Q carries nothing.
    #[test]
    fn retention_fails_for_positive_alpha() {
        let s = SparseFamily::verify([iv(0, 0), iv(1, 0)], 0.5).unwrap();
        let alpha = 0.5;
        assert!(s.check_extra_sparsification(alpha));
        let f = GridFunction::new(1, 1, vec![1.2, 0.0]).unwrap();
        let prm = ExponentParams::new(1, 2.0, 2.0, alpha, 2.0).unwrap();
        let d = decompose_levels(&s, &f, &unit(), &prm).unwrap();
        assert_eq!(d.family(0).len(), 2);
        let rep = d.retention();
        assert_eq!(rep.min_ratio, 0.0);
        assert_eq!(rep.worst, Some((0, iv(0, 0))));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn levels_partition_the_family(seed in any::<u64>(), alpha in 0.0f64..0.9) {
            let mut rng = random::rng(seed);
            let s = random::sparse_family(&mut rng, 1, 6, 0.5);
            let f = random::positive_grid(&mut rng, 1, 6).scale(4.0).unwrap();
            let sigma = random::grid_weight(&mut rng, 1, 6);
            let prm = ExponentParams::new(1, 2.0, 2.0, alpha, 2.0).unwrap();
            let d = decompose_levels(&s, &f, &sigma, &prm).unwrap();
            let mut all: Vec<DyadicCube> = d.s_prime().to_vec();
            for m in 0..=d.m_max() {
                for q in d.family(m) {
                    let a = d.average(q).unwrap();
                    prop_assert!(a > 2f64.powi(-(m as i32) - 1) && a <= 2f64.powi(-(m as i32)));
                }
                all.extend(d.family(m));
            }
            all.extend(d.dropped());
            all.sort();
            prop_assert_eq!(all.as_slice(), s.cubes());
        }

        #[test]
        fn retention_for_alpha_zero(seed in any::<u64>()) {
            let mut rng = random::rng(seed);
            let s = random::extra_sparse_family(&mut rng, 1, 8, 0.0);
            let f = random::positive_grid(&mut rng, 1, 8);
            let sigma = random::grid_weight(&mut rng, 1, 8);
            let prm = ExponentParams::new(1, 2.0, 2.0, 0.0, 2.0).unwrap();
            let d = decompose_levels(&s, &f, &sigma, &prm).unwrap();
            prop_assert!(d.extra_sparse());
            let rep = d.retention();
            prop_assert_eq!(rep.violations, 0, "{:?}", rep);
        }

        #[test]
        fn split_covers_level_set(seed in any::<u64>(), q in 1.1f64..2.5) {
            let mut rng = random::rng(seed);
            let s = random::sparse_family(&mut rng, 1, 6, 0.5);
            let f = random::positive_grid(&mut rng, 1, 6).scale(3.0).unwrap();
            let sigma = random::grid_weight(&mut rng, 1, 6);
            let w = random::grid_weight(&mut rng, 1, 6);
            let prm = ExponentParams::new(1, 1.1, q, 0.2, 3.0).unwrap();
            let d = decompose_levels(&s, &f, &sigma, &prm).unwrap();
            let rep = d.split(&w, q).unwrap();
            prop_assert!(rep.holds, "{:?}", rep);
        }

        #[test]
        fn tails_decay_geometrically(seed in any::<u64>()) {
            let mut rng = random::rng(seed);
            let s = random::sparse_family(&mut rng, 1, 8, 0.5);
            let f = random::positive_grid(&mut rng, 1, 8);
            let prm = ExponentParams::new(1, 2.0, 2.0, 0.0, 1.0).unwrap();
            let d = decompose_levels(&s, &f, &unit(), &prm).unwrap();
            let rep = d.tail_report(0);
            prop_assert!(rep.max_ratio <= 0.5 + 1e-15, "{:?}", rep);
        }
    }
}
