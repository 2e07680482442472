//! Weights on `[0,1)^d` and their dyadic characteristics.

mod cache;
mod characteristics;
mod reverse_holder;

pub use cache::CharacteristicCache;
pub use characteristics::{
    a_1_char, a_infty_char, a_p_char, a_pq_alpha_char, a_pq_alpha_sup, a_pq_char, a_pq_sup,
    Supremum,
};
pub use reverse_holder::{calibrate_reverse_holder, reverse_holder_check, ReverseHolderReport};

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};

use serde::{Deserialize, Serialize};

use crate::dyadic::{DyadicCube, MAX_LEVEL};
use crate::error::{Error, Result};
use crate::grid::{GridFunction, Pyramid};

/// A weight with one of two backends.
///
/// * `Grid`: strictly positive cell-constant density.
/// * `Power`: `w(x) = x^beta` on `(0,1)` (d = 1), integrated in closed form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "backend", rename_all = "lowercase")]
pub enum Weight {
    Power { beta: f64 },
    Grid(#[serde(deserialize_with = "positive_grid")] GridFunction),
}

fn positive_grid<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<GridFunction, D::Error> {
    let g = GridFunction::deserialize(d)?;
    check_positive(&g).map_err(serde::de::Error::custom)?;
    Ok(g)
}

fn check_positive(g: &GridFunction) -> Result<()> {
    match g.values().iter().find(|v| **v <= 0.0) {
        Some(v) => Err(Error::param(format!("grid weight values must be > 0, found {v}"))),
        None => Ok(()),
    }
}

/// `∫_a^b x^(e-1) dx = (b^e - a^e)/e`, evaluated without cancellation.
pub(crate) fn power_mass(e: f64, a: f64, b: f64) -> f64 {
    if a == 0.0 {
        b.powf(e) / e
    } else {
        a.powf(e) * (e * ((b - a) / a).ln_1p()).exp_m1() / e
    }
}

impl Weight {
    pub fn power(beta: f64) -> Result<Self> {
        if !beta.is_finite() {
            return Err(Error::param(format!("power exponent {beta} is not finite")));
        }
        Ok(Weight::Power { beta })
    }

    pub fn grid(g: GridFunction) -> Result<Self> {
        check_positive(&g)?;
        Ok(Weight::Grid(g))
    }

    /// `w ≡ c` on `[0,1)^d`.
    pub fn constant(dim: u8, c: f64) -> Result<Self> {
        Weight::grid(GridFunction::constant(dim, 0, c)?)
    }

    pub fn dim(&self) -> u8 {
        match self {
            Weight::Power { .. } => 1,
            Weight::Grid(g) => g.dim(),
        }
    }

    /// Native resolution of a grid weight (0 for power weights).
    pub fn native_depth(&self) -> u32 {
        match self {
            Weight::Power { .. } => 0,
            Weight::Grid(g) => g.depth(),
        }
    }

    /// `w^s` as a weight.
    pub fn powf(&self, s: f64) -> Result<Weight> {
        match self {
            Weight::Power { beta } => Weight::power(beta * s),
            Weight::Grid(g) => Weight::grid(g.map(|v| v.powf(s))?),
        }
    }

    /// `t * w`.
    pub fn scaled(&self, t: f64) -> Result<Weight> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::param(format!("weight scale {t} must be positive")));
        }
        match self {
            // x^beta has no free constant; keep the power form only for t = 1.
            Weight::Power { .. } if t == 1.0 => Ok(self.clone()),
            Weight::Power { .. } => Err(Error::param("power weights cannot be rescaled")),
            Weight::Grid(g) => Weight::grid(g.scale(t)?),
        }
    }

    /// `s*beta + 1`, the exponent of the closed-form antiderivative.
    fn power_exponent(beta: f64, s: f64) -> Result<f64> {
        let e = s * beta + 1.0;
        if e > 0.0 {
            Ok(e)
        } else {
            Err(Error::NonIntegrable { beta, s })
        }
    }

    /// Checks that `w^s` is integrable over `[0,1)^d`.
    pub fn check_integrable(&self, s: f64) -> Result<()> {
        match self {
            Weight::Power { beta } => Weight::power_exponent(*beta, s).map(|_| ()),
            Weight::Grid(_) => Ok(()),
        }
    }

    /// Exact `∫_Q w^s`.
    pub fn integrate(&self, s: f64, q: &DyadicCube) -> Result<f64> {
        self.check_cube_dim(q)?;
        match self {
            Weight::Power { beta } => {
                let e = Weight::power_exponent(*beta, s)?;
                let (a, b) = q.bounds();
                Ok(power_mass(e, a, b))
            }
            Weight::Grid(g) => {
                if q.level() >= g.depth() {
                    let v = g.values()[q.ancestor_at(g.depth()).linear_index() as usize];
                    Ok(v.powf(s) * q.measure())
                } else {
                    let m = g.cell_measure();
                    Ok(q.cells_at(g.depth())
                        .iter()
                        .map(|&i| g.values()[i as usize].powf(s))
                        .sum::<f64>()
                        * m)
                }
            }
        }
    }

    fn check_cube_dim(&self, q: &DyadicCube) -> Result<()> {
        if q.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: q.dim(),
            });
        }
        Ok(())
    }

    /// Masses `∫_Q w^s` of every dyadic cube of level `<= depth`. For grid
    /// weights finer than `depth` the pyramid extends to the native depth.
    pub fn pyramid(&self, s: f64, depth: u32) -> Result<Pyramid> {
        if depth > MAX_LEVEL {
            return Err(Error::param(format!("lattice depth {depth} exceeds {MAX_LEVEL}")));
        }
        match self {
            Weight::Power { beta } => {
                let e = Weight::power_exponent(*beta, s)?;
                let h = |k: u32| 0.5f64.powi(k as i32);
                Ok(Pyramid::from_fn(1, depth, |k, i| {
                    power_mass(e, i as f64 * h(k), (i + 1) as f64 * h(k))
                }))
            }
            Weight::Grid(g) => {
                let base = if g.depth() < depth {
                    g.refined(depth)?
                } else {
                    g.clone()
                };
                let powered = base.map(|v| v.powf(s))?;
                Ok(powered.pyramid())
            }
        }
    }

    /// `∫_C w^s` for every level-`depth` cell `C`.
    pub fn cell_masses(&self, s: f64, depth: u32) -> Result<Vec<f64>> {
        match self {
            Weight::Power { beta } => {
                let e = Weight::power_exponent(*beta, s)?;
                let h = 0.5f64.powi(depth as i32);
                Ok((0..1u64 << depth)
                    .map(|i| power_mass(e, i as f64 * h, (i + 1) as f64 * h))
                    .collect())
            }
            Weight::Grid(g) if g.depth() > depth => {
                let py = self.pyramid(s, depth)?;
                Ok(py.level(depth).to_vec())
            }
            Weight::Grid(g) => {
                let fine = g.refined(depth)?;
                let m = fine.cell_measure();
                Ok(fine.values().iter().map(|v| v.powf(s) * m).collect())
            }
        }
    }

    /// Cell averages of `w^s` at level `depth`, as a grid function. Products
    /// with cell-constant functions integrate exactly against this density.
    pub fn density(&self, s: f64, depth: u32) -> Result<GridFunction> {
        let masses = self.cell_masses(s, depth)?;
        let inv = 1.0 / (0.5f64.powi((depth * self.dim() as u32) as i32));
        GridFunction::new(self.dim(), depth, masses.into_iter().map(|m| m * inv).collect())
    }

    /// Essential infimum of `w` over `Q`.
    pub fn inf_on(&self, q: &DyadicCube) -> Result<f64> {
        self.check_cube_dim(q)?;
        Ok(match self {
            Weight::Power { beta } => {
                let (a, b) = q.bounds();
                if *beta < 0.0 {
                    b.powf(*beta)
                } else if *beta > 0.0 {
                    a.powf(*beta)
                } else {
                    1.0
                }
            }
            Weight::Grid(g) => {
                if q.level() >= g.depth() {
                    g.values()[q.ancestor_at(g.depth()).linear_index() as usize]
                } else {
                    q.cells_at(g.depth())
                        .iter()
                        .map(|&i| g.values()[i as usize])
                        .fold(f64::INFINITY, f64::min)
                }
            }
        })
    }

    /// Content hash used as the weight identity in characteristic caches.
    pub fn fingerprint(&self) -> u64 {
        let mut h = DefaultHasher::new();
        match self {
            Weight::Power { beta } => {
                0u8.hash(&mut h);
                beta.to_bits().hash(&mut h);
            }
            Weight::Grid(g) => {
                1u8.hash(&mut h);
                g.dim().hash(&mut h);
                g.depth().hash(&mut h);
                for v in g.values() {
                    v.to_bits().hash(&mut h);
                }
            }
        }
        h.finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrate_examples() {
        let one = Weight::constant(1, 1.0).unwrap();
        assert_eq!(one.integrate(1.0, &DyadicCube::unit(1)).unwrap(), 1.0);
        let inv_sqrt = Weight::power(-0.5).unwrap();
        assert!((inv_sqrt.integrate(1.0, &DyadicCube::unit(1)).unwrap() - 2.0).abs() < 1e-15);
        let lin = Weight::power(1.0).unwrap();
        let half = DyadicCube::interval(1, 0).unwrap();
        assert!((lin.integrate(2.0, &half).unwrap() - 1.0 / 24.0).abs() < 1e-16);
    }

    #[test]
    fn non_integrable_power() {
        let w = Weight::power(-0.5).unwrap();
        let err = w.integrate(2.0, &DyadicCube::unit(1)).unwrap_err();
        assert!(matches!(err, Error::NonIntegrable { .. }));
        assert!(w.pyramid(-3.0, 4).is_ok());
    }

    #[test]
    fn power_mass_is_stable_far_from_origin() {
        // (b^e - a^e)/e with tiny e on a tiny interval: compare with the series
        let (a, b, e) = (0.75f64, 0.75 + 2f64.powi(-20), 1e-6);
        let approx = a.powf(e - 1.0) * (b - a);
        let got = power_mass(e, a, b);
        assert!((got / approx - 1.0).abs() < 1e-5);
    }

    #[test]
    fn pyramid_matches_integrate() {
        let w = Weight::power(-0.3).unwrap();
        let py = w.pyramid(2.0, 6).unwrap();
        for q in DyadicCube::lattice(1, 6) {
            let direct = w.integrate(2.0, &q).unwrap();
            assert!((py.mass(&q) / direct - 1.0).abs() < 1e-13);
        }
        let g = Weight::grid(GridFunction::new(1, 2, vec![1.0, 2.0, 3.0, 4.0]).unwrap()).unwrap();
        let py = g.pyramid(0.5, 4).unwrap();
        for q in DyadicCube::lattice(1, 4) {
            assert!((py.mass(&q) - g.integrate(0.5, &q).unwrap()).abs() < 1e-14);
        }
    }

    #[test]
    fn json_backends() {
        let p: Weight = serde_json::from_str(r#"{"backend":"power","beta":-0.25}"#).unwrap();
        assert_eq!(p, Weight::Power { beta: -0.25 });
        let g: Weight =
            serde_json::from_str(r#"{"backend":"grid","depth":1,"values":[1.0,2.0]}"#).unwrap();
        assert_eq!(g.dim(), 1);
        assert!(serde_json::from_str::<Weight>(r#"{"backend":"grid","depth":1,"values":[0.0,2.0]}"#).is_err());
        let s = serde_json::to_string(&g).unwrap();
        assert_eq!(s, r#"{"backend":"grid","depth":1,"values":[1.0,2.0]}"#);
    }
}
