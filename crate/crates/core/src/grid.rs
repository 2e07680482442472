//! Cell-constant functions on the uniform depth-K lattice.

use serde::{Deserialize, Serialize};

use crate::dyadic::{cells_per_level, check_dim, parent_linear, DyadicCube, MAX_LEVEL};
use crate::error::{Error, Result};

/// Nonnegative function, constant on each level-`depth` cell of `[0,1)^d`.
/// `values[i]` is the value on the cell with row-major linear index `i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGrid", into = "RawGrid")]
pub struct GridFunction {
    dim: u8,
    depth: u32,
    values: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
pub(crate) struct RawGrid {
    #[serde(default = "one", skip_serializing_if = "is_one")]
    dim: u8,
    depth: u32,
    values: Vec<f64>,
}

fn one() -> u8 {
    1
}

fn is_one(d: &u8) -> bool {
    *d == 1
}

impl TryFrom<RawGrid> for GridFunction {
    type Error = Error;

    fn try_from(r: RawGrid) -> Result<Self> {
        GridFunction::new(r.dim, r.depth, r.values)
    }
}

impl From<GridFunction> for RawGrid {
    fn from(g: GridFunction) -> Self {
        RawGrid {
            dim: g.dim,
            depth: g.depth,
            values: g.values,
        }
    }
}

impl GridFunction {
    pub fn new(dim: u8, depth: u32, values: Vec<f64>) -> Result<Self> {
        check_dim(dim)?;
        if depth * dim as u32 > MAX_LEVEL {
            return Err(Error::param(format!("grid depth {depth} too large for d={dim}")));
        }
        let n = cells_per_level(dim, depth) as usize;
        if values.len() != n {
            return Err(Error::param(format!(
                "grid of depth {depth} in d={dim} needs {n} values, got {}",
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::param(format!("grid values must be finite and >= 0, found {v}")));
        }
        Ok(GridFunction { dim, depth, values })
    }

    pub fn constant(dim: u8, depth: u32, c: f64) -> Result<Self> {
        GridFunction::new(dim, depth, vec![c; cells_per_level(dim, depth) as usize])
    }

    pub fn zeros(dim: u8, depth: u32) -> Self {
        GridFunction {
            dim,
            depth,
            values: vec![0.0; cells_per_level(dim, depth) as usize],
        }
    }

    /// `c * 1_Q` sampled on the depth-`depth` lattice.
    pub fn indicator(dim: u8, depth: u32, q: &DyadicCube, c: f64) -> Result<Self> {
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
        let mut g = GridFunction::zeros(dim, depth);
        for i in q.cells_at(depth) {
            g.values[i as usize] = c;
        }
        Ok(g)
    }

    /// Builds a 1-d grid function from the left endpoints of the cells.
    pub fn from_fn_1d(depth: u32, f: impl Fn(f64) -> f64) -> Result<Self> {
        let h = 0.5f64.powi(depth as i32);
        let values = (0..1u64 << depth).map(|i| f(i as f64 * h)).collect();
        GridFunction::new(1, depth, values)
    }

    pub fn dim(&self) -> u8 {
        self.dim
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn cell_measure(&self) -> f64 {
        0.5f64.powi((self.depth * self.dim as u32) as i32)
    }

    pub fn cell(&self, i: usize) -> DyadicCube {
        DyadicCube::from_linear(self.dim, self.depth, i as u64)
    }

    pub(crate) fn check_cube(&self, q: &DyadicCube) -> Result<()> {
        if q.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: q.dim(),
            });
        }
        if q.level() > self.depth {
            return Err(Error::TooDeep {
                cube: *q,
                level: q.level(),
                depth: self.depth,
            });
        }
        Ok(())
    }

    /// Exact `∫_Q g` as a cell sum.
    pub fn integral(&self, q: &DyadicCube) -> Result<f64> {
        self.check_cube(q)?;
        let s: f64 = q.cells_at(self.depth).iter().map(|&i| self.values[i as usize]).sum();
        Ok(s * self.cell_measure())
    }

    /// Integrals over every dyadic cube of level `<= depth`.
    pub fn pyramid(&self) -> Pyramid {
        let m = self.cell_measure();
        Pyramid::from_cell_masses(self.dim, self.depth, self.values.iter().map(|v| v * m).collect())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        GridFunction::new(self.dim, self.depth, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn scale(&self, t: f64) -> Result<Self> {
        self.map(|v| v * t)
    }

    /// Cellwise product; both grids must share dimension and depth.
    pub fn mul(&self, other: &GridFunction) -> Result<Self> {
        self.same_shape(other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect();
        GridFunction::new(self.dim, self.depth, values)
    }

    pub(crate) fn same_shape(&self, other: &GridFunction) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        if self.depth != other.depth {
            return Err(Error::param(format!(
                "grid depths differ: {} vs {}",
                self.depth, other.depth
            )));
        }
        Ok(())
    }

    /// The same function on a finer lattice.
    pub fn refined(&self, depth: u32) -> Result<Self> {
        if depth < self.depth {
            return Err(Error::param(format!(
                "cannot refine depth {} down to {depth}",
                self.depth
            )));
        }
        let values = (0..cells_per_level(self.dim, depth))
            .map(|lin| {
                let c = DyadicCube::from_linear(self.dim, depth, lin).ancestor_at(self.depth);
                self.values[c.linear_index() as usize]
            })
            .collect();
        GridFunction::new(self.dim, depth, values)
    }

    /// Largest value (0 for the zero function).
    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }
}

/// Per-level table of cube masses: `levels[k][i]` is the mass of the
/// level-`k` cube with linear index `i`.
#[derive(Debug, Clone)]
pub struct Pyramid {
    dim: u8,
    levels: Vec<Vec<f64>>,
}

impl Pyramid {
    /// Sums cell masses bottom-up.
    pub fn from_cell_masses(dim: u8, depth: u32, cells: Vec<f64>) -> Self {
        let mut levels = vec![Vec::new(); depth as usize + 1];
        levels[depth as usize] = cells;
        for k in (0..depth).rev() {
            let mut up = vec![0.0; cells_per_level(dim, k) as usize];
            let fine = &levels[k as usize + 1];
            for (lin, &v) in fine.iter().enumerate() {
                up[parent_linear(dim, k + 1, lin as u64) as usize] += v;
            }
            levels[k as usize] = up;
        }
        Pyramid { dim, levels }
    }

    /// Uses an explicit formula for every level (closed-form weights).
    pub fn from_fn(dim: u8, depth: u32, mass: impl Fn(u32, u64) -> f64) -> Self {
        let levels = (0..=depth)
            .map(|k| (0..cells_per_level(dim, k)).map(|i| mass(k, i)).collect())
            .collect();
        Pyramid { dim, levels }
    }

    pub fn dim(&self) -> u8 {
        self.dim
    }

    pub fn depth(&self) -> u32 {
        self.levels.len() as u32 - 1
    }

    pub fn level(&self, k: u32) -> &[f64] {
        &self.levels[k as usize]
    }

    pub fn mass(&self, q: &DyadicCube) -> f64 {
        self.levels[q.level() as usize][q.linear_index() as usize]
    }
}

/// Pushes per-cube contributions down to the finest level: every cell
/// receives the sum of the contributions of all its ancestors (itself
/// included).
pub(crate) fn accumulate_down(dim: u8, mut levels: Vec<Vec<f64>>) -> Vec<f64> {
    for k in 1..levels.len() {
        let (coarse, fine) = levels.split_at_mut(k);
        let parent = &coarse[k - 1];
        for (lin, v) in fine[0].iter_mut().enumerate() {
            *v += parent[parent_linear(dim, k as u32, lin as u64) as usize];
        }
    }
    levels.pop().unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integral_and_pyramid_agree() {
        let g = GridFunction::new(1, 3, vec![1.0, 2.0, 3.0, 4.0, 0.0, 0.0, 1.0, 1.0]).unwrap();
        let py = g.pyramid();
        for q in DyadicCube::lattice(1, 3) {
            assert!((py.mass(&q) - g.integral(&q).unwrap()).abs() < 1e-15);
        }
        assert_eq!(py.mass(&DyadicCube::unit(1)), 12.0 / 8.0);
    }

    #[test]
    fn two_dimensional_pyramid() {
        let values: Vec<f64> = (0..16).map(|i| i as f64).collect();
        let g = GridFunction::new(2, 2, values).unwrap();
        let py = g.pyramid();
        for q in DyadicCube::lattice(2, 2) {
            assert!((py.mass(&q) - g.integral(&q).unwrap()).abs() < 1e-14);
        }
    }

    #[test]
    fn refine_keeps_integrals() {
        let g = GridFunction::new(1, 2, vec![1.0, 5.0, 2.0, 0.5]).unwrap();
        let r = g.refined(5).unwrap();
        for q in DyadicCube::lattice(1, 2) {
            assert!((g.integral(&q).unwrap() - r.integral(&q).unwrap()).abs() < 1e-15);
        }
    }

    #[test]
    fn rejects_negative_values() {
        assert!(GridFunction::new(1, 1, vec![1.0, -1.0]).is_err());
        assert!(GridFunction::new(1, 1, vec![1.0]).is_err());
    }

    #[test]
    fn json_shape() {
        let g = GridFunction::new(1, 1, vec![1.0, 2.0]).unwrap();
        assert_eq!(serde_json::to_string(&g).unwrap(), r#"{"depth":1,"values":[1.0,2.0]}"#);
    }
}
