//! Log-domain model of the tower `I_k = [0, 2^-k)` on `[0,1)`.
//!
//! Cells are the annuli `A_i = [2^-(i+1), 2^-i)`, `i < n`, plus the core
//! `[0, 2^-n)`. Every function built from the tower is constant on these
//! cells, so this is the depth-`n` dyadic lattice with the cells of each
//! annulus merged. Values and masses are kept as logarithms because they
//! span thousands of binary orders for small `theta`.

use std::f64::consts::LN_2;

use crate::error::{Error, Result};
use crate::norms::{log_add, LogStep};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Annuli {
    n: usize,
}

impl Annuli {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::param("need at least one annulus"));
        }
        Ok(Annuli { n })
    }

    /// Number of annuli, i.e. the deepest tower level.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of cells (annuli plus core).
    pub fn cells(&self) -> usize {
        self.n + 1
    }

    /// `ln ∫_C x^(e-1) dx` for every cell `C`, `e > 0`.
    pub fn log_power_masses(&self, e: f64) -> Result<Vec<f64>> {
        if !(e > 0.0 && e.is_finite()) {
            return Err(Error::NonIntegrable { beta: e - 1.0, s: 1.0 });
        }
        let shape = ((e * LN_2).exp_m1() / e).ln();
        let mut out: Vec<f64> = (0..self.n).map(|i| -((i + 1) as f64) * e * LN_2 + shape).collect();
        out.push(-(self.n as f64) * e * LN_2 - e.ln());
        Ok(out)
    }

    /// `ln |C|` per cell.
    pub fn log_lengths(&self) -> Vec<f64> {
        self.log_power_masses(1.0).expect("e = 1")
    }

    /// `ln <mu>_{alpha,I_k}` for `k = 0..=n`, from per-cell log masses of `mu`.
    pub fn log_tower_averages(&self, log_mass: &[f64], alpha: f64) -> Vec<f64> {
        assert_eq!(log_mass.len(), self.cells());
        let mut tail = vec![f64::NEG_INFINITY; self.cells()];
        let mut acc = f64::NEG_INFINITY;
        for k in (0..self.cells()).rev() {
            acc = log_add(acc, log_mass[k]);
            tail[k] = acc;
        }
        tail.iter()
            .enumerate()
            .map(|(k, t)| t + k as f64 * (1.0 - alpha) * LN_2)
            .collect()
    }

    /// `ln (sum_{k <= i} c_k^nu)^(1/nu)` on cell `i`, from `ln c_k`: the value
    /// of `(sum_k c_k^nu 1_{I_k})^(1/nu)`.
    pub fn log_tower_sum(&self, log_coef: &[f64], nu: f64) -> Vec<f64> {
        assert_eq!(log_coef.len(), self.cells());
        let mut acc = f64::NEG_INFINITY;
        log_coef
            .iter()
            .map(|c| {
                acc = log_add(acc, nu * c);
                acc / nu
            })
            .collect()
    }

    /// `ln A(f mu)` on the cells for the sparse operator over the tower.
    pub fn log_apply(&self, log_f: &[f64], log_mu: &[f64], alpha: f64, nu: f64) -> Vec<f64> {
        let lm: Vec<f64> = log_f.iter().zip(log_mu).map(|(a, b)| a + b).collect();
        self.log_tower_sum(&self.log_tower_averages(&lm, alpha), nu)
    }

    pub fn step(&self, log_values: Vec<f64>, log_masses: Vec<f64>) -> LogStep {
        LogStep {
            log_values,
            log_masses,
        }
    }

    /// Index of the annulus containing the level-`depth` cell `c` (the core
    /// for `c = 0` is reported as `depth`).
    pub fn annulus_of_cell(c: u64, depth: u32) -> usize {
        if c == 0 {
            depth as usize
        } else {
            (depth - 1 - c.ilog2()) as usize
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn masses_partition_the_unit_interval() {
        let a = Annuli::new(30).unwrap();
        for e in [0.01, 0.5, 1.0, 2.5] {
            let ln = crate::norms::log_sum_exp(a.log_power_masses(e).unwrap());
            assert!((ln.exp() - 1.0 / e).abs() < 1e-12 / e);
        }
        assert!(a.log_power_masses(0.0).is_err());
    }

    #[test]
    fn annulus_index() {
        // depth 3: cells 4..8 are [1/2,1), 2..4 are [1/4,1/2), 1 is [1/8,1/4)
        assert_eq!(Annuli::annulus_of_cell(7, 3), 0);
        assert_eq!(Annuli::annulus_of_cell(4, 3), 0);
        assert_eq!(Annuli::annulus_of_cell(3, 3), 1);
        assert_eq!(Annuli::annulus_of_cell(1, 3), 2);
        assert_eq!(Annuli::annulus_of_cell(0, 3), 3);
    }

    #[test]
    fn unit_averages() {
        let a = Annuli::new(5).unwrap();
        let avg = a.log_tower_averages(&a.log_lengths(), 0.0);
        assert!(avg.iter().all(|v| v.abs() < 1e-13));
        let sum = a.log_tower_sum(&avg, 1.0);
        for (i, v) in sum.iter().enumerate() {
            assert!((v.exp() - (i + 1) as f64).abs() < 1e-12);
        }
    }
}
