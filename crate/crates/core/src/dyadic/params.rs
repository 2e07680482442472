use serde::{Deserialize, Serialize};

use super::check_dim;
use crate::error::{Error, Result};

/// Hölder conjugate `r' = r/(r-1)`; `None` unless `r > 1`.
pub fn conjugate(r: f64) -> Option<f64> {
    (r > 1.0 && r.is_finite()).then(|| r / (r - 1.0))
}

const SOBOLEV_TOL: f64 = 1e-12;

/// Exponent tuple `(d, p, q, alpha, nu)` with `1 < p <= q < inf`,
/// `0 <= alpha < d`, `nu > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct ExponentParams {
    d: u8,
    p: f64,
    q: f64,
    alpha: f64,
    nu: f64,
}

#[derive(Serialize, Deserialize)]
struct RawParams {
    d: u8,
    p: f64,
    q: f64,
    alpha: f64,
    nu: f64,
}

impl TryFrom<RawParams> for ExponentParams {
    type Error = Error;

    fn try_from(r: RawParams) -> Result<Self> {
        ExponentParams::new(r.d, r.p, r.q, r.alpha, r.nu)
    }
}

impl From<ExponentParams> for RawParams {
    fn from(e: ExponentParams) -> Self {
        RawParams {
            d: e.d,
            p: e.p,
            q: e.q,
            alpha: e.alpha,
            nu: e.nu,
        }
    }
}

impl ExponentParams {
    pub fn new(d: u8, p: f64, q: f64, alpha: f64, nu: f64) -> Result<Self> {
        check_dim(d)?;
        if !(p > 1.0 && p.is_finite()) {
            return Err(Error::param(format!("p = {p} must satisfy 1 < p < inf")));
        }
        if !(q >= p && q.is_finite()) {
            return Err(Error::param(format!("q = {q} must satisfy p <= q < inf (p = {p})")));
        }
        if !(alpha >= 0.0 && alpha < d as f64) {
            return Err(Error::param(format!("alpha = {alpha} must satisfy 0 <= alpha < d = {d}")));
        }
        if !(nu > 0.0 && nu.is_finite()) {
            return Err(Error::param(format!("nu = {nu} must be positive")));
        }
        Ok(ExponentParams { d, p, q, alpha, nu })
    }

    /// Parameters on the Sobolev line `1/q + alpha/d = 1/p`, solving for p.
    pub fn sobolev(d: u8, q: f64, alpha: f64, nu: f64) -> Result<Self> {
        let inv_p = 1.0 / q + alpha / d as f64;
        if inv_p >= 1.0 {
            return Err(Error::param(format!(
                "1/q + alpha/d = {inv_p} leaves no p > 1 on the Sobolev line"
            )));
        }
        ExponentParams::new(d, 1.0 / inv_p, q, alpha, nu)
    }

    pub fn d(&self) -> u8 {
        self.d
    }

    pub fn dim(&self) -> f64 {
        self.d as f64
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    /// `alpha / d`.
    pub fn alpha_ratio(&self) -> f64 {
        self.alpha / self.d as f64
    }

    pub fn p_prime(&self) -> f64 {
        self.p / (self.p - 1.0)
    }

    pub fn q_prime(&self) -> f64 {
        self.q / (self.q - 1.0)
    }

    pub fn is_sobolev(&self) -> bool {
        (1.0 / self.q + self.alpha_ratio() - 1.0 / self.p).abs() <= SOBOLEV_TOL
    }

    pub fn require_sobolev(&self) -> Result<()> {
        if self.is_sobolev() {
            Ok(())
        } else {
            Err(Error::param(format!(
                "Sobolev relation 1/q + alpha/d = 1/p fails: {} + {} != {}",
                1.0 / self.q,
                self.alpha_ratio(),
                1.0 / self.p
            )))
        }
    }

    pub fn with_nu(&self, nu: f64) -> Result<Self> {
        ExponentParams::new(self.d, self.p, self.q, self.alpha, nu)
    }
}

/// Approximate equality used for case selection between exponents.
pub(crate) fn same(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0)
}
