//! Ordinary least squares for log-log exponent recovery.

use serde::Serialize;

use crate::error::{Error, Result};

/// Minimum number of usable points for a fit.
pub const MIN_POINTS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope.
    pub stderr: f64,
    pub n: usize,
}

/// Least-squares line through `(x, y)`.
pub fn ols(x: &[f64], y: &[f64]) -> Result<LineFit> {
    if x.len() != y.len() {
        return Err(Error::param(format!("fit needs equal lengths, got {} and {}", x.len(), y.len())));
    }
    let n = x.len();
    if n < MIN_POINTS {
        return Err(Error::DegenerateFit(format!("{n} usable points, need at least {MIN_POINTS}")));
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx <= 0.0 {
        return Err(Error::DegenerateFit("all abscissae coincide".into()));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let stderr = (rss / (nf - 2.0) / sxx).sqrt();
    Ok(LineFit {
        slope,
        intercept,
        stderr,
        n,
    })
}

/// Slope of `log y` against `log x`, skipping pairs that are not finite and
/// positive.
pub fn loglog(x: &[f64], y: &[f64]) -> Result<LineFit> {
    let (lx, ly): (Vec<f64>, Vec<f64>) = x
        .iter()
        .zip(y)
        .filter(|(a, b)| a.is_finite() && b.is_finite() && **a > 0.0 && **b > 0.0)
        .map(|(a, b)| (a.ln(), b.ln()))
        .unzip();
    ols(&lx, &ly)
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    #[test]
    fn exact_line() {
        let x = [1.0, 2.0, 3.0, 4.0, 5.0];
        let y: Vec<f64> = x.iter().map(|v| 3.0 - 0.5 * v).collect();
        let f = ols(&x, &y).unwrap();
        assert!((f.slope + 0.5).abs() < 1e-14 && (f.intercept - 3.0).abs() < 1e-13);
        assert!(f.stderr < 1e-12);
    }

    #[test]
    fn known_stderr() {
        // residuals +-1 alternating around y = x
        let x = [0.0, 1.0, 2.0, 3.0];
        let y = [1.0, 0.0, 3.0, 2.0];
        let f = ols(&x, &y).unwrap();
        assert!((f.slope - 0.6).abs() < 1e-14);
        // rss = 3.2, sxx = 5
        assert!((f.stderr - (3.2f64 / 2.0 / 5.0).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn too_few_points() {
        assert!(matches!(ols(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]), Err(Error::DegenerateFit(_))));
        assert!(matches!(loglog(&[1.0, 2.0, 3.0, 4.0], &[1.0, 0.0, -1.0, 2.0]), Err(Error::DegenerateFit(_))));
        assert!(matches!(ols(&[1.0; 5], &[1.0, 2.0, 3.0, 4.0, 5.0]), Err(Error::DegenerateFit(_))));
    }

    proptest! {
        #[test]
        fn power_law_recovered(c in 0.1f64..10.0, e in -3.0f64..3.0) {
            let x = [1.0, 2.0, 4.0, 8.0, 16.0];
            let y: Vec<f64> = x.iter().map(|v: &f64| c * v.powf(e)).collect();
            prop_assert!((loglog(&x, &y).unwrap().slope - e).abs() < 1e-10);
        }
    }
}
