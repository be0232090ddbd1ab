//! Least-squares power-law fits in log–log space.

use crate::math;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PowerFit {
    pub exponent: f64,
    /// Intercept of the fitted line in natural-log units.
    pub intercept: f64,
    /// Root-mean-square residual in log space.
    pub rms: f64,
}

impl PowerFit {
    /// Fitted value `exp(intercept) · x^exponent`.
    pub fn eval(&self, x: f64) -> f64 {
        math::exp(self.intercept + self.exponent * math::ln(x))
    }
}

/// Ordinary least squares on `(log x, log y)`. Needs at least three points,
/// all positive, with at least two distinct `x`.
pub fn fit_exponent(pairs: &[(f64, f64)]) -> Result<PowerFit> {
    if pairs.len() < 3 {
        return Err(Error::Precondition(
            "exponent fit needs at least three points",
        ));
    }
    for &(x, y) in pairs {
        if !(x > 0.0) {
            return Err(Error::Domain {
                what: "T",
                value: x,
            });
        }
        if !(y > 0.0) {
            return Err(Error::Domain {
                what: "value",
                value: y,
            });
        }
    }
    let n = pairs.len() as f64;
    let (mut sx, mut sy) = (0.0, 0.0);
    for &(x, y) in pairs {
        sx += math::ln(x);
        sy += math::ln(y);
    }
    let (mx, my) = (sx / n, sy / n);
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for &(x, y) in pairs {
        let dx = math::ln(x) - mx;
        sxx += dx * dx;
        sxy += dx * (math::ln(y) - my);
    }
    if sxx == 0.0 {
        return Err(Error::Precondition(
            "exponent fit needs two distinct abscissae",
        ));
    }
    let exponent = sxy / sxx;
    let intercept = my - exponent * mx;
    let mut ss = 0.0;
    for &(x, y) in pairs {
        let r = math::ln(y) - (intercept + exponent * math::ln(x));
        ss += r * r;
    }
    Ok(PowerFit {
        exponent,
        intercept,
        rms: math::sqrt(ss / n),
    })
}

/// Ordinary least-squares line `y = slope · x + intercept`.
pub fn fit_line(pairs: &[(f64, f64)]) -> Result<(f64, f64)> {
    if pairs.len() < 2 {
        return Err(Error::Precondition("line fit needs at least two points"));
    }
    let n = pairs.len() as f64;
    let mx = pairs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pairs.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for &(x, y) in pairs {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    if sxx == 0.0 {
        return Err(Error::Precondition("line fit needs two distinct abscissae"));
    }
    let slope = sxy / sxx;
    Ok((slope, my - slope * mx))
}
