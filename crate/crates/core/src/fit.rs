//! Small least-squares fits used by the asymptotic diagnostics.

use crate::math::{exp, ln, sqrt};
use crate::{Error, Result};

/// `y ≈ intercept + slope · x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual.
    pub rms: f64,
}

pub fn fit_line(xs: &[f64], ys: &[f64]) -> Result<LineFit> {
    let n = xs.len().min(ys.len());
    if n < 2 {
        return Err(Error::InsufficientData { needed: 2, got: n });
    }
    let nf = n as f64;
    let mx = xs[..n].iter().sum::<f64>() / nf;
    let my = ys[..n].iter().sum::<f64>() / nf;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for i in 0..n {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    if sxx == 0.0 {
        return Err(Error::InvalidInput("degenerate abscissae in line fit".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = (0..n)
        .map(|i| {
            let r = ys[i] - intercept - slope * xs[i];
            r * r
        })
        .sum();
    Ok(LineFit { slope, intercept, rms: sqrt(ss / nf) })
}

/// `y ≈ coefficient · x^exponent`, fitted in log-log space. Requires positive data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerFit {
    pub exponent: f64,
    pub coefficient: f64,
    /// RMS residual of `ln y`.
    pub log_rms: f64,
}

pub fn fit_power_law(xs: &[f64], ys: &[f64]) -> Result<PowerFit> {
    let mut lx = alloc::vec::Vec::with_capacity(xs.len());
    let mut ly = alloc::vec::Vec::with_capacity(ys.len());
    for (&x, &y) in xs.iter().zip(ys) {
        if x > 0.0 && y > 0.0 {
            lx.push(ln(x));
            ly.push(ln(y));
        }
    }
    let line = fit_line(&lx, &ly)?;
    Ok(PowerFit {
        exponent: line.slope,
        coefficient: exp(line.intercept),
        log_rms: line.rms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::powf;

    #[test]
    fn exact_power_law() {
        let xs: alloc::vec::Vec<f64> = (1..20).map(|k| k as f64 * 3.0).collect();
        let ys: alloc::vec::Vec<f64> = xs.iter().map(|x| 1.7 * powf(*x, 0.66)).collect();
        let f = fit_power_law(&xs, &ys).unwrap();
        assert!((f.exponent - 0.66).abs() < 1e-12);
        assert!((f.coefficient - 1.7).abs() < 1e-12);
    }

    #[test]
    fn too_few_points() {
        assert!(fit_line(&[1.0], &[2.0]).is_err());
    }
}
