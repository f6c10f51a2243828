//! Model-free dimension estimates from point samples.

use std::fmt;
use std::fmt::Write as _;

use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::points::PointCloud;

/// Fits below this coefficient of determination carry a warning.
pub const MIN_R_SQUARED: f64 = 0.99;

/// Least-squares line `y = slope·x + intercept`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Ordinary least squares; a constant response gives `R² = 1`.
pub fn least_squares(xs: &[f64], ys: &[f64]) -> Result<LinearFit> {
    if xs.len() != ys.len() {
        return invalid("abscissae and ordinates differ in length");
    }
    if xs.len() < 2 {
        return Err(Error::TooFewScales);
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::TooFewScales);
    }
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok(LinearFit {
        slope,
        intercept: my - slope * mx,
        r_squared,
    })
}

/// `2^{−k}` for `k = lo..=hi`.
pub fn dyadic_scales(lo: u32, hi: u32) -> Vec<f64> {
    (lo..=hi).map(|k| 0.5f64.powi(k as i32)).collect()
}

/// Occupied grid boxes at each scale with the fitted slope of
/// `log N_δ` against `−log δ`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxCountProfile {
    pub dim: usize,
    pub scales: Vec<f64>,
    pub counts: Vec<usize>,
    pub fit: LinearFit,
}

impl BoxCountProfile {
    pub fn slope(&self) -> f64 {
        self.fit.slope
    }

    /// CSV `delta,count`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("delta,count\n");
        for (d, c) in self.scales.iter().zip(&self.counts) {
            writeln!(out, "{d},{c}").unwrap();
        }
        out
    }
}

fn box_key(p: &[f64], delta: f64) -> Result<u128> {
    let mut key: u128 = 0;
    for &c in p {
        let index = (c / delta).floor();
        if index.abs() >= i32::MAX as f64 {
            return invalid(format!("coordinate {c} is too large for scale {delta}"));
        }
        key = (key << 32) | (index as i32 as u32) as u128;
    }
    Ok(key)
}

fn occupied_boxes(cloud: &PointCloud, delta: f64) -> Result<usize> {
    let mut keys: Vec<u128> = cloud
        .coords()
        .par_chunks_exact(cloud.dim())
        .map(|p| box_key(p, delta))
        .collect::<Result<_>>()?;
    keys.par_sort_unstable();
    keys.dedup();
    Ok(keys.len())
}

/// Counts grid boxes of side `δ` anchored at the origin that contain a point.
pub fn box_count(cloud: &PointCloud, scales: &[f64]) -> Result<BoxCountProfile> {
    if cloud.is_empty() {
        return invalid("point cloud is empty");
    }
    if cloud.dim() > 4 {
        return invalid("box counting supports dimensions up to 4");
    }
    if scales.len() < 2 {
        return Err(Error::TooFewScales);
    }
    if scales.iter().any(|&d| !(d > 0.0 && d < 1.0)) {
        return invalid("scales must lie in (0, 1)");
    }
    let counts: Vec<usize> = scales.iter().map(|&d| occupied_boxes(cloud, d)).collect::<Result<_>>()?;
    let xs: Vec<f64> = scales.iter().map(|d| -d.ln()).collect();
    let ys: Vec<f64> = counts.iter().map(|&c| (c as f64).ln()).collect();
    Ok(BoxCountProfile {
        dim: cloud.dim(),
        scales: scales.to_vec(),
        counts,
        fit: least_squares(&xs, &ys)?,
    })
}

/// Local dimension estimates at one point from the empirical measure.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalDimension {
    /// Smallest of `log μ̂(B(x,r)) / log r` over the radii with non-empty balls.
    pub lower: f64,
    pub upper: f64,
    /// Slope of `log μ̂(B(x,r))` against `log r`; free of the constant
    /// factor that biases the individual ratios at moderate radii.
    pub slope: Option<f64>,
    /// `(r, log μ̂(B(x,r)) / log r)` for every radius with a non-empty ball.
    pub estimates: Vec<(f64, f64)>,
}

/// Estimates the local dimension of the sampled measure at `x` over the
/// decreasing `radii`. Radii whose ball holds no sample are skipped, since
/// `log 0` carries no information; accurate values need about 10⁵ samples.
pub fn local_dimension(samples: &PointCloud, x: &[f64], radii: &[f64]) -> Result<LocalDimension> {
    if x.len() != samples.dim() {
        return invalid("point has the wrong dimension");
    }
    if radii.is_empty() || radii.iter().any(|&r| !(r > 0.0 && r < 1.0)) {
        return invalid("radii must lie in (0, 1)");
    }
    if radii.windows(2).any(|w| w[1] >= w[0]) {
        return invalid("radii must be strictly decreasing");
    }
    if samples.is_empty() {
        return Err(Error::InsufficientSamples("no samples".into()));
    }
    let distances: Vec<f64> = samples
        .iter()
        .map(|p| p.iter().zip(x).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt())
        .collect();
    let total = distances.len() as f64;
    let mut estimates = Vec::new();
    let mut logs = (Vec::new(), Vec::new());
    for (k, &r) in radii.iter().enumerate() {
        let inside = distances.iter().filter(|&&d| d <= r).count();
        if inside == 0 {
            if k == 0 {
                return Err(Error::InsufficientSamples(format!("no sample within the largest radius {r}")));
            }
            continue;
        }
        let log_mass = (inside as f64 / total).ln();
        estimates.push((r, log_mass / r.ln()));
        logs.0.push(r.ln());
        logs.1.push(log_mass);
    }
    let lower = estimates.iter().map(|e| e.1).fold(f64::INFINITY, f64::min);
    let upper = estimates.iter().map(|e| e.1).fold(f64::NEG_INFINITY, f64::max);
    let slope = least_squares(&logs.0, &logs.1).ok().map(|f| f.slope);
    Ok(LocalDimension {
        lower,
        upper,
        slope,
        estimates,
    })
}

/// Outcome of comparing an analytic dimension with a box-counting slope.
#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub pass: bool,
    pub analytic: f64,
    /// `min(d, analytic)`.
    pub target: f64,
    pub slope: f64,
    pub tolerance: f64,
    pub warning: Option<String>,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: box-counting slope {:.6} vs analytic {:.6} (target {:.6}, tolerance {})",
            if self.pass { "pass" } else { "fail" },
            self.slope,
            self.analytic,
            self.target,
            self.tolerance
        )?;
        if let Some(w) = &self.warning {
            write!(f, "; warning: {w}")?;
        }
        Ok(())
    }
}

/// Passes iff `|slope − min(d, analytic)| ≤ tol`.
pub fn dimension_crosscheck(analytic: f64, profile: &BoxCountProfile, tol: f64) -> Verdict {
    let target = analytic.min(profile.dim as f64);
    let slope = profile.fit.slope;
    let warning = (profile.fit.r_squared < MIN_R_SQUARED)
        .then(|| format!("fit R² = {:.4} is below {MIN_R_SQUARED}", profile.fit.r_squared));
    Verdict {
        pass: (slope - target).abs() <= tol,
        analytic,
        target,
        slope,
        tolerance: tol,
        warning,
    }
}
