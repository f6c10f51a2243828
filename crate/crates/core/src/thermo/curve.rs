use std::fmt::Write as _;

use crate::error::{invalid, Result};
use crate::thermo::root::{bisect_decreasing, RootBracket};

/// Sampled pressure bounds `lower(s) ≤ P(s) ≤ upper(s)` on a grid of `s`.
#[derive(Debug, Clone, PartialEq)]
pub struct PressureCurve {
    samples: Vec<(f64, f64, f64)>,
    root: Option<RootBracket>,
}

/// Inclusive grid `lo, lo + step, …, hi`.
pub fn s_grid(lo: f64, hi: f64, step: f64) -> Result<Vec<f64>> {
    if !(lo.is_finite() && hi.is_finite() && step > 0.0) || hi < lo {
        return invalid("s grid needs lo <= hi and a positive step");
    }
    let count = ((hi - lo) / step + 1e-9).floor() as usize;
    Ok((0..=count).map(|k| lo + k as f64 * step).collect())
}

impl PressureCurve {
    /// Samples `bounds` on `grid`. `bounds(s)` returns `(lower, upper)`.
    pub fn sample<F>(grid: &[f64], mut bounds: F) -> Result<Self>
    where
        F: FnMut(f64) -> Result<(f64, f64)>,
    {
        let mut samples = Vec::with_capacity(grid.len());
        for &s in grid {
            let (lower, upper) = bounds(s)?;
            if !(lower <= upper + 1e-12 * upper.abs().max(1.0)) {
                return invalid(format!("lower bound {lower} exceeds upper bound {upper} at s = {s}"));
            }
            samples.push((s, lower.min(upper), upper));
        }
        Ok(PressureCurve { samples, root: None })
    }

    pub fn samples(&self) -> &[(f64, f64, f64)] {
        &self.samples
    }

    pub fn root(&self) -> Option<RootBracket> {
        self.root
    }

    /// Attaches the root bracket of a decreasing pressure function.
    pub fn with_root<F: FnMut(f64) -> f64>(mut self, f: F, lo: f64, hi: f64, tol: f64) -> Result<Self> {
        self.root = Some(bisect_decreasing(f, lo, hi, tol)?);
        Ok(self)
    }

    pub fn upper_is_non_increasing(&self) -> bool {
        self.samples.windows(2).all(|w| w[1].2 <= w[0].2)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("s,lower,upper\n");
        for (s, lo, hi) in &self.samples {
            writeln!(out, "{s},{lo},{hi}").unwrap();
        }
        out
    }
}
