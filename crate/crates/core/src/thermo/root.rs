use crate::error::{invalid, Error, Result};

/// At most this many halvings are performed.
pub const MAX_BISECTION_STEPS: usize = 60;

/// Closed bracket `[lo, hi]` known to contain a root.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootBracket {
    pub lo: f64,
    pub hi: f64,
}

impl RootBracket {
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

/// Bisection for a strictly decreasing `f` on `[lo, hi]`. Stops once the
/// bracket is narrower than `tol` or after [`MAX_BISECTION_STEPS`] halvings.
pub fn bisect_decreasing<F>(mut f: F, lo: f64, hi: f64, tol: f64) -> Result<RootBracket>
where
    F: FnMut(f64) -> f64,
{
    if !(lo <= hi) || !lo.is_finite() || !hi.is_finite() {
        return invalid(format!("bad bracket [{lo}, {hi}]"));
    }
    let (f_lo, f_hi) = (f(lo), f(hi));
    if f_lo == 0.0 {
        return Ok(RootBracket { lo, hi: lo });
    }
    if f_hi == 0.0 {
        return Ok(RootBracket { lo: hi, hi });
    }
    if !(f_lo > 0.0 && f_hi < 0.0) {
        return Err(Error::RootNotBracketed { lo, hi, f_lo, f_hi });
    }
    let mut bracket = RootBracket { lo, hi };
    for _ in 0..MAX_BISECTION_STEPS {
        if bracket.width() < tol {
            break;
        }
        let mid = bracket.midpoint();
        let value = f(mid);
        if value > 0.0 {
            bracket.lo = mid;
        } else if value < 0.0 {
            bracket.hi = mid;
        } else {
            return Ok(RootBracket { lo: mid, hi: mid });
        }
    }
    Ok(bracket)
}

/// Root of a decreasing pressure curve on `bracket`, to absolute tolerance `tol`.
pub fn pressure_root<F>(f: F, bracket: (f64, f64), tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    bisect_decreasing(f, bracket.0, bracket.1, tol).map(|b| b.midpoint())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moran_curve() {
        let s = pressure_root(|s| (3.0 * 2f64.powf(-s)).ln(), (0.0, 4.0), 1e-10).unwrap();
        assert!((s - 3f64.ln() / 2f64.ln()).abs() < 1e-10);
    }

    #[test]
    fn four_maps_quarter() {
        let s = pressure_root(|s| (4.0 * 4f64.powf(-s)).ln(), (0.0, 4.0), 1e-10).unwrap();
        assert!((s - 1.0).abs() < 1e-10);
    }

    #[test]
    fn no_sign_change() {
        let err = pressure_root(|s| 1.0 - s, (5.0, 6.0), 1e-10).unwrap_err();
        assert!(matches!(err, Error::RootNotBracketed { .. }));
        assert!(err.to_string().starts_with("root not bracketed"));
    }

    #[test]
    fn step_budget_respected() {
        let mut calls = 0;
        let _ = bisect_decreasing(
            |s| {
                calls += 1;
                0.3 - s
            },
            0.0,
            1.0,
            0.0,
        )
        .unwrap();
        assert!(calls <= MAX_BISECTION_STEPS + 2);
    }
}
