use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::linalg::{singular_values, SingularValueProfile};
use crate::thermo::root::{bisect_decreasing, RootBracket};

/// Default cap on the number of matrix products formed by one evaluation.
pub const DEFAULT_PRODUCT_BUDGET: u128 = 10_000_000;

/// `φ^s(A)` for a non-singular square matrix.
pub fn singular_value_function(m: &DMatrix<f64>, s: f64) -> Result<f64> {
    if !(s >= 0.0) {
        return invalid("s must be nonnegative");
    }
    Ok(SingularValueProfile::of(m)?.singular_value_function(s))
}

fn log_svf_from_logs(logs: &[f64], s: f64) -> f64 {
    let d = logs.len();
    if s >= d as f64 {
        return logs.iter().sum::<f64>() * s / d as f64;
    }
    let whole = s.floor() as usize;
    let frac = s - whole as f64;
    let mut acc: f64 = logs[..whole].iter().sum();
    if frac > 0.0 {
        acc += frac * logs[whole];
    }
    acc
}

fn log_singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    singular_values(m)
        .expect("square matrix")
        .into_iter()
        .map(|v| v.ln())
        .collect()
}

pub(crate) fn validate_matrices(matrices: &[DMatrix<f64>]) -> Result<usize> {
    let Some(first) = matrices.first() else {
        return invalid("need at least one matrix");
    };
    let d = first.nrows();
    for (i, m) in matrices.iter().enumerate() {
        if !m.is_square() || m.nrows() != d {
            return invalid(format!("matrix {} is not {d}×{d}", i + 1));
        }
        let profile = SingularValueProfile::of(m)?;
        if profile.values()[0] >= 1.0 {
            return invalid(format!("matrix {} is not contracting (norm {})", i + 1, profile.values()[0]));
        }
    }
    Ok(d)
}

/// Number of products needed for all levels `1..=n` over `m` symbols.
pub(crate) fn products_needed(m: usize, n: usize) -> u128 {
    (1..=n).map(|k| (m as u128).saturating_pow(k as u32)).fold(0u128, |a, b| a.saturating_add(b))
}

pub(crate) fn check_budget(m: usize, n: usize, budget: u128) -> Result<()> {
    let requested = products_needed(m, n);
    if requested > budget {
        let suggested_n = (1..n).rev().find(|&k| products_needed(m, k) <= budget).unwrap_or(1);
        return Err(Error::BudgetExceeded {
            requested,
            budget,
            suggested_n,
        });
    }
    Ok(())
}

/// Finite-level subadditive pressure of `log φ^s(A_ω)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SubadditiveEstimate {
    /// `min_k≤n` of the level estimates: an upper bound for the pressure.
    pub upper: f64,
    /// `(1/n) · log Σ_{|ω| = n} φ^s(A_ω)`.
    pub estimate: f64,
    /// Estimates at levels `1..=n`.
    pub levels: Vec<f64>,
}

fn accumulate(matrices: &[DMatrix<f64>], prefix: &DMatrix<f64>, depth: usize, n: usize, s: f64, sums: &mut [f64]) {
    sums[depth - 1] += log_svf_from_logs(&log_singular_values(prefix), s).exp();
    if depth == n {
        return;
    }
    for a in matrices {
        accumulate(matrices, &(prefix * a), depth + 1, n, s, sums);
    }
}

/// Subadditive pressure at levels up to `n`, enumerating all products by
/// depth-first recursion that reuses partial products.
pub fn subadditive_pressure(matrices: &[DMatrix<f64>], s: f64, n: usize) -> Result<SubadditiveEstimate> {
    subadditive_pressure_with_budget(matrices, s, n, DEFAULT_PRODUCT_BUDGET)
}

pub fn subadditive_pressure_with_budget(
    matrices: &[DMatrix<f64>],
    s: f64,
    n: usize,
    budget: u128,
) -> Result<SubadditiveEstimate> {
    validate_matrices(matrices)?;
    if n == 0 {
        return invalid("level must be positive");
    }
    if !(s >= 0.0) {
        return invalid("s must be nonnegative");
    }
    check_budget(matrices.len(), n, budget)?;
    // Subtrees are summed independently and combined in prefix order, so the
    // result does not depend on the worker count.
    let partial: Vec<Vec<f64>> = matrices
        .par_iter()
        .map(|a| {
            let mut sums = vec![0.0; n];
            accumulate(matrices, a, 1, n, s, &mut sums);
            sums
        })
        .collect();
    let mut totals = vec![0.0; n];
    for sums in &partial {
        for (t, v) in totals.iter_mut().zip(sums) {
            *t += v;
        }
    }
    let levels: Vec<f64> = totals
        .iter()
        .enumerate()
        .map(|(k, t)| t.ln() / (k + 1) as f64)
        .collect();
    let upper = levels.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(SubadditiveEstimate {
        upper,
        estimate: *levels.last().unwrap(),
        levels,
    })
}

/// `log Σ_i |det A_i|^{s/d}`: a lower bound for the subadditive pressure,
/// exact for `s ≥ d`.
pub fn determinant_pressure(matrices: &[DMatrix<f64>], s: f64) -> Result<f64> {
    let d = validate_matrices(matrices)?;
    Ok(determinant_pressure_unchecked(matrices, d, s))
}

fn determinant_pressure_unchecked(matrices: &[DMatrix<f64>], d: usize, s: f64) -> f64 {
    matrices
        .iter()
        .map(|a| (a.determinant().abs().ln() * s / d as f64).exp())
        .sum::<f64>()
        .ln()
}

/// Options for [`affinity_dimension_with`].
#[derive(Debug, Clone)]
pub struct AffinityOptions {
    pub max_level: usize,
    /// Products kept in memory at the deepest level.
    pub product_budget: u128,
    /// Bisection bracket width and level-to-level stabilization threshold.
    pub tolerance: f64,
}

impl Default for AffinityOptions {
    fn default() -> Self {
        AffinityOptions {
            max_level: 16,
            product_budget: 2_000_000,
            tolerance: 1e-6,
        }
    }
}

/// Root of a pressure function with its bracket and convergence record.
#[derive(Debug, Clone, PartialEq)]
pub struct DimensionReport {
    /// Bisection bracket around the root of the upper-bound pressure at the
    /// deepest level used.
    pub bracket: RootBracket,
    /// Every `s` above this value has negative pressure.
    pub certified_upper: f64,
    /// Every `s` below this value has positive pressure.
    pub certified_lower: f64,
    /// Root of the upper-bound pressure at each level `1..=levels_used`.
    pub level_roots: Vec<f64>,
    pub levels_used: usize,
    /// Whether successive level roots agreed within the tolerance.
    pub converged: bool,
}

impl DimensionReport {
    pub fn value(&self) -> f64 {
        self.bracket.midpoint()
    }
}

/// Affinity dimension: zero of the subadditive pressure of `φ^s`.
pub fn affinity_dimension(matrices: &[DMatrix<f64>]) -> Result<DimensionReport> {
    affinity_dimension_with(matrices, &AffinityOptions::default())
}

pub fn affinity_dimension_with(matrices: &[DMatrix<f64>], options: &AffinityOptions) -> Result<DimensionReport> {
    let d = validate_matrices(matrices)?;
    let m = matrices.len();
    // Log singular values of every product, level by level.
    let mut level_logs: Vec<Vec<Vec<f64>>> = Vec::new();
    let mut frontier: Vec<DMatrix<f64>> = vec![DMatrix::identity(d, d)];
    let mut level_roots = Vec::new();
    let mut bracket = RootBracket { lo: 0.0, hi: 0.0 };
    let mut converged = false;

    for level in 1..=options.max_level.max(1) {
        let count = (m as u128).saturating_pow(level as u32);
        if level > 1 && count > options.product_budget {
            break;
        }
        frontier = frontier
            .par_iter()
            .flat_map_iter(|p| matrices.iter().map(move |a| p * a))
            .collect();
        level_logs.push(frontier.par_iter().map(log_singular_values).collect());

        let upper_pressure = |s: f64| {
            level_logs
                .iter()
                .enumerate()
                .map(|(k, logs)| {
                    let total: f64 = logs.iter().map(|l| log_svf_from_logs(l, s).exp()).sum();
                    total.ln() / (k + 1) as f64
                })
                .fold(f64::INFINITY, f64::min)
        };
        let mut hi = 2.0 * d as f64;
        while upper_pressure(hi) > 0.0 {
            hi *= 2.0;
            if hi > 64.0 * d as f64 {
                return Err(Error::RootNotBracketed {
                    lo: 0.0,
                    hi,
                    f_lo: upper_pressure(0.0),
                    f_hi: upper_pressure(hi),
                });
            }
        }
        bracket = bisect_decreasing(upper_pressure, 0.0, hi, options.tolerance.min(1e-10))?;
        let root = bracket.midpoint();
        if let Some(&previous) = level_roots.last() {
            let prev: f64 = previous;
            if (prev - root).abs() < options.tolerance {
                level_roots.push(root);
                converged = true;
                break;
            }
        }
        level_roots.push(root);
    }
    let det_root = bisect_decreasing(
        |s| determinant_pressure_unchecked(matrices, d, s),
        0.0,
        64.0 * d as f64,
        1e-10,
    )
    .map(|b| b.lo)
    .unwrap_or(0.0);
    Ok(DimensionReport {
        bracket,
        certified_upper: bracket.hi,
        certified_lower: det_root.min(bracket.lo),
        levels_used: level_roots.len(),
        level_roots,
        converged,
    })
}
