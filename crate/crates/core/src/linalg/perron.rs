use nalgebra::{DMatrix, DVector};
use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;

use crate::error::{invalid, Error, Result};

const TOLERANCE: f64 = 1e-14;
const MAX_ITERATIONS: usize = 100_000;
/// Iterations without improvement of the Collatz-Wielandt gap before giving up
/// on the tolerance (rounding floor reached).
const STALL_LIMIT: usize = 200;

/// Perron eigenvalue of an irreducible nonnegative matrix with positive
/// left and right eigenvectors.
#[derive(Debug, Clone)]
pub struct PerronData {
    pub value: f64,
    /// Collatz-Wielandt bounds bracketing `value`.
    pub lower: f64,
    pub upper: f64,
    /// Right eigenvector, normalized to unit sum.
    pub right: DVector<f64>,
    /// Left eigenvector, normalized to unit sum.
    pub left: DVector<f64>,
}

struct PowerResult {
    value: f64,
    lower: f64,
    upper: f64,
    vector: DVector<f64>,
}

fn check_nonnegative(m: &DMatrix<f64>) -> Result<()> {
    if !m.is_square() || m.nrows() == 0 {
        return invalid("Perron data needs a non-empty square matrix");
    }
    if m.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return invalid("matrix must be finite and entrywise nonnegative");
    }
    Ok(())
}

/// Power iteration on `m + cI` with Collatz-Wielandt stopping. `m` must be
/// irreducible so the iterate stays strictly positive.
fn power_iterate(m: &DMatrix<f64>) -> PowerResult {
    let n = m.nrows();
    if n == 1 {
        return PowerResult {
            value: m[(0, 0)],
            lower: m[(0, 0)],
            upper: m[(0, 0)],
            vector: DVector::from_element(1, 1.0),
        };
    }
    let row_sums: Vec<f64> = (0..n).map(|i| m.row(i).sum()).collect();
    let min_row = row_sums.iter().cloned().fold(f64::INFINITY, f64::min);
    let max_row = row_sums.iter().cloned().fold(0.0, f64::max);
    // Rank-one and constant-row-sum matrices are common (full shifts).
    if max_row - min_row <= TOLERANCE * max_row {
        return PowerResult {
            value: max_row,
            lower: min_row,
            upper: max_row,
            vector: DVector::from_element(n, 1.0 / n as f64),
        };
    }
    // The shift breaks periodicity; ρ(m) ≥ min row sum keeps it comparable to ρ.
    let shift = 0.5 * min_row.max(f64::MIN_POSITIVE);
    let mut x = DVector::from_element(n, 1.0 / n as f64);
    let mut best_gap = f64::INFINITY;
    let mut stalled = 0;
    let (mut lower, mut upper) = (min_row, max_row);
    for _ in 0..MAX_ITERATIONS {
        let mut y = m * &x;
        y.axpy(shift, &x, 1.0);
        let (mut lo, mut hi) = (f64::INFINITY, 0.0_f64);
        for i in 0..n {
            let q = y[i] / x[i];
            lo = lo.min(q);
            hi = hi.max(q);
        }
        lower = lower.max(lo - shift);
        upper = upper.min(hi - shift);
        let sum = y.sum();
        x = y / sum;
        let gap = upper - lower;
        if gap <= TOLERANCE * upper.abs() {
            break;
        }
        if gap < best_gap * (1.0 - 1e-3) {
            best_gap = gap;
            stalled = 0;
        } else {
            stalled += 1;
            if stalled > STALL_LIMIT {
                break;
            }
        }
    }
    PowerResult {
        value: 0.5 * (lower + upper),
        lower,
        upper,
        vector: x,
    }
}

fn components(m: &DMatrix<f64>) -> Vec<Vec<usize>> {
    let n = m.nrows();
    let mut graph = DiGraph::<(), ()>::with_capacity(n, n);
    let nodes: Vec<_> = (0..n).map(|_| graph.add_node(())).collect();
    for i in 0..n {
        for j in 0..n {
            if m[(i, j)] > 0.0 {
                graph.add_edge(nodes[i], nodes[j], ());
            }
        }
    }
    tarjan_scc(&graph)
        .into_iter()
        .map(|c| {
            let mut idx: Vec<usize> = c.into_iter().map(|v| v.index()).collect();
            idx.sort_unstable();
            idx
        })
        .collect()
}

/// Perron eigenvalue and eigenvectors of an irreducible nonnegative matrix.
pub fn perron_pair(m: &DMatrix<f64>) -> Result<PerronData> {
    check_nonnegative(m)?;
    let comps = components(m);
    if comps.len() != 1 || (m.nrows() == 1 && m[(0, 0)] == 0.0) {
        return Err(Error::NotPrimitive);
    }
    let right = power_iterate(m);
    let left = power_iterate(&m.transpose());
    Ok(PerronData {
        value: right.value,
        lower: right.lower,
        upper: right.upper,
        right: right.vector,
        left: left.vector,
    })
}

/// Spectral radius of a nonnegative matrix; reducible matrices are split into
/// strongly connected blocks. Returns 0 for nilpotent patterns.
pub fn spectral_radius(m: &DMatrix<f64>) -> Result<f64> {
    check_nonnegative(m)?;
    let mut rho = 0.0_f64;
    for comp in components(m) {
        let k = comp.len();
        if k == 1 && m[(comp[0], comp[0])] == 0.0 {
            continue;
        }
        let block = DMatrix::from_fn(k, k, |i, j| m[(comp[i], comp[j])]);
        rho = rho.max(power_iterate(&block).value);
    }
    Ok(rho)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn golden_mean_radius() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 0.0]);
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        let p = perron_pair(&m).unwrap();
        assert_relative_eq!(p.value, phi, max_relative = 1e-13);
        assert!(p.lower <= phi + 1e-15 && phi <= p.upper + 1e-15);
        assert_relative_eq!(p.right[0] / p.right[1], phi, max_relative = 1e-12);
    }

    #[test]
    fn periodic_matrix_converges() {
        // Period 2: [[0, 2], [3, 0]] has eigenvalues ±√6.
        let m = DMatrix::from_row_slice(2, 2, &[0.0, 2.0, 3.0, 0.0]);
        assert_relative_eq!(spectral_radius(&m).unwrap(), 6f64.sqrt(), max_relative = 1e-12);
    }

    #[test]
    fn reducible_takes_largest_block() {
        let m = DMatrix::from_row_slice(3, 3, &[2.0, 1.0, 0.0, 0.0, 3.0, 0.0, 0.0, 5.0, 0.5]);
        assert_relative_eq!(spectral_radius(&m).unwrap(), 3.0, max_relative = 1e-12);
        assert!(perron_pair(&m).is_err());
    }

    #[test]
    fn nilpotent_is_zero() {
        let m = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        assert_eq!(spectral_radius(&m).unwrap(), 0.0);
    }

    #[test]
    fn agrees_with_dense_eigenvalues() {
        let m = DMatrix::from_row_slice(
            4,
            4,
            &[0.2, 1.0, 0.0, 0.3, 0.0, 0.1, 2.0, 0.0, 0.5, 0.0, 0.0, 1.5, 1.0, 0.7, 0.0, 0.0],
        );
        let dense = m
            .complex_eigenvalues()
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        assert_relative_eq!(spectral_radius(&m).unwrap(), dense, max_relative = 1e-10);
    }
}
