use nalgebra::DMatrix;

use crate::error::{invalid, Error, Result};

const JACOBI_SWEEPS: usize = 60;

/// Singular values `α₁ ≥ … ≥ α_d > 0` of a non-singular square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SingularValueProfile {
    values: Vec<f64>,
}

impl SingularValueProfile {
    /// Rejects matrices whose smallest singular value vanishes relative to the largest.
    pub fn of(m: &DMatrix<f64>) -> Result<Self> {
        let values = singular_values(m)?;
        let top = values[0];
        let bottom = *values.last().unwrap();
        if !(bottom > 0.0) || bottom <= top * 1e-14 {
            return Err(Error::RankDeficient);
        }
        Ok(SingularValueProfile { values })
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `φ^s`: product of the first ⌊s⌋ singular values times α_{⌈s⌉}^{s-⌊s⌋},
    /// and |det|^{s/d} beyond the dimension.
    pub fn singular_value_function(&self, s: f64) -> f64 {
        self.log_singular_value_function(s).exp()
    }

    pub fn log_singular_value_function(&self, s: f64) -> f64 {
        let d = self.values.len();
        let logs = self.values.iter().map(|v| v.ln());
        if s >= d as f64 {
            let log_det: f64 = logs.sum();
            return log_det * s / d as f64;
        }
        let whole = s.floor() as usize;
        let frac = s - whole as f64;
        let mut acc: f64 = self.values[..whole].iter().map(|v| v.ln()).sum();
        if frac > 0.0 {
            acc += frac * self.values[whole].ln();
        }
        acc
    }
}

/// Singular values in descending order. Closed form for 1×1 and 2×2,
/// one-sided Jacobi rotations otherwise.
pub fn singular_values(m: &DMatrix<f64>) -> Result<Vec<f64>> {
    if !m.is_square() || m.nrows() == 0 {
        return invalid("singular values need a non-empty square matrix");
    }
    match m.nrows() {
        1 => Ok(vec![m[(0, 0)].abs()]),
        2 => Ok(two_by_two(m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]).to_vec()),
        _ => Ok(one_sided_jacobi(m)),
    }
}

pub(crate) fn two_by_two(a: f64, b: f64, c: f64, d: f64) -> [f64; 2] {
    let p = (a + d).hypot(b - c);
    let q = (a - d).hypot(b + c);
    let top = 0.5 * (p + q);
    if top == 0.0 {
        return [0.0, 0.0];
    }
    // |det| / α₁ keeps full relative accuracy in the small value.
    let bottom = (a * d - b * c).abs() / top;
    [top, bottom]
}

fn one_sided_jacobi(m: &DMatrix<f64>) -> Vec<f64> {
    let n = m.ncols();
    let mut u = m.clone();
    for _ in 0..JACOBI_SWEEPS {
        let mut rotated = false;
        for p in 0..n - 1 {
            for q in p + 1..n {
                let alpha: f64 = u.column(p).norm_squared();
                let beta: f64 = u.column(q).norm_squared();
                let gamma: f64 = u.column(p).dot(&u.column(q));
                if gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt() || gamma == 0.0 {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..n {
                    let up = u[(i, p)];
                    let uq = u[(i, q)];
                    u[(i, p)] = c * up - s * uq;
                    u[(i, q)] = s * up + c * uq;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut values: Vec<f64> = (0..n).map(|j| u.column(j).norm()).collect();
    values.sort_by(|a, b| b.total_cmp(a));
    values
}
