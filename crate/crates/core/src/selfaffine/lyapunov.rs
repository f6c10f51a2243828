use std::fmt::Write as _;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::linalg::is_diagonal;
use crate::symbolic::ErgodicMeasure;

/// Steps between re-orthonormalizations of the running product.
pub const REORTHONORMALIZE_EVERY: usize = 20;

/// Lyapunov exponents `χ₁ ≥ … ≥ χ_d` of a matrix cocycle, in nats per step.
#[derive(Debug, Clone, PartialEq)]
pub struct LyapunovSpectrum {
    pub exponents: Vec<f64>,
    /// Standard error of each trial mean; zero for closed forms, NaN for one trial.
    pub stderr: Vec<f64>,
    /// Entropy of the driving measure.
    pub entropy: f64,
    pub closed_form: bool,
}

impl LyapunovSpectrum {
    pub fn sum(&self) -> f64 {
        self.exponents.iter().sum()
    }

    /// CSV `k,chi,stderr` with 1-based `k`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,chi,stderr\n");
        for (k, (chi, se)) in self.exponents.iter().zip(&self.stderr).enumerate() {
            writeln!(out, "{},{},{}", k + 1, chi, se).unwrap();
        }
        out
    }
}

fn sort_descending(v: &mut [f64]) {
    v.sort_by(|a, b| b.total_cmp(a));
}

/// Exponents of the constant cocycle `Aⁿ`: logs of eigenvalue moduli.
pub fn matrix_exponents(a: &DMatrix<f64>) -> Result<Vec<f64>> {
    if !a.is_square() || a.nrows() == 0 {
        return invalid("matrix must be square");
    }
    let mut logs: Vec<f64> = a.complex_eigenvalues().iter().map(|z| z.norm().ln()).collect();
    if logs.iter().any(|l| !l.is_finite()) {
        return Err(Error::RankDeficient);
    }
    sort_descending(&mut logs);
    Ok(logs)
}

fn validate(matrices: &[DMatrix<f64>], measure: &ErgodicMeasure) -> Result<usize> {
    if matrices.len() != measure.alphabet_size() {
        return Err(Error::AlphabetMismatch {
            measure: measure.alphabet_size(),
            system: matrices.len(),
        });
    }
    let d = matrices[0].nrows();
    for (i, a) in matrices.iter().enumerate() {
        if !a.is_square() || a.nrows() != d {
            return invalid(format!("matrix {} is not {d}×{d}", i + 1));
        }
        if a.determinant() == 0.0 {
            return invalid(format!("matrix {} is singular", i + 1));
        }
    }
    Ok(d)
}

/// Exponents of `A_{ω₁} ⋯ A_{ωₙ}` for `ω` drawn from `measure`.
///
/// Diagonal families and measures carried by one symbol use closed forms.
/// Otherwise each trial samples a word of length `n` with ChaCha8 stream
/// `trial` of `seed` and tracks the product by QR re-orthonormalization.
pub fn lyapunov_exponents(
    matrices: &[DMatrix<f64>],
    measure: &ErgodicMeasure,
    n: usize,
    trials: usize,
    seed: u64,
) -> Result<LyapunovSpectrum> {
    let d = validate(matrices, measure)?;
    if n == 0 || trials == 0 {
        return invalid("steps and trials must be positive");
    }
    let p = measure.marginal();
    let entropy = measure.entropy();
    let closed = |exponents: Vec<f64>| LyapunovSpectrum {
        stderr: vec![0.0; exponents.len()],
        exponents,
        entropy,
        closed_form: true,
    };
    if matrices.iter().all(is_diagonal) {
        let mut exponents: Vec<f64> = (0..d)
            .map(|k| {
                p.iter()
                    .zip(matrices)
                    .filter(|(&q, _)| q > 0.0)
                    .map(|(&q, a)| q * a[(k, k)].abs().ln())
                    .sum()
            })
            .collect();
        sort_descending(&mut exponents);
        return Ok(closed(exponents));
    }
    if let Some(only) = p.iter().position(|&q| q == 1.0) {
        return Ok(closed(matrix_exponents(&matrices[only])?));
    }

    let transposed: Vec<DMatrix<f64>> = matrices.iter().map(|a| a.transpose()).collect();
    let samples: Vec<Vec<f64>> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(trial as u64);
            let word = measure.sample_word(&mut rng, n);
            // Singular values of A_{ω₁}⋯A_{ωₙ} equal those of its transpose,
            // which grows by left multiplication: Q ← A_{ωₖ}ᵀ·Q.
            let mut q = DMatrix::<f64>::identity(d, d);
            let mut acc = vec![0.0; d];
            for chunk in word.chunks(REORTHONORMALIZE_EVERY) {
                for &i in chunk {
                    q = &transposed[i] * q;
                }
                let qr = q.qr();
                let r = qr.r();
                for (k, a) in acc.iter_mut().enumerate() {
                    *a += r[(k, k)].abs().ln();
                }
                q = qr.q();
            }
            let mut exps: Vec<f64> = acc.iter().map(|a| a / n as f64).collect();
            sort_descending(&mut exps);
            exps
        })
        .collect();

    let t = trials as f64;
    let mut exponents = vec![0.0; d];
    let mut stderr = vec![f64::NAN; d];
    for k in 0..d {
        let mean = samples.iter().map(|s| s[k]).sum::<f64>() / t;
        exponents[k] = mean;
        if trials > 1 {
            let var = samples.iter().map(|s| (s[k] - mean).powi(2)).sum::<f64>() / (t - 1.0);
            stderr[k] = (var / t).sqrt();
        }
    }
    Ok(LyapunovSpectrum {
        exponents,
        stderr,
        entropy,
        closed_form: false,
    })
}

/// Lyapunov dimension with its index `k` and the value clamped to `d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LyapunovDimension {
    pub value: f64,
    pub clamped: f64,
    /// Largest `i` with `h + χ₁ + … + χ_i > 0`.
    pub k: usize,
}

/// `D = k + (h + χ₁ + … + χ_k)/(−χ_{k+1})`, or `d·h/(−Σχ)` once the entropy
/// exceeds the total contraction. Exponents are negative and sorted
/// descending.
pub fn lyapunov_dimension(h: f64, exponents: &[f64]) -> Result<LyapunovDimension> {
    if !(h >= 0.0) || !h.is_finite() {
        return invalid("entropy must be finite and nonnegative");
    }
    if exponents.is_empty() {
        return invalid("need at least one exponent");
    }
    if exponents.iter().any(|&c| !(c < 0.0) || !c.is_finite()) {
        return invalid("exponents must be finite and negative");
    }
    if exponents.windows(2).any(|w| w[0] < w[1]) {
        return invalid("exponents must be sorted in descending order");
    }
    let d = exponents.len();
    let mut running = h;
    let mut k = 0;
    for (i, &c) in exponents.iter().enumerate() {
        running += c;
        if running > 0.0 {
            k = i + 1;
        }
    }
    let value = if k == d {
        d as f64 * h / -exponents.iter().sum::<f64>()
    } else {
        k as f64 + (h + exponents[..k].iter().sum::<f64>()) / -exponents[k]
    };
    Ok(LyapunovDimension {
        value,
        clamped: value.min(d as f64),
        k,
    })
}

/// Same formula for positive expansion rates `0 < χ` of a repeller.
pub fn lyapunov_dimension_expanding(h: f64, rates: &[f64]) -> Result<LyapunovDimension> {
    if rates.iter().any(|&r| !(r > 0.0)) {
        return invalid("expansion rates must be positive");
    }
    let mut contraction: Vec<f64> = rates.iter().map(|r| -r).collect();
    sort_descending(&mut contraction);
    lyapunov_dimension(h, &contraction)
}
