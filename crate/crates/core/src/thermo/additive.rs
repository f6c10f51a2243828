use nalgebra::DMatrix;

use crate::error::{invalid, Result};
use crate::linalg::{perron_pair, spectral_radius};
use crate::symbolic::{markov_from_perron, ErgodicMeasure, Subshift};

/// Locally constant potential: `φ(i)` depends only on the first symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct Potential {
    values: Vec<f64>,
}

impl Potential {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
            return invalid("potential values must be finite and non-empty");
        }
        Ok(Potential { values })
    }

    pub fn zero(m: usize) -> Self {
        Potential { values: vec![0.0; m] }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Birkhoff sum `S_n φ` over a word.
    pub fn birkhoff_sum(&self, word: &[usize]) -> f64 {
        word.iter().map(|&i| self.values[i]).sum()
    }

    fn check(&self, sft: &Subshift) -> Result<()> {
        if self.values.len() != sft.size() {
            return invalid(format!(
                "potential has {} values but the subshift has {} symbols",
                self.values.len(),
                sft.size()
            ));
        }
        Ok(())
    }
}

/// `B_ij = A_ij · e^{φ(j)}`.
pub fn weighted_transition(sft: &Subshift, phi: &Potential) -> DMatrix<f64> {
    let m = sft.size();
    DMatrix::from_fn(m, m, |i, j| if sft.allows(i, j) { phi.values[j].exp() } else { 0.0 })
}

/// `(1/n) · log Σ_{|ω| = n} exp(S_n φ(ω))` over admissible words, computed by
/// a transfer recursion with running renormalization.
pub fn additive_pressure(sft: &Subshift, phi: &Potential, n: usize) -> Result<f64> {
    sft.require_primitive()?;
    phi.check(sft)?;
    if n == 0 {
        return invalid("word length must be positive");
    }
    let m = sft.size();
    let shift = phi.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut log_scale = 0.0;
    let mut w: Vec<f64> = phi.values.iter().map(|v| (v - shift).exp()).collect();
    log_scale += shift;
    for _ in 1..n {
        let mut next = vec![0.0; m];
        for i in 0..m {
            for j in 0..m {
                if sft.allows(i, j) {
                    next[j] += w[i] * (phi.values[j] - shift).exp();
                }
            }
        }
        let norm: f64 = next.iter().sum();
        w = next.into_iter().map(|v| v / norm).collect();
        log_scale += shift + norm.ln();
    }
    Ok((log_scale + w.iter().sum::<f64>().ln()) / n as f64)
}

/// The limit pressure `log ρ(B)`.
pub fn spectral_pressure(sft: &Subshift, phi: &Potential) -> Result<f64> {
    sft.require_primitive()?;
    phi.check(sft)?;
    Ok(spectral_radius(&weighted_transition(sft, phi))?.ln())
}

/// Gibbs measure of a locally constant potential with the constants of the
/// two-sided cylinder comparison, measured on all cylinders up to `levels`.
#[derive(Debug, Clone)]
pub struct GibbsMeasure {
    pub measure: ErgodicMeasure,
    pub pressure: f64,
    /// `min μ[ω] / exp(−ℓP + S_ℓφ(ω))` over the checked cylinders.
    pub c1: f64,
    /// Matching maximum.
    pub c2: f64,
    pub levels: usize,
}

pub const GIBBS_CHECK_LEVELS: usize = 6;

pub fn gibbs_markov_measure(sft: &Subshift, phi: &Potential) -> Result<GibbsMeasure> {
    gibbs_markov_measure_checked(sft, phi, GIBBS_CHECK_LEVELS)
}

pub fn gibbs_markov_measure_checked(sft: &Subshift, phi: &Potential, levels: usize) -> Result<GibbsMeasure> {
    sft.require_primitive()?;
    phi.check(sft)?;
    let b = weighted_transition(sft, phi);
    let perron = perron_pair(&b)?;
    let measure = markov_from_perron(sft, &b, perron.value, perron.left.as_slice(), perron.right.as_slice())?;
    let pressure = perron.value.ln();
    let (mut c1, mut c2) = (f64::INFINITY, 0.0_f64);
    for level in 1..=levels {
        for word in sft.words(level) {
            let log_ratio = measure.log_cylinder_measure(&word) - (-(level as f64) * pressure + phi.birkhoff_sum(&word));
            let ratio = log_ratio.exp();
            c1 = c1.min(ratio);
            c2 = c2.max(ratio);
        }
    }
    Ok(GibbsMeasure {
        measure,
        pressure,
        c1,
        c2,
        levels,
    })
}
