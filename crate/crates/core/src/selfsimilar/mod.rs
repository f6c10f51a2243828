//! Self-similar iterated function systems.

mod separation;

use nalgebra::{DMatrix, DVector};
use num_rational::Ratio;

use crate::error::{invalid, Error, Result};
use crate::points::{chaos_game, PointCloud};
use crate::thermo::bisect_decreasing;

pub use separation::{exact_overlap_search, separation_delta, SeparationLevel, SeparationReport, DELTA_BUDGET};

/// Tolerance on `OᵀO = I`.
const ORTHOGONALITY_TOL: f64 = 1e-12;

/// `x ↦ r·O·x + t` with `0 < r < 1` and `O` orthogonal.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarMap {
    ratio: f64,
    orthogonal: DMatrix<f64>,
    translation: DVector<f64>,
}

impl SimilarMap {
    pub fn new(ratio: f64, orthogonal: DMatrix<f64>, translation: DVector<f64>) -> Result<Self> {
        if !(ratio > 0.0 && ratio < 1.0) {
            return invalid(format!("contraction ratio {ratio} is not in (0,1)"));
        }
        let d = translation.len();
        if d == 0 || orthogonal.nrows() != d || orthogonal.ncols() != d {
            return invalid("orthogonal part and translation have mismatched dimensions");
        }
        if orthogonal.iter().chain(translation.iter()).any(|v| !v.is_finite()) {
            return invalid("map parameters must be finite");
        }
        let defect = (orthogonal.transpose() * &orthogonal - DMatrix::identity(d, d)).abs().max();
        if defect > ORTHOGONALITY_TOL {
            return invalid(format!("matrix is not orthogonal (defect {defect:e})"));
        }
        Ok(SimilarMap {
            ratio,
            orthogonal,
            translation,
        })
    }

    /// `x ↦ slope·x + t` on the line.
    pub fn line(slope: f64, translation: f64) -> Result<Self> {
        Self::new(
            slope.abs(),
            DMatrix::from_element(1, 1, slope.signum()),
            DVector::from_element(1, translation),
        )
    }

    /// Planar similarity: rotation by `angle`, preceded by the reflection
    /// `(x, y) ↦ (x, −y)` when `reflect` is set.
    pub fn planar(ratio: f64, angle: f64, reflect: bool, translation: [f64; 2]) -> Result<Self> {
        let (s, c) = angle.sin_cos();
        let mut o = DMatrix::from_row_slice(2, 2, &[c, -s, s, c]);
        if reflect {
            o.set_column(1, &(-o.column(1)));
        }
        Self::new(ratio, o, DVector::from_column_slice(&translation))
    }

    pub fn ratio(&self) -> f64 {
        self.ratio
    }

    pub fn orthogonal(&self) -> &DMatrix<f64> {
        &self.orthogonal
    }

    pub fn translation(&self) -> &DVector<f64> {
        &self.translation
    }

    pub fn dim(&self) -> usize {
        self.translation.len()
    }

    /// `r·O`.
    pub fn linear_part(&self) -> DMatrix<f64> {
        &self.orthogonal * self.ratio
    }

    pub fn apply(&self, x: &[f64], out: &mut [f64]) {
        let d = self.dim();
        for i in 0..d {
            let mut acc = self.translation[i];
            for j in 0..d {
                acc += self.ratio * self.orthogonal[(i, j)] * x[j];
            }
            out[i] = acc;
        }
    }

    pub fn fixed_point(&self) -> DVector<f64> {
        let d = self.dim();
        let system = DMatrix::identity(d, d) - self.linear_part();
        system.lu().solve(&self.translation).expect("I - rO is invertible for r < 1")
    }
}

/// Finite family of similarities on `ℝ^d`, optionally with exact rational
/// parameters on the line.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarIfs {
    maps: Vec<SimilarMap>,
    labels: Vec<String>,
    exact: Option<Vec<(Ratio<i128>, Ratio<i128>)>>,
}

impl SimilarIfs {
    /// A single map is accepted so that fixed-point computations fit the same type.
    pub fn new(maps: Vec<SimilarMap>) -> Result<Self> {
        let Some(first) = maps.first() else {
            return invalid("need at least one map");
        };
        let d = first.dim();
        if maps.iter().any(|m| m.dim() != d) {
            return invalid("maps act on spaces of different dimension");
        }
        let labels = (1..=maps.len()).map(|k| k.to_string()).collect();
        Ok(SimilarIfs {
            maps,
            labels,
            exact: None,
        })
    }

    /// Maps `x ↦ slope·x + t` on the line.
    pub fn line(params: &[(f64, f64)]) -> Result<Self> {
        Self::new(params.iter().map(|&(a, t)| SimilarMap::line(a, t)).collect::<Result<_>>()?)
    }

    /// Line maps with rational parameters; overlap tests then compare exactly.
    pub fn line_exact(params: &[(Ratio<i128>, Ratio<i128>)]) -> Result<Self> {
        let floats: Vec<(f64, f64)> = params.iter().map(|(a, t)| (ratio_to_f64(a), ratio_to_f64(t))).collect();
        let mut ifs = Self::line(&floats)?;
        ifs.exact = Some(params.to_vec());
        Ok(ifs)
    }

    /// Four maps of ratio 1/4 into the corners of the unit square.
    pub fn four_corner() -> Self {
        let corners = [[0.0, 0.0], [0.75, 0.0], [0.75, 0.75], [0.0, 0.75]];
        Self::new(
            corners
                .iter()
                .map(|&t| SimilarMap::planar(0.25, 0.0, false, t).unwrap())
                .collect(),
        )
        .unwrap()
    }

    /// Display names for the symbols, used when printing words.
    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.maps.len() {
            return Err(Error::AlphabetMismatch {
                measure: labels.len(),
                system: self.maps.len(),
            });
        }
        self.labels = labels;
        Ok(self)
    }

    pub fn maps(&self) -> &[SimilarMap] {
        &self.maps
    }

    pub fn len(&self) -> usize {
        self.maps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.maps.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.maps[0].dim()
    }

    pub fn ratios(&self) -> Vec<f64> {
        self.maps.iter().map(|m| m.ratio).collect()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn exact(&self) -> Option<&[(Ratio<i128>, Ratio<i128>)]> {
        self.exact.as_deref()
    }

    pub fn linear_parts(&self) -> Vec<DMatrix<f64>> {
        self.maps.iter().map(SimilarMap::linear_part).collect()
    }

    /// Formats a word as `(a,b,…)` using the symbol labels.
    pub fn format_word(&self, word: &[usize]) -> String {
        let parts: Vec<&str> = word.iter().map(|&i| self.labels[i].as_str()).collect();
        format!("({})", parts.join(","))
    }

    /// Radius of a ball about the origin mapped into itself by every map.
    pub fn bounding_radius(&self) -> f64 {
        let r_max = self.maps.iter().map(|m| m.ratio).fold(0.0, f64::max);
        let t_max = self.maps.iter().map(|m| m.translation.norm()).fold(0.0, f64::max);
        t_max / (1.0 - r_max)
    }

    pub fn similarity_dimension(&self) -> Result<f64> {
        similarity_dimension(&self.ratios())
    }

    /// Convex hull of the attractor of a system on the line.
    pub fn hull(&self) -> Result<(f64, f64)> {
        if self.dim() != 1 {
            return invalid("hull is only computed for systems on the line");
        }
        let fixed: Vec<f64> = self.maps.iter().map(|m| m.fixed_point()[0]).collect();
        let mut lo = fixed.iter().cloned().fold(f64::INFINITY, f64::min);
        let mut hi = fixed.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        // The hull is the smallest interval containing its own images.
        loop {
            let (mut new_lo, mut new_hi) = (lo, hi);
            for m in &self.maps {
                for x in [lo, hi] {
                    let mut y = [0.0];
                    m.apply(&[x], &mut y);
                    new_lo = new_lo.min(y[0]);
                    new_hi = new_hi.max(y[0]);
                }
            }
            if new_lo >= lo && new_hi <= hi {
                return Ok((lo, hi));
            }
            lo = new_lo;
            hi = new_hi;
        }
    }

    /// Whether the first-level images of the attractor hull are pairwise
    /// disjoint, which gives the strong separation property on the line.
    pub fn first_level_images_disjoint(&self) -> Result<bool> {
        let (lo, hi) = self.hull()?;
        let mut images: Vec<(f64, f64)> = self
            .maps
            .iter()
            .map(|m| {
                let (mut a, mut b) = ([0.0], [0.0]);
                m.apply(&[lo], &mut a);
                m.apply(&[hi], &mut b);
                (a[0].min(b[0]), a[0].max(b[0]))
            })
            .collect();
        images.sort_by(|x, y| x.0.total_cmp(&y.0));
        Ok(images.windows(2).all(|w| w[0].1 < w[1].0))
    }
}

pub(crate) fn ratio_to_f64(r: &Ratio<i128>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Unique `s ≥ 0` with `Σ r_i^s = 1`, not clamped to the ambient dimension.
pub fn similarity_dimension(ratios: &[f64]) -> Result<f64> {
    if ratios.is_empty() {
        return invalid("need at least one ratio");
    }
    if ratios.iter().any(|&r| !(r > 0.0 && r < 1.0)) {
        return invalid("ratios must lie in (0,1)");
    }
    let m = ratios.len() as f64;
    let r_max = ratios.iter().cloned().fold(0.0, f64::max);
    // The root lies in [log m / -log r_min, log m / -log r_max].
    let hi = m.ln() / -r_max.ln() * (1.0 + 1e-9) + 1e-9;
    let bracket = bisect_decreasing(|s| ratios.iter().map(|r| r.powf(s)).sum::<f64>().ln(), 0.0, hi, 1e-12)?;
    Ok(bracket.midpoint())
}

/// `S_{ω₁} ∘ ⋯ ∘ S_{ωₙ}(base)`.
pub fn natural_projection(ifs: &SimilarIfs, word: &[usize], base: &[f64]) -> Result<Vec<f64>> {
    if word.is_empty() {
        return invalid("word must be non-empty");
    }
    if base.len() != ifs.dim() {
        return invalid("base point has the wrong dimension");
    }
    if let Some(&bad) = word.iter().find(|&&i| i >= ifs.len()) {
        return invalid(format!("symbol {} out of range 1..={}", bad + 1, ifs.len()));
    }
    let mut x = base.to_vec();
    let mut y = vec![0.0; x.len()];
    for &i in word.iter().rev() {
        ifs.maps[i].apply(&x, &mut y);
        std::mem::swap(&mut x, &mut y);
    }
    Ok(x)
}

/// Chaos-game sample of the attractor with uniformly chosen maps.
pub fn attractor_points(ifs: &SimilarIfs, count: usize, seed: u64) -> Result<PointCloud> {
    attractor_points_weighted(ifs, &vec![1.0; ifs.len()], count, seed)
}

/// Chaos-game sample with map `i` chosen with probability `p_i`; the
/// empirical distribution approximates the self-similar measure of `p`.
pub fn attractor_points_weighted(ifs: &SimilarIfs, p: &[f64], count: usize, seed: u64) -> Result<PointCloud> {
    if count == 0 {
        return invalid("point count must be positive");
    }
    check_probability(p, ifs.len())?;
    let start = vec![0.0; ifs.dim()];
    Ok(chaos_game(&start, count, seed, p, |i, x, out| ifs.maps[i].apply(x, out)))
}

fn check_probability(p: &[f64], m: usize) -> Result<()> {
    if p.len() != m {
        return Err(Error::AlphabetMismatch {
            measure: p.len(),
            system: m,
        });
    }
    if p.iter().any(|&q| !(q >= 0.0) || !q.is_finite()) || p.iter().sum::<f64>() <= 0.0 {
        return invalid("weights must be nonnegative with positive sum");
    }
    Ok(())
}

/// `(Σ p_i log p_i) / (Σ p_i log r_i)`, the dimension of the self-similar
/// measure under the open set condition.
pub fn simdim_measure(ratios: &[f64], p: &[f64]) -> Result<f64> {
    check_probability(p, ratios.len())?;
    if ((p.iter().sum::<f64>()) - 1.0).abs() > 1e-12 {
        return invalid("probabilities must sum to 1");
    }
    if ratios.iter().any(|&r| !(r > 0.0 && r < 1.0)) {
        return invalid("ratios must lie in (0,1)");
    }
    let entropy: f64 = p.iter().map(|&q| crate::symbolic::xlogx(q)).sum();
    let lyapunov: f64 = p.iter().zip(ratios).map(|(&q, &r)| q * r.ln()).sum();
    Ok((entropy / lyapunov).max(0.0))
}
