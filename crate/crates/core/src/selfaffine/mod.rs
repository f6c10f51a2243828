//! Self-affine iterated function systems and Lyapunov exponents of their
//! linear parts.

mod lyapunov;

use nalgebra::{DMatrix, DVector};

use crate::error::{invalid, Error, Result};
use crate::linalg::SingularValueProfile;
use crate::points::{chaos_game, PointCloud};
use crate::thermo::{affinity_dimension_with, AffinityOptions, DimensionReport};

pub use lyapunov::{
    lyapunov_dimension, lyapunov_dimension_expanding, lyapunov_exponents, matrix_exponents, LyapunovDimension,
    LyapunovSpectrum, REORTHONORMALIZE_EVERY,
};

/// `x ↦ A·x + t` with `A` non-singular and `‖A‖ < 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineMap {
    linear: DMatrix<f64>,
    translation: DVector<f64>,
}

impl AffineMap {
    pub fn new(linear: DMatrix<f64>, translation: DVector<f64>) -> Result<Self> {
        let d = translation.len();
        if d == 0 || linear.nrows() != d || linear.ncols() != d {
            return invalid("linear part and translation have mismatched dimensions");
        }
        if linear.iter().chain(translation.iter()).any(|v| !v.is_finite()) {
            return invalid("map parameters must be finite");
        }
        let norm = SingularValueProfile::of(&linear)?.values()[0];
        if norm >= 1.0 {
            return invalid(format!("linear part has norm {norm} >= 1"));
        }
        Ok(AffineMap { linear, translation })
    }

    pub fn linear(&self) -> &DMatrix<f64> {
        &self.linear
    }

    pub fn translation(&self) -> &DVector<f64> {
        &self.translation
    }

    pub fn dim(&self) -> usize {
        self.translation.len()
    }

    pub fn apply(&self, x: &[f64], out: &mut [f64]) {
        let d = self.dim();
        for i in 0..d {
            let mut acc = self.translation[i];
            for j in 0..d {
                acc += self.linear[(i, j)] * x[j];
            }
            out[i] = acc;
        }
    }
}

/// Finite family of contracting affine maps on `ℝ^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineIfs {
    maps: Vec<AffineMap>,
}

impl AffineIfs {
    pub fn new(maps: Vec<AffineMap>) -> Result<Self> {
        let Some(first) = maps.first() else {
            return invalid("need at least one map");
        };
        let d = first.dim();
        if maps.iter().any(|m| m.dim() != d) {
            return invalid("maps act on spaces of different dimension");
        }
        Ok(AffineIfs { maps })
    }

    /// Builds maps from row-major linear parts and translations.
    pub fn from_parts(parts: &[(DMatrix<f64>, Vec<f64>)]) -> Result<Self> {
        Self::new(
            parts
                .iter()
                .map(|(a, t)| AffineMap::new(a.clone(), DVector::from_column_slice(t)))
                .collect::<Result<_>>()?,
        )
    }

    pub fn maps(&self) -> &[AffineMap] {
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

    pub fn linear_parts(&self) -> Vec<DMatrix<f64>> {
        self.maps.iter().map(|m| m.linear.clone()).collect()
    }

    pub fn affinity_dimension(&self, options: &AffinityOptions) -> Result<DimensionReport> {
        affinity_dimension_with(&self.linear_parts(), options)
    }

    /// Chaos-game sample with map `i` chosen with weight `p_i`.
    pub fn attractor_points(&self, p: &[f64], count: usize, seed: u64) -> Result<PointCloud> {
        if p.len() != self.len() {
            return Err(Error::AlphabetMismatch {
                measure: p.len(),
                system: self.len(),
            });
        }
        if count == 0 || p.iter().any(|&q| !(q >= 0.0)) || p.iter().sum::<f64>() <= 0.0 {
            return invalid("need a positive count and nonnegative weights with positive sum");
        }
        let start = vec![0.0; self.dim()];
        Ok(chaos_game(&start, count, seed, p, |i, x, out| self.maps[i].apply(x, out)))
    }
}

/// A line through the origin preserved by every product of a given length.
#[derive(Debug, Clone, PartialEq)]
pub struct InvariantLine {
    pub depth: usize,
    pub direction: [f64; 2],
}

/// Applicability of the planar dimension theorems for self-affine sets.
#[derive(Debug, Clone, PartialEq)]
pub struct BhrReport {
    /// All linear parts are lower triangular `[[a, 0], [b, c]]` with `a < c`.
    pub lower_triangular_hypotheses: bool,
    /// Common invariant line of all products of length 1 or 2, if any.
    pub invariant_line: Option<InvariantLine>,
    /// A product of length ≤ 2 whose determinant-normalized version has
    /// eigenvalues of different moduli, which rules out a compact group.
    pub non_compact_witness: Option<Vec<usize>>,
}

impl BhrReport {
    /// Plain-text summary; absence of a witness is not a proof.
    pub fn summary(&self) -> String {
        let irreducibility = match &self.invariant_line {
            Some(line) => format!(
                "obstruction found: line ({:.6}, {:.6}) invariant under all products of length {}",
                line.direction[0], line.direction[1], line.depth
            ),
            None => "no obstruction found".into(),
        };
        let compactness = match &self.non_compact_witness {
            Some(w) => format!(
                "non-compact (witness {})",
                w.iter().map(|i| (i + 1).to_string()).collect::<Vec<_>>().join("")
            ),
            None => "no witness found".into(),
        };
        format!(
            "lower triangular with a_i < c_i: {}\ntotal irreducibility: {irreducibility}\nnon-compactness: {compactness}\nstrong open set condition: not checked\n",
            if self.lower_triangular_hypotheses { "yes" } else { "no" }
        )
    }
}

const LINE_TOL: f64 = 1e-10;

fn products(matrices: &[DMatrix<f64>], depth: usize) -> Vec<(Vec<usize>, DMatrix<f64>)> {
    let mut level: Vec<(Vec<usize>, DMatrix<f64>)> = vec![(vec![], DMatrix::identity(2, 2))];
    for _ in 0..depth {
        level = level
            .iter()
            .flat_map(|(w, p)| {
                matrices.iter().enumerate().map(move |(i, a)| {
                    let mut word = w.clone();
                    word.push(i);
                    (word, p * a)
                })
            })
            .collect();
    }
    level
}

/// Real eigenvector directions of a 2×2 matrix; `None` for scalar matrices.
fn eigen_directions(a: &DMatrix<f64>) -> Option<Vec<[f64; 2]>> {
    let (p, q, r, s) = (a[(0, 0)], a[(0, 1)], a[(1, 0)], a[(1, 1)]);
    let scale = a.abs().max();
    if q.abs() <= LINE_TOL * scale && r.abs() <= LINE_TOL * scale && (p - s).abs() <= LINE_TOL * scale {
        return None;
    }
    let tr = p + s;
    let disc = tr * tr - 4.0 * (p * s - q * r);
    if disc < -LINE_TOL * scale * scale {
        return Some(vec![]);
    }
    let root = disc.max(0.0).sqrt();
    let mut dirs = Vec::new();
    for mu in [(tr + root) / 2.0, (tr - root) / 2.0] {
        // Null vector of A − μI from whichever row is larger.
        let (r1, r2) = ([p - mu, q], [r, s - mu]);
        let row = if r1[0].hypot(r1[1]) >= r2[0].hypot(r2[1]) { r1 } else { r2 };
        let v = [-row[1], row[0]];
        let n = v[0].hypot(v[1]);
        if n > 0.0 {
            dirs.push([v[0] / n, v[1] / n]);
        } else {
            dirs.push([1.0, 0.0]);
        }
    }
    Some(dirs)
}

fn preserves(a: &DMatrix<f64>, v: [f64; 2]) -> bool {
    let w = [a[(0, 0)] * v[0] + a[(0, 1)] * v[1], a[(1, 0)] * v[0] + a[(1, 1)] * v[1]];
    (w[0] * v[1] - w[1] * v[0]).abs() <= LINE_TOL * a.abs().max().max(f64::MIN_POSITIVE)
}

fn common_line(family: &[DMatrix<f64>]) -> Option<[f64; 2]> {
    let Some(candidates) = family.iter().find_map(eigen_directions) else {
        // Every member is scalar, so every line is preserved.
        return Some([1.0, 0.0]);
    };
    candidates.into_iter().find(|&v| family.iter().all(|a| preserves(a, v)))
}

/// Checks the hypotheses of the planar dimension theorems that can be
/// decided from the linear parts. The open set condition is not examined.
pub fn bhr_conditions(ifs: &AffineIfs) -> Result<BhrReport> {
    if ifs.dim() != 2 {
        return invalid("these conditions are only defined in the plane");
    }
    let ms = ifs.linear_parts();
    let lower_triangular_hypotheses = ms.iter().all(|a| a[(0, 1)] == 0.0 && a[(0, 0)] < a[(1, 1)]);
    let mut invariant_line = None;
    for depth in 1..=2 {
        let family: Vec<DMatrix<f64>> = products(&ms, depth).into_iter().map(|(_, p)| p).collect();
        if let Some(direction) = common_line(&family) {
            invariant_line = Some(InvariantLine { depth, direction });
            break;
        }
    }
    let non_compact_witness = (1..=2).flat_map(|depth| products(&ms, depth)).find_map(|(word, p)| {
        let moduli: Vec<f64> = p.complex_eigenvalues().iter().map(|z| z.norm()).collect();
        let (hi, lo) = (moduli[0].max(moduli[1]), moduli[0].min(moduli[1]));
        (hi > lo * (1.0 + 1e-10)).then_some(word)
    });
    Ok(BhrReport {
        lower_triangular_hypotheses,
        invariant_line,
        non_compact_witness,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(v: [f64; 4]) -> DMatrix<f64> {
        DMatrix::from_row_slice(2, 2, &v)
    }

    fn ifs(ms: &[DMatrix<f64>]) -> AffineIfs {
        AffineIfs::from_parts(&ms.iter().map(|a| (a.clone(), vec![0.0, 0.0])).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn rejects_expanding_or_singular() {
        assert!(AffineMap::new(m([1.2, 0.0, 0.0, 0.5]), DVector::zeros(2)).is_err());
        assert!(AffineMap::new(m([0.5, 0.5, 0.5, 0.5]), DVector::zeros(2)).is_err());
        assert!(AffineMap::new(m([0.5, 0.0, 0.0, 0.5]), DVector::zeros(3)).is_err());
    }

    #[test]
    fn diagonal_systems_have_invariant_axes() {
        let r = bhr_conditions(&ifs(&[m([0.5, 0.0, 0.0, 0.3]), m([0.2, 0.0, 0.0, 0.4])])).unwrap();
        let line = r.invariant_line.clone().unwrap();
        assert_eq!(line.depth, 1);
        assert!(line.direction[0].abs() < 1e-12 || line.direction[1].abs() < 1e-12);
        assert!(r.summary().contains("obstruction found"));
        assert!(r.summary().contains("not checked"));
    }

    #[test]
    fn lower_triangular_hypotheses() {
        let good = bhr_conditions(&ifs(&[m([0.2, 0.0, 0.3, 0.5]), m([0.1, 0.0, -0.2, 0.4])])).unwrap();
        assert!(good.lower_triangular_hypotheses);
        // The vertical axis is invariant for every lower triangular family.
        assert_eq!(good.invariant_line.unwrap().direction.map(|c| c.abs().round()), [0.0, 1.0]);
        let bad = bhr_conditions(&ifs(&[m([0.5, 0.0, 0.3, 0.4])])).unwrap();
        assert!(!bad.lower_triangular_hypotheses);
    }

    #[test]
    fn irrational_rotation_breaks_invariant_lines() {
        let t = 2f64.sqrt();
        let rot = m([0.5 * t.cos(), -0.5 * t.sin(), 0.5 * t.sin(), 0.5 * t.cos()]);
        let r = bhr_conditions(&ifs(&[rot, m([0.6, 0.0, 0.0, 0.3])])).unwrap();
        assert_eq!(r.invariant_line, None);
        assert!(r.non_compact_witness.is_some());
        assert!(r.summary().contains("no obstruction found"));
    }

    #[test]
    fn swapped_axes_found_at_depth_two() {
        let r = bhr_conditions(&ifs(&[m([0.0, 0.5, 0.3, 0.0]), m([0.0, 0.2, 0.4, 0.0])])).unwrap();
        assert_eq!(r.invariant_line.unwrap().depth, 2);
    }

    #[test]
    fn similarities_are_compact() {
        let r = bhr_conditions(&ifs(&[m([0.0, -0.5, 0.5, 0.0]), m([0.3, 0.0, 0.0, 0.3])])).unwrap();
        assert_eq!(r.non_compact_witness, None);
    }

    #[test]
    fn three_dimensional_rejected() {
        let a = DMatrix::from_diagonal(&DVector::from_vec(vec![0.5, 0.4, 0.3]));
        let sys = AffineIfs::from_parts(&[(a, vec![0.0; 3])]).unwrap();
        assert!(bhr_conditions(&sys).is_err());
    }

    #[test]
    fn affinity_matches_lyapunov_for_equal_diagonals() {
        use crate::symbolic::ErgodicMeasure;
        let a = m([1.0 / 3.0, 0.0, 0.0, 0.2]);
        let sys = ifs(&vec![a; 6]);
        let aff = sys.affinity_dimension(&AffinityOptions::default()).unwrap();
        let mu = ErgodicMeasure::bernoulli(vec![1.0 / 6.0; 6]).unwrap();
        let spec = lyapunov_exponents(&sys.linear_parts(), &mu, 1, 1, 0).unwrap();
        let lyap = lyapunov_dimension(spec.entropy, &spec.exponents).unwrap();
        assert!((lyap.clamped - aff.value().min(2.0)).abs() < 1e-6);
    }
}
