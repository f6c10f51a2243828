//! Piecewise affine expanding skew products
//! `F(x, y) = (γ_i·x + v_i, a_i·x + λ_i·y + t_i)` on `I_i × ℝ`.

mod diagonality;
mod pressure;
mod repeller;

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};

pub use diagonality::{classify_diagonality, DiagonalityClass, NonDiagonalWitness, DEFAULT_SEARCH_DEPTH};
pub use pressure::{
    barnsley_dimension, extract_markov_subsystems, hofbauer_pressure, markov_pressure, BarnsleyReport,
    HofbauerModel, MarkovSubsystem,
};
pub use repeller::{repeller_points, RepellerCloud, AVOIDANCE_RADIUS};

/// Intervals shorter than this are treated as empty.
pub const LENGTH_EPS: f64 = 1e-12;
/// Tolerance for partition and image endpoint comparisons.
pub const ENDPOINT_TOL: f64 = 1e-12;
/// Largest number of words enumerated at one level.
pub const WORD_BUDGET: u128 = 10_000_000;

/// Data of one branch on `I_i`: base map `γ·x + v`, fibre map `a·x + λ·y + t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Branch {
    pub gamma: f64,
    pub v: f64,
    pub a: f64,
    pub lambda: f64,
    pub t: f64,
}

/// Validated skew product over the partition `0 = x₀ < x₁ < … < x_m = 1`,
/// with `I_i = [x_{i−1}, x_i)` and the last interval closed.
#[derive(Debug, Clone, PartialEq)]
pub struct BarnsleySystem {
    partition: Vec<f64>,
    branches: Vec<Branch>,
    images: Vec<(f64, f64)>,
}

/// Facts established while validating a system.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostics {
    /// `J_i = f_i(cl I_i)` for each branch.
    pub images: Vec<(f64, f64)>,
    pub markov: bool,
    /// `|γ_i| > |λ_i| > 1` for every branch.
    pub theorem_mode: bool,
    pub full_branch: bool,
}

impl BarnsleySystem {
    pub fn new(partition: Vec<f64>, branches: Vec<Branch>) -> Result<Self> {
        if partition.len() < 2 || partition.len() != branches.len() + 1 {
            return invalid(format!(
                "{} partition points cannot carry {} branches",
                partition.len(),
                branches.len()
            ));
        }
        if partition[0] != 0.0 || *partition.last().unwrap() != 1.0 {
            return invalid("partition must start at 0 and end at 1");
        }
        if let Some(w) = partition.windows(2).find(|w| !(w[1] > w[0])) {
            return Err(Error::OverlappingPartition { at: w[1] });
        }
        let mut images = Vec::with_capacity(branches.len());
        for (i, b) in branches.iter().enumerate() {
            let values = [b.gamma, b.v, b.a, b.lambda, b.t];
            if values.iter().any(|x| !x.is_finite()) {
                return invalid(format!("branch {}: parameters must be finite", i + 1));
            }
            if !(b.gamma.abs() > 1.0 && b.lambda.abs() > 1.0) {
                return Err(Error::NotExpanding {
                    branch: i + 1,
                    gamma: b.gamma.abs(),
                    lambda: b.lambda.abs(),
                });
            }
            let (p, q) = (b.gamma * partition[i] + b.v, b.gamma * partition[i + 1] + b.v);
            let (lo, hi) = (p.min(q), p.max(q));
            if lo < -ENDPOINT_TOL || hi > 1.0 + ENDPOINT_TOL {
                return Err(Error::ImageOutsideUnitInterval { branch: i + 1, lo, hi });
            }
            images.push((lo.max(0.0), hi.min(1.0)));
        }
        Ok(BarnsleySystem {
            partition,
            branches,
            images,
        })
    }

    /// The doubling base `x ↦ 2x mod 1` with fibre maps `a_i·x + λ_i·y + t_i`.
    pub fn doubling(lambda: [f64; 2], a: [f64; 2], t: [f64; 2]) -> Result<Self> {
        Self::new(
            vec![0.0, 0.5, 1.0],
            (0..2)
                .map(|i| Branch {
                    gamma: 2.0,
                    v: -(i as f64),
                    a: a[i],
                    lambda: lambda[i],
                    t: t[i],
                })
                .collect(),
        )
    }

    pub fn partition(&self) -> &[f64] {
        &self.partition
    }

    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    pub fn len(&self) -> usize {
        self.branches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.branches.is_empty()
    }

    pub fn interval(&self, i: usize) -> (f64, f64) {
        (self.partition[i], self.partition[i + 1])
    }

    /// `J_i = f_i(cl I_i)`.
    pub fn image(&self, i: usize) -> (f64, f64) {
        self.images[i]
    }

    /// Branch containing `x`, with the half-open convention.
    pub fn branch_of(&self, x: f64) -> Option<usize> {
        if !(0.0..=1.0).contains(&x) {
            return None;
        }
        let k = self.partition[1..].partition_point(|&p| p <= x);
        Some(k.min(self.len() - 1))
    }

    /// `f(x)`.
    pub fn base_map(&self, x: f64) -> Option<f64> {
        let i = self.branch_of(x)?;
        let b = &self.branches[i];
        Some(b.gamma * x + b.v)
    }

    fn is_partition_point(&self, x: f64) -> bool {
        self.partition.iter().any(|p| (p - x).abs() <= ENDPOINT_TOL)
    }

    /// Every branch image is a union of partition intervals.
    pub fn is_markov(&self) -> bool {
        self.images.iter().all(|&(lo, hi)| self.is_partition_point(lo) && self.is_partition_point(hi))
    }

    /// Every branch maps its interval onto `[0, 1]`.
    pub fn is_full_branch(&self) -> bool {
        self.images
            .iter()
            .all(|&(lo, hi)| lo.abs() <= ENDPOINT_TOL && (hi - 1.0).abs() <= ENDPOINT_TOL)
    }

    pub fn theorem_mode(&self) -> bool {
        self.branches.iter().all(|b| b.gamma.abs() > b.lambda.abs())
    }

    pub fn diagnostics(&self) -> Diagnostics {
        Diagnostics {
            images: self.images.clone(),
            markov: self.is_markov(),
            theorem_mode: self.theorem_mode(),
            full_branch: self.is_full_branch(),
        }
    }

    /// Admissible words of length `n` with their cylinders, in lex order.
    pub fn admissible_words(&self, n: usize) -> Result<Vec<Cylinder>> {
        if n == 0 {
            return invalid("word length must be positive");
        }
        let requested = (self.len() as u128).saturating_pow(n as u32);
        if requested > WORD_BUDGET {
            let suggested_n = (1..n)
                .rev()
                .find(|&k| (self.len() as u128).pow(k as u32) <= WORD_BUDGET)
                .unwrap_or(1);
            return Err(Error::BudgetExceeded {
                requested,
                budget: WORD_BUDGET,
                suggested_n,
            });
        }
        let roots: Vec<Cylinder> = (0..self.len()).map(|i| Cylinder::first(self, i)).collect();
        Ok(roots
            .into_par_iter()
            .flat_map_iter(|root| {
                let mut out = Vec::new();
                self.grow(root, n, &mut out);
                out
            })
            .collect())
    }

    fn grow(&self, c: Cylinder, n: usize, out: &mut Vec<Cylinder>) {
        if c.word.len() == n {
            out.push(c);
            return;
        }
        for j in 0..self.len() {
            if let Some(next) = c.extend(self, j) {
                self.grow(next, n, out);
            }
        }
    }

    /// Strong connectivity of the graph on level-`n` cylinders with an edge
    /// `C → C′` when `f(C) ∩ C′` has positive length. A finite proxy for
    /// transitivity of the base map.
    pub fn transitivity_check(&self, n: usize) -> Result<bool> {
        let cylinders = self.admissible_words(n)?;
        let mut graph = DiGraph::<(), ()>::new();
        let nodes: Vec<_> = cylinders.iter().map(|_| graph.add_node(())).collect();
        for (i, c) in cylinders.iter().enumerate() {
            let b = &self.branches[c.word[0]];
            let (p, q) = (b.gamma * c.hull.0 + b.v, b.gamma * c.hull.1 + b.v);
            let step = (p.min(q), p.max(q));
            for (j, d) in cylinders.iter().enumerate() {
                if overlap(step, d.hull) > LENGTH_EPS {
                    graph.add_edge(nodes[i], nodes[j], ());
                }
            }
        }
        Ok(tarjan_scc(&graph).len() == 1)
    }
}

pub(crate) fn overlap(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.1.min(b.1) - a.0.max(b.0)).max(0.0)
}

/// Cylinder `C[ω] = {x : f^k(x) ∈ I_{ω_{k+1}}, k < n}` with its image under `f^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Cylinder {
    pub word: Vec<usize>,
    /// Closure of `C[ω]`.
    pub hull: (f64, f64),
    /// Closure of `f^n(C[ω])`.
    pub image: (f64, f64),
    /// `Σ log|γ_{ω_k}|`.
    pub log_gamma: f64,
    /// `Σ log|λ_{ω_k}|`.
    pub log_lambda: f64,
    /// `f_ω(x) = slope·x + offset` on the cylinder.
    slope: f64,
    offset: f64,
}

impl Cylinder {
    fn first(system: &BarnsleySystem, i: usize) -> Cylinder {
        let b = &system.branches[i];
        Cylinder {
            word: vec![i],
            hull: system.interval(i),
            image: system.images[i],
            log_gamma: b.gamma.abs().ln(),
            log_lambda: b.lambda.abs().ln(),
            slope: b.gamma,
            offset: b.v,
        }
    }

    fn extend(&self, system: &BarnsleySystem, j: usize) -> Option<Cylinder> {
        let target = system.interval(j);
        let (lo, hi) = (self.image.0.max(target.0), self.image.1.min(target.1));
        if hi - lo <= LENGTH_EPS {
            return None;
        }
        let pull = |y: f64| (y - self.offset) / self.slope;
        let (p, q) = (pull(lo), pull(hi));
        let b = &system.branches[j];
        let (u, w) = (b.gamma * lo + b.v, b.gamma * hi + b.v);
        let mut word = self.word.clone();
        word.push(j);
        Some(Cylinder {
            word,
            hull: (p.min(q).max(self.hull.0), p.max(q).min(self.hull.1)),
            image: (u.min(w).max(0.0), u.max(w).min(1.0)),
            log_gamma: self.log_gamma + b.gamma.abs().ln(),
            log_lambda: self.log_lambda + b.lambda.abs().ln(),
            slope: b.gamma * self.slope,
            offset: b.gamma * self.offset + b.v,
        })
    }

    pub fn len(&self) -> usize {
        self.word.len()
    }

    pub fn is_empty(&self) -> bool {
        self.word.is_empty()
    }

    /// `exp(S_n φ^s)` on the cylinder, as a logarithm.
    pub fn log_weight(&self, s: f64) -> f64 {
        if s <= 1.0 {
            -s * self.log_lambda
        } else {
            -(self.log_lambda + (s - 1.0) * self.log_gamma)
        }
    }

    /// Fixed point of `f_ω` if it lies in the closed cylinder.
    pub fn fixed_point(&self) -> Option<f64> {
        let x = self.offset / (1.0 - self.slope);
        (x >= self.hull.0 - ENDPOINT_TOL && x <= self.hull.1 + ENDPOINT_TOL).then_some(x)
    }

    /// Formats the word with 1-based symbols.
    pub fn label(&self) -> String {
        format_word(&self.word)
    }
}

/// `(1,2,…)` with 1-based symbols.
pub fn format_word(word: &[usize]) -> String {
    let parts: Vec<String> = word.iter().map(|i| (i + 1).to_string()).collect();
    format!("({})", parts.join(","))
}


#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    fn fib(n: usize) -> usize {
        let (mut a, mut b) = (0, 1);
        for _ in 0..n {
            (a, b) = (b, a + b);
        }
        a
    }

    #[test]
    fn doubling_is_valid_markov_and_theorem_mode() {
        let sys = BarnsleySystem::doubling([2f64.sqrt(); 2], [0.0; 2], [0.0; 2]).unwrap();
        let d = sys.diagnostics();
        assert!(d.markov && d.theorem_mode && d.full_branch);
        assert_eq!(d.images, vec![(0.0, 1.0), (0.0, 1.0)]);
    }

    #[test]
    fn validation_errors() {
        let b = |gamma: f64, v: f64| Branch {
            gamma,
            v,
            a: 0.0,
            lambda: 1.5,
            t: 0.0,
        };
        let err = BarnsleySystem::new(vec![0.0, 0.5, 1.0], vec![b(0.9, 0.0), b(2.0, -1.0)]).unwrap_err();
        assert!(err.to_string().contains("not expanding"));
        assert!(matches!(err, Error::NotExpanding { branch: 1, .. }));
        let err = BarnsleySystem::new(vec![0.0, 0.5, 1.0], vec![b(2.0, 0.6), b(2.0, -1.0)]).unwrap_err();
        match err {
            Error::ImageOutsideUnitInterval { branch, lo, hi } => {
                assert_eq!(branch, 1);
                assert!((lo - 0.6).abs() < 1e-15 && (hi - 1.6).abs() < 1e-15);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(BarnsleySystem::new(vec![0.0, 0.5, 0.5, 1.0], vec![b(2.0, 0.0); 3]).is_err());
        assert!(BarnsleySystem::new(vec![0.0, 1.0], vec![b(2.0, 0.0); 2]).is_err());
    }

    #[test]
    fn doubling_words_are_dyadic() {
        let sys = BarnsleySystem::doubling([1.5; 2], [0.0; 2], [0.0; 2]).unwrap();
        let words = sys.admissible_words(4).unwrap();
        assert_eq!(words.len(), 16);
        for (k, c) in words.iter().enumerate() {
            assert!((c.hull.0 - k as f64 / 16.0).abs() < 1e-14);
            assert!((c.hull.1 - (k + 1) as f64 / 16.0).abs() < 1e-14);
        }
    }

    #[test]
    fn golden_counts_are_fibonacci() {
        let sys = golden([1.2, 1.3], [0.0; 2], [0.0; 2]);
        assert!(sys.is_markov());
        for n in 1..=12 {
            assert_eq!(sys.admissible_words(n).unwrap().len(), fib(n + 2), "n = {n}");
        }
    }

    #[test]
    fn non_markov_counts_sit_between() {
        let sys = non_markov([1.2, 1.3], [0.0; 2], [0.0; 2]);
        assert!(!sys.is_markov());
        let count = sys.admissible_words(6).unwrap().len();
        assert!(fib(8) < count && count < 64, "count = {count}");
        // Brute force: itineraries of a fine grid.
        let mut seen = std::collections::BTreeSet::new();
        for k in 0..200_000 {
            let mut x = (k as f64 + 0.5) / 200_000.0;
            let mut w = Vec::new();
            for _ in 0..6 {
                w.push(sys.branch_of(x).unwrap());
                x = sys.base_map(x).unwrap();
            }
            seen.insert(w);
        }
        assert_eq!(seen.len(), count);
    }

    #[test]
    fn cylinders_cover_the_interval() {
        let sys = non_markov([1.2, 1.3], [0.0; 2], [0.0; 2]);
        let words = sys.admissible_words(5).unwrap();
        let total: f64 = words.iter().map(|c| c.hull.1 - c.hull.0).sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert!(words.windows(2).all(|w| (w[0].hull.1 - w[1].hull.0).abs() < 1e-12));
    }

    #[test]
    fn markov_flags() {
        assert!(BarnsleySystem::doubling([1.5; 2], [0.0; 2], [0.0; 2]).unwrap().is_markov());
        assert!(!non_markov([1.2, 1.3], [0.0; 2], [0.0; 2]).is_markov());
        assert!(golden([1.2, 1.3], [0.0; 2], [0.0; 2]).is_markov());
    }

    #[test]
    fn transitivity() {
        let doubling = BarnsleySystem::doubling([1.5; 2], [0.0; 2], [0.0; 2]).unwrap();
        for n in 1..=4 {
            assert!(doubling.transitivity_check(n).unwrap());
        }
        assert!(!split().transitivity_check(1).unwrap());
        assert!(golden([1.2, 1.3], [0.0; 2], [0.0; 2]).transitivity_check(3).unwrap());
    }

    #[test]
    fn budget_is_enforced() {
        let sys = BarnsleySystem::doubling([1.5; 2], [0.0; 2], [0.0; 2]).unwrap();
        assert!(matches!(sys.admissible_words(24), Err(Error::BudgetExceeded { suggested_n: 23, .. })));
    }

    #[test]
    fn half_open_branch_lookup() {
        let sys = BarnsleySystem::doubling([1.5; 2], [0.0; 2], [0.0; 2]).unwrap();
        assert_eq!(sys.branch_of(0.5), Some(1));
        assert_eq!(sys.branch_of(1.0), Some(1));
        assert_eq!(sys.branch_of(0.0), Some(0));
        assert_eq!(sys.branch_of(1.5), None);
    }
}
