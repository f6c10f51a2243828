use std::fmt;

use crate::barnsley::{format_word, BarnsleySystem, Cylinder};

/// Default longest periodic or connecting word tried by the witness search.
pub const DEFAULT_SEARCH_DEPTH: usize = 4;
const PARALLEL_TOL: f64 = 1e-12;

/// Periodic words `ω`, `τ` whose derivative matrices share no eigenbasis,
/// joined by `η` so that `ωητ` is admissible.
#[derive(Debug, Clone, PartialEq)]
pub struct NonDiagonalWitness {
    pub omega: Vec<usize>,
    pub tau: Vec<usize>,
    pub eta: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DiagonalityClass {
    /// Every `a_i` vanishes.
    Diagonal,
    /// The derivative matrices are simultaneously diagonalizable.
    EssentiallyDiagonal,
    EssentiallyNonDiagonal(NonDiagonalWitness),
    /// Neither identity holds and no witness was found within the search depth.
    Undetermined,
}

impl DiagonalityClass {
    pub fn is_diagonal_type(&self) -> bool {
        matches!(self, DiagonalityClass::Diagonal | DiagonalityClass::EssentiallyDiagonal)
    }
}

impl fmt::Display for DiagonalityClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DiagonalityClass::Diagonal => write!(f, "diagonal"),
            DiagonalityClass::EssentiallyDiagonal => write!(f, "essentially diagonal"),
            DiagonalityClass::EssentiallyNonDiagonal(w) => write!(
                f,
                "essentially non-diagonal (periodic words {} and {}, connector {})",
                format_word(&w.omega),
                format_word(&w.tau),
                format_word(&w.eta)
            ),
            DiagonalityClass::Undetermined => write!(f, "undetermined"),
        }
    }
}

/// Lower triangular `[[γ, 0], [a, λ]]`.
#[derive(Debug, Clone, Copy)]
struct Triangle {
    gamma: f64,
    a: f64,
    lambda: f64,
}

impl Triangle {
    /// Derivative of `F_ω`, the branches applied in word order.
    fn of_word(system: &BarnsleySystem, word: &[usize]) -> Triangle {
        let mut m = Triangle {
            gamma: 1.0,
            a: 0.0,
            lambda: 1.0,
        };
        for &j in word {
            let b = &system.branches()[j];
            m = Triangle {
                gamma: b.gamma * m.gamma,
                a: b.a * m.gamma + b.lambda * m.a,
                lambda: b.lambda * m.lambda,
            };
        }
        m
    }

    /// Eigendirection `(γ − λ, a)` of the `γ` eigenvalue; `None` for scalar matrices.
    fn direction(&self) -> Option<(f64, f64)> {
        let v = (self.gamma - self.lambda, self.a);
        let scale = self.gamma.abs().max(self.lambda.abs());
        (v.0.hypot(v.1) > PARALLEL_TOL * scale).then_some(v)
    }
}

fn parallel(u: (f64, f64), w: (f64, f64)) -> bool {
    (u.0 * w.1 - u.1 * w.0).abs() <= PARALLEL_TOL * u.0.hypot(u.1) * w.0.hypot(w.1)
}

fn admissible(system: &BarnsleySystem, word: &[usize]) -> bool {
    let mut c = Cylinder::first(system, word[0]);
    for &j in &word[1..] {
        match c.extend(system, j) {
            Some(next) => c = next,
            None => return false,
        }
    }
    true
}

fn all_words(m: usize, max_len: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    let mut level = vec![vec![]];
    for _ in 0..max_len {
        level = level
            .iter()
            .flat_map(|w: &Vec<usize>| {
                (0..m).map(move |j| {
                    let mut v = w.clone();
                    v.push(j);
                    v
                })
            })
            .collect();
        out.extend(level.iter().cloned());
    }
    out
}

/// Classifies the derivative cocycle; see [`DiagonalityClass`].
pub fn classify_diagonality(system: &BarnsleySystem, search_depth: usize) -> DiagonalityClass {
    let branches = system.branches();
    if branches.iter().all(|b| b.a == 0.0) {
        return DiagonalityClass::Diagonal;
    }
    let directions: Vec<(f64, f64)> = (0..system.len())
        .filter_map(|i| Triangle::of_word(system, &[i]).direction())
        .collect();
    if directions.windows(2).all(|w| parallel(w[0], w[1])) && directions.iter().all(|&d| parallel(d, directions[0])) {
        return DiagonalityClass::EssentiallyDiagonal;
    }

    let mut periodic: Vec<(Vec<usize>, (f64, f64))> = Vec::new();
    for n in 1..=search_depth {
        let Ok(cylinders) = system.admissible_words(n) else {
            break;
        };
        for c in cylinders {
            if c.fixed_point().is_some() {
                if let Some(d) = Triangle::of_word(system, &c.word).direction() {
                    periodic.push((c.word, d));
                }
            }
        }
    }
    let connectors = all_words(system.len(), search_depth);
    for (omega, d_omega) in &periodic {
        for (tau, d_tau) in &periodic {
            if parallel(*d_omega, *d_tau) {
                continue;
            }
            for eta in &connectors {
                let joined: Vec<usize> = omega.iter().chain(eta).chain(tau).copied().collect();
                if admissible(system, &joined) {
                    return DiagonalityClass::EssentiallyNonDiagonal(NonDiagonalWitness {
                        omega: omega.clone(),
                        tau: tau.clone(),
                        eta: eta.clone(),
                    });
                }
            }
        }
    }
    DiagonalityClass::Undetermined
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::barnsley::fixtures::*;

    #[test]
    fn zero_shear_is_diagonal() {
        let sys = BarnsleySystem::doubling([2f64.sqrt(); 2], [0.0; 2], [0.3, 0.1]).unwrap();
        assert_eq!(classify_diagonality(&sys, 4), DiagonalityClass::Diagonal);
    }

    #[test]
    fn common_ratio_is_essentially_diagonal() {
        let sys = BarnsleySystem::doubling([2f64.sqrt(); 2], [1.0, 1.0], [0.0; 2]).unwrap();
        assert_eq!(classify_diagonality(&sys, 4), DiagonalityClass::EssentiallyDiagonal);
        // Different λ but the same ratio (γ − λ)/a.
        let sys = BarnsleySystem::doubling([1.5, 1.2], [0.25, 0.4], [0.0; 2]).unwrap();
        assert_eq!(classify_diagonality(&sys, 4), DiagonalityClass::EssentiallyDiagonal);
    }

    #[test]
    fn scalar_branch_is_compatible_with_any_ratio() {
        let sys = BarnsleySystem::doubling([2.0, 1.5], [0.0, 0.3], [0.0; 2]).unwrap();
        assert_eq!(classify_diagonality(&sys, 4), DiagonalityClass::EssentiallyDiagonal);
    }

    #[test]
    fn different_ratios_give_fixed_point_witness() {
        let sys = BarnsleySystem::doubling([2f64.sqrt(); 2], [1.0, 2.0], [0.0; 2]).unwrap();
        let class = classify_diagonality(&sys, 4);
        assert_eq!(
            class,
            DiagonalityClass::EssentiallyNonDiagonal(NonDiagonalWitness {
                omega: vec![0],
                tau: vec![1],
                eta: vec![],
            })
        );
        assert!(class.to_string().contains("(1) and (2)"));
    }

    #[test]
    fn golden_base_witness_respects_admissibility() {
        let sys = golden([1.2, 1.3], [0.5, -0.4], [0.0; 2]);
        match classify_diagonality(&sys, 4) {
            DiagonalityClass::EssentiallyNonDiagonal(w) => {
                let joined: Vec<usize> = w.omega.iter().chain(&w.eta).chain(&w.tau).copied().collect();
                assert!(admissible(&sys, &joined));
                assert!(!joined.windows(2).any(|p| p == [1, 1]));
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn empty_search_is_undetermined() {
        let sys = BarnsleySystem::doubling([2f64.sqrt(); 2], [1.0, 2.0], [0.0; 2]).unwrap();
        assert_eq!(classify_diagonality(&sys, 0), DiagonalityClass::Undetermined);
        assert_eq!(classify_diagonality(&split(), 3), DiagonalityClass::Diagonal);
    }

    #[test]
    fn word_derivative_composes_in_order() {
        let sys = BarnsleySystem::doubling([1.5, 1.2], [0.3, -0.7], [0.0; 2]).unwrap();
        let m = Triangle::of_word(&sys, &[0, 1]);
        // DF_2 · DF_1
        let (g1, a1, l1) = (2.0, 0.3, 1.5);
        let (g2, a2, l2) = (2.0, -0.7, 1.2);
        assert!((m.gamma - g1 * g2).abs() < 1e-15);
        assert!((m.lambda - l1 * l2).abs() < 1e-15);
        assert!((m.a - (a2 * g1 + l2 * a1)).abs() < 1e-15);
    }
}
