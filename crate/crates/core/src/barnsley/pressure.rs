use nalgebra::DMatrix;

use crate::barnsley::{
    classify_diagonality, overlap, BarnsleySystem, Cylinder, DiagonalityClass, DEFAULT_SEARCH_DEPTH, ENDPOINT_TOL,
    LENGTH_EPS,
};
use crate::error::{invalid, Error, Result};
use crate::linalg::spectral_radius;
use crate::selfsimilar::{separation_delta, SeparationReport, SimilarIfs};
use crate::thermo::{bisect_decreasing, RootBracket};

/// Root-finding tolerance for the dimension bracket.
const ROOT_TOL: f64 = 1e-10;
/// Words enumerated for the separation sequence of the fibre maps.
const SEPARATION_WORDS: u128 = 1_000_000;

/// Level-`n` cylinders closed under the type-1 Markov property: the image of
/// each selected cylinder either contains or misses every other one.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkovSubsystem {
    level: usize,
    cylinders: Vec<Cylinder>,
    transitions: Vec<Vec<bool>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Relation {
    Contains,
    Misses,
    Straddles,
}

fn relation(image: (f64, f64), hull: (f64, f64)) -> Relation {
    if hull.0 >= image.0 - ENDPOINT_TOL && hull.1 <= image.1 + ENDPOINT_TOL {
        Relation::Contains
    } else if overlap(image, hull) <= LENGTH_EPS {
        Relation::Misses
    } else {
        Relation::Straddles
    }
}

impl MarkovSubsystem {
    fn build(level: usize, cylinders: Vec<Cylinder>) -> Self {
        let transitions = cylinders
            .iter()
            .map(|c| cylinders.iter().map(|d| relation(c.image, d.hull) == Relation::Contains).collect())
            .collect();
        MarkovSubsystem {
            level,
            cylinders,
            transitions,
        }
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn cylinders(&self) -> &[Cylinder] {
        &self.cylinders
    }

    pub fn transitions(&self) -> &[Vec<bool>] {
        &self.transitions
    }

    pub fn len(&self) -> usize {
        self.cylinders.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cylinders.is_empty()
    }

    /// Fails if some image straddles a selected cylinder.
    pub fn check_type_one(&self) -> Result<()> {
        for c in &self.cylinders {
            for d in &self.cylinders {
                if relation(c.image, d.hull) == Relation::Straddles {
                    return Err(Error::NotTypeOne(format!(
                        "image of {} straddles {}",
                        c.label(),
                        d.label()
                    )));
                }
            }
        }
        Ok(())
    }

    /// `A^(s)` with row `i` weighted by `exp(S_n φ^s)` on cylinder `i`.
    pub fn weighted_matrix(&self, s: f64) -> DMatrix<f64> {
        let k = self.len();
        DMatrix::from_fn(k, k, |i, j| {
            if self.transitions[i][j] {
                self.cylinders[i].log_weight(s).exp()
            } else {
                0.0
            }
        })
    }
}

/// Greedy deletion to a type-1 Markov subsystem of the level-`n` cylinders:
/// cylinders straddled by a surviving image are removed, then cylinders
/// whose image contains no survivor, until nothing changes.
pub fn extract_markov_subsystems(system: &BarnsleySystem, n: usize) -> Result<MarkovSubsystem> {
    let cylinders = system.admissible_words(n)?;
    let count = cylinders.len();
    // Hulls have disjoint interiors, so sorting by left end sorts both ends.
    let mut order: Vec<usize> = (0..count).collect();
    order.sort_by(|&i, &j| cylinders[i].hull.0.total_cmp(&cylinders[j].hull.0));
    let lefts: Vec<f64> = order.iter().map(|&i| cylinders[i].hull.0).collect();
    let rights: Vec<f64> = order.iter().map(|&i| cylinders[i].hull.1).collect();
    let touched = |image: (f64, f64)| {
        let start = rights.partition_point(|&r| r <= image.0 + LENGTH_EPS);
        let end = lefts.partition_point(|&l| l < image.1 - LENGTH_EPS);
        start..end.max(start)
    };

    let mut alive = vec![true; count];
    loop {
        let mut changed = false;
        let snapshot = alive.clone();
        for i in (0..count).filter(|&i| snapshot[i]) {
            for k in touched(cylinders[i].image) {
                let j = order[k];
                if alive[j] && relation(cylinders[i].image, cylinders[j].hull) == Relation::Straddles {
                    alive[j] = false;
                    changed = true;
                }
            }
        }
        for i in 0..count {
            if alive[i]
                && !touched(cylinders[i].image).any(|k| {
                    let j = order[k];
                    alive[j] && relation(cylinders[i].image, cylinders[j].hull) == Relation::Contains
                })
            {
                alive[i] = false;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let survivors = cylinders.into_iter().zip(alive).filter(|(_, a)| *a).map(|(c, _)| c).collect();
    Ok(MarkovSubsystem::build(n, survivors))
}

fn check_s(s: f64) -> Result<()> {
    if !(0.0..=2.0).contains(&s) {
        return invalid(format!("s = {s} is outside [0, 2]"));
    }
    Ok(())
}

/// `log ρ(A^(s))` for a type-1 subsystem; `−∞` when it is empty.
pub fn markov_pressure(subsystem: &MarkovSubsystem, s: f64) -> Result<f64> {
    check_s(s)?;
    subsystem.check_type_one()?;
    if subsystem.is_empty() {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(spectral_radius(&subsystem.weighted_matrix(s))?.ln())
}

fn log_sum_exp(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let top = values.clone().fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY {
        return top;
    }
    top + values.map(|v| (v - top).exp()).sum::<f64>().ln()
}

/// Level data reused across evaluations of the pressure bounds.
#[derive(Debug, Clone)]
pub struct HofbauerModel {
    markov: bool,
    subsystems: Vec<MarkovSubsystem>,
    /// `(Σ log|λ|, Σ log|γ|)` of every admissible cylinder, per level.
    sums: Vec<Vec<(f64, f64)>>,
}

impl HofbauerModel {
    /// Markov systems need only level 1, where both bounds equal the exact pressure.
    pub fn new(system: &BarnsleySystem, n_max: usize) -> Result<Self> {
        if n_max == 0 {
            return invalid("n_max must be positive");
        }
        let markov = system.is_markov();
        let top = if markov { 1 } else { n_max };
        let mut subsystems = Vec::with_capacity(top);
        let mut sums = Vec::with_capacity(top);
        for n in 1..=top {
            subsystems.push(extract_markov_subsystems(system, n)?);
            if !markov {
                sums.push(
                    system
                        .admissible_words(n)?
                        .iter()
                        .map(|c| (c.log_lambda, c.log_gamma))
                        .collect(),
                );
            }
        }
        Ok(HofbauerModel {
            markov,
            subsystems,
            sums,
        })
    }

    pub fn is_markov(&self) -> bool {
        self.markov
    }

    pub fn levels(&self) -> usize {
        self.subsystems.len()
    }

    pub fn subsystems(&self) -> &[MarkovSubsystem] {
        &self.subsystems
    }

    /// `(lower, upper)` bounds on the pressure at `s`.
    pub fn bounds(&self, s: f64) -> Result<(f64, f64)> {
        check_s(s)?;
        let mut lower = f64::NEG_INFINITY;
        for sub in &self.subsystems {
            lower = lower.max(markov_pressure(sub, s)? / sub.level() as f64);
        }
        if self.markov {
            return Ok((lower, lower));
        }
        let phi = |(log_lambda, log_gamma): (f64, f64)| {
            if s <= 1.0 {
                -s * log_lambda
            } else {
                -(log_lambda + (s - 1.0) * log_gamma)
            }
        };
        let upper = self
            .sums
            .iter()
            .enumerate()
            .map(|(k, level)| log_sum_exp(level.iter().map(|&w| phi(w))) / (k + 1) as f64)
            .fold(f64::INFINITY, f64::min);
        Ok((lower, upper))
    }
}

/// Lower bound from Markov subsystems, upper bound from all admissible
/// cylinders, over levels `1..=n_max`.
pub fn hofbauer_pressure(system: &BarnsleySystem, s: f64, n_max: usize) -> Result<(f64, f64)> {
    HofbauerModel::new(system, n_max)?.bounds(s)
}

/// Predicted dimension of the repeller with the facts it rests on.
#[derive(Debug, Clone, PartialEq)]
pub struct BarnsleyReport {
    /// Between the zeros of the lower and upper pressure bounds.
    pub bracket: RootBracket,
    pub markov: bool,
    pub diagonality: DiagonalityClass,
    /// Level at which the cylinder graph was strongly connected.
    pub transitive_at_level: usize,
    pub levels: usize,
    /// Separation sequence of the fibre inverses `(y − t_i)/λ_i`, reported
    /// for diagonal-type systems.
    pub inverse_separation: Option<SeparationReport>,
    pub notes: Vec<String>,
}

impl BarnsleyReport {
    pub fn value(&self) -> f64 {
        self.bracket.midpoint()
    }
}

/// Zero of a decreasing function on `[0, 2]`, pinned to an end when the sign
/// does not change.
fn zero_on_range<F: FnMut(f64) -> f64>(mut f: F) -> Result<RootBracket> {
    if f(0.0) <= 0.0 {
        return Ok(RootBracket { lo: 0.0, hi: 0.0 });
    }
    if f(2.0) >= 0.0 {
        return Ok(RootBracket { lo: 2.0, hi: 2.0 });
    }
    bisect_decreasing(f, 0.0, 2.0, ROOT_TOL)
}

/// Zero `s₀` of the pressure of the potential `φ^s`.
pub fn barnsley_dimension(system: &BarnsleySystem, n_max: usize) -> Result<BarnsleyReport> {
    if let Some((i, b)) = system
        .branches()
        .iter()
        .enumerate()
        .find(|(_, b)| !(b.gamma.abs() > b.lambda.abs()))
    {
        return Err(Error::HypothesesNotMet(format!(
            "branch {}: |gamma| = {} does not exceed |lambda| = {}",
            i + 1,
            b.gamma.abs(),
            b.lambda.abs()
        )));
    }
    let probe = n_max.clamp(1, 3);
    let mut transitive_at_level = None;
    for n in 1..=probe {
        if system.transitivity_check(n)? {
            transitive_at_level = Some(n);
            break;
        }
    }
    let Some(transitive_at_level) = transitive_at_level else {
        return Err(Error::HypothesesNotMet(format!(
            "base map is not transitive on the cylinder graphs of levels 1..={probe}"
        )));
    };

    let model = HofbauerModel::new(system, n_max)?;
    let mut failure = None;
    let mut eval = |s: f64, pick: fn((f64, f64)) -> f64| match model.bounds(s) {
        Ok(b) => pick(b),
        Err(e) => {
            failure.get_or_insert(e);
            f64::NAN
        }
    };
    let low = zero_on_range(|s| eval(s, |b| b.0))?;
    let high = zero_on_range(|s| eval(s, |b| b.1))?;
    if let Some(e) = failure {
        return Err(e);
    }
    let bracket = RootBracket {
        lo: low.lo.min(high.lo),
        hi: high.hi.max(low.hi),
    };

    let mut notes = Vec::new();
    if !model.is_markov() {
        notes.push(format!(
            "non-Markov base: lower bound from Markov subsystems of levels 1..={n_max}, upper bound from all admissible cylinders; the two need not meet"
        ));
    }
    if bracket.hi >= 2.0 {
        notes.push("pressure is nonnegative at s = 2; the bracket is pinned at 2".into());
    }
    let diagonality = classify_diagonality(system, DEFAULT_SEARCH_DEPTH);
    if diagonality == DiagonalityClass::Undetermined {
        notes.push("diagonality undetermined within the search depth".into());
    }
    let inverse_separation = if diagonality.is_diagonal_type() {
        let inverse = SimilarIfs::line(
            &system
                .branches()
                .iter()
                .map(|b| (1.0 / b.lambda, -b.t / b.lambda))
                .collect::<Vec<_>>(),
        )?;
        let m = system.len() as u128;
        let depth = (1..=n_max.min(16))
            .take_while(|&k| m.pow(k as u32) <= SEPARATION_WORDS)
            .last()
            .unwrap_or(1);
        Some(separation_delta(&inverse, depth)?)
    } else {
        None
    };
    Ok(BarnsleyReport {
        bracket,
        markov: model.is_markov(),
        diagonality,
        transitive_at_level,
        levels: model.levels(),
        inverse_separation,
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::barnsley::fixtures::*;
    use approx::assert_relative_eq;

    fn full(lambda: f64) -> BarnsleySystem {
        BarnsleySystem::doubling([lambda; 2], [0.0; 2], [0.0; 2]).unwrap()
    }

    #[test]
    fn full_branch_pressure_values() {
        let sub = extract_markov_subsystems(&full(2f64.sqrt()), 1).unwrap();
        assert_relative_eq!(markov_pressure(&sub, 1.5).unwrap(), 0.0, epsilon = 1e-14);
        assert_relative_eq!(markov_pressure(&sub, 1.0).unwrap(), 0.5 * 2f64.ln(), epsilon = 1e-14);
        assert_relative_eq!(markov_pressure(&sub, 2.0).unwrap(), -0.5 * 2f64.ln(), epsilon = 1e-14);
        assert!(markov_pressure(&sub, 2.5).is_err());
    }

    #[test]
    fn pressure_continuous_and_decreasing() {
        let sys = golden([1.2, 1.4], [0.3, 0.1], [0.0; 2]);
        let sub = extract_markov_subsystems(&sys, 1).unwrap();
        // Both potential formulas agree at s = 1.
        let w = sub.weighted_matrix(1.0);
        let below = DMatrix::from_fn(2, 2, |i, j| if sub.transitions()[i][j] { (-sub.cylinders()[i].log_lambda).exp() } else { 0.0 });
        assert!((w - below).abs().max() < 1e-12);
        let mut prev = f64::INFINITY;
        for k in 0..=40 {
            let p = markov_pressure(&sub, k as f64 * 0.05).unwrap();
            assert!(p < prev);
            prev = p;
        }
        let left = markov_pressure(&sub, 1.0 - 1e-9).unwrap();
        let right = markov_pressure(&sub, 1.0 + 1e-9).unwrap();
        assert!((left - right).abs() < 1e-8);
    }

    #[test]
    fn markov_and_full_branch_keep_all_cylinders() {
        let sys = golden([1.2, 1.3], [0.0; 2], [0.0; 2]);
        assert_eq!(extract_markov_subsystems(&sys, 1).unwrap().len(), 2);
        let doubling = full(1.5);
        for n in 1..=6 {
            assert_eq!(extract_markov_subsystems(&doubling, n).unwrap().len(), 1 << n);
        }
    }

    #[test]
    fn straddled_cylinder_is_deleted() {
        let sys = non_markov([1.2, 1.3], [0.0; 2], [0.0; 2]);
        let admissible = sys.admissible_words(2).unwrap();
        assert_eq!(admissible.len(), 4);
        let sub = extract_markov_subsystems(&sys, 2).unwrap();
        let words: Vec<Vec<usize>> = sub.cylinders().iter().map(|c| c.word.clone()).collect();
        // (2,1) = [1/2, 3/4) straddles 0.7, the end of the image [0, 0.7).
        assert!(!words.contains(&vec![1, 0]));
        assert!(sub.len() < admissible.len());
        assert_eq!(words, vec![vec![0, 0], vec![1, 1]]);
        sub.check_type_one().unwrap();
    }

    #[test]
    fn golden_bounds_coincide() {
        let sys = golden([1.2, 1.3], [0.1, 0.2], [0.0; 2]);
        for s in [0.0, 0.5, 1.0, 1.3, 2.0] {
            let (lo, hi) = hofbauer_pressure(&sys, s, 5).unwrap();
            assert_eq!(lo, hi);
            let w1 = 1.2f64.powf(-s.min(1.0)) * PHI.powf(-(s - 1.0).max(0.0));
            let w2 = 1.3f64.powf(-s.min(1.0)) * PHI.powf(-(s - 1.0).max(0.0));
            // ρ of [[w1, w1], [w2, 0]].
            let rho = (w1 + (w1 * w1 + 4.0 * w1 * w2).sqrt()) / 2.0;
            assert_relative_eq!(lo, rho.ln(), epsilon = 1e-12);
        }
    }

    #[test]
    fn full_branch_bounds_at_root() {
        let (lo, hi) = hofbauer_pressure(&full(2f64.sqrt()), 1.5, 4).unwrap();
        assert!(lo.abs() < 1e-14 && hi.abs() < 1e-14);
    }

    #[test]
    fn non_markov_bracket_tightens() {
        let sys = non_markov([1.2, 1.3], [0.2, 0.1], [0.0, 0.3]);
        for s in [0.0, 0.7, 1.2, 1.8] {
            let mut prev_width = f64::INFINITY;
            for n in 2..=8 {
                let (lo, hi) = hofbauer_pressure(&sys, s, n).unwrap();
                assert!(lo <= hi, "s = {s}, n = {n}: {lo} > {hi}");
                assert!(hi - lo <= prev_width);
                prev_width = hi - lo;
            }
        }
    }

    #[test]
    fn dimension_of_full_branch_systems() {
        let r = barnsley_dimension(&full(2f64.sqrt()), 6).unwrap();
        assert!(r.markov);
        assert!(r.bracket.width() < 1e-8);
        assert!((r.value() - 1.5).abs() < 1e-9);
        let r = barnsley_dimension(&full(1.5), 6).unwrap();
        assert!((r.value() - (1.0 + (4.0f64 / 3.0).ln() / 2f64.ln())).abs() < 1e-9);
        assert!((r.value() - 1.415037).abs() < 1e-6);
        assert_eq!(r.diagonality, DiagonalityClass::Diagonal);
        assert!(r.inverse_separation.is_some());
    }

    #[test]
    fn golden_dimension_changes_sign() {
        let sys = golden([1.2, 1.4], [0.3, -0.2], [0.0, 0.1]);
        let r = barnsley_dimension(&sys, 4).unwrap();
        assert!(r.bracket.width() < 1e-8);
        let sub = extract_markov_subsystems(&sys, 1).unwrap();
        let s0 = r.value();
        assert!(markov_pressure(&sub, s0 - 1e-6).unwrap() > 0.0);
        assert!(markov_pressure(&sub, s0 + 1e-6).unwrap() < 0.0);
    }

    #[test]
    fn dimension_hypotheses() {
        let sys = BarnsleySystem::doubling([2.5, 1.5], [0.0; 2], [0.0; 2]).unwrap();
        let err = barnsley_dimension(&sys, 4).unwrap_err();
        assert!(matches!(err, Error::HypothesesNotMet(_)));
        assert!(err.to_string().contains("hypotheses"));
        assert!(matches!(barnsley_dimension(&split(), 4), Err(Error::HypothesesNotMet(_))));
    }

    #[test]
    fn non_markov_dimension_bracket() {
        let sys = non_markov([1.2, 1.3], [0.2, 0.1], [0.0, 0.3]);
        let r = barnsley_dimension(&sys, 8).unwrap();
        assert!(!r.markov);
        assert!(r.bracket.lo <= r.bracket.hi);
        assert!(r.bracket.lo > 1.0 && r.bracket.hi < 2.0);
        assert!(!r.notes.is_empty());
    }
}
