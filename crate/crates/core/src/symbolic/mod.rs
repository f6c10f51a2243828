//! Subshifts of finite type, Bernoulli/Markov/Parry measures and entropies.

mod lap;

pub use lap::{lap_entropy, lap_number, AffineBranch, PiecewiseAffineMap};

use nalgebra::DMatrix;
use rand::Rng;

use crate::error::{invalid, Error, Result};
use crate::linalg::perron_pair;

const STOCHASTIC_TOL: f64 = 1e-12;

/// Alphabet `{0, …, m-1}` with a 0/1 transition matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Subshift {
    transition: Vec<Vec<bool>>,
}

impl Subshift {
    pub fn new(transition: Vec<Vec<bool>>) -> Result<Self> {
        let m = transition.len();
        if m < 2 {
            return invalid("a subshift needs at least 2 symbols");
        }
        if transition.iter().any(|row| row.len() != m) {
            return invalid("transition matrix must be square");
        }
        for k in 0..m {
            if !transition[k].iter().any(|&b| b) {
                return invalid(format!("symbol {} has no successor", k + 1));
            }
            if !(0..m).any(|i| transition[i][k]) {
                return invalid(format!("symbol {} has no predecessor", k + 1));
            }
        }
        Ok(Subshift { transition })
    }

    /// Accepts a nested integer matrix of zeros and ones.
    pub fn from_integers(rows: &[Vec<i64>]) -> Result<Self> {
        let mut transition = Vec::with_capacity(rows.len());
        for row in rows {
            let mut r = Vec::with_capacity(row.len());
            for &v in row {
                match v {
                    0 => r.push(false),
                    1 => r.push(true),
                    other => return invalid(format!("transition entries must be 0 or 1, got {other}")),
                }
            }
            transition.push(r);
        }
        Subshift::new(transition)
    }

    pub fn full(m: usize) -> Result<Self> {
        Subshift::new(vec![vec![true; m]; m])
    }

    pub fn golden_mean() -> Self {
        Subshift::new(vec![vec![true, true], vec![true, false]]).expect("valid")
    }

    pub fn size(&self) -> usize {
        self.transition.len()
    }

    pub fn allows(&self, from: usize, to: usize) -> bool {
        self.transition[from][to]
    }

    pub fn is_admissible(&self, word: &[usize]) -> bool {
        word.iter().all(|&s| s < self.size()) && word.windows(2).all(|w| self.allows(w[0], w[1]))
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        let m = self.size();
        DMatrix::from_fn(m, m, |i, j| if self.transition[i][j] { 1.0 } else { 0.0 })
    }

    /// Least `k` with `A^k > 0` entrywise, searched up to Wielandt's bound
    /// `m² − 2m + 2`; `None` when the matrix is not primitive.
    pub fn primitivity_exponent(&self) -> Option<usize> {
        let m = self.size();
        let bound = m * m - 2 * m + 2;
        let mut power = self.transition.clone();
        for k in 1..=bound {
            if power.iter().all(|row| row.iter().all(|&b| b)) {
                return Some(k);
            }
            let mut next = vec![vec![false; m]; m];
            for i in 0..m {
                for l in 0..m {
                    if power[i][l] {
                        for j in 0..m {
                            next[i][j] |= self.transition[l][j];
                        }
                    }
                }
            }
            power = next;
        }
        None
    }

    pub fn is_primitive(&self) -> bool {
        self.primitivity_exponent().is_some()
    }

    pub(crate) fn require_primitive(&self) -> Result<()> {
        if self.is_primitive() {
            Ok(())
        } else {
            Err(Error::NotPrimitive)
        }
    }

    /// `log λ` for the Perron eigenvalue `λ` of the transition matrix (nats).
    pub fn topological_entropy(&self) -> Result<f64> {
        self.require_primitive()?;
        Ok(perron_pair(&self.matrix())?.value.ln())
    }

    /// All admissible words of length `n`, in lexicographic order.
    pub fn words(&self, n: usize) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        if n == 0 {
            return out;
        }
        let mut stack: Vec<Vec<usize>> = (0..self.size()).rev().map(|i| vec![i]).collect();
        while let Some(w) = stack.pop() {
            if w.len() == n {
                out.push(w);
                continue;
            }
            let last = *w.last().unwrap();
            for j in (0..self.size()).rev() {
                if self.allows(last, j) {
                    let mut next = w.clone();
                    next.push(j);
                    stack.push(next);
                }
            }
        }
        out
    }
}

/// Shift-invariant measure on a subshift.
#[derive(Debug, Clone, PartialEq)]
pub enum MeasureKind {
    Bernoulli(Vec<f64>),
    Markov {
        stationary: Vec<f64>,
        transition: Vec<Vec<f64>>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErgodicMeasure {
    kind: MeasureKind,
    host: Subshift,
}

fn check_probability_vector(p: &[f64], what: &str) -> Result<()> {
    if p.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return invalid(format!("{what} has negative or non-finite entries"));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > STOCHASTIC_TOL * p.len().max(1) as f64 {
        return invalid(format!("{what} sums to {total}, not 1"));
    }
    Ok(())
}

impl ErgodicMeasure {
    /// Bernoulli measure on the full shift over `p.len()` symbols.
    pub fn bernoulli(p: Vec<f64>) -> Result<Self> {
        check_probability_vector(&p, "probability vector")?;
        let host = Subshift::full(p.len())?;
        Ok(ErgodicMeasure {
            kind: MeasureKind::Bernoulli(p),
            host,
        })
    }

    pub fn markov(host: Subshift, stationary: Vec<f64>, transition: Vec<Vec<f64>>) -> Result<Self> {
        let m = host.size();
        if stationary.len() != m || transition.len() != m || transition.iter().any(|r| r.len() != m) {
            return invalid("Markov measure dimensions do not match the subshift");
        }
        check_probability_vector(&stationary, "stationary vector")?;
        for (i, row) in transition.iter().enumerate() {
            check_probability_vector(row, &format!("row {} of the stochastic matrix", i + 1))?;
            for (j, &v) in row.iter().enumerate() {
                if v > 0.0 && !host.allows(i, j) {
                    return invalid(format!("transition {}->{} is forbidden but has mass {v}", i + 1, j + 1));
                }
            }
        }
        for j in 0..m {
            let image: f64 = (0..m).map(|i| stationary[i] * transition[i][j]).sum();
            if (image - stationary[j]).abs() > STOCHASTIC_TOL {
                return invalid(format!("stationary vector is not invariant at symbol {}", j + 1));
            }
        }
        Ok(ErgodicMeasure {
            kind: MeasureKind::Markov {
                stationary,
                transition,
            },
            host,
        })
    }

    pub fn kind(&self) -> &MeasureKind {
        &self.kind
    }

    pub fn host(&self) -> &Subshift {
        &self.host
    }

    pub fn alphabet_size(&self) -> usize {
        self.host.size()
    }

    /// One-symbol marginal: `p` for Bernoulli, the stationary vector for Markov.
    pub fn marginal(&self) -> &[f64] {
        match &self.kind {
            MeasureKind::Bernoulli(p) => p,
            MeasureKind::Markov { stationary, .. } => stationary,
        }
    }

    /// Probability of moving from `i` to `j`.
    pub fn step_probability(&self, i: usize, j: usize) -> f64 {
        match &self.kind {
            MeasureKind::Bernoulli(p) => p[j],
            MeasureKind::Markov { transition, .. } => transition[i][j],
        }
    }

    /// Entropy in nats, with `0 · log 0 = 0`.
    pub fn entropy(&self) -> f64 {
        match &self.kind {
            MeasureKind::Bernoulli(p) => -p.iter().map(|&x| xlogx(x)).sum::<f64>(),
            MeasureKind::Markov {
                stationary,
                transition,
            } => -stationary
                .iter()
                .zip(transition)
                .map(|(&pi, row)| pi * row.iter().map(|&x| xlogx(x)).sum::<f64>())
                .sum::<f64>(),
        }
    }

    /// Log-mass of the cylinder `[word]`; `-inf` for null cylinders.
    pub fn log_cylinder_measure(&self, word: &[usize]) -> f64 {
        let Some((&first, _)) = word.split_first() else {
            return 0.0;
        };
        let mut acc = self.marginal()[first].ln();
        for w in word.windows(2) {
            acc += self.step_probability(w[0], w[1]).ln();
        }
        acc
    }

    pub fn cylinder_measure(&self, word: &[usize]) -> f64 {
        self.log_cylinder_measure(word).exp()
    }

    /// Draws a word of length `n` distributed according to the measure.
    pub fn sample_word<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Vec<usize> {
        let mut word = Vec::with_capacity(n);
        if n == 0 {
            return word;
        }
        let mut current = sample_index(rng, self.marginal());
        word.push(current);
        for _ in 1..n {
            current = match &self.kind {
                MeasureKind::Bernoulli(p) => sample_index(rng, p),
                MeasureKind::Markov { transition, .. } => sample_index(rng, &transition[current]),
            };
            word.push(current);
        }
        word
    }
}

pub(crate) fn xlogx(x: f64) -> f64 {
    if x > 0.0 {
        x * x.ln()
    } else {
        0.0
    }
}

pub(crate) fn sample_index<R: Rng + ?Sized>(rng: &mut R, weights: &[f64]) -> usize {
    let u: f64 = rng.gen::<f64>() * weights.iter().sum::<f64>();
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (i, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            last_positive = i;
            acc += w;
            if u < acc {
                return i;
            }
        }
    }
    last_positive
}

/// Maximal-entropy Markov measure built from the Perron eigendata.
pub fn parry_measure(sft: &Subshift) -> Result<ErgodicMeasure> {
    sft.require_primitive()?;
    let perron = perron_pair(&sft.matrix())?;
    markov_from_perron(sft, &sft.matrix(), perron.value, perron.left.as_slice(), perron.right.as_slice())
}

/// Markov measure `p_i = u_i v_i`, `P_ij = B_ij v_j / (ρ v_i)` from Perron data
/// of a weighted transition matrix `B`.
pub(crate) fn markov_from_perron(
    sft: &Subshift,
    weighted: &DMatrix<f64>,
    rho: f64,
    left: &[f64],
    right: &[f64],
) -> Result<ErgodicMeasure> {
    let m = sft.size();
    let u_sum: f64 = left.iter().sum();
    let u: Vec<f64> = left.iter().map(|x| x / u_sum).collect();
    let uv: f64 = u.iter().zip(right).map(|(a, b)| a * b).sum();
    let v: Vec<f64> = right.iter().map(|x| x / uv).collect();
    let stationary: Vec<f64> = u.iter().zip(&v).map(|(a, b)| a * b).collect();
    let transition: Vec<Vec<f64>> = (0..m)
        .map(|i| {
            let row: Vec<f64> = (0..m).map(|j| weighted[(i, j)] * v[j] / (rho * v[i])).collect();
            // Absorb the power-iteration residual so rows are exactly stochastic.
            let total: f64 = row.iter().sum();
            row.into_iter().map(|x| x / total).collect()
        })
        .collect();
    let total: f64 = stationary.iter().sum();
    let stationary: Vec<f64> = stationary.into_iter().map(|x| x / total).collect();
    ErgodicMeasure::markov(sft.clone(), stationary, transition)
        .map_err(|e| Error::Invalid(format!("Perron data did not yield a Markov measure: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn golden() -> f64 {
        (1.0 + 5f64.sqrt()) / 2.0
    }

    #[test]
    fn primitivity_examples() {
        assert_eq!(Subshift::full(2).unwrap().primitivity_exponent(), Some(1));
        assert_eq!(Subshift::golden_mean().primitivity_exponent(), Some(2));
        let id = Subshift::new(vec![vec![true, false], vec![false, true]]).unwrap();
        assert_eq!(id.primitivity_exponent(), None);
    }

    #[test]
    fn wielandt_bound_is_attained() {
        // The Wielandt matrix reaches the maximal exponent m² − 2m + 2.
        let m = 4;
        let mut t = vec![vec![false; m]; m];
        for i in 0..m - 1 {
            t[i][i + 1] = true;
        }
        t[m - 1][0] = true;
        t[m - 1][1] = true;
        let sft = Subshift::new(t).unwrap();
        assert_eq!(sft.primitivity_exponent(), Some(m * m - 2 * m + 2));
    }

    #[test]
    fn topological_entropy_examples() {
        assert_relative_eq!(Subshift::full(3).unwrap().topological_entropy().unwrap(), 3f64.ln(), max_relative = 1e-14);
        assert_relative_eq!(Subshift::full(2).unwrap().topological_entropy().unwrap(), 2f64.ln(), max_relative = 1e-14);
        let h = Subshift::golden_mean().topological_entropy().unwrap();
        assert_relative_eq!(h, golden().ln(), max_relative = 1e-12);
        assert!((h - 0.481212).abs() < 1e-6);
        let id = Subshift::new(vec![vec![true, false], vec![false, true]]).unwrap();
        assert_eq!(id.topological_entropy(), Err(Error::NotPrimitive));
    }

    #[test]
    fn bernoulli_entropy_examples() {
        let h = |p: Vec<f64>| ErgodicMeasure::bernoulli(p).unwrap().entropy();
        assert_relative_eq!(h(vec![0.5, 0.5]), 2f64.ln(), max_relative = 1e-15);
        assert_eq!(h(vec![1.0, 0.0]), 0.0);
        assert_relative_eq!(h(vec![0.5, 0.25, 0.25]), 1.5 * 2f64.ln(), max_relative = 1e-15);
    }

    #[test]
    fn parry_golden_mean() {
        let mu = parry_measure(&Subshift::golden_mean()).unwrap();
        let phi = golden();
        let p = mu.marginal();
        assert!((p[0] - 0.723607).abs() < 1e-6 && (p[1] - 0.276393).abs() < 1e-6);
        let MeasureKind::Markov { transition, .. } = mu.kind() else { panic!() };
        assert_relative_eq!(transition[0][0], 1.0 / phi, max_relative = 1e-12);
        assert_relative_eq!(transition[0][1], 1.0 / (phi * phi), max_relative = 1e-12);
        assert_eq!(transition[1], vec![1.0, 0.0]);
        assert_relative_eq!(mu.entropy(), phi.ln(), max_relative = 1e-12);
    }

    #[test]
    fn parry_full_shift_is_uniform() {
        let mu = parry_measure(&Subshift::full(4).unwrap()).unwrap();
        for &p in mu.marginal() {
            assert_relative_eq!(p, 0.25, max_relative = 1e-14);
        }
        assert_relative_eq!(mu.entropy(), 4f64.ln(), max_relative = 1e-14);
    }

    #[test]
    fn parry_rejects_identity() {
        let id = Subshift::new(vec![vec![true, false], vec![false, true]]).unwrap();
        assert_eq!(parry_measure(&id), Err(Error::NotPrimitive));
    }

    #[test]
    fn markov_with_equal_rows_is_bernoulli() {
        let q = vec![0.2, 0.5, 0.3];
        let markov = ErgodicMeasure::markov(Subshift::full(3).unwrap(), q.clone(), vec![q.clone(); 3]).unwrap();
        let bern = ErgodicMeasure::bernoulli(q).unwrap();
        assert_relative_eq!(markov.entropy(), bern.entropy(), max_relative = 1e-15);
    }

    #[test]
    fn invalid_markov_rejected() {
        let sft = Subshift::golden_mean();
        // mass on the forbidden 2->2 transition
        let bad = ErgodicMeasure::markov(sft.clone(), vec![0.5, 0.5], vec![vec![0.5, 0.5], vec![0.5, 0.5]]);
        assert!(bad.is_err());
        let not_stationary = ErgodicMeasure::markov(sft, vec![0.5, 0.5], vec![vec![0.5, 0.5], vec![1.0, 0.0]]);
        assert!(not_stationary.is_err());
    }

    #[test]
    fn shannon_mcmillan_concentration() {
        let mu = parry_measure(&Subshift::golden_mean()).unwrap();
        let n = 10_000;
        let samples = 1_000;
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mean: f64 = (0..samples)
            .map(|_| -mu.log_cylinder_measure(&mu.sample_word(&mut rng, n)) / n as f64)
            .sum::<f64>()
            / samples as f64;
        assert!((mean - mu.entropy()).abs() < 5.0 / (n as f64).sqrt(), "mean {mean}");
    }

    #[test]
    fn words_respect_transitions() {
        let sft = Subshift::golden_mean();
        // Fibonacci counts
        let counts: Vec<usize> = (1..=6).map(|n| sft.words(n).len()).collect();
        assert_eq!(counts, vec![2, 3, 5, 8, 13, 21]);
        assert!(sft.words(5).iter().all(|w| sft.is_admissible(w)));
    }

    fn random_primitive() -> impl Strategy<Value = Subshift> {
        (2usize..6).prop_flat_map(|m| {
            proptest::collection::vec(proptest::bool::weighted(0.6), m * m).prop_filter_map("primitive", move |bits| {
                let rows: Vec<Vec<bool>> = bits.chunks(m).map(|c| c.to_vec()).collect();
                Subshift::new(rows).ok().filter(|s| s.is_primitive())
            })
        })
    }

    proptest! {
        #[test]
        fn parry_attains_topological_entropy(sft in random_primitive()) {
            let h_top = sft.topological_entropy().unwrap();
            let h_parry = parry_measure(&sft).unwrap().entropy();
            prop_assert!((h_top - h_parry).abs() < 1e-10);
        }

        #[test]
        fn bernoulli_entropy_bounded_by_log_m(raw in proptest::collection::vec(0.01..1.0f64, 2..7)) {
            let total: f64 = raw.iter().sum();
            let p: Vec<f64> = raw.iter().map(|x| x / total).collect();
            let m = p.len() as f64;
            let h = ErgodicMeasure::bernoulli(p).unwrap().entropy();
            prop_assert!(h <= m.ln() + 1e-12);
        }
    }
}
