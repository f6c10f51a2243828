use std::fmt::Write as _;

use num_rational::Ratio;
use num_traits::{CheckedAdd, CheckedMul};
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::selfsimilar::SimilarIfs;

/// Largest number of words enumerated at one level.
pub const DELTA_BUDGET: u128 = 10_000_000;
/// Relative tolerance for float comparison of derivatives and values.
const FLOAT_TOL: f64 = 1e-12;

/// Minimal gap `Δ_n` at one level.
#[derive(Debug, Clone, PartialEq)]
pub struct SeparationLevel {
    pub n: usize,
    /// `+∞` when no two words share a derivative.
    pub delta: f64,
    pub exact_overlap: bool,
    /// `−(1/n)·log Δ_n`, defined when `0 < Δ_n < ∞`.
    pub rate: Option<f64>,
}

/// `Δ_k` for `k = 1..=n`.
#[derive(Debug, Clone, PartialEq)]
pub struct SeparationReport {
    pub levels: Vec<SeparationLevel>,
    /// Whether comparisons were done in exact rational arithmetic.
    pub exact_arithmetic: bool,
}

impl SeparationReport {
    pub fn last(&self) -> &SeparationLevel {
        self.levels.last().expect("at least one level")
    }

    pub fn delta(&self) -> f64 {
        self.last().delta
    }

    pub fn exact_overlap(&self) -> bool {
        self.levels.iter().any(|l| l.exact_overlap)
    }

    pub fn rates(&self) -> Vec<Option<f64>> {
        self.levels.iter().map(|l| l.rate).collect()
    }

    /// CSV `n,delta,rate`; an undefined rate is left empty.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,delta,rate\n");
        for l in &self.levels {
            let rate = l.rate.map(|r| r.to_string()).unwrap_or_default();
            writeln!(out, "{},{},{}", l.n, l.delta, rate).unwrap();
        }
        out
    }
}

type Exact = Ratio<i128>;

/// Composed maps `S_ω(x) = a_ω·x + b_ω` for all words of one length, in lex order.
enum Level {
    Float(Vec<(f64, f64)>),
    Exact(Vec<(Exact, Exact)>),
}

fn overflow() -> Error {
    Error::Invalid("exact arithmetic overflowed; give the parameters as decimals instead".into())
}

impl Level {
    fn first(ifs: &SimilarIfs) -> Level {
        match ifs.exact() {
            Some(params) => Level::Exact(params.to_vec()),
            None => Level::Float(
                ifs.maps()
                    .iter()
                    .map(|m| (m.ratio() * m.orthogonal()[(0, 0)], m.translation()[0]))
                    .collect(),
            ),
        }
    }

    fn extend(&self, ifs: &SimilarIfs) -> Result<Level> {
        // S_{ωi}(x) = a_ω·(a_i·x + b_i) + b_ω
        Ok(match self {
            Level::Float(prev) => {
                let base = match Level::first(ifs) {
                    Level::Float(b) => b,
                    Level::Exact(_) => unreachable!(),
                };
                Level::Float(
                    prev.par_iter()
                        .flat_map_iter(|&(a, b)| base.iter().map(move |&(ai, bi)| (a * ai, a * bi + b)))
                        .collect(),
                )
            }
            Level::Exact(prev) => {
                let base = ifs.exact().unwrap();
                let next: Option<Vec<(Exact, Exact)>> = prev
                    .par_iter()
                    .flat_map_iter(|(a, b)| {
                        base.iter().map(move |(ai, bi)| {
                            Some((a.checked_mul(ai)?, a.checked_mul(bi)?.checked_add(b)?))
                        })
                    })
                    .collect();
                Level::Exact(next.ok_or_else(overflow)?)
            }
        })
    }

    /// Minimal value gap among words with equal derivative, and the
    /// lex-smallest pair of distinct words with identical maps.
    fn analyse(&self) -> (f64, Option<(usize, usize)>) {
        match self {
            Level::Float(maps) => {
                let mut order: Vec<usize> = (0..maps.len()).collect();
                order.par_sort_unstable_by(|&i, &j| {
                    maps[i].0.total_cmp(&maps[j].0).then(maps[i].1.total_cmp(&maps[j].1)).then(i.cmp(&j))
                });
                let close = |x: f64, y: f64| (x - y).abs() <= FLOAT_TOL * x.abs().max(y.abs()).max(1.0);
                let mut delta = f64::INFINITY;
                let mut witness: Option<(usize, usize)> = None;
                let mut start = 0;
                while start < order.len() {
                    let a0 = maps[order[start]].0;
                    let mut end = start + 1;
                    while end < order.len() && close(maps[order[end]].0, a0) {
                        end += 1;
                    }
                    let mut group: Vec<usize> = order[start..end].to_vec();
                    group.sort_by(|&i, &j| maps[i].1.total_cmp(&maps[j].1).then(i.cmp(&j)));
                    let mut k = 0;
                    while k + 1 < group.len() {
                        let (i, j) = (group[k], group[k + 1]);
                        let gap = (maps[j].1 - maps[i].1).abs();
                        if close(maps[i].1, maps[j].1) {
                            delta = 0.0;
                            // Among words sharing one map, the two smallest indices.
                            let mut tie: Vec<usize> = vec![i];
                            let mut l = k + 1;
                            while l < group.len() && close(maps[group[l]].1, maps[i].1) {
                                tie.push(group[l]);
                                l += 1;
                            }
                            tie.sort_unstable();
                            let pair = (tie[0], tie[1]);
                            witness = Some(witness.map_or(pair, |w| w.min(pair)));
                            k = l;
                            continue;
                        }
                        delta = delta.min(gap);
                        k += 1;
                    }
                    start = end;
                }
                (delta, witness)
            }
            Level::Exact(maps) => {
                let mut order: Vec<usize> = (0..maps.len()).collect();
                order.par_sort_unstable_by(|&i, &j| maps[i].cmp(&maps[j]).then(i.cmp(&j)));
                let mut delta = f64::INFINITY;
                let mut witness: Option<(usize, usize)> = None;
                for w in order.windows(2) {
                    let (x, y) = (&maps[w[0]], &maps[w[1]]);
                    if x.0 != y.0 {
                        continue;
                    }
                    if x.1 == y.1 {
                        delta = 0.0;
                        // Ties are ordered by index, so this is the group's smallest pair
                        // whenever w[0] opens the group.
                        let pair = (w[0], w[1]);
                        witness = Some(witness.map_or(pair, |p| p.min(pair)));
                    } else {
                        let gap = super::ratio_to_f64(&(y.1 - x.1));
                        delta = delta.min(gap);
                    }
                }
                (delta, witness)
            }
        }
    }
}

fn check_line(ifs: &SimilarIfs) -> Result<()> {
    if ifs.dim() != 1 {
        return invalid("separation is only computed for systems on the line");
    }
    Ok(())
}

fn check_level_budget(m: usize, n: usize) -> Result<()> {
    let words = |k: usize| (m as u128).saturating_pow(k as u32);
    if words(n) > DELTA_BUDGET {
        let suggested_n = (1..n).rev().find(|&k| words(k) <= DELTA_BUDGET).unwrap_or(1);
        return Err(Error::BudgetExceeded {
            requested: words(n),
            budget: DELTA_BUDGET,
            suggested_n,
        });
    }
    Ok(())
}

/// `Δ_k = min |S_ω(0) − S_τ(0)|` over distinct words of length `k` with equal
/// derivative, for `k = 1..=n`. Parameters given as rationals are compared
/// exactly; otherwise with relative tolerance 1e-12.
pub fn separation_delta(ifs: &SimilarIfs, n: usize) -> Result<SeparationReport> {
    check_line(ifs)?;
    if n == 0 {
        return invalid("level must be positive");
    }
    check_level_budget(ifs.len(), n)?;
    let mut levels = Vec::with_capacity(n);
    let mut level = Level::first(ifs);
    for k in 1..=n {
        if k > 1 {
            level = level.extend(ifs)?;
        }
        let (delta, witness) = level.analyse();
        let rate = (delta > 0.0 && delta.is_finite()).then(|| -delta.ln() / k as f64);
        levels.push(SeparationLevel {
            n: k,
            delta,
            exact_overlap: witness.is_some(),
            rate,
        });
    }
    Ok(SeparationReport {
        levels,
        exact_arithmetic: ifs.exact().is_some(),
    })
}

fn decode(mut index: usize, m: usize, n: usize) -> Vec<usize> {
    let mut word = vec![0; n];
    for slot in word.iter_mut().rev() {
        *slot = index % m;
        index /= m;
    }
    word
}

/// Shortest, then lex-smallest, pair of distinct words with identical
/// composed maps, searching lengths `1..=n_max`.
pub fn exact_overlap_search(ifs: &SimilarIfs, n_max: usize) -> Result<Option<(Vec<usize>, Vec<usize>)>> {
    check_line(ifs)?;
    check_level_budget(ifs.len(), n_max.max(1))?;
    let mut level = Level::first(ifs);
    for k in 1..=n_max {
        if k > 1 {
            level = level.extend(ifs)?;
        }
        if let (_, Some((i, j))) = level.analyse() {
            return Ok(Some((decode(i, ifs.len(), k), decode(j, ifs.len(), k))));
        }
    }
    Ok(None)
}
