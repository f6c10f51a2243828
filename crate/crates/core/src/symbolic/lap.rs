use crate::error::{invalid, Error, Result};

const PARTITION_TOL: f64 = 1e-12;
const LENGTH_EPS: f64 = 1e-12;

/// `x ↦ slope · x + intercept` on `[lo, hi)` (the last branch is closed).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineBranch {
    pub lo: f64,
    pub hi: f64,
    pub slope: f64,
    pub intercept: f64,
}

impl AffineBranch {
    fn eval(&self, x: f64) -> f64 {
        self.slope * x + self.intercept
    }
}

/// Piecewise-affine self-map of `[0, 1]` on a finite partition.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseAffineMap {
    branches: Vec<AffineBranch>,
}

impl PiecewiseAffineMap {
    pub fn new(mut branches: Vec<AffineBranch>) -> Result<Self> {
        if branches.is_empty() {
            return invalid("map needs at least one branch");
        }
        branches.sort_by(|a, b| a.lo.total_cmp(&b.lo));
        for b in &branches {
            if !(b.hi > b.lo) || !b.slope.is_finite() || !b.intercept.is_finite() || b.slope == 0.0 {
                return invalid(format!("degenerate branch on [{}, {}]", b.lo, b.hi));
            }
        }
        if branches[0].lo.abs() > PARTITION_TOL {
            return Err(Error::OverlappingPartition { at: 0.0 });
        }
        if (branches.last().unwrap().hi - 1.0).abs() > PARTITION_TOL {
            return Err(Error::OverlappingPartition { at: 1.0 });
        }
        for w in branches.windows(2) {
            if (w[0].hi - w[1].lo).abs() > PARTITION_TOL {
                return Err(Error::OverlappingPartition { at: w[1].lo });
            }
        }
        for b in &branches {
            let (a, c) = (b.eval(b.lo), b.eval(b.hi));
            if a.min(c) < -PARTITION_TOL || a.max(c) > 1.0 + PARTITION_TOL {
                return invalid(format!("branch on [{}, {}] maps outside [0, 1]", b.lo, b.hi));
            }
        }
        Ok(PiecewiseAffineMap { branches })
    }

    /// Builds the map from breakpoints `0 = x₀ < … < x_m = 1` and per-branch
    /// `(slope, intercept)`.
    pub fn from_partition(points: &[f64], coefficients: &[(f64, f64)]) -> Result<Self> {
        if points.len() != coefficients.len() + 1 {
            return invalid("need one more partition point than branches");
        }
        let branches = coefficients
            .iter()
            .enumerate()
            .map(|(i, &(slope, intercept))| AffineBranch {
                lo: points[i],
                hi: points[i + 1],
                slope,
                intercept,
            })
            .collect();
        PiecewiseAffineMap::new(branches)
    }

    pub fn branches(&self) -> &[AffineBranch] {
        &self.branches
    }
}

#[derive(Clone, Copy)]
struct Piece {
    lo: f64,
    hi: f64,
    slope: f64,
    intercept: f64,
}

impl Piece {
    fn eval(&self, x: f64) -> f64 {
        self.slope * x + self.intercept
    }
}

/// Number of maximal monotonicity intervals of `Tⁿ`, by propagating the
/// affine pieces of the iterates through the partition.
pub fn lap_number(map: &PiecewiseAffineMap, n: usize) -> Result<u64> {
    if n == 0 {
        return invalid("iterate count must be positive");
    }
    let mut pieces: Vec<Piece> = map
        .branches
        .iter()
        .map(|b| Piece {
            lo: b.lo,
            hi: b.hi,
            slope: b.slope,
            intercept: b.intercept,
        })
        .collect();
    for _ in 1..n {
        let mut next = Vec::with_capacity(pieces.len() * 2);
        for p in &pieces {
            let (ya, yb) = (p.eval(p.lo), p.eval(p.hi));
            let (img_lo, img_hi) = (ya.min(yb), ya.max(yb));
            for b in &map.branches {
                let lo = img_lo.max(b.lo);
                let hi = img_hi.min(b.hi);
                if hi - lo <= LENGTH_EPS {
                    continue;
                }
                let (xa, xb) = ((lo - p.intercept) / p.slope, (hi - p.intercept) / p.slope);
                next.push(Piece {
                    lo: xa.min(xb),
                    hi: xa.max(xb),
                    slope: b.slope * p.slope,
                    intercept: b.slope * p.intercept + b.intercept,
                });
            }
        }
        next.sort_by(|a, b| a.lo.total_cmp(&b.lo));
        pieces = next;
    }
    let mut laps = 0u64;
    let mut prev: Option<Piece> = None;
    for p in pieces {
        let joins = prev.is_some_and(|q| {
            let contiguous = (q.hi - p.lo).abs() <= PARTITION_TOL;
            let same_direction = q.slope.signum() == p.slope.signum();
            let (end, start) = (q.eval(q.hi), p.eval(p.lo));
            let monotone = if p.slope > 0.0 {
                end <= start + PARTITION_TOL
            } else {
                end >= start - PARTITION_TOL
            };
            contiguous && same_direction && monotone
        });
        if !joins {
            laps += 1;
        }
        prev = Some(p);
    }
    Ok(laps)
}

/// `(1/n) · log ℓ(Tⁿ)` at `n = n_max`.
pub fn lap_entropy(map: &PiecewiseAffineMap, n_max: usize) -> Result<f64> {
    Ok((lap_number(map, n_max)? as f64).ln() / n_max as f64)
}
