use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::symbolic::sample_index;

/// Random-iteration steps discarded before a chunk starts emitting points.
pub const BURN_IN: usize = 100;
/// Points per independent RNG stream; fixed so output ignores worker count.
const CHUNK: usize = 1 << 14;

/// Points in `ℝ^d`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    dim: usize,
    coords: Vec<f64>,
}

impl PointCloud {
    pub fn new(dim: usize, coords: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return invalid("point dimension must be positive");
        }
        if !coords.len().is_multiple_of(dim) {
            return invalid("coordinate count is not a multiple of the dimension");
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return invalid("point coordinates must be finite");
        }
        Ok(PointCloud { dim, coords })
    }

    pub fn from_points(points: &[Vec<f64>]) -> Result<Self> {
        let Some(first) = points.first() else {
            return invalid("empty point list");
        };
        let dim = first.len();
        if points.iter().any(|p| p.len() != dim) {
            return invalid("points have mixed dimensions");
        }
        Self::new(dim, points.concat())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.dim)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// CSV with header `x`, `x,y` or `x,y,z`; higher dimensions use `x1,…,xd`.
    pub fn to_csv(&self) -> String {
        let header = match self.dim {
            1 => "x".to_string(),
            2 => "x,y".to_string(),
            3 => "x,y,z".to_string(),
            d => (1..=d).map(|k| format!("x{k}")).collect::<Vec<_>>().join(","),
        };
        let mut out = header;
        out.push('\n');
        for p in self.iter() {
            for (k, c) in p.iter().enumerate() {
                if k > 0 {
                    out.push(',');
                }
                write!(out, "{c}").unwrap();
            }
            out.push('\n');
        }
        out
    }
}

/// Random iteration of the maps `apply(i, x, out)` chosen with `weights`.
/// Chunk `k` uses stream `k` of a ChaCha8 generator seeded with `seed` and
/// starts afresh from `start` with its own burn-in.
pub(crate) fn chaos_game<F>(start: &[f64], count: usize, seed: u64, weights: &[f64], apply: F) -> PointCloud
where
    F: Fn(usize, &[f64], &mut [f64]) + Sync,
{
    let dim = start.len();
    let chunks = count.div_ceil(CHUNK);
    let parts: Vec<Vec<f64>> = (0..chunks)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            let len = CHUNK.min(count - k * CHUNK);
            let mut x = start.to_vec();
            let mut y = vec![0.0; dim];
            let mut out = Vec::with_capacity(len * dim);
            for step in 0..BURN_IN + len {
                apply(sample_index(&mut rng, weights), &x, &mut y);
                std::mem::swap(&mut x, &mut y);
                if step >= BURN_IN {
                    out.extend_from_slice(&x);
                }
            }
            out
        })
        .collect();
    PointCloud {
        dim,
        coords: parts.concat(),
    }
}
