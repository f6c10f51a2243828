use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::barnsley::BarnsleySystem;
use crate::error::{invalid, Error, Result};
use crate::points::PointCloud;
use crate::symbolic::sample_index;

/// Orbits passing this close to a partition point are resampled.
pub const AVOIDANCE_RADIUS: f64 = 1e-9;
const CHUNK: usize = 1 << 12;
/// Resampling gives up after this many rejections per requested point.
const MAX_REJECTIONS_PER_POINT: usize = 1000;

/// Points `(x, G(x))` on the graph whose forward orbits stay bounded.
#[derive(Debug, Clone, PartialEq)]
pub struct RepellerCloud {
    pub points: PointCloud,
    /// Orbits discarded for passing near the singularity set or leaving the
    /// images of the branches.
    pub resamples: usize,
    /// Bound on the truncation error of every `G(x)`.
    pub tail_bound: f64,
    pub depth: usize,
}

/// Orbit `x_0, …, x_depth` with branch indices `i_0, …, i_{depth−1}`.
pub(crate) struct Orbit {
    pub xs: Vec<f64>,
    pub branches: Vec<usize>,
}

/// Builds an orbit backwards from a uniform `x_depth` through inverse
/// branches chosen with weight `1/|γ_i|`, so `x_k = f(x_{k−1})` holds to
/// rounding while the orbit never passes through an expanding step.
pub(crate) fn sample_orbit<R: Rng + ?Sized>(system: &BarnsleySystem, rng: &mut R, depth: usize) -> Option<Orbit> {
    let m = system.len();
    let mut xs = vec![0.0; depth + 1];
    let mut branches = vec![0; depth];
    xs[depth] = rng.gen::<f64>();
    let mut weights = vec![0.0; m];
    for k in (0..depth).rev() {
        let y = xs[k + 1];
        for (i, w) in weights.iter_mut().enumerate() {
            let (lo, hi) = system.image(i);
            *w = if y >= lo && y <= hi {
                1.0 / system.branches()[i].gamma.abs()
            } else {
                0.0
            };
        }
        if weights.iter().all(|&w| w == 0.0) {
            return None;
        }
        let i = sample_index(rng, &weights);
        let b = &system.branches()[i];
        let (lo, hi) = system.interval(i);
        xs[k] = ((y - b.v) / b.gamma).clamp(lo, hi);
        branches[k] = i;
    }
    let near_singular = xs
        .iter()
        .any(|x| system.partition().iter().any(|p| (x - p).abs() <= AVOIDANCE_RADIUS));
    (!near_singular).then_some(Orbit { xs, branches })
}

/// `−Σ_{k<n} (a_{i_k}·x_k + t_{i_k}) / (λ_{i_0}⋯λ_{i_k})` over the first `n` steps.
pub(crate) fn graph_value(system: &BarnsleySystem, orbit: &Orbit, n: usize) -> f64 {
    let mut scale = 1.0;
    let mut total = 0.0;
    for k in 0..n {
        let b = &system.branches()[orbit.branches[k]];
        scale /= b.lambda;
        total -= (b.a * orbit.xs[k] + b.t) * scale;
    }
    total
}

/// Bound `C·λ_min^{−depth}` on the dropped tail of the series for `G`.
pub fn tail_bound(system: &BarnsleySystem, depth: usize) -> f64 {
    let bs = system.branches();
    let lambda_min = bs.iter().map(|b| b.lambda.abs()).fold(f64::INFINITY, f64::min);
    let a_max = bs.iter().map(|b| b.a.abs()).fold(0.0, f64::max);
    let t_max = bs.iter().map(|b| b.t.abs()).fold(0.0, f64::max);
    (2.0 * a_max + t_max) / (lambda_min - 1.0) * lambda_min.powi(-(depth as i32))
}

/// Samples `count` points of the repeller, truncating the series for `G` at
/// `depth`. Chunk `k` of the output uses ChaCha8 stream `k` of `seed`.
pub fn repeller_points(system: &BarnsleySystem, count: usize, depth: usize, seed: u64) -> Result<RepellerCloud> {
    if count == 0 || depth == 0 {
        return invalid("count and depth must be positive");
    }
    let chunks = count.div_ceil(CHUNK);
    let parts: Vec<Result<(Vec<f64>, usize)>> = (0..chunks)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            let len = CHUNK.min(count - k * CHUNK);
            let mut coords = Vec::with_capacity(2 * len);
            let mut rejected = 0;
            while coords.len() < 2 * len {
                match sample_orbit(system, &mut rng, depth) {
                    Some(orbit) => {
                        coords.push(orbit.xs[0]);
                        coords.push(graph_value(system, &orbit, depth));
                    }
                    None => {
                        rejected += 1;
                        if rejected > MAX_REJECTIONS_PER_POINT * len {
                            return Err(Error::InsufficientSamples(format!(
                                "{rejected} orbits rejected while sampling {len} points"
                            )));
                        }
                    }
                }
            }
            Ok((coords, rejected))
        })
        .collect();
    let mut coords = Vec::with_capacity(2 * count);
    let mut resamples = 0;
    for part in parts {
        let (c, r) = part?;
        coords.extend(c);
        resamples += r;
    }
    Ok(RepellerCloud {
        points: PointCloud::new(2, coords)?,
        resamples,
        tail_bound: tail_bound(system, depth),
        depth,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::barnsley::fixtures::*;

    #[test]
    fn zero_fibre_maps_give_zero_graph() {
        let sys = BarnsleySystem::doubling([1.5; 2], [0.0; 2], [0.0; 2]).unwrap();
        let cloud = repeller_points(&sys, 1000, 40, 1).unwrap();
        assert!(cloud.points.iter().all(|p| p[1] == 0.0 && (0.0..=1.0).contains(&p[0])));
    }

    #[test]
    fn fixed_point_value() {
        let sys = BarnsleySystem::doubling([1.5, 1.7], [0.4, 0.2], [0.3, -0.2]).unwrap();
        let depth = 80;
        let orbit = Orbit {
            xs: vec![0.0; depth + 1],
            branches: vec![0; depth],
        };
        let g = graph_value(&sys, &orbit, depth);
        assert!((g - 0.3 / (1.0 - 1.5)).abs() <= tail_bound(&sys, depth));
    }

    #[test]
    fn truncation_within_tail_bound() {
        let sys = golden([1.2, 1.4], [0.3, -0.2], [0.0, 0.1]);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let bound = tail_bound(&sys, 30);
        let mut checked = 0;
        while checked < 1000 {
            let Some(orbit) = sample_orbit(&sys, &mut rng, 60) else { continue };
            let diff = (graph_value(&sys, &orbit, 30) - graph_value(&sys, &orbit, 60)).abs();
            assert!(diff <= bound, "{diff} > {bound}");
            checked += 1;
        }
    }

    #[test]
    fn graph_is_invariant() {
        let sys = non_markov([1.2, 1.3], [0.2, 0.1], [0.0, 0.3]);
        let depth = 120;
        let bound = tail_bound(&sys, depth - 1);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..500 {
            let Some(orbit) = sample_orbit(&sys, &mut rng, depth) else { continue };
            let x = orbit.xs[0];
            let b = &sys.branches()[orbit.branches[0]];
            assert!((sys.base_map(x).unwrap() - orbit.xs[1]).abs() < 1e-12);
            let image = b.a * x + b.lambda * graph_value(&sys, &orbit, depth) + b.t;
            let shifted = Orbit {
                xs: orbit.xs[1..].to_vec(),
                branches: orbit.branches[1..].to_vec(),
            };
            let expected = graph_value(&sys, &shifted, depth - 1);
            assert!((image - expected).abs() <= b.lambda.abs() * bound + 1e-12);
        }
    }

    #[test]
    fn cloud_is_reproducible() {
        let sys = BarnsleySystem::doubling([2f64.sqrt(); 2], [0.5, -0.3], [0.1, 0.2]).unwrap();
        let a = repeller_points(&sys, 10_000, 50, 3).unwrap();
        assert_eq!(a, repeller_points(&sys, 10_000, 50, 3).unwrap());
        assert_eq!(a.points.len(), 10_000);
        assert!(a.tail_bound < 1e-6);
    }

    #[test]
    fn doubling_base_samples_are_uniform() {
        let sys = BarnsleySystem::doubling([2f64.sqrt(); 2], [0.5, -0.3], [0.1, 0.2]).unwrap();
        let cloud = repeller_points(&sys, 100_000, 40, 4).unwrap();
        let mut bins = [0usize; 10];
        for p in cloud.points.iter() {
            bins[((p[0] * 10.0) as usize).min(9)] += 1;
        }
        assert!(bins.iter().all(|&b| (b as f64 - 10_000.0).abs() < 500.0), "{bins:?}");
    }
}
