//! Cross-module properties on randomly drawn systems.

use nalgebra::DMatrix;
use proptest::prelude::*;
use skewdim::barnsley::{barnsley_dimension, BarnsleySystem, Branch, HofbauerModel};
use skewdim::selfaffine::{lyapunov_dimension, lyapunov_dimension_expanding};
use skewdim::selfsimilar::similarity_dimension;
use skewdim::thermo::{affinity_dimension, bisect_decreasing};

/// Two full branches over `{0, 1/γ₁, 1}`.
fn full_branch(gamma1: f64, lambda: [f64; 2], a: [f64; 2]) -> BarnsleySystem {
    let gamma2 = 1.0 / (1.0 - 1.0 / gamma1);
    BarnsleySystem::new(
        vec![0.0, 1.0 / gamma1, 1.0],
        vec![
            Branch { gamma: gamma1, v: 0.0, a: a[0], lambda: lambda[0], t: 0.0 },
            Branch { gamma: gamma2, v: -gamma2 / gamma1, a: a[1], lambda: lambda[1], t: 0.1 },
        ],
    )
    .unwrap()
}

/// Zero of `Σ φ^s(branch)` for two full branches, from the closed-form potential.
fn moran_zero(gamma: [f64; 2], lambda: [f64; 2]) -> f64 {
    let f = |s: f64| {
        let total: f64 = (0..2)
            .map(|i| if s <= 1.0 { lambda[i].powf(-s) } else { 1.0 / (lambda[i] * gamma[i].powf(s - 1.0)) })
            .sum();
        total.ln()
    };
    bisect_decreasing(f, 0.0, 2.0, 1e-13).unwrap().midpoint()
}

fn system_params() -> impl Strategy<Value = (f64, [f64; 2], [f64; 2])> {
    (1.3f64..4.0, 0.05f64..0.95, 0.05f64..0.95, -1.0f64..1.0, -1.0f64..1.0).prop_map(|(g1, u1, u2, a1, a2)| {
        let g2 = 1.0 / (1.0 - 1.0 / g1);
        let lam = |g: f64, u: f64| 1.0 + u * (g - 1.0);
        (g1, [lam(g1, u1), lam(g2, u2)], [a1, a2])
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn full_branch_dimension_matches_closed_form((g1, lambda, a) in system_params()) {
        let system = full_branch(g1, lambda, a);
        let gamma = [system.branches()[0].gamma, system.branches()[1].gamma];
        let report = barnsley_dimension(&system, 3).unwrap();
        prop_assert!((report.value() - moran_zero(gamma, lambda)).abs() < 1e-8);
        prop_assert!(report.markov);
    }

    #[test]
    fn lyapunov_dimensions_never_exceed_the_pressure_zero((g1, lambda, a) in system_params()) {
        let system = full_branch(g1, lambda, a);
        let s0 = barnsley_dimension(&system, 3).unwrap().value();
        let b = system.branches();
        let mut best: f64 = 0.0;
        for k in 1..200 {
            let q = k as f64 / 200.0;
            let p = [q, 1.0 - q];
            let h = -p.iter().map(|x| x * x.ln()).sum::<f64>();
            let chi = [0, 1].map(|j| p[0] * [b[0].gamma, b[0].lambda][j].ln() + p[1] * [b[1].gamma, b[1].lambda][j].ln());
            let d = lyapunov_dimension_expanding(h, &chi).unwrap().value;
            prop_assert!(d <= s0 + 1e-9, "q = {q}: {d} > {s0}");
            best = best.max(d);
        }
        prop_assert!(s0 - best < 1e-2);
    }

    #[test]
    fn projected_measure_dimension_is_entropy_over_base_rate((g1, lambda, a) in system_params(), q in 0.01f64..0.99) {
        let system = full_branch(g1, lambda, a);
        let b = system.branches();
        let p = [q, 1.0 - q];
        let h = -p.iter().map(|x| x * x.ln()).sum::<f64>();
        let chi_x = p[0] * b[0].gamma.ln() + p[1] * b[1].gamma.ln();
        let d = lyapunov_dimension_expanding(h, &[chi_x]).unwrap();
        prop_assert!(h <= chi_x + 1e-12);
        prop_assert!((d.value - h / chi_x).abs() < 1e-12);
    }

    #[test]
    fn hofbauer_bounds_are_ordered_and_decreasing(
        (g1, lambda, a) in system_params(),
        s in 0.0f64..2.0,
    ) {
        let model = HofbauerModel::new(&full_branch(g1, lambda, a), 2).unwrap();
        let (lo, hi) = model.bounds(s).unwrap();
        let (lo2, hi2) = model.bounds((s + 0.01).min(2.0)).unwrap();
        prop_assert!(lo <= hi && lo2 <= lo + 1e-12 && hi2 <= hi + 1e-12);
    }

    #[test]
    fn equal_diagonal_copies_agree_with_lyapunov(m in 2usize..8, x in 0.1f64..0.6, y in 0.1f64..0.6) {
        let (big, small) = (x.max(y), x.min(y));
        prop_assume!(big - small > 1e-3);
        let ms = vec![DMatrix::from_row_slice(2, 2, &[x, 0.0, 0.0, y]); m];
        let affinity = affinity_dimension(&ms).unwrap();
        let lyap = lyapunov_dimension((m as f64).ln(), &[big.ln(), small.ln()]).unwrap();
        prop_assert!((affinity.value() - lyap.value).abs() < 1e-6);
    }

    #[test]
    fn similarity_roots_solve_the_moran_equation(r in prop::collection::vec(0.05f64..0.9, 1..8)) {
        let s = similarity_dimension(&r).unwrap();
        let total: f64 = r.iter().map(|x| x.powf(s)).sum();
        prop_assert!((total - 1.0).abs() < 1e-9);
    }
}
