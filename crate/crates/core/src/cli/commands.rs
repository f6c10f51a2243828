use std::fmt::Write as _;

use super::spec::{AffineSystem, SftSystem, SimilarSystem};
use super::{Artifact, CliError, Command, Flags, Kind, Outcome, SpecFile, System};
use crate::barnsley::{
    barnsley_dimension, classify_diagonality, repeller_points, BarnsleySystem, HofbauerModel,
    DEFAULT_SEARCH_DEPTH,
};
use crate::estimators::{box_count, dimension_crosscheck, dyadic_scales};
use crate::linalg::singular_values;
use crate::points::PointCloud;
use crate::selfaffine::{bhr_conditions, lyapunov_dimension, lyapunov_exponents, AffineIfs};
use crate::selfsimilar::{
    attractor_points_weighted, exact_overlap_search, separation_delta, similarity_dimension, simdim_measure,
    SimilarIfs, DELTA_BUDGET,
};
use crate::symbolic::{lap_entropy, parry_measure, ErgodicMeasure, PiecewiseAffineMap};
use crate::thermo::{
    bisect_decreasing, determinant_pressure, gibbs_markov_measure, s_grid, spectral_pressure, subadditive_pressure,
    AffinityOptions, Potential, PressureCurve, RootBracket, GIBBS_CHECK_LEVELS,
};

const DEFAULT_POINTS: usize = 100_000;
const DEFAULT_STEPS: usize = 10_000;
const DEFAULT_TRIALS: usize = 100;
const DEFAULT_N_MAX: usize = 6;
const DEFAULT_DEPTH: usize = 60;
const DEFAULT_LAP_ITERATES: usize = 12;
const DEFAULT_CROSSCHECK_TOL: f64 = 0.05;
/// Products enumerated by default for the subadditive pressure curve.
const CURVE_PRODUCT_BUDGET: u128 = 1_000_000;

/// Flag values resolved against the task section and the defaults.
struct Settings<'a> {
    flags: &'a Flags,
    spec: &'a SpecFile,
}

impl Settings<'_> {
    fn seed(&self) -> u64 {
        self.flags.seed.or(self.spec.task.seed).unwrap_or(0)
    }

    fn n(&self) -> Option<usize> {
        self.flags.n.or(self.spec.task.n)
    }

    fn n_max(&self) -> usize {
        self.flags.n_max.or(self.spec.task.n_max).unwrap_or(DEFAULT_N_MAX)
    }

    fn points(&self) -> Option<usize> {
        self.flags.points.or(self.spec.task.count)
    }

    fn tol(&self) -> Option<f64> {
        self.flags.tol.or(self.spec.task.tolerance)
    }

    fn depth(&self) -> usize {
        self.spec.task.depth.unwrap_or(DEFAULT_DEPTH)
    }

    fn s_grid(&self, default_hi: f64) -> Result<Vec<f64>, CliError> {
        let (text, path) = match (&self.flags.s_grid, &self.spec.task.s_grid) {
            (Some(t), _) => (t.clone(), "--s-grid"),
            (None, Some(t)) => (t.clone(), "task.s_grid"),
            (None, None) => return Ok(s_grid(0.0, default_hi, 0.05)?),
        };
        let parts: Vec<f64> = text
            .split(':')
            .map(|p| p.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| CliError::validation(Some(path.into()), format!("expected LO:HI:STEP, found `{text}`")))?;
        if parts.len() != 3 {
            return Err(CliError::validation(Some(path.into()), format!("expected LO:HI:STEP, found `{text}`")));
        }
        s_grid(parts[0], parts[1], parts[2]).map_err(|e| CliError::from(e).at(path.into()))
    }
}

fn wrong_kind(command: &str, found: Kind, expected: &str) -> CliError {
    CliError::validation(Some("kind".into()), format!("`{command}` needs kind {expected}, found `{found}`"))
}

fn need_maps<'a>(s: &'a SimilarSystem, command: &str) -> Result<&'a SimilarIfs, CliError> {
    s.ifs
        .as_ref()
        .ok_or_else(|| CliError::validation(Some("system.maps".into()), format!("`{command}` needs the maps, not only ratios")))
}

fn uniform(m: usize) -> Vec<f64> {
    vec![1.0 / m as f64; m]
}

fn bernoulli(weights: Option<&[f64]>, m: usize) -> Result<ErgodicMeasure, CliError> {
    let p = weights.map(<[f64]>::to_vec).unwrap_or_else(|| uniform(m));
    if p.len() != m {
        return Err(CliError::validation(
            Some("system.weights".into()),
            format!("expected {m} weights, found {}", p.len()),
        ));
    }
    ErgodicMeasure::bernoulli(p).map_err(|e| CliError::from(e).at("system.weights".into()))
}

/// Largest level `n ≤ cap` with `m^n` within `budget`.
fn level_within(m: usize, budget: u128, cap: usize) -> usize {
    let mut n = 1;
    while n < cap && (m as u128).checked_pow(n as u32 + 1).is_some_and(|c| c <= budget) {
        n += 1;
    }
    n
}

fn bracket(b: &RootBracket) -> String {
    format!("[{:.10}, {:.10}]", b.lo, b.hi)
}

fn csv(name: &str, contents: String) -> Artifact {
    Artifact {
        name: name.into(),
        contents,
    }
}

pub(super) fn dispatch(command: &Command, spec: &SpecFile, flags: &Flags) -> Result<Outcome, CliError> {
    let settings = Settings { flags, spec };
    let kind = spec.system.kind();
    match (command, &spec.system) {
        (Command::Simdim { .. }, System::Similar(s)) => simdim(s),
        (Command::Simdim { .. }, _) => Err(wrong_kind("simdim", kind, "`similar`")),
        (Command::Affdim { .. }, System::Affine(a)) => affdim(&a.ifs.linear_parts(), Some(&a.ifs), &settings),
        (Command::Affdim { .. }, System::Similar(s)) => affdim(&need_maps(s, "affdim")?.linear_parts(), None, &settings),
        (Command::Affdim { .. }, _) => Err(wrong_kind("affdim", kind, "`affine` or `similar`")),
        (Command::Lyapdim { .. }, System::Affine(a)) => lyapdim(&a.ifs.linear_parts(), a.weights.as_deref(), &settings),
        (Command::Lyapdim { .. }, System::Similar(s)) => {
            lyapdim(&need_maps(s, "lyapdim")?.linear_parts(), s.weights.as_deref(), &settings)
        }
        (Command::Lyapdim { .. }, _) => Err(wrong_kind("lyapdim", kind, "`affine` or `similar`")),
        (Command::BarnsleyDim { .. }, System::Barnsley(b)) => barnsley_dim(b, &settings),
        (Command::BarnsleyDim { .. }, _) => Err(wrong_kind("barnsley-dim", kind, "`barnsley`")),
        (Command::PressureCurve { .. }, system) => pressure_curve(system, &settings),
        (Command::Hesc { .. }, System::Similar(s)) => hesc(need_maps(s, "hesc")?, &settings),
        (Command::Hesc { .. }, _) => Err(wrong_kind("hesc", kind, "`similar`")),
        (Command::Entropy { .. }, system) => entropy(system, &settings),
        (Command::Boxcount { .. }, System::Sft(_)) => Err(wrong_kind("boxcount", kind, "`similar`, `affine` or `barnsley`")),
        (Command::Boxcount { .. }, system) => boxcount(system, &settings),
        (Command::Validate { .. }, system) => validate(system),
    }
}

fn simdim(s: &SimilarSystem) -> Result<Outcome, CliError> {
    let mut report = String::new();
    let dim = similarity_dimension(&s.ratios)?;
    writeln!(report, "similarity dimension: {dim:.6} (bisection bracket width <= 1e-12)").unwrap();
    if let Some(p) = &s.weights {
        let d = simdim_measure(&s.ratios, p).map_err(|e| CliError::from(e).at("system.weights".into()))?;
        writeln!(report, "dimension of the weighted measure: {d:.6} (closed form)").unwrap();
    }
    if let Some(ifs) = &s.ifs {
        if ifs.dim() == 1 {
            let disjoint = ifs.first_level_images_disjoint()?;
            writeln!(
                report,
                "first-level images {}",
                if disjoint { "pairwise disjoint: the value is the Hausdorff dimension" } else { "overlap: the value is an upper bound" }
            )
            .unwrap();
        }
    }
    Ok(Outcome {
        report,
        artifacts: vec![],
    })
}

fn affdim(matrices: &[nalgebra::DMatrix<f64>], affine: Option<&AffineIfs>, settings: &Settings) -> Result<Outcome, CliError> {
    let mut options = AffinityOptions::default();
    if let Some(n) = settings.n() {
        options.max_level = n;
    }
    if let Some(t) = settings.tol() {
        options.tolerance = t;
    }
    let r = crate::thermo::affinity_dimension_with(matrices, &options)?;
    let mut report = String::new();
    writeln!(report, "affinity dimension: {:.10} bracket {}", r.value(), bracket(&r.bracket)).unwrap();
    writeln!(
        report,
        "certified range: [{:.10}, {:.10}]",
        r.certified_lower, r.certified_upper
    )
    .unwrap();
    writeln!(
        report,
        "levels used: {} ({})",
        r.levels_used,
        if r.converged { "level roots agree within the tolerance" } else { "level roots still moving" }
    )
    .unwrap();
    if let Some(ifs) = affine.filter(|i| i.dim() == 2) {
        report.push_str(bhr_conditions(ifs)?.summary().trim_end());
        report.push('\n');
    }
    let mut levels = String::from("n,root\n");
    for (k, root) in r.level_roots.iter().enumerate() {
        writeln!(levels, "{},{root}", k + 1).unwrap();
    }
    Ok(Outcome {
        report,
        artifacts: vec![csv("affinity_levels.csv", levels)],
    })
}

fn lyapdim(matrices: &[nalgebra::DMatrix<f64>], weights: Option<&[f64]>, settings: &Settings) -> Result<Outcome, CliError> {
    let measure = bernoulli(weights, matrices.len())?;
    let steps = settings.n().unwrap_or(DEFAULT_STEPS);
    let trials = settings.spec.task.trials.unwrap_or(DEFAULT_TRIALS);
    let spectrum = lyapunov_exponents(matrices, &measure, steps, trials, settings.seed())?;
    let dim = lyapunov_dimension(spectrum.entropy, &spectrum.exponents)?;
    let mut report = String::new();
    writeln!(report, "entropy: {:.10}", spectrum.entropy).unwrap();
    for (k, (chi, se)) in spectrum.exponents.iter().zip(&spectrum.stderr).enumerate() {
        if spectrum.closed_form {
            writeln!(report, "chi_{}: {chi:.10} (closed form)", k + 1).unwrap();
        } else {
            writeln!(report, "chi_{}: {chi:.10} ± {se:.2e} (standard error over {trials} trials)", k + 1).unwrap();
        }
    }
    if spectrum.closed_form {
        writeln!(report, "Lyapunov dimension: {:.10} (closed form)", dim.value).unwrap();
    } else {
        // The dimension increases with every exponent, so shifting all of
        // them by two standard errors brackets it.
        let shifted = |sign: f64| -> Option<f64> {
            let mut e: Vec<f64> = spectrum.exponents.iter().zip(&spectrum.stderr).map(|(c, s)| c + sign * 2.0 * s).collect();
            e.sort_by(|a, b| b.total_cmp(a));
            lyapunov_dimension(spectrum.entropy, &e).ok().map(|d| d.value)
        };
        match (shifted(-1.0), shifted(1.0)) {
            (Some(lo), Some(hi)) => writeln!(
                report,
                "Lyapunov dimension: {:.10} (two-standard-error band [{lo:.10}, {hi:.10}])",
                dim.value
            ),
            _ => writeln!(report, "Lyapunov dimension: {:.10} (band undefined: exponents too noisy)", dim.value),
        }
        .unwrap();
    }
    Ok(Outcome {
        report,
        artifacts: vec![csv("lyapunov.csv", spectrum.to_csv())],
    })
}

fn barnsley_dim(system: &BarnsleySystem, settings: &Settings) -> Result<Outcome, CliError> {
    let r = barnsley_dimension(system, settings.n_max())?;
    let mut report = String::new();
    writeln!(report, "dimension: {:.10} bracket {}", r.value(), bracket(&r.bracket)).unwrap();
    writeln!(report, "markov: {}", r.markov).unwrap();
    writeln!(report, "diagonality: {}", r.diagonality).unwrap();
    writeln!(report, "cylinder graph strongly connected at level {}", r.transitive_at_level).unwrap();
    writeln!(report, "subsystem levels: {}", r.levels).unwrap();
    let mut artifacts = Vec::new();
    if let Some(sep) = &r.inverse_separation {
        let last = sep.last();
        writeln!(
            report,
            "fibre-inverse separation at level {}: delta = {:e}{}",
            last.n,
            last.delta,
            if sep.exact_overlap() { " (exact overlap)" } else { "" }
        )
        .unwrap();
        artifacts.push(csv("inverse_separation.csv", sep.to_csv()));
    }
    for note in &r.notes {
        writeln!(report, "note: {note}").unwrap();
    }
    if let Some(count) = settings.points() {
        let depth = settings.depth();
        let cloud = repeller_points(system, count, depth, settings.seed())?;
        writeln!(
            report,
            "repeller sample: {count} points, series depth {depth}, |G| truncation error <= {:e}, {} orbits resampled",
            cloud.tail_bound,
            cloud.resamples
        )
        .unwrap();
        artifacts.push(csv("repeller.csv", cloud.points.to_csv()));
    }
    Ok(Outcome { report, artifacts })
}

fn curve_root(curve: &PressureCurve, index: usize) -> Option<(f64, f64)> {
    // Bracketing grid cell of the first sign change of the chosen column.
    let value = |t: &(f64, f64, f64)| if index == 0 { t.1 } else { t.2 };
    curve
        .samples()
        .windows(2)
        .find(|w| value(&w[0]) > 0.0 && value(&w[1]) <= 0.0)
        .map(|w| (w[0].0, w[1].0))
}

fn pressure_curve(system: &System, settings: &Settings) -> Result<Outcome, CliError> {
    let tol = settings.tol().unwrap_or(1e-10);
    let mut report = String::new();
    type Bounds<'a> = Box<dyn Fn(f64) -> crate::Result<(f64, f64)> + 'a>;
    let model;
    let matrices;
    let (bounds, default_hi): (Bounds, f64) = match system {
        System::Barnsley(b) => {
            model = HofbauerModel::new(b, settings.n_max())?;
            writeln!(
                report,
                "Hofbauer bounds from {} subsystem level(s){}",
                model.levels(),
                if model.is_markov() { "; Markov system, bounds coincide" } else { "" }
            )
            .unwrap();
            (Box::new(|s| model.bounds(s)), 2.0)
        }
        System::Similar(SimilarSystem { ratios, .. }) => {
            writeln!(report, "pressure log Σ r_i^s (closed form)").unwrap();
            let f = move |s: f64| {
                let p = ratios.iter().map(|r| r.powf(s)).sum::<f64>().ln();
                Ok((p, p))
            };
            (Box::new(f), 2.0)
        }
        System::Affine(AffineSystem { ifs, .. }) => {
            matrices = ifs.linear_parts();
            let n = settings.n().unwrap_or_else(|| level_within(matrices.len(), CURVE_PRODUCT_BUDGET, 8));
            writeln!(
                report,
                "lower: log Σ |det A_i|^(s/d); upper: best level estimate up to products of length {n}"
            )
            .unwrap();
            let f = move |s: f64| Ok((determinant_pressure(&matrices, s)?, subadditive_pressure(&matrices, s, n)?.upper));
            (Box::new(f), ifs.dim() as f64)
        }
        System::Sft(SftSystem { sft, potential }) => {
            let phi = potential
                .as_ref()
                .ok_or_else(|| CliError::validation(Some("system.potential".into()), "needed for a pressure curve of s·φ"))?;
            writeln!(report, "pressure P(s·φ) = log ρ(A_ij·exp(s·φ_j))").unwrap();
            let f = move |s: f64| {
                let scaled = Potential::new(phi.values().iter().map(|v| s * v).collect())?;
                let p = spectral_pressure(sft, &scaled)?;
                Ok((p, p))
            };
            (Box::new(f), 2.0)
        }
    };
    let grid = settings.s_grid(default_hi)?;
    let mut curve = PressureCurve::sample(&grid, &bounds)?;
    for (label, index) in [("lower", 0), ("upper", 1)] {
        match curve_root(&curve, index) {
            Some((lo, hi)) => {
                let pick = |s: f64| {
                    let (l, u) = bounds(s).unwrap_or((f64::NAN, f64::NAN));
                    if index == 0 { l } else { u }
                };
                let root = bisect_decreasing(pick, lo, hi, tol)?;
                writeln!(report, "zero of the {label} bound: {:.10} bracket {}", root.midpoint(), bracket(&root)).unwrap();
                if index == 1 {
                    curve = curve.with_root(pick, lo, hi, tol)?;
                }
            }
            None => writeln!(report, "zero of the {label} bound: not on the grid").unwrap(),
        }
    }
    writeln!(
        report,
        "upper bound non-increasing on the grid: {}",
        if curve.upper_is_non_increasing() { "yes" } else { "no" }
    )
    .unwrap();
    Ok(Outcome {
        report,
        artifacts: vec![csv("pressure_curve.csv", curve.to_csv())],
    })
}

fn hesc(ifs: &SimilarIfs, settings: &Settings) -> Result<Outcome, CliError> {
    let n = settings.n().unwrap_or_else(|| level_within(ifs.len(), DELTA_BUDGET, 10));
    let sep = separation_delta(ifs, n)?;
    let mut report = String::new();
    writeln!(
        report,
        "arithmetic: {}",
        if sep.exact_arithmetic { "exact rationals" } else { "floating point, relative tolerance 1e-12" }
    )
    .unwrap();
    for l in &sep.levels {
        match l.rate {
            Some(rate) => writeln!(report, "n = {}: delta = {:e}, -log(delta)/n = {:.6}", l.n, l.delta, rate + 0.0),
            None => writeln!(report, "n = {}: delta = {:e}", l.n, l.delta),
        }
        .unwrap();
    }
    if sep.exact_overlap() {
        if let Some((u, v)) = exact_overlap_search(ifs, n)? {
            writeln!(report, "exact overlap: {} and {} are the same map", ifs.format_word(&u), ifs.format_word(&v)).unwrap();
        }
    } else {
        writeln!(report, "no exact overlap up to level {n}; exponential separation is judged from the rates above").unwrap();
    }
    Ok(Outcome {
        report,
        artifacts: vec![csv("separation.csv", sep.to_csv())],
    })
}

fn entropy(system: &System, settings: &Settings) -> Result<Outcome, CliError> {
    let mut report = String::new();
    match system {
        System::Sft(SftSystem { sft, potential }) => {
            writeln!(report, "topological entropy: {:.10}", sft.topological_entropy()?).unwrap();
            let parry = parry_measure(sft)?;
            writeln!(report, "entropy of the Parry measure: {:.10}", parry.entropy()).unwrap();
            if let Some(phi) = potential {
                let g = gibbs_markov_measure(sft, phi)?;
                writeln!(report, "pressure of the potential: {:.10}", g.pressure).unwrap();
                writeln!(report, "entropy of the Gibbs measure: {:.10}", g.measure.entropy()).unwrap();
                writeln!(
                    report,
                    "Gibbs constants on cylinders up to length {}: c1 = {:.6}, c2 = {:.6}",
                    GIBBS_CHECK_LEVELS, g.c1, g.c2
                )
                .unwrap();
            }
        }
        System::Barnsley(b) => {
            let n = settings.n().unwrap_or(DEFAULT_LAP_ITERATES);
            let coefficients: Vec<(f64, f64)> = b.branches().iter().map(|br| (br.gamma, br.v)).collect();
            let map = PiecewiseAffineMap::from_partition(b.partition(), &coefficients)?;
            writeln!(report, "lap-number entropy of the base map at n = {n}: {:.10}", lap_entropy(&map, n)?).unwrap();
        }
        System::Similar(SimilarSystem { ratios, weights, .. }) => {
            let m = bernoulli(weights.as_deref(), ratios.len())?;
            writeln!(report, "entropy of the Bernoulli measure: {:.10} (full shift: {:.10})", m.entropy(), (ratios.len() as f64).ln()).unwrap();
        }
        System::Affine(AffineSystem { ifs, weights }) => {
            let m = bernoulli(weights.as_deref(), ifs.len())?;
            writeln!(report, "entropy of the Bernoulli measure: {:.10} (full shift: {:.10})", m.entropy(), (ifs.len() as f64).ln()).unwrap();
        }
    }
    Ok(Outcome {
        report,
        artifacts: vec![],
    })
}

fn boxcount(system: &System, settings: &Settings) -> Result<Outcome, CliError> {
    let count = settings.points().unwrap_or(DEFAULT_POINTS);
    let seed = settings.seed();
    let tol = settings.tol().unwrap_or(DEFAULT_CROSSCHECK_TOL);
    let mut report = String::new();
    let (cloud, analytic, label): (PointCloud, f64, &str) = match system {
        System::Similar(s) => {
            let ifs = need_maps(s, "boxcount")?;
            let p = s.weights.clone().unwrap_or_else(|| uniform(ifs.len()));
            let cloud = attractor_points_weighted(ifs, &p, count, seed).map_err(|e| CliError::from(e).at("system.weights".into()))?;
            (cloud, similarity_dimension(&s.ratios)?, "similarity dimension")
        }
        System::Affine(a) => {
            let p = a.weights.clone().unwrap_or_else(|| uniform(a.ifs.len()));
            let cloud = a.ifs.attractor_points(&p, count, seed).map_err(|e| CliError::from(e).at("system.weights".into()))?;
            (cloud, a.ifs.affinity_dimension(&AffinityOptions::default())?.value(), "affinity dimension")
        }
        System::Barnsley(b) => {
            let r = repeller_points(b, count, settings.depth(), seed)?;
            (r.points, barnsley_dimension(b, settings.n_max())?.value(), "pressure zero")
        }
        System::Sft(_) => unreachable!("rejected by dispatch"),
    };
    let scales = match &settings.spec.task.scales {
        Some(s) => s.iter().map(|n| n.value).collect(),
        None => dyadic_scales(4, 9),
    };
    let profile = box_count(&cloud, &scales).map_err(|e| CliError::from(e).at("task.scales".into()))?;
    writeln!(
        report,
        "box-counting slope: {:.6} (R² = {:.6}, {} points, {} scales)",
        profile.slope(),
        profile.fit.r_squared,
        count,
        scales.len()
    )
    .unwrap();
    writeln!(report, "{label}: {analytic:.6}").unwrap();
    writeln!(report, "{}", dimension_crosscheck(analytic, &profile, tol)).unwrap();
    Ok(Outcome {
        report,
        artifacts: vec![csv("box_count.csv", profile.to_csv())],
    })
}

fn validate(system: &System) -> Result<Outcome, CliError> {
    let mut report = String::new();
    match system {
        System::Similar(s) => {
            writeln!(report, "similar system with {} maps", s.ratios.len()).unwrap();
            writeln!(report, "similarity dimension: {:.6}", similarity_dimension(&s.ratios)?).unwrap();
            if let Some(ifs) = &s.ifs {
                writeln!(report, "ambient dimension: {}", ifs.dim()).unwrap();
                if ifs.dim() == 1 {
                    let (lo, hi) = ifs.hull()?;
                    writeln!(report, "attractor hull: [{lo}, {hi}]").unwrap();
                    writeln!(report, "first-level images disjoint: {}", ifs.first_level_images_disjoint()?).unwrap();
                    writeln!(report, "exact arithmetic: {}", ifs.exact().is_some()).unwrap();
                }
            }
        }
        System::Affine(a) => {
            writeln!(report, "affine system with {} maps in dimension {}", a.ifs.len(), a.ifs.dim()).unwrap();
            for (i, m) in a.ifs.linear_parts().iter().enumerate() {
                let sv: Vec<String> = singular_values(m)?.iter().map(|v| format!("{v:.6}")).collect();
                writeln!(report, "map {}: singular values {}", i + 1, sv.join(", ")).unwrap();
            }
            if a.ifs.dim() == 2 {
                report.push_str(bhr_conditions(&a.ifs)?.summary().trim_end());
                report.push('\n');
            }
        }
        System::Barnsley(b) => {
            let d = b.diagnostics();
            writeln!(report, "skew product with {} branches", b.len()).unwrap();
            for (i, (lo, hi)) in d.images.iter().enumerate() {
                writeln!(report, "branch {}: image [{lo}, {hi}]", i + 1).unwrap();
            }
            writeln!(report, "markov: {}", d.markov).unwrap();
            writeln!(report, "full branch: {}", d.full_branch).unwrap();
            writeln!(report, "|gamma| > |lambda| on every branch: {}", d.theorem_mode).unwrap();
            let transitive = (1..=3).find_map(|n| b.transitivity_check(n).ok().filter(|&t| t).map(|_| n));
            match transitive {
                Some(n) => writeln!(report, "cylinder graph strongly connected at level {n}"),
                None => writeln!(report, "cylinder graph not strongly connected up to level 3"),
            }
            .unwrap();
            writeln!(report, "diagonality: {}", classify_diagonality(b, DEFAULT_SEARCH_DEPTH)).unwrap();
        }
        System::Sft(SftSystem { sft, potential }) => {
            writeln!(report, "subshift on {} symbols", sft.size()).unwrap();
            match sft.primitivity_exponent() {
                Some(k) => writeln!(report, "primitive with exponent {k}"),
                None => writeln!(report, "not primitive"),
            }
            .unwrap();
            writeln!(report, "topological entropy: {:.10}", sft.topological_entropy()?).unwrap();
            if potential.is_some() {
                writeln!(report, "potential: {} values", sft.size()).unwrap();
            }
        }
    }
    writeln!(report, "spec is valid").unwrap();
    Ok(Outcome {
        report,
        artifacts: vec![],
    })
}
