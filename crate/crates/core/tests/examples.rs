//! Worked examples checked against oracles that do not share code with the
//! library: statrs, brute-force quadrature, bisection and hand arithmetic.

use std::io::Write as _;

use approx::assert_abs_diff_eq;
use awm_core::empirical::{load_households, EmpiricalDistribution};
use awm_core::fitter::{self, discrepancy, fit_kappa, local_error, Fitter, ModelFamily, SearchConfig};
use awm_core::gamma::{reg_gamma_q, reg_gamma_q_inv};
use awm_core::lorenz::{awm_lorenz, density_from_lorenz, gini, gini_density_form, lorenz_from_density};
use awm_core::sam::{sam_density, sam_density_grid, sam_lorenz, SamParams};
use awm_core::solver::{eysm_lorenz, solve_steady_subcritical, SolverConfig};
use awm_core::{model_lorenz, LorenzCurve, ParameterVector};
use statrs::function::gamma::{gamma, gamma_ur};

/// Composite Simpson rule with `n` (even) panels.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += f(a + h * i as f64) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

#[test]
fn incomplete_gamma_at_small_shape_matches_quadrature_and_statrs() {
    let (a, z): (f64, f64) = (0.0132, 0.5);
    // With u = t^a the lower integral ∫₀ᶻ t^(a−1) e^(−t) dt becomes
    // (1/a)∫₀^(z^a) exp(−u^(1/a)) du, whose integrand is smooth.
    let lower = simpson(|u: f64| (-u.powf(1.0 / a)).exp(), 0.0, z.powf(a), 200_000) / a;
    let oracle = 1.0 - lower / gamma(a);
    let q = reg_gamma_q(a, z).unwrap();
    assert_abs_diff_eq!(q, oracle, epsilon = 1e-10);
    assert_abs_diff_eq!(q, gamma_ur(a, z), epsilon = 1e-10);
}

#[test]
fn incomplete_gamma_agrees_with_statrs_on_a_grid() {
    for &a in &[0.0132, 0.05, 0.2, 1.0, 2.0132, 7.5, 40.0] {
        for &z in &[1e-4, 0.01, 0.3, 1.0, 2.5, 10.0, 60.0] {
            let ours = reg_gamma_q(a, z).unwrap();
            let theirs = gamma_ur(a, z);
            assert!(
                (ours - theirs).abs() <= 1e-12_f64.max(1e-9 * theirs),
                "Q({a}, {z}) = {ours}, statrs {theirs}"
            );
        }
    }
}

#[test]
fn inverse_gamma_matches_bisection_on_statrs() {
    let (a, q) = (2.0132, 0.5);
    let (mut lo, mut hi) = (0.0_f64, 50.0_f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if gamma_ur(a, mid) > q {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let z = reg_gamma_q_inv(a, q).unwrap();
    assert_abs_diff_eq!(z, 0.5 * (lo + hi), epsilon = 1e-10);
    assert_abs_diff_eq!(reg_gamma_q_inv(1.0, (-1.0f64).exp()).unwrap(), 1.0, epsilon = 1e-12);
}

#[test]
fn sam_density_is_normalized_with_unit_mean() {
    for &chi in &[0.5, 1.0, 2.0] {
        let p = SamParams::canonical(chi).unwrap();
        // Integrate in s = ln w over [1e-6, 1e7].
        let (a, b) = ((1e-6f64).ln(), (1e7f64).ln());
        let mass = simpson(|s| s.exp() * sam_density(s.exp(), &p).unwrap(), a, b, 400_000);
        let mean = simpson(|s| s.exp() * s.exp() * sam_density(s.exp(), &p).unwrap(), a, b, 400_000);
        assert_abs_diff_eq!(mass, 1.0, epsilon = 1e-8);
        assert_abs_diff_eq!(mean, 1.0, epsilon = 1e-6);
    }
}

#[test]
fn sam_lorenz_matches_density_pipeline() {
    // The density has a w^(−2.2) tail at χ = 0.1, so the cumulative wealth
    // fraction converges only far out; the grid has to reach very large w.
    let chi = 0.1;
    let p = SamParams::canonical(chi).unwrap();
    let dens = sam_density_grid(&p, 1e-3, 1e45, 400_000).unwrap();
    let curve = lorenz_from_density(&dens).unwrap();
    let worst = curve
        .f()
        .iter()
        .zip(curve.l())
        .map(|(&f, &l)| (l - sam_lorenz(f, chi).unwrap()).abs())
        .fold(0.0, f64::max);
    assert!(worst <= 1e-6, "L-infinity gap {worst}");
}

#[test]
fn solver_gini_forms_agree() {
    let out = solve_steady_subcritical(0.016, 0.0, &SolverConfig::default()).unwrap();
    let direct = gini_density_form(&out.density).unwrap();
    let via_curve = gini(&lorenz_from_density(&out.density).unwrap());
    assert_abs_diff_eq!(direct, via_curve, epsilon = 1e-6);
    assert_abs_diff_eq!(via_curve, 0.8385, epsilon = 0.005);
}

#[test]
fn solver_density_round_trips_through_its_lorenz_curve() {
    let out = solve_steady_subcritical(0.1, 0.05, &SolverConfig::default()).unwrap();
    let curve = lorenz_from_density(&out.density).unwrap();
    let back = density_from_lorenz(&curve, 1.0, 1.0).unwrap();
    let again = lorenz_from_density(&back).unwrap();
    let gap = discrepancy(&curve, &again, 10_001);
    assert!(gap < 1e-4, "round-trip area {gap}");
    assert_abs_diff_eq!(gini(&curve), gini(&again), epsilon = 1e-3);
}

#[test]
fn solver_conserves_and_leaves_small_residual() {
    let cfg = SolverConfig::default();
    for &(chi, zeta) in &[(0.016, 0.0), (0.05, 0.02), (0.024, 0.022), (0.2, 0.1)] {
        let out = solve_steady_subcritical(chi, zeta, &cfg).unwrap();
        assert!(out.residual <= cfg.tol_residual, "({chi}, {zeta}) residual {}", out.residual);
        assert!(out.mass_drift <= 1e-6 && out.wealth_drift <= 1e-6, "({chi}, {zeta}) {out:?}");
        assert!(out.density.values().iter().all(|&p| p >= 0.0));
    }
}

#[test]
fn gini_grows_toward_criticality() {
    let chi = 0.05;
    let cfg = SolverConfig::default();
    let ginis: Vec<f64> = [0.0, 0.25, 0.5, 0.75]
        .iter()
        .map(|&r| gini(&eysm_lorenz(chi, r * chi, &cfg, 4001).unwrap().0))
        .collect();
    assert!(ginis.windows(2).all(|w| w[1] > w[0]), "{ginis:?}");
}

#[test]
fn grid_refinement_changes_gini_little() {
    let coarse = SolverConfig {
        n_cells: 8192,
        ..SolverConfig::default()
    };
    let fine = SolverConfig {
        n_cells: 16384,
        ..SolverConfig::default()
    };
    let g = |cfg: &SolverConfig| gini(&lorenz_from_density(&solve_steady_subcritical(0.05, 0.02, cfg).unwrap().density).unwrap());
    let (gc, gf) = (g(&coarse), g(&fine));
    assert!((gc - gf).abs() < 4.0 * coarse.tol_residual.max(1e-6), "coarse {gc}, fine {gf}");
}

#[test]
fn awm_terminal_matches_oligarchy_table_arithmetic() {
    let theta = ParameterVector::new(0.036, 0.050, 0.058).unwrap();
    let curve = model_lorenz(&theta, &SolverConfig::default(), 2001).unwrap();
    assert!(curve.is_supercritical());
    assert_abs_diff_eq!(curve.terminal(), 0.7028, epsilon = 5e-5);
    let lambda = 0.058 / 0.942;
    assert_abs_diff_eq!(curve.terminal(), (1.0 + lambda) * 0.72 - lambda, epsilon = 1e-12);
}

#[test]
fn local_error_matches_dense_sampling() {
    let f: Vec<f64> = (0..=2000).map(|i| i as f64 / 2000.0).collect();
    let l = f.iter().map(|x| x * x).collect();
    let curve = LorenzCurve::new(f, l, false).unwrap();
    let brute = (0..=1_000_000)
        .map(|i| {
            let x = i as f64 / 1e6;
            ((x - 0.5).powi(2) + (x * x - 0.5).powi(2)).sqrt()
        })
        .fold(f64::INFINITY, f64::min);
    // The model is a 2000-segment polyline, so it sits within ~1e-7 of the parabola.
    assert_abs_diff_eq!(local_error((0.5, 0.5), &curve), brute, epsilon = 1e-6);
}

#[test]
fn discrepancy_matches_hand_geometry() {
    let bent = LorenzCurve::new(vec![0.0, 0.5, 1.0], vec![0.0, 0.1, 1.0], false).unwrap();
    let diag = LorenzCurve::diagonal(2);
    // Area under the bent curve: 0.5·0.1/2 + 0.5·(0.1 + 1)/2 = 0.3.
    assert_abs_diff_eq!(discrepancy(&bent, &diag, 2001), 0.2, epsilon = 1e-10);
    // Two curves crossing at f = 0.5 with knots on quarter points; each of
    // the four quarters contributes a triangle of area 0.25·0.125/2.
    let a = LorenzCurve::new(vec![0.0, 0.5, 1.0], vec![0.0, 0.25, 1.0], false).unwrap();
    let b = LorenzCurve::new(vec![0.0, 0.25, 0.75, 1.0], vec![0.0, 0.0, 0.5, 1.0], false).unwrap();
    assert_abs_diff_eq!(discrepancy(&a, &b, 2001), 0.0625, epsilon = 1e-10);
}

#[test]
fn kappa_line_search_recovers_shift() {
    let (chi, zeta) = (0.046, 0.064);
    let (eysm, _) = eysm_lorenz(chi, zeta, &SolverConfig::default(), 2001).unwrap();
    for &kappa in &[0.0, 0.076] {
        let theta = ParameterVector::new(chi, zeta, kappa).unwrap();
        let emp = awm_lorenz(&eysm, &theta).unwrap();
        let (k, j) = fit_kappa(chi, zeta, &eysm, &emp, (0.0, 0.15), 2001);
        assert!((k - kappa).abs() < 1e-3, "κ* = {kappa}, found {k}");
        assert!(j < 1e-6);
    }
}

#[test]
fn sam_self_fit_recovers_chi() {
    let emp = awm_core::sam::sam_lorenz_curve(0.0066, 2001).unwrap();
    let r = fitter::fit(ModelFamily::Sam, &emp, &SearchConfig::default()).unwrap();
    assert!((r.theta_opt.chi() / 0.0066 - 1.0).abs() < 0.01, "{:?}", r.theta_opt);
    assert!(r.j_opt <= 1e-6);
}

#[test]
fn trend_of_duplicates_matches_single_fit() {
    let emp = model_lorenz(&ParameterVector::new(0.04, 0.0, 0.0).unwrap(), &SolverConfig::default(), 2001).unwrap();
    let fitter = Fitter::new(SearchConfig::default()).unwrap();
    let single = fitter.fit(ModelFamily::EysmRedist, &emp).unwrap();
    let rows = fitter::trend(
        &[("b".to_string(), emp.clone()), ("a".to_string(), emp.clone())],
        ModelFamily::EysmRedist,
        &fitter,
        2,
    );
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0].label, "a");
    let r0 = rows[0].report.as_ref().unwrap();
    let r1 = rows[1].report.as_ref().unwrap();
    assert_eq!(r0.theta_opt, r1.theta_opt);
    assert_eq!(r0.theta_opt, single.theta_opt);
    assert_eq!(r0.j_opt, single.j_opt);
    assert_eq!(&rows[0].table_row()[1..], &rows[1].table_row()[1..]);
}

/// Deterministic household sample drawn at SAM quantiles with uneven weights.
fn households(scale_w: f64, scale_x: f64) -> EmpiricalDistribution {
    let pairs = (1..600).map(|i| {
        let u = i as f64 / 600.0;
        let x = 2.0 * 0.3 / reg_gamma_q_inv(2.0 * 0.3 + 1.0, u).unwrap();
        let debt = if i % 17 == 0 { -0.4 } else { 0.0 };
        (scale_w * (1.0 + (i % 5) as f64), scale_x * (x + debt))
    });
    EmpiricalDistribution::from_pairs(pairs).unwrap()
}

#[test]
fn fit_is_invariant_under_raw_scaling() {
    let cfg = SearchConfig::default();
    let base = households(1.0, 1.0).canonicalize().unwrap().lorenz_ordinates().unwrap();
    let scaled = households(37.0, 1e5).canonicalize().unwrap().lorenz_ordinates().unwrap();
    let a = fitter::fit(ModelFamily::EysmRedist, &base, &cfg).unwrap();
    let b = fitter::fit(ModelFamily::EysmRedist, &scaled, &cfg).unwrap();
    assert_abs_diff_eq!(a.theta_opt.chi(), b.theta_opt.chi(), epsilon = 1e-5);
    assert_abs_diff_eq!(a.j_opt, b.j_opt, epsilon = 1e-9);
}

#[test]
fn large_survey_file_keeps_every_row() {
    let mut file = tempfile::NamedTempFile::new().unwrap();
    writeln!(file, "weight,networth").unwrap();
    let rows = 30_000;
    for i in 0..rows {
        writeln!(file, "{},{}", 1000.0 + (i % 97) as f64, (i as f64 * 7.3) % 5e5 - 2e4).unwrap();
    }
    file.flush().unwrap();
    let d = load_households(std::fs::File::open(file.path()).unwrap()).unwrap();
    assert_eq!(d.len(), rows);
    let merged = d
        .merge(&EmpiricalDistribution::from_pairs((0..400).map(|i| (1.0, 1e9 + i as f64))).unwrap())
        .unwrap();
    assert_eq!(merged.len(), rows + 400);
    let curve = merged.canonicalize().unwrap().lorenz_ordinates().unwrap();
    assert_eq!(*curve.l().last().unwrap(), 1.0);
}
