//! Acceptance criteria. Each criterion is its own test and prints exactly one
//! verdict line, written straight to the process stdout so it shows up even
//! when the harness captures test output.

use std::io::Write as _;
use std::time::{Duration, Instant};

use awm_core::density::{awm_density, awm_potentials, barred_potentials, compute_potentials, scale_density, shift_density};
use awm_core::empirical::{load_households_path, EmpiricalDistribution};
use awm_core::fitter::{discrepancy, Fitter, ModelFamily, SearchConfig};
use awm_core::gamma::reg_gamma_q_inv;
use awm_core::lorenz::{density_from_lorenz, dual_lorenz, gini, lorenz_from_density};
use awm_core::montecarlo::{averaged_lorenz, eysm_pair_step, ModelKind, SimConfig};
use awm_core::sam::sam_lorenz_curve;
use awm_core::solver::{eysm_lorenz, solve_steady_subcritical, SolverConfig};
use awm_core::{kappa_to_lambda, lambda_to_kappa, model_lorenz, ParameterVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn verdict(id: u32, pass: bool, what: &str, detail: String) -> bool {
    let tag = if pass { "PASS" } else { "FAIL" };
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "[{tag}] criterion {id:>2}: {what}: {detail}");
    let _ = out.flush();
    pass
}

fn skip(id: u32, what: &str, why: &str) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "[SKIP] criterion {id:>2}: {what}: {why}");
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn criterion_01_sam_gini() {
    let start = Instant::now();
    let g = gini(&sam_lorenz_curve(0.0066, 10_000).unwrap());
    let elapsed = start.elapsed();
    let ok = (g - 0.8329).abs() <= 0.001 && elapsed < Duration::from_secs(1);
    assert!(verdict(
        1,
        ok,
        "SAM Gini at chi = 0.0066",
        format!("gini = {g:.5}, target 0.8329 +/- 0.001, {elapsed:.2?}")
    ));
}

#[test]
fn criterion_02_eysm_redistribution_gini() {
    let start = Instant::now();
    let (curve, _) = eysm_lorenz(0.016, 0.0, &SolverConfig::default(), 10_000).unwrap();
    let g = gini(&curve);
    let elapsed = start.elapsed();
    let ok = (g - 0.8385).abs() <= 0.005 && elapsed < Duration::from_secs(60);
    assert!(verdict(
        2,
        ok,
        "EYSM redistribution-only Gini at chi = 0.016",
        format!("gini = {g:.5}, target 0.8385 +/- 0.005, {elapsed:.2?}")
    ));
}

#[test]
fn criterion_03_eysm_full_gini_by_duality() {
    let cfg = SolverConfig::default();
    let sub = lorenz_from_density(&solve_steady_subcritical(0.024, 0.022, &cfg).unwrap().density).unwrap();
    let sup = dual_lorenz(&sub, 0.022, 0.024).unwrap();
    let g = gini(&sup);
    let ok = (g - 0.8376).abs() <= 0.005 && sup.is_supercritical();
    assert!(verdict(
        3,
        ok,
        "EYSM full Gini at (0.022, 0.024) via duality",
        format!("gini = {g:.5}, terminal = {:.5}, target 0.8376 +/- 0.005", sup.terminal())
    ));
}

#[test]
fn criterion_04_awm_gini() {
    let theta = ParameterVector::new(0.046, 0.064, 0.076).unwrap();
    let curve = model_lorenz(&theta, &SolverConfig::default(), 10_000).unwrap();
    let g = gini(&curve);
    let ok = (g - 0.8559).abs() <= 0.005;
    assert!(verdict(
        4,
        ok,
        "AWM Gini at (0.046, 0.064, 0.076)",
        format!("gini = {g:.5}, target 0.8559 +/- 0.005")
    ));
}

#[test]
fn criterion_05_oligarchy_fractions() {
    // year, chi, zeta, kappa, oligarch's share in percent
    let rows = [
        (1989, 0.088, 0.112, 0.092, 23.60),
        (1992, 0.102, 0.134, 0.100, 26.53),
        (1995, 0.104, 0.146, 0.096, 31.82),
        (1998, 0.096, 0.134, 0.098, 31.44),
        (2001, 0.074, 0.100, 0.080, 28.26),
        (2004, 0.070, 0.092, 0.080, 25.99),
        (2007, 0.070, 0.100, 0.076, 32.47),
        (2010, 0.046, 0.058, 0.076, 22.39),
        (2013, 0.048, 0.066, 0.078, 29.58),
        (2016, 0.036, 0.050, 0.058, 29.72),
    ];
    let mut worst = (0, 0.0f64);
    for &(year, chi, zeta, kappa, pct) in &rows {
        let theta = ParameterVector::new(chi, zeta, kappa).unwrap();
        let gap = (100.0 * theta.oligarchy_fraction() - pct).abs();
        if gap > worst.1 {
            worst = (year, gap);
        }
    }
    assert!(verdict(
        5,
        worst.1 <= 0.05,
        "oligarchy fractions of all ten table rows",
        format!("largest gap {:.4} pp ({}), tolerance 0.05 pp", worst.1, worst.0)
    ));
}

#[test]
fn criterion_06_duality_against_monte_carlo() {
    let cfg = SimConfig {
        n_agents: 10_000,
        dt: 0.01,
        sweeps: 0,
        seed: 7,
        theta: ParameterVector::new(0.03, 0.06, 0.0).unwrap(),
        model: ModelKind::Eysm,
    };
    // 200 time units of burn-in (six relaxation times 1/χ), then 20 snapshots
    // five time units apart.
    let (mc, _) = averaged_lorenz(&cfg, 20_000, 20, 500, 2001).unwrap();
    let (sub, _) = eysm_lorenz(0.06, 0.03, &SolverConfig::default(), 2001).unwrap();
    let sup = dual_lorenz(&sub, 0.03, 0.06).unwrap();
    let gap = discrepancy(&sup, &mc, 2001);
    assert!(verdict(
        6,
        gap <= 0.02,
        "Monte Carlo at (0.03, 0.06) vs half the solved (0.06, 0.03) curve",
        format!("L1 = {gap:.5}, tolerance 0.02")
    ));
}

#[test]
fn criterion_07_sam_monte_carlo() {
    let mut gaps = Vec::new();
    // (χ, burn-in sweeps, snapshot interval): about five relaxation times of
    // burn-in at dt = 0.01, then 20 snapshots.
    for &(chi, burn, interval) in &[(0.0066, 50_000u64, 2_500u64), (0.5, 2_000, 200)] {
        let cfg = SimConfig {
            n_agents: 10_000,
            dt: 0.01,
            sweeps: 0,
            seed: 7,
            theta: ParameterVector::new(chi, 0.0, 0.0).unwrap(),
            model: ModelKind::Sam,
        };
        let (mc, _) = averaged_lorenz(&cfg, burn, 20, interval, 2001).unwrap();
        gaps.push((chi, discrepancy(&sam_lorenz_curve(chi, 2001).unwrap(), &mc, 2001)));
    }
    let ok = gaps.iter().all(|&(_, g)| g <= 0.01);
    let detail = gaps
        .iter()
        .map(|(chi, g)| format!("chi = {chi}: L1 = {g:.5}"))
        .collect::<Vec<_>>()
        .join(", ");
    assert!(verdict(7, ok, "SAM Monte Carlo vs closed form", format!("{detail}, tolerance 0.01")));
}

#[test]
fn criterion_08_conservation() {
    let cfg = SolverConfig::default();
    let mut worst_drift = 0.0f64;
    for &(chi, zeta) in &[(0.016, 0.0), (0.024, 0.022), (0.064, 0.046), (0.05, 0.02), (0.2, 0.15), (0.1, 0.0)] {
        let out = solve_steady_subcritical(chi, zeta, &cfg).unwrap();
        worst_drift = worst_drift.max(out.mass_drift).max(out.wealth_drift);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst_pair = 0.0f64;
    for _ in 0..1_000_000 {
        let w: f64 = rng.gen_range(1e-3..1e3);
        let x: f64 = rng.gen_range(1e-3..1e3);
        let out = eysm_pair_step(w, x, 0.5, 1.0, 0.01, &mut rng).unwrap();
        worst_pair = worst_pair.max((out.w + out.x - (w + x)).abs() / (w + x));
    }
    let ok = worst_drift <= 1e-6 && worst_pair <= f64::EPSILON;
    assert!(verdict(
        8,
        ok,
        "conservation in the solver and in pair transactions",
        format!("max |N-1|, |W-1| = {worst_drift:.2e}; max relative pair imbalance = {worst_pair:.2e}")
    ));
}

#[test]
fn criterion_09_round_trips() {
    let kappa_gap = (0..=999)
        .map(|i| {
            let k = i as f64 / 1000.0;
            (lambda_to_kappa(kappa_to_lambda(k).unwrap()).unwrap() - k).abs()
        })
        .fold(0.0, f64::max);

    let out = solve_steady_subcritical(0.05, 0.02, &SolverConfig::default()).unwrap();
    let p = &out.density;
    let neutral = ParameterVector::new(0.05, 0.02, 0.0).unwrap();
    let identities = shift_density(p, &neutral) == *p && scale_density(p, 1.0, 1.0).unwrap() == *p;

    let curve = lorenz_from_density(p).unwrap();
    let back = lorenz_from_density(&density_from_lorenz(&curve, 1.0, 1.0).unwrap()).unwrap();
    let lorenz_gap = discrepancy(&curve, &back, 10_001);

    let theta = ParameterVector::new(0.05, 0.02, 0.1).unwrap();
    let barred = compute_potentials(&scale_density(p, 1.0, 1.0 + theta.lambda()).unwrap()).unwrap();
    let direct = compute_potentials(&awm_density(p, &theta).unwrap()).unwrap();
    let mapped = awm_potentials(&barred, &theta);
    let forward = [
        max_diff(&direct.f, &mapped.f),
        max_diff(&direct.a, &mapped.a),
        max_diff(&direct.l, &mapped.l),
        max_diff(&direct.b, &mapped.b),
    ]
    .into_iter()
    .fold(0.0, f64::max);
    let inverse = barred_potentials(&direct, &theta);
    let backward = max_diff(&inverse.l, &barred.l).max(max_diff(&inverse.b, &barred.b));

    // The potential maps are exact identities; on the 32768-cell grid the
    // cumulative sums differ only by accumulated round-off, judged against
    // the solver's own convergence tolerance.
    let quad_tol = SolverConfig::default().tol_residual;
    let ok = kappa_gap <= 1e-14 && identities && lorenz_gap <= 1e-4 && forward <= quad_tol && backward <= quad_tol;
    assert!(verdict(
        9,
        ok,
        "round trips",
        format!(
            "kappa-lambda {kappa_gap:.1e}; neutral identities exact = {identities}; \
             Lorenz-density area {lorenz_gap:.1e}; potential map {forward:.1e}, inverse {backward:.1e}"
        )
    ));
}

#[test]
fn criterion_10_synthetic_awm_recovery() {
    let start = Instant::now();
    let truth = ParameterVector::new(0.05, 0.07, 0.08).unwrap();
    let emp = model_lorenz(&truth, &SolverConfig::default(), 2001).unwrap();
    let report = Fitter::new(SearchConfig::default()).unwrap().fit(ModelFamily::Awm, &emp).unwrap();
    let elapsed = start.elapsed();
    let t = report.theta_opt;
    let rel = [
        (t.chi() / 0.05 - 1.0).abs(),
        (t.zeta() / 0.07 - 1.0).abs(),
        (t.kappa() / 0.08 - 1.0).abs(),
    ];
    let ok = rel.iter().all(|&r| r <= 0.10) && report.j_opt <= 1e-4 && elapsed < Duration::from_secs(600);
    assert!(verdict(
        10,
        ok,
        "AWM fit recovers (0.05, 0.07, 0.08)",
        format!(
            "found ({:.5}, {:.5}, {:.5}), J = {:.2e}, {} evaluations, {elapsed:.1?}",
            t.chi(),
            t.zeta(),
            t.kappa(),
            report.j_opt,
            report.evaluations
        )
    ));
}

#[test]
fn criterion_11_nesting_dominance() {
    // A household sample no family reproduces exactly: SAM-like quantiles at
    // χ = 0.08 with one household in twelve in debt.
    let pairs = (1..2000).map(|i| {
        let u = i as f64 / 2000.0;
        let w = 0.16 / reg_gamma_q_inv(1.16, u).unwrap();
        let debt = if i % 12 == 0 { -0.3 } else { 0.0 };
        (1.0 + (i % 4) as f64, w + debt)
    });
    let emp = EmpiricalDistribution::from_pairs(pairs)
        .unwrap()
        .canonicalize()
        .unwrap()
        .lorenz_ordinates()
        .unwrap();
    let fitter = Fitter::new(SearchConfig::default()).unwrap();
    let tol = fitter.config().refine_tol;
    let j = |family| fitter.fit(family, &emp).unwrap().j_opt;
    let (redist, full, awm) = (j(ModelFamily::EysmRedist), j(ModelFamily::EysmFull), j(ModelFamily::Awm));
    let ok = awm <= full + tol && full <= redist + tol;
    assert!(verdict(
        11,
        ok,
        "J(AWM) <= J(EYSM full) <= J(EYSM redistribution)",
        format!("{awm:.6} <= {full:.6} <= {redist:.6} (refine_tol {tol:.0e})")
    ));
}

/// Needs `AWM_SCF2013_CSV` and `AWM_FORBES_CSV`, each a `weight,networth`
/// file, with the rich-list weights already on the survey's household scale.
#[test]
fn criterion_12_scf_reproduction() {
    let what = "SCF 2013 + rich list Gini and AWM local error";
    let (Ok(scf), Ok(forbes)) = (std::env::var("AWM_SCF2013_CSV"), std::env::var("AWM_FORBES_CSV")) else {
        skip(12, what, "set AWM_SCF2013_CSV and AWM_FORBES_CSV to run (data not bundled)");
        return;
    };
    let merged = load_households_path(scf)
        .unwrap()
        .merge(&load_households_path(forbes).unwrap())
        .unwrap()
        .canonicalize()
        .unwrap();
    let emp_gini = merged.gini().unwrap();
    let curve = merged.lorenz_ordinates().unwrap();
    let report = Fitter::new(SearchConfig::default()).unwrap().fit(ModelFamily::Awm, &curve).unwrap();
    let ok = (emp_gini - 0.8550).abs() <= 0.002 && report.mean_local_error <= 0.003;
    assert!(verdict(
        12,
        ok,
        what,
        format!(
            "empirical gini = {emp_gini:.5} (target 0.8550 +/- 0.002), mean local error = {:.5} (<= 0.003), theta = ({:.4}, {:.4}, {:.4})",
            report.mean_local_error,
            report.theta_opt.chi(),
            report.theta_opt.zeta(),
            report.theta_opt.kappa()
        )
    ));
}
