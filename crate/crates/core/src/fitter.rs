//! Inverse problem: the parameters whose model Lorenz curve is closest, in
//! L1 area, to an empirical one.
//!
//! The search is two-stage. A coarse geometric grid over χ (and ζ) comes
//! first, then a Nelder-Mead simplex starts from the best grid point. For the
//! AWM the κ direction never reaches the solver. The AWM curve is an affine
//! combination (1+λ)𝓛_EYSM − λf of one cached EYSM curve, so κ is optimized by
//! a golden-section line search at each (χ, ζ).
//!
//! EYSM curves are memoized by (χ, ζ) rounded to five decimals, and the solve
//! itself is done at the rounded values, so results never depend on the
//! cache's history.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use parking_lot::Mutex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lorenz::{awm_lorenz, gini, LorenzCurve};
use crate::params::ParameterVector;
use crate::quad::unit_grid;
use crate::sam::sam_lorenz_curve;
use crate::solver::{eysm_lorenz, SolverConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelFamily {
    /// Single-agent model, parameter χ.
    Sam,
    /// EYSM with redistribution only, parameter χ.
    EysmRedist,
    /// EYSM with redistribution and wealth-attained advantage, (χ, ζ).
    EysmFull,
    /// Affine wealth model, (χ, ζ, κ).
    Awm,
}

impl ModelFamily {
    pub const ALL: [ModelFamily; 4] = [
        ModelFamily::Sam,
        ModelFamily::EysmRedist,
        ModelFamily::EysmFull,
        ModelFamily::Awm,
    ];

    pub fn dimension(self) -> usize {
        match self {
            ModelFamily::Sam | ModelFamily::EysmRedist => 1,
            ModelFamily::EysmFull => 2,
            ModelFamily::Awm => 3,
        }
    }

    /// The family obtained by pinning this one's last parameter to zero.
    pub fn nested(self) -> Option<ModelFamily> {
        match self {
            ModelFamily::EysmFull => Some(ModelFamily::EysmRedist),
            ModelFamily::Awm => Some(ModelFamily::EysmFull),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ModelFamily::Sam => "sam",
            ModelFamily::EysmRedist => "eysm-redist",
            ModelFamily::EysmFull => "eysm-full",
            ModelFamily::Awm => "awm",
        }
    }
}

impl fmt::Display for ModelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelFamily::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::input(format!("unknown model family '{s}' (sam, eysm-redist, eysm-full, awm)")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchConfig {
    pub chi_range: (f64, f64),
    pub zeta_range: (f64, f64),
    pub kappa_range: (f64, f64),
    /// Coarse-grid points per axis.
    pub grid_density: usize,
    /// The simplex stops once the J values of its vertices agree to this.
    pub refine_tol: f64,
    /// Uniform f-grid size on which J is evaluated.
    pub curve_resolution: usize,
    /// Maximum number of memoized EYSM curves.
    pub cache_size: usize,
    pub max_refine_evals: usize,
    /// Also start the refinement from the optimum of the nested family, which
    /// guarantees J_opt never exceeds the nested family's J_opt.
    pub nested_start: bool,
    pub solver: SolverConfig,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            chi_range: (0.001, 0.2),
            zeta_range: (0.001, 0.2),
            kappa_range: (0.0, 0.15),
            grid_density: 12,
            refine_tol: 1e-7,
            curve_resolution: 2001,
            cache_size: 4096,
            max_refine_evals: 400,
            nested_start: true,
            solver: SolverConfig {
                n_cells: 2048,
                ..SolverConfig::default()
            },
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, (lo, hi)) in [("chi", self.chi_range), ("zeta", self.zeta_range)] {
            if !(lo > 0.0 && hi > lo && hi.is_finite()) {
                return Err(Error::domain(format!("{name} range must satisfy 0 < lo < hi, got [{lo}, {hi}]")));
            }
        }
        let (klo, khi) = self.kappa_range;
        if !(klo >= 0.0 && khi >= klo && khi < 1.0) {
            return Err(Error::domain(format!("kappa range must lie in [0, 1), got [{klo}, {khi}]")));
        }
        if self.grid_density < 2 {
            return Err(Error::domain("grid_density must be at least 2"));
        }
        if self.curve_resolution < 3 {
            return Err(Error::domain("curve_resolution must be at least 3"));
        }
        if !(self.refine_tol > 0.0) {
            return Err(Error::domain("refine_tol must be positive"));
        }
        self.solver.validate()
    }
}

/// J = ∫₀¹ |𝓛_model − 𝓛_emp| df by the trapezoid rule on a uniform grid.
/// A supercritical model is read as its terminal value at f = 1.
pub fn discrepancy(model: &LorenzCurve, empirical: &LorenzCurve, resolution: usize) -> f64 {
    let f = unit_grid(resolution.max(2));
    let a: Vec<f64> = f.iter().map(|&x| model.eval(x)).collect();
    let b: Vec<f64> = f.iter().map(|&x| empirical.eval(x)).collect();
    l1_uniform(&a, &b)
}

fn l1_uniform(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len();
    let h = 1.0 / (n - 1) as f64;
    let mut acc = 0.0;
    for i in 0..n {
        let d = (a[i] - b[i]).abs();
        acc += if i == 0 || i == n - 1 { 0.5 * d } else { d };
    }
    acc * h
}

fn point_segment_distance(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len2 = dx * dx + dy * dy;
    let t = if len2 > 0.0 {
        (((p.0 - a.0) * dx + (p.1 - a.1) * dy) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let (cx, cy) = (a.0 + t * dx, a.1 + t * dy);
    ((p.0 - cx).powi(2) + (p.1 - cy).powi(2)).sqrt()
}

/// Shortest distance from an empirical ordinate to the model curve. Against
/// an oligarchical curve, a point whose ℓ lies strictly between the terminal
/// value and 1 is measured horizontally to f = 1.
pub fn local_error(point: (f64, f64), model: &LorenzCurve) -> f64 {
    let (fj, lj) = point;
    if model.is_supercritical() && lj > model.terminal() && lj < 1.0 {
        return (fj - 1.0).abs();
    }
    let (f, l) = (model.f(), model.l());
    (0..f.len() - 1)
        .map(|i| point_segment_distance(point, (f[i], l[i]), (f[i + 1], l[i + 1])))
        .fold(f64::INFINITY, f64::min)
}

fn lambda_l2_on_grid(f: &[f64], eysm: &[f64], emp: &[f64]) -> Result<f64> {
    let gap: Vec<f64> = f.iter().zip(eysm).map(|(f, e)| f - e).collect();
    let num: Vec<f64> = eysm.iter().zip(emp).zip(&gap).map(|((e, l), g)| (e - l) * g).collect();
    let den: Vec<f64> = gap.iter().map(|g| g * g).collect();
    let zero = vec![0.0; f.len()];
    let (num, den) = (signed_uniform(&num), l1_uniform(&den, &zero));
    // differences below ~1e-12 are interpolation round-off
    if !(den > 1e-24) {
        return Err(Error::Degenerate("EYSM curve coincides with the diagonal; λ is undetermined".into()));
    }
    Ok(num / den)
}

fn signed_uniform(y: &[f64]) -> f64 {
    let n = y.len();
    let h = 1.0 / (n - 1) as f64;
    h * (y.iter().sum::<f64>() - 0.5 * (y[0] + y[n - 1]))
}

/// Least-squares optimal λ for 𝓛 ≈ (1+λ)𝓛_EYSM − λf:
/// λ = ∫(𝓛_EYSM − ℓ)(f − 𝓛_EYSM) df / ∫(f − 𝓛_EYSM)² df.
pub fn lambda_l2_guess(eysm: &LorenzCurve, empirical: &LorenzCurve, resolution: usize) -> Result<f64> {
    let f = unit_grid(resolution.max(3));
    let e: Vec<f64> = f.iter().map(|&x| eysm.eval(x)).collect();
    let l: Vec<f64> = f.iter().map(|&x| empirical.eval(x)).collect();
    lambda_l2_on_grid(&f, &e, &l)
}

const GOLDEN: f64 = 0.618_033_988_749_894_9;

/// Optimal κ at fixed (χ, ζ), for an EYSM curve and empirical curve sampled
/// on the same uniform grid `f`. Returns (NaN, +∞) when no κ in the range
/// keeps the oligarchical terminal positive.
fn fit_kappa_on_grid(
    chi: f64,
    zeta: f64,
    f: &[f64],
    eysm: &[f64],
    emp: &[f64],
    kappa_range: (f64, f64),
) -> (f64, f64) {
    let (lo, mut hi) = kappa_range;
    if zeta > 0.0 {
        // χ > κζ, which for ζ > χ is also positivity of the terminal
        hi = hi.min(chi / zeta * (1.0 - 1e-12));
    }
    if !(hi >= lo) {
        return (f64::NAN, f64::INFINITY);
    }
    let mut buf = vec![0.0; f.len()];
    let mut j_at = |kappa: f64| -> f64 {
        let lambda = kappa / (1.0 - kappa);
        for i in 0..f.len() {
            buf[i] = (1.0 + lambda) * eysm[i] - lambda * f[i];
        }
        l1_uniform(&buf, emp)
    };
    let mut best = (lo, j_at(lo));
    let consider = |k: f64, j: f64, best: &mut (f64, f64)| {
        if j < best.1 {
            *best = (k, j);
        }
    };
    if hi == lo {
        return best;
    }

    let guess = lambda_l2_on_grid(f, eysm, emp)
        .map(|l| l / (1.0 + l))
        .unwrap_or(lo)
        .clamp(lo, hi);
    // J is convex in λ, hence unimodal in κ: walk downhill from the guess with
    // doubling steps until J turns up or a bound is hit
    let h = 0.01 * (hi - lo);
    let jg = j_at(guess);
    consider(guess, jg, &mut best);
    let (right, left) = ((guess + h).min(hi), (guess - h).max(lo));
    let (jr, jl) = (j_at(right), j_at(left));
    consider(right, jr, &mut best);
    consider(left, jl, &mut best);
    let (a, b) = if jr < jg || jl < jg {
        let (dir, mut at, mut j_cur) = if jr < jl { (1.0, right, jr) } else { (-1.0, left, jl) };
        let mut behind = guess;
        let mut step = h;
        loop {
            if at == lo || at == hi {
                break (behind, at);
            }
            step *= 2.0;
            let next = (at + dir * step).clamp(lo, hi);
            let jn = j_at(next);
            consider(next, jn, &mut best);
            if jn >= j_cur {
                break (behind, next);
            }
            behind = at;
            at = next;
            j_cur = jn;
        }
    } else {
        (left, right)
    };
    let (mut a, mut b) = (a.min(b), a.max(b));
    let mut c = b - GOLDEN * (b - a);
    let mut d = a + GOLDEN * (b - a);
    let (mut jc, mut jd) = (j_at(c), j_at(d));
    while b - a > 1e-9 {
        if jc < jd {
            b = d;
            d = c;
            jd = jc;
            c = b - GOLDEN * (b - a);
            jc = j_at(c);
            consider(c, jc, &mut best);
        } else {
            a = c;
            c = d;
            jc = jd;
            d = a + GOLDEN * (b - a);
            jd = j_at(d);
            consider(d, jd, &mut best);
        }
    }
    consider(c, jc, &mut best);
    consider(d, jd, &mut best);
    best
}

/// Optimal κ and its J for a given EYSM curve at (χ, ζ).
pub fn fit_kappa(
    chi: f64,
    zeta: f64,
    eysm: &LorenzCurve,
    empirical: &LorenzCurve,
    kappa_range: (f64, f64),
    resolution: usize,
) -> (f64, f64) {
    let f = unit_grid(resolution.max(3));
    let e: Vec<f64> = f.iter().map(|&x| eysm.eval(x)).collect();
    let l: Vec<f64> = f.iter().map(|&x| empirical.eval(x)).collect();
    fit_kappa_on_grid(chi, zeta, &f, &e, &l, kappa_range)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Subcritical,
    Supercritical,
}

#[derive(Debug, Clone, Serialize)]
pub struct FitReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub family: ModelFamily,
    pub theta_opt: ParameterVector,
    pub j_opt: f64,
    pub fitted_gini: f64,
    pub empirical_gini: f64,
    pub oligarchy_fraction: f64,
    pub mean_local_error: f64,
    pub local_error_profile: Vec<f64>,
    pub evaluations: usize,
    pub regime: Regime,
    /// The optimal model curve on the J grid, kept for plotting.
    #[serde(skip)]
    pub model_curve: LorenzCurve,
}

/// Column names of the trend table.
pub const TABLE_HEADER: [&str; 9] = [
    "label",
    "chi",
    "zeta",
    "kappa",
    "fitting_gini",
    "empirical_gini",
    "oligarchy_fraction",
    "j",
    "status",
];

impl FitReport {
    pub fn table_row(&self) -> Vec<String> {
        vec![
            self.label.clone().unwrap_or_default(),
            self.theta_opt.chi().to_string(),
            self.theta_opt.zeta().to_string(),
            self.theta_opt.kappa().to_string(),
            self.fitted_gini.to_string(),
            self.empirical_gini.to_string(),
            self.oligarchy_fraction.to_string(),
            self.j_opt.to_string(),
            "ok".to_string(),
        ]
    }
}

type CacheKey = (ModelFamily, i64, i64);

fn lattice(x: f64) -> i64 {
    (x * 1e5).round() as i64
}

#[derive(Debug, Clone, Copy)]
struct Eval {
    chi: f64,
    zeta: f64,
    kappa: f64,
    j: f64,
}

impl Eval {
    fn better_than(&self, other: &Eval) -> bool {
        self.j < other.j
            || (self.j == other.j && (self.chi, self.zeta, self.kappa) < (other.chi, other.zeta, other.kappa))
    }
}

/// Fits model families to empirical curves, sharing one memo of model curves.
/// A `Fitter` can be shared between threads.
pub struct Fitter {
    cfg: SearchConfig,
    grid: Vec<f64>,
    cache: Mutex<HashMap<CacheKey, Option<Arc<LorenzCurve>>>>,
}

struct Session<'a> {
    fitter: &'a Fitter,
    family: ModelFamily,
    emp: Vec<f64>,
    evaluations: usize,
    best: Option<Eval>,
}

impl Session<'_> {
    /// J at (χ, ζ) for this family (κ optimized for the AWM); +∞ outside the box.
    fn objective(&mut self, chi: f64, zeta: f64) -> f64 {
        self.evaluations += 1;
        let cfg = &self.fitter.cfg;
        let (chi, zeta) = (lattice(chi) as f64 / 1e5, lattice(zeta) as f64 / 1e5);
        let in_box = chi >= cfg.chi_range.0 && chi <= cfg.chi_range.1 && zeta >= 0.0 && zeta <= cfg.zeta_range.1;
        let eval = if !in_box {
            Eval { chi, zeta, kappa: 0.0, j: f64::INFINITY }
        } else {
            match self.fitter.base_curve(self.family, chi, zeta) {
                None => Eval { chi, zeta, kappa: 0.0, j: f64::INFINITY },
                Some(curve) => match self.family {
                    ModelFamily::Awm => {
                        let (kappa, j) =
                            fit_kappa_on_grid(chi, zeta, &self.fitter.grid, curve.l(), &self.emp, cfg.kappa_range);
                        Eval { chi, zeta, kappa, j }
                    }
                    _ => Eval {
                        chi,
                        zeta,
                        kappa: 0.0,
                        j: l1_uniform(curve.l(), &self.emp),
                    },
                },
            }
        };
        if eval.j.is_finite() && self.best.is_none_or(|b| eval.better_than(&b)) {
            self.best = Some(eval);
        }
        eval.j
    }
}

impl Fitter {
    pub fn new(cfg: SearchConfig) -> Result<Self> {
        cfg.validate()?;
        let grid = unit_grid(cfg.curve_resolution);
        Ok(Fitter {
            cfg,
            grid,
            cache: Mutex::new(HashMap::new()),
        })
    }

    pub fn config(&self) -> &SearchConfig {
        &self.cfg
    }

    pub fn cached_curves(&self) -> usize {
        self.cache.lock().len()
    }

    /// SAM curve or canonical EYSM curve (no shift) on the J grid, memoized.
    fn base_curve(&self, family: ModelFamily, chi: f64, zeta: f64) -> Option<Arc<LorenzCurve>> {
        let tag = if family == ModelFamily::Sam { ModelFamily::Sam } else { ModelFamily::EysmFull };
        let key = (tag, lattice(chi), lattice(zeta));
        if let Some(hit) = self.cache.lock().get(&key) {
            return hit.clone();
        }
        let computed = match tag {
            ModelFamily::Sam => sam_lorenz_curve(chi, self.cfg.curve_resolution),
            _ => eysm_lorenz(chi, zeta, &self.cfg.solver, self.cfg.curve_resolution).map(|(c, _)| c),
        };
        let value = match computed {
            Ok(c) => Some(Arc::new(c)),
            Err(e) => {
                log::debug!("model curve unavailable at chi={chi} zeta={zeta}: {e}");
                None
            }
        };
        let mut cache = self.cache.lock();
        if cache.len() >= self.cfg.cache_size {
            cache.clear();
        }
        cache.insert(key, value.clone());
        value
    }

    fn coarse_axes(&self, family: ModelFamily) -> (Vec<f64>, Vec<f64>) {
        let n = self.cfg.grid_density;
        let (clo, chi_hi) = self.cfg.chi_range;
        let ratio = (chi_hi / clo).powf(1.0 / (n - 1) as f64);
        let chis: Vec<f64> = (0..n).map(|i| clo * ratio.powi(i as i32)).collect();
        let zetas = match family {
            ModelFamily::Sam | ModelFamily::EysmRedist => vec![0.0],
            _ => {
                // offset by half a step so no grid point lands on ζ = χ
                let (zlo, zhi) = self.cfg.zeta_range;
                let r = (zhi / zlo).powf(1.0 / n as f64);
                (0..n).map(|k| zlo * r.powf(k as f64 + 0.5)).collect()
            }
        };
        (chis, zetas)
    }

    pub fn fit(&self, family: ModelFamily, empirical: &LorenzCurve) -> Result<FitReport> {
        let emp: Vec<f64> = self.grid.iter().map(|&x| empirical.eval(x)).collect();
        let mut session = Session {
            fitter: self,
            family,
            emp,
            evaluations: 0,
            best: None,
        };

        let (chis, zetas) = self.coarse_axes(family);
        let mut grid_best: Option<Eval> = None;
        for &c in &chis {
            for &z in &zetas {
                let j = session.objective(c, z);
                if j.is_finite() {
                    let e = Eval { chi: c, zeta: z, kappa: 0.0, j };
                    if grid_best.is_none_or(|b| e.better_than(&b)) {
                        grid_best = Some(e);
                    }
                }
            }
        }
        let Some(grid_best) = grid_best else {
            return Err(Error::Fit(format!(
                "all {} coarse grid points were infeasible or failed to solve for {family}",
                chis.len() * zetas.len()
            )));
        };

        let mut start = (grid_best.chi, grid_best.zeta, grid_best.j);
        let mut nested_evals = 0;
        if self.cfg.nested_start {
            if let Some(inner) = family.nested() {
                let inner_report = self.fit(inner, empirical)?;
                nested_evals = inner_report.evaluations;
                let (c, z) = (inner_report.theta_opt.chi(), inner_report.theta_opt.zeta());
                let j = session.objective(c, z);
                if j < start.2 {
                    start = (c, z, j);
                }
            }
        }

        let two_d = zetas.len() > 1;
        let chi_step = start.0 * 0.5 * ((chis[1] / chis[0]) - 1.0);
        let zeta_step = if start.1 > 0.0 {
            start.1 * 0.5 * ((zetas[1] / zetas[0]) - 1.0)
        } else {
            zetas[0]
        };
        let refine_tol = self.cfg.refine_tol;
        let max_evals = self.cfg.max_refine_evals;
        if two_d {
            nelder_mead(
                |x| session.objective(x[0], x[1]),
                vec![start.0, start.1],
                vec![chi_step, zeta_step],
                refine_tol,
                max_evals,
            );
        } else {
            nelder_mead(
                |x| session.objective(x[0], 0.0),
                vec![start.0],
                vec![chi_step],
                refine_tol,
                max_evals,
            );
        }

        let best = session.best.expect("the coarse grid produced a finite point");
        let evaluations = session.evaluations + nested_evals;
        self.report(family, best, empirical, evaluations)
    }

    fn report(&self, family: ModelFamily, best: Eval, empirical: &LorenzCurve, evaluations: usize) -> Result<FitReport> {
        let theta = ParameterVector::new(best.chi, best.zeta, best.kappa)?;
        let base = self
            .base_curve(family, best.chi, best.zeta)
            .ok_or_else(|| Error::Fit("optimal point lost its model curve".into()))?;
        let model_curve = match family {
            ModelFamily::Awm => awm_lorenz(&base, &theta)?,
            _ => (*base).clone(),
        };
        let local_error_profile: Vec<f64> = empirical
            .f()
            .iter()
            .zip(empirical.l())
            .skip(1)
            .map(|(&f, &l)| local_error((f, l), &model_curve))
            .collect();
        let mean_local_error = if local_error_profile.is_empty() {
            0.0
        } else {
            local_error_profile.iter().sum::<f64>() / local_error_profile.len() as f64
        };
        Ok(FitReport {
            label: None,
            family,
            theta_opt: theta,
            j_opt: best.j,
            fitted_gini: gini(&model_curve),
            empirical_gini: gini(empirical),
            oligarchy_fraction: if family == ModelFamily::Sam { 0.0 } else { theta.oligarchy_fraction() },
            mean_local_error,
            local_error_profile,
            evaluations,
            regime: if model_curve.is_supercritical() {
                Regime::Supercritical
            } else {
                Regime::Subcritical
            },
            model_curve,
        })
    }
}

/// Nelder-Mead minimization (reflection 1, expansion 2, contraction and
/// shrink 1/2). Stops when the vertex J values agree to `ftol` and the simplex
/// has collapsed below the memo lattice, or after `max_evals` evaluations.
fn nelder_mead<F: FnMut(&[f64]) -> f64>(mut f: F, x0: Vec<f64>, steps: Vec<f64>, ftol: f64, max_evals: usize) -> (Vec<f64>, f64) {
    const XTOL: f64 = 1e-5;
    let n = x0.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    let f0 = f(&x0);
    simplex.push((x0.clone(), f0));
    for k in 0..n {
        let mut x = x0.clone();
        x[k] += steps[k];
        let fx = f(&x);
        simplex.push((x, fx));
    }
    let mut evals = n + 1;
    let order = |s: &mut Vec<(Vec<f64>, f64)>| s.sort_by(|a, b| a.1.total_cmp(&b.1));
    loop {
        order(&mut simplex);
        let (best, worst) = (simplex[0].1, simplex[n].1);
        let diameter = simplex[1..]
            .iter()
            .flat_map(|(x, _)| x.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        let flat = worst.is_finite() && (worst - best).abs() <= ftol;
        if (flat && diameter <= XTOL) || diameter <= XTOL / 10.0 || evals >= max_evals {
            break;
        }
        let centroid: Vec<f64> = (0..n)
            .map(|k| simplex[..n].iter().map(|(x, _)| x[k]).sum::<f64>() / n as f64)
            .collect();
        let along = |t: f64| -> Vec<f64> {
            centroid.iter().zip(&simplex[n].0).map(|(c, w)| c + t * (c - w)).collect()
        };
        let xr = along(1.0);
        let fr = f(&xr);
        evals += 1;
        if fr < simplex[0].1 {
            let xe = along(2.0);
            let fe = f(&xe);
            evals += 1;
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
            continue;
        }
        let (xc, fc) = if fr < simplex[n].1 {
            let xc = along(0.5);
            let fc = f(&xc);
            (xc, fc)
        } else {
            let xc = along(-0.5);
            let fc = f(&xc);
            (xc, fc)
        };
        evals += 1;
        if fc < simplex[n].1.min(fr) {
            simplex[n] = (xc, fc);
            continue;
        }
        let x_best = simplex[0].0.clone();
        for v in simplex.iter_mut().skip(1) {
            let x: Vec<f64> = v.0.iter().zip(&x_best).map(|(a, b)| b + 0.5 * (a - b)).collect();
            let fx = f(&x);
            *v = (x, fx);
            evals += 1;
        }
    }
    order(&mut simplex);
    simplex.swap_remove(0)
}

/// One-shot fit with a private cache.
pub fn fit(family: ModelFamily, empirical: &LorenzCurve, cfg: &SearchConfig) -> Result<FitReport> {
    Fitter::new(cfg.clone())?.fit(family, empirical)
}

/// One row of a trend table: a report, or the reason the fit failed.
#[derive(Debug, Clone, Serialize)]
pub struct TrendRow {
    pub label: String,
    pub report: Option<FitReport>,
    pub error: Option<String>,
}

impl TrendRow {
    pub fn table_row(&self) -> Vec<String> {
        match &self.report {
            Some(r) => r.table_row(),
            None => {
                let mut row = vec![self.label.clone()];
                row.extend(std::iter::repeat_n(String::new(), TABLE_HEADER.len() - 2));
                row.push(format!("failed: {}", self.error.as_deref().unwrap_or("unknown error")));
                row
            }
        }
    }
}

/// Independent fits of every dataset, sorted by label. Up to `jobs` fits run
/// concurrently and share the fitter's memo. A failing dataset yields a
/// failed row instead of aborting the batch.
pub fn trend(datasets: &[(String, LorenzCurve)], family: ModelFamily, fitter: &Fitter, jobs: usize) -> Vec<TrendRow> {
    let mut order: Vec<usize> = (0..datasets.len()).collect();
    order.sort_by(|&a, &b| datasets[a].0.cmp(&datasets[b].0));
    let run_one = |idx: usize| -> TrendRow {
        let (label, curve) = &datasets[idx];
        match fitter.fit(family, curve) {
            Ok(mut report) => {
                report.label = Some(label.clone());
                TrendRow {
                    label: label.clone(),
                    report: Some(report),
                    error: None,
                }
            }
            Err(e) => TrendRow {
                label: label.clone(),
                report: None,
                error: Some(e.to_string()),
            },
        }
    };
    let jobs = jobs.max(1);
    if jobs == 1 || order.len() <= 1 {
        return order.into_iter().map(run_one).collect();
    }
    let next = std::sync::atomic::AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<TrendRow>>> = order.iter().map(|_| Mutex::new(None)).collect();
    std::thread::scope(|scope| {
        for _ in 0..jobs.min(order.len()) {
            scope.spawn(|| loop {
                let k = next.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                if k >= order.len() {
                    break;
                }
                *slots[k].lock() = Some(run_one(order[k]));
            });
        }
    });
    slots.into_iter().map(|s| s.into_inner().expect("every slot is filled")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(f: Vec<f64>, l: Vec<f64>) -> LorenzCurve {
        LorenzCurve::from_points(f, l).unwrap()
    }

    #[test]
    fn family_metadata() {
        assert_eq!(ModelFamily::Awm.dimension(), 3);
        assert_eq!(ModelFamily::EysmFull.dimension(), 2);
        assert_eq!("eysm-redist".parse::<ModelFamily>().unwrap(), ModelFamily::EysmRedist);
        assert!("eysm".parse::<ModelFamily>().is_err());
        assert_eq!(ModelFamily::Awm.nested(), Some(ModelFamily::EysmFull));
    }

    #[test]
    fn discrepancy_examples() {
        let d = LorenzCurve::diagonal(11);
        assert_eq!(discrepancy(&d, &d, 101), 0.0);
        let zero = poly(vec![0.0, 1.0 - 1e-12, 1.0], vec![0.0, 0.0, 1.0]);
        assert!((discrepancy(&d, &zero, 100_001) - 0.5).abs() < 1e-5);
        // diagonal against the chord through (0.5, 0.25): a triangle of area 1/8
        let b = poly(vec![0.0, 0.5, 1.0], vec![0.0, 0.25, 1.0]);
        assert!((discrepancy(&d, &b, 1001) - 0.125).abs() < 1e-10);
        assert_eq!(discrepancy(&d, &b, 1001), discrepancy(&b, &d, 1001));
    }

    #[test]
    fn local_error_examples() {
        let c = poly(vec![0.0, 0.5, 1.0], vec![0.0, 0.25, 1.0]);
        assert!(local_error((0.5, 0.25), &c) < 1e-15);
        let sup = poly(vec![0.0, 0.5, 1.0], vec![0.0, 0.2, 0.7]);
        assert!((local_error((0.9, 0.85), &sup) - 0.1).abs() < 1e-15);
    }

    #[test]
    fn lambda_guess_recovers_construction() {
        let e = sam_lorenz_curve(0.1, 2001).unwrap();
        assert!(lambda_l2_guess(&e, &e, 2001).unwrap().abs() < 1e-14);
        let l: Vec<f64> = e.f().iter().zip(e.l()).map(|(f, l)| 1.08 * l - 0.08 * f).collect();
        let target = poly(e.f().to_vec(), l);
        assert!((lambda_l2_guess(&e, &target, 2001).unwrap() - 0.08).abs() < 1e-8);
        let d = LorenzCurve::diagonal(101);
        assert!(lambda_l2_guess(&d, &target, 2001).is_err());
    }

    #[test]
    fn kappa_line_search() {
        let e = sam_lorenz_curve(0.05, 2001).unwrap();
        let theta = ParameterVector::new(0.05, 0.0, 0.076).unwrap();
        let target = awm_lorenz(&e, &theta).unwrap();
        let (k, j) = fit_kappa(0.05, 0.0, &e, &target, (0.0, 0.15), 2001);
        assert!((k - 0.076).abs() < 1e-4, "{k}");
        assert!(j < 1e-8);
        let (k0, _) = fit_kappa(0.05, 0.0, &e, &e, (0.0, 0.15), 2001);
        assert!(k0 < 1e-6);
        // κ must stay below χ/ζ; an empty feasible interval is flagged
        let (k, j) = fit_kappa(0.01, 0.5, &e, &e, (0.05, 0.15), 2001);
        assert!(k.is_nan() && j.is_infinite());
    }

    #[test]
    fn nelder_mead_quadratic() {
        let (x, fx) = nelder_mead(
            |x| (x[0] - 0.3).powi(2) + 2.0 * (x[1] + 0.1).powi(2),
            vec![0.0, 0.0],
            vec![0.1, 0.1],
            1e-14,
            2000,
        );
        assert!((x[0] - 0.3).abs() < 1e-5 && (x[1] + 0.1).abs() < 1e-5, "{x:?}");
        assert!(fx < 1e-10);
    }

    #[test]
    fn search_config_validation() {
        assert!(SearchConfig::default().validate().is_ok());
        let bad = SearchConfig {
            chi_range: (0.0, 0.2),
            ..SearchConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = SearchConfig {
            kappa_range: (0.0, 1.0),
            ..SearchConfig::default()
        };
        assert!(bad.validate().is_err());
    }
}
