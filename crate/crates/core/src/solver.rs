//! Steady-state solver for the canonical subcritical EYSM Fokker-Planck
//! equation, and the reduction of any ⟨χ, ζ, κ⟩ to that solve.
//!
//! Once integrated in w, the steady equation reads d/dw[D·P] = σ·P with
//! D = B + w²A/2 and σ the drift; both depend on P through the potentials.
//! With the potentials frozen it is a linear first-order ODE whose zero-flux
//! solution is P ∝ exp(∫σ/D)/D. Each relaxation step solves that ODE with
//! the potentials of the current iterate and moves the iterate part of the
//! way towards it:
//!
//! ```text
//! P ← P + dt·(T[P] − P),    T[P] = exp(∫ σ[P]/D[P]) / D[P],  normalized to N = 1
//! ```
//!
//! The grid is log-spaced (plus a node at w = 0), which resolves both the
//! essential singularity near zero and the Gaussian tail with a few
//! thousand cells. Positivity holds by construction.

use serde::{Deserialize, Serialize};

use crate::density::{compute_potentials, scale_density, translate_density, CanonicalDensity, Potentials};
use crate::error::{Error, Result};
use crate::lorenz::{awm_lorenz, dual_lorenz, lorenz_from_density_with, LorenzCurve};
use crate::params::ParameterVector;
use crate::quad::interp;
use crate::sam::{sam_density, SamParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    /// Initial upper grid cutoff, in units of the mean wealth.
    pub w_max: f64,
    /// Smallest positive grid node, in units of the mean wealth.
    pub w_min: f64,
    /// Number of log-spaced cells between `w_min` and `w_max`.
    pub n_cells: usize,
    /// Pseudo-time step of the relaxation, in (0, 1].
    pub dt: f64,
    /// Convergence threshold on the integrated steady-state residual.
    pub tol_residual: f64,
    pub max_steps: usize,
    /// Largest admissible agent mass beyond the cutoff before it is doubled.
    pub tail_tol: f64,
    /// Hard ceiling for the doubled cutoff.
    pub w_max_limit: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            w_max: 50.0,
            w_min: 1e-6,
            n_cells: 32_768,
            dt: 0.5,
            tol_residual: 1e-8,
            max_steps: 2_000,
            tail_tol: 1e-8,
            w_max_limit: 1e7,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.w_max >= 10.0) {
            return Err(Error::domain("w_max must be at least 10 mean-wealth units"));
        }
        if !(self.w_min > 0.0 && self.w_min < 1e-2) {
            return Err(Error::domain("w_min must lie in (0, 0.01)"));
        }
        if self.n_cells < 256 {
            return Err(Error::domain("n_cells must be at least 256"));
        }
        if !(self.dt > 0.0 && self.dt <= 1.0) {
            return Err(Error::domain("dt must lie in (0, 1]"));
        }
        if !(self.tol_residual > 0.0) {
            return Err(Error::domain("tol_residual must be positive"));
        }
        if self.max_steps == 0 {
            return Err(Error::domain("max_steps must be positive"));
        }
        if !(self.tail_tol > 0.0 && self.w_max_limit >= self.w_max) {
            return Err(Error::domain("tail_tol must be positive and w_max_limit >= w_max"));
        }
        Ok(())
    }
}

/// Drift σ and diffusivity D tabulated on a density grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DriftDiffusionField {
    pub grid: Vec<f64>,
    pub sigma: Vec<f64>,
    pub d: Vec<f64>,
}

/// σ = χ(μ − w) − ζ[2(N/W)(B − w²A/2) + (1 − 2L)w],  D = B + w²A/2  (γ = 1).
pub fn assemble_coefficients(p: &CanonicalDensity, pot: &Potentials, chi: f64, zeta: f64) -> DriftDiffusionField {
    let mu = p.mean_wealth();
    let n_over_w = 1.0 / mu;
    let mut sigma = Vec::with_capacity(pot.grid.len());
    let mut d = Vec::with_capacity(pot.grid.len());
    for i in 0..pot.grid.len() {
        let w = pot.grid[i];
        let a = pot.a[i].max(0.0);
        let half_w2a = 0.5 * w * w * a;
        sigma.push(chi * (mu - w) - zeta * (2.0 * n_over_w * (pot.b[i] - half_w2a) + (1.0 - 2.0 * pot.l[i]) * w));
        d.push(pot.b[i] + half_w2a);
    }
    DriftDiffusionField {
        grid: pot.grid.clone(),
        sigma,
        d,
    }
}

/// Per-cell residual of d/dw[D·P] = σ·P in its exponentially fitted form,
/// r_i = |G_{i+1} − G_i·exp(h_i·(q_i + q_{i+1})/2)| with G = D·P, q = σ/D.
/// Cells touching a node with D = 0 are skipped.
fn cell_residuals(p: &CanonicalDensity, field: &DriftDiffusionField) -> Vec<f64> {
    let dens = p.values();
    let grid = &field.grid;
    (0..grid.len() - 1)
        .map(|i| {
            let (d0, d1) = (field.d[i], field.d[i + 1]);
            if !(d0 > 0.0 && d1 > 0.0) {
                return 0.0;
            }
            let q_mean = 0.5 * (field.sigma[i] / d0 + field.sigma[i + 1] / d1);
            let g0 = d0 * dens[i];
            let g1 = d1 * dens[i + 1];
            let carried = (g0.ln() + (grid[i + 1] - grid[i]) * q_mean).exp();
            (g1 - carried).abs()
        })
        .collect()
}

/// L1 norm (∫|d/dw[(B + w²A/2)P] − σP| dw) of the steady-state residual.
pub fn steady_residual(p: &CanonicalDensity, pot: &Potentials, chi: f64, zeta: f64) -> f64 {
    let field = assemble_coefficients(p, pot, chi, zeta);
    cell_residuals(p, &field).iter().sum()
}

/// Pointwise residual density r_i/h_i on each cell.
pub fn pointwise_residual(p: &CanonicalDensity, pot: &Potentials, chi: f64, zeta: f64) -> Vec<f64> {
    let field = assemble_coefficients(p, pot, chi, zeta);
    cell_residuals(p, &field)
        .into_iter()
        .zip(field.grid.windows(2))
        .map(|(r, w)| r / (w[1] - w[0]))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveDiagnostics {
    pub residual: f64,
    pub steps: usize,
    pub mass_drift: f64,
    pub wealth_drift: f64,
    pub w_max: f64,
    pub tail_mass: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOutcome {
    pub density: CanonicalDensity,
    pub residual: f64,
    pub steps: usize,
    pub mass_drift: f64,
    pub wealth_drift: f64,
    /// Cutoff actually used after any automatic doubling.
    pub w_max: f64,
    /// Estimated agent mass beyond `w_max`.
    pub tail_mass: f64,
}

impl SolveOutcome {
    pub fn diagnostics(&self) -> SolveDiagnostics {
        SolveDiagnostics {
            residual: self.residual,
            steps: self.steps,
            mass_drift: self.mass_drift,
            wealth_drift: self.wealth_drift,
            w_max: self.w_max,
            tail_mass: self.tail_mass,
        }
    }
}

fn log_grid(w_min: f64, w_max: f64, n_cells: usize) -> Vec<f64> {
    let (lo, hi) = (w_min.ln(), w_max.ln());
    let step = (hi - lo) / n_cells as f64;
    let mut grid = Vec::with_capacity(n_cells + 2);
    grid.push(0.0);
    grid.extend((0..=n_cells).map(|i| (lo + step * i as f64).exp()));
    *grid.last_mut().unwrap() = w_max;
    grid
}

fn normalize(grid: &[f64], dens: &mut [f64]) {
    let mass = crate::quad::trapezoid(grid, dens);
    dens.iter_mut().for_each(|v| *v /= mass);
}

/// One application of T: the zero-flux solution of the frozen-potential ODE.
fn fixed_point_map(field: &DriftDiffusionField) -> Vec<f64> {
    let n = field.grid.len();
    let mut log_p = vec![f64::NEG_INFINITY; n];
    let mut acc = 0.0;
    let mut prev: Option<(usize, f64)> = None;
    #[allow(clippy::needless_range_loop)]
    for i in 0..n {
        let d = field.d[i];
        if !(d > 0.0) {
            prev = None;
            continue;
        }
        let q = field.sigma[i] / d;
        if let Some((j, q_prev)) = prev {
            acc += 0.5 * (q + q_prev) * (field.grid[i] - field.grid[j]);
        }
        log_p[i] = acc - d.ln();
        prev = Some((i, q));
    }
    let peak = log_p.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut dens: Vec<f64> = log_p.iter().map(|v| (v - peak).exp()).collect();
    normalize(&field.grid, &mut dens);
    dens
}

fn relax(
    chi: f64,
    zeta: f64,
    cfg: &SolverConfig,
    grid: Vec<f64>,
    mut dens: Vec<f64>,
) -> Result<(CanonicalDensity, f64, usize, DriftDiffusionField)> {
    normalize(&grid, &mut dens);
    let mut residual = f64::INFINITY;
    for step in 0..cfg.max_steps {
        let p = CanonicalDensity::canonical(grid.clone(), dens.clone())?;
        let pot = compute_potentials(&p)?;
        let field = assemble_coefficients(&p, &pot, chi, zeta);
        residual = cell_residuals(&p, &field).iter().sum();
        if !residual.is_finite() {
            break;
        }
        if residual <= cfg.tol_residual {
            return Ok((p, residual, step, field));
        }
        let target = fixed_point_map(&field);
        for (v, t) in dens.iter_mut().zip(&target) {
            *v += cfg.dt * (t - *v);
        }
        normalize(&grid, &mut dens);
    }
    Err(Error::Convergence {
        steps: cfg.max_steps,
        residual,
        w_max: *grid.last().unwrap(),
    })
}

/// Mass beyond the cutoff for a density decaying like exp(∫q): P(w_max)/|q(w_max)|.
fn tail_estimate(p: &CanonicalDensity, field: &DriftDiffusionField) -> f64 {
    let last = field.grid.len() - 1;
    let q = field.sigma[last] / field.d[last];
    let tip = *p.values().last().unwrap();
    if tip == 0.0 {
        0.0
    } else if q < 0.0 {
        tip / -q
    } else {
        f64::INFINITY
    }
}

/// Canonical steady state for 0 ≤ ζ < χ.
///
/// The cutoff starts at `cfg.w_max` and is doubled (warm-starting from the
/// previous solution) until the estimated mass beyond it is below
/// `cfg.tail_tol`.
pub fn solve_steady_subcritical(chi: f64, zeta: f64, cfg: &SolverConfig) -> Result<SolveOutcome> {
    cfg.validate()?;
    if !(chi > 0.0 && chi.is_finite()) {
        return Err(Error::domain(format!("chi must be positive, got {chi}")));
    }
    if !(zeta >= 0.0) {
        return Err(Error::domain(format!("zeta must be nonnegative, got {zeta}")));
    }
    if zeta >= chi {
        return Err(Error::domain(format!(
            "zeta = {zeta} >= chi = {chi} is not subcritical; solve the dual problem and apply duality"
        )));
    }

    let sam = SamParams::canonical(chi)?;
    let mut w_max = cfg.w_max;
    let mut grid = log_grid(cfg.w_min, w_max, cfg.n_cells);
    let mut init: Vec<f64> = grid
        .iter()
        .map(|&w| if w > 0.0 { sam_density(w, &sam).unwrap_or(0.0) } else { 0.0 })
        .collect();
    let mut total_steps = 0;
    loop {
        let (p, residual, steps, field) = relax(chi, zeta, cfg, grid.clone(), init)?;
        total_steps += steps;
        let tail_mass = tail_estimate(&p, &field);
        if tail_mass <= cfg.tail_tol {
            let mass_drift = (p.quadrature_mass() - 1.0).abs();
            let wealth_drift = (p.quadrature_wealth() - 1.0).abs();
            log::debug!(
                "solve chi={chi} zeta={zeta}: {total_steps} steps, residual {residual:.2e}, w_max {w_max}"
            );
            return Ok(SolveOutcome {
                density: p,
                residual,
                steps: total_steps,
                mass_drift,
                wealth_drift,
                w_max,
                tail_mass,
            });
        }
        w_max *= 2.0;
        if w_max > cfg.w_max_limit {
            return Err(Error::Convergence {
                steps: total_steps,
                residual,
                w_max,
            });
        }
        let old_grid = grid;
        grid = log_grid(cfg.w_min, w_max, cfg.n_cells);
        let top = *old_grid.last().unwrap();
        init = grid
            .iter()
            .map(|&w| if w <= top { interp(&old_grid, p.values(), w) } else { 0.0 })
            .collect();
    }
}

/// Canonical EYSM Lorenz curve at ⟨χ, ζ⟩, using duality when ζ > χ.
pub fn eysm_lorenz(chi: f64, zeta: f64, cfg: &SolverConfig, resolution: usize) -> Result<(LorenzCurve, SolveOutcome)> {
    if zeta == chi {
        return Err(Error::Unsupported(format!(
            "chi = zeta = {chi} is the critical point; no steady classical solution to solve for"
        )));
    }
    if zeta < chi {
        let out = solve_steady_subcritical(chi, zeta, cfg)?;
        let curve = lorenz_from_density_with(&out.density, resolution)?;
        Ok((curve, out))
    } else {
        let out = solve_steady_subcritical(zeta, chi, cfg)?;
        let sub = lorenz_from_density_with(&out.density, resolution)?;
        Ok((dual_lorenz(&sub, chi, zeta)?, out))
    }
}

/// Lorenz curve for any feasible θ by shift → duality → canonical solve.
pub fn model_lorenz(theta: &ParameterVector, cfg: &SolverConfig, resolution: usize) -> Result<LorenzCurve> {
    let (eysm, _) = eysm_lorenz(theta.chi(), theta.zeta(), cfg, resolution)?;
    awm_lorenz(&eysm, theta)
}

/// A full forward solve for θ: the Lorenz curve, the classical (non-oligarchical)
/// part of the canonical AWM density, and the underlying solver outcome.
#[derive(Debug, Clone)]
pub struct ModelSolution {
    pub theta: ParameterVector,
    pub curve: LorenzCurve,
    pub density: CanonicalDensity,
    pub outcome: SolveOutcome,
}

pub fn solve_model(theta: &ParameterVector, cfg: &SolverConfig, resolution: usize) -> Result<ModelSolution> {
    let (eysm, outcome) = eysm_lorenz(theta.chi(), theta.zeta(), cfg, resolution)?;
    let curve = awm_lorenz(&eysm, theta)?;
    // the classical part holds the fraction r of the EYSM wealth; wealth maps
    // as w → (1+λ)·r·w − λ
    let lambda = theta.lambda();
    let ratio = if theta.is_supercritical() { theta.chi() / theta.zeta() } else { 1.0 };
    let scaled = scale_density(&outcome.density, 1.0, (1.0 + lambda) * ratio)?;
    let density = translate_density(&scaled, lambda);
    Ok(ModelSolution {
        theta: *theta,
        curve,
        density,
        outcome,
    })
}
