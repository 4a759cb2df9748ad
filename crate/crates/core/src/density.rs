//! Gridded agent densities, their Pareto-Lorenz potentials, and the exact
//! scale and shift symmetries acting on them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::ParameterVector;
use crate::quad::{cumulative_trapezoid, is_strictly_increasing, trapezoid};

/// Agent density P(w) tabulated on a strictly increasing wealth grid.
///
/// `n_total` and `w_total` are the nominal agent count and total wealth the
/// density represents (both 1 in canonical form). The grid starts at the
/// lower support endpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CanonicalDensity {
    grid: Vec<f64>,
    density: Vec<f64>,
    n_total: f64,
    w_total: f64,
}

impl CanonicalDensity {
    pub fn new(grid: Vec<f64>, density: Vec<f64>, n_total: f64, w_total: f64) -> Result<Self> {
        if grid.len() != density.len() {
            return Err(Error::input(format!(
                "grid has {} points but density has {}",
                grid.len(),
                density.len()
            )));
        }
        if grid.len() < 2 {
            return Err(Error::input("density needs at least two grid points"));
        }
        if !is_strictly_increasing(&grid) {
            return Err(Error::input("density grid must be strictly increasing"));
        }
        if density.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(Error::input("density values must be finite and nonnegative"));
        }
        if !(n_total > 0.0 && w_total.is_finite()) {
            return Err(Error::input("n_total must be positive and w_total finite"));
        }
        Ok(CanonicalDensity {
            grid,
            density,
            n_total,
            w_total,
        })
    }

    /// Canonical density (N = W = 1).
    pub fn canonical(grid: Vec<f64>, density: Vec<f64>) -> Result<Self> {
        Self::new(grid, density, 1.0, 1.0)
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.density
    }

    pub fn support_lo(&self) -> f64 {
        self.grid[0]
    }

    pub fn n_total(&self) -> f64 {
        self.n_total
    }

    pub fn w_total(&self) -> f64 {
        self.w_total
    }

    pub fn mean_wealth(&self) -> f64 {
        self.w_total / self.n_total
    }

    /// ∫P dw by trapezoid quadrature.
    pub fn quadrature_mass(&self) -> f64 {
        trapezoid(&self.grid, &self.density)
    }

    /// ∫P·w dw by trapezoid quadrature.
    pub fn quadrature_wealth(&self) -> f64 {
        let pw: Vec<f64> = self.grid.iter().zip(&self.density).map(|(w, p)| w * p).collect();
        trapezoid(&self.grid, &pw)
    }

    pub fn into_parts(self) -> (Vec<f64>, Vec<f64>) {
        (self.grid, self.density)
    }
}

/// Pareto-Lorenz potentials tabulated on a density grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Potentials {
    pub grid: Vec<f64>,
    /// Cumulative agent fraction.
    pub f: Vec<f64>,
    /// Complementary agent fraction, 1 − F.
    pub a: Vec<f64>,
    /// Cumulative wealth fraction.
    pub l: Vec<f64>,
    /// (1/N)∫ P x²/2 dx from the lower support endpoint.
    pub b: Vec<f64>,
    /// Quadrature agent count used for normalization.
    pub n: f64,
    /// Quadrature total wealth used for normalization.
    pub w: f64,
}

/// Cumulative trapezoid potentials. Normalization uses the quadrature totals,
/// so F and L end at exactly 1.
pub fn compute_potentials(p: &CanonicalDensity) -> Result<Potentials> {
    let grid = p.grid();
    let dens = p.values();
    let pw: Vec<f64> = grid.iter().zip(dens).map(|(w, v)| w * v).collect();
    let pw2: Vec<f64> = grid.iter().zip(&pw).map(|(w, v)| 0.5 * w * v).collect();
    let cum_n = cumulative_trapezoid(grid, dens);
    let cum_w = cumulative_trapezoid(grid, &pw);
    let cum_b = cumulative_trapezoid(grid, &pw2);
    let n = *cum_n.last().unwrap();
    let w = *cum_w.last().unwrap();
    if n <= 0.0 {
        return Err(Error::Degenerate("density has zero mass".into()));
    }
    if w <= 0.0 {
        return Err(Error::Degenerate("density has nonpositive total wealth".into()));
    }
    let f: Vec<f64> = cum_n.iter().map(|c| c / n).collect();
    let a = f.iter().map(|v| 1.0 - v).collect();
    let l = cum_w.iter().map(|c| c / w).collect();
    let b = cum_b.iter().map(|c| c / n).collect();
    Ok(Potentials {
        grid: grid.to_vec(),
        f,
        a,
        l,
        b,
        n,
        w,
    })
}

/// Applies P(w; N, W) = (N/(W/N))·P(w/(W/N); 1, 1) to a canonical density.
pub fn scale_density(p: &CanonicalDensity, n: f64, w: f64) -> Result<CanonicalDensity> {
    if !(n > 0.0 && w > 0.0 && n.is_finite() && w.is_finite()) {
        return Err(Error::domain(format!(
            "scale requires positive agent count and wealth, got n = {n}, w = {w}"
        )));
    }
    let mean = w / n;
    let height = n / mean;
    let grid = p.grid.iter().map(|x| x * mean).collect();
    let density = p.density.iter().map(|v| v * height).collect();
    CanonicalDensity::new(grid, density, p.n_total * n, p.w_total * w)
}

/// Translates an EYSM density left by Δ = κ·μ̄, where μ̄ is the mean of the
/// input. An input carrying total wealth (1+λ)W comes out with total wealth W
/// and support starting at −λμ.
pub fn shift_density(eysm: &CanonicalDensity, theta: &ParameterVector) -> CanonicalDensity {
    translate_density(eysm, theta.kappa() * eysm.mean_wealth())
}

/// Moves every agent down by `delta` (total wealth drops by N·delta).
pub fn translate_density(p: &CanonicalDensity, delta: f64) -> CanonicalDensity {
    CanonicalDensity {
        grid: p.grid.iter().map(|x| x - delta).collect(),
        density: p.density.clone(),
        n_total: p.n_total,
        w_total: p.w_total - delta * p.n_total,
    }
}

/// Maps a canonical EYSM solution (μ̄ = 1) to the canonical AWM density
/// (μ = 1) for θ: scale to total wealth 1+λ, then shift by λ.
pub fn awm_density(eysm_canonical: &CanonicalDensity, theta: &ParameterVector) -> Result<CanonicalDensity> {
    let scaled = scale_density(eysm_canonical, 1.0, 1.0 + theta.lambda())?;
    Ok(shift_density(&scaled, theta))
}

/// AWM potentials from the barred (EYSM, shifted-wealth) potentials:
/// F = F̄, A = Ā, L = (1+λ)L̄ − λF̄, B = B̄ − κμ̄²(L̄ − κF̄/2).
/// The grid is translated by −κμ̄.
pub fn awm_potentials(barred: &Potentials, theta: &ParameterVector) -> Potentials {
    let kappa = theta.kappa();
    let lambda = theta.lambda();
    let mu_bar = barred.w / barred.n;
    let delta = kappa * mu_bar;
    let l = barred
        .l
        .iter()
        .zip(&barred.f)
        .map(|(l, f)| (1.0 + lambda) * l - lambda * f)
        .collect();
    let b = barred
        .b
        .iter()
        .zip(barred.l.iter().zip(&barred.f))
        .map(|(b, (l, f))| b - kappa * mu_bar * mu_bar * (l - kappa * f / 2.0))
        .collect();
    Potentials {
        grid: barred.grid.iter().map(|x| x - delta).collect(),
        f: barred.f.clone(),
        a: barred.a.clone(),
        l,
        b,
        n: barred.n,
        w: barred.w - delta * barred.n,
    }
}

/// Inverse of [`awm_potentials`]: L̄ = (1−κ)L + κF, B̄ = B + λμ²(L + λF/2).
pub fn barred_potentials(awm: &Potentials, theta: &ParameterVector) -> Potentials {
    let kappa = theta.kappa();
    let lambda = theta.lambda();
    let mu = awm.w / awm.n;
    let delta = lambda * mu;
    let l = awm
        .l
        .iter()
        .zip(&awm.f)
        .map(|(l, f)| (1.0 - kappa) * l + kappa * f)
        .collect();
    let b = awm
        .b
        .iter()
        .zip(awm.l.iter().zip(&awm.f))
        .map(|(b, (l, f))| b + lambda * mu * mu * (l + lambda * f / 2.0))
        .collect();
    Potentials {
        grid: awm.grid.iter().map(|x| x + delta).collect(),
        f: awm.f.clone(),
        a: awm.a.clone(),
        l,
        b,
        n: awm.n,
        w: awm.w + delta * awm.n,
    }
}
