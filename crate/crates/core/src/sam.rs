//! Closed-form steady state of the single-agent model with redistribution.
//!
//! The density is inverse-gamma shaped: P(w) = (N/μ)(2χ)^{2χ}/Γ(2χ)·(μ/w)^{2χ+2}·e^{−2χμ/w},
//! with F(w) = Q(2χ+1, 2χμ/w), L(w) = Q(2χ, 2χμ/w) and Lorenz curve
//! 𝓛(f) = Q(2χ, Q⁻¹(2χ+1, f)).

use crate::density::CanonicalDensity;
use crate::error::{Error, Result};
use crate::gamma::{ln_gamma, reg_gamma_q, reg_gamma_q_inv};
use crate::lorenz::LorenzCurve;
use crate::quad::unit_grid;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamParams {
    pub chi: f64,
    pub mu: f64,
}

impl SamParams {
    pub fn new(chi: f64, mu: f64) -> Result<Self> {
        if !(chi > 0.0 && chi.is_finite()) {
            return Err(Error::domain(format!("chi must be positive, got {chi}")));
        }
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(Error::domain(format!("mean wealth must be positive, got {mu}")));
        }
        Ok(SamParams { chi, mu })
    }

    pub fn canonical(chi: f64) -> Result<Self> {
        Self::new(chi, 1.0)
    }
}

/// Agent density at wealth w > 0 (N = 1).
pub fn sam_density(w: f64, p: &SamParams) -> Result<f64> {
    if !(w > 0.0) {
        return Err(Error::domain(format!("SAM density is defined for w > 0, got {w}")));
    }
    let a = 2.0 * p.chi;
    let ratio = p.mu / w;
    let ln = a * a.ln() - ln_gamma(a) + (a + 2.0) * ratio.ln() - a * ratio - p.mu.ln();
    Ok(ln.exp())
}

/// Fraction of agents with wealth below w.
pub fn sam_cdf(w: f64, p: &SamParams) -> f64 {
    if w <= 0.0 {
        return 0.0;
    }
    let a = 2.0 * p.chi;
    reg_gamma_q(a + 1.0, a * p.mu / w).expect("shape is positive")
}

/// Fraction of wealth held by agents with wealth below w.
pub fn sam_wealth_fraction(w: f64, p: &SamParams) -> f64 {
    if w <= 0.0 {
        return 0.0;
    }
    let a = 2.0 * p.chi;
    reg_gamma_q(a, a * p.mu / w).expect("shape is positive")
}

/// 𝓛(f) = Q(2χ, Q⁻¹(2χ+1, f)).
pub fn sam_lorenz(f: f64, chi: f64) -> Result<f64> {
    if !(chi > 0.0) {
        return Err(Error::domain(format!("chi must be positive, got {chi}")));
    }
    if !(0.0..=1.0).contains(&f) {
        return Err(Error::domain(format!("f must lie in [0, 1], got {f}")));
    }
    if f == 0.0 {
        return Ok(0.0);
    }
    if f == 1.0 {
        return Ok(1.0);
    }
    let a = 2.0 * chi;
    let z = reg_gamma_q_inv(a + 1.0, f)?;
    reg_gamma_q(a, z)
}

/// The analytic curve sampled on a uniform f-grid.
pub fn sam_lorenz_curve(chi: f64, resolution: usize) -> Result<LorenzCurve> {
    let f = unit_grid(resolution.max(2));
    let l = f.iter().map(|&x| sam_lorenz(x, chi)).collect::<Result<Vec<_>>>()?;
    LorenzCurve::new(f, l, false)
}

/// The density tabulated on `n` log-spaced points of [w_lo, w_hi]·μ, with a
/// leading node at w = 0 where the density vanishes.
pub fn sam_density_grid(p: &SamParams, w_lo: f64, w_hi: f64, n: usize) -> Result<CanonicalDensity> {
    if !(w_lo > 0.0 && w_hi > w_lo && n >= 2) {
        return Err(Error::input("log grid needs 0 < w_lo < w_hi and at least two points"));
    }
    let (ln_lo, ln_hi) = ((w_lo * p.mu).ln(), (w_hi * p.mu).ln());
    let step = (ln_hi - ln_lo) / (n - 1) as f64;
    let mut grid = Vec::with_capacity(n + 1);
    grid.push(0.0);
    grid.extend((0..n).map(|i| (ln_lo + step * i as f64).exp()));
    let density = std::iter::once(Ok(0.0))
        .chain(grid[1..].iter().map(|&w| sam_density(w, p)))
        .collect::<Result<Vec<_>>>()?;
    CanonicalDensity::new(grid, density, 1.0, p.mu)
}
