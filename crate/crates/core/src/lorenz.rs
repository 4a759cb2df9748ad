//! Lorenz curves with negative dips and oligarchical termination, Gini
//! coefficients, and the curve-level duality and affine maps.

use serde::{Deserialize, Serialize};

use crate::density::{compute_potentials, CanonicalDensity};
use crate::error::{Error, Result};
use crate::params::ParameterVector;
use crate::quad::{interp, trapezoid, unit_grid};

/// Default number of points of the uniform f-grid used when resampling.
pub const DEFAULT_RESOLUTION: usize = 10_000;

/// Second-difference slack allowed before a curve counts as non-concave.
pub const CONCAVITY_TOL: f64 = 1e-8;

/// Piecewise-linear Lorenz curve on f ∈ [0, 1].
///
/// The last point is always (1, terminal). For a supercritical curve the
/// terminal value is the limit as f → 1⁻; the vertical segment up to 1 that
/// represents the oligarchy is implicit and never stored as grid mass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LorenzCurve {
    f: Vec<f64>,
    l: Vec<f64>,
    terminal: f64,
    is_supercritical: bool,
}

impl LorenzCurve {
    pub fn new(f: Vec<f64>, l: Vec<f64>, is_supercritical: bool) -> Result<Self> {
        if f.len() != l.len() {
            return Err(Error::input("Lorenz abscissae and values differ in length"));
        }
        if f.len() < 2 {
            return Err(Error::input("a Lorenz curve needs at least two points"));
        }
        if f.iter().chain(&l).any(|v| !v.is_finite()) {
            return Err(Error::input("Lorenz curve contains non-finite values"));
        }
        if f[0] != 0.0 || *f.last().unwrap() != 1.0 {
            return Err(Error::input("Lorenz abscissae must run from 0 to 1"));
        }
        if f.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::input("Lorenz abscissae must be nondecreasing"));
        }
        if l[0] != 0.0 {
            return Err(Error::input("Lorenz curve must start at (0, 0)"));
        }
        let terminal = *l.last().unwrap();
        if is_supercritical {
            if !(terminal > 0.0 && terminal < 1.0) {
                return Err(Error::input(format!(
                    "supercritical terminal must lie in (0, 1), got {terminal}"
                )));
            }
        } else if (terminal - 1.0).abs() > 1e-9 {
            return Err(Error::input(format!(
                "subcritical curve must end at 1, got {terminal}"
            )));
        }
        Ok(LorenzCurve {
            f,
            l,
            terminal,
            is_supercritical,
        })
    }

    /// Builds a curve, inferring the regime from the final value.
    pub fn from_points(f: Vec<f64>, l: Vec<f64>) -> Result<Self> {
        let last = l.last().copied().unwrap_or(1.0);
        let supercritical = (last - 1.0).abs() > 1e-9;
        Self::new(f, l, supercritical)
    }

    /// The line of perfect equality.
    pub fn diagonal(resolution: usize) -> Self {
        let f = unit_grid(resolution.max(2));
        let l = f.clone();
        LorenzCurve {
            f,
            l,
            terminal: 1.0,
            is_supercritical: false,
        }
    }

    pub fn f(&self) -> &[f64] {
        &self.f
    }

    pub fn l(&self) -> &[f64] {
        &self.l
    }

    pub fn len(&self) -> usize {
        self.f.len()
    }

    pub fn is_empty(&self) -> bool {
        self.f.is_empty()
    }

    pub fn terminal(&self) -> f64 {
        self.terminal
    }

    pub fn is_supercritical(&self) -> bool {
        self.is_supercritical
    }

    /// 𝓛(f) by linear interpolation; at f = 1 this returns the terminal value.
    pub fn eval(&self, f: f64) -> f64 {
        interp(&self.f, &self.l, f)
    }

    /// Same curve sampled on a uniform grid of `resolution` points.
    pub fn resample(&self, resolution: usize) -> LorenzCurve {
        let f = unit_grid(resolution.max(2));
        let mut l: Vec<f64> = f.iter().map(|&x| self.eval(x)).collect();
        l[0] = 0.0;
        *l.last_mut().unwrap() = self.terminal;
        LorenzCurve {
            f,
            l,
            terminal: self.terminal,
            is_supercritical: self.is_supercritical,
        }
    }

    /// Smallest slope-difference between consecutive segments; negative values
    /// mean the curve bends the wrong way.
    pub fn min_slope_increment(&self) -> f64 {
        let slopes: Vec<f64> = self
            .f
            .windows(2)
            .zip(self.l.windows(2))
            .filter(|(f, _)| f[1] > f[0])
            .map(|(f, l)| (l[1] - l[0]) / (f[1] - f[0]))
            .collect();
        slopes
            .windows(2)
            .map(|s| s[1] - s[0])
            .fold(f64::INFINITY, f64::min)
    }

    pub(crate) fn map_values(&self, l: Vec<f64>, terminal: f64, is_supercritical: bool) -> Self {
        LorenzCurve {
            f: self.f.clone(),
            l,
            terminal,
            is_supercritical,
        }
    }
}

/// Lorenz curve of a density on the default uniform f-grid.
pub fn lorenz_from_density(p: &CanonicalDensity) -> Result<LorenzCurve> {
    lorenz_from_density_with(p, DEFAULT_RESOLUTION)
}

/// Parametric curve (F(w), L(w)) resampled onto `resolution` uniform points.
pub fn lorenz_from_density_with(p: &CanonicalDensity, resolution: usize) -> Result<LorenzCurve> {
    let pot = compute_potentials(p)?;
    let f = unit_grid(resolution.max(2));
    let mut l: Vec<f64> = f.iter().map(|&x| interp(&pot.f, &pot.l, x)).collect();
    l[0] = 0.0;
    *l.last_mut().unwrap() = 1.0;
    Ok(LorenzCurve {
        f,
        l,
        terminal: 1.0,
        is_supercritical: false,
    })
}

/// Three-point derivative of y(x) at every node of a strictly increasing grid,
/// centered in the interior and one-sided (second order) at both ends.
fn three_point_derivative(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    if n == 2 {
        let s = (y[1] - y[0]) / (x[1] - x[0]);
        return vec![s, s];
    }
    let mut d = vec![0.0; n];
    for i in 1..n - 1 {
        let h1 = x[i] - x[i - 1];
        let h2 = x[i + 1] - x[i];
        d[i] = -h2 / (h1 * (h1 + h2)) * y[i - 1]
            + (h2 - h1) / (h1 * h2) * y[i]
            + h1 / (h2 * (h1 + h2)) * y[i + 1];
    }
    let (h1, h2) = (x[1] - x[0], x[2] - x[1]);
    d[0] = -(2.0 * h1 + h2) / (h1 * (h1 + h2)) * y[0] + (h1 + h2) / (h1 * h2) * y[1]
        - h1 / (h2 * (h1 + h2)) * y[2];
    let (h1, h2) = (x[n - 2] - x[n - 3], x[n - 1] - x[n - 2]);
    d[n - 1] = h2 / (h1 * (h1 + h2)) * y[n - 3] - (h1 + h2) / (h1 * h2) * y[n - 2]
        + (2.0 * h2 + h1) / (h2 * (h1 + h2)) * y[n - 1];
    d
}

/// Slope of the chord through the two neighbours of each node (one-sided at
/// the ends). Unlike the three-point stencil it stays bounded when adjacent
/// spacings differ by orders of magnitude, which happens for wealth nodes
/// read off a piecewise-linear curve.
fn secant_derivative(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    (0..n)
        .map(|i| {
            let (a, b) = (i.saturating_sub(1), (i + 1).min(n - 1));
            (y[b] - y[a]) / (x[b] - x[a])
        })
        .collect()
}

/// Recovers P(w) from a subcritical Lorenz curve and the totals N, W:
/// w(f) = (W/N)·𝓛′(f), inverted to F(w), then P = N·F′(w).
pub fn density_from_lorenz(curve: &LorenzCurve, n: f64, w: f64) -> Result<CanonicalDensity> {
    if curve.is_supercritical() {
        return Err(Error::Unsupported(
            "an oligarchical curve has no classical density".into(),
        ));
    }
    if !(n > 0.0 && w > 0.0) {
        return Err(Error::domain("density recovery needs positive N and W"));
    }
    // distinct abscissae only
    let mut fs = Vec::with_capacity(curve.len());
    let mut ls = Vec::with_capacity(curve.len());
    for (&f, &l) in curve.f().iter().zip(curve.l()) {
        if fs.last().is_none_or(|&prev| f > prev) {
            fs.push(f);
            ls.push(l);
        }
    }
    if fs.len() < 2 {
        return Err(Error::input("curve has too few distinct abscissae"));
    }
    let kink = curve.min_slope_increment();
    if kink < -CONCAVITY_TOL {
        return Err(Error::input(format!(
            "curve is not concave up (slope decreases by {:.3e})",
            -kink
        )));
    }
    let mean = w / n;
    let mut wealth: Vec<f64> = three_point_derivative(&fs, &ls)
        .into_iter()
        .map(|s| s * mean)
        .collect();
    for i in 1..wealth.len() {
        if wealth[i] < wealth[i - 1] {
            wealth[i] = wealth[i - 1];
        }
    }

    // Collapse runs of equal wealth (linear stretches) into one node at the
    // midpoint of their f-range.
    let scale = wealth.iter().fold(mean.abs(), |m, v| m.max(v.abs()));
    let tie = 1e-12 * scale;
    let mut grid: Vec<f64> = Vec::new();
    let mut cdf: Vec<f64> = Vec::new();
    let mut i = 0;
    while i < wealth.len() {
        let mut j = i;
        while j + 1 < wealth.len() && wealth[j + 1] - wealth[i] <= tie {
            j += 1;
        }
        grid.push(wealth[i]);
        cdf.push(0.5 * (fs[i] + fs[j]));
        i = j + 1;
    }

    if grid.len() < 3 {
        // equal wealth: the narrowest peak this grid resolution can carry
        let centre = grid[0];
        let half_width = mean.abs() / fs.len() as f64;
        let height = n / half_width;
        return CanonicalDensity::new(
            vec![centre - half_width, centre, centre + half_width],
            vec![0.0, height, 0.0],
            n,
            w,
        );
    }

    let density: Vec<f64> = secant_derivative(&grid, &cdf)
        .into_iter()
        .map(|d| (n * d).max(0.0))
        .collect();
    CanonicalDensity::new(grid, density, n, w)
}

/// G = 1 − 2∫₀¹ 𝓛(f) df by trapezoid quadrature on the curve's own points.
pub fn gini(curve: &LorenzCurve) -> f64 {
    1.0 - 2.0 * trapezoid(curve.f(), curve.l())
}

/// G = 1 − (2/W)∫P(w)A(w)w dw, valid for nonnegative support only.
pub fn gini_density_form(p: &CanonicalDensity) -> Result<f64> {
    if p.support_lo() < 0.0 {
        return Err(Error::Unsupported(
            "density-form Gini requires nonnegative support; use the Lorenz form".into(),
        ));
    }
    let pot = compute_potentials(p)?;
    let integrand: Vec<f64> = p
        .grid()
        .iter()
        .zip(p.values())
        .zip(&pot.a)
        .map(|((w, v), a)| v * a * w)
        .collect();
    Ok(1.0 - 2.0 / pot.w * trapezoid(p.grid(), &integrand))
}

/// Supercritical curve at ⟨χ, ζ⟩ from the subcritical curve at ⟨ζ, χ⟩:
/// 𝓛_sup(f) = (χ/ζ)·𝓛_sub(f) on [0, 1), terminating at χ/ζ.
pub fn dual_lorenz(sub: &LorenzCurve, chi: f64, zeta: f64) -> Result<LorenzCurve> {
    if !(chi > 0.0 && zeta > chi) {
        return Err(Error::domain(format!(
            "duality applies only to supercritical parameters (zeta > chi > 0), got chi = {chi}, zeta = {zeta}"
        )));
    }
    if sub.is_supercritical() {
        return Err(Error::input("duality expects a subcritical input curve"));
    }
    let ratio = chi / zeta;
    let l = sub.l().iter().map(|v| ratio * v).collect();
    Ok(sub.map_values(l, ratio, true))
}

/// AWM curve from the (duality-resolved) EYSM curve at the same ⟨χ, ζ⟩:
/// 𝓛_AWM(f) = (1+λ)·𝓛_EYSM(f) − λf.
pub fn awm_lorenz(eysm: &LorenzCurve, theta: &ParameterVector) -> Result<LorenzCurve> {
    let lambda = theta.lambda();
    if lambda == 0.0 {
        return Ok(eysm.clone());
    }
    let terminal = if eysm.is_supercritical() {
        (1.0 + lambda) * eysm.terminal() - lambda
    } else {
        1.0
    };
    if terminal <= 0.0 {
        return Err(Error::Infeasible(format!(
            "non-oligarchical wealth fraction {terminal} is not positive (chi <= kappa*zeta)"
        )));
    }
    let mut l: Vec<f64> = eysm
        .f()
        .iter()
        .zip(eysm.l())
        .map(|(f, l)| (1.0 + lambda) * l - lambda * f)
        .collect();
    l[0] = 0.0;
    *l.last_mut().unwrap() = terminal;
    Ok(eysm.map_values(l, terminal, eysm.is_supercritical()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square_curve(n: usize) -> LorenzCurve {
        let f = unit_grid(n);
        let l = f.iter().map(|x| x * x).collect();
        LorenzCurve::new(f, l, false).unwrap()
    }

    fn uniform_density(n: usize) -> CanonicalDensity {
        let grid: Vec<f64> = (0..=n).map(|i| 2.0 * i as f64 / n as f64).collect();
        CanonicalDensity::canonical(grid, vec![0.5; n + 1]).unwrap()
    }

    #[test]
    fn curve_validation() {
        assert!(LorenzCurve::new(vec![0.0, 1.0], vec![0.1, 1.0], false).is_err());
        assert!(LorenzCurve::new(vec![0.0, 0.9], vec![0.0, 1.0], false).is_err());
        assert!(LorenzCurve::new(vec![0.0, 1.0], vec![0.0, 0.7], false).is_err());
        assert!(LorenzCurve::new(vec![0.0, 1.0], vec![0.0, 1.2], true).is_err());
        let c = LorenzCurve::from_points(vec![0.0, 0.5, 1.0], vec![0.0, 0.2, 0.7]).unwrap();
        assert!(c.is_supercritical());
        assert_eq!(c.terminal(), 0.7);
    }

    #[test]
    fn uniform_density_gives_square_curve() {
        // F = w/2, L = w²/4, so 𝓛(f) = f².
        let c = lorenz_from_density_with(&uniform_density(4000), 1001).unwrap();
        for (f, l) in c.f().iter().zip(c.l()) {
            assert!((l - f * f).abs() < 1e-6, "f = {f}: {l}");
        }
        assert_eq!(c.terminal(), 1.0);
    }

    #[test]
    fn equal_wealth_gives_diagonal() {
        let grid = vec![0.0, 1.0 - 1e-6, 1.0, 1.0 + 1e-6, 3.0];
        let dens = vec![0.0, 0.0, 1e6, 0.0, 0.0];
        let p = CanonicalDensity::canonical(grid, dens).unwrap();
        let c = lorenz_from_density_with(&p, 101).unwrap();
        for (f, l) in c.f().iter().zip(c.l()) {
            assert!((l - f).abs() < 1e-5);
        }
        assert!(gini(&c).abs() < 1e-5);
    }

    #[test]
    fn negative_wealth_dips() {
        // uniform on [-0.5, 2.5] has mean 1 and 1/6 of agents below zero
        let n = 3000;
        let grid: Vec<f64> = (0..=n).map(|i| -0.5 + 3.0 * i as f64 / n as f64).collect();
        let p = CanonicalDensity::canonical(grid, vec![1.0 / 3.0; n + 1]).unwrap();
        let c = lorenz_from_density_with(&p, 601).unwrap();
        let min = c.l().iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(min < 0.0);
        let argmin = c.l().iter().position(|&v| v == min).unwrap();
        assert!((c.f()[argmin] - 1.0 / 6.0).abs() < 2e-3);
        assert!(gini_density_form(&p).is_err());
    }

    #[test]
    fn square_curve_recovers_uniform_density() {
        let d = density_from_lorenz(&square_curve(2001), 1.0, 1.0).unwrap();
        assert!(d.support_lo().abs() < 1e-12);
        assert!((d.grid().last().unwrap() - 2.0).abs() < 1e-12);
        for v in d.values() {
            assert!((v - 0.5).abs() < 1e-9);
        }
    }

    #[test]
    fn diagonal_recovers_narrow_peak() {
        let d = density_from_lorenz(&LorenzCurve::diagonal(1000), 1.0, 1.0).unwrap();
        assert_eq!(d.grid().len(), 3);
        assert_eq!(d.grid()[1], 1.0);
        assert!((d.quadrature_mass() - 1.0).abs() < 1e-12);
        assert!((d.quadrature_wealth() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn density_recovery_rejects_bad_curves() {
        let sup = LorenzCurve::new(vec![0.0, 0.5, 1.0], vec![0.0, 0.1, 0.5], true).unwrap();
        assert!(matches!(density_from_lorenz(&sup, 1.0, 1.0), Err(Error::Unsupported(_))));
        let concave_down =
            LorenzCurve::new(vec![0.0, 0.5, 1.0], vec![0.0, 0.7, 1.0], false).unwrap();
        assert!(density_from_lorenz(&concave_down, 1.0, 1.0).is_err());
    }

    #[test]
    fn gini_examples() {
        assert!(gini(&LorenzCurve::diagonal(11)).abs() < 1e-15);
        // complete oligarchy: 𝓛 ≡ 0 on [0, 1)
        let f = unit_grid(100_001);
        let mut l = vec![0.0; f.len()];
        *l.last_mut().unwrap() = 1e-300;
        let olig = LorenzCurve::new(f, l, true).unwrap();
        assert!((gini(&olig) - 1.0).abs() < 1e-12);
        // 𝓛 = f² gives 1/3, exactly up to the trapezoid error h²/3
        let g = gini(&square_curve(10_001));
        assert!((g - 1.0 / 3.0).abs() < 1e-8);
        let gd = gini_density_form(&uniform_density(4000)).unwrap();
        assert!((gd - 1.0 / 3.0).abs() < 1e-6);
    }

    #[test]
    fn duality_examples() {
        let sub = square_curve(101);
        let sup = dual_lorenz(&sub, 0.5, 1.0).unwrap();
        assert!(sup.is_supercritical());
        assert_eq!(sup.terminal(), 0.5);
        assert!((sup.eval(0.5) - 0.125).abs() < 1e-15);
        let nearly = dual_lorenz(&sub, 0.999_999_999, 1.0).unwrap();
        for (a, b) in nearly.l().iter().zip(sub.l()) {
            assert!((a - b).abs() < 1e-8);
        }
        assert!(dual_lorenz(&sub, 1.0, 0.5).is_err());
        assert!(dual_lorenz(&sub, 1.0, 1.0).is_err());
    }

    #[test]
    fn awm_map_examples() {
        let sub = square_curve(101);
        let zero = ParameterVector::new(0.1, 0.05, 0.0).unwrap();
        assert_eq!(awm_lorenz(&sub, &zero).unwrap(), sub);

        let theta = ParameterVector::new(0.1, 0.05, 0.3).unwrap();
        let c = awm_lorenz(&sub, &theta).unwrap();
        assert_eq!(c.terminal(), 1.0);
        assert_eq!(c.l()[0], 0.0);
        assert!(c.l()[10] < 0.0);

        let theta = ParameterVector::new(0.036, 0.050, 0.058).unwrap();
        let sup = dual_lorenz(&sub, theta.chi(), theta.zeta()).unwrap();
        let c = awm_lorenz(&sup, &theta).unwrap();
        let expected = (1.0 + theta.lambda()) * 0.72 - theta.lambda();
        assert!((c.terminal() - expected).abs() < 1e-12);
        assert!((c.terminal() - 0.7028).abs() < 5e-5);
    }
}
