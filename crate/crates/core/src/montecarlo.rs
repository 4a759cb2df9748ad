//! Agent-based simulation of the SAM, EYSM and AWM transaction processes.
//!
//! One sweep is n/2 pair transactions between independently drawn agent
//! pairs, followed by one flat-tax redistribution applied to everyone. A
//! sweep advances transactional time by `dt`, so `sweeps·dt` is the elapsed
//! time in the same units the Fokker-Planck solver uses.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::empirical::EmpiricalDistribution;
use crate::error::{Error, Result};
use crate::lorenz::LorenzCurve;
use crate::params::ParameterVector;
use crate::quad::unit_grid;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Sam,
    Eysm,
    Awm,
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sam" => Ok(ModelKind::Sam),
            "eysm" => Ok(ModelKind::Eysm),
            "awm" => Ok(ModelKind::Awm),
            other => Err(Error::input(format!("unknown simulation model '{other}' (sam, eysm, awm)"))),
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::Sam => "sam",
            ModelKind::Eysm => "eysm",
            ModelKind::Awm => "awm",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub n_agents: usize,
    pub dt: f64,
    pub sweeps: u64,
    pub seed: u64,
    pub theta: ParameterVector,
    pub model: ModelKind,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_agents < 2 {
            return Err(Error::domain("a simulation needs at least two agents"));
        }
        if !(self.dt > 0.0 && self.dt <= 1.0) {
            return Err(Error::domain(format!("dt must lie in (0, 1], got {}", self.dt)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WealthEnsemble {
    pub wealths: Vec<f64>,
    /// Elapsed transactional time.
    pub time: f64,
    pub seed: u64,
    /// Number of pair transactions whose coin bias had to be clamped to ±1.
    pub clamp_events: u64,
}

impl WealthEnsemble {
    pub fn total(&self) -> f64 {
        self.wealths.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.total() / self.wealths.len() as f64
    }
}

/// Coin bias b = ζ√dt·(w − x)/μ̄ clamped to [−1, 1]; the flag reports a clamp.
pub fn coin_bias(w: f64, x: f64, zeta: f64, mu_bar: f64, dt: f64) -> (f64, bool) {
    let b = zeta * dt.sqrt() * (w - x) / mu_bar;
    if b > 1.0 {
        (1.0, true)
    } else if b < -1.0 {
        (-1.0, true)
    } else {
        (b, false)
    }
}

/// η = ±1 with P(η = +1) = (1 + b)/2.
fn draw_eta<R: Rng + ?Sized>(b: f64, rng: &mut R) -> f64 {
    if rng.gen::<f64>() < 0.5 * (1.0 + b) {
        1.0
    } else {
        -1.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairOutcome {
    pub w: f64,
    pub x: f64,
    pub eta: f64,
    pub clamped: bool,
}

/// One EYSM transaction: Δw = √dt·min(w, x)·η, and x loses what w gains.
/// `mu_bar` is the mean wealth that normalizes the advantage term.
pub fn eysm_pair_step<R: Rng + ?Sized>(
    w: f64,
    x: f64,
    zeta: f64,
    mu_bar: f64,
    dt: f64,
    rng: &mut R,
) -> Result<PairOutcome> {
    if !(w > 0.0 && x > 0.0) {
        return Err(Error::domain(format!("pair wealths must be positive, got ({w}, {x})")));
    }
    let (b, clamped) = coin_bias(w, x, zeta, mu_bar, dt);
    let eta = draw_eta(b, rng);
    let dw = dt.sqrt() * w.min(x) * eta;
    Ok(PairOutcome {
        w: w + dw,
        x: x - dw,
        eta,
        clamped,
    })
}

/// w ← w + χ·dt·(μ − w) for every agent, μ the current ensemble mean.
pub fn redistribute_sweep(ensemble: &mut WealthEnsemble, chi: f64, dt: f64) {
    let rate = chi * dt;
    if rate == 0.0 {
        return;
    }
    let mu = ensemble.mean();
    if rate == 1.0 {
        ensemble.wealths.iter_mut().for_each(|w| *w = mu);
        return;
    }
    for w in ensemble.wealths.iter_mut() {
        *w += rate * (mu - *w);
    }
}

/// A running simulation that can be advanced in chunks, for snapshotting.
pub struct Simulation {
    cfg: SimConfig,
    rng: ChaCha8Rng,
    ensemble: WealthEnsemble,
    /// Additive shift Δ = λμ (zero except for the AWM).
    shift: f64,
}

impl Simulation {
    /// Starts every agent at the mean wealth 1.
    pub fn new(cfg: SimConfig) -> Result<Self> {
        cfg.validate()?;
        let shift = match cfg.model {
            ModelKind::Awm => cfg.theta.lambda(),
            _ => 0.0,
        };
        Ok(Simulation {
            cfg,
            rng: ChaCha8Rng::seed_from_u64(cfg.seed),
            ensemble: WealthEnsemble {
                wealths: vec![1.0; cfg.n_agents],
                time: 0.0,
                seed: cfg.seed,
                clamp_events: 0,
            },
            shift,
        })
    }

    pub fn config(&self) -> &SimConfig {
        &self.cfg
    }

    pub fn ensemble(&self) -> &WealthEnsemble {
        &self.ensemble
    }

    pub fn into_ensemble(self) -> WealthEnsemble {
        self.ensemble
    }

    pub fn advance(&mut self, sweeps: u64) {
        for _ in 0..sweeps {
            self.sweep();
        }
    }

    fn sweep(&mut self) {
        let n = self.cfg.n_agents;
        let dt = self.cfg.dt;
        let sqrt_dt = dt.sqrt();
        let zeta = self.cfg.theta.zeta();
        let shift = self.shift;
        let wealths = &mut self.ensemble.wealths;
        match self.cfg.model {
            ModelKind::Sam => {
                for w in wealths.iter_mut() {
                    let eta = draw_eta(0.0, &mut self.rng);
                    *w += sqrt_dt * *w * eta;
                }
            }
            ModelKind::Eysm | ModelKind::Awm => {
                // wealth is conserved by every pair step, so μ̄ is fixed for the sweep
                let mu_bar = wealths.iter().sum::<f64>() / n as f64 + shift;
                for _ in 0..n / 2 {
                    let i = self.rng.gen_range(0..n);
                    let mut j = self.rng.gen_range(0..n - 1);
                    if j >= i {
                        j += 1;
                    }
                    let (wi, wj) = (wealths[i] + shift, wealths[j] + shift);
                    let (b, clamped) = coin_bias(wi, wj, zeta, mu_bar, dt);
                    self.ensemble.clamp_events += clamped as u64;
                    let dw = sqrt_dt * wi.min(wj) * draw_eta(b, &mut self.rng);
                    wealths[i] += dw;
                    wealths[j] -= dw;
                }
            }
        }
        redistribute_sweep(&mut self.ensemble, self.cfg.theta.chi(), dt);
        self.ensemble.time += dt;
    }
}

/// Runs `cfg.sweeps` sweeps from the equal-wealth state. Deterministic in the seed.
pub fn run(cfg: &SimConfig) -> Result<WealthEnsemble> {
    let mut sim = Simulation::new(*cfg)?;
    sim.advance(cfg.sweeps);
    Ok(sim.into_ensemble())
}

/// Lorenz ordinates of the ensemble with equal agent weights.
pub fn empirical_lorenz(ensemble: &WealthEnsemble) -> Result<LorenzCurve> {
    if ensemble.wealths.len() < 2 {
        return Err(Error::input("an ensemble needs at least two agents"));
    }
    let dist = EmpiricalDistribution::from_pairs(ensemble.wealths.iter().map(|&w| (1.0, w)))?;
    dist.canonicalize()?.lorenz_ordinates()
}

/// Runs `burn_in` sweeps, then averages `snapshots` Lorenz curves taken every
/// `interval` sweeps, each resampled to `resolution` uniform points.
pub fn averaged_lorenz(
    cfg: &SimConfig,
    burn_in: u64,
    snapshots: usize,
    interval: u64,
    resolution: usize,
) -> Result<(LorenzCurve, WealthEnsemble)> {
    if snapshots == 0 {
        return Err(Error::input("at least one snapshot is required"));
    }
    let mut sim = Simulation::new(*cfg)?;
    sim.advance(burn_in);
    let f = unit_grid(resolution.max(2));
    let mut acc = vec![0.0; f.len()];
    for k in 0..snapshots {
        if k > 0 {
            sim.advance(interval);
        }
        let curve = empirical_lorenz(sim.ensemble())?;
        for (a, &x) in acc.iter_mut().zip(&f) {
            *a += curve.eval(x);
        }
    }
    let l: Vec<f64> = acc.iter().map(|a| a / snapshots as f64).collect();
    Ok((LorenzCurve::new(f, l, false)?, sim.into_ensemble()))
}

/// Concentration at the top of an ensemble, for spotting condensation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TopShares {
    pub top_agent: f64,
    /// Share of the richest ⌈fraction·n⌉ agents.
    pub top_fraction: f64,
    pub fraction: f64,
}

impl TopShares {
    pub fn is_condensed(&self, threshold: f64) -> bool {
        self.top_agent > threshold
    }
}

pub fn top_shares(ensemble: &WealthEnsemble, fraction: f64) -> Result<TopShares> {
    let total = ensemble.total();
    if !(total > 0.0) {
        return Err(Error::Degenerate("ensemble total wealth is not positive".into()));
    }
    let mut sorted = ensemble.wealths.clone();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let k = ((fraction * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
    Ok(TopShares {
        top_agent: sorted[0] / total,
        top_fraction: sorted[..k].iter().sum::<f64>() / total,
        fraction,
    })
}
