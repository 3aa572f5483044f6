//! Time discretization, uncertainty scenarios and driver path generation.
//!
//! The G-Brownian part of the driver is realized as a classical Brownian
//! motion whose volatility is steered by a [`VolatilityControl`] inside a band
//! `[σ_lo, σ_hi]`. The jump part is a compound-Poisson stream. A
//! [`ScenarioFamily`] is a finite list of such (control, jump law) pairs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};

use crate::error::{Error, Result};

const BROWNIAN_STREAM: u64 = 0;
const JUMP_STREAM: u64 = 1;
const CONTROL_STREAM: u64 = 2;

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Seed for path `path` of scenario `scenario`: `base + scenario·2³² + path`.
pub fn derive_seed(base: u64, scenario: usize, path: usize) -> u64 {
    base.wrapping_add((scenario as u64).wrapping_shl(32))
        .wrapping_add(path as u64)
}

/// Uniform partition of `[0, T]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    horizon: f64,
    n_steps: usize,
}

impl TimeGrid {
    pub fn new(horizon: f64, n_steps: usize) -> Result<Self> {
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::config(
                "grid.horizon",
                "must be a positive finite time",
            ));
        }
        if n_steps == 0 {
            return Err(Error::config("grid.n_steps", "must be positive"));
        }
        Ok(Self { horizon, n_steps })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn n_nodes(&self) -> usize {
        self.n_steps + 1
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.n_steps as f64
    }

    /// `t_i = i·dt`, with the last node pinned to `T`.
    pub fn node(&self, i: usize) -> f64 {
        if i >= self.n_steps {
            self.horizon
        } else {
            i as f64 * self.dt()
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.n_steps).map(move |i| self.node(i))
    }

    /// Index `i` of the interval `(t_i, t_{i+1}]` containing `t ∈ (0, T]`.
    pub fn interval_of(&self, t: f64) -> usize {
        let k = (t / self.dt()).ceil() as usize;
        k.saturating_sub(1).min(self.n_steps - 1)
    }

    /// Same horizon, `factor` times fewer steps.
    pub fn coarsened(&self, factor: usize) -> Result<Self> {
        if factor == 0 || !self.n_steps.is_multiple_of(factor) {
            return Err(Error::usage(format!(
                "cannot coarsen {} steps by a factor of {factor}",
                self.n_steps
            )));
        }
        Self::new(self.horizon, self.n_steps / factor)
    }
}

/// Switching rule of a volatility control.
#[derive(Debug, Clone, PartialEq)]
pub enum VolatilityKind {
    /// Always `σ_hi`.
    Constant,
    /// `σ_hi` on even blocks of length `period`, `σ_lo` on odd ones.
    BangBang { period: f64 },
    /// A fresh uniform draw from the band at the start of every block.
    PiecewiseRandom { period: f64, seed_offset: u64 },
}

/// Volatility process evaluated on the grid, confined to `[σ_lo, σ_hi]`.
#[derive(Debug, Clone, PartialEq)]
pub struct VolatilityControl {
    pub kind: VolatilityKind,
    pub lo: f64,
    pub hi: f64,
}

impl VolatilityControl {
    pub fn constant(sigma: f64) -> Self {
        Self {
            kind: VolatilityKind::Constant,
            lo: sigma,
            hi: sigma,
        }
    }

    pub fn bang_bang(lo: f64, hi: f64, period: f64) -> Self {
        Self {
            kind: VolatilityKind::BangBang { period },
            lo,
            hi,
        }
    }

    pub fn piecewise_random(lo: f64, hi: f64, period: f64, seed_offset: u64) -> Self {
        Self {
            kind: VolatilityKind::PiecewiseRandom {
                period,
                seed_offset,
            },
            lo,
            hi,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lo.is_finite() && self.hi.is_finite()) || self.lo < 0.0 || self.lo > self.hi {
            return Err(Error::config(
                "band",
                format!("need 0 <= lo <= hi, got [{}, {}]", self.lo, self.hi),
            ));
        }
        match self.kind {
            VolatilityKind::Constant => Ok(()),
            VolatilityKind::BangBang { period }
            | VolatilityKind::PiecewiseRandom { period, .. } => {
                if period.is_finite() && period > 0.0 {
                    Ok(())
                } else {
                    Err(Error::config("period", "must be positive"))
                }
            }
        }
    }

    /// Upper edge of the band.
    pub fn upper(&self) -> f64 {
        self.hi
    }

    /// `σ(t_i)` for `i = 0..n_steps`. Each value depends only on `t_i` and
    /// the control's own seed stream, never on the Brownian increments.
    pub fn evaluate(&self, grid: &TimeGrid, seed: u64) -> Result<Vec<f64>> {
        self.validate()?;
        let n = grid.n_steps();
        let block =
            |i: usize, period: f64| ((grid.node(i) / period) * (1.0 + 1e-12)).floor() as usize;
        let values = match self.kind {
            VolatilityKind::Constant => vec![self.hi; n],
            VolatilityKind::BangBang { period } => (0..n)
                .map(|i| {
                    if block(i, period) % 2 == 0 {
                        self.hi
                    } else {
                        self.lo
                    }
                })
                .collect(),
            VolatilityKind::PiecewiseRandom {
                period,
                seed_offset,
            } => {
                let mut rng = stream_rng(seed.wrapping_add(seed_offset), CONTROL_STREAM);
                let mut current_block = usize::MAX;
                let mut level = self.hi;
                (0..n)
                    .map(|i| {
                        let b = block(i, period);
                        if b != current_block {
                            current_block = b;
                            let u: f64 = rng.random();
                            level = (self.lo + u * (self.hi - self.lo)).clamp(self.lo, self.hi);
                        }
                        level
                    })
                    .collect()
            }
        };
        Ok(values)
    }
}

/// Law of a single jump size. Never charges the origin.
#[derive(Debug, Clone, PartialEq)]
pub enum JumpLaw {
    /// `(size, probability)` pairs.
    Atoms(Vec<(f64, f64)>),
    /// Uniform on `[lo, hi]`; draws landing exactly on 0 are redrawn.
    Uniform { lo: f64, hi: f64 },
}

impl JumpLaw {
    pub fn validate(&self) -> Result<()> {
        match self {
            JumpLaw::Atoms(atoms) => {
                if atoms.is_empty() {
                    return Err(Error::config("jumps.atoms", "at least one atom required"));
                }
                for (k, &(size, p)) in atoms.iter().enumerate() {
                    if size == 0.0 || !size.is_finite() {
                        return Err(Error::config(
                            format!("jumps.atoms[{k}]"),
                            "jump sizes must be finite and nonzero",
                        ));
                    }
                    if !(p.is_finite() && p >= 0.0) {
                        return Err(Error::config(
                            format!("jumps.atoms[{k}]"),
                            "probabilities must be nonnegative",
                        ));
                    }
                }
                let total: f64 = atoms.iter().map(|a| a.1).sum();
                if (total - 1.0).abs() > 1e-9 {
                    return Err(Error::config(
                        "jumps.atoms",
                        format!("probabilities sum to {total}, expected 1"),
                    ));
                }
                Ok(())
            }
            JumpLaw::Uniform { lo, hi } => {
                if lo.is_finite() && hi.is_finite() && lo < hi {
                    Ok(())
                } else {
                    Err(Error::config("jumps.uniform", "need finite lo < hi"))
                }
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            JumpLaw::Atoms(atoms) => {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                for &(size, p) in atoms {
                    acc += p;
                    if u < acc {
                        return size;
                    }
                }
                atoms
                    .iter()
                    .rev()
                    .find(|a| a.1 > 0.0)
                    .map_or(atoms[0].0, |a| a.0)
            }
            JumpLaw::Uniform { lo, hi } => loop {
                let u: f64 = rng.random();
                let z = lo + u * (hi - lo);
                if z != 0.0 {
                    return z;
                }
            },
        }
    }

    /// `E φ(z)`; exact for atoms, composite Simpson on 512 panels for the uniform law.
    pub fn expect(&self, phi: impl Fn(f64) -> f64) -> f64 {
        match self {
            JumpLaw::Atoms(atoms) => atoms.iter().map(|&(z, p)| p * phi(z)).sum(),
            JumpLaw::Uniform { lo, hi } => {
                const PANELS: usize = 512;
                let h = (hi - lo) / PANELS as f64;
                let mut s = phi(*lo) + phi(*hi);
                for k in 1..PANELS {
                    let w = if k % 2 == 1 { 4.0 } else { 2.0 };
                    s += w * phi(lo + k as f64 * h);
                }
                s * h / 3.0 / (hi - lo)
            }
        }
    }

    pub fn mean_abs(&self) -> f64 {
        match self {
            JumpLaw::Uniform { lo, hi } if *lo < 0.0 && *hi > 0.0 => {
                (lo * lo + hi * hi) / (2.0 * (hi - lo))
            }
            JumpLaw::Uniform { lo, hi } => ((lo + hi) / 2.0).abs(),
            JumpLaw::Atoms(_) => self.expect(f64::abs),
        }
    }

    pub fn second_moment(&self) -> f64 {
        match self {
            JumpLaw::Uniform { lo, hi } => (hi.powi(3) - lo.powi(3)) / (3.0 * (hi - lo)),
            JumpLaw::Atoms(_) => self.expect(|z| z * z),
        }
    }
}

/// Compound-Poisson jump measure `ν = λ · law`.
#[derive(Debug, Clone, PartialEq)]
pub struct LevyScenario {
    pub intensity: f64,
    pub law: JumpLaw,
}

impl LevyScenario {
    pub fn new(intensity: f64, law: JumpLaw) -> Self {
        Self { intensity, law }
    }

    /// No jumps at all.
    pub fn none() -> Self {
        Self::new(0.0, JumpLaw::Atoms(vec![(1.0, 1.0)]))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.intensity.is_finite() && self.intensity >= 0.0) {
            return Err(Error::config("intensity", "must be a nonnegative rate"));
        }
        self.law.validate()
    }

    /// First-moment rate `α = λ·E|z|`, so that `E|x^d(t)| ≤ α t`.
    pub fn alpha(&self) -> f64 {
        self.intensity * self.law.mean_abs()
    }

    /// `∫ φ(z) ν(dz)`.
    pub fn nu_integral(&self, phi: impl Fn(f64) -> f64) -> f64 {
        if self.intensity == 0.0 {
            0.0
        } else {
            self.intensity * self.law.expect(phi)
        }
    }
}

/// One element of the uncertainty set.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub volatility: VolatilityControl,
    pub levy: LevyScenario,
}

impl Scenario {
    pub fn new(volatility: VolatilityControl, levy: LevyScenario) -> Self {
        Self { volatility, levy }
    }

    /// Constant volatility `sigma`, no jumps.
    pub fn brownian(sigma: f64) -> Self {
        Self::new(VolatilityControl::constant(sigma), LevyScenario::none())
    }
}

/// Ordered, nonempty list of scenarios. Index `j` is stable.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioFamily {
    scenarios: Vec<Scenario>,
}

impl ScenarioFamily {
    pub fn new(scenarios: Vec<Scenario>) -> Result<Self> {
        if scenarios.is_empty() {
            return Err(Error::config("scenarios", "the family must be nonempty"));
        }
        for (j, s) in scenarios.iter().enumerate() {
            s.volatility
                .validate()
                .map_err(|e| prefix(e, &format!("scenarios[{j}]")))?;
            s.levy
                .validate()
                .map_err(|e| prefix(e, &format!("scenarios[{j}].levy")))?;
        }
        Ok(Self { scenarios })
    }

    pub fn singleton(scenario: Scenario) -> Result<Self> {
        Self::new(vec![scenario])
    }

    pub fn scenarios(&self) -> &[Scenario] {
        &self.scenarios
    }

    pub fn len(&self) -> usize {
        self.scenarios.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scenarios.is_empty()
    }

    /// `σ̄`, the largest volatility any scenario can reach.
    pub fn sigma_bar(&self) -> f64 {
        self.scenarios
            .iter()
            .map(|s| s.volatility.upper())
            .fold(0.0, f64::max)
    }

    /// `sup_ν ∫ φ(z) ν(dz)` over the jump measures of the family.
    pub fn sup_nu_integral(&self, phi: impl Fn(f64) -> f64) -> f64 {
        self.scenarios
            .iter()
            .map(|s| s.levy.nu_integral(&phi))
            .fold(0.0, f64::max)
    }
}

fn prefix(err: Error, at: &str) -> Error {
    match err {
        Error::Config { key, reason } => Error::Config {
            key: format!("{at}.{key}"),
            reason,
        },
        other => other,
    }
}

/// A realized jump of the driver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JumpEvent {
    pub time: f64,
    pub size: f64,
}

/// Continuous part of a driver: values and pathwise quadratic variation.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuousPart {
    pub b: Vec<f64>,
    pub qv: Vec<f64>,
}

/// `B[i+1] = B[i] + σ(t_i)·√dt·ξ_i` with `ξ_i` standard normal from the seeded stream.
pub fn generate_brownian(
    grid: &TimeGrid,
    control: &VolatilityControl,
    seed: u64,
) -> Result<ContinuousPart> {
    let sigma = control.evaluate(grid, seed)?;
    Ok(brownian_from_sigma(grid, &sigma, seed))
}

fn brownian_from_sigma(grid: &TimeGrid, sigma: &[f64], seed: u64) -> ContinuousPart {
    let sqrt_dt = grid.dt().sqrt();
    let mut rng = stream_rng(seed, BROWNIAN_STREAM);
    let mut b = Vec::with_capacity(grid.n_nodes());
    b.push(0.0);
    let mut level = 0.0;
    for &s in sigma {
        let xi: f64 = StandardNormal.sample(&mut rng);
        level += s * sqrt_dt * xi;
        b.push(level);
    }
    let qv = quadratic_variation(&b);
    ContinuousPart { b, qv }
}

/// Compound-Poisson jump stream on `(0, T]`, sorted by time.
pub fn generate_jumps(grid: &TimeGrid, levy: &LevyScenario, seed: u64) -> Result<Vec<JumpEvent>> {
    levy.validate()?;
    let mean = levy.intensity * grid.horizon();
    if mean == 0.0 {
        return Ok(Vec::new());
    }
    let mut rng = stream_rng(seed, JUMP_STREAM);
    let poisson = Poisson::new(mean).map_err(|e| Error::config("intensity", e.to_string()))?;
    let count = poisson.sample(&mut rng) as usize;
    let mut jumps: Vec<JumpEvent> = (0..count)
        .map(|_| {
            let u: f64 = rng.random();
            // 1 - u lies in (0, 1]
            let time = grid.horizon() * (1.0 - u);
            let size = levy.law.sample(&mut rng);
            JumpEvent { time, size }
        })
        .collect();
    jumps.sort_by(|a, b| a.time.total_cmp(&b.time));
    Ok(jumps)
}

/// `qv[k] = Σ_{i<k} (B[i+1] − B[i])²`.
pub fn quadratic_variation(b: &[f64]) -> Vec<f64> {
    let mut qv = Vec::with_capacity(b.len());
    let mut acc = 0.0;
    if b.is_empty() {
        return qv;
    }
    qv.push(0.0);
    for w in b.windows(2) {
        let d = w[1] - w[0];
        acc += d * d;
        qv.push(acc);
    }
    qv
}

/// One realized scenario of the G-Lévy driver.
#[derive(Debug, Clone, PartialEq)]
pub struct DrivingPath {
    pub grid: TimeGrid,
    /// `σ(t_i)` used on `[t_i, t_{i+1})`.
    pub sigma: Vec<f64>,
    pub b: Vec<f64>,
    pub qv: Vec<f64>,
    pub jumps: Vec<JumpEvent>,
}

impl DrivingPath {
    /// Deterministic in `(grid, scenario, seed)`.
    pub fn generate(grid: &TimeGrid, scenario: &Scenario, seed: u64) -> Result<Self> {
        let sigma = scenario.volatility.evaluate(grid, seed)?;
        let ContinuousPart { b, qv } = brownian_from_sigma(grid, &sigma, seed);
        let jumps = generate_jumps(grid, &scenario.levy, seed)?;
        Ok(Self {
            grid: *grid,
            sigma,
            b,
            qv,
            jumps,
        })
    }

    /// A driver with no noise and no jumps.
    pub fn quiet(grid: &TimeGrid) -> Self {
        Self {
            grid: *grid,
            sigma: vec![0.0; grid.n_steps()],
            b: vec![0.0; grid.n_nodes()],
            qv: vec![0.0; grid.n_nodes()],
            jumps: Vec::new(),
        }
    }

    /// The same realization observed on a grid `factor` times coarser.
    /// Quadratic variation is recomputed from the coarse increments.
    pub fn coarsen(&self, factor: usize) -> Result<Self> {
        let grid = self.grid.coarsened(factor)?;
        let b: Vec<f64> = self.b.iter().step_by(factor).copied().collect();
        let qv = quadratic_variation(&b);
        let sigma = self.sigma.iter().step_by(factor).copied().collect();
        Ok(Self {
            grid,
            sigma,
            b,
            qv,
            jumps: self.jumps.clone(),
        })
    }

    /// Ranges into `jumps` for each interval `(t_i, t_{i+1}]`.
    pub fn jump_buckets(&self) -> Vec<std::ops::Range<usize>> {
        let n = self.grid.n_steps();
        let mut buckets = vec![0..0; n];
        let mut start = 0;
        while start < self.jumps.len() {
            let i = self.grid.interval_of(self.jumps[start].time);
            let mut end = start + 1;
            while end < self.jumps.len() && self.grid.interval_of(self.jumps[end].time) == i {
                end += 1;
            }
            buckets[i] = start..end;
            start = end;
        }
        buckets
    }

    pub fn terminal(&self) -> f64 {
        self.b[self.grid.n_steps()]
    }

    /// Sum of `|size|` over all jumps.
    pub fn jump_mass(&self) -> f64 {
        self.jumps.iter().map(|j| j.size.abs()).sum()
    }
}
