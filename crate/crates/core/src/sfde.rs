//! The functional equation, its Euler discretization and Picard iteration.
//!
//! The infinite history `(−∞, 0]` is truncated to a window `[−τ, 0]` sampled
//! with the driver's step, and the initial segment is held constant beyond
//! `−τ`. Coefficients see the history through a [`SegmentView`], which reads
//! the solution arrays in place instead of copying the window at every node.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::scenarios::{DrivingPath, ScenarioFamily, TimeGrid};

/// A materialized segment: values on `θ_0 = −τ < … < θ_w = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub dt: f64,
    pub values: Vec<f64>,
    /// Whether the value at `θ = 0` is the left limit `x(t−)`.
    pub left_limit: bool,
}

impl Segment {
    pub fn window(&self) -> usize {
        self.values.len() - 1
    }

    pub fn head(&self) -> f64 {
        self.values[self.window()]
    }

    /// `‖ψ‖ = max |ψ(θ)|` over the window.
    pub fn norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn view(&self) -> SegmentView<'_> {
        SegmentView {
            dt: self.dt,
            history: &self.values,
            path: &[],
            node: 0,
            head: self.head(),
        }
    }
}

/// Borrowed segment `x_{t_node}` of a solution whose negative-time part comes
/// from the initial history.
#[derive(Debug, Clone, Copy)]
pub struct SegmentView<'a> {
    dt: f64,
    history: &'a [f64],
    path: &'a [f64],
    node: usize,
    head: f64,
}

impl<'a> SegmentView<'a> {
    /// `history` is the initial window, `path[j]` the solution at node `j`
    /// for `j < node`, `head` the value at `θ = 0`.
    pub fn new(dt: f64, history: &'a [f64], path: &'a [f64], node: usize, head: f64) -> Self {
        Self {
            dt,
            history,
            path,
            node,
            head,
        }
    }

    pub fn window(&self) -> usize {
        self.history.len() - 1
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// `ψ(0)`.
    pub fn current(&self) -> f64 {
        self.head
    }

    /// `ψ(−k·dt)`; constant beyond the window.
    pub fn lagged(&self, k: usize) -> f64 {
        if k == 0 {
            return self.head;
        }
        if k <= self.node {
            return self.path[self.node - k];
        }
        let back = k - self.node;
        let w = self.window();
        self.history[w.saturating_sub(back)]
    }

    /// `ψ(θ)` for `θ ≤ 0`, read at the nearest window node.
    pub fn at(&self, theta: f64) -> f64 {
        let k = (-theta / self.dt).round().max(0.0) as usize;
        self.lagged(k)
    }

    pub fn norm(&self) -> f64 {
        (0..=self.window()).fold(0.0, |m, k| m.max(self.lagged(k).abs()))
    }

    pub fn to_segment(&self, left_limit: bool) -> Segment {
        let w = self.window();
        Segment {
            dt: self.dt,
            values: (0..=w).rev().map(|k| self.lagged(k)).collect(),
            left_limit,
        }
    }
}

/// How the deterministic initial history `ζ` is specified.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialSegment {
    Constant(f64),
    /// `ζ(θ) = at_zero + slope·θ`.
    Affine {
        at_zero: f64,
        slope: f64,
    },
    /// Explicit values on `θ_0 = −τ, …, θ_w = 0`.
    Values(Vec<f64>),
}

/// Initial history on the delay window.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialData {
    pub segment: Segment,
}

impl InitialData {
    pub fn new(spec: &InitialSegment, tau: f64, dt: f64) -> Result<Self> {
        if !(tau.is_finite() && tau > 0.0) {
            return Err(Error::config("delay_window", "must be positive"));
        }
        let w = ((tau / dt).round() as usize).max(1);
        let values = match spec {
            InitialSegment::Constant(c) => vec![*c; w + 1],
            InitialSegment::Affine { at_zero, slope } => (0..=w)
                .map(|k| at_zero + slope * ((k as f64 - w as f64) * dt))
                .collect(),
            InitialSegment::Values(v) => {
                if v.len() != w + 1 {
                    return Err(Error::config(
                        "initial_segment.values",
                        format!("expected {} window values, got {}", w + 1, v.len()),
                    ));
                }
                v.clone()
            }
        };
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::config("initial_segment", "values must be finite"));
        }
        Ok(Self {
            segment: Segment {
                dt,
                values,
                left_limit: false,
            },
        })
    }

    /// `ζ(0)`.
    pub fn zeta0(&self) -> f64 {
        self.segment.head()
    }

    /// `‖ζ‖²`; deterministic, so it equals `E‖ζ‖²`.
    pub fn norm_sq(&self) -> f64 {
        self.segment.norm().powi(2)
    }

    pub fn window(&self) -> usize {
        self.segment.window()
    }

    fn history(&self) -> &[f64] {
        &self.segment.values
    }
}

/// Coefficients `f, g, h, K` of the equation and the constants the model
/// author declares for the growth and Lipschitz conditions.
pub trait Coefficients: Sync {
    fn drift(&self, t: f64, seg: &SegmentView<'_>) -> f64;
    fn qv_coefficient(&self, t: f64, seg: &SegmentView<'_>) -> f64;
    fn diffusion(&self, t: f64, seg: &SegmentView<'_>) -> f64;
    fn jump(&self, t: f64, seg: &SegmentView<'_>, z: f64) -> f64;
    /// Declared `c₁`.
    fn growth_constant(&self) -> f64;
    /// Declared `c₂`.
    fn lipschitz_constant(&self) -> f64;
    /// Largest history lag read by any coefficient.
    fn max_lag(&self) -> f64 {
        0.0
    }
}

/// One entry of the built-in coefficient library.
#[derive(Debug, Clone, PartialEq)]
pub enum Term {
    Zero,
    /// `f = a·ψ(0)`.
    LinearDrift {
        a: f64,
    },
    /// `f = μ·ψ(0)`, `h = σ·ψ(0)`.
    Gbm {
        mu: f64,
        sigma: f64,
    },
    /// `f = a·ψ(0) + b·ψ(−lag)`.
    DelayedLinear {
        a: f64,
        b: f64,
        lag: f64,
    },
    /// `K = c·ψ(0)·z`.
    JumpLinear {
        c: f64,
    },
}

impl Term {
    fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        let (name, args) = match text.find('(') {
            Some(open) => {
                let close = text
                    .rfind(')')
                    .filter(|&c| c > open && c == text.len() - 1)
                    .ok_or_else(|| {
                        Error::config("model.name", format!("unbalanced parentheses in `{text}`"))
                    })?;
                let args = text[open + 1..close]
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|s| {
                        s.parse::<f64>().map_err(|_| {
                            Error::config("model.name", format!("`{s}` is not a number"))
                        })
                    })
                    .collect::<Result<Vec<f64>>>()?;
                (text[..open].trim(), args)
            }
            None => (text, Vec::new()),
        };
        let want = |n: usize| -> Result<()> {
            if args.len() == n {
                Ok(())
            } else {
                Err(Error::config(
                    "model.name",
                    format!("`{name}` takes {n} argument(s), got {}", args.len()),
                ))
            }
        };
        let term = match name {
            "zero" => {
                want(0)?;
                Term::Zero
            }
            "linear_drift" => {
                want(1)?;
                Term::LinearDrift { a: args[0] }
            }
            "gbm" => {
                want(2)?;
                Term::Gbm {
                    mu: args[0],
                    sigma: args[1],
                }
            }
            "delayed_linear" => {
                want(3)?;
                if !(args[2] >= 0.0) {
                    return Err(Error::config("model.name", "lag must be nonnegative"));
                }
                Term::DelayedLinear {
                    a: args[0],
                    b: args[1],
                    lag: args[2],
                }
            }
            "jump_linear" => {
                want(1)?;
                Term::JumpLinear { c: args[0] }
            }
            other => {
                return Err(Error::config(
                    "model.name",
                    format!("unknown coefficient `{other}`"),
                ))
            }
        };
        if args.iter().any(|a| !a.is_finite()) {
            return Err(Error::config("model.name", "parameters must be finite"));
        }
        Ok(term)
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Zero => write!(f, "zero"),
            Term::LinearDrift { a } => write!(f, "linear_drift({a})"),
            Term::Gbm { mu, sigma } => write!(f, "gbm({mu},{sigma})"),
            Term::DelayedLinear { a, b, lag } => write!(f, "delayed_linear({a},{b},{lag})"),
            Term::JumpLinear { c } => write!(f, "jump_linear({c})"),
        }
    }
}

/// Sum of library terms with declared constants.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub terms: Vec<Term>,
    pub c1: f64,
    pub c2: f64,
}

impl Model {
    pub fn new(terms: Vec<Term>, c1: f64, c2: f64) -> Self {
        Self { terms, c1, c2 }
    }

    /// Parse `"gbm(0.05,0.2) + jump_linear(0.1)"`-style names.
    pub fn parse(name: &str, c1: f64, c2: f64) -> Result<Self> {
        if !(c1.is_finite() && c1 >= 0.0) {
            return Err(Error::config("model.c1", "must be nonnegative"));
        }
        if !(c2.is_finite() && c2 >= 0.0) {
            return Err(Error::config("model.c2", "must be nonnegative"));
        }
        let terms = name
            .split('+')
            .map(Term::parse)
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::new(terms, c1, c2))
    }

    pub fn zero() -> Self {
        Self::new(vec![Term::Zero], 0.0, 0.0)
    }

    pub fn linear_drift(a: f64) -> Self {
        Self::new(vec![Term::LinearDrift { a }], a * a, a * a)
    }

    pub fn gbm(mu: f64, sigma: f64) -> Self {
        let c = (mu * mu).max(sigma * sigma);
        Self::new(vec![Term::Gbm { mu, sigma }], c, c)
    }

    pub fn delayed_linear(a: f64, b: f64, lag: f64) -> Self {
        let c = (a.abs() + b.abs()).powi(2);
        Self::new(vec![Term::DelayedLinear { a, b, lag }], c, c)
    }

    /// Constants that satisfy both conditions for every term of the sum,
    /// given the jump measures of `family`. All library terms are linear in
    /// the segment, so the growth and Lipschitz constants coincide.
    pub fn natural_constant(&self, family: &ScenarioFamily) -> f64 {
        let mut drift = 0.0;
        let mut diffusion = 0.0;
        let mut jump = 0.0;
        for term in &self.terms {
            match term {
                Term::Zero => {}
                Term::LinearDrift { a } => drift += a.abs(),
                Term::Gbm { mu, sigma } => {
                    drift += mu.abs();
                    diffusion += sigma.abs();
                }
                Term::DelayedLinear { a, b, .. } => drift += a.abs() + b.abs(),
                Term::JumpLinear { c } => jump += c.abs(),
            }
        }
        let nu_z2 = family.sup_nu_integral(|z| z * z);
        (drift * drift)
            .max(diffusion * diffusion)
            .max(jump * jump * nu_z2)
    }

    pub fn with_constants(mut self, c1: f64, c2: f64) -> Self {
        self.c1 = c1;
        self.c2 = c2;
        self
    }

    pub fn name(&self) -> String {
        self.terms
            .iter()
            .map(Term::to_string)
            .collect::<Vec<_>>()
            .join(" + ")
    }
}

impl Coefficients for Model {
    fn drift(&self, _t: f64, seg: &SegmentView<'_>) -> f64 {
        self.terms
            .iter()
            .map(|term| match *term {
                Term::LinearDrift { a } => a * seg.current(),
                Term::Gbm { mu, .. } => mu * seg.current(),
                Term::DelayedLinear { a, b, lag } => a * seg.current() + b * seg.at(-lag),
                _ => 0.0,
            })
            .sum()
    }

    fn qv_coefficient(&self, _t: f64, _seg: &SegmentView<'_>) -> f64 {
        0.0
    }

    fn diffusion(&self, _t: f64, seg: &SegmentView<'_>) -> f64 {
        self.terms
            .iter()
            .map(|term| match *term {
                Term::Gbm { sigma, .. } => sigma * seg.current(),
                _ => 0.0,
            })
            .sum()
    }

    fn jump(&self, _t: f64, seg: &SegmentView<'_>, z: f64) -> f64 {
        self.terms
            .iter()
            .map(|term| match *term {
                Term::JumpLinear { c } => c * seg.current() * z,
                _ => 0.0,
            })
            .sum()
    }

    fn growth_constant(&self) -> f64 {
        self.c1
    }

    fn lipschitz_constant(&self) -> f64 {
        self.c2
    }

    fn max_lag(&self) -> f64 {
        self.terms
            .iter()
            .map(|t| match t {
                Term::DelayedLinear { lag, .. } => *lag,
                _ => 0.0,
            })
            .fold(0.0, f64::max)
    }
}

/// A càdlàg solution on the grid: post-jump values and left limits.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionPath {
    pub grid: TimeGrid,
    /// `x(t_i)`.
    pub values: Vec<f64>,
    /// `x(t_i−)`; differs from `values[i]` only at nodes that closed an
    /// interval containing jumps.
    pub left: Vec<f64>,
}

impl SolutionPath {
    pub fn constant(grid: TimeGrid, value: f64) -> Self {
        Self {
            grid,
            values: vec![value; grid.n_nodes()],
            left: vec![value; grid.n_nodes()],
        }
    }

    pub fn terminal(&self) -> f64 {
        self.values[self.grid.n_steps()]
    }

    /// `max_i |x(t_i)|²`, the left limits included.
    pub fn sup_sq(&self) -> f64 {
        self.values
            .iter()
            .chain(&self.left)
            .fold(0.0, |m, v| m.max(v * v))
    }
}

/// `x_{t_i}` (or `x_{t_i−}` when `pre_jump`), with `ζ` supplying negative times.
pub fn segment_extract(
    x: &SolutionPath,
    init: &InitialData,
    node: usize,
    pre_jump: bool,
) -> Result<Segment> {
    if node > x.grid.n_steps() {
        return Err(Error::usage(format!("node {node} beyond the grid")));
    }
    let head = if pre_jump {
        x.left[node]
    } else {
        x.values[node]
    };
    let view = SegmentView::new(x.grid.dt(), init.history(), &x.values, node, head);
    Ok(view.to_segment(pre_jump))
}

fn check_compatible<C: Coefficients + ?Sized>(
    coeffs: &C,
    init: &InitialData,
    driver: &DrivingPath,
) -> Result<()> {
    let dt = driver.grid.dt();
    if (init.segment.dt - dt).abs() > 1e-12 * dt {
        return Err(Error::usage(format!(
            "initial segment spacing {} differs from driver step {dt}",
            init.segment.dt
        )));
    }
    let reach = init.window() as f64 * dt;
    if coeffs.max_lag() > reach + 1e-9 * dt {
        return Err(Error::config(
            "delay_window",
            format!(
                "coefficients read lag {} beyond the window {reach}",
                coeffs.max_lag()
            ),
        ));
    }
    Ok(())
}

/// Where the coefficients read their segments: the path under construction
/// (explicit Euler) or the previous Picard iterate.
#[derive(Clone, Copy)]
enum Source<'a> {
    Itself,
    Previous(&'a SolutionPath),
}

fn integrate<C: Coefficients + ?Sized>(
    coeffs: &C,
    init: &InitialData,
    driver: &DrivingPath,
    source: Source<'_>,
) -> Result<SolutionPath> {
    let grid = driver.grid;
    let n = grid.n_steps();
    let dt = grid.dt();
    let history = init.history();
    let buckets = driver.jump_buckets();
    let mut values = Vec::with_capacity(n + 1);
    let mut left = Vec::with_capacity(n + 1);
    values.push(init.zeta0());
    left.push(init.zeta0());
    for i in 0..n {
        let t = grid.node(i);
        let pre = {
            let seg = match source {
                Source::Itself => SegmentView::new(dt, history, &values, i, values[i]),
                Source::Previous(p) => SegmentView::new(dt, history, &p.values, i, p.values[i]),
            };
            values[i]
                + coeffs.drift(t, &seg) * dt
                + coeffs.qv_coefficient(t, &seg) * (driver.qv[i + 1] - driver.qv[i])
                + coeffs.diffusion(t, &seg) * (driver.b[i + 1] - driver.b[i])
        };
        let mut post = pre;
        let bucket = &driver.jumps[buckets[i].clone()];
        if !bucket.is_empty() {
            let seg = match source {
                Source::Itself => SegmentView::new(dt, history, &values, i + 1, pre),
                Source::Previous(p) => {
                    SegmentView::new(dt, history, &p.values, i + 1, p.left[i + 1])
                }
            };
            for jump in bucket {
                post += coeffs.jump(jump.time, &seg, jump.size);
            }
        }
        if !(pre.is_finite() && post.is_finite()) {
            return Err(Error::Divergence {
                node: i + 1,
                time: grid.node(i + 1),
            });
        }
        left.push(pre);
        values.push(post);
    }
    Ok(SolutionPath { grid, values, left })
}

/// Explicit left-point scheme:
/// `x[i+1] = x[i] + f·dt + g·Δ<B> + h·ΔB + Σ K(t_j, x_{t_{i+1}−}, z_j)`.
pub fn euler_solve<C: Coefficients + ?Sized>(
    coeffs: &C,
    init: &InitialData,
    driver: &DrivingPath,
) -> Result<SolutionPath> {
    check_compatible(coeffs, init, driver)?;
    integrate(coeffs, init, driver, Source::Itself)
}

/// One Picard sweep: all four integrals evaluated on the segments of `prev`.
pub fn picard_step<C: Coefficients + ?Sized>(
    coeffs: &C,
    init: &InitialData,
    driver: &DrivingPath,
    prev: &SolutionPath,
) -> Result<SolutionPath> {
    check_compatible(coeffs, init, driver)?;
    if prev.grid != driver.grid {
        return Err(Error::usage("previous iterate lives on a different grid"));
    }
    integrate(coeffs, init, driver, Source::Previous(prev))
}

/// Iterates `x⁰, x¹, …, x^{n_iter}` starting from `x⁰ ≡ ζ(0)`.
pub fn picard_iterate<C: Coefficients + ?Sized>(
    coeffs: &C,
    init: &InitialData,
    driver: &DrivingPath,
    n_iter: usize,
) -> Result<Vec<SolutionPath>> {
    picard_iterate_from(
        coeffs,
        init,
        driver,
        SolutionPath::constant(driver.grid, init.zeta0()),
        n_iter,
    )
}

pub fn picard_iterate_from<C: Coefficients + ?Sized>(
    coeffs: &C,
    init: &InitialData,
    driver: &DrivingPath,
    start: SolutionPath,
    n_iter: usize,
) -> Result<Vec<SolutionPath>> {
    if n_iter == 0 {
        return Err(Error::usage("n_iter must be at least 1"));
    }
    let mut iterates = Vec::with_capacity(n_iter + 1);
    iterates.push(start);
    for _ in 0..n_iter {
        let next = picard_step(coeffs, init, driver, iterates.last().expect("nonempty"))?;
        iterates.push(next);
    }
    Ok(iterates)
}

/// Outcome of running Picard until successive iterates agree.
#[derive(Debug, Clone)]
pub struct PicardLimit {
    pub path: SolutionPath,
    pub iterations: usize,
    /// `sup|x^n − x^{n−1}|` at the last iteration.
    pub last_step: f64,
    pub converged: bool,
}

/// Iterate from `start` until the sup-distance between successive iterates
/// is at most `tol`, or `max_iter` sweeps have run.
pub fn picard_limit<C: Coefficients + ?Sized>(
    coeffs: &C,
    init: &InitialData,
    driver: &DrivingPath,
    start: SolutionPath,
    max_iter: usize,
    tol: f64,
) -> Result<PicardLimit> {
    let mut current = start;
    let mut last_step = f64::INFINITY;
    for k in 1..=max_iter {
        let next = picard_step(coeffs, init, driver, &current)?;
        last_step = sup_distance(&next, &current)?;
        current = next;
        if last_step <= tol {
            return Ok(PicardLimit {
                path: current,
                iterations: k,
                last_step,
                converged: true,
            });
        }
    }
    Ok(PicardLimit {
        path: current,
        iterations: max_iter,
        last_step,
        converged: false,
    })
}

/// `max_i |a − b|` over node values and left limits.
pub fn sup_distance(a: &SolutionPath, b: &SolutionPath) -> Result<f64> {
    if a.grid != b.grid || a.values.len() != b.values.len() {
        return Err(Error::usage("solution paths live on different grids"));
    }
    let d = a
        .values
        .iter()
        .zip(&b.values)
        .chain(a.left.iter().zip(&b.left))
        .fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()));
    Ok(d)
}

/// Result of sampling one of the coefficient conditions.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientAudit {
    pub declared: f64,
    /// Largest observed ratio of left side to the condition's scale factor.
    pub worst_ratio: f64,
    pub probes: usize,
    pub holds: bool,
}

fn probe_segment(rng: &mut ChaCha8Rng, w: usize) -> Vec<f64> {
    let scale = [0.1, 1.0, 10.0][rng.random_range(0..3)];
    (0..=w)
        .map(|_| {
            let z: f64 = StandardNormal.sample(rng);
            scale * z
        })
        .collect()
}

/// Sample `|f|² ∨ |g|² ∨ |h|² ∨ sup_ν ∫|K|²ν(dz) ≤ c₁(1 + ‖x‖²)` on random segments.
pub fn audit_growth<C: Coefficients + ?Sized>(
    coeffs: &C,
    family: &ScenarioFamily,
    grid: &TimeGrid,
    window: usize,
    n_probes: usize,
    seed: u64,
) -> CoefficientAudit {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dt = grid.dt();
    let mut worst: f64 = 0.0;
    for _ in 0..n_probes {
        let values = probe_segment(&mut rng, window);
        let t = rng.random::<f64>() * grid.horizon();
        let seg = SegmentView::new(dt, &values, &[], 0, values[window]);
        let lhs = coeffs
            .drift(t, &seg)
            .powi(2)
            .max(coeffs.qv_coefficient(t, &seg).powi(2))
            .max(coeffs.diffusion(t, &seg).powi(2))
            .max(family.sup_nu_integral(|z| coeffs.jump(t, &seg, z).powi(2)));
        worst = worst.max(lhs / (1.0 + seg.norm().powi(2)));
    }
    let declared = coeffs.growth_constant();
    CoefficientAudit {
        declared,
        worst_ratio: worst,
        probes: n_probes,
        holds: worst <= declared * (1.0 + 1e-9) + 1e-300,
    }
}

/// Sample the Lipschitz condition with constant `c₂` on random segment pairs.
pub fn audit_lipschitz<C: Coefficients + ?Sized>(
    coeffs: &C,
    family: &ScenarioFamily,
    grid: &TimeGrid,
    window: usize,
    n_probes: usize,
    seed: u64,
) -> CoefficientAudit {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let dt = grid.dt();
    let mut worst: f64 = 0.0;
    for _ in 0..n_probes {
        let xs = probe_segment(&mut rng, window);
        let ys = probe_segment(&mut rng, window);
        let t = rng.random::<f64>() * grid.horizon();
        let x = SegmentView::new(dt, &xs, &[], 0, xs[window]);
        let y = SegmentView::new(dt, &ys, &[], 0, ys[window]);
        let dist = xs
            .iter()
            .zip(&ys)
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
        if dist == 0.0 {
            continue;
        }
        let lhs = (coeffs.drift(t, &y) - coeffs.drift(t, &x))
            .powi(2)
            .max((coeffs.qv_coefficient(t, &y) - coeffs.qv_coefficient(t, &x)).powi(2))
            .max((coeffs.diffusion(t, &y) - coeffs.diffusion(t, &x)).powi(2))
            .max(
                family.sup_nu_integral(|z| (coeffs.jump(t, &y, z) - coeffs.jump(t, &x, z)).powi(2)),
            );
        worst = worst.max(lhs / (dist * dist));
    }
    let declared = coeffs.lipschitz_constant();
    CoefficientAudit {
        declared,
        worst_ratio: worst,
        probes: n_probes,
        holds: worst <= declared * (1.0 + 1e-9) + 1e-300,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenarios::{JumpLaw, LevyScenario, Scenario, VolatilityControl};

    fn grid(t: f64, n: usize) -> TimeGrid {
        TimeGrid::new(t, n).unwrap()
    }

    fn init_const(c: f64, tau: f64, g: &TimeGrid) -> InitialData {
        InitialData::new(&InitialSegment::Constant(c), tau, g.dt()).unwrap()
    }

    #[test]
    fn segment_at_zero_is_the_initial_history() {
        let g = grid(1.0, 100);
        let init = InitialData::new(
            &InitialSegment::Affine {
                at_zero: 2.0,
                slope: 1.5,
            },
            0.3,
            g.dt(),
        )
        .unwrap();
        let x = SolutionPath::constant(g, 2.0);
        let seg = segment_extract(&x, &init, 0, false).unwrap();
        assert_eq!(seg.values, init.segment.values);
    }

    #[test]
    fn constant_segment_norm() {
        let g = grid(1.0, 10);
        let init = init_const(3.0, 0.5, &g);
        let x = SolutionPath::constant(g, 3.0);
        let seg = segment_extract(&x, &init, 7, false).unwrap();
        assert!(seg.values.iter().all(|&v| v == 3.0));
        assert_eq!(seg.norm(), 3.0);
    }

    #[test]
    fn segment_mixes_history_and_path_by_index() {
        let g = grid(1.0, 20);
        let tau = 0.5; // w = 10
        let init = InitialData::new(
            &InitialSegment::Affine {
                at_zero: 0.0,
                slope: 1.0,
            },
            tau,
            g.dt(),
        )
        .unwrap();
        let mut x = SolutionPath::constant(g, 0.0);
        for i in 0..=20 {
            x.values[i] = 100.0 + i as f64;
            x.left[i] = -(i as f64);
        }
        x.values[0] = 0.0;
        let node = 5; // t = τ/2
        let seg = segment_extract(&x, &init, node, false).unwrap();
        // oracle: window index k ↔ time index node − w + k
        for k in 0..=10usize {
            let j = node as isize - 10 + k as isize;
            let expected = if j >= 0 {
                x.values[j as usize]
            } else {
                init.segment.values[(10 + j) as usize]
            };
            assert_eq!(seg.values[k], expected, "k = {k}");
        }
        let pre = segment_extract(&x, &init, node, true).unwrap();
        assert_eq!(pre.head(), -5.0);
        assert_eq!(pre.values[..10], seg.values[..10]);
    }

    #[test]
    fn zero_model_stays_put() {
        let g = grid(1.0, 200);
        let init = init_const(1.7, 0.1, &g);
        let scen = Scenario::new(
            VolatilityControl::constant(1.0),
            LevyScenario::new(5.0, JumpLaw::Atoms(vec![(1.0, 1.0)])),
        );
        let d = DrivingPath::generate(&g, &scen, 3).unwrap();
        let x = euler_solve(&Model::zero(), &init, &d).unwrap();
        assert!(x.values.iter().all(|&v| v == 1.7));
        let its = picard_iterate(&Model::zero(), &init, &d, 3).unwrap();
        for it in &its {
            assert!(it.values.iter().all(|&v| v == 1.7));
        }
        assert_eq!(sup_distance(&its[1], &its[0]).unwrap(), 0.0);
    }

    #[test]
    fn linear_ode_reaches_e() {
        let g = grid(1.0, 10_000);
        let init = init_const(1.0, 0.01, &g);
        let x = euler_solve(&Model::linear_drift(1.0), &init, &DrivingPath::quiet(&g)).unwrap();
        let err = (x.terminal() - std::f64::consts::E).abs();
        // Euler error ≈ e·dt/2
        assert!(err < 2.0 * g.dt(), "err = {err}");
    }

    #[test]
    fn gbm_tracks_closed_form_on_same_path() {
        let g = grid(1.0, 2000);
        let init = init_const(1.0, 0.01, &g);
        let model = Model::gbm(0.1, 0.3);
        let mut sq = 0.0;
        let n = 64;
        for s in 0..n {
            let d = DrivingPath::generate(&g, &Scenario::brownian(1.0), s).unwrap();
            let x = euler_solve(&model, &init, &d).unwrap();
            let exact = ((0.1 - 0.045) * 1.0 + 0.3 * d.terminal()).exp();
            sq += (x.terminal() - exact).powi(2);
        }
        let rms = (sq / n as f64).sqrt();
        assert!(rms < 3.0 * g.dt().sqrt(), "rms = {rms}");
    }

    #[test]
    fn picard_on_linear_drift_gives_taylor_partial_sums() {
        let g = grid(1.0, 1000);
        let init = init_const(1.0, 0.01, &g);
        let its =
            picard_iterate(&Model::linear_drift(1.0), &init, &DrivingPath::quiet(&g), 5).unwrap();
        // exact discrete oracle: x^n[i] = Σ_{j≤n} C(i, j)·dt^j
        for (n, it) in its.iter().enumerate() {
            for i in [0usize, 1, 10, 500, 1000] {
                let mut acc = 0.0;
                let mut binom = 1.0;
                for j in 0..=n {
                    if j > 0 {
                        binom *= (i as f64 - (j as f64 - 1.0)) / j as f64;
                    }
                    if j > i {
                        break;
                    }
                    acc += binom * g.dt().powi(j as i32);
                }
                assert!((it.values[i] - acc).abs() < 1e-12, "n={n} i={i}");
            }
        }
        let t = 1.0_f64;
        let taylor: f64 = (0..=5)
            .map(|j| t.powi(j) / (1..=j).product::<i32>().max(1) as f64)
            .sum();
        assert!((its[5].terminal() - taylor).abs() < 5e-3);
    }

    #[test]
    fn picard_converges_to_euler() {
        let g = grid(1.0, 500);
        let init = init_const(1.0, 0.5, &g);
        let scen = Scenario::new(
            VolatilityControl::constant(1.0),
            LevyScenario::new(4.0, JumpLaw::Atoms(vec![(-0.5, 0.5), (0.5, 0.5)])),
        );
        let model = Model::new(
            vec![
                Term::Gbm {
                    mu: 0.2,
                    sigma: 0.4,
                },
                Term::DelayedLinear {
                    a: 0.0,
                    b: -0.3,
                    lag: 0.25,
                },
                Term::JumpLinear { c: 0.5 },
            ],
            1.0,
            1.0,
        );
        let d = DrivingPath::generate(&g, &scen, 8).unwrap();
        assert!(!d.jumps.is_empty());
        let euler = euler_solve(&model, &init, &d).unwrap();
        let lim = picard_limit(
            &model,
            &init,
            &d,
            SolutionPath::constant(g, 1.0),
            200,
            1e-13,
        )
        .unwrap();
        assert!(lim.converged);
        assert!(sup_distance(&lim.path, &euler).unwrap() < 1e-10);
    }

    #[test]
    fn jump_nodes_book_the_jump() {
        let g = grid(1.0, 100);
        let init = init_const(2.0, 0.1, &g);
        let scen = Scenario::new(
            VolatilityControl::constant(0.5),
            LevyScenario::new(10.0, JumpLaw::Uniform { lo: -1.0, hi: 1.0 }),
        );
        let d = DrivingPath::generate(&g, &scen, 21).unwrap();
        let model = Model::new(
            vec![
                Term::JumpLinear { c: 0.3 },
                Term::Gbm {
                    mu: 0.0,
                    sigma: 0.2,
                },
            ],
            1.0,
            1.0,
        );
        let x = euler_solve(&model, &init, &d).unwrap();
        for (i, r) in d.jump_buckets().iter().enumerate() {
            let expected: f64 = d.jumps[r.clone()]
                .iter()
                .map(|j| 0.3 * x.left[i + 1] * j.size)
                .sum();
            let booked = x.values[i + 1] - x.left[i + 1];
            assert!((booked - expected).abs() <= 1e-15 * x.left[i + 1].abs().max(1.0));
            if r.is_empty() {
                assert_eq!(booked, 0.0);
            }
        }
    }

    #[test]
    fn sup_distance_examples() {
        let g = grid(1.0, 4);
        let a = SolutionPath::constant(g, 1.0);
        let mut b = a.clone();
        assert_eq!(sup_distance(&a, &b).unwrap(), 0.0);
        for v in b.values.iter_mut().chain(b.left.iter_mut()) {
            *v += 2.0;
        }
        assert_eq!(sup_distance(&a, &b).unwrap(), 2.0);
        let other = SolutionPath::constant(grid(1.0, 5), 1.0);
        assert!(sup_distance(&a, &other).is_err());
    }

    #[test]
    fn model_names_round_trip() {
        let m = Model::parse("gbm(0.05, 0.2) + delayed_linear(0.1,-0.2,0.5)", 0.1, 0.1).unwrap();
        assert_eq!(m.terms.len(), 2);
        assert_eq!(m.name(), "gbm(0.05,0.2) + delayed_linear(0.1,-0.2,0.5)");
        assert!(matches!(
            Model::parse("heston(1)", 1.0, 1.0),
            Err(Error::Config { .. })
        ));
        assert!(matches!(
            Model::parse("gbm(1)", 1.0, 1.0),
            Err(Error::Config { .. })
        ));
        assert!(matches!(
            Model::parse("zero", -1.0, 1.0),
            Err(Error::Config { .. })
        ));
        assert_eq!(Model::parse("zero", 0.0, 0.0).unwrap(), Model::zero());
    }

    #[test]
    fn lag_beyond_window_is_rejected() {
        let g = grid(1.0, 100);
        let init = init_const(1.0, 0.1, &g);
        let model = Model::delayed_linear(0.0, 1.0, 0.5);
        assert!(euler_solve(&model, &init, &DrivingPath::quiet(&g)).is_err());
    }

    #[test]
    fn divergence_is_reported_with_node() {
        let g = grid(1.0, 100);
        let init = init_const(1.0, 0.1, &g);
        let err =
            euler_solve(&Model::linear_drift(1e300), &init, &DrivingPath::quiet(&g)).unwrap_err();
        assert!(matches!(err, Error::Divergence { node: 2, .. }), "{err:?}");
    }

    #[test]
    fn audits_accept_natural_constants_and_reject_small_ones() {
        let g = grid(1.0, 100);
        let fam = ScenarioFamily::new(vec![Scenario::new(
            VolatilityControl::constant(1.0),
            LevyScenario::new(2.0, JumpLaw::Atoms(vec![(-1.0, 0.5), (1.0, 0.5)])),
        )])
        .unwrap();
        let base = Model::new(
            vec![
                Term::DelayedLinear {
                    a: 0.5,
                    b: -0.25,
                    lag: 0.05,
                },
                Term::JumpLinear { c: 0.4 },
            ],
            0.0,
            0.0,
        );
        let c = base.natural_constant(&fam);
        assert!((c - 0.5625_f64.max(0.16 * 2.0)).abs() < 1e-12);
        let good = base.clone().with_constants(c, c);
        assert!(audit_growth(&good, &fam, &g, 10, 500, 1).holds);
        assert!(audit_lipschitz(&good, &fam, &g, 10, 500, 1).holds);
        let bad = base.with_constants(0.1, 0.1);
        assert!(!audit_growth(&bad, &fam, &g, 10, 500, 1).holds);
        assert!(!audit_lipschitz(&bad, &fam, &g, 10, 500, 1).holds);
    }
}
