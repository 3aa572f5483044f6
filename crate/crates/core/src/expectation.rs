//! Upper (sublinear) expectation and capacity over a finite scenario family.
//!
//! `Ê[X] = max_j E_j[X]`, with each `E_j` a Monte Carlo mean over `n_paths`
//! driver paths of scenario `j`. Path `k` of scenario `j` always uses seed
//! [`derive_seed`]`(seed, j, k)`, so every functional sampled with the same
//! `(family, grid, n_paths, seed)` sees the same paths.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numeric::mean_and_stderr;
use crate::scenarios::{derive_seed, DrivingPath, ScenarioFamily, TimeGrid};

/// Per-scenario samples of a real functional of the driver.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalLaw {
    pub samples: Vec<Vec<f64>>,
    pub n_paths: usize,
    pub seed: u64,
}

/// `max` over scenarios of the sample means.
#[derive(Debug, Clone, PartialEq)]
pub struct UpperEstimate {
    pub estimate: f64,
    pub means: Vec<f64>,
    pub stderrs: Vec<f64>,
    pub argmax: usize,
}

impl UpperEstimate {
    /// Standard error of the maximizing scenario's mean.
    pub fn stderr(&self) -> f64 {
        self.stderrs[self.argmax]
    }
}

impl EmpiricalLaw {
    pub fn from_samples(samples: Vec<Vec<f64>>, seed: u64) -> Result<Self> {
        let n_paths = samples.first().map_or(0, Vec::len);
        if samples.is_empty() || samples.iter().any(|s| s.len() != n_paths) || n_paths == 0 {
            return Err(Error::usage(
                "every scenario must contribute the same nonzero number of samples",
            ));
        }
        Ok(Self {
            samples,
            n_paths,
            seed,
        })
    }

    /// Evaluate `functional` on every `(scenario, path)` driver.
    pub fn sample<F>(
        family: &ScenarioFamily,
        grid: &TimeGrid,
        n_paths: usize,
        seed: u64,
        functional: F,
    ) -> Result<Self>
    where
        F: Fn(&DrivingPath) -> f64 + Sync,
    {
        Self::try_sample(family, grid, n_paths, seed, |p| Ok(functional(p)))
    }

    pub fn try_sample<F>(
        family: &ScenarioFamily,
        grid: &TimeGrid,
        n_paths: usize,
        seed: u64,
        functional: F,
    ) -> Result<Self>
    where
        F: Fn(&DrivingPath) -> Result<f64> + Sync,
    {
        let mut laws = Self::sample_many(family, grid, n_paths, seed, 1, |_, p| {
            functional(p).map(|v| vec![v])
        })?;
        Ok(laws.remove(0))
    }

    /// Vector-valued version: `functional(scenario_index, path)` returns
    /// `width` numbers per path and one law is built for each coordinate.
    pub fn sample_many<F>(
        family: &ScenarioFamily,
        grid: &TimeGrid,
        n_paths: usize,
        seed: u64,
        width: usize,
        functional: F,
    ) -> Result<Vec<Self>>
    where
        F: Fn(usize, &DrivingPath) -> Result<Vec<f64>> + Sync,
    {
        if n_paths < 2 {
            return Err(Error::usage("n_paths must be at least 2"));
        }
        let jobs: Vec<(usize, usize)> = (0..family.len())
            .flat_map(|j| (0..n_paths).map(move |k| (j, k)))
            .collect();
        let outputs: Vec<Result<Vec<f64>>> = jobs
            .par_iter()
            .map(|&(j, k)| {
                let path =
                    DrivingPath::generate(grid, &family.scenarios()[j], derive_seed(seed, j, k))?;
                let values = functional(j, &path)?;
                if values.len() != width {
                    return Err(Error::usage(format!(
                        "functional returned {} values, expected {width}",
                        values.len()
                    )));
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return Err(Error::NonFinite {
                        scenario: j,
                        path: k,
                    });
                }
                Ok(values)
            })
            .collect();

        let mut laws: Vec<Vec<Vec<f64>>> =
            vec![vec![Vec::with_capacity(n_paths); family.len()]; width];
        for ((j, _), out) in jobs.iter().zip(outputs) {
            for (c, v) in out?.into_iter().enumerate() {
                laws[c][*j].push(v);
            }
        }
        Ok(laws
            .into_iter()
            .map(|samples| Self {
                samples,
                n_paths,
                seed,
            })
            .collect())
    }

    pub fn n_scenarios(&self) -> usize {
        self.samples.len()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            samples: self
                .samples
                .iter()
                .map(|s| s.iter().map(|&x| f(x)).collect())
                .collect(),
            ..*self
        }
    }

    /// Combine two laws sampled on the same paths.
    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if self.n_paths != other.n_paths || self.samples.len() != other.samples.len() {
            return Err(Error::usage("laws were sampled on different path sets"));
        }
        Ok(Self {
            samples: self
                .samples
                .iter()
                .zip(&other.samples)
                .map(|(a, b)| a.iter().zip(b).map(|(&x, &y)| f(x, y)).collect())
                .collect(),
            ..*self
        })
    }

    /// Samplewise `self ≤ other`.
    pub fn dominated_by(&self, other: &Self) -> bool {
        self.samples
            .iter()
            .zip(&other.samples)
            .all(|(a, b)| a.iter().zip(b).all(|(x, y)| x <= y))
    }

    pub fn upper(&self) -> UpperEstimate {
        let (means, stderrs): (Vec<f64>, Vec<f64>) =
            self.samples.iter().map(|s| mean_and_stderr(s)).unzip();
        let mut argmax = 0;
        for (j, m) in means.iter().enumerate() {
            if *m > means[argmax] {
                argmax = j;
            }
        }
        UpperEstimate {
            estimate: means[argmax],
            means,
            stderrs,
            argmax,
        }
    }
}

/// `Ê[functional]` over the family.
pub fn g_expectation<F>(
    functional: F,
    family: &ScenarioFamily,
    grid: &TimeGrid,
    n_paths: usize,
    seed: u64,
) -> Result<UpperEstimate>
where
    F: Fn(&DrivingPath) -> f64 + Sync,
{
    Ok(EmpiricalLaw::sample(family, grid, n_paths, seed, functional)?.upper())
}

/// `ν̂(A)`: the largest empirical frequency of `A` over the family.
pub fn capacity<P>(
    event: P,
    family: &ScenarioFamily,
    grid: &TimeGrid,
    n_paths: usize,
    seed: u64,
) -> Result<UpperEstimate>
where
    P: Fn(&DrivingPath) -> bool + Sync,
{
    g_expectation(
        |p| if event(p) { 1.0 } else { 0.0 },
        family,
        grid,
        n_paths,
        seed,
    )
}

/// Capacity tail bound audit on a sampled random variable.
#[derive(Debug, Clone, PartialEq)]
pub struct ChebyshevReport {
    pub c: f64,
    pub p: f64,
    /// `ν̂(|x| > c)`.
    pub lhs: f64,
    pub lhs_stderr: f64,
    /// `Ê|x|^p / c`.
    pub rhs_printed: f64,
    /// `Ê|x|^p / c^p`.
    pub rhs_markov: f64,
    pub holds: bool,
    pub holds_markov: bool,
}

pub fn chebyshev_check(x: &EmpiricalLaw, c: f64, p: f64) -> Result<ChebyshevReport> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::usage(format!(
            "threshold c must be positive, got {c}"
        )));
    }
    if !(p >= 1.0) {
        return Err(Error::usage(format!(
            "moment order p must be >= 1, got {p}"
        )));
    }
    let tail = x.map(|v| if v.abs() > c { 1.0 } else { 0.0 }).upper();
    let moment = x.map(|v| v.abs().powf(p)).upper().estimate;
    let rhs_printed = moment / c;
    let rhs_markov = moment / c.powf(p);
    let slack = 3.0 * tail.stderr();
    Ok(ChebyshevReport {
        c,
        p,
        lhs: tail.estimate,
        lhs_stderr: tail.stderr(),
        rhs_printed,
        rhs_markov,
        holds: tail.estimate <= rhs_printed + slack,
        holds_markov: tail.estimate <= rhs_markov + slack,
    })
}

/// Outcome of checking the four sublinear-expectation axioms on an estimator.
#[derive(Debug, Clone, PartialEq)]
pub struct AxiomAudit {
    /// `None` when `x ≤ y` fails samplewise and the axiom is vacuous.
    pub monotone: Option<bool>,
    pub constant_preserving: bool,
    pub subadditive: bool,
    pub homogeneous: bool,
}

impl AxiomAudit {
    pub fn all_hold(&self) -> bool {
        self.monotone.unwrap_or(true)
            && self.constant_preserving
            && self.subadditive
            && self.homogeneous
    }
}

/// Floating-point allowance for comparing means of laws whose samples have
/// magnitude up to `scale`.
fn rounding_slack(scale: f64) -> f64 {
    16.0 * f64::EPSILON * scale
}

fn magnitude(law: &EmpiricalLaw) -> f64 {
    law.samples
        .iter()
        .map(|s| s.iter().map(|v| v.abs()).sum::<f64>() / s.len().max(1) as f64)
        .fold(0.0, f64::max)
}

/// Audit monotonicity, constant preservation, sub-additivity and positive
/// homogeneity of [`EmpiricalLaw::upper`] on two laws sampled on common paths.
pub fn audit_axioms(
    x: &EmpiricalLaw,
    y: &EmpiricalLaw,
    constant: f64,
    kappa: f64,
) -> Result<AxiomAudit> {
    if !(kappa > 0.0) {
        return Err(Error::usage("homogeneity factor must be positive"));
    }
    let ex = x.upper().estimate;
    let ey = y.upper().estimate;
    let (mx, my) = (magnitude(x), magnitude(y));

    let monotone = x
        .dominated_by(y)
        .then(|| ex <= ey + rounding_slack(mx + my));

    let constant_preserving = x.map(|_| constant).upper().estimate == constant;

    let sum = x.zip_with(y, |a, b| a + b)?.upper().estimate;
    let subadditive = sum <= ex + ey + rounding_slack(2.0 * (mx + my));

    let scaled = x.map(|v| kappa * v).upper().estimate;
    let homogeneous = (scaled - kappa * ex).abs() <= rounding_slack(2.0 * kappa * mx);

    Ok(AxiomAudit {
        monotone,
        constant_preserving,
        subadditive,
        homogeneous,
    })
}
