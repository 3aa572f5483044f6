//! Left-point discrete integrals against `dt`, `dB`, `d<B>` and the jump measure.
//!
//! A [`GridProcess`] is a simple process: its value at `t_i` is held on
//! `[t_i, t_{i+1})`. Every integral here is the corresponding finite sum, so
//! the telescoping and Itô identities hold exactly on the grid.

use crate::error::{Error, Result};
use crate::scenarios::{JumpEvent, TimeGrid};

/// Values of an adapted process at the grid nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct GridProcess {
    pub grid: TimeGrid,
    pub values: Vec<f64>,
}

impl GridProcess {
    pub fn new(grid: TimeGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n_nodes() {
            return Err(Error::usage(format!(
                "grid process needs {} values, got {}",
                grid.n_nodes(),
                values.len()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn constant(grid: TimeGrid, value: f64) -> Self {
        Self {
            grid,
            values: vec![value; grid.n_nodes()],
        }
    }

    pub fn from_fn(grid: TimeGrid, f: impl Fn(usize, f64) -> f64) -> Self {
        let values = (0..grid.n_nodes()).map(|i| f(i, grid.node(i))).collect();
        Self { grid, values }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }
}

fn check_index(grid: &TimeGrid, up_to: usize) -> Result<()> {
    if up_to > grid.n_steps() {
        return Err(Error::usage(format!(
            "node index {up_to} beyond n_steps = {}",
            grid.n_steps()
        )));
    }
    Ok(())
}

fn check_integrator(eta: &GridProcess, integrator: &[f64], up_to: usize) -> Result<()> {
    check_index(&eta.grid, up_to)?;
    if integrator.len() != eta.values.len() {
        return Err(Error::usage(format!(
            "integrand has {} values but integrator has {}",
            eta.values.len(),
            integrator.len()
        )));
    }
    Ok(())
}

/// `Σ_{i<up_to} η[i]·dt`.
pub fn lebesgue_integral(eta: &GridProcess, up_to: usize) -> Result<f64> {
    check_index(&eta.grid, up_to)?;
    let dt = eta.grid.dt();
    Ok(eta.values[..up_to].iter().map(|v| v * dt).sum())
}

/// `Σ_{i<up_to} λ[i]·(B[i+1] − B[i])`.
pub fn ito_integral(lambda: &GridProcess, b: &[f64], up_to: usize) -> Result<f64> {
    check_integrator(lambda, b, up_to)?;
    Ok(increment_sum(&lambda.values, b, up_to))
}

/// `Σ_{i<up_to} η[i]·(qv[i+1] − qv[i])`.
pub fn qv_integral(eta: &GridProcess, qv: &[f64], up_to: usize) -> Result<f64> {
    check_integrator(eta, qv, up_to)?;
    Ok(increment_sum(&eta.values, qv, up_to))
}

fn increment_sum(integrand: &[f64], integrator: &[f64], up_to: usize) -> f64 {
    integrand[..up_to]
        .iter()
        .zip(integrator.windows(2))
        .map(|(l, w)| l * (w[1] - w[0]))
        .sum()
}

/// `Σ_{jumps with time ≤ t} K_j`, where `k_values[j]` is the integrand
/// realized at jump `j`.
pub fn jump_integral(k_values: &[f64], jumps: &[JumpEvent], t: f64) -> Result<f64> {
    if k_values.len() != jumps.len() {
        return Err(Error::usage(format!(
            "{} integrand values for {} jumps",
            k_values.len(),
            jumps.len()
        )));
    }
    Ok(jumps
        .iter()
        .zip(k_values)
        .take_while(|(j, _)| j.time <= t)
        .map(|(_, k)| k)
        .sum())
}

/// Running `∫_0^{t_k} η ds` for every node.
pub fn running_lebesgue(eta: &GridProcess) -> GridProcess {
    let dt = eta.grid.dt();
    prefix(eta.grid, eta.values.iter().map(|v| v * dt))
}

/// Running `∫_0^{t_k} λ dX` for every node, `X` being `B` or `<B>`.
pub fn running_stochastic(lambda: &GridProcess, integrator: &[f64]) -> Result<GridProcess> {
    check_integrator(lambda, integrator, lambda.grid.n_steps())?;
    Ok(prefix(
        lambda.grid,
        lambda
            .values
            .iter()
            .zip(integrator.windows(2))
            .map(|(l, w)| l * (w[1] - w[0])),
    ))
}

/// Running jump sum observed at the nodes: value at `t_k` includes every
/// jump with time `≤ t_k`.
pub fn running_jump(grid: TimeGrid, k_values: &[f64], jumps: &[JumpEvent]) -> Result<GridProcess> {
    if k_values.len() != jumps.len() {
        return Err(Error::usage("one integrand value per jump required"));
    }
    let mut per_interval = vec![0.0; grid.n_steps()];
    for (j, k) in jumps.iter().zip(k_values) {
        per_interval[grid.interval_of(j.time)] += k;
    }
    Ok(prefix(grid, per_interval.into_iter()))
}

fn prefix(grid: TimeGrid, increments: impl Iterator<Item = f64>) -> GridProcess {
    let mut values = Vec::with_capacity(grid.n_nodes());
    let mut acc = 0.0;
    values.push(acc);
    for inc in increments {
        acc += inc;
        values.push(acc);
    }
    GridProcess { grid, values }
}
