//! Numerical laboratory for stochastic functional differential equations
//! driven by G-Lévy processes.
//!
//! ```text
//! dx(t) = f(t, x_t) dt + g(t, x_t) d<B>(t) + h(t, x_t) dB(t) + ∫ K(t, x_{t-}, z) L(dt, dz)
//! ```
//!
//! Volatility ambiguity is represented by a finite [`ScenarioFamily`] of
//! volatility controls paired with compound-Poisson jump laws; the sublinear
//! expectation is the supremum of the per-scenario Monte Carlo means.
//!
//! Modules, bottom-up:
//!
//! * [`scenarios`]: time grid, uncertainty scenarios, driver path generation.
//! * [`integrals`]: left-point Lebesgue, Itô, quadratic-variation and jump sums.
//! * [`expectation`]: upper expectation, capacity, Chebyshev audit.
//! * [`sfde`]: delay segments, coefficient library, Euler solver, Picard iteration.
//! * [`bounds`]: constants and empirical checks of the moment and convergence bounds.
//! * [`runner`]: JSON experiment configs, subcommands, report files.
//!
//! ```
//! use gsfde::sfde::euler_solve;
//! use gsfde::{DrivingPath, InitialData, InitialSegment, Model, Scenario, TimeGrid};
//!
//! let grid = TimeGrid::new(1.0, 1000)?;
//! let driver = DrivingPath::generate(&grid, &Scenario::brownian(1.0), 42)?;
//! let init = InitialData::new(&InitialSegment::Constant(1.0), 0.1, grid.dt())?;
//! let x = euler_solve(&Model::gbm(0.05, 0.2), &init, &driver)?;
//! assert_eq!(x.values.len(), 1001);
//! # Ok::<(), gsfde::Error>(())
//! ```

// `!(x > 0.0)` rejects NaN along with nonpositive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod error;
pub mod expectation;
pub mod integrals;
pub mod runner;
pub mod scenarios;
pub mod sfde;

mod numeric;

pub use bounds::{BoundConstants, BoundReport, Verdict};
pub use error::{Error, Result};
pub use expectation::{EmpiricalLaw, UpperEstimate};
pub use integrals::GridProcess;
pub use scenarios::{
    DrivingPath, JumpEvent, JumpLaw, LevyScenario, Scenario, ScenarioFamily, TimeGrid,
    VolatilityControl, VolatilityKind,
};
pub use sfde::{
    Coefficients, InitialData, InitialSegment, Model, Segment, SegmentView, SolutionPath,
};
