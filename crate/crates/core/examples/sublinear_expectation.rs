// Upper expectation, capacity and the tail inequality over a finite
// volatility family.

use gsfde::expectation::{audit_axioms, capacity, chebyshev_check, g_expectation};
use gsfde::{EmpiricalLaw, Result, Scenario, ScenarioFamily, TimeGrid};

pub fn run() -> Result<()> {
    let grid = TimeGrid::new(1.0, 200)?;
    let family = ScenarioFamily::new(vec![Scenario::brownian(0.5), Scenario::brownian(1.0)])?;
    let n_paths = 2000;

    let second = g_expectation(|p| p.terminal().powi(2), &family, &grid, n_paths, 1)?;
    let neg_second = g_expectation(|p| -p.terminal().powi(2), &family, &grid, n_paths, 1)?;
    println!(
        "E^[B(1)^2] = {:.4} (scenario {}), -E^[-B(1)^2] = {:.4}: the law of B(1) is not pinned down",
        second.estimate, second.argmax, -neg_second.estimate
    );

    let tail = capacity(|p| p.terminal().abs() >= 1.0, &family, &grid, n_paths, 1)?;
    println!(
        "capacity(|B(1)| >= 1) = {:.4} +- {:.4}",
        tail.estimate,
        tail.stderr()
    );

    let law = EmpiricalLaw::sample(&family, &grid, n_paths, 1, |p| p.terminal())?;
    for c in [0.5, 1.0, 2.0] {
        let r = chebyshev_check(&law, c, 2.0)?;
        println!(
            "c = {c}: capacity {:.4}, E^|x|^2/c = {:.4}, E^|x|^2/c^2 = {:.4}",
            r.lhs, r.rhs_printed, r.rhs_markov
        );
    }

    let y = EmpiricalLaw::sample(&family, &grid, n_paths, 1, |p| {
        p.terminal() + p.qv[grid.n_steps()]
    })?;
    let audit = audit_axioms(&law, &y, 2.5, 3.0)?;
    println!("axioms on common paths: {audit:?}");
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run()
}
