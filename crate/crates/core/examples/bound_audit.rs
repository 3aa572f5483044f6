// Constants of the moment and Picard bounds and their Monte Carlo checks
// on a geometric Brownian motion under two volatility scenarios.

use gsfde::bounds::{
    check_boundedness, check_coefficients, check_error_estimate, check_picard_decay,
    check_uniqueness, BdgConstants, Experiment,
};
use gsfde::{
    BoundConstants, InitialData, InitialSegment, Model, Result, Scenario, ScenarioFamily, TimeGrid,
};

pub fn run() -> Result<()> {
    let grid = TimeGrid::new(1.0, 500)?;
    let family = ScenarioFamily::new(vec![Scenario::brownian(0.5), Scenario::brownian(1.0)])?;
    let model = Model::gbm(0.05, 0.2);
    let initial = InitialSegment::Constant(1.0);
    let exp = Experiment {
        model: &model,
        family: &family,
        grid,
        initial: &initial,
        delay_window: 0.01,
        n_paths: 128,
        seed: 3,
    };
    let bdg = BdgConstants::defaults(family.sigma_bar());
    let zeta = InitialData::new(&initial, 0.01, grid.dt())?.norm_sq();
    let k = BoundConstants::compute(model.c1, model.c2, bdg.k1, bdg.k2, bdg.k3, 1.0, zeta)?;
    println!(
        "k^ = {}, M = {:.3}, C (statement/proof/safe) = {:.3}/{:.3}/{:.3}",
        k.k_hat, k.m, k.c_theorem, k.c_proof, k.c_safe
    );

    let mut reports = check_coefficients(&exp)?;
    reports.extend(check_boundedness(&exp, &k)?);
    reports.extend(check_picard_decay(&exp, &k, 6)?);
    reports.extend(check_error_estimate(&exp, &k, 6)?);
    reports.extend(check_uniqueness(&exp, 1.0, 40, 1e-8)?);
    for r in &reports {
        println!(
            "{:<16} {:<16} {:>12.4e} <= {:<12.4e} {}",
            r.check, r.name, r.lhs, r.rhs, r.holds
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run()
}
