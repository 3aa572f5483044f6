// Second-moment maximal inequalities for the three stochastic integrals,
// with the empirical constant that would make each one tight.

use gsfde::bounds::{check_bdg, BdgConstants, BdgKind, Integrand};
use gsfde::{JumpLaw, LevyScenario, Result, Scenario, ScenarioFamily, TimeGrid, VolatilityControl};

pub fn run() -> Result<()> {
    let grid = TimeGrid::new(1.0, 500)?;
    let family = ScenarioFamily::new(vec![
        Scenario::new(
            VolatilityControl::constant(1.0),
            LevyScenario::new(2.0, JumpLaw::Atoms(vec![(1.0, 0.5), (-1.0, 0.5)])),
        ),
        Scenario::new(
            VolatilityControl::bang_bang(0.5, 1.0, 0.2),
            LevyScenario::none(),
        ),
    ])?;
    let bdg = BdgConstants::defaults(family.sigma_bar());
    for kind in BdgKind::ALL {
        for r in check_bdg(kind, &Integrand::corpus(), &family, &grid, &bdg, 400, 8)? {
            println!(
                "{:<18} lhs {:>8.4}  rhs {:>8.4}  calibrated k {:>7.4}  {}",
                r.name, r.lhs, r.rhs, r.details["calibrated_k"], r.holds
            );
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run()
}
