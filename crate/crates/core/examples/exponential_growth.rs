// Long-horizon growth of the second moment against the exponential rate
// implied by the growth constant.

use gsfde::bounds::{check_exponential, fit_growth, BdgConstants, Experiment};
use gsfde::{BoundConstants, InitialSegment, Model, Result, Scenario, ScenarioFamily};

pub fn run() -> Result<()> {
    let family = ScenarioFamily::singleton(Scenario::brownian(1.0))?;
    let initial = InitialSegment::Constant(1.0);
    let bdg = BdgConstants::defaults(1.0);
    for model in [Model::linear_drift(0.3), Model::gbm(0.1, 0.2)] {
        let exp = Experiment {
            model: &model,
            family: &family,
            grid: gsfde::TimeGrid::new(1.0, 100)?,
            initial: &initial,
            delay_window: 0.01,
            n_paths: 64,
            seed: 12,
        };
        let k = BoundConstants::compute(model.c1, model.c2, bdg.k1, bdg.k2, bdg.k3, 1.0, 1.0)?;
        let fit = fit_growth(&exp, 20, 100)?;
        let report = &check_exponential(&exp, &k, 20, 100)?[0];
        println!(
            "{}: fitted rate {:.4} +- {:.4} over m = {}..{}, bound {:.3} -> {}",
            model.name(),
            fit.rate,
            fit.rate_stderr,
            fit.m_used / 2 + 1,
            fit.m_used,
            report.rhs,
            report.holds
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run()
}
