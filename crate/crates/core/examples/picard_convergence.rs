// Picard iterates on a fixed driver: the factorial decay of their
// distances and the limit they converge to.

use gsfde::sfde::{euler_solve, picard_iterate, picard_limit, sup_distance};
use gsfde::{
    DrivingPath, InitialData, InitialSegment, Model, Result, Scenario, SolutionPath, TimeGrid,
};

pub fn run() -> Result<()> {
    let grid = TimeGrid::new(1.0, 1000)?;
    let init = InitialData::new(&InitialSegment::Constant(1.0), 0.01, grid.dt())?;

    // dx = x dt: the iterates are Taylor partial sums of e^t
    let quiet = DrivingPath::quiet(&grid);
    let its = picard_iterate(&Model::linear_drift(1.0), &init, &quiet, 8)?;
    println!("n   sup|x^(n+1) - x^n|   1/(n+1)!");
    let mut fact = 1.0;
    for n in 0..8 {
        fact *= (n + 1) as f64;
        println!(
            "{n}   {:.6e}         {:.6e}",
            sup_distance(&its[n + 1], &its[n])?,
            1.0 / fact
        );
    }

    let model = Model::gbm(0.05, 0.2);
    let driver = DrivingPath::generate(&grid, &Scenario::brownian(1.0), 7)?;
    let euler = euler_solve(&model, &init, &driver)?;
    let from_one = picard_limit(
        &model,
        &init,
        &driver,
        SolutionPath::constant(grid, 1.0),
        40,
        1e-14,
    )?;
    let from_two = picard_limit(
        &model,
        &init,
        &driver,
        SolutionPath::constant(grid, 2.0),
        40,
        1e-14,
    )?;
    println!(
        "GBM: limits from two starts differ by {:.1e} after {}/{} iterations; distance to Euler {:.1e}",
        sup_distance(&from_one.path, &from_two.path)?,
        from_one.iterations,
        from_two.iterations,
        sup_distance(&from_one.path, &euler)?
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run()
}
