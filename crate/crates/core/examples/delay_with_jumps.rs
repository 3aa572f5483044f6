// A delay equation with jumps: history segments, the Euler scheme and
// the jump bookkeeping of the càdlàg solution.

use gsfde::sfde::{euler_solve, segment_extract};
use gsfde::{
    DrivingPath, InitialData, InitialSegment, JumpLaw, LevyScenario, Model, Result, Scenario,
    TimeGrid, VolatilityControl,
};

pub fn run() -> Result<()> {
    let grid = TimeGrid::new(2.0, 2000)?;
    let model = Model::parse(
        "delayed_linear(-0.5,0.8,0.5) + gbm(0,0.3) + jump_linear(0.4)",
        1.69,
        1.69,
    )?;
    let init = InitialData::new(
        &InitialSegment::Affine {
            at_zero: 1.0,
            slope: 0.5,
        },
        0.5,
        grid.dt(),
    )?;
    let scenario = Scenario::new(
        VolatilityControl::bang_bang(0.6, 1.0, 0.5),
        LevyScenario::new(2.0, JumpLaw::Atoms(vec![(0.5, 0.7), (-0.8, 0.3)])),
    );
    let driver = DrivingPath::generate(&grid, &scenario, 2024)?;
    let x = euler_solve(&model, &init, &driver)?;

    println!("model: {}", model.name());
    println!("x(T) = {:.5}, sup|x|^2 = {:.5}", x.terminal(), x.sup_sq());
    for e in &driver.jumps {
        let i = grid.interval_of(e.time) + 1;
        // the jump coefficient reads x(t-): here 0.4 * x(t-) * z
        println!(
            "jump at t = {:.4}, z = {:+.2}: x(t-) = {:+.5}, x(t) = {:+.5}, expected step {:+.5}",
            e.time,
            e.size,
            x.left[i],
            x.values[i],
            0.4 * x.left[i] * e.size
        );
    }

    let mid = grid.n_steps() / 2;
    let seg = segment_extract(&x, &init, mid, true)?;
    println!(
        "segment at t = {}: {} nodes, head {:.5}, value half a unit back {:.5}, norm {:.5}",
        grid.node(mid),
        seg.values.len(),
        seg.head(),
        seg.values[0],
        seg.norm()
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run()
}
