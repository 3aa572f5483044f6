macro_rules! example {
    ($module:ident, $file:literal) => {
        #[allow(dead_code)]
        mod $module {
            include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/", $file));
        }
    };
}

example!(driver_paths, "driver_paths.rs");
example!(sublinear_expectation, "sublinear_expectation.rs");
example!(picard_convergence, "picard_convergence.rs");
example!(delay_with_jumps, "delay_with_jumps.rs");
example!(bound_audit, "bound_audit.rs");
example!(bdg_calibration, "bdg_calibration.rs");
example!(exponential_growth, "exponential_growth.rs");
example!(run_config, "run_config.rs");

#[test]
fn examples_run() {
    driver_paths::run().unwrap();
    sublinear_expectation::run().unwrap();
    picard_convergence::run().unwrap();
    delay_with_jumps::run().unwrap();
    bound_audit::run().unwrap();
    bdg_calibration::run().unwrap();
    exponential_growth::run().unwrap();
    run_config::run().unwrap();
}
