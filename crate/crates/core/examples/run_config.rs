// Drive the experiment runner from a JSON config, as the `gsfde` binary
// does. Pass a config path, or the bundled zero-coefficient config is used.

use std::path::PathBuf;

use gsfde::runner::{execute, ExperimentConfig, Subcommand};
use gsfde::Result;

pub fn run() -> Result<()> {
    let path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| {
            PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/configs/zero.json"))
        });
    let cfg = ExperimentConfig::load(&path)?;
    let out = std::env::temp_dir().join(format!("gsfde-example-{}", std::process::id()));
    let outcome = execute(Subcommand::Verify, &cfg, &out)?;
    let failed = outcome.reports.iter().filter(|r| !r.passed()).count();
    println!(
        "{} checks, {failed} failed, exit code {}",
        outcome.reports.len(),
        outcome.exit_code()
    );
    for a in &outcome.artifacts {
        println!("wrote {}", a.display());
    }
    std::fs::remove_dir_all(&out).ok();
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run()
}
