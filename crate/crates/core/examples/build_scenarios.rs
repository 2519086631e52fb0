//! Regenerates the bundled scenario files.
//!
//! ```text
//! cargo run -p livedesc-core --example build_scenarios -- scenarios
//! ```

#[path = "../tests/common/scenarios.rs"]
mod scenarios;

use std::path::PathBuf;

use livedesc_core::sim::Scenario;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "scenarios".into()));
    std::fs::create_dir_all(&dir)?;
    for (name, build) in scenarios::BUNDLED {
        let scenario = Scenario::from_records(build())?;
        let path = dir.join(name);
        std::fs::write(&path, scenario.to_jsonl())?;
        println!("{} ({} records)", path.display(), scenario.records().len());
    }
    Ok(())
}
