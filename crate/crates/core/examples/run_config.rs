//! Drives the command-line layer from code: a configuration is resolved,
//! written next to its results, and rerunning it reproduces the outputs.

use soliton_lab::cli::{self, RunConfig};
use soliton_lab::Result;

fn main() -> Result<()> {
    let dir = std::env::temp_dir().join("soliton-lab-run-config");
    let mut cfg = RunConfig { command: Some("profile".into()), ..Default::default() };
    cfg.params.b = Some(-0.1);
    cfg.params.s = Some(0.5);
    cfg.grid.half_length = Some(30.0);
    cfg.grid.n = Some(256);
    cli::execute(cfg, &dir.join("first"))?;

    let resolved = RunConfig::load(&dir.join("first/config.toml"))?;
    println!("resolved config:\n{}", resolved.to_toml()?);
    cli::execute(resolved, &dir.join("second"))?;
    for f in ["profile.csv", "summary.json", "config.toml"] {
        let a = std::fs::read(dir.join("first").join(f))?;
        let b = std::fs::read(dir.join("second").join(f))?;
        println!("{f:<14} identical: {}", a == b);
    }
    cli::report(&dir, &dir)?;
    println!("\n{}", std::fs::read_to_string(dir.join("report.csv"))?);
    Ok(())
}
