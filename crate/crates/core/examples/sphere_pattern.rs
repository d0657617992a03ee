//! Pattern formation from random data on the round sphere. Writes snapshots,
//! the monitor trace, a gridded `(x, θ)` field and the run manifest to
//! `out/sphere_pattern/`.
//!
//! ```text
//! cargo run --release --example sphere_pattern
//! ```

use std::path::Path;

use conelab::config::RunConfig;
use conelab::pipeline::cmd_simulate;

fn main() -> conelab::error::Result<()> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios/sphere_pattern.toml");
    let cfg = RunConfig::load(path.as_ref(), &[])?;
    let out = Path::new("out/sphere_pattern");
    let sim = cmd_simulate(&cfg, out)?;
    for snap in &sim.snapshots {
        let energy: f64 = snap.u.modes().iter().flatten().map(|v| v.norm_sqr()).sum();
        println!("t = {:>5.2}: sum |u_k|^2 = {:.6e}", snap.t, energy);
    }
    println!("wrote {} ({:?})", out.display(), sim.status);
    Ok(())
}
