//! A focusing cubic on the sphere: the running `K(t)` monitor crosses its
//! threshold and the run halts gracefully with finite data.
//!
//! ```text
//! cargo run --release --example focusing_blowup
//! ```

use conelab::config::RunConfig;
use conelab::pipeline::simulate;

fn main() -> conelab::error::Result<()> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios/focusing_sphere.toml");
    let cfg = RunConfig::load(path.as_ref(), &[])?;
    let sim = simulate(&cfg)?;
    let stride = (sim.monitor.len() / 15).max(1);
    println!("{:>8} {:>12} {:>12} {:>12}", "t", "sup|u|", "||F||", "K(t)");
    for row in sim.monitor.iter().step_by(stride).chain(sim.monitor.last()) {
        println!("{:>8.4} {:>12.4e} {:>12.4e} {:>12.4e}", row.t, row.sup_norm, row.f_norm, row.k_running);
    }
    println!("status: {:?} after {} steps", sim.status, sim.steps);
    println!("final field finite: {}", sim.last().u.is_finite());
    Ok(())
}
