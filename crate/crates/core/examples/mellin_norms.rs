//! Weighted Mellin–Sobolev norms of power-law fields near a cone tip, and the
//! weighted pointwise bound checked on two nested grids.
//!
//! ```text
//! cargo run --release --example mellin_norms
//! ```

use conelab::field::ModeField;
use conelab::geometry::{OuterBc, SurfaceOfRevolution, WarpProfile};
use conelab::grid::{build_grid, XMinPolicy};
use conelab::mellin_norms::{mellin_norm, pointwise_bound_check, MellinNormConfig};
use num_complex::Complex64;

fn power_field(grid: &conelab::grid::RadialGrid, a: f64, k: usize) -> ModeField {
    let mut u = ModeField::zeros(k, grid.len());
    for (j, x) in grid.x().iter().enumerate() {
        u.mode_mut(k)[j] = Complex64::new(x.powf(a), 0.0);
    }
    u
}

fn main() -> conelab::error::Result<()> {
    let collar = 1.0;
    let surface = SurfaceOfRevolution::collar(WarpProfile::constant_cone(0.5, collar)?, OuterBc::Dirichlet);
    let coarse = build_grid(&surface, 256, XMinPolicy::Fraction(1e-4))?;
    let fine = build_grid(&surface, 512, XMinPolicy::Fraction(1e-4))?;

    println!("norms of x^a cos(k theta) with gamma = 0.5");
    println!("{:>5} {:>3} {:>3} {:>3} {:>14} {:>14}", "a", "k", "s", "p", "N=256", "N=512");
    for (a, k) in [(0.5, 0), (1.0, 1), (2.0, 2)] {
        for (s, p) in [(0, 2.0), (1, 2.0), (1, 4.0), (2, 8.0)] {
            let cfg = MellinNormConfig::new(s, 0.5, p);
            let nc = mellin_norm(&power_field(&coarse, a, k), &coarse, collar, &cfg)?;
            let nf = mellin_norm(&power_field(&fine, a, k), &fine, collar, &cfg)?;
            println!("{a:>5} {k:>3} {s:>3} {p:>3} {nc:>14.8} {nf:>14.8}");
        }
    }

    let cfg = MellinNormConfig::new(1, 0.5, 4.0);
    let check = pointwise_bound_check(
        (&power_field(&coarse, 1.0, 1), &coarse),
        (&power_field(&fine, 1.0, 1), &fine),
        collar,
        &cfg,
    )?;
    println!(
        "\nsup bound constant: {:.5} (N=256), {:.5} (N=512), drift {:.4}, applicable {}, pass {}",
        check.l_coarse, check.l_fine, check.drift, check.applicable, check.pass
    );
    Ok(())
}
