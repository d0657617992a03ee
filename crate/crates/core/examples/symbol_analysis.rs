//! Conormal symbol, weight windows and decay predictions for straight cones
//! of several opening radii.
//!
//! ```text
//! cargo run --release --example symbol_analysis
//! ```

use conelab::geometry::CrossSectionSpectrum;
use conelab::mellin_analysis::{
    admissible_weights_for, bilaplacian_asymptotics, curvature_condition, laplacian_poles,
    predicted_deviation_exponent, WeightPath,
};

fn main() -> conelab::error::Result<()> {
    let (p, q, epsilon) = (8.0, 4.0, 0.05);
    println!("{:>8} {:>10} {:>10} {:>10} {:>6} {:>10}", "rho0", "lambda1", "gamma_min", "gamma_max", "curv", "alpha_pred");
    for rho0 in [0.2, 0.25, 1.0 / 3.0, 0.4, 0.5, 0.8, 1.0, 2.0, 10.0] {
        let spec = CrossSectionSpectrum::circle(rho0, 4);
        let lambda1 = spec.lambda1().unwrap();
        let window = admissible_weights_for(&spec, p, q, WeightPath::Nonlinear)?;
        let alpha = if window.is_empty() {
            "empty".to_string()
        } else {
            let gamma = window.gamma_max - 1e-6;
            let template = bilaplacian_asymptotics(&spec, gamma)?;
            let pred = predicted_deviation_exponent(&template, gamma, q, epsilon, &[0, 1]);
            format!("{:.4}", pred.alpha_pred)
        };
        println!(
            "{rho0:>8.4} {lambda1:>10.4} {:>10.4} {:>10.4} {:>6} {alpha:>10}",
            window.gamma_min,
            window.gamma_max,
            curvature_condition(1, lambda1)
        );
    }

    let spec = CrossSectionSpectrum::circle(0.4, 2);
    println!("\npoles of the inverse symbol, rho0 = 0.4");
    for entry in &laplacian_poles(&spec).entries {
        let zs: Vec<String> = entry
            .poles
            .iter()
            .map(|p| format!("{:+.4}{:+.4}i (x{})", p.re, p.im, p.multiplicity))
            .collect();
        println!("  k = {:>2}  lambda = {:>8.3}  {}", entry.mode, entry.eigenvalue, zs.join(", "));
    }

    let window = admissible_weights_for(&spec, p, q, WeightPath::Laplacian)?;
    let template = bilaplacian_asymptotics(&spec, window.gamma_max - 1e-6)?;
    println!("\nbi-Laplacian template, strip [{:.4}, {:.4})", template.strip[0], template.strip[1]);
    for term in &template.terms {
        println!("  mode {:>2}: x^{:+.4} log^{} x", term.mode, term.power(), term.log_power);
    }
    Ok(())
}
