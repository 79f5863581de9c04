//! Derived constants and stability bounds for the double-integrator example
//! under the class fitted to the recorded DoS signal.
//!
//! ```text
//! cargo run --example stability_bounds
//! ```

use dosctrl::bounds::{delta_max, provenance};
use dosctrl::commands::bounds;
use dosctrl::repro;
use dosctrl::sim::Architecture;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let exp = repro::config(Architecture::Remote, 5).resolve(None)?;
    let report = bounds(&exp)?;
    let c = &report.constants;
    println!("alpha1 = {:.6}  alpha2 = {:.6}  gamma2 = {:.6}", c.alpha1, c.alpha2, c.gamma2);
    println!("||Phi|| = {:.6}  mu_A = {:.6}  sigma = {:.6}", c.norm_phi, c.mu_a, c.sigma);
    println!("omega1 = {:.4}  omega2 = {:.4}", c.omega1, c.omega2);
    println!("delta_max = {:.6} (at sigma: {:.6})", report.delta_max, report.delta_max_at_sigma);

    println!("\nsigma fraction vs admissible sampling period:");
    for frac in [0.1, 0.3, 0.55, 0.8, 0.99] {
        let sigma = frac * c.gamma1 / c.gamma2;
        println!("  {frac:>4}: {:.6}", delta_max(c.mu_a, sigma, c.norm_phi));
    }

    println!("\nclass ({:?}): {:?}", report.class_source, report.class);
    println!("load = {:.4}  Q = {:.4}  h_min = {}", report.load, report.q, report.h_min);
    match report.envelope() {
        Some(env) => println!("h = {}: beta = {:.4}, lambda = {:.4e}", exp.sim.h, env.beta, env.lambda),
        None => println!("h = {} is below the minimal horizon; no envelope", exp.sim.h),
    }

    println!("\nwhere each constant comes from:");
    for (name, formula) in provenance().iter().take(6) {
        println!("  {name:<8} {formula}");
    }
    Ok(())
}
