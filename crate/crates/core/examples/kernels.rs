//! Matrix kernels on the double-integrator example: matrix exponential,
//! zero-order-hold discretization, Lyapunov solution and norms.
//!
//! ```text
//! cargo run --example kernels
//! ```

use dosctrl::matrix::{expm, log_norm, lyapunov_residual, solve_lyapunov, spectral_norm, symmetric_extremes, zoh_discretize};
use dosctrl::repro;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let plant = repro::plant();
    let k = repro::gain();
    let phi = plant.closed_loop(&k)?;

    println!("e^(0.1 A) = {}", expm(plant.a(), 0.1)?);
    let (ad, bd) = zoh_discretize(plant.a(), plant.b(), 0.1)?;
    println!("A_delta = {ad}B_delta = {bd}");

    let m = dosctrl::matrix::Matrix::identity(2, 2);
    let p = solve_lyapunov(&phi, &m)?;
    let spec = symmetric_extremes(&p)?;
    println!("P = {p}");
    println!("eigenvalues of P: [{:.6}, {:.6}]", spec.min_eig, spec.max_eig);
    println!("residual ||Phi'P + P Phi + M||_F = {:.3e}", lyapunov_residual(&phi, &p, &m));
    println!("||Phi|| = {:.6}", spectral_norm(&phi));
    println!("mu(A) = {:.6}", log_norm(plant.a())?);
    Ok(())
}
