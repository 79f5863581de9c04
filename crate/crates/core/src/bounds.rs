//! Stability constants for the co-located and the packetized/buffered
//! architectures.
//!
//! Starting from a plant, a stabilizing gain `K` and a Lyapunov weight `M`,
//! [`derive_constants`] evaluates the full chain
//!
//! ```text
//! Φ = A + BK,  Φ'P + PΦ + M = 0,  α₁ ≤ eig(P) ≤ α₂,  γ₁ = λ_min(M)
//! γ₂ = ‖2PBK‖,  γ₃ = ‖2P‖,  σ = f·γ₁/γ₂,  γ₄ = γ₁ − σγ₂
//! ρ = σ + ρ₁ρ₂(1 + σ),  γ₅ = γ₂ρ + γ₃,  γ₆ = γ₅²/(2γ₄),  γ₇ = (γ₃ + ργ₂)²/(2γ₄)
//! ω₁ = γ₄/(2α₂),  ω₂ = γ₂(2 + σ)/α₁,  ζ₁ = γ₆/ω₁,  ζ₂ = γ₇/ω₂
//! ```
//!
//! `ω₁` is the guaranteed Lyapunov decay rate while the buffer still holds
//! predicted inputs, `ω₂` the worst growth rate once it has run dry.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{
    ensure_hurwitz, log_norm, matrix_to_rows, solve_lyapunov, spectral_norm, symmetric_extremes,
    Matrix,
};
use crate::plant::LtiPlant;

/// σ fraction used when reporting the sampling bound; the bound is
/// attained only as σ approaches `γ₁/γ₂`.
pub const REPORT_SIGMA_FRACTION: f64 = 1.0 - 1e-9;
/// Default σ fraction for the constants that drive simulations.
pub const DEFAULT_SIGMA_FRACTION: f64 = 0.5;

#[derive(Debug, Clone)]
pub struct DesignInputs {
    pub plant: LtiPlant,
    pub k: Matrix,
    pub m: Matrix,
    pub sigma_fraction: f64,
}

impl DesignInputs {
    pub fn new(plant: LtiPlant, k: Matrix, m: Matrix, sigma_fraction: f64) -> Result<Self> {
        let phi = plant.closed_loop(&k)?;
        ensure_hurwitz(&phi)?;
        if !(sigma_fraction > 0.0 && sigma_fraction <= 1.0) {
            return Err(Error::Domain(format!(
                "sigma_fraction must lie in (0, 1], got {sigma_fraction}"
            )));
        }
        Ok(Self {
            plant,
            k,
            m,
            sigma_fraction,
        })
    }

    /// Same design with `M = I`.
    pub fn with_identity_weight(plant: LtiPlant, k: Matrix, sigma_fraction: f64) -> Result<Self> {
        let n = plant.n();
        Self::new(plant, k, Matrix::identity(n, n), sigma_fraction)
    }

    pub fn phi(&self) -> Matrix {
        self.plant.a() + self.plant.b() * &self.k
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivedConstants {
    #[serde(rename = "P")]
    pub p: Vec<Vec<f64>>,
    pub alpha1: f64,
    pub alpha2: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub gamma3: f64,
    pub gamma4: f64,
    pub gamma5: f64,
    pub gamma6: f64,
    pub gamma7: f64,
    pub sigma: f64,
    #[serde(rename = "mu_A")]
    pub mu_a: f64,
    pub norm_phi: f64,
    pub kappa1: f64,
    pub rho1: f64,
    pub rho2: f64,
    pub rho: f64,
    pub omega1: f64,
    pub omega2: f64,
    pub zeta1: f64,
    pub zeta2: f64,
    /// Buffer length the constants were evaluated for.
    pub h: usize,
    /// Actuator sampling period the constants were evaluated for.
    pub delta: f64,
}

impl DerivedConstants {
    pub fn p_matrix(&self) -> Matrix {
        let n = self.p.len();
        Matrix::from_fn(n, n, |i, j| self.p[i][j])
    }

    /// `ζ(t)` of the decay envelope for a given `‖w‖∞`. The exponent is
    /// floored at zero so that `ζ` never drops below the within-horizon term.
    pub fn zeta(&self, env: &EnvelopeConstants, w_inf: f64) -> f64 {
        2.0 * self.zeta1.max(self.zeta2)
            * (self.omega2 * (env.q + env.delta_big - self.h as f64 * self.delta).max(0.0)).exp()
            * w_inf
            * w_inf
    }
}

/// `ρ₁`: growth of the sampled prediction error over a full buffer.
/// The closed form needs `μ_A > 0`; otherwise the integral bound
/// `1 + (h − 1)δ` is used.
pub fn rho1(mu_a: f64, h: usize, delta: f64) -> f64 {
    let span = (h.saturating_sub(1)) as f64 * delta;
    if mu_a > 0.0 {
        (1.0 + 1.0 / mu_a) * (mu_a * span).exp()
    } else {
        1.0 + span
    }
}

pub fn derive_constants(inputs: &DesignInputs, h: usize, delta: f64) -> Result<DerivedConstants> {
    if h == 0 {
        return Err(Error::Domain("buffer length h must be >= 1".into()));
    }
    if !(delta.is_finite() && delta > 0.0) {
        return Err(Error::Domain(format!("sampling period must be > 0, got {delta}")));
    }
    let phi = inputs.phi();
    let p = solve_lyapunov(&phi, &inputs.m)?;
    let p_spec = symmetric_extremes(&p)?;
    let (alpha1, alpha2) = (p_spec.min_eig, p_spec.max_eig);
    let gamma1 = symmetric_extremes(&inputs.m)?.min_eig;
    let bk = inputs.plant.b() * &inputs.k;
    let gamma2 = spectral_norm(&(&p * &bk * 2.0));
    let gamma3 = spectral_norm(&(&p * 2.0));

    let frac = inputs.sigma_fraction;
    let sigma = frac * gamma1 / gamma2;
    // γ₁ − σγ₂ with σ = f·γ₁/γ₂, written so that f = 1 gives exactly zero
    let gamma4 = gamma1 * (1.0 - frac);
    if !(gamma4 > 0.0) {
        return Err(Error::InfeasibleSigma { margin: gamma4 });
    }

    let mu_a = log_norm(inputs.plant.a())?;
    let norm_phi = spectral_norm(&phi);
    let kappa1 = norm_phi.max(1.0);
    let rho2 = (mu_a * delta).exp().max(1.0);
    let rho1 = rho1(mu_a, h, delta);
    let rho = sigma + rho1 * rho2 * (1.0 + sigma);

    let gamma5 = gamma2 * rho + gamma3;
    let gamma6 = gamma5 * gamma5 / (2.0 * gamma4);
    let gamma7 = (gamma3 + rho * gamma2).powi(2) / (2.0 * gamma4);
    let omega1 = gamma4 / (2.0 * alpha2);
    let omega2 = gamma2 * (2.0 + sigma) / alpha1;

    Ok(DerivedConstants {
        p: matrix_to_rows(&p),
        alpha1,
        alpha2,
        gamma1,
        gamma2,
        gamma3,
        gamma4,
        gamma5,
        gamma6,
        gamma7,
        sigma,
        mu_a,
        norm_phi,
        kappa1,
        rho1,
        rho2,
        rho,
        omega1,
        omega2,
        zeta1: gamma6 / omega1,
        zeta2: gamma7 / omega2,
        h,
        delta,
    })
}

/// Largest controller sampling period for which the prediction error stays
/// within `σ‖x‖` between samples.
pub fn delta_max(mu_a: f64, sigma: f64, norm_phi: f64) -> f64 {
    let kappa1 = norm_phi.max(1.0);
    let share = sigma / (1.0 + sigma);
    if mu_a > 0.0 {
        (share * mu_a / kappa1).ln_1p() / mu_a
    } else {
        share / kappa1
    }
}

/// `f(s) = ∫₀^s e^{μ_A r} dr`.
pub fn error_growth(mu_a: f64, s: f64) -> f64 {
    if mu_a == 0.0 {
        s
    } else {
        (mu_a * s).exp_m1() / mu_a
    }
}

fn check_rates(omega1: f64, omega2: f64) -> Result<()> {
    if !(omega1.is_finite() && omega1 > 0.0 && omega2.is_finite() && omega2 >= 0.0) {
        return Err(Error::Domain(format!(
            "rates must satisfy omega1 > 0 and omega2 >= 0, got ({omega1}, {omega2})"
        )));
    }
    Ok(())
}

fn check_period(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must be > 0, got {v}")))
    }
}

/// `ω₂/(ω₁ + ω₂)·(Q + Δ)`: the prediction horizon `hδ` must strictly exceed
/// this.
pub fn horizon_threshold(omega1: f64, omega2: f64, q: f64, delta_big: f64) -> f64 {
    omega2 / (omega1 + omega2) * (q + delta_big)
}

/// Horizon form of the remote stability condition.
pub fn horizon_condition(omega1: f64, omega2: f64, q: f64, delta_big: f64, h: usize, delta: f64) -> bool {
    h as f64 * delta > horizon_threshold(omega1, omega2, q, delta_big)
}

pub fn min_prediction_horizon(
    consts: &DerivedConstants,
    q: f64,
    delta_big: f64,
    delta: f64,
) -> Result<usize> {
    min_horizon_for_rates(consts.omega1, consts.omega2, q, delta_big, delta)
}

/// Smallest `h ≥ 1` with `hδ > ω₂/(ω₁ + ω₂)·(Q + Δ)`. None of the rates
/// depend on `h`, so no fixed-point iteration is needed.
pub fn min_horizon_for_rates(
    omega1: f64,
    omega2: f64,
    q: f64,
    delta_big: f64,
    delta: f64,
) -> Result<usize> {
    check_rates(omega1, omega2)?;
    check_period("delta", delta)?;
    check_period("Delta", delta_big)?;
    if !(q.is_finite() && q >= 0.0) {
        return Err(Error::Domain(format!("Q must be finite and >= 0, got {q}")));
    }
    let threshold = horizon_threshold(omega1, omega2, q, delta_big);
    let mut h = ((threshold / delta).floor() as usize).saturating_sub(1).max(1);
    while !(h as f64 * delta > threshold) {
        h += 1;
    }
    Ok(h)
}

pub fn tolerable_dos_bound(
    consts: &DerivedConstants,
    h: usize,
    delta: f64,
    delta_big: f64,
    kappa: f64,
    eta: f64,
) -> Result<f64> {
    gap_rhs_for_rates(consts.omega1, consts.omega2, h, delta, delta_big, kappa, eta)
}

/// Right-hand side of the gap form of the remote stability condition,
/// `1 − ω₂(κ + ηΔ)/((ω₁ + ω₂)hδ − ω₂Δ)`; the DoS load `1/T + Δ/τ_D` must
/// stay strictly below it.
pub fn gap_rhs_for_rates(
    omega1: f64,
    omega2: f64,
    h: usize,
    delta: f64,
    delta_big: f64,
    kappa: f64,
    eta: f64,
) -> Result<f64> {
    check_rates(omega1, omega2)?;
    check_period("delta", delta)?;
    check_period("Delta", delta_big)?;
    let denom = (omega1 + omega2) * h as f64 * delta - omega2 * delta_big;
    if !(denom > 0.0) {
        return Err(Error::HorizonTooShort(format!(
            "(omega1 + omega2) h delta - omega2 Delta = {denom} must be positive"
        )));
    }
    Ok(1.0 - omega2 * (kappa + eta * delta_big) / denom)
}

/// Constants of the exponential envelope on `V` at successful
/// transmissions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeConstants {
    pub beta: f64,
    pub lambda: f64,
    #[serde(rename = "L")]
    pub l: f64,
    #[serde(rename = "Q")]
    pub q: f64,
    #[serde(rename = "Delta")]
    pub delta_big: f64,
}

pub fn decay_envelope(
    consts: &DerivedConstants,
    q: f64,
    delta_big: f64,
    h: usize,
    delta: f64,
) -> Result<EnvelopeConstants> {
    envelope_for_rates(consts.omega1, consts.omega2, q, delta_big, h, delta)
}

/// `β = (ω₁hδ − ω₂(Q + Δ − hδ))/(Q + Δ)`, `λ = e^{(ω₁+ω₂)Q}`, `L = e^{−βΔ}`,
/// with `hδ` read as `min(hδ, Q + Δ)`.
pub fn envelope_for_rates(
    omega1: f64,
    omega2: f64,
    q: f64,
    delta_big: f64,
    h: usize,
    delta: f64,
) -> Result<EnvelopeConstants> {
    check_rates(omega1, omega2)?;
    check_period("delta", delta)?;
    check_period("Delta", delta_big)?;
    // Buffer entries beyond the longest possible gap are never played, so
    // the horizon is capped at Q + Δ (where β reaches ω₁).
    let span = (h as f64 * delta).min(q + delta_big);
    let beta = (omega1 * span - omega2 * (q + delta_big - span)) / (q + delta_big);
    if !(beta > 0.0) {
        return Err(Error::HorizonTooShort(format!(
            "envelope decay rate beta = {beta} must be positive"
        )));
    }
    Ok(EnvelopeConstants {
        beta,
        lambda: ((omega1 + omega2) * q).exp(),
        l: (-beta * delta_big).exp(),
        q,
        delta_big,
    })
}

/// Defining formula for every reported constant, keyed by its output name.
pub fn provenance() -> Vec<(&'static str, &'static str)> {
    vec![
        ("P", "solution of Phi' P + P Phi + M = 0, Phi = A + B K"),
        ("alpha1", "smallest eigenvalue of P"),
        ("alpha2", "largest eigenvalue of P"),
        ("gamma1", "smallest eigenvalue of M"),
        ("gamma2", "||2 P B K||"),
        ("gamma3", "||2 P||"),
        ("sigma", "sigma_fraction * gamma1 / gamma2"),
        ("gamma4", "gamma1 - sigma gamma2"),
        ("gamma5", "gamma2 rho + gamma3"),
        ("gamma6", "gamma5^2 / (2 gamma4)"),
        ("gamma7", "(gamma3 + rho gamma2)^2 / (2 (gamma1 - sigma gamma2))"),
        ("mu_A", "lambda_max((A + A')/2)"),
        ("kappa1", "max(||Phi||, 1)"),
        ("rho1", "(1 + 1/mu_A) exp(mu_A (h-1) delta) if mu_A > 0, else 1 + (h-1) delta"),
        ("rho2", "max(exp(mu_A delta), 1)"),
        ("rho", "sigma + rho1 rho2 (1 + sigma)"),
        ("omega1", "gamma4 / (2 alpha2)"),
        ("omega2", "gamma2 (2 + sigma) / alpha1"),
        ("zeta1", "gamma6 / omega1"),
        ("zeta2", "gamma7 / omega2"),
        ("Q", "(kappa + eta Delta) / (1 - 1/T - Delta/tau_D)"),
        ("delta_max", "log(sigma/(1+sigma) mu_A/kappa1 + 1)/mu_A if mu_A > 0, else sigma/(1+sigma)/kappa1"),
        ("h_min", "smallest h with h delta > omega2/(omega1+omega2) (Q + Delta)"),
        ("gap_rhs", "1 - omega2 (kappa + eta Delta) / ((omega1+omega2) h delta - omega2 Delta)"),
        ("beta", "(omega1 s - omega2 (Q + Delta - s)) / (Q + Delta), s = min(h delta, Q + Delta)"),
        ("lambda", "exp((omega1 + omega2) Q)"),
        ("L", "exp(-beta Delta)"),
    ]
}
