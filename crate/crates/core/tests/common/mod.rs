//! Helpers shared by the integration and acceptance tests: seeded random
//! systems, an independent Taylor-series exponential, and DoS signals with
//! controlled gaps.
#![allow(dead_code)]

use dosctrl::dos::DosSignal;
use dosctrl::matrix::{Matrix, Vector};
use dosctrl::plant::LtiPlant;
use dosctrl::rng::Stream;

pub fn random_matrix(rng: &mut Stream, r: usize, c: usize, scale: f64) -> Matrix {
    Matrix::from_fn(r, c, |_, _| rng.uniform(-scale, scale))
}

pub fn random_vector(rng: &mut Stream, n: usize, scale: f64) -> Vector {
    Vector::from_fn(n, |_, _| rng.uniform(-scale, scale))
}

/// Random symmetric positive definite matrix with eigenvalues at least `floor`.
pub fn random_spd(rng: &mut Stream, n: usize, floor: f64) -> Matrix {
    let l = random_matrix(rng, n, n, 1.0);
    &l * l.transpose() + Matrix::identity(n, n) * floor
}

/// Largest real part of the eigenvalues.
pub fn spectral_abscissa(a: &Matrix) -> f64 {
    a.complex_eigenvalues().iter().map(|l| l.re).fold(f64::NEG_INFINITY, f64::max)
}

/// Random matrix shifted so that every eigenvalue has real part at most
/// `-margin`.
pub fn random_hurwitz(rng: &mut Stream, n: usize, scale: f64, margin: f64) -> Matrix {
    let r = random_matrix(rng, n, n, scale);
    let shift = spectral_abscissa(&r) + margin;
    r - Matrix::identity(n, n) * shift.max(0.0)
}

pub struct RandomLoop {
    pub plant: LtiPlant,
    pub k: Matrix,
}

/// Random plant with an invertible input matrix and a gain placing the
/// closed loop at a random Hurwitz matrix.
pub fn random_loop(rng: &mut Stream, n: usize) -> RandomLoop {
    loop {
        let a = random_matrix(rng, n, n, 1.0);
        let b = random_matrix(rng, n, n, 1.0) + Matrix::identity(n, n) * 1.5;
        let Some(b_inv) = b.clone().try_inverse() else { continue };
        if b.singular_values().min() < 0.2 {
            continue;
        }
        let phi = random_hurwitz(rng, n, 1.0, 0.5);
        let k = b_inv * (phi - &a);
        return RandomLoop {
            plant: LtiPlant::new(a, b).expect("invertible B makes every pair stabilizable"),
            k,
        };
    }
}

/// Random plant of any input width with a random gain, built backwards
/// from a Hurwitz closed loop: `A = Φ − BK`.
pub fn random_stabilized(rng: &mut Stream, n: usize, m: usize) -> RandomLoop {
    let phi = random_hurwitz(rng, n, 1.0, 0.3);
    let b = random_matrix(rng, n, m, 1.0);
    let k = random_matrix(rng, m, n, 1.0);
    let a = phi - &b * &k;
    RandomLoop {
        plant: LtiPlant::new(a, b).expect("a stabilizing gain exists by construction"),
        k,
    }
}

/// `e^{At}` by a truncated Taylor series on `At/2^s` followed by `s`
/// squarings. Slow but independent of the Padé implementation.
pub fn taylor_expm(a: &Matrix, t: f64) -> Matrix {
    let n = a.nrows();
    let at = a * t;
    let norm = at.iter().map(|v| v.abs()).sum::<f64>();
    let mut s = 0;
    while norm / 2f64.powi(s) > 0.25 {
        s += 1;
    }
    let x = at / 2f64.powi(s);
    let mut term = Matrix::identity(n, n);
    let mut sum = term.clone();
    for k in 1..30 {
        term = &term * &x / k as f64;
        sum += &term;
    }
    for _ in 0..s {
        sum = &sum * &sum;
    }
    sum
}

/// `∫₀^δ e^{Aτ}B dτ` by composite Simpson with `intervals` (even) panels.
pub fn simpson_input_integral(a: &Matrix, b: &Matrix, delta: f64, intervals: usize) -> Matrix {
    let h = delta / intervals as f64;
    let mut acc = Matrix::zeros(b.nrows(), b.ncols());
    for i in 0..=intervals {
        let w = if i == 0 || i == intervals {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        acc += taylor_expm(a, i as f64 * h) * b * w;
    }
    acc * (h / 3.0)
}

/// DoS signal over `[0, horizon]` whose bursts never block more than
/// `max_blocked` consecutive attempts of the period-`delta_big` grid.
/// Bursts start and end strictly between attempt instants.
pub fn gap_limited_dos(rng: &mut Stream, delta_big: f64, horizon: f64, max_blocked: usize) -> DosSignal {
    let attempts = (horizon / delta_big).floor() as usize;
    let mut intervals = Vec::new();
    let mut k = 1;
    while k < attempts {
        let free = 1 + (rng.unit() * 4.0) as usize;
        k += free;
        if max_blocked == 0 || k >= attempts {
            break;
        }
        let blocked = 1 + (rng.unit() * max_blocked as f64) as usize;
        let blocked = blocked.min(max_blocked).min(attempts - k);
        let start = (k as f64 - 0.5) * delta_big;
        let end = (k + blocked - 1) as f64 * delta_big + 0.5 * delta_big;
        intervals.push((start, (end - start).min(horizon - start)));
        k += blocked;
    }
    DosSignal::new(horizon, intervals).expect("intervals lie inside the horizon")
}
