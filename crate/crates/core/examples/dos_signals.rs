//! Generates a DoS signal, fits the tightest class parameters for its
//! average rates, and checks the transmission gaps those parameters promise
//! against the realized schedule.
//!
//! ```text
//! cargo run --example dos_signals -- [seed]
//! ```

use dosctrl::dos::{check_lemma1, compute_q, fit_from_average_rates, generate, successful_transmissions};
use dosctrl::repro::{DELTA_BIG, GENERATOR, HORIZON};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let seed: u64 = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(206);
    let signal = generate(seed, &GENERATOR, HORIZON)?;
    println!("seed {seed}: {} intervals, {:.3} s jammed over {HORIZON} s", signal.intervals().len(), signal.total_measure());
    for iv in signal.intervals().iter().take(5) {
        println!("  [{:.3}, {:.3})", iv.start, iv.end());
    }

    let (tau_d, t_ratio) = signal.average_rates();
    println!("average rates: tau_D = {tau_d:.4}, T = {t_ratio:.4}");
    let class = fit_from_average_rates(&signal)?;
    println!("fitted class: eta = {:.4}, kappa = {:.4}", class.eta, class.kappa);
    println!("load 1/T + Delta/tau_D = {:.4}", class.load(DELTA_BIG, 1));
    println!("Q = {:.4}", compute_q(&class, DELTA_BIG, 1)?);

    let sched = successful_transmissions(&signal, DELTA_BIG, HORIZON)?;
    println!(
        "{} attempts, {} delivered, failure fraction {:.3}",
        sched.attempts(),
        sched.successes.len(),
        sched.failure_fraction()
    );
    let verdict = check_lemma1(&signal, DELTA_BIG, &class, HORIZON)?;
    println!(
        "first success {:?} <= Q: {}; largest gap {:.3} <= Q + Delta = {:.3}: {}",
        verdict.z0, verdict.z0_ok, verdict.max_gap, verdict.q_plus_delta, verdict.gap_ok
    );
    Ok(())
}
