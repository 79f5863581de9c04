//! Scans DoS and noise seeds for the reproduction of the reference
//! example and prints the candidates that meet every target: fitted load
//! and failure fraction in range, and the three expected verdicts.
//!
//! The chosen pair is recorded as `repro::DOS_SEED` / `repro::NOISE_SEED`.
//!
//! ```text
//! cargo run --release --example select_seeds -- [max_seed]
//! ```

use dosctrl::commands::{experiment_class, run};
use dosctrl::config::DosSource;
use dosctrl::dos::successful_transmissions;
use dosctrl::repro::{self, DELTA_BIG, FAILURE_RANGE, HORIZON, LOAD_RANGE};
use dosctrl::sim::Architecture;

/// Interval count and jammed time of the reported signal.
const TARGET_N: f64 = HORIZON / repro::reported::TAU_D;
const TARGET_MEASURE: f64 = HORIZON / repro::reported::T;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let max_seed: u64 = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(200);
    let mut best: Option<(f64, u64)> = None;
    println!("seed      n   |Xi|    load  failure  co-loc  h=1     h=5");
    for seed in 0..max_seed {
        let mut cfg = repro::config(Architecture::Remote, 5);
        cfg.dos = DosSource::Generator {
            off: repro::GENERATOR.off,
            on: repro::GENERATOR.on,
            seed,
        };
        if let Some(noise) = &mut cfg.noise {
            noise.seed = seed;
        }
        let exp = cfg.resolve(None)?;
        let (class, _) = experiment_class(&exp)?;
        let load = class.load(DELTA_BIG, 1);
        let failure = successful_transmissions(&exp.dos, DELTA_BIG, HORIZON)?.failure_fraction();
        let inside = |v: f64, [lo, hi]: [f64; 2]| (lo..=hi).contains(&v);
        if !(inside(load, LOAD_RANGE) && inside(failure, FAILURE_RANGE)) {
            continue;
        }
        let mut verdicts = Vec::new();
        for (_, mode, h, _) in repro::scenarios() {
            let mut e = exp.clone();
            e.sim.mode = mode;
            e.sim.h = h;
            verdicts.push(run(&e)?.1.stable_verdict);
        }
        let expected: Vec<bool> = repro::scenarios().iter().map(|s| s.3).collect();
        let n = exp.dos.intervals().len();
        let measure = exp.dos.total_measure();
        let word = |b: bool| if b { "stable" } else { "unstable" };
        println!(
            "{seed:<6} {n:>4} {measure:>7.3} {load:>7.4} {failure:>8.3}  {:<7} {:<7} {:<7}",
            word(verdicts[0]),
            word(verdicts[1]),
            word(verdicts[2])
        );
        if verdicts == expected {
            let score = (n as f64 - TARGET_N).abs() / TARGET_N + (measure - TARGET_MEASURE).abs() / TARGET_MEASURE;
            if best.is_none_or(|(s, _)| score < s) {
                best = Some((score, seed));
            }
        }
    }
    match best {
        Some((score, seed)) => println!("closest to n = {TARGET_N:.1}, |Xi| = {TARGET_MEASURE:.2}: seed {seed} (score {score:.4})"),
        None => println!("no seed below {max_seed} meets every target"),
    }
    Ok(())
}
