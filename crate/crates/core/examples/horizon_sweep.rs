//! Sweeps the buffer length on the recorded DoS signal and compares the
//! simulated verdict with the sufficient horizon condition.
//!
//! ```text
//! cargo run --release --example horizon_sweep -- [max_h]
//! ```

use dosctrl::commands::{bounds, run};
use dosctrl::repro;
use dosctrl::sim::Architecture;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let max_h: usize = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(12);
    let base = repro::config(Architecture::Remote, 1).resolve(None)?;
    let h_min = bounds(&base)?.h_min;
    println!("sufficient condition needs h >= {h_min}");
    println!("  h  stable  max|x|      final|x|    envelope");
    for h in 1..=max_h {
        let mut exp = base.clone();
        exp.sim.h = h;
        let (_, m) = run(&exp)?;
        let env = m.envelope_ok.map_or("-".to_string(), |ok| ok.to_string());
        println!("{h:>3}  {:<6}  {:<10.3e}  {:<10.3e}  {env}", m.stable_verdict, m.max_state_norm, m.final_state_norm);
    }
    Ok(())
}
