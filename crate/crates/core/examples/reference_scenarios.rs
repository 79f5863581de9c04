//! Reruns the reference example: co-located loop, remote loop without a
//! useful buffer (h = 1) and remote loop with h = 5, all under the same
//! recorded DoS signal and noise. Writes one trace CSV per scenario.
//!
//! ```text
//! cargo run --release --example reference_scenarios -- [out_dir]
//! ```

use std::path::PathBuf;

use dosctrl::commands::{run, write_trace};
use dosctrl::repro;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "reference_traces".into()));
    std::fs::create_dir_all(&out)?;
    for (name, mode, h, expected) in repro::scenarios() {
        let exp = repro::config(mode, h).resolve(None)?;
        let (trace, m) = run(&exp)?;
        let file = out.join(format!("{}.csv", name.replace([' ', '='], "_")));
        write_trace(&trace, &file)?;
        println!(
            "{name:<12} stable={:<5} (expected {expected:<5}) max|x|={:.3e} final|x|={:.3e} failures={:.3} -> {}",
            m.stable_verdict,
            m.max_state_norm,
            m.final_state_norm,
            m.failure_fraction,
            file.display()
        );
    }
    Ok(())
}
