//! Builds one control packet from a measurement and plays it out of the
//! actuator buffer, showing how the last entry is held once the buffer runs
//! dry.
//!
//! ```text
//! cargo run --example packet_buffer -- [h]
//! ```

use dosctrl::control::{build_packet, ActuatorBuffer, DiscreteModel};
use dosctrl::matrix::Vector;
use dosctrl::repro;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let h: usize = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(5);
    let delta = 0.1;
    let model = DiscreteModel::new(&repro::plant(), &repro::gain(), delta)?;
    let y = Vector::from_column_slice(&[1.0, -1.0]);
    let packet = build_packet(&y, &model, h, 0, 0.0)?;

    let mut buffer = ActuatorBuffer::new(model.m(), delta)?;
    buffer.deliver(packet, 0.0)?;
    println!("   t    slot depth  u1        u2        prediction");
    for q in 0..h + 3 {
        let t = q as f64 * delta;
        let u = buffer.output(t);
        let alpha = buffer.prediction(t).expect("packet delivered");
        println!(
            "{t:5.2} {:>5} {:>5}  {:>8.4}  {:>8.4}  ({:.4}, {:.4})",
            buffer.slot(t).unwrap(),
            buffer.depth(t),
            u[0],
            u[1],
            alpha[0],
            alpha[1]
        );
    }
    Ok(())
}
