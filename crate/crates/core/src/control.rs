//! The two controllers.
//!
//! *Co-located*: the controller sits next to the actuator and runs a model
//! of the plant at period `δ`, reset to the measured state whenever a
//! transmission gets through.
//!
//! *Remote*: on every successful transmission the controller rolls the same
//! model forward `h` steps and ships the resulting inputs as one packet. The
//! actuator replays the packet at period `δ`, holds the last input once the
//! packet runs out, and drops whatever is left when a newer packet arrives.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{zoh_discretize, Matrix, Vector};
use crate::plant::LtiPlant;

/// Slack applied when mapping a time to its `δ` slot.
const SLOT_SLACK: f64 = 1e-9;

/// Gain plus the zero-order-hold model both controllers predict with.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteModel {
    pub k: Matrix,
    pub a_delta: Matrix,
    pub b_delta: Matrix,
    pub delta: f64,
}

impl DiscreteModel {
    pub fn new(plant: &LtiPlant, k: &Matrix, delta: f64) -> Result<Self> {
        plant.check_gain(k)?;
        let (a_delta, b_delta) = zoh_discretize(plant.a(), plant.b(), delta)?;
        Ok(Self {
            k: k.clone(),
            a_delta,
            b_delta,
            delta,
        })
    }

    pub fn n(&self) -> usize {
        self.a_delta.nrows()
    }

    pub fn m(&self) -> usize {
        self.b_delta.ncols()
    }

    fn check_state(&self, v: &Vector, what: &str) -> Result<()> {
        if v.len() != self.n() {
            return Err(Error::Dimension(format!(
                "{what} has length {}, expected {}",
                v.len(),
                self.n()
            )));
        }
        Ok(())
    }

    /// One model step under `u = Kα`: returns `(u, A_δα + B_δu)`.
    fn advance(&self, alpha: &Vector) -> (Vector, Vector) {
        let u = &self.k * alpha;
        let next = &self.a_delta * alpha + &self.b_delta * &u;
        (u, next)
    }
}

/// Internal state of the co-located predictor.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictorState {
    pub xi: Vector,
    pub step: usize,
}

impl PredictorState {
    /// `ξ(0) = 0`.
    pub fn new(n: usize) -> Self {
        Self {
            xi: Vector::zeros(n),
            step: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ColocatedStep {
    pub state: PredictorState,
    /// Input held on `[qδ, (q+1)δ[`.
    pub u: Vector,
    /// State estimate the input was computed from.
    pub alpha: Vector,
}

/// `α = y` if a measurement arrived at this tick, else `α = ξ`; `u = Kα`;
/// `ξ⁺ = A_δα + B_δu`.
pub fn colocated_step(
    state: &PredictorState,
    model: &DiscreteModel,
    measurement: Option<&Vector>,
) -> Result<ColocatedStep> {
    model.check_state(&state.xi, "predictor state")?;
    let alpha = match measurement {
        Some(y) => {
            model.check_state(y, "measurement")?;
            y.clone()
        }
        None => state.xi.clone(),
    };
    let (u, xi) = model.advance(&alpha);
    Ok(ColocatedStep {
        state: PredictorState {
            xi,
            step: state.step + 1,
        },
        u,
        alpha,
    })
}

/// `h` predicted inputs computed from one measurement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlPacket {
    pub built_at: f64,
    pub controls: Vec<Vec<f64>>,
    pub predictions: Vec<Vec<f64>>,
    /// Leading entries already stale on delivery (computation delay).
    pub skip: usize,
}

impl ControlPacket {
    pub fn len(&self) -> usize {
        self.controls.len()
    }

    pub fn is_empty(&self) -> bool {
        self.controls.is_empty()
    }

    pub fn control(&self, p: usize) -> Vector {
        Vector::from_column_slice(&self.controls[p])
    }

    pub fn prediction(&self, p: usize) -> Vector {
        Vector::from_column_slice(&self.predictions[p])
    }
}

/// `α₀ = y`, `u_p = Kα_p`, `α_{p+1} = A_δα_p + B_δu_p` for `p < h`.
pub fn build_packet(
    y: &Vector,
    model: &DiscreteModel,
    h: usize,
    skip: usize,
    built_at: f64,
) -> Result<ControlPacket> {
    model.check_state(y, "measurement")?;
    if h == 0 {
        return Err(Error::Domain("packet length h must be >= 1".into()));
    }
    if skip >= h {
        return Err(Error::DelayExceedsHorizon { skip, horizon: h });
    }
    let mut controls = Vec::with_capacity(h);
    let mut predictions = Vec::with_capacity(h);
    let mut alpha = y.clone();
    for p in 0..h {
        let (u, next) = model.advance(&alpha);
        controls.push(u.as_slice().to_vec());
        predictions.push(alpha.as_slice().to_vec());
        if p + 1 < h {
            alpha = next;
        }
    }
    Ok(ControlPacket {
        built_at,
        controls,
        predictions,
        skip,
    })
}

/// Actuator-side buffer.
#[derive(Debug, Clone, PartialEq)]
pub struct ActuatorBuffer {
    packet: Option<ControlPacket>,
    armed_since: Option<f64>,
    sampling: f64,
    m: usize,
}

impl ActuatorBuffer {
    pub fn new(m: usize, sampling: f64) -> Result<Self> {
        if !(sampling.is_finite() && sampling > 0.0) {
            return Err(Error::Domain(format!("sampling period must be > 0, got {sampling}")));
        }
        Ok(Self {
            packet: None,
            armed_since: None,
            sampling,
            m,
        })
    }

    pub fn packet(&self) -> Option<&ControlPacket> {
        self.packet.as_ref()
    }

    pub fn armed_since(&self) -> Option<f64> {
        self.armed_since
    }

    /// Replaces the buffer contents unconditionally.
    pub fn deliver(&mut self, packet: ControlPacket, at: f64) -> Result<()> {
        if packet.controls.iter().any(|u| u.len() != self.m) {
            return Err(Error::Dimension(format!(
                "packet inputs must have length {}",
                self.m
            )));
        }
        if let Some(armed) = self.armed_since {
            if at < armed {
                return Err(Error::Ordering { armed, new: at });
            }
        }
        self.packet = Some(packet);
        self.armed_since = Some(at);
        Ok(())
    }

    /// Index of the packet entry applied at `t`, or `None` before the first
    /// packet.
    pub fn slot(&self, t: f64) -> Option<usize> {
        let (packet, armed) = (self.packet.as_ref()?, self.armed_since?);
        let elapsed = ((t - armed) / self.sampling + SLOT_SLACK).floor().max(0.0) as usize;
        Some((packet.skip + elapsed).min(packet.len() - 1))
    }

    /// Input applied at `t`: zero before the first packet, then `u_p` for the
    /// current slot, with the last entry held once the packet is exhausted.
    pub fn output(&self, t: f64) -> Vector {
        match (self.packet.as_ref(), self.slot(t)) {
            (Some(packet), Some(p)) => packet.control(p),
            _ => Vector::zeros(self.m),
        }
    }

    /// Prediction `α_p` behind the current input, if any.
    pub fn prediction(&self, t: f64) -> Option<Vector> {
        Some(self.packet.as_ref()?.prediction(self.slot(t)?))
    }

    /// Entries not yet reached at `t`.
    pub fn depth(&self, t: f64) -> usize {
        match (self.packet.as_ref(), self.slot(t)) {
            (Some(packet), Some(p)) => packet.len() - 1 - p,
            _ => 0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn example_model() -> DiscreteModel {
        let a = Matrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0]);
        let k = Matrix::from_row_slice(2, 2, &[-2.1961, -0.7545, -0.7545, -2.7146]);
        let plant = LtiPlant::new(a, Matrix::identity(2, 2)).unwrap();
        DiscreteModel::new(&plant, &k, 0.1).unwrap()
    }

    #[test]
    fn colocated_equilibrium_and_open_predictor() {
        let model = example_model();
        let s0 = PredictorState::new(2);
        let out = colocated_step(&s0, &model, Some(&Vector::zeros(2))).unwrap();
        assert_eq!(out.u, Vector::zeros(2));
        assert_eq!(out.state.xi, Vector::zeros(2));

        let mut s = s0;
        for _ in 0..20 {
            let out = colocated_step(&s, &model, None).unwrap();
            assert_eq!(out.u, Vector::zeros(2));
            s = out.state;
        }
        assert_eq!(s.step, 20);
    }

    #[test]
    fn colocated_single_step_by_hand() {
        let model = example_model();
        let y = Vector::from_vec(vec![0.3, -0.7]);
        let out = colocated_step(&PredictorState::new(2), &model, Some(&y)).unwrap();
        let d: f64 = 0.1;
        let e = d.exp();
        let ad = Matrix::from_row_slice(2, 2, &[e, d * e, 0.0, e]);
        let bd = Matrix::from_row_slice(2, 2, &[e - 1.0, (d - 1.0) * e + 1.0, 0.0, e - 1.0]);
        let u = &model.k * &y;
        assert_eq!(out.u, u);
        assert!((out.state.xi - (ad * &y + bd * &u)).amax() < 1e-13);
        assert!(colocated_step(&PredictorState::new(3), &model, None).is_err());
    }

    #[test]
    fn packet_base_cases() {
        let model = example_model();
        let p = build_packet(&Vector::zeros(2), &model, 4, 0, 0.0).unwrap();
        assert!(p.controls.iter().flatten().all(|v| *v == 0.0));
        let y = Vector::from_vec(vec![1.0, 0.0]);
        let p = build_packet(&y, &model, 1, 0, 0.0).unwrap();
        assert_eq!(p.len(), 1);
        assert_eq!(p.control(0), &model.k * &y);
        assert!(matches!(
            build_packet(&y, &model, 3, 3, 0.0),
            Err(Error::DelayExceedsHorizon { skip: 3, horizon: 3 })
        ));
    }

    #[test]
    fn packet_controls_match_predictions() {
        let model = example_model();
        let p = build_packet(&Vector::from_vec(vec![1.0, 0.0]), &model, 6, 0, 0.0).unwrap();
        for i in 0..p.len() {
            assert_eq!(p.control(i), &model.k * p.prediction(i));
        }
    }

    #[test]
    fn buffer_replay_and_hold() {
        let model = example_model();
        let mut buf = ActuatorBuffer::new(2, 0.1).unwrap();
        assert_eq!(buf.output(3.0), Vector::zeros(2));
        assert_eq!(buf.depth(3.0), 0);

        let p = build_packet(&Vector::from_vec(vec![1.0, -1.0]), &model, 5, 0, 2.0).unwrap();
        buf.deliver(p.clone(), 2.0).unwrap();
        assert_eq!(buf.output(2.0), p.control(0));
        assert_eq!(buf.output(2.0 + 0.3), p.control(3));
        assert_eq!(buf.output(2.0 + 0.75), p.control(4));
        assert_eq!(buf.depth(2.0), 4);
        assert_eq!(buf.depth(2.75), 0);

        // idempotent redelivery
        let before = buf.clone();
        buf.deliver(p.clone(), 2.0).unwrap();
        assert_eq!(buf, before);

        // receding horizon: newer packet replaces the old one mid-replay
        let q = build_packet(&Vector::from_vec(vec![0.5, 0.5]), &model, 5, 0, 2.2).unwrap();
        buf.deliver(q.clone(), 2.2).unwrap();
        assert_eq!(buf.output(2.2), q.control(0));

        assert!(matches!(buf.deliver(p, 2.0), Err(Error::Ordering { .. })));
    }

    #[test]
    fn skip_offsets_the_first_slot() {
        let model = example_model();
        let p = build_packet(&Vector::from_vec(vec![1.0, 2.0]), &model, 5, 2, 1.0).unwrap();
        let mut buf = ActuatorBuffer::new(2, 0.1).unwrap();
        buf.deliver(p.clone(), 1.2).unwrap();
        assert_eq!(buf.output(1.2), p.control(2));
        assert_eq!(buf.output(1.3), p.control(3));
        assert_relative_eq!(buf.output(5.0)[0], p.control(4)[0]);
    }
}
