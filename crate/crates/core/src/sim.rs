//! Closed-loop simulation of the plant under either architecture.
//!
//! The plant is integrated exactly on a sub-grid of `δ/substeps`: input and
//! disturbance are held constant over each sub-step, so one zero-order-hold
//! step of `(A, [B I])` advances the state with no integration error.
//! Transmission attempts happen every `Δ = bδ`; an attempt succeeds when the
//! DoS signal is inactive at that instant, and only then is the state
//! measured (with noise).

use std::collections::VecDeque;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::bounds::{DerivedConstants, EnvelopeConstants};
use crate::control::{build_packet, colocated_step, ActuatorBuffer, ControlPacket, DiscreteModel, PredictorState};
use crate::dos::DosSignal;
use crate::error::{Error, Result};
use crate::matrix::{ensure_hurwitz, solve_lyapunov, zoh_discretize, Matrix, Vector};
use crate::rng::{ids, Stream};

pub use crate::plant::LtiPlant;

/// Version tag written into every exported trace and metrics file.
pub const FORMAT_VERSION: u32 = 1;

/// Relative slack for the envelope comparison.
const ENVELOPE_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Architecture {
    Colocated,
    Remote,
    /// Remote controller with a one-entry buffer.
    RemoteNoBuffer,
}

impl std::str::FromStr for Architecture {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "colocated" => Ok(Self::Colocated),
            "remote" => Ok(Self::Remote),
            "remote_no_buffer" => Ok(Self::RemoteNoBuffer),
            other => Err(Error::Config(format!(
                "unknown mode {other:?} (expected colocated, remote or remote_no_buffer)"
            ))),
        }
    }
}

/// Uniform disturbance and measurement noise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSpec {
    pub d_bound: f64,
    pub n_bound: f64,
    pub seed: u64,
    /// Both signals are zero from this time on.
    #[serde(default)]
    pub decay_at: Option<f64>,
}

impl NoiseSpec {
    pub fn none() -> Self {
        Self {
            d_bound: 0.0,
            n_bound: 0.0,
            seed: 0,
            decay_at: None,
        }
    }

    pub fn uniform(bound: f64, seed: u64) -> Self {
        Self {
            d_bound: bound,
            n_bound: bound,
            seed,
            decay_at: None,
        }
    }

    fn validate(&self) -> Result<()> {
        for (name, v) in [("d_bound", self.d_bound), ("n_bound", self.n_bound)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::Domain(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        Ok(())
    }

    fn active(&self, t: f64) -> bool {
        self.decay_at.is_none_or(|d| t < d)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub delta_big: f64,
    /// `δ = Δ/b`.
    pub b: usize,
    pub h: usize,
    pub horizon: f64,
    pub substeps: usize,
    pub mode: Architecture,
    /// Computation time of a packet.
    pub t_c: f64,
    /// Lyapunov weight `M` used for the stored `V = x'Px`; identity if unset.
    pub lyapunov_weight: Option<Matrix>,
}

impl SimConfig {
    pub fn new(delta_big: f64, b: usize, h: usize, horizon: f64, mode: Architecture) -> Self {
        Self {
            delta_big,
            b,
            h,
            horizon,
            substeps: 10,
            mode,
            t_c: 0.0,
            lyapunov_weight: None,
        }
    }

    pub fn delta(&self) -> f64 {
        self.delta_big / self.b as f64
    }

    /// Buffer length actually used by the mode.
    pub fn effective_h(&self) -> usize {
        match self.mode {
            Architecture::RemoteNoBuffer => 1,
            _ => self.h,
        }
    }

    /// `⌈T_c/δ⌉` stale entries per packet.
    pub fn skip(&self) -> usize {
        if self.t_c <= 0.0 {
            0
        } else {
            (self.t_c / self.delta() - 1e-9).ceil() as usize
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta_big.is_finite() && self.delta_big > 0.0) {
            return Err(Error::Domain(format!("Delta must be > 0, got {}", self.delta_big)));
        }
        if self.b == 0 || self.h == 0 || self.substeps == 0 {
            return Err(Error::Domain("b, h and substeps must all be >= 1".into()));
        }
        if !(self.horizon.is_finite() && self.horizon >= self.delta_big) {
            return Err(Error::Domain(format!(
                "horizon {} must be at least Delta = {}",
                self.horizon, self.delta_big
            )));
        }
        if !(self.t_c.is_finite() && self.t_c >= 0.0) {
            return Err(Error::Domain(format!("T_c must be >= 0, got {}", self.t_c)));
        }
        if self.mode != Architecture::Colocated && self.skip() >= self.effective_h() {
            return Err(Error::DelayExceedsHorizon {
                skip: self.skip(),
                horizon: self.effective_h(),
            });
        }
        Ok(())
    }
}

/// Where a trace row sits relative to the last successful transmission.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    BeforeFirstSuccess,
    /// `t ∈ [z_m, z_m + hδ[`: the input comes from a buffered prediction.
    WithinHorizon { m: usize },
    /// `t ≥ z_m + hδ`: the buffer has run dry and holds its last input.
    BeyondHorizon { m: usize },
}

/// Sampled closed-loop run. Row `i` is time `i·δ/substeps`; `u[i]` is the
/// input applied from that row to the next.
#[derive(Debug, Clone, PartialEq)]
pub struct SimTrace {
    pub mode: Architecture,
    pub delta: f64,
    pub delta_big: f64,
    pub substeps: usize,
    pub h: usize,
    pub skip: usize,
    pub times: Vec<f64>,
    pub x: Vec<Vector>,
    pub u: Vec<Vector>,
    /// State estimate behind `u[i]`; `None` while the actuator outputs the
    /// initial zero input.
    pub prediction: Vec<Option<Vector>>,
    pub v: Vec<f64>,
    pub dos_active: Vec<bool>,
    pub attempt: Vec<bool>,
    pub success: Vec<bool>,
    pub buffer_depth: Vec<usize>,
    /// One flag per transmission attempt.
    pub attempts: Vec<bool>,
    /// Successful transmission times and their row indices.
    pub z: Vec<f64>,
    pub z_rows: Vec<usize>,
    pub x0: Vector,
    pub noise_decay_at: Option<f64>,
    /// Upper bound on the realized `sup ‖[d' n']'‖`.
    pub w_inf: f64,
}

impl SimTrace {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn n(&self) -> usize {
        self.x0.len()
    }

    pub fn m(&self) -> usize {
        self.u.first().map_or(0, |u| u.len())
    }

    /// Phase of every row, for zero computation delay.
    pub fn phases(&self) -> Vec<Phase> {
        let span = self.h * self.substeps;
        let mut out = Vec::with_capacity(self.len());
        let mut m: Option<usize> = None;
        for i in 0..self.len() {
            while m.map_or(0, |k| k + 1) < self.z_rows.len() && self.z_rows[m.map_or(0, |k| k + 1)] <= i {
                m = Some(m.map_or(0, |k| k + 1));
            }
            out.push(match m {
                None => Phase::BeforeFirstSuccess,
                Some(k) if i - self.z_rows[k] < span => Phase::WithinHorizon { m: k },
                Some(k) => Phase::BeyondHorizon { m: k },
            });
        }
        out
    }

    /// Row at which the buffer of success `m` runs dry, if inside the trace.
    pub fn horizon_end_row(&self, m: usize) -> Option<usize> {
        let r = self.z_rows[m] + self.h * self.substeps;
        (r < self.len()).then_some(r)
    }
}

/// Runs one closed-loop simulation. Deterministic in all inputs. The
/// closed loop `A + BK` must be Hurwitz, since the stored `V` needs the
/// Lyapunov matrix `P`.
pub fn simulate(
    plant: &LtiPlant,
    k: &Matrix,
    config: &SimConfig,
    dos: &DosSignal,
    noise: &NoiseSpec,
    x0: &Vector,
) -> Result<SimTrace> {
    config.validate()?;
    noise.validate()?;
    plant.check_gain(k)?;
    let n = plant.n();
    let m = plant.m();
    if x0.len() != n {
        return Err(Error::Dimension(format!("x0 has length {}, expected {n}", x0.len())));
    }

    let delta = config.delta();
    let substeps = config.substeps;
    let dt = delta / substeps as f64;
    let model = DiscreteModel::new(plant, k, delta)?;
    let forcing = {
        let mut bg = Matrix::zeros(n, m + n);
        bg.view_mut((0, 0), (n, m)).copy_from(plant.b());
        bg.view_mut((0, m), (n, n)).fill_with_identity();
        bg
    };
    let (a_sub, bg_sub) = zoh_discretize(plant.a(), &forcing, dt)?;
    let b_sub = bg_sub.columns(0, m).into_owned();
    let g_sub = bg_sub.columns(m, n).into_owned();

    let weight = config
        .lyapunov_weight
        .clone()
        .unwrap_or_else(|| Matrix::identity(n, n));
    let phi = plant.closed_loop(k)?;
    ensure_hurwitz(&phi)?;
    let p = solve_lyapunov(&phi, &weight)?;

    let ticks = crate::dos::grid_len(delta, config.horizon) - 1;
    let rows = ticks * substeps + 1;
    let h = config.effective_h();
    let skip = config.skip();

    let mut dist = Stream::new(noise.seed, ids::DISTURBANCE);
    let mut meas = Stream::new(noise.seed, ids::MEASUREMENT_NOISE);
    let mut d_sup: f64 = 0.0;
    let mut n_sup: f64 = 0.0;

    let mut trace = SimTrace {
        mode: config.mode,
        delta,
        delta_big: config.delta_big,
        substeps,
        h,
        skip,
        times: Vec::with_capacity(rows),
        x: Vec::with_capacity(rows),
        u: Vec::with_capacity(rows),
        prediction: Vec::with_capacity(rows),
        v: Vec::with_capacity(rows),
        dos_active: Vec::with_capacity(rows),
        attempt: Vec::with_capacity(rows),
        success: Vec::with_capacity(rows),
        buffer_depth: Vec::with_capacity(rows),
        attempts: Vec::new(),
        z: Vec::new(),
        z_rows: Vec::new(),
        x0: x0.clone(),
        noise_decay_at: noise.decay_at,
        w_inf: 0.0,
    };

    let mut x = x0.clone();
    let mut predictor = PredictorState::new(n);
    let mut buffer = ActuatorBuffer::new(m, delta)?;
    let mut pending: VecDeque<(usize, ControlPacket)> = VecDeque::new();

    for q in 0..=ticks {
        let t = q as f64 * delta;
        let is_attempt = q % config.b == 0;
        let ok = is_attempt && !dos.contains((q / config.b) as f64 * config.delta_big);
        if is_attempt {
            trace.attempts.push(ok);
        }
        let y = ok.then(|| {
            let mut y = x.clone();
            if noise.n_bound > 0.0 && noise.active(t) {
                for v in y.iter_mut() {
                    *v += meas.uniform(-noise.n_bound, noise.n_bound);
                }
                n_sup = n_sup.max((&y - &x).norm());
            }
            y
        });
        if ok {
            trace.z.push(t);
            trace.z_rows.push(q * substeps);
        }

        let (u, alpha, depth) = match config.mode {
            Architecture::Colocated => {
                let step = colocated_step(&predictor, &model, y.as_ref())?;
                predictor = step.state;
                (step.u, Some(step.alpha), 0)
            }
            Architecture::Remote | Architecture::RemoteNoBuffer => {
                if let Some(y) = &y {
                    pending.push_back((q + skip, build_packet(y, &model, h, skip, t)?));
                }
                while pending.front().is_some_and(|(due, _)| *due <= q) {
                    let (due, packet) = pending.pop_front().expect("front checked");
                    let at = due as f64 * delta;
                    if skip == 0 || !dos.contains(at) {
                        buffer.deliver(packet, at)?;
                    }
                }
                (buffer.output(t), buffer.prediction(t), buffer.depth(t))
            }
        };

        let last = q == ticks;
        for s in 0..substeps {
            let ts = t + s as f64 * dt;
            trace.times.push(ts);
            trace.v.push(x.dot(&(&p * &x)));
            trace.x.push(x.clone());
            trace.u.push(u.clone());
            trace.prediction.push(alpha.clone());
            trace.dos_active.push(dos.contains(ts));
            trace.attempt.push(s == 0 && is_attempt);
            trace.success.push(s == 0 && ok);
            trace.buffer_depth.push(depth);
            if last {
                break;
            }
            let mut next = &a_sub * &x + &b_sub * &u;
            if noise.d_bound > 0.0 && noise.active(ts) {
                let d = Vector::from_fn(n, |_, _| dist.uniform(-noise.d_bound, noise.d_bound));
                d_sup = d_sup.max(d.norm());
                next += &g_sub * d;
            }
            x = next;
        }
    }
    trace.w_inf = (d_sup * d_sup + n_sup * n_sup).sqrt();
    Ok(trace)
}

/// `V(t_i) = x(t_i)' P x(t_i)` on the stored grid.
pub fn lyapunov_trace(trace: &SimTrace, p: &Matrix) -> Result<Vec<(f64, f64)>> {
    if !p.is_square() || p.nrows() != trace.n() {
        return Err(Error::Dimension(format!(
            "P is {}x{}, trace state has length {}",
            p.nrows(),
            p.ncols(),
            trace.n()
        )));
    }
    Ok(trace
        .times
        .iter()
        .zip(&trace.x)
        .map(|(t, x)| (*t, x.dot(&(p * x))))
        .collect())
}

/// Checks `V(z_m) ≤ λe^{−β(z_m − z₀)}V(z₀) + 2ζ Σ_{k≤m} L^k` at every success,
/// with `ζ = 2 max{ζ₁, ζ₂} e^{ω₂(Q + Δ − hδ)} w_inf²`.
pub fn check_envelope(
    trace: &SimTrace,
    env: &EnvelopeConstants,
    consts: &DerivedConstants,
    w_inf: f64,
) -> Result<bool> {
    if trace.z_rows.is_empty() {
        return Err(Error::Domain("trace has no successful transmissions".into()));
    }
    if !(w_inf >= trace.w_inf) {
        return Err(Error::Domain(format!(
            "w_inf = {w_inf} is below the realized disturbance/noise bound {}",
            trace.w_inf
        )));
    }
    let p = consts.p_matrix();
    let v_at = |row: usize| {
        let x = &trace.x[row];
        x.dot(&(&p * x))
    };
    let zeta = consts.zeta(env, w_inf);
    let z0 = trace.z[0];
    let v0 = v_at(trace.z_rows[0]);
    let mut geometric = 0.0;
    let mut lk = 1.0;
    for (zm, &row) in trace.z.iter().zip(&trace.z_rows) {
        geometric += lk;
        lk *= env.l;
        let bound = env.lambda * (-env.beta * (zm - z0)).exp() * v0 + 2.0 * zeta * geometric;
        if v_at(row) > bound * (1.0 + ENVELOPE_SLACK) {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimMetrics {
    pub format: u32,
    pub mode: Architecture,
    pub attempts: usize,
    pub successes: usize,
    pub failure_fraction: f64,
    pub max_state_norm: f64,
    pub final_state_norm: f64,
    pub max_gap: f64,
    /// Set by the caller once the envelope has been checked.
    pub envelope_ok: Option<bool>,
    pub divergence_threshold: f64,
    pub stable_verdict: bool,
}

/// `10³ · max(‖x₀‖, 1)`.
pub fn default_divergence_threshold(x0: &Vector) -> f64 {
    1e3 * x0.norm().max(1.0)
}

/// Summary statistics and the stability verdict: bounded below the
/// threshold and, when noise switches off, converged to within
/// `10⁻³·max(‖x₀‖, 1)`.
pub fn metrics(trace: &SimTrace, divergence_threshold: f64) -> Result<SimMetrics> {
    if trace.is_empty() {
        return Err(Error::Domain("empty trace".into()));
    }
    let attempts = trace.attempts.len();
    let successes = trace.z.len();
    let max_state_norm = trace.x.iter().map(|x| x.norm()).fold(0.0, f64::max);
    let final_state_norm = trace.x.last().map_or(0.0, |x| x.norm());
    let max_gap = if successes >= 2 {
        trace.z.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
    } else {
        trace.delta_big
    };
    let bounded = max_state_norm.is_finite() && max_state_norm < divergence_threshold;
    let converged = trace.noise_decay_at.is_none()
        || final_state_norm <= 1e-3 * trace.x0.norm().max(1.0);
    Ok(SimMetrics {
        format: FORMAT_VERSION,
        mode: trace.mode,
        attempts,
        successes,
        failure_fraction: if attempts == 0 {
            0.0
        } else {
            1.0 - successes as f64 / attempts as f64
        },
        max_state_norm,
        final_state_norm,
        max_gap,
        envelope_ok: None,
        divergence_threshold,
        stable_verdict: bounded && converged,
    })
}

/// Writes `# format: 1` followed by
/// `t,x1..xn,u1..um,V,dos_active,attempt,success,buffer_depth`.
pub fn write_trace_csv<W: Write>(trace: &SimTrace, mut out: W) -> std::io::Result<()> {
    writeln!(out, "# format: {FORMAT_VERSION}")?;
    let mut header = vec!["t".to_string()];
    header.extend((1..=trace.n()).map(|i| format!("x{i}")));
    header.extend((1..=trace.m()).map(|i| format!("u{i}")));
    header.extend(["V", "dos_active", "attempt", "success", "buffer_depth"].map(String::from));
    writeln!(out, "{}", header.join(","))?;
    for i in 0..trace.len() {
        let mut row = vec![trace.times[i].to_string()];
        row.extend(trace.x[i].iter().map(|v| v.to_string()));
        row.extend(trace.u[i].iter().map(|v| v.to_string()));
        row.push(trace.v[i].to_string());
        row.push(u8::from(trace.dos_active[i]).to_string());
        row.push(u8::from(trace.attempt[i]).to_string());
        row.push(u8::from(trace.success[i]).to_string());
        row.push(trace.buffer_depth[i].to_string());
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}
