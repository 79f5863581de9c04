//! Denial-of-service signals and the frequency/duration attack class.
//!
//! A signal is a finite list of DoS intervals `H_n = {h_n} ∪ [h_n, h_n + τ_n[`
//! on `[0, horizon]`. The left endpoint is always jammed (so a zero-length
//! interval is a pulse that blocks exactly one instant) and the right
//! endpoint is free. Past the horizon the channel is free.
//!
//! The attack class is the pair of averaged constraints
//!
//! ```text
//! n(τ, t)   ≤ η + (t − τ)/τ_D        (frequency)
//! |Ξ(τ, t)| ≤ κ + (t − τ)/T          (duration)
//! ```
//!
//! with `n` the number of off/on transitions in `[τ, t[` and `|Ξ|` the jammed
//! measure of `[τ, t]`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{ids, Stream};

/// Time comparisons in the successful-transmission checks are made with
/// this slack.
pub const LEMMA1_TIME_TOL: f64 = 1e-9;

/// Relative slack used when laying the attempt grid `kΔ` over a horizon.
const GRID_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DosInterval {
    pub start: f64,
    pub duration: f64,
}

impl DosInterval {
    pub fn end(&self) -> f64 {
        self.start + self.duration
    }

    pub fn contains(&self, t: f64) -> bool {
        t == self.start || (self.start <= t && t < self.end())
    }
}

/// Canonical DoS signal: intervals sorted by start, overlapping intervals
/// merged, all contained in `[0, horizon]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SignalFile", into = "SignalFile")]
pub struct DosSignal {
    horizon: f64,
    intervals: Vec<DosInterval>,
}

/// On-disk form: `{"horizon": s, "intervals": [[h, tau], ...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SignalFile {
    horizon: f64,
    intervals: Vec<[f64; 2]>,
}

impl TryFrom<SignalFile> for DosSignal {
    type Error = Error;

    fn try_from(f: SignalFile) -> Result<Self> {
        DosSignal::new(f.horizon, f.intervals.iter().map(|[h, tau]| (*h, *tau)))
    }
}

impl From<DosSignal> for SignalFile {
    fn from(s: DosSignal) -> Self {
        SignalFile {
            horizon: s.horizon,
            intervals: s.intervals.iter().map(|i| [i.start, i.duration]).collect(),
        }
    }
}

impl DosSignal {
    pub fn new(horizon: f64, intervals: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::Domain(format!("horizon must be > 0, got {horizon}")));
        }
        let mut raw = Vec::new();
        for (start, duration) in intervals {
            if !(start.is_finite() && duration.is_finite()) || start < 0.0 || duration < 0.0 {
                return Err(Error::Domain(format!(
                    "DoS interval ({start}, {duration}) must have finite nonnegative start and length"
                )));
            }
            if start + duration > horizon {
                return Err(Error::Domain(format!(
                    "DoS interval ({start}, {duration}) extends past the horizon {horizon}"
                )));
            }
            raw.push(DosInterval { start, duration });
        }
        raw.sort_by(|a, b| a.start.total_cmp(&b.start));

        let mut merged: Vec<DosInterval> = Vec::with_capacity(raw.len());
        for iv in raw {
            match merged.last_mut() {
                Some(last) if iv.start == last.start || iv.start < last.end() => {
                    let end = last.end().max(iv.end());
                    last.duration = end - last.start;
                }
                _ => merged.push(iv),
            }
        }
        Ok(Self {
            horizon,
            intervals: merged,
        })
    }

    /// A signal with no DoS.
    pub fn quiet(horizon: f64) -> Result<Self> {
        Self::new(horizon, std::iter::empty())
    }

    /// Pulses `(kΔ, 0)` on every attempt instant up to the horizon: jams the
    /// whole period-Δ schedule while having zero measure.
    pub fn pulse_train(delta_big: f64, horizon: f64) -> Result<Self> {
        if !(delta_big.is_finite() && delta_big > 0.0) {
            return Err(Error::Domain(format!("pulse period must be > 0, got {delta_big}")));
        }
        let count = grid_len(delta_big, horizon);
        Self::new(
            horizon,
            (0..count)
                .map(|k| ((k as f64 * delta_big).min(horizon), 0.0)),
        )
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn intervals(&self) -> &[DosInterval] {
        &self.intervals
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    /// DoS status at `t`, without range checks; false outside `[0, horizon]`.
    pub fn contains(&self, t: f64) -> bool {
        let idx = self.intervals.partition_point(|iv| iv.start <= t);
        idx > 0 && self.intervals[idx - 1].contains(t)
    }

    pub fn active_at(&self, t: f64) -> Result<bool> {
        self.check_time(t)?;
        Ok(self.contains(t))
    }

    /// Number of off/on transitions `h_n ∈ [τ, t[`.
    pub fn transitions_count(&self, tau: f64, t: f64) -> Result<usize> {
        self.check_window(tau, t)?;
        let lo = self.intervals.partition_point(|iv| iv.start < tau);
        let hi = self.intervals.partition_point(|iv| iv.start < t);
        Ok(hi - lo)
    }

    /// Lebesgue measure of the jammed part of `[τ, t]`.
    pub fn dos_measure(&self, tau: f64, t: f64) -> Result<f64> {
        self.check_window(tau, t)?;
        Ok(self.measure_unchecked(tau, t))
    }

    fn measure_unchecked(&self, tau: f64, t: f64) -> f64 {
        let first = self.intervals.partition_point(|iv| iv.end() <= tau);
        self.intervals[first..]
            .iter()
            .take_while(|iv| iv.start < t)
            .map(|iv| (iv.end().min(t) - iv.start.max(tau)).max(0.0))
            .sum()
    }

    pub fn total_measure(&self) -> f64 {
        self.intervals.iter().map(|iv| iv.duration).sum()
    }

    /// Averaged rates over the whole horizon: `τ_D = horizon / n(0, horizon)`
    /// and `T = horizon / |Ξ(0, horizon)|`, infinite when the count or the
    /// measure is zero.
    pub fn average_rates(&self) -> (f64, f64) {
        let n = self.intervals.len() as f64;
        let xi = self.total_measure();
        let tau_d = if n > 0.0 { self.horizon / n } else { f64::INFINITY };
        let t_ratio = if xi > 0.0 { self.horizon / xi } else { f64::INFINITY };
        (tau_d, t_ratio)
    }

    fn check_time(&self, t: f64) -> Result<()> {
        if t.is_finite() && (0.0..=self.horizon).contains(&t) {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "time {t} outside the signal horizon [0, {}]",
                self.horizon
            )))
        }
    }

    fn check_window(&self, tau: f64, t: f64) -> Result<()> {
        self.check_time(tau)?;
        self.check_time(t)?;
        if tau > t {
            return Err(Error::Domain(format!("reversed window [{tau}, {t}]")));
        }
        Ok(())
    }
}

/// Frequency/duration class constants `(η, τ_D, κ, T)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DosClassParams {
    pub eta: f64,
    #[serde(rename = "tau_D")]
    pub tau_d: f64,
    pub kappa: f64,
    /// `T > 1`; the long-run jammed fraction of time is at most `1/T`.
    /// May be infinite.
    #[serde(rename = "T")]
    pub t_ratio: f64,
}

impl DosClassParams {
    pub fn new(eta: f64, tau_d: f64, kappa: f64, t_ratio: f64) -> Result<Self> {
        let p = Self {
            eta,
            tau_d,
            kappa,
            t_ratio,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eta.is_finite() && self.eta >= 0.0) {
            return Err(Error::Domain(format!("eta must be finite and >= 0, got {}", self.eta)));
        }
        if !(self.kappa.is_finite() && self.kappa >= 0.0) {
            return Err(Error::Domain(format!(
                "kappa must be finite and >= 0, got {}",
                self.kappa
            )));
        }
        if !(self.tau_d > 0.0) {
            return Err(Error::Domain(format!("tau_D must be > 0, got {}", self.tau_d)));
        }
        if !(self.t_ratio > 1.0) {
            return Err(Error::Domain(format!("T must be > 1, got {}", self.t_ratio)));
        }
        Ok(())
    }

    /// `1/T + μΔ/τ_D`.
    pub fn load(&self, delta_big: f64, mu: u32) -> f64 {
        1.0 / self.t_ratio + f64::from(mu) * delta_big / self.tau_d
    }
}

/// Smallest `(η, κ)` for which a signal belongs to the class with the given
/// `(τ_D, T)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassFit {
    pub eta: f64,
    pub kappa: f64,
}

/// Exact minimal `η` and `κ` for the given `τ_D` and `T`.
///
/// Windows may extend past the horizon, where the signal is free, so the
/// result certifies the signal on all of `[0, ∞)`. The frequency excess
/// `n(τ, t) − (t − τ)/τ_D` is maximised with `τ` at some `h_i` and `t` just
/// past some `h_j`; the duration excess with `τ = h_i` and `t = h_j + τ_j`.
/// Both are running-minimum scans, linear in the number of intervals.
pub fn fit_class_params(signal: &DosSignal, tau_d: f64, t_ratio: f64) -> Result<ClassFit> {
    if !(tau_d > 0.0) {
        return Err(Error::Domain(format!("tau_D must be > 0, got {tau_d}")));
    }
    if !(t_ratio > 1.0) {
        return Err(Error::Domain(format!("T must be > 1, got {t_ratio}")));
    }
    let inv_t = 1.0 / t_ratio;

    let mut eta: f64 = 0.0;
    let mut kappa: f64 = 0.0;
    let mut min_freq = f64::INFINITY;
    let mut min_dur = f64::INFINITY;
    let mut prefix = 0.0;
    for (j, iv) in signal.intervals.iter().enumerate() {
        let key = j as f64 - iv.start / tau_d;
        min_freq = min_freq.min(key);
        eta = eta.max(1.0 + key - min_freq);

        min_dur = min_dur.min(prefix - iv.start * inv_t);
        prefix += iv.duration;
        kappa = kappa.max(prefix - iv.end() * inv_t - min_dur);
    }
    Ok(ClassFit { eta, kappa })
}

/// Class constants certified for one realized signal: `τ_D` and `T` from its
/// average rates over the horizon, then the minimal `η` and `κ` for them.
pub fn fit_from_average_rates(signal: &DosSignal) -> Result<DosClassParams> {
    let (tau_d, t_ratio) = signal.average_rates();
    if !(t_ratio > 1.0) {
        return Err(Error::InfeasibleClass { ratio: 1.0 / t_ratio });
    }
    let fit = fit_class_params(signal, tau_d, t_ratio)?;
    DosClassParams::new(fit.eta, tau_d, fit.kappa, t_ratio)
}

/// Alternating off/on generator: off-times and on-times are drawn uniformly
/// from their ranges, starting with an off period at `t = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSpec {
    pub off: [f64; 2],
    pub on: [f64; 2],
}

impl GeneratorSpec {
    pub fn validate(&self) -> Result<()> {
        for (name, [lo, hi]) in [("off", self.off), ("on", self.on)] {
            if !(lo.is_finite() && hi.is_finite() && lo >= 0.0 && hi >= lo) {
                return Err(Error::Domain(format!(
                    "{name}-time range [{lo}, {hi}] must satisfy 0 <= lo <= hi"
                )));
            }
        }
        if self.off[1] + self.on[1] <= 0.0 {
            return Err(Error::Domain(
                "off and on ranges cannot both be identically zero".into(),
            ));
        }
        Ok(())
    }
}

/// Draws a signal on `[0, horizon]`. The last on-period is clipped at the
/// horizon. The same `(seed, spec, horizon)` always yields the same signal.
pub fn generate(seed: u64, spec: &GeneratorSpec, horizon: f64) -> Result<DosSignal> {
    spec.validate()?;
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(Error::Domain(format!("horizon must be > 0, got {horizon}")));
    }
    let mut rng = Stream::new(seed, ids::DOS);
    let mut intervals = Vec::new();
    let mut t = 0.0;
    loop {
        t += rng.uniform(spec.off[0], spec.off[1]);
        if t >= horizon {
            break;
        }
        let on = rng.uniform(spec.on[0], spec.on[1]).min(horizon - t);
        intervals.push((t, on));
        t += on;
    }
    DosSignal::new(horizon, intervals)
}

/// Outcome of the periodic transmission attempts `t_k = kΔ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransmissionSchedule {
    pub delta_big: f64,
    /// One flag per attempt `k = 0, 1, ...`; true when the attempt succeeded.
    pub outcomes: Vec<bool>,
    /// Successful transmission times `z_m`.
    pub successes: Vec<f64>,
}

impl TransmissionSchedule {
    pub fn attempts(&self) -> usize {
        self.outcomes.len()
    }

    pub fn failure_fraction(&self) -> f64 {
        if self.outcomes.is_empty() {
            return 0.0;
        }
        1.0 - self.successes.len() as f64 / self.outcomes.len() as f64
    }
}

pub(crate) fn grid_len(step: f64, horizon: f64) -> usize {
    (horizon / step + GRID_SLACK).floor() as usize + 1
}

/// Attempts at `kΔ ≤ horizon` succeed unless the signal is active there.
pub fn successful_transmissions(
    signal: &DosSignal,
    delta_big: f64,
    horizon: f64,
) -> Result<TransmissionSchedule> {
    if !(delta_big.is_finite() && delta_big > 0.0) {
        return Err(Error::Domain(format!("transmission period must be > 0, got {delta_big}")));
    }
    if !(horizon.is_finite() && horizon >= 0.0) {
        return Err(Error::Domain(format!("horizon must be >= 0, got {horizon}")));
    }
    let n = grid_len(delta_big, horizon);
    let mut outcomes = Vec::with_capacity(n);
    let mut successes = Vec::new();
    for k in 0..n {
        let t = k as f64 * delta_big;
        let ok = !signal.contains(t);
        outcomes.push(ok);
        if ok {
            successes.push(t);
        }
    }
    Ok(TransmissionSchedule {
        delta_big,
        outcomes,
        successes,
    })
}

/// `Q_μ = (κ + ημΔ) / (1 − 1/T − μΔ/τ_D)`; `μ = 1` is the plain bound on
/// the first success time and on inter-success gaps beyond `Δ`.
pub fn compute_q(params: &DosClassParams, delta_big: f64, mu: u32) -> Result<f64> {
    params.validate()?;
    if !(delta_big.is_finite() && delta_big > 0.0) {
        return Err(Error::Domain(format!("transmission period must be > 0, got {delta_big}")));
    }
    if mu == 0 {
        return Err(Error::Domain("mu must be >= 1".into()));
    }
    let load = params.load(delta_big, mu);
    if load >= 1.0 {
        return Err(Error::InfeasibleClass { ratio: load });
    }
    let mu = f64::from(mu);
    Ok((params.kappa + params.eta * mu * delta_big) / (1.0 - load))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lemma1Verdict {
    /// First successful transmission, `None` if there was none up to the
    /// horizon.
    pub z0: Option<f64>,
    /// Largest gap between consecutive successes (`Δ` when fewer than two).
    pub max_gap: f64,
    /// Time from the last success to the horizon; a lower bound on the next
    /// gap.
    pub tail: f64,
    pub q: f64,
    pub q_plus_delta: f64,
    pub z0_ok: bool,
    pub gap_ok: bool,
}

impl Lemma1Verdict {
    pub fn holds(&self) -> bool {
        self.z0_ok && self.gap_ok
    }
}

/// Checks `z₀ ≤ Q` and `z_{m+1} − z_m ≤ Q + Δ` on the realized schedule.
/// A censored tail longer than `Q + Δ`, or no success at all by a horizon
/// beyond `Q`, also counts as a violation.
pub fn check_lemma1(
    signal: &DosSignal,
    delta_big: f64,
    params: &DosClassParams,
    horizon: f64,
) -> Result<Lemma1Verdict> {
    let q = compute_q(params, delta_big, 1)?;
    let sched = successful_transmissions(signal, delta_big, horizon)?;
    let z = &sched.successes;
    let tol = LEMMA1_TIME_TOL;

    let max_gap = if z.len() >= 2 {
        z.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
    } else {
        delta_big
    };
    let (z0, tail, z0_ok) = match z.first() {
        Some(&z0) => (Some(z0), horizon - z.last().copied().unwrap_or(z0), z0 <= q + tol),
        None => (None, horizon, horizon < q + tol),
    };
    let gap_ok = max_gap <= q + delta_big + tol && tail <= q + delta_big + tol;
    Ok(Lemma1Verdict {
        z0,
        max_gap,
        tail,
        q,
        q_plus_delta: q + delta_big,
        z0_ok,
        gap_ok,
    })
}
