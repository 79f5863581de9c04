//! Library side of the command-line tool. Each subcommand is a function
//! returning a serializable report; the binary only parses arguments,
//! prints, and maps errors to exit codes.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bounds::{
    decay_envelope, delta_max, derive_constants, gap_rhs_for_rates, min_prediction_horizon, provenance,
    DerivedConstants, EnvelopeConstants, REPORT_SIGMA_FRACTION,
};
use crate::config::Experiment;
use crate::dos::{
    check_lemma1, compute_q, fit_class_params, fit_from_average_rates, successful_transmissions, ClassFit,
    DosClassParams, DosSignal, Lemma1Verdict,
};
use crate::error::{Error, Result};
use crate::sim::{
    check_envelope, default_divergence_threshold, metrics, simulate, write_trace_csv, Architecture, SimMetrics,
    SimTrace, FORMAT_VERSION,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;
pub const EXIT_UNSTABLE: i32 = 3;

pub fn exit_code(err: &Error) -> i32 {
    if err.is_infeasibility() {
        EXIT_INFEASIBLE
    } else {
        EXIT_USAGE
    }
}

/// Machine-readable error record printed on stderr.
#[derive(Debug, Clone, Serialize)]
pub struct ErrorReport {
    pub error: &'static str,
    pub message: String,
}

impl From<&Error> for ErrorReport {
    fn from(e: &Error) -> Self {
        let error = match e {
            Error::Dimension(_) => "dimension",
            Error::Domain(_) => "domain",
            Error::NotHurwitz { .. } => "not_hurwitz",
            Error::NotStabilizable { .. } => "not_stabilizable",
            Error::InfeasibleSigma { .. } => "infeasible_sigma",
            Error::InfeasibleClass { .. } => "infeasible_class",
            Error::HorizonTooShort(_) => "horizon_too_short",
            Error::DelayExceedsHorizon { .. } => "delay_exceeds_horizon",
            Error::Ordering { .. } => "ordering",
            Error::Config(_) => "config",
            Error::Io { .. } => "io",
        };
        ErrorReport {
            error,
            message: e.to_string(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassSource {
    Config,
    /// `τ_D`, `T` from average rates, minimal `η`, `κ` for those.
    Fitted,
}

/// Class constants of an experiment, taken from the config or fitted to
/// its signal.
pub fn experiment_class(exp: &Experiment) -> Result<(DosClassParams, ClassSource)> {
    match exp.class {
        Some(c) => Ok((c, ClassSource::Config)),
        None => Ok((fit_from_average_rates(&exp.dos)?, ClassSource::Fitted)),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundsReport {
    pub format: u32,
    pub sigma_fraction: f64,
    #[serde(flatten)]
    pub constants: DerivedConstants,
    /// Largest admissible `δ` as `σ → γ₁/γ₂`.
    pub delta_max: f64,
    /// Largest admissible `δ` at the configured `σ`.
    pub delta_max_at_sigma: f64,
    pub sampling_ok: bool,
    pub class: DosClassParams,
    pub class_source: ClassSource,
    #[serde(rename = "Delta")]
    pub delta_big: f64,
    /// `1/T + Δ/τ_D`.
    pub load: f64,
    #[serde(rename = "Q")]
    pub q: f64,
    pub h_min: usize,
    pub horizon_ok: bool,
    /// `None` when the horizon is too short for the gap form to be defined.
    pub gap_rhs: Option<f64>,
    pub beta: Option<f64>,
    pub lambda: Option<f64>,
    #[serde(rename = "L")]
    pub l: Option<f64>,
    pub provenance: BTreeMap<&'static str, &'static str>,
}

impl BoundsReport {
    pub fn envelope(&self) -> Option<EnvelopeConstants> {
        Some(EnvelopeConstants {
            beta: self.beta?,
            lambda: self.lambda?,
            l: self.l?,
            q: self.q,
            delta_big: self.delta_big,
        })
    }
}

fn soft<T>(r: Result<T>) -> Result<Option<T>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(Error::HorizonTooShort(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Derived constants and every bound for the experiment's buffer and
/// network settings.
pub fn bounds(exp: &Experiment) -> Result<BoundsReport> {
    let design = exp.design()?;
    let delta = exp.sim.delta();
    let delta_big = exp.sim.delta_big;
    let h = exp.sim.h;
    let constants = derive_constants(&design, h, delta)?;
    let sup_sigma = {
        let mut d = design.clone();
        d.sigma_fraction = REPORT_SIGMA_FRACTION;
        derive_constants(&d, h, delta)?.sigma
    };
    let (class, class_source) = experiment_class(exp)?;
    let q = compute_q(&class, delta_big, 1)?;
    let h_min = min_prediction_horizon(&constants, q, delta_big, delta)?;
    let gap_rhs = soft(gap_rhs_for_rates(
        constants.omega1,
        constants.omega2,
        h,
        delta,
        delta_big,
        class.kappa,
        class.eta,
    ))?;
    let env = soft(decay_envelope(&constants, q, delta_big, h, delta))?;
    let delta_max_at_sigma = delta_max(constants.mu_a, constants.sigma, constants.norm_phi);
    Ok(BoundsReport {
        format: FORMAT_VERSION,
        sigma_fraction: exp.sigma_fraction,
        delta_max: delta_max(constants.mu_a, sup_sigma, constants.norm_phi),
        delta_max_at_sigma,
        sampling_ok: delta < delta_max_at_sigma,
        class,
        class_source,
        delta_big,
        load: class.load(delta_big, 1),
        q,
        h_min,
        horizon_ok: h >= h_min,
        gap_rhs,
        beta: env.map(|e| e.beta),
        lambda: env.map(|e| e.lambda),
        l: env.map(|e| e.l),
        provenance: provenance().into_iter().collect(),
        constants,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub format: u32,
    pub horizon: f64,
    /// Number of DoS intervals.
    pub n: usize,
    /// `|Ξ|` over the horizon.
    pub measure: f64,
    #[serde(rename = "tau_D")]
    pub tau_d: f64,
    #[serde(rename = "T")]
    pub t_ratio: f64,
    /// Whether `τ_D` and `T` came from the caller or the average rates.
    pub rates_given: bool,
    pub fit: ClassFit,
    #[serde(rename = "Delta")]
    pub delta_big: f64,
    pub load: f64,
    pub attempts: usize,
    pub successes: Vec<f64>,
    pub failure_fraction: f64,
    /// `None` with `lemma1_error` set when the class admits no bound.
    pub lemma1: Option<Lemma1Verdict>,
    pub lemma1_error: Option<String>,
}

/// Fits the minimal class offsets of a signal and checks the success-time
/// bounds on its transmission schedule.
pub fn verify_signal(
    signal: &DosSignal,
    delta_big: f64,
    tau_d: Option<f64>,
    t_ratio: Option<f64>,
) -> Result<VerifyReport> {
    let (avg_tau, avg_t) = signal.average_rates();
    let rates_given = tau_d.is_some() || t_ratio.is_some();
    let tau_d = tau_d.unwrap_or(avg_tau);
    let t_ratio = t_ratio.unwrap_or(avg_t);
    let fit = fit_class_params(signal, tau_d, t_ratio)?;
    let class = DosClassParams::new(fit.eta, tau_d, fit.kappa, t_ratio)?;
    let sched = successful_transmissions(signal, delta_big, signal.horizon())?;
    let (lemma1, lemma1_error) = match check_lemma1(signal, delta_big, &class, signal.horizon()) {
        Ok(v) => (Some(v), None),
        Err(e) if e.is_infeasibility() => (None, Some(e.to_string())),
        Err(e) => return Err(e),
    };
    Ok(VerifyReport {
        format: FORMAT_VERSION,
        horizon: signal.horizon(),
        n: signal.intervals().len(),
        measure: signal.total_measure(),
        tau_d,
        t_ratio,
        rates_given,
        fit,
        delta_big,
        load: class.load(delta_big, 1),
        attempts: sched.attempts(),
        failure_fraction: sched.failure_fraction(),
        successes: sched.successes,
        lemma1,
        lemma1_error,
    })
}

/// Runs the experiment. For the remote architectures the decay envelope is
/// checked whenever the constants certify the configured horizon.
pub fn run(exp: &Experiment) -> Result<(SimTrace, SimMetrics)> {
    let trace = simulate(&exp.plant, &exp.k, &exp.sim, &exp.dos, &exp.noise, &exp.x0)?;
    let mut met = metrics(&trace, default_divergence_threshold(&exp.x0))?;
    if exp.sim.mode != Architecture::Colocated && exp.sim.t_c == 0.0 && !trace.z.is_empty() {
        if let Ok(report) = bounds(exp) {
            if let (true, Some(env)) = (report.horizon_ok, report.envelope()) {
                met.envelope_ok = Some(check_envelope(&trace, &env, &report.constants, trace.w_inf)?);
            }
        }
    }
    Ok((trace, met))
}

pub fn write_trace(trace: &SimTrace, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    write_trace_csv(trace, &mut w).map_err(|e| Error::io(path, e))?;
    std::io::Write::flush(&mut w).map_err(|e| Error::io(path, e))
}

pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::io(path, e))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}
