//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::process::ExitCode;
use std::time::Instant;

use common::*;
use dosctrl::bounds::{
    decay_envelope, delta_max, derive_constants, gap_rhs_for_rates, horizon_condition, min_horizon_for_rates,
    min_prediction_horizon, DesignInputs, REPORT_SIGMA_FRACTION,
};
use dosctrl::commands::run;
use dosctrl::dos::{check_lemma1, compute_q, fit_from_average_rates, generate, DosClassParams, GeneratorSpec};
use dosctrl::error::Error;
use dosctrl::matrix::{expm, log_norm, solve_lyapunov, spectral_norm, symmetric_extremes, zoh_discretize, Matrix};
use dosctrl::repro;
use dosctrl::rng::Stream;
use dosctrl::sim::{check_envelope, simulate, Architecture, NoiseSpec, Phase, SimConfig};

type Outcome = Result<String, String>;
type Criterion = fn() -> Outcome;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn example_design(frac: f64) -> DesignInputs {
    DesignInputs::with_identity_weight(repro::plant(), repro::gain(), frac).unwrap()
}

fn constants_reproduction() -> Outcome {
    let c = derive_constants(&example_design(REPORT_SIGMA_FRACTION), 1, 0.1).map_err(|e| e.to_string())?;
    let rows = [
        ("gamma1", c.gamma1, 1.0),
        ("gamma2", c.gamma2, 2.1080),
        ("alpha1", c.alpha1, 0.2779),
        ("alpha2", c.alpha2, 0.4497),
        ("norm_phi", c.norm_phi, 1.9021),
    ];
    let mut worst: f64 = 0.0;
    for (name, got, want) in rows {
        let diff = (got - want).abs();
        worst = worst.max(diff);
        ensure(diff <= 2e-3, || format!("{name} = {got:.6}, reported {want}"))?;
    }
    ensure((c.mu_a - 1.5).abs() <= 1e-12, || format!("mu_A = {:.15}", c.mu_a))?;
    Ok(format!("max |diff| = {worst:.1e}, mu_A = {}", c.mu_a))
}

fn sampling_bound() -> Outcome {
    let c = derive_constants(&example_design(REPORT_SIGMA_FRACTION), 1, 0.1).map_err(|e| e.to_string())?;
    let d = delta_max(c.mu_a, c.sigma, c.norm_phi);
    ensure((d - 0.1508).abs() <= 2e-4, || format!("delta_max = {d:.6}"))?;
    Ok(format!("delta_max = {d:.6}"))
}

fn horizon_pipeline() -> Outcome {
    let class = DosClassParams::new(
        repro::reported::ETA,
        repro::reported::TAU_D,
        repro::reported::KAPPA,
        repro::reported::T,
    )
    .map_err(|e| e.to_string())?;
    let q = compute_q(&class, 0.1, 1).map_err(|e| e.to_string())?;
    let h = min_horizon_for_rates(repro::reported::OMEGA1, repro::reported::OMEGA2, q, 0.1, 0.1)
        .map_err(|e| e.to_string())?;
    ensure(h == 50, || format!("h_min = {h} with eta = {}", repro::reported::ETA))?;
    let c = derive_constants(&example_design(repro::SIGMA_FRACTION), 1, 0.1).map_err(|e| e.to_string())?;
    Ok(format!(
        "h_min = 50 (eta = {}, Q = {q:.4}); INFO formula omega1 = {:.4}, omega2 = {:.4} at sigma_fraction {} vs reported {}, {}",
        repro::reported::ETA,
        c.omega1,
        c.omega2,
        repro::SIGMA_FRACTION,
        repro::reported::OMEGA1,
        repro::reported::OMEGA2
    ))
}

fn reference_verdicts() -> Outcome {
    let started = Instant::now();
    let summary = repro::signal_summary().map_err(|e| e.to_string())?;
    let mut verdicts = Vec::new();
    for (name, mode, h, expect) in repro::scenarios() {
        let exp = repro::config(mode, h).resolve(None).map_err(|e| e.to_string())?;
        let (_, met) = run(&exp).map_err(|e| e.to_string())?;
        ensure(met.stable_verdict == expect, || {
            format!("{name}: stable_verdict = {}, max |x| = {:.3e}", met.stable_verdict, met.max_state_norm)
        })?;
        verdicts.push(format!("{name} {}", if expect { "stable" } else { "unstable" }));
    }
    let elapsed = started.elapsed().as_secs_f64();
    ensure(summary.load_ok, || format!("load = {:.4}", summary.load))?;
    ensure(summary.failure_ok, || format!("failure fraction = {:.3}", summary.failure_fraction))?;
    ensure(elapsed < 5.0, || format!("runtime {elapsed:.2} s"))?;
    Ok(format!(
        "load = {:.4}, failure = {:.3}, {}; {elapsed:.2} s",
        summary.load,
        summary.failure_fraction,
        verdicts.join(", ")
    ))
}

fn lemma1_suite() -> Outcome {
    let mut rng = Stream::new(5, 0);
    let mut checked = 0;
    let mut skipped = 0;
    let mut seed = 0;
    while checked < 1000 {
        seed += 1;
        let off_lo = rng.uniform(0.05, 1.0);
        let on_lo = rng.uniform(0.0, 0.8);
        let spec = GeneratorSpec {
            off: [off_lo, off_lo + rng.uniform(0.0, 2.0)],
            on: [on_lo, on_lo + rng.uniform(0.0, 1.0)],
        };
        let horizon = rng.uniform(5.0, 60.0);
        let delta_big = rng.uniform(0.02, 0.4);
        let signal = generate(seed, &spec, horizon).map_err(|e| e.to_string())?;
        let fitted = match fit_from_average_rates(&signal) {
            Ok(p) => p,
            Err(_) => {
                skipped += 1;
                continue;
            }
        };
        // tighter dwell and duration parameters than the averages, with
        // correspondingly larger offsets
        let shrink = rng.uniform(0.6, 1.0);
        let tau_d = fitted.tau_d * shrink;
        let t_ratio = (fitted.t_ratio * shrink).max(1.0 + 1e-6);
        let fit = dosctrl::dos::fit_class_params(&signal, tau_d, t_ratio).map_err(|e| e.to_string())?;
        let class = DosClassParams::new(fit.eta, tau_d, fit.kappa, t_ratio).map_err(|e| e.to_string())?;
        match check_lemma1(&signal, delta_big, &class, horizon) {
            Ok(v) => {
                ensure(v.holds(), || format!("seed {seed}: {v:?} for {class:?}, Delta = {delta_big}"))?;
                checked += 1;
            }
            Err(Error::InfeasibleClass { .. }) => skipped += 1,
            Err(e) => return Err(e.to_string()),
        }
    }
    Ok(format!("{checked} in-class signals hold, {skipped} infeasible draws skipped"))
}

fn equivalence_oracle() -> Outcome {
    let mut rng = Stream::new(6, 0);
    let mut worst: f64 = 0.0;
    for run_id in 0..100 {
        let n = 1 + (rng.unit() * 4.0) as usize;
        let m = 1 + (rng.unit() * n as f64) as usize;
        let lp = random_stabilized(&mut rng, n, m);
        let b = 1 + (rng.unit() * 2.0) as usize;
        let h = b * (1 + (rng.unit() * 4.0) as usize);
        let delta = rng.uniform(0.02, 0.15);
        let delta_big = delta * b as f64;
        let horizon = delta_big * 40.0;
        let dos = gap_limited_dos(&mut rng, delta_big, horizon, h / b - 1);
        let x0 = random_vector(&mut rng, n, 1.0);
        let mut cfg = SimConfig::new(delta_big, b, h, horizon, Architecture::Colocated);
        cfg.substeps = 2;
        let co = simulate(&lp.plant, &lp.k, &cfg, &dos, &NoiseSpec::none(), &x0).map_err(|e| e.to_string())?;
        cfg.mode = Architecture::Remote;
        let re = simulate(&lp.plant, &lp.k, &cfg, &dos, &NoiseSpec::none(), &x0).map_err(|e| e.to_string())?;
        for (i, (a, r)) in co.u.iter().zip(&re.u).enumerate() {
            let err = (a - r).amax() / a.amax().max(1.0);
            worst = worst.max(err);
            ensure(err <= 1e-10, || format!("run {run_id}, row {i}: input mismatch {err:.2e}"))?;
        }
    }
    Ok(format!("100 systems, worst scaled input difference {worst:.1e}"))
}

fn lemma2_suite() -> Outcome {
    let mut rng = Stream::new(7, 0);
    let (mut phi_rows, mut decay_rows, mut growth_rows) = (0usize, 0usize, 0usize);
    for run_id in 0..100 {
        let n = 1 + (rng.unit() * 3.0) as usize;
        let lp = random_loop(&mut rng, n);
        let m = if rng.unit() < 0.5 { Matrix::identity(n, n) } else { random_spd(&mut rng, n, 0.2) };
        let frac = rng.uniform(0.2, 0.9);
        let design = DesignInputs::new(lp.plant.clone(), lp.k.clone(), m.clone(), frac).map_err(|e| e.to_string())?;
        let probe = derive_constants(&design, 1, 0.01).map_err(|e| e.to_string())?;
        let delta = rng.uniform(0.3, 1.0) * delta_max(probe.mu_a, probe.sigma, probe.norm_phi);
        let h = 1 + (rng.unit() * 5.0) as usize;
        let c = derive_constants(&design, h, delta).map_err(|e| e.to_string())?;
        let p = c.p_matrix();
        let horizon = 80.0 * delta;
        let dos = gap_limited_dos(&mut rng, delta, horizon, 3 * h);
        let x0 = random_vector(&mut rng, n, 1.0);
        let mut cfg = SimConfig::new(delta, 1, h, horizon, Architecture::Remote);
        cfg.lyapunov_weight = Some(m);
        let tr = simulate(&lp.plant, &lp.k, &cfg, &dos, &NoiseSpec::none(), &x0).map_err(|e| e.to_string())?;
        let v = |i: usize| tr.x[i].dot(&(&p * &tr.x[i]));
        for (i, phase) in tr.phases().into_iter().enumerate() {
            let t = tr.times[i];
            match phase {
                Phase::BeforeFirstSuccess => {}
                Phase::WithinHorizon { m } => {
                    let pred = tr.prediction[i].as_ref().ok_or("missing prediction within horizon")?;
                    let phi = (pred - &tr.x[i]).norm();
                    let bound = c.sigma * tr.x[i].norm();
                    ensure(phi <= bound * (1.0 + 1e-6), || {
                        format!("run {run_id}, t = {t:.4}: |phi| = {phi:.6e} > sigma |x| = {bound:.6e}")
                    })?;
                    let z = tr.z_rows[m];
                    let cap = (-c.omega1 * (t - tr.times[z])).exp() * v(z);
                    ensure(v(i) <= cap * (1.0 + 1e-6), || {
                        format!("run {run_id}, t = {t:.4}: V = {:.6e} above decay bound {cap:.6e}", v(i))
                    })?;
                    phi_rows += 1;
                    decay_rows += 1;
                }
                Phase::BeyondHorizon { m } => {
                    let e = tr.horizon_end_row(m).ok_or("horizon end outside trace")?;
                    let cap = (c.omega2 * (t - tr.times[e])).exp() * v(e);
                    ensure(v(i) <= cap * (1.0 + 1e-6), || {
                        format!("run {run_id}, t = {t:.4}: V = {:.6e} above growth cap {cap:.6e}", v(i))
                    })?;
                    growth_rows += 1;
                }
            }
        }
    }
    ensure(growth_rows > 0, || "no run left the prediction horizon".into())?;
    Ok(format!(
        "100 runs: {phi_rows} prediction-error rows, {decay_rows} decay rows, {growth_rows} growth rows"
    ))
}

fn envelope_suite() -> Outcome {
    let design = example_design(repro::SIGMA_FRACTION);
    let mut checked = 0;
    let mut seed = 1000;
    let mut hs = Vec::new();
    while checked < 50 {
        seed += 1;
        let dos = generate(seed, &repro::GENERATOR, repro::HORIZON).map_err(|e| e.to_string())?;
        let Ok(class) = fit_from_average_rates(&dos) else { continue };
        let Ok(q) = compute_q(&class, repro::DELTA_BIG, 1) else { continue };
        let probe = derive_constants(&design, 1, repro::DELTA_BIG).map_err(|e| e.to_string())?;
        let h_min = min_prediction_horizon(&probe, q, repro::DELTA_BIG, repro::DELTA_BIG).map_err(|e| e.to_string())?;
        let h = h_min + (seed % 3) as usize;
        let c = derive_constants(&design, h, repro::DELTA_BIG).map_err(|e| e.to_string())?;
        let env = decay_envelope(&c, q, repro::DELTA_BIG, h, repro::DELTA_BIG).map_err(|e| e.to_string())?;
        let cfg = SimConfig::new(repro::DELTA_BIG, 1, h, repro::HORIZON, Architecture::Remote);
        let x0 = dosctrl::config::default_x0(2);
        let tr = simulate(&repro::plant(), &repro::gain(), &cfg, &dos, &NoiseSpec::none(), &x0)
            .map_err(|e| e.to_string())?;
        let ok = check_envelope(&tr, &env, &c, 0.0).map_err(|e| e.to_string())?;
        ensure(ok, || format!("seed {seed}, h = {h}: envelope violated"))?;
        hs.push(h);
        checked += 1;
    }
    Ok(format!(
        "50 seeds, h in [{}, {}]",
        hs.iter().min().unwrap(),
        hs.iter().max().unwrap()
    ))
}

fn kernel_suite() -> Outcome {
    let mut rng = Stream::new(9, 0);
    let (mut semi, mut contraction, mut zoh, mut lyap): (f64, f64, f64, f64) = (0.0, 0.0, 0.0, 0.0);
    for i in 0..200 {
        let n = 1 + (rng.unit() * 5.0) as usize;
        let a = random_matrix(&mut rng, n, n, 1.5);
        let s = rng.unit();
        let t = rng.unit();
        let lhs = expm(&a, s).unwrap() * expm(&a, t).unwrap();
        let rhs = expm(&a, s + t).unwrap();
        let err = (&lhs - &rhs).norm() / rhs.norm().max(1.0);
        semi = semi.max(err);
        ensure(err <= 1e-8, || format!("semigroup instance {i}: {err:.2e}"))?;
    }
    for i in 0..200 {
        let n = 1 + (rng.unit() * 5.0) as usize;
        let a = random_matrix(&mut rng, n, n, 1.5);
        let t = rng.uniform(0.0, 2.0);
        let lhs = spectral_norm(&expm(&a, t).unwrap());
        let bound = (log_norm(&a).unwrap() * t).exp();
        contraction = contraction.max(lhs / bound);
        ensure(lhs <= bound * (1.0 + 1e-8), || format!("log-norm instance {i}: {lhs} > {bound}"))?;
    }
    for i in 0..200 {
        let n = 1 + (rng.unit() * 4.0) as usize;
        let m = 1 + (rng.unit() * 3.0) as usize;
        let a = random_matrix(&mut rng, n, n, 1.5);
        let b = random_matrix(&mut rng, n, m, 1.0);
        let delta = rng.uniform(0.01, 0.5);
        let (ad, bd) = zoh_discretize(&a, &b, delta).unwrap();
        let quad = simpson_input_integral(&a, &b, delta, 64);
        let err = (&bd - &quad).amax().max((&ad - taylor_expm(&a, delta)).amax());
        zoh = zoh.max(err);
        ensure(err <= 1e-8, || format!("discretization instance {i}: {err:.2e}"))?;
    }
    for i in 0..200 {
        let n = 1 + (rng.unit() * 6.0) as usize;
        let phi = random_hurwitz(&mut rng, n, 1.0, 0.1);
        let m = random_spd(&mut rng, n, 0.1);
        let p = solve_lyapunov(&phi, &m).unwrap();
        let res = (phi.transpose() * &p + &p * &phi + &m).norm() / m.norm();
        lyap = lyap.max(res);
        ensure(res <= 1e-10, || format!("Lyapunov instance {i}: residual {res:.2e}"))?;
        ensure(p == p.transpose(), || format!("Lyapunov instance {i}: P not symmetric"))?;
        let spec = symmetric_extremes(&p).unwrap();
        ensure(spec.min_eig > 0.0, || format!("Lyapunov instance {i}: min eig {}", spec.min_eig))?;
    }
    Ok(format!(
        "worst: semigroup {semi:.1e}, norm ratio {contraction:.6}, discretization {zoh:.1e}, residual {lyap:.1e}"
    ))
}

fn gap_form_equivalence() -> Outcome {
    let mut rng = Stream::new(10, 0);
    let mut compared = 0;
    let mut ties = 0;
    for set in 0..100 {
        let omega1 = rng.uniform(0.05, 5.0);
        let omega2 = rng.uniform(0.1, 30.0);
        let kappa = rng.uniform(0.0, 3.0);
        let eta = rng.uniform(0.0, 5.0);
        let delta_big = rng.uniform(0.02, 0.5);
        let b = 1 + (rng.unit() * 4.0) as usize;
        let delta = delta_big / b as f64;
        let load = rng.uniform(0.05, 0.95);
        let share = rng.uniform(0.05, 0.95);
        let tau_d = delta_big / (load * share);
        let t_ratio = 1.0 / (load * (1.0 - share));
        let class = DosClassParams::new(eta, tau_d, kappa, t_ratio).map_err(|e| e.to_string())?;
        let q = compute_q(&class, delta_big, 1).map_err(|e| e.to_string())?;
        let threshold = omega2 / (omega1 + omega2) * (q + delta_big);
        for h in 1..=200usize {
            let span = h as f64 * delta;
            if (span - threshold).abs() <= 1e-12 * span.max(threshold) {
                ties += 1;
                continue;
            }
            let by_horizon = horizon_condition(omega1, omega2, q, delta_big, h, delta);
            let by_gap = match gap_rhs_for_rates(omega1, omega2, h, delta, delta_big, kappa, eta) {
                Ok(rhs) => class.load(delta_big, 1) < rhs,
                Err(Error::HorizonTooShort(_)) => false,
                Err(e) => return Err(e.to_string()),
            };
            ensure(by_horizon == by_gap, || {
                format!("set {set}, h = {h}: horizon form {by_horizon}, gap form {by_gap}")
            })?;
            compared += 1;
        }
    }
    Ok(format!("{compared} (set, h) pairs agree, {ties} exact ties skipped"))
}

fn main() -> ExitCode {
    let criteria: [(&str, Criterion); 10] = [
        ("constants reproduction", constants_reproduction),
        ("sampling-period bound", sampling_bound),
        ("prediction-horizon pipeline", horizon_pipeline),
        ("reference scenario verdicts", reference_verdicts),
        ("success-time bounds on 1000 signals", lemma1_suite),
        ("co-located/remote equivalence", equivalence_oracle),
        ("prediction error, decay and growth bounds", lemma2_suite),
        ("decay envelope", envelope_suite),
        ("matrix kernel accuracy", kernel_suite),
        ("horizon/gap form equivalence", gap_form_equivalence),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let started = Instant::now();
        let outcome = check();
        let secs = started.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} [PRIMARY] {name}: PASS ({detail}) [{secs:.2} s]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} [PRIMARY] {name}: FAIL ({detail}) [{secs:.2} s]", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
