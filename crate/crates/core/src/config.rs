//! JSON experiment description and its validated, ready-to-run form.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::bounds::{DesignInputs, DEFAULT_SIGMA_FRACTION};
use crate::dos::{generate, DosClassParams, DosSignal, GeneratorSpec};
use crate::error::{Error, Result};
use crate::matrix::{matrix_from_rows, Matrix, Vector};
use crate::plant::{LtiPlant, PlantSpec};
use crate::sim::{Architecture, NoiseSpec, SimConfig};

/// Schema version accepted by [`ExperimentConfig::from_json`].
pub const CONFIG_FORMAT: u32 = 1;

fn format_one() -> u32 {
    CONFIG_FORMAT
}

fn one() -> usize {
    1
}

fn ten() -> usize {
    10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "format_one")]
    pub format: u32,
    pub plant: PlantSpec,
    pub controller: ControllerSpec,
    pub network: NetworkSpec,
    pub buffer: BufferSpec,
    #[serde(default)]
    pub dos: DosSource,
    /// Class constants; fitted from the signal's average rates when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class: Option<DosClassParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<NoiseSpec>,
    pub sim: SimSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControllerSpec {
    #[serde(rename = "K")]
    pub k: Vec<Vec<f64>>,
    #[serde(rename = "M", default, skip_serializing_if = "Option::is_none")]
    pub m: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma_fraction: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkSpec {
    pub delta_big: f64,
    #[serde(default = "one")]
    pub b: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BufferSpec {
    pub h: usize,
    #[serde(rename = "T_c", default)]
    pub t_c: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DosSource {
    #[default]
    None,
    Inline { signal: DosSignal },
    Generator {
        off: [f64; 2],
        on: [f64; 2],
        seed: u64,
    },
    /// Signal file; relative paths are resolved against the config file.
    File { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSpec {
    pub horizon: f64,
    #[serde(default = "ten")]
    pub substeps: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<Vec<f64>>,
    pub mode: Architecture,
}

/// Command-line overrides applied on top of a config file.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Overrides {
    pub h: Option<usize>,
    /// Replaces both the DoS generator seed and the noise seed.
    pub seed: Option<u64>,
    pub mode: Option<Architecture>,
}

/// A validated experiment: every dimension cross-checked, the DoS signal
/// materialized.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub plant: LtiPlant,
    pub k: Matrix,
    pub m: Matrix,
    pub sigma_fraction: f64,
    pub sim: SimConfig,
    pub dos: DosSignal,
    pub class: Option<DosClassParams>,
    pub noise: NoiseSpec,
    pub x0: Vector,
}

impl Experiment {
    pub fn design(&self) -> Result<DesignInputs> {
        DesignInputs::new(self.plant.clone(), self.k.clone(), self.m.clone(), self.sigma_fraction)
    }
}

/// `(1, −1, 1, …)/√n`.
pub fn default_x0(n: usize) -> Vector {
    let scale = 1.0 / (n as f64).sqrt();
    Vector::from_fn(n, |i, _| if i % 2 == 0 { scale } else { -scale })
}

impl ExperimentConfig {
    /// Parses a config; errors carry serde's line/column and field name.
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(format!("config: {e}")))?;
        if cfg.format != CONFIG_FORMAT {
            return Err(Error::Config(format!(
                "config: unsupported format {} (expected {CONFIG_FORMAT})",
                cfg.format
            )));
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(h) = o.h {
            self.buffer.h = h;
        }
        if let Some(mode) = o.mode {
            self.sim.mode = mode;
        }
        if let Some(seed) = o.seed {
            if let DosSource::Generator { seed: s, .. } = &mut self.dos {
                *s = seed;
            }
            if let Some(noise) = &mut self.noise {
                noise.seed = seed;
            }
        }
    }

    /// Validates and materializes the experiment. `base` is the directory
    /// that relative signal paths are resolved against.
    pub fn resolve(&self, base: Option<&Path>) -> Result<Experiment> {
        let plant = LtiPlant::try_from(&self.plant)?;
        let n = plant.n();
        let k = matrix_from_rows(&self.controller.k)?;
        plant.check_gain(&k)?;
        let m = match &self.controller.m {
            Some(rows) => matrix_from_rows(rows)?,
            None => Matrix::identity(n, n),
        };
        if m.nrows() != n || m.ncols() != n {
            return Err(Error::Dimension(format!(
                "controller.M must be {n}x{n}, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let sigma_fraction = self.controller.sigma_fraction.unwrap_or(DEFAULT_SIGMA_FRACTION);
        if !(sigma_fraction > 0.0 && sigma_fraction <= 1.0) {
            return Err(Error::Config(format!(
                "controller.sigma_fraction must lie in (0, 1], got {sigma_fraction}"
            )));
        }

        let sim = SimConfig {
            delta_big: self.network.delta_big,
            b: self.network.b,
            h: self.buffer.h,
            horizon: self.sim.horizon,
            substeps: self.sim.substeps,
            mode: self.sim.mode,
            t_c: self.buffer.t_c,
            lyapunov_weight: Some(m.clone()),
        };
        sim.validate()?;

        let x0 = match &self.sim.x0 {
            Some(v) if v.len() != n => {
                return Err(Error::Dimension(format!("sim.x0 has length {}, expected {n}", v.len())))
            }
            Some(v) => Vector::from_column_slice(v),
            None => default_x0(n),
        };
        if x0.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("sim.x0 must be finite".into()));
        }

        let dos = match &self.dos {
            DosSource::None => DosSignal::quiet(sim.horizon)?,
            DosSource::Inline { signal } => signal.clone(),
            DosSource::Generator { off, on, seed } => generate(
                *seed,
                &GeneratorSpec {
                    off: *off,
                    on: *on,
                },
                sim.horizon,
            )?,
            DosSource::File { path } => {
                let full = match base {
                    Some(dir) if path.is_relative() => dir.join(path),
                    _ => path.clone(),
                };
                let text = std::fs::read_to_string(&full).map_err(|e| Error::io(&full, e))?;
                serde_json::from_str(&text)
                    .map_err(|e| Error::Config(format!("{}: {e}", full.display())))?
            }
        };
        if dos.horizon() + 1e-9 < sim.horizon {
            return Err(Error::Config(format!(
                "DoS signal covers [0, {}] but the simulation runs to {}",
                dos.horizon(),
                sim.horizon
            )));
        }
        if let Some(class) = &self.class {
            class.validate()?;
        }
        let noise = self.noise.unwrap_or_else(NoiseSpec::none);

        Ok(Experiment {
            plant,
            k,
            m,
            sigma_fraction,
            sim,
            dos,
            class: self.class,
            noise,
            x0,
        })
    }
}
