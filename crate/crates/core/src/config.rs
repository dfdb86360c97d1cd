//! Flat `key = value` run configuration.
//!
//! ```text
//! # uniform coupling and the lab decoherence rates, in units of 1/T
//! g = 65.96
//! gamma = 0.0493
//! gamma_phi = 0.0247
//! kappa = 0.163
//! gammaphi30A1 = 0.03   # any channel key overrides its uniform rate
//! ```

use std::path::{Path, PathBuf};

use crate::device::DeviceParams;
use crate::dynamics::{channels, DecoherenceSpec, IntegratorConfig};
use crate::error::{Error, Result};

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunConfig {
    pub params: DeviceParams,
    pub decoherence: DecoherenceSpec,
    pub integrator: IntegratorConfig,
    pub output: Option<PathBuf>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        let channel_keys: Vec<String> = channels().iter().map(|c| c.key()).collect();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| Error::Config { line: n + 1, message };
            let (key, value) = line.split_once('=').ok_or_else(|| err(format!("expected `key = value`, got `{line}`")))?;
            let (key, value) = (key.trim(), value.trim());
            if key == "output" {
                cfg.output = Some(PathBuf::from(value));
                continue;
            }
            let num = |v: &str| v.parse::<f64>().map_err(|_| err(format!("`{key}` needs a number, got `{v}`")));
            let int = |v: &str| v.parse::<usize>().map_err(|_| err(format!("`{key}` needs a nonnegative integer, got `{v}`")));
            let p = &mut cfg.params;
            match key {
                "T" => p.step_duration = num(value)?,
                "g" => {
                    let g = num(value)?;
                    (p.g23_a1, p.g24_a1, p.g23_a2, p.g24_a2, p.g_b1, p.g_b2) = (g, g, g, g, g, g);
                }
                "g23A1" => p.g23_a1 = num(value)?,
                "g24A1" => p.g24_a1 = num(value)?,
                "g23A2" => p.g23_a2 = num(value)?,
                "g24A2" => p.g24_a2 = num(value)?,
                "gB1" => p.g_b1 = num(value)?,
                "gB2" => p.g_b2 = num(value)?,
                "epsilon1" => p.epsilon1 = num(value)?,
                "epsilon2" => p.epsilon2 = num(value)?,
                "n_ph" => p.photon_levels = int(value)?,
                "dt" => cfg.integrator.dt = num(value)?,
                "convergence_target" => cfg.integrator.convergence_target = num(value)?,
                "max_halvings" => cfg.integrator.max_halvings = int(value)? as u32,
                "gamma" => cfg.decoherence.gamma = num(value)?,
                "gamma_phi" => cfg.decoherence.gamma_phi = num(value)?,
                "kappa" => cfg.decoherence.kappa = num(value)?,
                k if channel_keys.iter().any(|c| c == k) => {
                    cfg.decoherence.overrides.insert(k.to_string(), num(value)?);
                }
                _ => return Err(err(format!("unknown key `{key}`"))),
            }
        }
        cfg.params.validate()?;
        cfg.decoherence.validate()?;
        cfg.integrator.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }
}
