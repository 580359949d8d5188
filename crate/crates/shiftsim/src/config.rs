//! Flat `key = value` prior and sampler settings.
//!
//! Blank lines and `#` comments are ignored. Unknown or repeated keys are
//! rejected. Keys:
//!
//! | key | meaning |
//! |-----|---------|
//! | `preset` | `adaptive` (default) or `nonadaptive` |
//! | `s` | smoothness of the non-adaptive preset |
//! | `n`, `l_max`, `c`, `rho`, `mu`, `zeta` | sieve prior fields |
//! | `shift` | `dp` (default) or `smooth` |
//! | `total_mass`, `truncation`, `base_grid` | Dirichlet process |
//! | `nu`, `radius`, `grid`, `max_rejections` | smooth prior; `grid` is also the Gibbs shift grid |
//! | `method` | `gibbs` (default) or `importance` |
//! | `burn_in`, `thin`, `pcn_beta`, `pcn_steps`, `noise_floor` | Gibbs options |

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use serde_json::{json, Value};
use shiftsim_core::posterior::{GibbsOptions, PriorConfig, ShiftPrior};
use shiftsim_core::priors::{DirichletPriorConfig, SievePriorConfig, SmoothPriorConfig};
use shiftsim_core::ShiftDistribution;

use crate::error::{CliError, Result};

const KEYS: &[&str] = &[
    "preset", "s", "n", "l_max", "c", "rho", "mu", "zeta", "shift", "total_mass", "truncation", "base_grid", "nu",
    "radius", "grid", "max_rejections", "method", "burn_in", "thin", "pcn_beta", "pcn_steps", "noise_floor",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Gibbs,
    Importance,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

impl Settings {
    pub fn parse(text: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Validation(format!("config line {}: expected key = value", i + 1)))?;
            let (k, v) = (k.trim(), v.trim());
            if !KEYS.contains(&k) {
                return Err(CliError::Validation(format!("config line {}: unknown key `{k}`", i + 1)));
            }
            if values.insert(k.to_string(), v.to_string()).is_some() {
                return Err(CliError::Validation(format!("config line {}: repeated key `{k}`", i + 1)));
            }
        }
        Ok(Settings { values })
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text)
    }

    fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.values.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| CliError::Validation(format!("config key `{key}`: cannot parse `{v}`"))),
        }
    }

    fn or<T: FromStr>(&self, key: &str, default: T) -> Result<T> {
        Ok(self.get(key)?.unwrap_or(default))
    }

    /// Sieve prior; `n` defaults to `n_default`.
    pub fn sieve(&self, n_default: usize) -> Result<SievePriorConfig> {
        let n = self.or("n", n_default)?;
        let mut cfg = match self.values.get("preset").map(String::as_str) {
            None | Some("adaptive") => SievePriorConfig::adaptive(n),
            Some("nonadaptive") => SievePriorConfig::non_adaptive(n, self.or("s", 1.0)?),
            Some(other) => return Err(CliError::Validation(format!("config key `preset`: unknown value `{other}`"))),
        };
        cfg.l_max = self.or("l_max", cfg.l_max)?;
        cfg.c = self.or("c", cfg.c)?;
        cfg.rho = self.or("rho", cfg.rho)?;
        cfg.mu = self.or("mu", cfg.mu)?;
        cfg.zeta = self.or("zeta", cfg.zeta)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn dirichlet(&self) -> Result<DirichletPriorConfig> {
        let d = DirichletPriorConfig::default();
        let cfg = DirichletPriorConfig {
            base_density: match self.get::<usize>("base_grid")? {
                Some(m) => ShiftDistribution::uniform(m),
                None => d.base_density,
            },
            total_mass: self.or("total_mass", d.total_mass)?,
            truncation: self.or("truncation", d.truncation)?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn smooth(&self) -> Result<SmoothPriorConfig> {
        let d = SmoothPriorConfig::default();
        let cfg = SmoothPriorConfig {
            nu: self.or("nu", d.nu)?,
            radius: self.or("radius", d.radius)?,
            grid: self.or("grid", d.grid)?,
            max_rejections: self.or("max_rejections", d.max_rejections)?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn shift_prior(&self) -> Result<ShiftPrior> {
        match self.values.get("shift").map(String::as_str) {
            None | Some("dp") => Ok(ShiftPrior::Dirichlet(self.dirichlet()?)),
            Some("smooth") => Ok(ShiftPrior::Smooth(self.smooth()?)),
            Some(other) => Err(CliError::Validation(format!("config key `shift`: unknown value `{other}`"))),
        }
    }

    pub fn prior(&self, n_default: usize) -> Result<PriorConfig> {
        let prior = PriorConfig { sieve: self.sieve(n_default)?, shift: self.shift_prior()? };
        prior.validate()?;
        Ok(prior)
    }

    pub fn method(&self) -> Result<Method> {
        match self.values.get("method").map(String::as_str) {
            None | Some("gibbs") => Ok(Method::Gibbs),
            Some("importance") => Ok(Method::Importance),
            Some(other) => Err(CliError::Validation(format!("config key `method`: unknown value `{other}`"))),
        }
    }

    /// Gibbs options with `steps` from the command line.
    pub fn gibbs(&self, steps: usize) -> Result<GibbsOptions> {
        let d = GibbsOptions::default();
        Ok(GibbsOptions {
            steps,
            burn_in: self.or("burn_in", d.burn_in.min(steps / 4))?,
            thin: self.or("thin", d.thin)?,
            grid: self.or("grid", d.grid)?,
            pcn_beta: self.or("pcn_beta", d.pcn_beta)?,
            pcn_steps: self.or("pcn_steps", d.pcn_steps)?,
            noise_floor: self.or("noise_floor", d.noise_floor)?,
            record_shifts: false,
        })
    }
}

pub fn sieve_json(c: &SievePriorConfig) -> Value {
    json!({ "n": c.n, "l_max": c.l_max, "c": c.c, "rho": c.rho, "mu": c.mu, "zeta": c.zeta, "xi2": c.xi2() })
}

pub fn shift_prior_json(p: &ShiftPrior) -> Value {
    match p {
        ShiftPrior::Dirichlet(d) => json!({
            "kind": "dp",
            "total_mass": d.total_mass,
            "truncation": d.truncation,
            "base_density": serde_json::to_value(crate::formats::ShiftJson::from(&d.base_density)).unwrap_or(Value::Null),
        }),
        ShiftPrior::Smooth(s) => smooth_json(s),
    }
}

pub fn smooth_json(s: &SmoothPriorConfig) -> Value {
    json!({ "kind": "smooth", "nu": s.nu, "radius": s.radius, "grid": s.grid, "max_rejections": s.max_rejections })
}

pub fn gibbs_json(g: &GibbsOptions) -> Value {
    json!({
        "steps": g.steps, "burn_in": g.burn_in, "thin": g.thin, "grid": g.grid,
        "pcn_beta": g.pcn_beta, "pcn_steps": g.pcn_steps, "noise_floor": g.noise_floor,
    })
}
