//! JSON forms of series, shift distributions and datasets.
//!
//! Complex numbers are `[re, im]` pairs; series run `k = −ℓ..=ℓ`.

use std::path::Path;

use serde::{Deserialize, Serialize};
use shiftsim_core::{Complex64, FourierSeries, ObservationSet, ShiftDistribution};

use crate::error::{CliError, Result};

fn pairs(v: &[Complex64]) -> Vec<[f64; 2]> {
    v.iter().map(|c| [c.re, c.im]).collect()
}

fn complexes(v: &[[f64; 2]]) -> Vec<Complex64> {
    v.iter().map(|&[re, im]| Complex64::new(re, im)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesJson {
    pub cutoff: usize,
    pub coeffs: Vec<[f64; 2]>,
}

impl From<&FourierSeries> for SeriesJson {
    fn from(f: &FourierSeries) -> Self {
        SeriesJson { cutoff: f.cutoff(), coeffs: pairs(f.coeffs()) }
    }
}

impl SeriesJson {
    pub fn to_series(&self) -> Result<FourierSeries> {
        Ok(FourierSeries::new(self.cutoff, complexes(&self.coeffs))?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ShiftJson {
    Discrete { atoms: Vec<[f64; 2]> },
    Grid { values: Vec<f64> },
    Fourier { cutoff: usize, coeffs: Vec<[f64; 2]> },
}

impl From<&ShiftDistribution> for ShiftJson {
    fn from(g: &ShiftDistribution) -> Self {
        match g {
            ShiftDistribution::Discrete { atoms } => ShiftJson::Discrete { atoms: atoms.iter().map(|&(x, w)| [x, w]).collect() },
            ShiftDistribution::Grid { values } => ShiftJson::Grid { values: values.clone() },
            ShiftDistribution::Fourier { cutoff, coeffs } => ShiftJson::Fourier { cutoff: *cutoff, coeffs: pairs(coeffs) },
        }
    }
}

impl ShiftJson {
    /// Validating conversion; the constructors enforce normalisation.
    pub fn to_shift(&self) -> Result<ShiftDistribution> {
        Ok(match self {
            ShiftJson::Discrete { atoms } => ShiftDistribution::discrete(atoms.iter().map(|&[x, w]| (x, w)).collect())?,
            ShiftJson::Grid { values } => ShiftDistribution::grid(values.clone())?,
            ShiftJson::Fourier { cutoff, coeffs } => ShiftDistribution::fourier(*cutoff, complexes(coeffs))?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetJson {
    pub n: usize,
    pub cutoff: usize,
    pub sigma: f64,
    pub seed: Option<u64>,
    pub curves: Vec<Vec<[f64; 2]>>,
    pub true_shifts: Option<Vec<f64>>,
}

impl From<&ObservationSet> for DatasetJson {
    fn from(obs: &ObservationSet) -> Self {
        DatasetJson {
            n: obs.n(),
            cutoff: obs.cutoff(),
            sigma: obs.sigma(),
            seed: obs.seed(),
            curves: obs.curves().map(pairs).collect(),
            true_shifts: obs.true_shifts().map(<[f64]>::to_vec),
        }
    }
}

impl DatasetJson {
    pub fn to_observations(&self) -> Result<ObservationSet> {
        if self.curves.len() != self.n {
            return Err(CliError::Validation(format!("dataset declares n = {} but holds {} curves", self.n, self.curves.len())));
        }
        let curves = self.curves.iter().map(|c| complexes(c)).collect();
        Ok(ObservationSet::new(self.cutoff, self.sigma, self.seed, curves, self.true_shifts.clone())?)
    }
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|source| CliError::Json { path: path.to_path_buf(), source })
}

pub fn read_series(path: &Path) -> Result<FourierSeries> {
    read_json::<SeriesJson>(path)?.to_series()
}

pub fn read_shift(path: &Path) -> Result<ShiftDistribution> {
    read_json::<ShiftJson>(path)?.to_shift()
}

pub fn read_dataset(path: &Path) -> Result<ObservationSet> {
    read_json::<DatasetJson>(path)?.to_observations()
}
