//! JSON configuration (`"version": "v1"`) and `key=value` overrides.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use summoment_core::processes::{
    generate, solve_pair_spec, GaussianSampler, Generated, MarkovParams, PairSampler, ProcessSpec,
};
use summoment_core::rng::GaussianStream;
use summoment_core::{CovMatrix, Matrix};

use crate::csvio::{pair_table, series_table, Table};
use crate::error::{CliError, CliResult};

pub const CONFIG_VERSION: &str = "v1";

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub version: String,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub jobs: Option<usize>,
    #[serde(default)]
    pub deterministic: Option<bool>,
    /// Process description for `generate`.
    #[serde(default)]
    pub process: Option<Value>,
    /// Parameter overrides per experiment id.
    #[serde(default)]
    pub experiments: BTreeMap<String, Value>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> CliResult<Self> {
        let cfg: ConfigFile = serde_json::from_str(text).map_err(|e| CliError::validation("config", e.to_string()))?;
        if cfg.version != CONFIG_VERSION {
            return Err(CliError::validation(
                "version",
                format!("unsupported config version {:?}, expected {CONFIG_VERSION:?}", cfg.version),
            ));
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text)
    }
}

/// Splits `a.b=value`; the value is read as JSON and falls back to a string.
pub fn parse_override(s: &str) -> CliResult<(Vec<String>, Value)> {
    let (key, raw) =
        s.split_once('=').ok_or_else(|| CliError::validation("set", format!("expected key=value, got {s:?}")))?;
    let path: Vec<String> = key.trim().split('.').map(str::to_string).collect();
    if path.iter().any(String::is_empty) {
        return Err(CliError::validation("set", format!("empty key segment in {key:?}")));
    }
    let raw = raw.trim();
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    Ok((path, value))
}

/// Applies overrides in order onto `base`, creating objects along the way.
pub fn apply_overrides(base: &mut Value, overrides: &[String]) -> CliResult<()> {
    for s in overrides {
        let (path, value) = parse_override(s)?;
        let mut cur = &mut *base;
        for (i, seg) in path.iter().enumerate() {
            if !cur.is_object() {
                if cur.is_null() {
                    *cur = Value::Object(Map::new());
                } else {
                    return Err(CliError::validation(path[..i].join("."), "is not an object"));
                }
            }
            let obj = cur.as_object_mut().expect("object");
            if i + 1 == path.len() {
                obj.insert(seg.clone(), value.clone());
                break;
            }
            cur = obj.entry(seg.clone()).or_insert(Value::Null);
        }
    }
    Ok(())
}

fn one() -> f64 {
    1.0
}

fn one_draw() -> usize {
    1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Order {
    First,
    #[default]
    Second,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProcessConfig {
    White {
        n: usize,
        #[serde(default = "one")]
        sigma2: f64,
    },
    /// AR(1) recursion.
    Markov1 {
        alpha: f64,
        #[serde(default = "one")]
        sigma2: f64,
        n: usize,
        #[serde(default)]
        burn_in: Option<usize>,
    },
    /// AR(2) double-pole recursion.
    Markov2 {
        alpha: f64,
        #[serde(default = "one")]
        sigma2: f64,
        n: usize,
        #[serde(default)]
        burn_in: Option<usize>,
    },
    /// ARMA(2,1) recursion with the exact 2nd order Markov covariance.
    Markov2Exact {
        alpha: f64,
        #[serde(default = "one")]
        sigma2: f64,
        n: usize,
    },
    /// `draws` independent Gaussian vectors, concatenated.
    Covariance {
        cov: Vec<Vec<f64>>,
        #[serde(default)]
        mean: Option<Vec<f64>>,
        #[serde(default = "one_draw")]
        draws: usize,
    },
    /// `draws` independent pairs from the three covariance blocks.
    Pair {
        c_x1: Vec<Vec<f64>>,
        c_x2: Vec<Vec<f64>>,
        c_x1x2: Vec<Vec<f64>>,
        #[serde(default = "one_draw")]
        draws: usize,
    },
    /// One Markov stream observed at two offsets, `x2` lagging by `delay`.
    DelayedPair {
        #[serde(default)]
        order: Order,
        alpha: f64,
        #[serde(default = "one")]
        sigma2: f64,
        n: usize,
        delay: usize,
    },
}

fn check_alpha(alpha: f64) -> CliResult<()> {
    if alpha.is_nan() || alpha < 0.0 {
        return Err(CliError::validation("process.alpha", format!("{alpha} must be >= 0")));
    }
    Ok(())
}

fn check_sigma2(sigma2: f64, allow_zero: bool) -> CliResult<()> {
    let ok = sigma2.is_finite() && (sigma2 > 0.0 || (allow_zero && sigma2 == 0.0));
    if !ok {
        let bound = if allow_zero { ">= 0" } else { "> 0" };
        return Err(CliError::validation("process.sigma2", format!("{sigma2} must be finite and {bound}")));
    }
    Ok(())
}

fn check_positive(field: &str, v: usize) -> CliResult<()> {
    if v == 0 {
        return Err(CliError::validation(format!("process.{field}"), "must be >= 1"));
    }
    Ok(())
}

fn matrix(field: &str, rows: &[Vec<f64>]) -> CliResult<Matrix> {
    if rows.is_empty() {
        return Err(CliError::validation(format!("process.{field}"), "empty matrix"));
    }
    Matrix::from_rows(rows).map_err(|e| CliError::validation(format!("process.{field}"), e.to_string()))
}

fn cov_matrix(field: &str, rows: &[Vec<f64>]) -> CliResult<CovMatrix> {
    CovMatrix::new(matrix(field, rows)?).map_err(|e| CliError::validation(format!("process.{field}"), e.to_string()))
}

impl ProcessConfig {
    pub fn from_value(v: Value) -> CliResult<Self> {
        let cfg: ProcessConfig =
            serde_json::from_value(v).map_err(|e| CliError::validation("process", e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> CliResult<()> {
        match self {
            ProcessConfig::White { n, sigma2 } => {
                check_positive("n", *n)?;
                check_sigma2(*sigma2, true)
            }
            ProcessConfig::Markov1 { alpha, sigma2, n, .. }
            | ProcessConfig::Markov2 { alpha, sigma2, n, .. }
            | ProcessConfig::Markov2Exact { alpha, sigma2, n } => {
                check_positive("n", *n)?;
                check_alpha(*alpha)?;
                check_sigma2(*sigma2, false)
            }
            ProcessConfig::DelayedPair { alpha, sigma2, n, .. } => {
                check_positive("n", *n)?;
                check_alpha(*alpha)?;
                check_sigma2(*sigma2, false)
            }
            ProcessConfig::Covariance { cov, mean, draws } => {
                check_positive("draws", *draws)?;
                let c = cov_matrix("cov", cov)?;
                if let Some(m) = mean {
                    if m.len() != c.dim() {
                        return Err(CliError::validation(
                            "process.mean",
                            format!("length {} does not match cov dimension {}", m.len(), c.dim()),
                        ));
                    }
                }
                Ok(())
            }
            ProcessConfig::Pair { c_x1, c_x2, c_x1x2, draws } => {
                check_positive("draws", *draws)?;
                let (a, b) = (cov_matrix("c_x1", c_x1)?, cov_matrix("c_x2", c_x2)?);
                if a.dim() != b.dim() {
                    return Err(CliError::validation(
                        "process.c_x2",
                        format!("two-column output needs equal lengths, got {} and {}", a.dim(), b.dim()),
                    ));
                }
                let k = matrix("c_x1x2", c_x1x2)?;
                if k.rows() != a.dim() || k.cols() != b.dim() {
                    return Err(CliError::validation(
                        "process.c_x1x2",
                        format!("shape {}x{} does not match {}x{}", k.rows(), k.cols(), a.dim(), b.dim()),
                    ));
                }
                Ok(())
            }
        }
    }

    fn core_spec(&self) -> CliResult<ProcessSpec> {
        Ok(match *self {
            ProcessConfig::White { n, sigma2 } => ProcessSpec::White { n, sigma2 },
            ProcessConfig::Markov1 { alpha, sigma2, n, burn_in } => {
                ProcessSpec::Markov { params: MarkovParams::first(alpha, sigma2)?, n, burn_in }
            }
            ProcessConfig::Markov2 { alpha, sigma2, n, burn_in } => {
                ProcessSpec::Markov { params: MarkovParams::second(alpha, sigma2)?, n, burn_in }
            }
            ProcessConfig::Markov2Exact { alpha, sigma2, n } => ProcessSpec::Markov2Exact { alpha, sigma2, n },
            ProcessConfig::DelayedPair { order, alpha, sigma2, n, delay } => {
                let params = match order {
                    Order::First => MarkovParams::first(alpha, sigma2)?,
                    Order::Second => MarkovParams::second(alpha, sigma2)?,
                };
                ProcessSpec::DelayedPair { params, n, delay }
            }
            ProcessConfig::Covariance { .. } | ProcessConfig::Pair { .. } => unreachable!("sampled directly"),
        })
    }

    /// Draws the process and returns its CSV table.
    pub fn generate(&self, seed: u64) -> CliResult<Table> {
        match self {
            ProcessConfig::Covariance { cov, mean, draws } => {
                let c = cov_matrix("cov", cov)?;
                let mean = mean.clone().unwrap_or_else(|| vec![0.0; c.dim()]);
                let sampler = GaussianSampler::new(&c, &mean)?;
                let mut g = GaussianStream::new(seed);
                let mut out = vec![0.0; c.dim() * draws];
                let mut scratch = vec![0.0; c.dim()];
                for chunk in out.chunks_exact_mut(c.dim()) {
                    sampler.sample_into(&mut g, &mut scratch, chunk);
                }
                Ok(series_table(&out))
            }
            ProcessConfig::Pair { c_x1, c_x2, c_x1x2, draws } => {
                let spec = solve_pair_spec(
                    &cov_matrix("c_x1", c_x1)?,
                    &cov_matrix("c_x2", c_x2)?,
                    &matrix("c_x1x2", c_x1x2)?,
                )?;
                let (n1, n2) = (spec.n1(), spec.n2());
                let sampler = PairSampler::new(spec);
                let mut g = GaussianStream::new(seed);
                let (mut x1, mut x2) = (vec![0.0; n1 * draws], vec![0.0; n2 * draws]);
                for (a, b) in x1.chunks_exact_mut(n1).zip(x2.chunks_exact_mut(n2)) {
                    sampler.sample_into(&mut g, a, b);
                }
                Ok(pair_table(&x1, &x2))
            }
            _ => Ok(match generate(&self.core_spec()?, seed)? {
                Generated::Single(x) => series_table(x.samples()),
                Generated::Pair(a, b) => pair_table(a.samples(), b.samples()),
            }),
        }
    }
}
