//! Analysis subcommands over CSV input; each returns a JSON result object.

use std::path::PathBuf;

use clap::{Args, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};
use summoment_core::applications::{align_by_argmax, align_by_lambert, fit_2mp, lmmse_predict, markov2_fit_mse};
use summoment_core::moments::{
    autocov_est, central_moment, cosine_similarity, crosscov_est, general_moment, minkowski_distance,
    total_variation_sq, LagGuard,
};
use summoment_core::processes::Covariance;
use summoment_core::regression::{ls_fit, poly_ls_fit_points, split_gradient_bounds, split_ls_fit_with, DesignMatrix};
use summoment_core::summoments::{central_summoment, minkowski_summoment, summoment_l1};
use summoment_core::{Ensemble, Kernel, MarkovParams, MomentOrder};

use crate::csvio::Table;
use crate::error::{CliError, CliResult};

pub const RESULT_SCHEMA: &str = "summoment.result.v1";

/// `{schema, command, config, result}`.
pub fn envelope(command: &str, config: &impl Serialize, result: Value) -> CliResult<Value> {
    Ok(json!({
        "schema": RESULT_SCHEMA,
        "command": command,
        "config": serde_json::to_value(config)?,
        "result": result,
    }))
}

fn order(m: u32) -> CliResult<MomentOrder> {
    MomentOrder::new(m).map_err(|e| CliError::validation("m", e.to_string()))
}

fn mean_and_se(v: &[f64]) -> (f64, Option<f64>) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (mean, None);
    }
    let ss: f64 = v.iter().map(|x| (x - mean) * (x - mean)).sum();
    (mean, Some((ss / (n - 1.0) / n).sqrt()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stat {
    Mean,
    Var,
    General,
    Central,
    Autocov,
    Crosscov,
    Cosine,
    Minkowski,
    Tv,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct MomentsArgs {
    /// CSV input (`-` for stdin).
    pub input: PathBuf,
    #[arg(long, value_enum, default_value = "mean")]
    pub stat: Stat,
    /// Moment order.
    #[arg(long, default_value_t = 2)]
    pub m: u32,
    /// Lag for `autocov` / `crosscov`.
    #[arg(long, default_value_t = 0, allow_negative_numbers = true)]
    pub lag: i64,
    /// Divide central moments by `σ^m`.
    #[arg(long)]
    pub normalized: bool,
    /// Skip mean removal in lag estimators.
    #[arg(long)]
    pub no_demean: bool,
    /// Allow lags beyond N/10.
    #[arg(long)]
    pub unguarded: bool,
    /// Columns to use, comma separated; defaults to the first value column(s).
    #[arg(long, value_delimiter = ',')]
    pub columns: Vec<String>,
}

pub fn moments(a: &MomentsArgs) -> CliResult<Value> {
    let t = Table::read_path(&a.input)?;
    let m = order(a.m)?;
    let guard = if a.unguarded { LagGuard::Disabled } else { LagGuard::Enforced };
    let demean = !a.no_demean;
    let two = matches!(a.stat, Stat::Crosscov | Stat::Cosine | Stat::Minkowski);
    let cols = t.select(&a.columns, if two { 2 } else { 1 })?;
    let x = cols[0];
    let (value, se) = match a.stat {
        Stat::Mean => mean_and_se(x),
        Stat::General => {
            let v = general_moment(x, m)?;
            let p: Vec<f64> = x.iter().map(|xi| xi.powi(a.m as i32)).collect();
            (v, mean_and_se(&p).1)
        }
        Stat::Var => (central_moment(x, order(2)?, false)?, None),
        Stat::Central => (central_moment(x, m, a.normalized)?, None),
        Stat::Autocov => {
            let k = usize::try_from(a.lag).map_err(|_| CliError::validation("lag", "autocov lag must be >= 0"))?;
            (autocov_est(x, k, demean, guard)?, None)
        }
        Stat::Crosscov => (crosscov_est(x, cols[1], a.lag, demean, guard)?, None),
        Stat::Cosine => (cosine_similarity(x, cols[1])?, None),
        Stat::Minkowski => (minkowski_distance(x, cols[1], m)?, None),
        Stat::Tv => (total_variation_sq(x)?, None),
    };
    envelope("moments", a, json!({ "stat": a.stat, "value": value, "std_error": se, "n": x.len() }))
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SummomentArgs {
    /// CSV input; one row per trial, one value column per component.
    pub input: PathBuf,
    #[arg(long, default_value_t = 2)]
    pub m: u32,
    /// Center with known zero means instead of the column means.
    #[arg(long)]
    pub zero_mean: bool,
    #[arg(long, value_delimiter = ',')]
    pub columns: Vec<String>,
}

pub fn summoment(a: &SummomentArgs) -> CliResult<Value> {
    let t = Table::read_path(&a.input)?;
    let m = order(a.m)?;
    let names: Vec<String> = if a.columns.is_empty() {
        t.value_columns().into_iter().map(String::from).collect()
    } else {
        a.columns.clone()
    };
    let cols = t.select(&names, names.len())?;
    let rows: Vec<Vec<f64>> = (0..t.n_rows()).map(|i| cols.iter().map(|c| c[i]).collect()).collect();
    let e = Ensemble::from_rows(&rows)?;
    let means = if a.zero_mean { vec![0.0; e.dim()] } else { e.column_means() };
    let central = central_summoment(&e, m, Some(&means))?;
    let per_trial: Vec<f64> = e
        .rows()
        .map(|r| {
            let s: f64 = r.iter().zip(&means).map(|(x, mu)| x - mu).sum();
            s.abs().powi(a.m as i32)
        })
        .collect();
    let se = mean_and_se(&per_trial).1;
    envelope(
        "summoment",
        a,
        json!({
            "dim": e.dim(),
            "trials": e.trials(),
            "central": central,
            "central_std_error": se,
            "l1": summoment_l1(&e, m, true, Some(&means))?,
            "minkowski": minkowski_summoment(&e, m)?,
        }),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Ls,
    Split,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct RegressArgs {
    pub input: PathBuf,
    #[arg(long, value_enum, default_value = "ls")]
    pub method: Method,
    /// Polynomial degree (`ls` only).
    #[arg(long, default_value_t = 1)]
    pub degree: usize,
    /// Regressor column; defaults to `x`, then `index`.
    #[arg(long)]
    pub x: Option<String>,
    /// Response column; defaults to `y`, then `value`.
    #[arg(long)]
    pub y: Option<String>,
    /// Size of the lower subset (`split`); defaults to ceil(N/2).
    #[arg(long)]
    pub n1: Option<usize>,
    /// Noise variance for the gradient bounds (`split`).
    #[arg(long)]
    pub noise_var: Option<f64>,
    #[arg(long, default_value_t = 2.0)]
    pub xi: f64,
}

fn pick<'a>(t: &'a Table, given: &Option<String>, defaults: [&str; 2]) -> CliResult<&'a [f64]> {
    match given {
        Some(name) => t.column(name),
        None => t.column(defaults[0]).or_else(|_| t.column(defaults[1])),
    }
}

pub fn regress(a: &RegressArgs) -> CliResult<Value> {
    let t = Table::read_path(&a.input)?;
    let x = pick(&t, &a.x, ["x", "index"])?;
    let y = pick(&t, &a.y, ["y", "value"])?;
    let sse = |p: &[f64]| -> f64 {
        x.iter()
            .zip(y)
            .map(|(xi, yi)| {
                let f: f64 = p.iter().rev().fold(0.0, |acc, c| acc * xi + c);
                (yi - f) * (yi - f)
            })
            .sum()
    };
    let result = match a.method {
        Method::Ls => {
            let p = if a.degree == 1 {
                ls_fit(&DesignMatrix::straight_line(x)?, y)?
            } else {
                poly_ls_fit_points(x, y, a.degree)?.coeffs().to_vec()
            };
            json!({ "estimates": p, "sse": sse(&p) })
        }
        Method::Split => {
            let n1 = a.n1.unwrap_or(x.len().div_ceil(2));
            let fit = split_ls_fit_with(x, y, n1)?;
            let bounds = match a.noise_var {
                Some(v) => {
                    let b = split_gradient_bounds(&fit, v, a.xi)?;
                    json!({ "lower": b.lower, "upper": b.upper, "width": b.width })
                }
                None => Value::Null,
            };
            let av = fit.averaged;
            json!({
                "estimates": fit.estimates,
                "sse": sse(&fit.estimates),
                "n1": fit.lower.len(),
                "n2": fit.upper.len(),
                "averaged": { "x1": av.w12, "y1": av.y1, "x2": av.w22, "y2": av.y2 },
                "gradient_bounds": bounds,
            })
        }
    };
    envelope("regress", a, result)
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Fit2mpArgs {
    /// CSV with `lag` and `value` columns; must include lag 0.
    pub input: PathBuf,
    #[arg(long, default_value = "lag")]
    pub lag_column: String,
    #[arg(long, default_value = "value")]
    pub value_column: String,
}

pub fn fit2mp(a: &Fit2mpArgs) -> CliResult<Value> {
    let t = Table::read_path(&a.input)?;
    let lags_f = t.column(&a.lag_column)?;
    let lags: Vec<i64> = lags_f
        .iter()
        .map(|&l| {
            if l.fract() == 0.0 && l.abs() < 1e15 {
                Ok(l as i64)
            } else {
                Err(CliError::validation(a.lag_column.clone(), format!("lag {l} is not an integer")))
            }
        })
        .collect::<CliResult<_>>()?;
    let v = t.column(&a.value_column)?;
    let fit = fit_2mp(&lags, v)?;
    envelope(
        "fit2mp",
        a,
        json!({
            "alpha": fit.alpha,
            "alpha_lambert": fit.alpha_lambert,
            "peak": fit.peak,
            "mse_percent": markov2_fit_mse(&lags, v, fit.alpha)?,
        }),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelKind {
    White,
    Markov1,
    Markov2,
    MarkovMa,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PredictArgs {
    pub input: PathBuf,
    #[arg(long, value_enum, default_value = "markov1")]
    pub kernel: KernelKind,
    #[arg(long, default_value_t = 0.5)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    pub sigma2: f64,
    /// MA length for `markov-ma`.
    #[arg(long, default_value_t = 1)]
    pub taps: usize,
    #[arg(long)]
    pub column: Option<String>,
}

pub fn predict(a: &PredictArgs) -> CliResult<Value> {
    let t = Table::read_path(&a.input)?;
    let names: Vec<String> = a.column.iter().cloned().collect();
    let x = t.select(&names, 1)?[0];
    let kernel = match a.kernel {
        KernelKind::White => Kernel::White { sigma2: a.sigma2 },
        KernelKind::Markov1 => Kernel::Markov(MarkovParams::first(a.alpha, a.sigma2)?),
        KernelKind::Markov2 => Kernel::Markov(MarkovParams::second(a.alpha, a.sigma2)?),
        KernelKind::MarkovMa => {
            if a.taps == 0 {
                return Err(CliError::validation("taps", "must be >= 1"));
            }
            Kernel::MarkovMa { alpha: a.alpha, sigma2: a.sigma2, n_taps: a.taps }
        }
    };
    let pred = lmmse_predict(x, &kernel)?;
    let rho = kernel.at(1) / kernel.at(0);
    let mse = kernel.at(0) * (1.0 - rho * rho);
    envelope("predict", a, json!({ "prediction": pred, "coefficient": rho, "error_variance": mse, "n": x.len() }))
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct AlignArgs {
    /// CSV with two value columns.
    pub input: PathBuf,
    /// Search window for the cross-covariance peak; defaults to min(N/4, 200).
    #[arg(long)]
    pub max_lag: Option<usize>,
    /// Number of lags in the linearized fit.
    #[arg(long, default_value_t = 6)]
    pub k_max: usize,
    #[arg(long, value_delimiter = ',')]
    pub columns: Vec<String>,
}

pub fn align(a: &AlignArgs) -> CliResult<Value> {
    let t = Table::read_path(&a.input)?;
    let c = t.select(&a.columns, 2)?;
    let n = c[0].len();
    let max_lag = a.max_lag.unwrap_or((n / 4).min(200));
    let delta_hat = align_by_argmax(c[0], c[1], max_lag)?;
    let (lambert, lambert_error) = match align_by_lambert(c[0], c[1], a.k_max) {
        Ok(e) => (
            json!({ "delta": e.delta, "delta_hat": e.delta_hat, "alpha_hat": e.alpha_hat, "residual": e.residual }),
            Value::Null,
        ),
        Err(e) => (Value::Null, Value::String(e.to_string())),
    };
    envelope(
        "align",
        a,
        json!({ "delta_hat": delta_hat, "max_lag": max_lag, "lambert": lambert, "lambert_error": lambert_error }),
    )
}
