//! Figure tables: `fig2` split-fit excess error, `fig4` 2nd order Markov
//! sum-moments, `fig5` moment comparison on 1st order Markov data, `fig3` MA
//! filter fit error.

use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use summoment_core::applications::ma_fit_sweep;
use summoment_core::moments::Ensemble;
use summoment_core::processes::{kernel_to_cov, markov_ar_into};
use summoment_core::regression::{relative_excess_mse, split_ls_fit_with};
use summoment_core::rng::GaussianStream;
use summoment_core::summoments::{central_summoment, minkowski_summoment, summoment2_from_cov, summoment_l1};
use summoment_core::{Kernel, MarkovParams, MomentOrder};

use crate::csvio::Table;
use crate::error::{CliError, CliResult};
use crate::Runtime;

pub const EXPERIMENTS: [&str; 4] = ["fig2", "fig4", "fig5", "fig3"];

#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub id: &'static str,
    /// Fully resolved parameters.
    pub params: Value,
    pub table: Table,
    pub trials: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Fig2Params {
    pub p1: f64,
    pub p2: f64,
    pub noise_var: f64,
    pub n: usize,
    pub n1_min: usize,
    pub n1_max: usize,
    pub trials: usize,
}

impl Default for Fig2Params {
    fn default() -> Self {
        Fig2Params { p1: 1.5, p2: 0.3, noise_var: 1.0, n: 40, n1_min: 1, n1_max: 20, trials: 10_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Fig4Params {
    pub alphas: Vec<f64>,
    pub sigma2: f64,
    pub n_max: usize,
}

impl Default for Fig4Params {
    fn default() -> Self {
        Fig4Params { alphas: vec![0.2, 0.5, 0.8], sigma2: 1.0, n_max: 100 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Fig5Params {
    pub alphas: Vec<f64>,
    pub sigma2: f64,
    pub orders: Vec<u32>,
    pub n_max: usize,
    pub trials: usize,
}

impl Default for Fig5Params {
    fn default() -> Self {
        Fig5Params { alphas: vec![0.2, 0.5, 0.8], sigma2: 1.0, orders: vec![1, 2, 3], n_max: 30, trials: 4000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Fig3Params {
    pub alphas: Vec<f64>,
    pub n_x: Vec<usize>,
    pub n_min: usize,
    pub n_max: usize,
}

impl Default for Fig3Params {
    fn default() -> Self {
        Fig3Params { alphas: vec![0.1, 0.5, 0.9], n_x: vec![1, 2], n_min: 2, n_max: 32 }
    }
}

fn resolve<P: DeserializeOwned + Serialize>(id: &str, overrides: Value) -> CliResult<(P, Value)> {
    let overrides = if overrides.is_null() { Value::Object(Default::default()) } else { overrides };
    let p: P = serde_json::from_value(overrides).map_err(|e| CliError::validation(id, e.to_string()))?;
    let resolved = serde_json::to_value(&p)?;
    Ok((p, resolved))
}

fn invalid(id: &str, field: &str, msg: impl Into<String>) -> CliError {
    CliError::validation(format!("{id}.{field}"), msg)
}

fn check_alphas(id: &str, alphas: &[f64]) -> CliResult<()> {
    if alphas.is_empty() {
        return Err(invalid(id, "alphas", "must not be empty"));
    }
    if let Some(a) = alphas.iter().find(|a| !(a.is_finite() && **a > 0.0)) {
        return Err(invalid(id, "alphas", format!("{a} must be finite and > 0")));
    }
    Ok(())
}

fn check_variance(id: &str, field: &str, v: f64) -> CliResult<()> {
    if !(v.is_finite() && v > 0.0) {
        return Err(invalid(id, field, format!("{v} must be finite and > 0")));
    }
    Ok(())
}

/// Runs experiment `name` with parameter `overrides` (a JSON object).
pub fn run_experiment(name: &str, overrides: Value, rt: &Runtime) -> CliResult<ExperimentOutput> {
    match name {
        "fig2" => {
            let (p, params) = resolve::<Fig2Params>(name, overrides)?;
            Ok(ExperimentOutput { id: "fig2", table: fig2(&p, rt)?, params, trials: p.trials })
        }
        "fig4" => {
            let (p, params) = resolve::<Fig4Params>(name, overrides)?;
            Ok(ExperimentOutput { id: "fig4", table: fig4(&p)?, params, trials: 0 })
        }
        "fig5" => {
            let (p, params) = resolve::<Fig5Params>(name, overrides)?;
            Ok(ExperimentOutput { id: "fig5", table: fig5(&p, rt)?, params, trials: p.trials })
        }
        "fig3" => {
            let (p, params) = resolve::<Fig3Params>(name, overrides)?;
            Ok(ExperimentOutput { id: "fig3", table: fig3(&p, rt)?, params, trials: 0 })
        }
        other => Err(CliError::validation(
            "experiment",
            format!("unknown experiment {other:?}, expected one of {EXPERIMENTS:?}"),
        )),
    }
}

fn mean_std(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = v.iter().map(|x| (x - mean) * (x - mean)).sum();
    (mean, (ss / (n - 1.0)).sqrt())
}

/// `T = 100 (S_apr - S_opt)/S_opt` for `y = P₁ + P₂ x + e`, `x = 1..N`, split
/// at the lowest `N₁` points; the same noise draw is shared across `N₁`.
pub fn fig2(p: &Fig2Params, rt: &Runtime) -> CliResult<Table> {
    let id = "fig2";
    check_variance(id, "noise_var", p.noise_var)?;
    if !(p.p1.is_finite() && p.p2.is_finite()) {
        return Err(invalid(id, "p1", "parameters must be finite"));
    }
    if p.n < 2 {
        return Err(invalid(id, "n", "must be >= 2"));
    }
    if p.n1_min == 0 || p.n1_min > p.n1_max || p.n1_max >= p.n {
        return Err(invalid(id, "n1_max", format!("need 1 <= n1_min <= n1_max < n = {}", p.n)));
    }
    if p.trials < 2 {
        return Err(invalid(id, "trials", "must be >= 2"));
    }
    let x: Vec<f64> = (1..=p.n).map(|i| i as f64).collect();
    let sd = p.noise_var.sqrt();
    let splits: Vec<usize> = (p.n1_min..=p.n1_max).collect();
    let per_trial: Vec<Vec<f64>> = rt.pool()?.install(|| {
        (0..p.trials)
            .into_par_iter()
            .map(|t| {
                let mut g = GaussianStream::with_stream(rt.seed, t as u64);
                let y: Vec<f64> = x.iter().map(|xi| p.p1 + p.p2 * xi + sd * g.standard_normal()).collect();
                splits
                    .iter()
                    .map(|&n1| {
                        let fit = split_ls_fit_with(&x, &y, n1)?;
                        relative_excess_mse(&y, &x, fit.estimates, [p.p1, p.p2])
                    })
                    .collect::<summoment_core::Result<Vec<f64>>>()
            })
            .collect::<summoment_core::Result<Vec<_>>>()
    })?;
    let mut table = Table::new(vec!["N1".into(), "mean_T".into(), "std_T".into()]);
    let mut col = vec![0.0; p.trials];
    for (j, &n1) in splits.iter().enumerate() {
        for (c, t) in col.iter_mut().zip(&per_trial) {
            *c = t[j];
        }
        let (m, s) = mean_std(&col);
        table.push_row(&[n1 as f64, m, s]);
    }
    Ok(table)
}

/// Second central sum-moment (grand sum) of the 2nd order Markov Toeplitz
/// covariance for `N = 1..=n_max`.
pub fn fig4(p: &Fig4Params) -> CliResult<Table> {
    let id = "fig4";
    check_alphas(id, &p.alphas)?;
    check_variance(id, "sigma2", p.sigma2)?;
    if p.n_max == 0 {
        return Err(invalid(id, "n_max", "must be >= 1"));
    }
    let mut table = Table::new(vec!["N".into(), "alpha".into(), "summoment2".into()]);
    for &alpha in &p.alphas {
        let kernel = Kernel::Markov(MarkovParams::second(alpha, p.sigma2)?);
        for n in 1..=p.n_max {
            let cov = kernel_to_cov(&kernel, n)?;
            table.push_row(&[n as f64, alpha, summoment2_from_cov(&cov)]);
        }
    }
    Ok(table)
}

/// Mean Minkowski, central sum-moment and l1 sum-moment of 1st order Markov
/// vectors, each divided by `N`.
pub fn fig5(p: &Fig5Params, rt: &Runtime) -> CliResult<Table> {
    let id = "fig5";
    check_alphas(id, &p.alphas)?;
    check_variance(id, "sigma2", p.sigma2)?;
    if p.orders.is_empty() || p.orders.contains(&0) {
        return Err(invalid(id, "orders", "must be non-empty and >= 1"));
    }
    if p.n_max == 0 {
        return Err(invalid(id, "n_max", "must be >= 1"));
    }
    if p.trials < 2 {
        return Err(invalid(id, "trials", "must be >= 2"));
    }
    let orders: Vec<MomentOrder> = p.orders.iter().map(|&m| MomentOrder::new(m)).collect::<Result<_, _>>()?;
    let pool = rt.pool()?;
    let mut table =
        Table::new(["N", "alpha", "m", "minkowski", "summoment", "summoment_l1"].map(String::from).to_vec());
    let mut block = 0u64;
    for &alpha in &p.alphas {
        let params = MarkovParams::first(alpha, p.sigma2)?;
        for n in 1..=p.n_max {
            let base = block << 32;
            block += 1;
            let rows: Vec<Vec<f64>> = pool.install(|| {
                (0..p.trials as u64)
                    .into_par_iter()
                    .map(|t| {
                        let mut g = GaussianStream::with_stream(rt.seed, base | t);
                        let mut x = vec![0.0; n];
                        markov_ar_into(&params, &mut g, None, &mut x).map(|()| x)
                    })
                    .collect::<summoment_core::Result<Vec<_>>>()
            })?;
            let e = Ensemble::from_rows(&rows)?;
            let nf = n as f64;
            for &m in &orders {
                table.push_row(&[
                    nf,
                    alpha,
                    m.get() as f64,
                    minkowski_summoment(&e, m)? / nf,
                    central_summoment(&e, m, None)? / nf,
                    summoment_l1(&e, m, true, None)? / nf,
                ]);
            }
        }
    }
    Ok(table)
}

/// Percent MSE of the 2nd order Markov fit to the MA-filtered 1st order
/// Markov covariance over the filter lengths `n_min..=n_max`.
pub fn fig3(p: &Fig3Params, rt: &Runtime) -> CliResult<Table> {
    let id = "fig3";
    check_alphas(id, &p.alphas)?;
    if p.n_x.is_empty() || p.n_x.contains(&0) {
        return Err(invalid(id, "n_x", "must be non-empty and >= 1"));
    }
    if p.n_min == 0 || p.n_min > p.n_max {
        return Err(invalid(id, "n_max", "need 1 <= n_min <= n_max"));
    }
    let cases: Vec<(f64, usize)> = p.alphas.iter().flat_map(|&a| p.n_x.iter().map(move |&nx| (a, nx))).collect();
    let sweeps = rt.pool()?.install(|| {
        cases
            .par_iter()
            .map(|&(alpha, nx)| ma_fit_sweep(alpha, nx, p.n_min..=p.n_max))
            .collect::<summoment_core::Result<Vec<_>>>()
    })?;
    let mut table = Table::new(vec!["N".into(), "alpha".into(), "n_x".into(), "mse_percent".into()]);
    for (&(alpha, nx), sweep) in cases.iter().zip(&sweeps) {
        for pt in sweep {
            table.push_row(&[pt.n_taps as f64, alpha, nx as f64, pt.mse_percent]);
        }
    }
    Ok(table)
}
