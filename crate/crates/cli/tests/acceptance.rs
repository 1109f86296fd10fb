//! End-to-end acceptance checks, one line per criterion.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use summoment_cli::experiments::{fig2, fig4, Fig2Params, Fig4Params};
use summoment_cli::Runtime;
use summoment_core::applications::{
    align_by_lambert, align_from_normalized, cov_1mp_ma, lmmse_predict, ma_fit_sweep, markov2_shifted,
};
use summoment_core::moments::{autocov_est, minkowski_distance, LagGuard};
use summoment_core::processes::{
    filter_cov, gen_markov_ar, generate, kernel_to_cov, markov_ar_into, solve_pair_spec, GaussianSampler, Generated,
    PairSampler, ProcessSpec,
};
use summoment_core::regression::split_ls_fit_with;
use summoment_core::rng::GaussianStream;
use summoment_core::specfun::{lambert_w_m1, BRANCH_POINT};
use summoment_core::summoments::{central_summoment, gaussian_summoment_closed, multinomial_expand_check};
use summoment_core::{CovMatrix, Ensemble, Kernel, MarkovParams, Matrix, MomentOrder};

type Outcome = Result<String, String>;
type Criterion = (u32, &'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit_s: f64) -> Result<(), String> {
    ensure(elapsed.as_secs_f64() < limit_s, || format!("took {:.2}s, limit {limit_s}s", elapsed.as_secs_f64()))
}

fn m(k: u32) -> MomentOrder {
    MomentOrder::new(k).unwrap()
}

/// `A Aᵀ / d` for a Gaussian `d × d` matrix `A`.
fn seeded_cov(seed: u64, dim: usize) -> CovMatrix {
    let mut g = GaussianStream::with_stream(seed, 0xC0);
    let a = Matrix::from_fn(dim, dim, |_, _| g.standard_normal());
    CovMatrix::new(a.gram().scale(1.0 / dim as f64)).unwrap()
}

/// `trials` draws of `N(0, cov)`, drawn in parallel blocks with one stream
/// per block.
fn draws(cov: &CovMatrix, trials: usize, seed: u64) -> Ensemble {
    const BLOCK: usize = 4096;
    let sampler = GaussianSampler::centered(cov);
    let d = cov.dim();
    let blocks: Vec<Vec<f64>> = (0..trials.div_ceil(BLOCK))
        .into_par_iter()
        .map(|b| {
            let rows = BLOCK.min(trials - b * BLOCK);
            let mut g = GaussianStream::with_stream(seed, b as u64);
            let mut scratch = vec![0.0; d];
            let mut out = vec![0.0; rows * d];
            for chunk in out.chunks_exact_mut(d) {
                sampler.sample_into(&mut g, &mut scratch, chunk);
            }
            out
        })
        .collect();
    Ensemble::new(d, blocks.concat()).unwrap()
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let trials = 200_000;
    let results: Vec<(f64, f64, f64)> = (0..50u64)
        .map(|i| {
            let dim = 2 + (i as usize % 7);
            let cov = seeded_cov(1000 + i, dim);
            let e = draws(&cov, trials, 7000 + i);
            let est = central_summoment(&e, m(2), None).unwrap();
            let means = e.column_means();
            let s: Vec<f64> =
                e.rows().map(|r| r.iter().zip(&means).map(|(x, mu)| x - mu).sum::<f64>().powi(2)).collect();
            let mu = s.iter().sum::<f64>() / trials as f64;
            let var = s.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / (trials as f64 - 1.0);
            (est, cov.grand_sum(), (var / trials as f64).sqrt())
        })
        .collect();
    let worst = results.iter().map(|(e, g, se)| (e - g).abs() / se).fold(0.0, f64::max);
    ensure(worst <= 4.0, || format!("max deviation {worst:.2} standard errors"))?;
    within(start.elapsed(), 60.0)?;
    Ok(format!("50 matrices, max |z| = {worst:.2}, {:.1}s", start.elapsed().as_secs_f64()))
}

fn criterion_2() -> Outcome {
    let mut worst_rel: f64 = 0.0;
    let mut worst_det: f64 = 0.0;
    for i in 0..10u64 {
        let dim = 2 + (i as usize % 5);
        let cov = seeded_cov(2000 + i, dim);
        let closed2 = gaussian_summoment_closed(&cov, m(2));
        let det = (closed2 - cov.grand_sum()).abs() / cov.grand_sum();
        worst_det = worst_det.max(det);
        let e = draws(&cov, 1_000_000, 9000 + i);
        let zero = vec![0.0; dim];
        for k in 1..=4 {
            let mc = central_summoment(&e, m(k), Some(&zero)).unwrap();
            let closed = gaussian_summoment_closed(&cov, m(k));
            worst_rel = worst_rel.max((mc - closed).abs() / closed);
        }
    }
    ensure(worst_det <= 1e-10, || format!("m=2 closed form vs grand sum: {worst_det:e}"))?;
    ensure(worst_rel <= 0.02, || format!("max relative deviation {worst_rel:.4}"))?;
    Ok(format!("max rel dev {:.3}%, m=2 identity {worst_det:.1e}", 100.0 * worst_rel))
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let p = Fig4Params::default();
    let t = fig4(&p).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let n = p.n_max;
    let curves: Vec<&[f64]> = t.columns[2].chunks(n).collect();
    for (a, c) in p.alphas.iter().zip(&curves) {
        ensure(c.windows(2).all(|w| w[1] > w[0]), || format!("alpha {a}: not strictly increasing in N"))?;
    }
    // alphas ascending = correlation e^{-α} descending.
    for i in 1..n {
        for w in curves.windows(2) {
            ensure(w[0][i] > w[1][i], || format!("N = {}: not increasing in correlation", i + 1))?;
        }
    }
    within(elapsed, 1.0)?;
    Ok(format!("{} rows, {:.0} ms", t.n_rows(), elapsed.as_secs_f64() * 1e3))
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let p = Fig2Params::default();
    let rt = Runtime { seed: 41, jobs: None, deterministic: false };
    let t = fig2(&p, &rt).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let mean_at = |n1: f64| t.columns[0].iter().position(|&v| v == n1).map(|i| t.columns[1][i]).unwrap();
    let at20 = mean_at(20.0);
    let low = (1..=4).map(|k| mean_at(k as f64)).fold(f64::INFINITY, f64::min);
    ensure(at20 < low, || format!("mean T at N1=20 ({at20:.3}) not below N1<=4 minimum ({low:.3})"))?;
    ensure(at20 < 10.0, || format!("mean T at N1=20 is {at20:.3}%"))?;
    within(elapsed, 30.0)?;
    Ok(format!("mean T(20) = {at20:.3}%, min over N1<=4 = {low:.3}%, {:.1}s", elapsed.as_secs_f64()))
}

fn criterion_5() -> Outcome {
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut found = Vec::new();
    for alpha in [0.1, 0.5, 0.9] {
        for nx in [1, 2] {
            let sweep = ma_fit_sweep(alpha, nx, 2..=32).map_err(|e| e.to_string())?;
            let (i, best) =
                sweep.iter().enumerate().min_by(|a, b| a.1.mse_percent.total_cmp(&b.1.mse_percent)).unwrap();
            if i == 0 || i + 1 == sweep.len() {
                failures.push(format!("(alpha {alpha}, n_x {nx}) minimum at edge N = {}", best.n_taps));
            } else {
                found.push(format!("({alpha},{nx})->N={}", best.n_taps));
            }
        }
    }
    within(start.elapsed(), 10.0)?;
    ensure(failures.is_empty(), || format!("{}; interior: {}", failures.join(", "), found.join(" ")))?;
    Ok(format!("interior minima {}", found.join(" ")))
}

/// Bartlett variance of the lag-`k` autocovariance estimate for a kernel.
fn bartlett_se(c: impl Fn(i64) -> f64, k: i64, n: usize) -> f64 {
    let j_max = 20_000;
    let s: f64 = (-j_max..=j_max).map(|j| c(j) * c(j) + c(j + k) * c(j - k)).sum();
    (s / n as f64).sqrt()
}

fn criterion_6() -> Outcome {
    let n = 1_000_000;
    let mut worst: f64 = 0.0;
    for (i, alpha) in [0.2, 0.5, 0.8].into_iter().enumerate() {
        let p = MarkovParams::first(alpha, 1.0).unwrap();
        let x = gen_markov_ar(&p, n, 600 + i as u64, None).unwrap();
        for k in 0..=3usize {
            let est = autocov_est(x.samples(), k, true, LagGuard::Enforced).unwrap();
            let se = bartlett_se(|j| p.cov(j), k as i64, n);
            worst = worst.max((est - p.cov(k as i64)).abs() / se);
        }
    }
    ensure(worst <= 3.0, || format!("autocovariance off by {worst:.2} standard errors"))?;

    let joint = kernel_to_cov(&Kernel::Markov(MarkovParams::second(0.4, 1.0).unwrap()), 10).unwrap();
    let j = joint.entries();
    let block = |r0: usize, c0: usize| Matrix::from_fn(5, 5, |r, c| j[(r0 + r, c0 + c)]);
    let (c1, c2, c12) = (block(0, 0), block(5, 5), block(0, 5));
    let spec = solve_pair_spec(&CovMatrix::new(c1.clone()).unwrap(), &CovMatrix::new(c2.clone()).unwrap(), &c12)
        .map_err(|e| e.to_string())?;
    let sampler = PairSampler::new(spec);
    let draws = 200_000usize;
    let chunks = 50usize;
    let sums: Vec<[Matrix; 3]> = (0..chunks)
        .into_par_iter()
        .map(|b| {
            let mut g = GaussianStream::with_stream(77, b as u64);
            let mut acc = [Matrix::zeros(5, 5), Matrix::zeros(5, 5), Matrix::zeros(5, 5)];
            let (mut x1, mut x2) = (vec![0.0; 5], vec![0.0; 5]);
            for _ in 0..draws / chunks {
                sampler.sample_into(&mut g, &mut x1, &mut x2);
                for r in 0..5 {
                    for c in 0..5 {
                        acc[0][(r, c)] += x1[r] * x1[c];
                        acc[1][(r, c)] += x2[r] * x2[c];
                        acc[2][(r, c)] += x1[r] * x2[c];
                    }
                }
            }
            acc
        })
        .collect();
    let mut rel = [0.0f64; 3];
    for (i, target) in [&c1, &c2, &c12].into_iter().enumerate() {
        let mut est = Matrix::zeros(5, 5);
        for s in &sums {
            est = est.add(&s[i]).unwrap();
        }
        let est = est.scale(1.0 / draws as f64);
        rel[i] = est.sub(target).unwrap().frobenius() / target.frobenius();
    }
    let worst_block = rel.iter().copied().fold(0.0, f64::max);
    ensure(worst_block <= 0.03, || format!("pair blocks relative Frobenius errors {rel:?}"))?;
    Ok(format!("autocov max |z| = {worst:.2}; pair blocks rel err {:.2}%", 100.0 * worst_block))
}

fn criterion_7() -> Outcome {
    let mut worst_res: f64 = 0.0;
    for i in 0..1000 {
        let x = if i < 500 {
            BRANCH_POINT * (1.0 - i as f64 / 500.0 * 0.999)
        } else {
            let t = (i - 500) as f64 / 499.0;
            BRANCH_POINT * 1e-3 * 10f64.powf(-297.0 * t)
        };
        let w = lambert_w_m1(x).map_err(|e| format!("W(-1)({x:e}): {e}"))?;
        worst_res = worst_res.max((w * w.exp() - x).abs() / x.abs());
    }
    ensure(worst_res <= 1e-12, || format!("Lambert residual {worst_res:e}"))?;

    let exact = align_from_normalized(&markov2_shifted(0.25, 4.0, 10)).map_err(|e| e.to_string())?;
    ensure((exact.alpha_hat - 0.25).abs() <= 1e-8 && (exact.delta - 4.0).abs() <= 1e-8, || {
        format!("exact model: alpha {} delta {}", exact.alpha_hat, exact.delta)
    })?;

    let params = MarkovParams::second(0.3, 1.0).unwrap();
    let hits: Vec<bool> = (0..200u64)
        .into_par_iter()
        .map(|t| {
            let spec = ProcessSpec::DelayedPair { params, n: 100_000, delay: 5 };
            let Ok(Generated::Pair(x1, x2)) = generate(&spec, 31_000 + t) else { return false };
            match align_by_lambert(x1.samples(), x2.samples(), 6) {
                Ok(e) => (e.alpha_hat - 0.3).abs() <= 0.03 && (e.delta - 5.0).abs() <= 0.5,
                Err(_) => false,
            }
        })
        .collect();
    let rate = hits.iter().filter(|&&h| h).count() as f64 / hits.len() as f64;
    ensure(rate >= 0.9, || format!("generated pairs: success rate {:.1}%", 100.0 * rate))?;
    Ok(format!("residual {worst_res:.1e}, exact fit ok, success rate {:.1}%", 100.0 * rate))
}

fn criterion_8() -> Outcome {
    let mut g = GaussianStream::new(808);
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(p, q)| p * q).sum::<f64>();
    for _ in 0..1000 {
        let x: Vec<f64> = (0..8).map(|_| g.standard_normal()).collect();
        let y: Vec<f64> = (0..8).map(|_| g.standard_normal()).collect();
        let d = minkowski_distance(&x, &y, m(2)).unwrap();
        let s: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a + b).collect();
        let lhs = d * d + dot(&s, &s);
        let rhs = 2.0 * dot(&x, &x) + 2.0 * dot(&y, &y);
        ensure((lhs - rhs).abs() <= 1e-10 * rhs, || format!("parallelogram: {lhs} vs {rhs}"))?;
    }

    let x: Vec<f64> = (1..=40).map(f64::from).collect();
    let mut fits = 0;
    for _ in 0..200 {
        let y: Vec<f64> = x.iter().map(|v| 1.5 + 0.3 * v + g.standard_normal()).collect();
        let (sx, sy): (f64, f64) = (x.iter().sum(), y.iter().sum());
        for n1 in 1..40 {
            let r = split_ls_fit_with(&x, &y, n1).unwrap();
            let p = r.averaged;
            let e1 = (p.a1 * p.w11 + p.a2 * p.w21 - 40.0).abs() / 40.0;
            let e2 = (p.a1 * p.w12 + p.a2 * p.w22 - sx).abs() / sx.abs();
            let e3 = (p.a1 * p.y1 + p.a2 * p.y2 - sy).abs() / sy.abs().max(1.0);
            ensure(e1.max(e2).max(e3) <= 1e-10, || format!("split consistency at N1 = {n1}: {e1:e} {e2:e} {e3:e}"))?;
            fits += 1;
        }
    }

    for alpha in [0.1, 0.5, 0.9] {
        let kernel = Kernel::Markov(MarkovParams::first(alpha, 1.3).unwrap());
        for n in [1usize, 2, 5, 16, 32] {
            let ones = vec![1.0; n];
            for k in -(3 * n as i64)..=(3 * n as i64) {
                let a = filter_cov(&kernel, &ones, k);
                let b = cov_1mp_ma(alpha, 1.3, n, k);
                ensure((a - b).abs() <= 1e-12 * b.abs().max(1.0), || format!("filter_cov mismatch {a} vs {b}"))?;
            }
        }
    }

    for dim in 1..=4 {
        for k in 1..=4 {
            for _ in 0..20 {
                let x: Vec<f64> = (0..dim).map(|_| g.standard_normal()).collect();
                let (lhs, rhs) = multinomial_expand_check(&x, m(k)).unwrap();
                let scale: f64 = x.iter().map(|v| v.abs()).sum::<f64>().powi(k as i32).max(1e-300);
                ensure((lhs - rhs).abs() <= 1e-10 * scale, || format!("multinomial dim {dim} m {k}: {lhs} vs {rhs}"))?;
            }
        }
    }
    Ok(format!("1000 parallelogram draws, {fits} split fits, filter and multinomial identities hold"))
}

fn criterion_9() -> Outcome {
    let sequences = 100_000u64;
    let len = 16;
    let mut worst: f64 = 0.0;
    for alpha in [0.3, 0.7] {
        let p = MarkovParams::first(alpha, 1.0).unwrap();
        let kernel = Kernel::Markov(p);
        let sq: Vec<f64> = (0..sequences)
            .into_par_iter()
            .map(|s| {
                let mut g = GaussianStream::with_stream(909, s);
                let mut x = vec![0.0; len + 1];
                markov_ar_into(&p, &mut g, None, &mut x).unwrap();
                let pred = lmmse_predict(&x[..len], &kernel).unwrap();
                (x[len] - pred).powi(2)
            })
            .collect();
        let mse = sq.iter().sum::<f64>() / sequences as f64;
        let theory = 1.0 - (-2.0 * alpha).exp();
        let rel = (mse - theory).abs() / theory;
        worst = worst.max(rel);
        ensure(rel <= 0.02, || format!("alpha {alpha}: mse {mse:.5} vs {theory:.5}"))?;
    }
    Ok(format!("max rel deviation {:.2}%", 100.0 * worst))
}

fn criterion_10() -> Outcome {
    let dir = tempfile::TempDir::new().map_err(|e| e.to_string())?;
    let runs: [(&str, &[&str]); 4] = [
        ("fig2", &["--trials", "2000"]),
        ("fig4", &[]),
        ("fig5", &["--trials", "500", "--set", "n_max=8"]),
        ("fig3", &["--set", "n_max=12"]),
    ];
    for (name, extra) in runs {
        let mut outputs = Vec::new();
        for (rep, jobs) in [(0, "1"), (1, "3")] {
            let out = dir.path().join(format!("{name}-{rep}"));
            let status = Command::new(env!("CARGO_BIN_EXE_summoment"))
                .args(["experiment", name, "--seed", "1234", "--deterministic", "--jobs", jobs, "--out"])
                .arg(&out)
                .args(extra)
                .output()
                .map_err(|e| e.to_string())?;
            ensure(status.status.success(), || format!("{name}: {}", String::from_utf8_lossy(&status.stderr)))?;
            outputs.push(std::fs::read(out.join(format!("{name}.csv"))).map_err(|e| e.to_string())?);
        }
        ensure(outputs[0] == outputs[1], || format!("{name}: CSV output differs between runs"))?;
    }
    Ok("fig2, fig4, fig5, fig3 byte-identical across reruns".into())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        (1, "sum-moment equals grand covariance sum", criterion_1),
        (2, "Gaussian closed form", criterion_2),
        (3, "fig4 monotonicity", criterion_3),
        (4, "fig2 trend", criterion_4),
        (5, "fig3 interior minimum", criterion_5),
        (6, "generator fidelity", criterion_6),
        (7, "Lambert W and alignment", criterion_7),
        (8, "deterministic identities", criterion_8),
        (9, "LMMSE prediction error", criterion_9),
        (10, "reproducibility", criterion_10),
    ];
    let mut failed = 0;
    for (n, name, f) in criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {n:>2} PASS  {name}: {detail} [{secs:.1}s]"),
            Err(detail) => {
                failed += 1;
                println!("criterion {n:>2} FAIL  {name}: {detail} [{secs:.1}s]");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criterion/criteria failed");
        ExitCode::FAILURE
    }
}
