//! Acceptance checks, one line of output per criterion.
//!
//! Criterion 2 runs at full scale and is skipped unless `MISSREG_PAPER_SCALE=1`.

use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

use missreg::experiments::{
    format_dat, format_pivotal_dat, run_fig1, run_fig2_ar1, run_fig3_banded, run_mnar_demo, run_sqrt_cells,
    run_sqrt_pivotality, ExperimentConfig, ExperimentKind,
};
use missreg::impute::{
    ar1_impute, estimate_covariance_mcar, estimate_phi, graphical_impute, markov_blanket, Ar1Params,
    CovarianceSource,
};
use missreg::solvers::{fit_lasso, lambda_value, LambdaSchedule, ScheduleInputs, ScheduleKind};
use missreg::synth::{self, BandedModel};
use missreg::{ImputedMatrix, MaskedMatrix, RegressionProblem, RngSeed, SparsityGraph};
use missreg_oracles::{
    blanket_tree_simulator, dense_conditional_mean, exhaustive_blanket, prox_grad_lasso, TreeVariant,
};
use nalgebra::DMatrix;
use rand::Rng;

type Outcome = Result<String, String>;
type Criterion = (u32, &'static str, fn() -> Outcome);

fn check(cond: bool, detail: String) -> Outcome {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn c1_fig1_scaling() -> Outcome {
    let mut cfg = ExperimentConfig::desk(ExperimentKind::Fig1IdentityMcar);
    cfg.alpha_grid = vec![0.6, 0.7, 0.8, 0.9];
    let rows = run_fig1(&cfg).map_err(|e| e.to_string())?;
    let ratios: Vec<f64> = rows
        .iter()
        .map(|r| r.err / ((1.0 - r.alpha) / r.alpha).sqrt())
        .collect();
    let hi = ratios.iter().copied().fold(f64::MIN, f64::max);
    let lo = ratios.iter().copied().fold(f64::MAX, f64::min);
    let decreasing = rows.windows(2).all(|w| w[1].err < w[0].err);
    let errs: Vec<String> = rows.iter().map(|r| format!("{:.3}", r.err)).collect();
    check(
        hi / lo <= 2.0 && decreasing,
        format!(
            "err [{}], ratio spread {:.3}, decreasing {decreasing}",
            errs.join(", "),
            hi / lo
        ),
    )
}

fn c2_paper_scale() -> Outcome {
    let mut cfg = ExperimentConfig::desk(ExperimentKind::Fig1IdentityMcar).paper_scale();
    cfg.alpha_grid = vec![0.9];
    let rows = run_fig1(&cfg).map_err(|e| e.to_string())?;
    let curve = (35.0 * 1200f64.ln() / 1000.0).sqrt() * (0.1f64 / 0.9).sqrt();
    let ratio = rows[0].err / curve;
    check(
        (0.5..=2.0).contains(&ratio),
        format!(
            "err {:.4} vs curve {:.4} (ratio {:.2})",
            rows[0].err, curve, ratio
        ),
    )
}

fn c3_lasso_vs_ista() -> Outcome {
    let mut rng = RngSeed(3).rng();
    let mut worst_obj = 0.0_f64;
    let mut worst_kkt = 0.0_f64;
    for case in 0..200 {
        let p = rng.random_range(2..=12);
        let n = rng.random_range(5..=40);
        let x = synth::gen_identity_gaussian(n, p, RngSeed(1000 + case)).unwrap();
        let y = synth::gen_standard_normal(n, RngSeed(5000 + case));
        let lambda = 10f64.powf(rng.random_range(-3.0..=0.0));
        let problem = RegressionProblem::new(ImputedMatrix::complete(x).unwrap(), y, lambda).unwrap();
        let fit = fit_lasso(&problem).map_err(|e| e.to_string())?;
        let oracle = prox_grad_lasso(&problem, 2_000_000);
        worst_obj = worst_obj.max((fit.objective - oracle.objective).abs());
        worst_kkt = worst_kkt.max(fit.kkt_residual);
    }
    check(
        worst_obj <= 1e-8 && worst_kkt <= 1e-8,
        format!("max |obj - ista| {worst_obj:.2e}, max kkt {worst_kkt:.2e}"),
    )
}

fn c4_ar1_exact() -> Outcome {
    let mut rng = RngSeed(4).rng();
    let mut worst = 0.0_f64;
    let mut boundary = 0;
    let mut runs = 0;
    for case in 0..100 {
        let p = rng.random_range(2..=12);
        let phi = rng.random_range(-0.95..0.95);
        let values = synth::gen_standard_normal(p, RngSeed(400 + case));
        let mut mask: Vec<bool> = (0..p).map(|_| rng.random::<f64>() < 0.5).collect();
        match case % 4 {
            0 => mask[0] = false,
            1 => mask[p - 1] = false,
            _ => {}
        }
        if !mask[0] || !mask[p - 1] {
            boundary += 1;
        }
        if mask.windows(2).any(|w| !w[0] && !w[1]) {
            runs += 1;
        }
        let row: Vec<Option<f64>> = (0..p).map(|j| mask[j].then_some(values[j])).collect();
        let z = MaskedMatrix::from_rows(&[row]).unwrap();
        let imputed = ar1_impute(&z, Ar1Params::known(phi).unwrap()).map_err(|e| e.to_string())?;
        let sigma = synth::ar1_covariance(p, phi).unwrap();
        for k in (0..p).filter(|&k| !mask[k]) {
            let want =
                dense_conditional_mean(&sigma, values.as_slice(), &mask, k).map_err(|e| e.to_string())?;
            worst = worst.max((imputed.data()[(0, k)] - want).abs());
        }
    }
    check(
        worst <= 1e-10,
        format!("max deviation {worst:.2e} ({boundary} boundary, {runs} consecutive-missing cases)"),
    )
}

fn c5_phi_consistency() -> Outcome {
    let (phi, alpha) = (0.3, 0.8);
    let mut good = 0;
    let mut worst = 0.0_f64;
    for s in 0..100 {
        let seed = RngSeed(500).derive(s);
        let x = synth::gen_ar1(2000, 200, phi, seed.derive(0)).unwrap();
        let z = synth::apply_mcar(&x, alpha, seed.derive(1)).unwrap();
        let est = estimate_phi(&z, alpha).map_err(|e| e.to_string())?.phi();
        let dev = (est - phi).abs();
        worst = worst.max(dev);
        if dev < 0.02 {
            good += 1;
        }
    }
    check(
        good >= 95,
        format!("{good}/100 seeds within 0.02 (worst {worst:.4})"),
    )
}

fn c6_blanket_equivalence() -> Outcome {
    let mut compared = 0;
    let mut compare = |g: &SparsityGraph, mask: &[bool]| -> Result<(), String> {
        for k in (0..g.p()).filter(|&k| !mask[k]) {
            let bfs = markov_blanket(g, mask, k).map_err(|e| e.to_string())?.blanket;
            let paths: Vec<usize> = exhaustive_blanket(g, mask, k).into_iter().collect();
            if bfs != paths {
                return Err(format!("node {k}, mask {mask:?}: bfs {bfs:?} vs paths {paths:?}"));
            }
            compared += 1;
        }
        Ok(())
    };
    for p in 1..=6 {
        let g = SparsityGraph::chain(p);
        for bits in 0u32..(1 << p) {
            let mask: Vec<bool> = (0..p).map(|j| bits >> j & 1 == 1).collect();
            compare(&g, &mask)?;
        }
    }
    let mut rng = RngSeed(6).rng();
    for _ in 0..1000 {
        let p = rng.random_range(2..=12);
        let bw = rng.random_range(1..=3);
        let edges: Vec<(usize, usize)> = SparsityGraph::banded(p, bw)
            .edges()
            .filter(|_| rng.random::<f64>() < 0.7)
            .collect();
        let g = SparsityGraph::from_edges(p, edges).unwrap();
        let alpha = rng.random_range(0.1..0.9);
        let mask: Vec<bool> = (0..p).map(|_| rng.random::<f64>() < alpha).collect();
        compare(&g, &mask)?;
    }
    Ok(format!("{compared} (graph, mask, node) triples agree"))
}

fn c7_blanket_separation() -> Outcome {
    let mut rng = RngSeed(7).rng();
    let mut worst = 0.0_f64;
    let mut done = 0;
    while done < 100 {
        let p = rng.random_range(2..=15);
        let bw = rng.random_range(1..=3);
        let phi = rng.random_range(0.05..0.3);
        let Ok(model) = BandedModel::new(p, phi, bw) else {
            continue;
        };
        let x = model.sample(4, RngSeed(700 + done)).unwrap();
        let z = synth::apply_mcar(&x, rng.random_range(0.2..0.9), RngSeed(800 + done)).unwrap();
        let imputed = graphical_impute(&z, &model.graph, CovarianceSource::Exact(&model.sigma))
            .map_err(|e| e.to_string())?;
        for i in 0..z.nrows() {
            let mask = z.mask_row(i);
            let row: Vec<f64> = (0..p).map(|j| z.observed(i, j).unwrap_or(0.0)).collect();
            for k in (0..p).filter(|&k| !mask[k]) {
                let want = dense_conditional_mean(&model.sigma, &row, &mask, k).map_err(|e| e.to_string())?;
                worst = worst.max((imputed.data()[(i, k)] - want).abs());
            }
        }
        done += 1;
    }
    check(
        worst <= 1e-8,
        format!("max deviation {worst:.2e} over 100 instances"),
    )
}

fn c8_covariance_unbiased() -> Outcome {
    let (p, n, alpha, reps) = (5, 100_000, 0.7, 50);
    let mut sum = DMatrix::<f64>::zeros(p, p);
    let mut sum_sq = DMatrix::<f64>::zeros(p, p);
    for r in 0..reps {
        let seed = RngSeed(800).derive(r);
        let x = synth::gen_identity_gaussian(n, p, seed.derive(0)).unwrap();
        let z = synth::apply_mcar(&x, alpha, seed.derive(1)).unwrap();
        let est = estimate_covariance_mcar(&z, alpha)
            .map_err(|e| e.to_string())?
            .sigma_tilde;
        sum += &est;
        sum_sq += est.component_mul(&est);
    }
    let m = reps as f64;
    let mut worst_z = 0.0_f64;
    for a in 0..p {
        for b in 0..p {
            let mean = sum[(a, b)] / m;
            let var = (sum_sq[(a, b)] / m - mean * mean) * m / (m - 1.0);
            let se = (var / m).sqrt();
            let target = if a == b { 1.0 } else { 0.0 };
            worst_z = worst_z.max((mean - target).abs() / se);
        }
    }
    check(worst_z <= 3.0, format!("largest |mean - I| / se = {worst_z:.2}"))
}

fn c9_sqrt_pivotal() -> Outcome {
    let mut bits = Vec::new();
    for sigma in [0.1, 1.0] {
        for radius in [1.0, 5.0] {
            let inputs = ScheduleInputs {
                n: 400,
                p: 480,
                sigma: Some(sigma),
                radius: Some(radius),
                sigma_x: Some(1.0),
                alpha: Some(0.8),
                ..Default::default()
            };
            let v = lambda_value(&LambdaSchedule::new(ScheduleKind::SqrtLassoPivotal, inputs))
                .map_err(|e| e.to_string())?;
            bits.push(v.to_bits());
        }
    }
    let identical = bits.iter().all(|&b| b == bits[0]);
    let cfg = ExperimentConfig::desk(ExperimentKind::SqrtLassoPivotality);
    let report = run_sqrt_cells(&cfg, &[0.1, 1.0], &[1.0, 5.0]).map_err(|e| e.to_string())?;
    let err = |s: f64, r: f64| {
        report
            .cells
            .iter()
            .find(|c| c.sigma == s && c.radius == r)
            .map(|c| c.stats.mean)
            .unwrap()
    };
    let grows = [1.0, 5.0].iter().all(|&r| err(1.0, r) > err(0.1, r));
    check(
        identical && grows && report.lambda_invariant,
        format!(
            "lambda identical {identical}; err R=1: {:.3} -> {:.3}, R=5: {:.3} -> {:.3}",
            err(0.1, 1.0),
            err(1.0, 1.0),
            err(0.1, 5.0),
            err(1.0, 5.0)
        ),
    )
}

fn c10_blanket_tail() -> Outcome {
    let sim = blanket_tree_simulator(3, 0.9, 100_000, RngSeed(10), TreeVariant::Downward);
    let mean_ok = (sim.mean() - 1.125).abs() <= 3.0 * sim.std_error();
    // Fit log P(S >= k) on k over sizes seen at least 10 times.
    let hist = sim.histogram();
    let pts: Vec<(f64, f64)> = hist
        .iter()
        .filter(|(_, &c)| c >= 10)
        .map(|(&k, _)| (k as f64, sim.survival(k).ln()))
        .collect();
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r2 = sxy * sxy / (sxx * syy);
    check(
        mean_ok && slope < 0.0 && r2 >= 0.9 && sim.truncated == 0,
        format!(
            "mean {:.4} +- {:.4}, slope {slope:.3}, R^2 {r2:.3}, {} sizes fitted",
            sim.mean(),
            sim.std_error(),
            pts.len()
        ),
    )
}

fn c11_determinism() -> Outcome {
    let shrink = |mut cfg: ExperimentConfig| {
        cfg.n = 200;
        cfg.p = 150;
        cfg.trials = 4;
        cfg
    };
    let tables = || -> Result<Vec<String>, String> {
        let e = |e: missreg::Error| e.to_string();
        let mut out = Vec::new();
        out.push(
            format_dat(
                &run_fig1(&shrink(ExperimentConfig::desk(ExperimentKind::Fig1IdentityMcar))).map_err(e)?,
            )
            .map_err(e)?,
        );
        out.push(
            format_dat(
                &run_fig2_ar1(&shrink(ExperimentConfig::desk(ExperimentKind::Fig2Ar1 {
                    phi: 0.5,
                })))
                .map_err(e)?,
            )
            .map_err(e)?,
        );
        let fig3 = shrink(ExperimentConfig::desk(ExperimentKind::Fig3Banded {
            phi: 0.25,
            bandwidth: 3,
            p_list: vec![60, 150],
        }));
        for sweep in run_fig3_banded(&fig3).map_err(e)? {
            out.push(format_dat(&sweep.rows).map_err(e)?);
        }
        out.push(
            format_pivotal_dat(
                &run_sqrt_pivotality(&shrink(ExperimentConfig::desk(
                    ExperimentKind::SqrtLassoPivotality,
                )))
                .map_err(e)?,
            )
            .map_err(e)?,
        );
        out.push(
            format_dat(&run_mnar_demo(&shrink(ExperimentConfig::desk(ExperimentKind::MnarDemo))).map_err(e)?)
                .map_err(e)?,
        );
        Ok(out)
    };
    let first = tables()?;
    let second = tables()?;
    let bytes: usize = first.iter().map(String::len).sum();
    check(
        first == second,
        format!("{} tables, {bytes} bytes, identical on re-run", first.len()),
    )
}

fn main() -> ExitCode {
    let paper_scale = std::env::var("MISSREG_PAPER_SCALE").is_ok_and(|v| v == "1");
    let criteria: [Criterion; 11] = [
        (1, "fig1 error scaling (desk)", c1_fig1_scaling),
        (2, "fig1 full-scale magnitude", c2_paper_scale),
        (3, "lasso vs proximal-gradient oracle", c3_lasso_vs_ista),
        (4, "ar1 imputation vs dense conditional mean", c4_ar1_exact),
        (5, "phi estimate consistency", c5_phi_consistency),
        (6, "markov blanket vs path enumeration", c6_blanket_equivalence),
        (7, "blanket separation", c7_blanket_separation),
        (8, "covariance estimate unbiased", c8_covariance_unbiased),
        (9, "sqrt-lasso pivotality", c9_sqrt_pivotal),
        (10, "blanket size tail", c10_blanket_tail),
        (11, "experiment determinism", c11_determinism),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    panic::set_hook(Box::new(|_| {}));
    for (id, name, run) in criteria {
        if !filter.is_empty()
            && !filter
                .iter()
                .any(|f| name.contains(f.as_str()) || *f == id.to_string())
        {
            continue;
        }
        if id == 2 && !paper_scale {
            println!("criterion {id:>2} SKIP  {name}: set MISSREG_PAPER_SCALE=1 to run");
            continue;
        }
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {id:>2} PASS  {name}: {detail} [{secs:.1}s]"),
            Err(detail) => {
                failed += 1;
                println!("criterion {id:>2} FAIL  {name}: {detail} [{secs:.1}s]");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criterion(s) failed");
        ExitCode::FAILURE
    }
}
