use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use missreg::experiments::{
    emit_dat, format_pivotal_dat, run_fig1, run_fig2_ar1, run_fig3_banded, run_mnar_demo,
    run_sqrt_pivotality, ExperimentConfig, ExperimentKind,
};
use missreg::impute::{
    ar1_impute, estimate_covariance_mcar, estimate_phi, graphical_impute, zero_impute, Ar1Params,
    CovarianceSource,
};
use missreg::model::{DEFAULT_MAX_ITER, DEFAULT_TOL};
use missreg::solvers::{self, LambdaSchedule, ScheduleInputs, ScheduleKind};
use missreg::{
    synth, CovarianceKind, Error, FitStatus, ModelTruth, RegressionProblem, RngSeed, SolverKind,
    SparsityGraph,
};

use crate::args::{ExperimentArgs, ExperimentName, FitArgs, GenerateArgs, ImputeArgs, Method, Model, Solver};
use crate::error::CliError;
use crate::io;

fn required<T>(v: Option<T>, flag: &str) -> Result<T, CliError> {
    v.ok_or_else(|| CliError::usage("MissingArgument", format!("--{flag} is required")))
}

fn create_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

fn check_alpha(alpha: f64) -> Result<f64, CliError> {
    if alpha > 0.0 && alpha <= 1.0 {
        Ok(alpha)
    } else {
        Err(Error::AlphaOutOfRange(alpha).into())
    }
}

pub fn generate(a: GenerateArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let model = a.model.unwrap_or(Model::Identity);
    let n = a.n.unwrap_or(100);
    let p = a.p.unwrap_or(50);
    let alpha = check_alpha(a.alpha.unwrap_or(0.8))?;
    let sigma = a.sigma.unwrap_or(0.0);
    let seed = RngSeed(a.seed.unwrap_or(1));
    let dir = a.out_dir.unwrap_or_else(|| PathBuf::from("."));
    if n == 0 || p == 0 {
        return Err(Error::InvalidDimension(format!("n={n}, p={p}")).into());
    }

    let (x, kind, sigma_x, graph) = match model {
        Model::Identity => (
            synth::gen_identity_gaussian(n, p, seed.derive(0))?,
            CovarianceKind::Identity,
            1.0,
            None,
        ),
        Model::Ar1 => {
            let phi = a.phi.unwrap_or(0.5);
            let x = synth::gen_ar1(n, p, phi, seed.derive(0))?;
            // Stationary marginal variance.
            let sd = (1.0 / (1.0 - phi * phi)).sqrt();
            (x, CovarianceKind::Ar1 { phi }, sd, Some(SparsityGraph::chain(p)))
        }
        Model::Banded => {
            let phi = a.phi.unwrap_or(0.25);
            let bandwidth = a.bandwidth.unwrap_or(3);
            let m = synth::BandedModel::new(p, phi, bandwidth)?;
            let x = m.sample(n, seed.derive(0))?;
            let sd = m.sigma.diagonal().max().sqrt();
            (
                x,
                CovarianceKind::BandedPrecision { phi, bandwidth },
                sd,
                Some(m.graph),
            )
        }
    };
    let (beta0, _) = synth::gen_beta0_sqrt_sparsity(p)?;
    let z = synth::apply_mcar(&x, alpha, seed.derive(1))?;
    let y = synth::gen_response(&x, &beta0, sigma, seed.derive(2))?;
    let truth = ModelTruth::new(beta0.iter().copied().collect(), sigma, sigma_x, alpha, kind)?;

    create_dir(&dir)?;
    let design = dir.join("design.csv");
    io::write_masked(&design, &z, &io::column_names(p))?;
    let response = dir.join("response.csv");
    io::write_response(&response, &y)?;
    let truth_path = dir.join("truth.json");
    let json = serde_json::to_string_pretty(&truth).expect("truth serializes") + "\n";
    fs::write(&truth_path, json).map_err(|e| CliError::io(&truth_path, e))?;
    let mut written = vec![design, response, truth_path];
    if let Some(g) = graph {
        let path = dir.join("graph.txt");
        fs::write(&path, io::format_graph(&g)).map_err(|e| CliError::io(&path, e))?;
        written.push(path);
    }
    for path in written {
        writeln!(out, "wrote {}", path.display()).ok();
    }
    Ok(())
}

pub fn impute(a: ImputeArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let input = required(a.input, "input")?;
    let output = a.output.unwrap_or_else(|| PathBuf::from("imputed.csv"));
    let method = a.method.unwrap_or(Method::Zero);
    let design = io::read_design(&input)?;
    let z = &design.matrix;
    let alpha = || check_alpha(a.alpha.unwrap_or_else(|| z.observed_fraction()));

    let imputed = match method {
        Method::Zero => zero_impute(z),
        Method::Ar1 => {
            let params = match (a.phi, a.estimate_phi.unwrap_or(false)) {
                (Some(_), true) => {
                    return Err(CliError::usage(
                        "ConflictingArguments",
                        "--phi and --estimate-phi exclude each other",
                    ))
                }
                (Some(phi), false) => Ar1Params::known(phi)?,
                (None, true) => {
                    // Nothing observed: the estimator has no data at all.
                    if z.observed_count() == 0 {
                        return Err(Error::DegenerateDenominator.into());
                    }
                    let params = estimate_phi(z, alpha()?)?;
                    writeln!(out, "phi: {}", params.phi()).ok();
                    params
                }
                (None, false) => {
                    return Err(CliError::MethodRequirementsMissing(
                        "ar1 imputation needs --phi or --estimate-phi".into(),
                    ))
                }
            };
            ar1_impute(z, params)?
        }
        Method::Graphical => {
            let Some(graph_path) = a.graph else {
                return Err(CliError::MethodRequirementsMissing(
                    "graphical imputation needs --graph".into(),
                ));
            };
            let graph = io::read_graph(&graph_path)?;
            let est = estimate_covariance_mcar(z, alpha()?)?;
            graphical_impute(z, &graph, CovarianceSource::Estimated(&est))?
        }
    };
    io::write_imputed(&output, &design, &imputed)?;
    let filled = z.nrows() * z.ncols() - z.observed_count();
    writeln!(out, "imputed {filled} cells, wrote {}", output.display()).ok();
    Ok(())
}

pub fn fit(a: FitArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let design_path = required(a.design, "design")?;
    let response_path = required(a.response, "response")?;
    let output = a.output.unwrap_or_else(|| PathBuf::from("coefficients.txt"));
    let solver = match a.solver.unwrap_or(Solver::Lasso) {
        Solver::Lasso => SolverKind::Lasso,
        Solver::SqrtLasso => SolverKind::SqrtLasso,
    };
    let design = io::read_dense_design(&design_path)?;
    let y = io::read_response(&response_path)?;

    let lambda = match (a.lambda, a.schedule) {
        (Some(_), Some(_)) => {
            return Err(CliError::usage(
                "ConflictingArguments",
                "--lambda and --schedule exclude each other",
            ))
        }
        (Some(l), None) => l,
        (None, Some(name)) => {
            let kind: ScheduleKind = name.parse()?;
            let inputs = ScheduleInputs {
                n: design.nrows(),
                p: design.ncols(),
                s: a.s,
                alpha: a.alpha,
                sigma: a.sigma,
                sigma_x: a.sigma_x,
                radius: a.radius,
                sigma_max_eig: a.sigma_max_eig,
            };
            LambdaSchedule::new(kind, inputs)
                .with_scale(a.lambda_scale.unwrap_or(1.0))
                .value()?
        }
        (None, None) => {
            return Err(CliError::MethodRequirementsMissing(
                "fit needs --lambda or --schedule".into(),
            ))
        }
    };

    let problem = RegressionProblem::new(design, y, lambda)?
        .with_solver(solver)
        .with_tol(a.tol.unwrap_or(DEFAULT_TOL))
        .with_max_iter(a.max_iter.unwrap_or(DEFAULT_MAX_ITER))
        .with_intercept(a.intercept.unwrap_or(false))
        .with_standardize(a.standardize.unwrap_or(false));
    let fit = solvers::fit(&problem)?;
    io::write_coefficients(&output, &fit.beta)?;

    let status = match fit.status {
        FitStatus::Converged => "converged",
        FitStatus::MaxIterExceeded => "max-iter-exceeded",
        FitStatus::ZeroResidualDegenerate => "zero-residual",
    };
    let mut summary = format!(
        "lambda: {lambda}\nobjective: {}\nkkt_residual: {:e}\nsupport: {}\niters: {}\nstatus: {status}\n",
        fit.objective,
        fit.kkt_residual,
        fit.support_size(),
        fit.iters
    );
    if problem.intercept {
        summary.push_str(&format!("intercept: {}\n", fit.intercept));
    }
    if let Some(s) = fit.sigma_hat {
        summary.push_str(&format!("sigma_hat: {s}\n"));
    }
    summary.push_str(&format!("coefficients: {}\n", output.display()));
    out.write_all(summary.as_bytes()).ok();

    if fit.status == FitStatus::MaxIterExceeded {
        return Err(Error::NotConverged { iters: fit.iters }.into());
    }
    Ok(())
}

/// Turn merged arguments into a validated experiment configuration.
pub fn experiment_config(a: &ExperimentArgs) -> Result<(ExperimentName, ExperimentConfig), CliError> {
    let name = required(a.experiment, "experiment")?;
    let kind = match name {
        ExperimentName::Fig1 => ExperimentKind::Fig1IdentityMcar,
        ExperimentName::Fig2 => ExperimentKind::Fig2Ar1 {
            phi: a.phi.unwrap_or(0.5),
        },
        ExperimentName::Fig3 => ExperimentKind::Fig3Banded {
            phi: a.phi.unwrap_or(0.25),
            bandwidth: a.bandwidth.unwrap_or(3),
            p_list: a.p_list.clone().unwrap_or_default(),
        },
        ExperimentName::SqrtPivotal => ExperimentKind::SqrtLassoPivotality,
        ExperimentName::Mnar => ExperimentKind::MnarDemo,
    };
    let mut cfg = ExperimentConfig::desk(kind);
    if a.paper_scale.unwrap_or(false) {
        cfg = cfg.paper_scale();
    }
    cfg.n = a.n.unwrap_or(cfg.n);
    cfg.p = a.p.unwrap_or(cfg.p);
    cfg.trials = a.trials.unwrap_or(cfg.trials);
    if let Some(alphas) = &a.alphas {
        cfg.alpha_grid = alphas.clone();
    }
    cfg.seed = a.seed.map(RngSeed).unwrap_or(cfg.seed);
    cfg.sigma = a.sigma.unwrap_or(cfg.sigma);
    cfg.lambda_scale = a.lambda_scale.unwrap_or(cfg.lambda_scale);
    cfg.lambda_floor = a.lambda_floor.unwrap_or(cfg.lambda_floor);
    cfg.tol = a.tol.unwrap_or(cfg.tol);
    cfg.max_iter = a.max_iter.unwrap_or(cfg.max_iter);
    cfg.validate()?;
    Ok((name, cfg))
}

pub fn experiment(a: ExperimentArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let (name, cfg) = experiment_config(&a)?;
    let dir = a.out_dir.unwrap_or_else(|| PathBuf::from("."));
    create_dir(&dir)?;
    let mut written = Vec::new();
    match name {
        ExperimentName::Fig1 => {
            let path = dir.join("fig1.dat");
            emit_dat(&run_fig1(&cfg)?, &path)?;
            written.push(path);
        }
        ExperimentName::Fig2 => {
            let path = dir.join("fig2.dat");
            emit_dat(&run_fig2_ar1(&cfg)?, &path)?;
            written.push(path);
        }
        ExperimentName::Fig3 => {
            for sweep in run_fig3_banded(&cfg)? {
                let path = dir.join(format!("fig3_p{}.dat", sweep.p));
                emit_dat(&sweep.rows, &path)?;
                written.push(path);
            }
        }
        ExperimentName::Mnar => {
            let path = dir.join("mnar.dat");
            emit_dat(&run_mnar_demo(&cfg)?, &path)?;
            written.push(path);
        }
        ExperimentName::SqrtPivotal => {
            let report = run_sqrt_pivotality(&cfg)?;
            let path = dir.join("sqrt_pivotal.dat");
            fs::write(&path, format_pivotal_dat(&report)?).map_err(|e| CliError::io(&path, e))?;
            writeln!(out, "lambda_invariant: {}", report.lambda_invariant).ok();
            writeln!(out, "loglog_slope: {}", report.loglog_slope).ok();
            written.push(path);
        }
    }
    for path in written {
        writeln!(out, "wrote {}", path.display()).ok();
    }
    Ok(())
}
