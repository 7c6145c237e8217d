use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use missreg::{synth, RngSeed};

/// Run the binary with a whitespace-separated argument string.
fn run(args: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_missreg"))
        .args(args.split_whitespace())
        .output()
        .expect("binary runs")
}

fn p(path: &Path) -> &str {
    let s = path.to_str().unwrap();
    assert!(
        !s.contains(char::is_whitespace),
        "test paths must not contain spaces"
    );
    s
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[track_caller]
fn assert_fails(out: &Output, status: i32, code: &str) {
    let err = stderr(out);
    assert_eq!(out.status.code(), Some(status), "stderr: {err}");
    assert!(err.starts_with(&format!("error[{code}]")), "stderr: {err}");
}

#[track_caller]
fn assert_ok(out: &Output) {
    assert!(out.status.success(), "stderr: {}", stderr(out));
}

fn read(path: impl AsRef<Path>) -> String {
    fs::read_to_string(path).unwrap()
}

#[test]
fn generate_fully_observed() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_ok(&run(&format!(
        "generate --model identity --n 4 --p 3 --alpha 1 --out-dir {}",
        p(d)
    )));
    let csv = read(d.join("design.csv"));
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "x0,x1,x2");
    assert_eq!(lines.len(), 5);
    assert!(!csv.contains("NA"));
    let truth: serde_json::Value = serde_json::from_str(&read(d.join("truth.json"))).unwrap();
    assert_eq!(truth["s"], 2);
    assert_eq!(truth["covariance_kind"]["kind"], "identity");
    assert_eq!(read(d.join("response.csv")).lines().count(), 5);
}

#[test]
fn generate_rejects_zero_alpha() {
    let dir = tempfile::tempdir().unwrap();
    assert_fails(
        &run(&format!("generate --alpha 0 --out-dir {}", p(dir.path()))),
        2,
        "AlphaOutOfRange",
    );
    assert!(!dir.path().join("design.csv").exists());
}

#[test]
fn generate_is_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        assert_ok(&run(&format!(
            "generate --model banded --n 30 --p 12 --seed 9 --out-dir {}",
            p(d.path())
        )));
    }
    for f in ["design.csv", "response.csv", "truth.json", "graph.txt"] {
        assert_eq!(
            fs::read(a.path().join(f)).unwrap(),
            fs::read(b.path().join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn csv_round_trip_matches_library() {
    let dir = tempfile::tempdir().unwrap();
    assert_ok(&run(&format!(
        "generate --model ar1 --phi 0.4 --n 25 --p 9 --alpha 0.6 --seed 3 --out-dir {}",
        p(dir.path())
    )));
    // Rebuild the same mask and values in-process and read the file independently.
    let seed = RngSeed(3);
    let x = synth::gen_ar1(25, 9, 0.4, seed.derive(0)).unwrap();
    let z = synth::apply_mcar(&x, 0.6, seed.derive(1)).unwrap();
    let mut rdr = csv::Reader::from_path(dir.path().join("design.csv")).unwrap();
    let mut missing = 0;
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.unwrap();
        assert_eq!(rec.len(), 9);
        for (j, tok) in rec.iter().enumerate() {
            match z.observed(i, j) {
                Some(v) => assert_eq!(tok.parse::<f64>().unwrap().to_bits(), v.to_bits()),
                None => {
                    assert_eq!(tok, "NA");
                    missing += 1;
                }
            }
        }
    }
    assert!(missing > 0);
    assert_eq!(read(dir.path().join("graph.txt")).lines().next(), Some("p=9"));
}

#[test]
fn zero_impute_keeps_tokens() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.csv");
    fs::write(&input, "a,b,c\n1.50,NA,2e0\nNA,-0.000,7\n").unwrap();
    let output = dir.path().join("out.csv");
    assert_ok(&run(&format!(
        "impute --method zero --input {} --output {}",
        p(&input),
        p(&output)
    )));
    assert_eq!(read(&output), "a,b,c\n1.50,0,2e0\n0,-0.000,7\n");
}

#[test]
fn ar1_estimate_on_fully_missing_file() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.csv");
    fs::write(&input, "a,b,c\nNA,NA,NA\nNA,NA,NA\n").unwrap();
    let out = run(&format!(
        "impute --method ar1 --estimate-phi --input {} --output {}",
        p(&input),
        p(&dir.path().join("o.csv"))
    ));
    assert_fails(&out, 4, "DegenerateDenominator");
}

#[test]
fn method_requirements() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.csv");
    fs::write(&input, "a,b\n1,NA\n").unwrap();
    let io = format!("--input {} --output {}", p(&input), p(&dir.path().join("o.csv")));
    assert_fails(
        &run(&format!("impute --method graphical {io}")),
        2,
        "MethodRequirementsMissing",
    );
    assert_fails(
        &run(&format!("impute --method ar1 {io}")),
        2,
        "MethodRequirementsMissing",
    );
    assert_fails(
        &run(&format!("impute --method ar1 --phi 0.3 --estimate-phi {io}")),
        2,
        "ConflictingArguments",
    );
    assert_fails(&run("impute --method zero"), 2, "MissingArgument");
}

#[test]
fn ar1_known_phi_matches_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.csv");
    fs::write(&input, "a,b,c\n1,NA,2\n").unwrap();
    let o = dir.path().join("o.csv");
    assert_ok(&run(&format!(
        "impute --method ar1 --phi 0.5 --input {} --output {}",
        p(&input),
        p(&o)
    )));
    let text = read(&o);
    let mid: f64 = text
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .nth(1)
        .unwrap()
        .parse()
        .unwrap();
    // phi (x_a + x_c) / (1 + phi^2)
    assert!((mid - 1.2).abs() < 1e-12);
}

#[test]
fn unreadable_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let o = d.join("o.csv");
    let impute = |input: &Path| run(&format!("impute --input {} --output {}", p(input), p(&o)));

    fs::write(d.join("ragged.csv"), "a,b\n1,2\n3\n").unwrap();
    assert_fails(&impute(&d.join("ragged.csv")), 3, "UnreadableInput");
    fs::write(d.join("empty.csv"), "a,b\n1,\n").unwrap();
    assert_fails(&impute(&d.join("empty.csv")), 3, "UnreadableInput");
    assert_fails(&impute(&d.join("does-not-exist.csv")), 3, "UnreadableInput");

    fs::write(d.join("y.csv"), "y\n1\n").unwrap();
    fs::write(d.join("g.csv"), "a,b\n1,abc\n").unwrap();
    let fit = format!(
        "fit --design {} --response {} --lambda 1",
        p(&d.join("g.csv")),
        p(&d.join("y.csv"))
    );
    assert_fails(&run(&fit), 3, "UnreadableInput");

    fs::write(d.join("graph.txt"), "0 1\n").unwrap();
    fs::write(d.join("z.csv"), "a,b\n1,NA\n2,3\n").unwrap();
    let graphical = format!(
        "impute --method graphical --graph {} --input {} --output {}",
        p(&d.join("graph.txt")),
        p(&d.join("z.csv")),
        p(&o)
    );
    assert_fails(&run(&graphical), 3, "UnreadableInput");
}

/// Generate a small data set and zero-impute it; returns the `fit` file flags.
fn prepared(dir: &Path, model: &str) -> String {
    assert_ok(&run(&format!(
        "generate --model {model} --n 80 --p 30 --alpha 0.8 --sigma 0.1 --seed 5 --out-dir {}",
        p(dir)
    )));
    let imputed = dir.join("imputed.csv");
    assert_ok(&run(&format!(
        "impute --input {} --output {}",
        p(&dir.join("design.csv")),
        p(&imputed)
    )));
    format!(
        "--design {} --response {} --output {}",
        p(&imputed),
        p(&dir.join("response.csv")),
        p(&dir.join("beta.txt"))
    )
}

#[test]
fn fit_huge_lambda_is_zero() {
    let dir = tempfile::tempdir().unwrap();
    let files = prepared(dir.path(), "identity");
    let out = run(&format!("fit {files} --lambda 1e9"));
    assert_ok(&out);
    let beta: Vec<f64> = read(dir.path().join("beta.txt"))
        .lines()
        .map(|l| l.parse().unwrap())
        .collect();
    assert_eq!(beta.len(), 30);
    assert!(beta.iter().all(|b| *b == 0.0));
    assert!(stdout(&out).contains("support: 0\n"));
}

#[test]
fn fit_needs_complete_design() {
    let dir = tempfile::tempdir().unwrap();
    prepared(dir.path(), "identity");
    let out = run(&format!(
        "fit --design {} --response {} --lambda 0.1 --output {}",
        p(&dir.path().join("design.csv")),
        p(&dir.path().join("response.csv")),
        p(&dir.path().join("b.txt"))
    ));
    assert_fails(&out, 3, "MissingEntry");
}

fn lambda_line(out: &Output) -> String {
    stdout(out)
        .lines()
        .find(|l| l.starts_with("lambda: "))
        .unwrap()
        .to_owned()
}

#[test]
fn sqrt_pivotal_lambda_ignores_sigma() {
    let dir = tempfile::tempdir().unwrap();
    let files = prepared(dir.path(), "identity");
    let fit = |sigma: &str| {
        run(&format!(
            "fit {files} --solver sqrt-lasso --schedule sqrt-pivotal --sigma-x 1 --sigma {sigma}"
        ))
    };
    let (a, b) = (fit("0.1"), fit("1.0"));
    assert_ok(&a);
    assert_ok(&b);
    assert_eq!(lambda_line(&a), lambda_line(&b));
    assert!(stdout(&a).contains("sigma_hat: "));
}

#[test]
fn fit_penalty_arguments() {
    let dir = tempfile::tempdir().unwrap();
    let files = prepared(dir.path(), "identity");
    let fit = |extra: &str| run(&format!("fit {files} {extra}"));
    assert_fails(&fit(""), 2, "MethodRequirementsMissing");
    assert_fails(&fit("--lambda 1 --schedule ar1"), 2, "ConflictingArguments");
    assert_fails(&fit("--schedule nope"), 2, "InvalidParameter");
    assert_fails(&fit("--schedule ar1"), 2, "MissingInput");
    assert_ok(&fit("--schedule identity-mcar --alpha 0.8"));
}

#[test]
fn ar1_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    prepared(d, "ar1");
    let out = run(&format!(
        "impute --method ar1 --estimate-phi --alpha 0.8 --input {} --output {}",
        p(&d.join("design.csv")),
        p(&d.join("ar1.csv"))
    ));
    assert_ok(&out);
    let phi: f64 = stdout(&out)
        .lines()
        .next()
        .unwrap()
        .strip_prefix("phi: ")
        .unwrap()
        .parse()
        .unwrap();
    assert!((phi - 0.5).abs() < 0.15, "{phi}");
    assert!(!read(d.join("ar1.csv")).contains("NA"));
    assert_ok(&run(&format!(
        "fit --design {} --response {} --lambda 0.05 --output {}",
        p(&d.join("ar1.csv")),
        p(&d.join("response.csv")),
        p(&d.join("b.txt"))
    )));
}

#[test]
fn graphical_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    prepared(d, "banded");
    assert_ok(&run(&format!(
        "impute --method graphical --graph {} --input {} --output {}",
        p(&d.join("graph.txt")),
        p(&d.join("design.csv")),
        p(&d.join("g.csv"))
    )));
    let text = read(d.join("g.csv"));
    assert!(!text.contains("NA"));
    assert_eq!(text.lines().count(), 81);
}

#[test]
fn experiment_rows_per_alpha_and_determinism() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        assert_ok(&run(&format!(
            "experiment --experiment fig1 --n 60 --p 40 --trials 3 --alphas 0.5,0.7,0.9 --out-dir {}",
            p(d.path())
        )));
    }
    let text = read(a.path().join("fig1.dat"));
    assert_eq!(text.lines().count(), 4);
    assert_eq!(text.lines().next(), Some("alpha err max_err min_err"));
    assert_eq!(
        fs::read(a.path().join("fig1.dat")).unwrap(),
        fs::read(b.path().join("fig1.dat")).unwrap()
    );
}

#[test]
fn experiment_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = p(dir.path());
    assert_fails(
        &run(&format!("experiment --experiment fig9 --out-dir {out_dir}")),
        2,
        "Usage",
    );
    assert_fails(
        &run(&format!("experiment --out-dir {out_dir}")),
        2,
        "MissingArgument",
    );
    assert_fails(&run("frobnicate"), 2, "Usage");
}

#[test]
fn config_file_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(
        &cfg,
        format!(
            "[experiment]\nexperiment = \"fig3\"\nn = 120\np = 30\ntrials = 2\n\
             alphas = [0.7, 0.9]\np_list = [20, 30]\nout_dir = \"{}\"\n",
            p(dir.path())
        ),
    )
    .unwrap();
    assert_ok(&run(&format!("--config {} experiment --alphas 0.8", p(&cfg))));
    for pp in [20, 30] {
        let text = read(dir.path().join(format!("fig3_p{pp}.dat")));
        assert_eq!(text.lines().count(), 2, "{text}");
        assert!(text
            .lines()
            .next()
            .unwrap()
            .ends_with("apx_err apx_max_err apx_min_err"));
        assert!(text.lines().nth(1).unwrap().starts_with("8.00000000000e-1 "));
    }

    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "[experiment]\ntrails = 3\n").unwrap();
    assert_fails(
        &run(&format!("--config {} experiment --experiment fig1", p(&bad))),
        2,
        "InvalidConfig",
    );
}

#[test]
fn sqrt_pivotal_experiment() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&format!(
        "experiment --experiment sqrt-pivotal --n 80 --p 40 --trials 2 --out-dir {}",
        p(dir.path())
    ));
    assert_ok(&out);
    assert!(stdout(&out).contains("lambda_invariant: true"));
    assert!(dir.path().join("sqrt_pivotal.dat").exists());
}
