use std::fs;
use std::path::Path;
use std::process::Command;

const CONSTANTS: &str = r#"
experiment = "invert"
alpha_list = [2.0, -0.5]
x_grid = [0.0, 0.25]

[[pairs]]
f = { kind = "constant" }
g = { kind = "constant" }

[[pairs]]
f = { kind = "gaussian" }
g = { kind = "gaussian" }
"#;

fn bht(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_bht")).args(args).output().unwrap()
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("run.toml");
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn invert_writes_reports_and_passes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), CONSTANTS);
    let out = dir.path().join("out");
    let res = bht(&[
        "invert",
        "--config",
        &cfg,
        "--out",
        out.to_str().unwrap(),
        "--jobs",
        "2",
    ]);
    assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stderr));

    let csv = fs::read_to_string(out.join("evaluations.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "experiment,function_f,function_g,alpha,x,eps_or_r,value_re,value_im,err_est,status"
    );
    // pairs × alpha × x × ladder
    assert_eq!(lines.count(), 2 * 2 * 2 * 10);

    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["pass"], true);
    assert_eq!(summary["tolerances"]["recovery_rel"], 1e-5);
    assert_eq!(summary["config"]["eps_ladder"].as_array().unwrap().len(), 10);
    let first = summary["limits"][0].as_f64().unwrap();
    assert!((first - 1.0).abs() < 1e-10);
}

#[test]
fn reports_do_not_depend_on_jobs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), CONSTANTS);
    let read = |jobs: &str| {
        let out = dir.path().join(format!("out{jobs}"));
        let res = bht(&["eval", "--config", &cfg, "--out", out.to_str().unwrap(), "--jobs", jobs]);
        assert_eq!(res.status.code(), Some(0));
        (
            fs::read(out.join("evaluations.csv")).unwrap(),
            fs::read(out.join("summary.json")).unwrap(),
        )
    };
    assert_eq!(read("1"), read("8"));
}

#[test]
fn configuration_problems_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), CONSTANTS);
    let out = dir.path().join("out");
    let out = out.to_str().unwrap();
    // Subcommand and experiment disagree.
    assert_eq!(
        bht(&["lebesgue", "--config", &cfg, "--out", out]).status.code(),
        Some(2)
    );
    assert_eq!(
        bht(&["invert", "--config", "/nonexistent.toml", "--out", out])
            .status
            .code(),
        Some(2)
    );
    let bad = write_config(dir.path(), "experiment = \"invert\"\nalpha_list = [0.0]\n");
    assert_eq!(bht(&["invert", "--config", &bad, "--out", out]).status.code(), Some(2));
}

#[test]
fn failed_assertion_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    // A smooth point expected to be a Lebesgue point, with a ladder too short to get there.
    let cfg = write_config(
        dir.path(),
        r#"
        experiment = "lebesgue"
        functions = [{ kind = "power_cusp", exponent = 0.5 }]
        lebesgue = { exponents = [1.0], infinity = false }
        "#,
    );
    let out = dir.path().join("out");
    let res = bht(&["lebesgue", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(1));
    assert!(out.join("profiles.csv").exists());
}
