use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn costas(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_costas"))
        .args(args)
        .env_remove("COSTAS_JOBS")
        .env_remove("COSTAS_N")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn enumerate_to(path: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["enumerate", "--output", path.to_str().unwrap()];
    args.extend_from_slice(extra);
    costas(&args)
}

#[test]
fn enumerate_order_seven() {
    let out = costas(&["enumerate", "--n", "7", "--method", "recursive"]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(stdout(&out).lines().count(), 200);
    assert!(stderr(&out).contains("200 arrays"));
}

#[test]
fn output_is_independent_of_jobs_and_method() {
    let dir = tempfile::tempdir().unwrap();
    let files: Vec<_> = ["1", "4"]
        .iter()
        .map(|jobs| {
            let path = dir.path().join(format!("jobs{jobs}.jsonl"));
            let out = enumerate_to(&path, &["--n", "8", "--jobs", jobs]);
            assert!(out.status.success(), "{}", stderr(&out));
            fs::read(path).unwrap()
        })
        .collect();
    assert_eq!(files[0], files[1]);
    for method in ["exhaustive", "direct-start"] {
        let path = dir.path().join(format!("{method}.jsonl"));
        let out = enumerate_to(&path, &["--n", "8", "--method", method, "--jobs", "2"]);
        assert!(out.status.success(), "{}", stderr(&out));
        assert_eq!(fs::read(path).unwrap(), files[0], "{method}");
    }
}

#[test]
fn jobs_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_costas"))
        .args(["enumerate", "--n", "6"])
        .env("COSTAS_JOBS", "0")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(4));
    let out = Command::new(env!("CARGO_BIN_EXE_costas"))
        .args(["enumerate", "--n", "6", "--jobs", "3"])
        .env("COSTAS_JOBS", "0")
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "flags take precedence over the environment"
    );
}

#[test]
fn csv_format() {
    let out = costas(&["enumerate", "--n", "3", "--format", "csv"]);
    assert_eq!(stdout(&out), "r1,r2,r3\n1,3,2\n2,1,3\n2,3,1\n3,1,2\n");
}

#[test]
fn verify_accepts_enumeration_output() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("six.jsonl");
    assert!(enumerate_to(&path, &["--n", "6"]).status.success());
    let out = costas(&["verify", path.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
}

#[test]
fn verify_reports_violations_and_parse_errors() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.jsonl");
    fs::write(&path, "{\"n\":3,\"p\":[1,3,2]}\n{\"n\":3,\"p\":[1,2,3]}\n").unwrap();
    let out = costas(&["verify", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("bad.jsonl:2:"), "{}", stderr(&out));

    fs::write(&path, "{\"n\":3,\"p\":[1,3,2]}\n{\"n\":3,\"p\":[1,1,2]}\n").unwrap();
    assert_eq!(
        costas(&["verify", path.to_str().unwrap()]).status.code(),
        Some(4)
    );
    fs::write(&path, "not json\n").unwrap();
    assert_eq!(
        costas(&["verify", path.to_str().unwrap()]).status.code(),
        Some(4)
    );
    let missing = dir.path().join("missing.jsonl");
    assert_eq!(
        costas(&["verify", missing.to_str().unwrap()]).status.code(),
        Some(3)
    );
}

#[test]
fn verify_catches_mutated_points() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("seven.jsonl");
    assert!(enumerate_to(&path, &["--n", "7"]).status.success());
    let text = fs::read_to_string(&path).unwrap();
    let mut rejected = 0;
    let lines: Vec<&str> = text.lines().collect();
    for (i, line) in lines.iter().enumerate().step_by(17) {
        // swap two adjacent entries of the vector
        let mut p: Vec<u8> = serde_json::from_str::<serde_json::Value>(line).unwrap()["p"]
            .as_array()
            .unwrap()
            .iter()
            .map(|v| v.as_u64().unwrap() as u8)
            .collect();
        let j = i % 6;
        p.swap(j, j + 1);
        let mutated = serde_json::json!({"n": 7, "p": p}).to_string();
        if text.lines().any(|l| l == mutated) {
            continue;
        }
        let mut body = lines.clone();
        body[i] = &mutated;
        fs::write(&path, body.join("\n") + "\n").unwrap();
        let out = costas(&["verify", path.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(1), "{mutated}");
        assert!(stderr(&out).contains(&format!(":{}:", i + 1)));
        rejected += 1;
    }
    assert!(rejected > 5);
}

#[test]
fn triangle_rows() {
    let out = costas(&["triangle", "--max-n", "6"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.starts_with("n,k,C\n1,0,1\n1,1,1\n"));
    let row6: Vec<&str> = text
        .lines()
        .filter(|l| l.starts_with("6,"))
        .map(|l| l.rsplit(',').next().unwrap())
        .collect();
    assert_eq!(row6, ["1", "36", "450", "2328", "4412", "2112", "116"]);
}

#[test]
fn caps_exit_with_budget_code() {
    let out = costas(&["enumerate", "--n", "11", "--method", "exhaustive"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("cap"));
    assert_eq!(costas(&["chi", "--n", "8"]).status.code(), Some(2));
    assert_eq!(costas(&["enumerate", "--n", "13"]).status.code(), Some(2));
    assert_eq!(
        costas(&["enumerate", "--n", "9", "--memory-budget", "1000"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn output_io_failure() {
    let out = costas(&[
        "enumerate",
        "--n",
        "4",
        "--output",
        "/nonexistent/dir/out.jsonl",
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn chi_census_table() {
    let out = costas(&["chi", "--n", "3"]);
    assert_eq!(stdout(&out), "k,count\n0,4\n1,2\n");
}

#[test]
fn classes_cover_every_array() {
    let out = costas(&["classes", "--n", "6", "--format", "csv"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let total: usize = stdout(&out)
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse::<usize>().unwrap())
        .sum();
    assert_eq!(total, 116);
    let one = costas(&["classes", "--n", "1"]);
    assert_eq!(
        stdout(&one),
        "{\"members\":1,\"orbit_size\":1,\"representative\":{\"n\":1,\"p\":[1]}}\n"
    );
}

#[test]
fn halted_run_resumes_to_identical_output() {
    let dir = tempfile::tempdir().unwrap();
    let reference = dir.path().join("reference.jsonl");
    assert!(enumerate_to(&reference, &["--n", "8"]).status.success());
    let ckpt = dir.path().join("ckpt");
    let out_path = dir.path().join("resumed.jsonl");
    for halt in ["3", "9"] {
        let halted = enumerate_to(
            &out_path,
            &[
                "--n",
                "8",
                "--checkpoint",
                ckpt.to_str().unwrap(),
                "--halt-after",
                halt,
            ],
        );
        assert_eq!(halted.status.code(), Some(2), "{}", stderr(&halted));
    }
    let resumed = enumerate_to(
        &out_path,
        &["--n", "8", "--checkpoint", ckpt.to_str().unwrap()],
    );
    assert!(resumed.status.success(), "{}", stderr(&resumed));
    assert!(stderr(&resumed).contains("resumed from step"));
    assert_eq!(fs::read(&out_path).unwrap(), fs::read(&reference).unwrap());
}

#[test]
fn report_columns() {
    let out = costas(&["report", "--max-n", "8"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert!(lines
        .next()
        .unwrap()
        .starts_with("n,f_rec,f_rec_upper,f_ex"));
    let ex: Vec<&str> = lines.map(|l| l.split(',').nth(3).unwrap()).collect();
    assert_eq!(ex, ["6", "96", "1200", "14400", "176400", "2257920"]);
    assert!(stderr(&out).contains("extrapolation, not validated"));
    let json = costas(&["report", "--max-n", "5", "--format", "json"]);
    let value: serde_json::Value = serde_json::from_slice(&json.stdout).unwrap();
    assert_eq!(value["rows"].as_array().unwrap().len(), 3);
}
