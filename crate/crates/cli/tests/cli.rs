use std::fs;
use std::process::{Command, Output};

fn aoi(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aoi"))
        .args(args)
        .env_remove("AOI_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

/// Output lines that are not `#` comments.
fn body(o: &Output) -> Vec<String> {
    stdout(o)
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(str::to_string)
        .collect()
}

#[test]
fn closed_form_single_point() {
    let o = aoi(&["closed-form", "--model", "mm11", "--lambda", "1", "--mu", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("# config: command=closed-form\n"));
    assert!(text.contains("# config: model=mm11\n"));
    assert_eq!(body(&o), ["2.5"]);
}

#[test]
fn closed_form_grid_is_csv() {
    let o = aoi(&["closed-form", "--model", "mm11star", "--lambda", "0.5:2:4"]);
    assert_eq!(o.status.code(), Some(0));
    let rows = body(&o);
    assert_eq!(rows[0], "model,lambda,mu,rho,aaoi");
    assert_eq!(rows.len(), 5);
    assert_eq!(rows[1], "mm11star,0.5,1,0.5,3");
}

#[test]
fn verify_p8_passes() {
    let o = aoi(&["verify", "--prop", "p8"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    let result = text.lines().find(|l| l.starts_with("# result: prop=p8")).unwrap();
    assert!(result.contains("pass=true"));
    let max: f64 = result
        .split("max=")
        .nth(1)
        .unwrap()
        .split(' ')
        .next()
        .unwrap()
        .parse()
        .unwrap();
    assert!((max - 1.0731).abs() < 1e-4, "{max}");
    assert_eq!(body(&o).len(), 201);
}

#[test]
fn verify_exits_one_on_violation() {
    // The exact P12 maximum exceeds its stated bound by 2.8e-5.
    let o = aoi(&["verify", "--prop", "p12", "--grid", "2.3943212748"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("pass=false"));
    assert!(stderr(&o).contains("violated"));
}

#[test]
fn lemma_and_conjecture_default_grid() {
    let o = aoi(&["verify", "--prop", "lemma1"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(body(&o).len(), 10);
}

#[test]
fn extremum_reports_both_roots() {
    let o = aoi(&["extremum", "--prop", "p11"]);
    assert_eq!(o.status.code(), Some(0));
    let rows = body(&o);
    assert_eq!(rows[0], "prop,kind,rho,ratio,printed_root,derived_root");
    let f: Vec<&str> = rows[1].split(',').collect();
    assert_eq!(&f[..2], ["p11", "min"]);
    let rho: f64 = f[2].parse().unwrap();
    assert!((rho - 0.4697).abs() < 1e-4);
}

#[test]
fn usage_errors_exit_two_and_list_names() {
    let o = aoi(&["closed-form", "--model", "mm13", "--lambda", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("mm12star2-fgfs"));

    let o = aoi(&["verify", "--prop", "p99"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("lemma1"));

    let o = aoi(&["sweep", "--lambda1", "0.1", "--lambda2", "1", "--models", "ps,lifo"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("mm11star"));

    for args in [
        &["closed-form", "--model", "mm11", "--lambda", "1:2"][..],
        &["frobnicate"],
        &["shs", "--lambda", "1"],
    ] {
        let o = aoi(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(o.stdout.is_empty());
    }
}

#[test]
fn unstable_closed_form_is_an_input_error() {
    let o = aoi(&["closed-form", "--model", "mm1-fgfs", "--lambda", "1.5"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!stderr(&o).is_empty());
}

#[test]
fn simulation_is_byte_identical_for_a_seed() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, seed: &str| {
        let path = dir.path().join(name);
        let o = aoi(&[
            "simulate",
            "--model",
            "mm12star-ps",
            "--lambda",
            "0.8,0.4",
            "--events",
            "20000",
            "--reps",
            "3",
            "--seed",
            seed,
            "--out",
            path.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        assert!(o.stdout.is_empty());
        fs::read(path).unwrap()
    };
    let a = run("a.csv", "7");
    assert_eq!(a, run("b.csv", "7"));
    assert_ne!(a, run("c.csv", "8"));
    let text = String::from_utf8(a).unwrap();
    assert!(text.contains("# config: seed=7\n"));
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 3);
}

#[test]
fn seed_from_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_aoi"))
        .args([
            "simulate", "--model", "mm11", "--lambda", "1", "--events", "1000", "--reps", "2",
        ])
        .env("AOI_SEED", "42")
        .output()
        .unwrap();
    assert!(stdout(&o).contains("# config: seed=42\n"));
}

#[test]
fn trace_file_is_written() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("trace.csv");
    let o = aoi(&[
        "simulate",
        "--model",
        "mm11",
        "--lambda",
        "1",
        "--events",
        "5000",
        "--reps",
        "1",
        "--trace",
        path.to_str().unwrap(),
        "--trace-points",
        "50",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = fs::read_to_string(path).unwrap();
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "time,age,source");
    assert_eq!(rows.len(), 51);
}

#[test]
fn shs_table_round_trip_through_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.txt");
    let o = aoi(&[
        "shs",
        "--model",
        "mm12star2-fgfs",
        "--lambda",
        "0.7",
        "--table",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let from_file = aoi(&["shs", "--input", path.to_str().unwrap()]);
    let direct = aoi(&["shs", "--model", "mm12star2-fgfs", "--lambda", "0.7"]);
    let aaoi = |o: &Output| body(o)[1].split(',').nth(4).unwrap().to_string();
    assert_eq!(aaoi(&from_file), aaoi(&direct));
    let cf = aoi(&["closed-form", "--model", "mm12star2-fgfs", "--lambda", "0.7"]);
    assert_eq!(aaoi(&direct), body(&cf)[0]);
}

#[test]
fn shs_truncation_list() {
    let o = aoi(&["shs", "--model", "mm1-fgfs", "--lambda", "0.5", "--n", "10,20,40"]);
    assert_eq!(o.status.code(), Some(0));
    let rows = body(&o);
    assert_eq!(rows.len(), 4);
    let last: f64 = rows[3].split(',').nth(4).unwrap().parse().unwrap();
    assert!((last - 3.5).abs() < 1e-6);
}

#[test]
fn sweep_row_count_and_unstable_note() {
    let o = aoi(&[
        "sweep",
        "--lambda1",
        "0.1",
        "--lambda2",
        "0.001,0.5,1",
        "--objective",
        "sum",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rows = body(&o);
    assert_eq!(rows[0], "lambda2,model,objective,aaoi,method,ci95");
    assert_eq!(rows.len(), 1 + 3 * 3);
    assert!(stdout(&o).contains("# unstable: total load >= 1 at lambda2=1;"));
}

#[test]
fn conjecture_rows() {
    let o = aoi(&["conjecture", "--rho", "0.2,0.5"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rows = body(&o);
    assert_eq!(rows.len(), 3);
    assert!(rows[1].starts_with("0.2,40,true,"));
    assert!(!stdout(&o).contains("VIOLATION"));
}

#[test]
fn help_lists_models_and_propositions() {
    let o = aoi(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    for name in ["mm12star2-ps", "mm1-ps", "p10-star2", "conj1"] {
        assert!(text.contains(name), "{name}");
    }
}
