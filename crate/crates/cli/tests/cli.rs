use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use jitshop_cli::format::{instance_to_string, parse_instance, InstanceDoc};
use jitshop_cli::{generate, GeneratorSpec};
use jitshop_core::{Instance, Job};
use proptest::prelude::*;
use tempfile::TempDir;

fn jitshop(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_jitshop"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

const F3_EXAMPLE: &str = r#"{"format":1,"machines":3,"jobs":[
  {"id":"J1","p":[1,1,1],"d":3,"w":5},
  {"id":"J2","p":[1,1,1],"d":3,"w":4},
  {"id":"J3","p":[1,1,1],"d":5,"w":3}]}"#;

#[test]
fn solve_verify_gantt_pipeline() {
    let dir = TempDir::new().unwrap();
    let inst = write(dir.path(), "f3.json", F3_EXAMPLE);
    let sched = dir.path().join("s.json");
    let svg = dir.path().join("s.svg");
    let out = jitshop(&[
        "solve",
        &inst,
        "--algorithm",
        "xp",
        "--out",
        sched.to_str().unwrap(),
        "--svg",
        svg.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{out:?}");
    assert!(stdout(&out).contains("value: 8"));

    let out = jitshop(&["verify", &inst, sched.to_str().unwrap()]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).trim(), "feasible, value 8");

    let again = dir.path().join("again.svg");
    let out = jitshop(&["gantt", &inst, sched.to_str().unwrap(), "--svg", again.to_str().unwrap()]);
    assert!(out.status.success());
    assert_eq!(fs::read(&svg).unwrap(), fs::read(&again).unwrap());
}

#[test]
fn verify_reports_infeasible_schedule() {
    let dir = TempDir::new().unwrap();
    let inst = write(dir.path(), "f3.json", F3_EXAMPLE);
    let sched = write(
        dir.path(),
        "bad.json",
        r#"{"jit_set":["J1"],"rejected":["J2","J3"],
            "permutations":[["J1"],["J1"],["J1"]],
            "starts":{"J1":[0,1,1]}}"#,
    );
    let out = jitshop(&["verify", &inst, &sched]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).starts_with("infeasible"));
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let f3 = write(dir.path(), "f3.json", F3_EXAMPLE);
    // solver precondition
    assert_eq!(jitshop(&["solve", &f3, "--algorithm", "fpt-dp1"]).status.code(), Some(3));

    let big = dir.path().join("big.json");
    let out = jitshop(&[
        "generate", "--jobs", "50", "--distinct-dues", "5", "--out", big.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert_eq!(
        jitshop(&["solve", big.to_str().unwrap(), "--algorithm", "oracle"]).status.code(),
        Some(3)
    );

    // validation and parse errors
    let zero_w = write(
        dir.path(),
        "w0.json",
        r#"{"format":1,"machines":2,"jobs":[{"id":"a","p":[1,1],"d":4,"w":0}]}"#,
    );
    assert_eq!(jitshop(&["solve", &zero_w]).status.code(), Some(2));
    let broken = write(dir.path(), "broken.json", "{\"format\":1,");
    let out = jitshop(&["solve", &broken]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("broken.json:1:"));
    assert_eq!(
        jitshop(&["generate", "--jobs", "5", "--distinct-dues", "7"]).status.code(),
        Some(2)
    );

    // totals past i64
    let huge = write(
        dir.path(),
        "huge.json",
        &format!(
            r#"{{"format":1,"machines":2,"jobs":[{{"id":"a","p":[1,1],"d":{0},"w":{0}}}]}}"#,
            i64::MAX
        ),
    );
    assert_eq!(jitshop(&["solve", &huge]).status.code(), Some(4));

    // missing file
    assert_eq!(jitshop(&["solve", "/nonexistent/x.json"]).status.code(), Some(1));
}

#[test]
fn reduce_then_solve_hits_threshold() {
    let dir = TempDir::new().unwrap();
    let f2 = dir.path().join("f2.json");
    let out = jitshop(&[
        "reduce", "ksum-f2", "--values", "1,2,4", "--k", "2", "--target", "3", "--out",
        f2.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{out:?}");
    assert!(String::from_utf8_lossy(&out.stderr).contains("threshold 273"));
    let out = jitshop(&["solve", f2.to_str().unwrap()]);
    assert!(stdout(&out).contains("value: 273"));

    let f3 = dir.path().join("f3.json");
    let out = jitshop(&["reduce", "f2-f3", "--input", f2.to_str().unwrap(), "--out", f3.to_str().unwrap()]);
    assert!(out.status.success());
    let text = fs::read_to_string(&f3).unwrap();
    assert!(text.contains("\"construction\": \"f2-f3\""));
    assert!(text.contains("\"threshold\": 273"));

    // T = B is only accepted by the relaxed three-machine construction
    let args = ["reduce", "ksum-f3", "--values", "1,2", "--k", "2", "--target", "3"];
    assert_eq!(jitshop(&args).status.code(), Some(2));
    let out = jitshop(&[&args[..], &["--relaxed"]].concat());
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("threshold 134"));
}

#[test]
fn crosscheck_and_bench_commands() {
    let out = jitshop(&["crosscheck", "--seeds", "20", "--max-jobs", "6", "--ksum-max-h", "2"]);
    assert!(out.status.success(), "{out:?}");
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["failed"], 0);
    assert_eq!(report["cases"].as_array().unwrap().len(), 20);

    let out = jitshop(&["bench", "--algorithm", "fpt-dw", "--n", "1000", "--param", "8"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let row: Vec<&str> = text.lines().nth(1).unwrap().split('\t').collect();
    assert_eq!(row[0], "fpt-dw");
    assert_eq!(row[4], "256");
}

fn instances() -> impl Strategy<Value = Instance> {
    (1usize..=4).prop_flat_map(|m| {
        let job = (prop::collection::vec(1i64..=1_000_000, m), 1i64..=i32::MAX as i64, 1i64..=99);
        prop::collection::vec(job, 0..12).prop_map(move |rows| {
            let jobs = rows
                .into_iter()
                .enumerate()
                .map(|(i, (p, d, w))| Job::new(format!("job-{i}"), p, d, w))
                .collect();
            Instance::new(m, jobs).unwrap()
        })
    })
}

proptest! {
    #[test]
    fn instance_files_round_trip(inst in instances()) {
        let doc = InstanceDoc::from(inst);
        let text = instance_to_string(&doc);
        let back = parse_instance(&text, "mem").unwrap();
        prop_assert_eq!(&back, &doc);
        prop_assert_eq!(instance_to_string(&back), text);
    }

    #[test]
    fn generator_is_deterministic(n in 1usize..40, d in 1usize..6, seed in any::<u64>()) {
        prop_assume!(d <= n);
        let spec = GeneratorSpec::new(3, n, d, seed);
        let a = generate(&spec).unwrap();
        prop_assert_eq!(&a, &generate(&spec).unwrap());
        let mut dues: Vec<i64> = a.jobs.iter().map(|j| j.due).collect();
        dues.sort_unstable();
        dues.dedup();
        prop_assert_eq!(dues.len(), d);
    }
}
