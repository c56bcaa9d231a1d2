use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn dprl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dprl")).args(args).output().unwrap()
}

fn ok(out: &Output) {
    assert_eq!(
        out.status.code(),
        Some(0),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Raw table plus recipe for a small synthetic screening task.
fn fixture(dir: &Path) -> (PathBuf, PathBuf) {
    let mut raw = String::from("score,visits,plan,outcome\n");
    for i in 0..500u32 {
        let score = (i * 31) % 100;
        let visits = (i * 7) % 12;
        let plan = ["basic", "plus", "pro"][(i % 3) as usize];
        let flip = i.wrapping_mul(2_654_435_761) % 8 == 0;
        let positive = (score > 60 || (plan == "pro" && visits > 6)) ^ flip;
        raw.push_str(&format!("{score},{visits},{plan},{}\n", u8::from(positive)));
    }
    let raw_path = dir.join("raw.csv");
    fs::write(&raw_path, raw).unwrap();
    let recipe = dir.join("task.recipe");
    fs::write(&recipe, "label = outcome\nnumeric_bins = 3\n").unwrap();
    (raw_path, recipe)
}

fn prepared(dir: &Path) -> (PathBuf, PathBuf) {
    let (raw, recipe) = fixture(dir);
    let (all, train, test) = (dir.join("all.csv"), dir.join("train.csv"), dir.join("test.csv"));
    ok(&dprl(&[
        "prepare",
        "--raw",
        s(&raw),
        "--recipe",
        s(&recipe),
        "--out",
        s(&all),
        "--train-out",
        s(&train),
        "--test-out",
        s(&test),
        "--seed",
        "3",
    ]));
    (train, test)
}

#[test]
fn prepare_mine_train_evaluate() {
    let dir = tempfile::tempdir().unwrap();
    let (train, test) = prepared(dir.path());
    let rules = dir.path().join("rules.json");
    ok(&dprl(&[
        "mine",
        "--data",
        s(&train),
        "--max-arity",
        "2",
        "--out",
        s(&rules),
    ]));

    let model = dir.path().join("model.json");
    let trace = dir.path().join("trace.json");
    ok(&dprl(&[
        "train",
        "--data",
        s(&train),
        "--rules",
        s(&rules),
        "--mechanism",
        "sm-laplace",
        "--epsilon",
        "10",
        "--max-length",
        "5",
        "--lambda",
        "0.05",
        "--confidence",
        "0.99",
        "--seed",
        "7",
        "--release-counts",
        "--out",
        s(&model),
        "--trace-out",
        s(&trace),
    ]));
    let rules_json: serde_json::Value = serde_json::from_str(&fs::read_to_string(&model).unwrap()).unwrap();
    let list = rules_json.as_array().unwrap();
    assert!(!list.is_empty() && list.len() <= 5);
    assert!(list.iter().all(|r| r.get("noisy_c0").is_some()));

    let out = dprl(&[
        "evaluate",
        "--model",
        s(&model),
        "--train",
        s(&train),
        "--test",
        s(&test),
    ]);
    ok(&out);
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let acc = report["accuracy"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&acc));
    assert!(report["vulnerability"]["overall"].as_f64().unwrap() >= 0.5);

    ok(&dprl(&["audit", "--trace", s(&trace)]));
}

#[test]
fn runs_are_reproducible_from_the_seed() {
    let dir = tempfile::tempdir().unwrap();
    let (train, _) = prepared(dir.path());
    let mut outputs = Vec::new();
    for name in ["a.json", "b.json"] {
        let path = dir.path().join(name);
        ok(&dprl(&[
            "train",
            "--data",
            s(&train),
            "--mechanism",
            "gl-gaussian",
            "--epsilon",
            "2",
            "--seed",
            "99",
            "--out",
            s(&path),
        ]));
        outputs.push(fs::read(&path).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);

    let again = tempfile::tempdir().unwrap();
    let (train2, _) = prepared(again.path());
    assert_eq!(fs::read(&train).unwrap(), fs::read(&train2).unwrap());
}

#[test]
fn missing_seed_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let (train, _) = prepared(dir.path());
    let out = dprl(&["train", "--data", s(&train), "--out", s(&dir.path().join("m.json"))]);
    ok(&out);
    assert!(String::from_utf8_lossy(&out.stderr).contains("seed: "));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let (train, _) = prepared(dir.path());
    let model = dir.path().join("m.json");
    let m = s(&model);

    assert_eq!(
        dprl(&["train", "--data", s(&train), "--epsilon", "0", "--out", m])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        dprl(&["train", "--data", s(&train), "--mechanism", "laplace", "--out", m])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(dprl(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(dprl(&["--help"]).status.code(), Some(0));

    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "a,label\n0,1\n3,0\n").unwrap();
    assert_eq!(dprl(&["train", "--data", s(&bad), "--out", m]).status.code(), Some(2));
    let absent = dir.path().join("absent.csv");
    assert_eq!(dprl(&["mine", "--data", s(&absent), "--out", m]).status.code(), Some(2));
}

#[test]
fn tampered_trace_fails_audit() {
    let dir = tempfile::tempdir().unwrap();
    let (train, _) = prepared(dir.path());
    let trace = dir.path().join("trace.json");
    ok(&dprl(&[
        "train",
        "--data",
        s(&train),
        "--epsilon",
        "1",
        "--seed",
        "1",
        "--out",
        s(&dir.path().join("m.json")),
        "--trace-out",
        s(&trace),
    ]));
    let mut value: serde_json::Value = serde_json::from_str(&fs::read_to_string(&trace).unwrap()).unwrap();
    let first = &mut value["accesses"][0]["epsilon"];
    *first = serde_json::json!(first.as_f64().unwrap() * 50.0);
    fs::write(&trace, value.to_string()).unwrap();
    let out = dprl(&["audit", "--trace", s(&trace)]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL"));
}

#[test]
fn sweep_and_noise_table() {
    let dir = tempfile::tempdir().unwrap();
    let (raw, recipe) = fixture(dir.path());
    let config = dir.path().join("sweep.conf");
    fs::write(
        &config,
        format!(
            "dataset = {}\nrecipe = {}\nmechanisms = none, sm-laplace, exponential\nepsilons = 1, 10\nruns = 4\nseed = 8\n",
            s(&raw),
            s(&recipe)
        ),
    )
    .unwrap();
    let (results, agg) = (dir.path().join("r.csv"), dir.path().join("a.csv"));
    ok(&dprl(&[
        "sweep",
        "--config",
        s(&config),
        "--out",
        s(&results),
        "--aggregate",
        s(&agg),
        "--threads",
        "2",
    ]));
    assert_eq!(fs::read_to_string(&results).unwrap().lines().count(), 1 + 3 * 2 * 4);
    assert_eq!(fs::read_to_string(&agg).unwrap().lines().count(), 1 + 3 * 2);

    let first = fs::read(&results).unwrap();
    ok(&dprl(&[
        "sweep",
        "--config",
        s(&config),
        "--out",
        s(&results),
        "--threads",
        "1",
    ]));
    assert_eq!(fs::read(&results).unwrap(), first);

    let table = dir.path().join("noise.csv");
    ok(&dprl(&[
        "noise-table",
        "--lambda-abs",
        "10",
        "--n",
        "10,100,1000",
        "--out",
        s(&table),
    ]));
    let text = fs::read_to_string(&table).unwrap();
    assert!(text.starts_with("n,smooth_scale,global_scale\n"));
    assert_eq!(text.lines().count(), 4);
    ok(&dprl(&["noise-table", "--out", s(&table)]));

    let bad = dir.path().join("bad.conf");
    fs::write(&bad, "epsilons = 0, 1\n").unwrap();
    assert_eq!(
        dprl(&["sweep", "--config", s(&bad), "--out", s(&results)])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn compas_training_example() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../..");
    let raw = root.join("data/raw/compas.csv");
    if !raw.exists() {
        eprintln!("skipping: run scripts/fetch_datasets.py to fetch {}", raw.display());
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("compas01.csv");
    ok(&dprl(&[
        "prepare",
        "--raw",
        s(&raw),
        "--recipe",
        s(&root.join("recipes/compas.recipe")),
        "--out",
        s(&data),
    ]));
    let model = dir.path().join("model.json");
    ok(&dprl(&[
        "train",
        "--data",
        s(&data),
        "--mechanism",
        "sm-laplace",
        "--epsilon",
        "10",
        "--max-length",
        "5",
        "--lambda",
        "0.05",
        "--confidence",
        "0.99",
        "--seed",
        "7",
        "--out",
        s(&model),
    ]));
    let value: serde_json::Value = serde_json::from_str(&fs::read_to_string(&model).unwrap()).unwrap();
    let n = value.as_array().unwrap().len();
    assert!((1..=6).contains(&n), "{n} rules");
}
