use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mbmom"))
}

fn models() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("models")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn model(name: &str) -> String {
    models().join(name).to_string_lossy().into_owned()
}

fn json(out: &Output) -> serde_json::Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid json")
}

fn scratch(name: &str, contents: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("mbmom-cli-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

#[test]
fn conv_and_mbmom_agree() {
    let file = model("two_by_two.json");
    let conv = json(&run(&["solve", &file, "--algorithm", "conv", "--json"]));
    let mb = json(&run(&["solve", &file, "--algorithm", "mbmom", "--branching", "max", "--json"]));
    assert_eq!(conv["normalizing_constant"], mb["normalizing_constant"]);
    assert_eq!(conv["indices"], mb["indices"]);
    assert_eq!(mb["normalizing_constant"]["exact"], "90");
    assert_eq!(mb["indices"]["throughput"][0]["exact"], "29/90");
    assert_eq!(mb["branching"], "max");

    let mva = json(&run(&["solve", &file, "--algorithm", "mva", "--json"]));
    assert_eq!(mva["indices"], mb["indices"]);
    assert!(mva["normalizing_constant"].is_null());
}

#[test]
fn every_branching_factor() {
    let file = model("three_classes.json");
    let reference = json(&run(&["solve", &file, "-a", "conv", "--json"]));
    for b in ["1", "2", "3", "max"] {
        let out = json(&run(&["solve", &file, "-b", b, "--json"]));
        assert_eq!(out["normalizing_constant"], reference["normalizing_constant"], "B={b}");
        assert_eq!(out["indices"], reference["indices"], "B={b}");
    }
}

#[test]
fn empty_population() {
    let path = scratch(
        "empty.json",
        r#"{"name":"empty","classes":[{"name":"a","population":0,"think_time":"1"}],
            "queues":[{"name":"q","multiplicity":1,"demands":["2"]}]}"#,
    );
    let out = json(&run(&["solve", path.to_str().unwrap(), "--json"]));
    assert_eq!(out["normalizing_constant"]["exact"], "1");
    assert_eq!(out["indices"]["throughput"][0]["exact"], "0");
    assert_eq!(out["indices"]["queue_length"][0][0]["exact"], "0");
}

#[test]
fn compare_passes_on_the_corpus() {
    let mut seen = 0;
    for entry in std::fs::read_dir(models()).unwrap() {
        let path = entry.unwrap().path();
        let out = run(&["compare", path.to_str().unwrap()]);
        assert!(out.status.success(), "{}: {}", path.display(), String::from_utf8_lossy(&out.stdout));
        assert!(String::from_utf8_lossy(&out.stdout).contains("all results exactly equal"));
        seen += 1;
    }
    assert!(seen >= 5);
}

#[test]
fn compare_json_lists_every_algorithm() {
    let out = json(&run(&["compare", &model("replicated.json"), "--json"]));
    assert_eq!(out["all_equal"], true);
    let names: Vec<&str> = out["results"].as_array().unwrap().iter().map(|r| r["algorithm"].as_str().unwrap()).collect();
    assert_eq!(names, ["mbmom-b1", "mbmom-bm", "mom", "mva", "brute"]);
}

#[test]
fn state_probability() {
    let file = model("two_by_two.json");
    let out = json(&run(&["prob", &file, "--queue", "1,0", "--queue", "1,1", "--delay", "0,0", "--json"]));
    assert_eq!(out["probability"]["exact"], "2/15");
    assert_eq!(out["state"], serde_json::json!([[1, 0], [1, 1], [0, 0]]));

    let out = run(&["prob", &file, "--queue", "1,0", "--queue", "0,1", "--delay", "0,0"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("infeasible state"));

    let out = run(&["prob", &model("replicated.json"), "--queue", "1", "--queue", "1", "--delay", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn cost_surface_csv() {
    let out = run(&["cost", "--population", "100"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "algorithm,M,R,N,time,space");
    assert_eq!(lines.len(), 1 + 3 * 100);
    assert!(!text.contains('\r'));

    let path = scratch("surface.csv", "");
    let out = run(&["cost", "--queues", "2,5", "--classes", "3..4", "--algorithms", "mb-bm", "-o", path.to_str().unwrap()]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 1 + 4);
    assert!(text.lines().skip(1).all(|l| l.starts_with("mb-bm,")));
}

#[test]
fn format_is_canonical_and_stable() {
    let once = run(&["format", &model("rational.json")]);
    assert!(once.status.success());
    let text = String::from_utf8(once.stdout).unwrap();
    assert!(text.contains("\"1/2\"") && text.contains("\"5/4\"") && !text.contains("0.5"));
    let path = scratch("canonical.json", &text);
    let twice = run(&["format", path.to_str().unwrap()]);
    assert_eq!(String::from_utf8(twice.stdout).unwrap(), text);
}

#[test]
fn exit_codes() {
    // usage and parse errors
    assert_eq!(run(&["bogus"]).status.code(), Some(1));
    assert_eq!(run(&["solve", "/nonexistent/model.json"]).status.code(), Some(1));
    assert_eq!(run(&["solve", &model("two_by_two.json"), "-b", "3"]).status.code(), Some(1));
    assert_eq!(run(&["cost", "--queues", "5..2"]).status.code(), Some(1));
    let bad = scratch("bad.json", "{\n  \"name\": \"x\",\n  \"classes\": [}\n");
    let out = run(&["solve", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"), "{}", String::from_utf8_lossy(&out.stderr));
    let bad = scratch("bad_field.json", r#"{"name":"x","classes":[{"name":"a","population":1,"think_time":"1/0"}],"queues":[{"name":"q","multiplicity":1,"demands":["1"]}]}"#);
    let out = run(&["solve", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("classes[0].think_time"));

    // solver errors
    let tied = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/tied_demands.json");
    let out = run(&["solve", tied.to_str().unwrap(), "--no-fallback"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("singular"));
    assert!(run(&["solve", tied.to_str().unwrap()]).status.success());

    assert_eq!(run(&["--help"]).status.code(), Some(0));
}
