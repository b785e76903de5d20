use std::path::Path;
use std::process::{Command, Output};

use popproto::generators::flock_binary;
use popproto::model::format::parse_protocol;
use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_popproto")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("structured output is JSON")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn gen_flock(dir: &Path, k: &str) -> std::path::PathBuf {
    let file = dir.join(format!("flock{k}.json"));
    let o = run(&["gen", "--kind", "flock-binary", "-k", k, "-o", path(&file)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    file
}

#[test]
fn generated_files_parse_back() {
    let dir = tempfile::tempdir().unwrap();
    let file = gen_flock(dir.path(), "2");
    let p = parse_protocol(&std::fs::read_to_string(&file).unwrap()).unwrap();
    assert_eq!(p, flock_binary(2).unwrap());
}

#[test]
fn verify_accepts_and_rejects() {
    let dir = tempfile::tempdir().unwrap();
    let file = gen_flock(dir.path(), "2");
    assert_eq!(code(&run(&["verify", "--protocol", path(&file), "--eta", "4", "--max-input", "10"])), 0);
    let o = run(&["verify", "-p", path(&file), "--eta", "5", "--max-input", "10", "--format", "structured"]);
    assert_eq!(code(&o), 1);
    let v = json(&o);
    assert_eq!(v["result"], "reject");
    assert_eq!(v["counterexample"]["input"], "4");
}

#[test]
fn certify_then_check_and_tamper() {
    let dir = tempfile::tempdir().unwrap();
    let file = gen_flock(dir.path(), "1");
    let cert = dir.path().join("flock1.cert");
    let o = run(&["certify", "-p", path(&file), "-o", path(&cert), "--format", "structured"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(json(&o)["a"].as_str().unwrap().parse::<u64>().unwrap() >= 2);
    assert_eq!(code(&run(&["check", "-p", path(&file), "--cert", path(&cert)])), 0);

    let mut c: Value = serde_json::from_str(&std::fs::read_to_string(&cert).unwrap()).unwrap();
    c["d_b"] = serde_json::json!({ "1": "1" });
    let bad = dir.path().join("bad.cert");
    std::fs::write(&bad, c.to_string()).unwrap();
    let o = run(&["check", "-p", path(&file), "--cert", path(&bad), "--format", "structured"]);
    assert_eq!(code(&o), 1);
    assert_eq!(json(&o)["condition"], "pump_in_free_states");
    let text = run(&["check", "-p", path(&file), "--cert", path(&bad)]);
    assert!(String::from_utf8_lossy(&text.stdout).contains("pump_in_free_states"));
}

#[test]
fn with_leaders_search() {
    let dir = tempfile::tempdir().unwrap();
    let file = gen_flock(dir.path(), "2");
    let o = run(&["certify", "-p", path(&file), "--variant", "with-leaders", "--i-max", "10", "--format", "structured"]);
    assert_eq!(code(&o), 0);
    assert_eq!(json(&o)["certificate"]["variant"], "with_leaders");
    assert_eq!(code(&run(&["certify", "-p", path(&file), "--variant", "with-leaders", "--i-max", "2"])), 1);
}

#[test]
fn usage_errors() {
    assert_eq!(code(&run(&["frobnicate"])), 2);
    assert_eq!(code(&run(&["verify", "--eta", "4"])), 2);
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"states\": []}").unwrap();
    let o = run(&["verify", "-p", path(&bad), "--eta", "4", "--max-input", "6"]);
    assert_eq!(code(&o), 2);
    assert!(!o.stderr.is_empty());
    let file = gen_flock(dir.path(), "1");
    assert_eq!(code(&run(&["verify", "-p", path(&file), "--eta", "1", "--max-input", "6"])), 2);
}

#[test]
fn limits_exit_three() {
    let dir = tempfile::tempdir().unwrap();
    let file = gen_flock(dir.path(), "3");
    let o = run(&["verify", "-p", path(&file), "--eta", "8", "--max-input", "12", "--max-nodes", "5", "--format", "structured"]);
    assert_eq!(code(&o), 3);
    assert_eq!(json(&o)["partial"], true);
    let o = run(&["busybeaver", "-n", "3", "--timeout", "0.3", "--format", "structured"]);
    assert_eq!(code(&o), 3);
    assert_eq!(json(&o)["partial"], true);
}

#[test]
fn structured_output_is_deterministic() {
    let args = ["busybeaver", "-n", "2", "--cutoff", "12", "--table", "--format", "structured"];
    let (a, b) = (run(&args), run(&args));
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let v = json(&a);
    assert_eq!(v["protocols"], "108");
    assert_eq!(v["best"]["eta"], "2");
    assert_eq!(v["entries"].as_array().unwrap().len(), 108);

    let r1 = run(&["gen", "--kind", "random", "--states", "4", "--seed", "7"]);
    let r2 = run(&["gen", "--kind", "random", "--states", "4", "--seed", "7"]);
    assert_eq!(r1.stdout, r2.stdout);
    parse_protocol(&String::from_utf8(r1.stdout).unwrap()).unwrap();
}

#[test]
fn analysis_commands() {
    let dir = tempfile::tempdir().unwrap();
    let file = gen_flock(dir.path(), "1");
    let f = path(&file);

    let v = json(&run(&["stable-basis", "-p", f, "--polarity", "s1", "--format", "structured"]));
    assert_eq!(v["ideals"], "1");
    assert_eq!(v["decomposition"]["ideals"][0]["free"], serde_json::json!(["2"]));

    let v = json(&run(&["saturate", "-p", f, "--format", "structured"]));
    assert_eq!((v["j"].as_str(), v["length"].as_str()), (Some("1"), Some("1")));

    let v = json(&run(&["pottier", "-p", f, "--format", "structured"]));
    assert_eq!(v["xi"], "4394");

    let v = json(&run(&["reach", "-p", f, "--config", "1=3", "--format", "structured"]));
    assert_eq!(v["value"], "1");

    let v = json(&run(&["constants", "-n", "2", "--format", "structured"]));
    assert_eq!(v["beta"]["exponent"], "241");
    assert_eq!(v["final_bound_holds"], true);
    assert_eq!(code(&run(&["constants", "-p", f])), 0);
}
