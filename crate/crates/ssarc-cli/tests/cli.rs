use std::path::PathBuf;
use std::process::Command;

use serde_json::Value;

fn spec(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("specs")
        .join(name)
}

fn run(args: &[&str]) -> (i32, Value) {
    let out = Command::new(env!("CARGO_BIN_EXE_ssarc"))
        .args(args)
        .output()
        .expect("binary runs");
    let v = serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}",
            String::from_utf8_lossy(&out.stdout)
        )
    });
    (out.status.code().unwrap(), v)
}

fn run_raw(args: &[&str]) -> Vec<u8> {
    Command::new(env!("CARGO_BIN_EXE_ssarc"))
        .args(args)
        .output()
        .unwrap()
        .stdout
}

#[test]
fn koch_dimension() {
    let koch = spec("koch.json");
    let (code, r) = run(&["dimension", koch.to_str().unwrap()]);
    assert_eq!(code, 0);
    let s = r["result"]["s"].as_f64().unwrap();
    assert!((s - 4f64.ln() / 3f64.ln()).abs() < 1e-10);
    assert_eq!(r["digest"].as_str().unwrap().len(), 64);
}

#[test]
fn omega_corner_classes() {
    let w = spec("omega_rational.json");
    let (code, r) = run(&["angles", w.to_str().unwrap()]);
    assert_eq!(code, 0);
    for e in r["result"]["theta"].as_array().unwrap() {
        let want = if e["p"] == 3 { "Zero" } else { "Positive" };
        assert_eq!(e["class"], want, "θ_{}", e["p"]);
    }
    assert_eq!(r["result"]["regular"], true);
}

#[test]
fn classify_7_14_against_on_both_routes() {
    let (code, r) = run(&["family", "classify", "--tau", "7.14:nu=8", "--t", "2"]);
    assert_eq!(code, 0);
    let res = &r["result"];
    assert_eq!(res["number_theoretic"]["status"], "EvidenceAgainst");
    assert_eq!(res["geometric"]["status"], "EvidenceAgainst");
    assert_eq!(res["consistent"], true);
}

#[test]
fn classify_rational_at_t1() {
    let (_, r) = run(&["family", "classify", "--tau", "2001/2000", "--t", "1"]);
    assert_eq!(
        r["result"]["number_theoretic"]["status"],
        "HoldsRationalRatio"
    );
    assert_eq!(r["result"]["geometric"]["status"], "HoldsRationalRatio");
}

#[test]
fn reports_are_byte_identical() {
    let koch = spec("koch.json");
    let args = [
        "conditions",
        koch.to_str().unwrap(),
        "--t",
        "1.2",
        "--depth",
        "4",
    ];
    assert_eq!(run_raw(&args), run_raw(&args));
    let args = [
        "family",
        "classify",
        "--tau",
        "7.13:nu=8",
        "--t",
        "1.5",
        "--bound",
        "5000",
    ];
    assert_eq!(run_raw(&args), run_raw(&args));
}

#[test]
fn render_writes_all_vertices() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("koch.svg");
    let koch = spec("koch.json");
    let (code, r) = run(&[
        "render",
        koch.to_str().unwrap(),
        "--depth",
        "3",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    assert_eq!(r["result"]["vertex_count"], 65);
    let svg = std::fs::read_to_string(&out).unwrap();
    let pts = svg
        .split("points=\"")
        .nth(1)
        .unwrap()
        .split('"')
        .next()
        .unwrap();
    assert_eq!(pts.split(' ').count(), 65);
    assert!(pts.starts_with("0.000000,0.000000") && pts.ends_with("1.000000,0.000000"));
}

#[test]
fn invalid_figure_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.json");
    // apex on the baseline
    std::fs::write(&p, r#"{"vertices": [[0,0],[0.5,0],[1,0]], "q": 1}"#).unwrap();
    let (code, r) = run(&["validate", p.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert_eq!(r["result"]["pass"], false);
    assert!(!r["result"]["violations"].as_array().unwrap().is_empty());
}

#[test]
fn errors_are_json_with_exit_two() {
    let (code, r) = run(&["dimension", "/no/such/file.json"]);
    assert_eq!(code, 2);
    assert!(r["error"]["message"].as_str().unwrap().contains("reading"));
    let (code, r) = run(&["family", "classify", "--tau", "3/2", "--t", "1"]);
    assert_eq!(code, 2);
    assert!(r["error"]["message"].is_string());
    let (code, _) = run(&["tau", "construct", "--kind", "7.13", "--params", "a0=1"]);
    assert_eq!(code, 2);
}

#[test]
fn construct_golden_exponents() {
    let (code, r) = run(&[
        "tau",
        "construct",
        "--kind",
        "7.11",
        "--params",
        "a0_log2=1/512,terms=2",
    ]);
    assert_eq!(code, 0);
    assert_eq!(r["result"]["exponents"], serde_json::json!(["9", "20"]));
    let (_, r) = run(&[
        "tau",
        "construct",
        "--kind",
        "7.14",
        "--params",
        "nu=8,terms=2",
    ]);
    assert_eq!(r["result"]["exponents"], serde_json::json!(["9", "262153"]));
}

#[test]
fn whitney_measure_on_iterated_koch() {
    let koch = spec("koch.json");
    let (code, r) = run(&[
        "measure",
        koch.to_str().unwrap(),
        "--depth",
        "2",
        "--whitney",
        "--iterate",
        "2",
        "--levels",
        "3",
        "--check-depth",
        "1",
    ]);
    assert_eq!(code, 0, "{r}");
    let w = &r["result"]["whitney"];
    assert_eq!(w["forget_hypothesis"]["holds"], true);
    assert_eq!(w["cylinder_inequality"]["violations"], 0);
    let f = w["f"].as_array().unwrap();
    assert_eq!(f.first().unwrap().as_f64(), Some(0.0));
    assert_eq!(f.last().unwrap().as_f64(), Some(1.0));
}
