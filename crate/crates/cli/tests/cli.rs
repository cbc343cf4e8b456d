use std::io::Write;
use std::process::{Command, Stdio};

use serde_json::{json, Value};

const BIN: &str = env!("CARGO_BIN_EXE_fuchskit");

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

impl Run {
    fn json(&self) -> Value {
        serde_json::from_str(&self.stdout).unwrap_or_else(|e| panic!("not JSON ({e}): {}", self.stdout))
    }

    fn ok(&self) -> Value {
        assert_eq!(self.code, 0, "stdout: {}\nstderr: {}", self.stdout, self.stderr);
        let v = self.json();
        assert_eq!(v["schema"], "fuchskit/1");
        v
    }
}

fn run_with(args: &[&str], stdin: Option<&str>) -> Run {
    let mut child = Command::new(BIN)
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("binary runs");
    {
        let mut pipe = child.stdin.take().unwrap();
        if let Some(s) = stdin {
            pipe.write_all(s.as_bytes()).unwrap();
        }
    }
    let out = child.wait_with_output().unwrap();
    Run {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

fn run(args: &[&str]) -> Run {
    run_with(args, None)
}

fn op(order: usize, real: &[&str], apparent: &[&str], coeffs: Value) -> String {
    json!({"order": order, "real_points": real, "apparent_points": apparent, "coeffs": coeffs}).to_string()
}

/// `w'' = (1/z) w'`, solutions {1, z²}.
fn z_squared() -> String {
    op(2, &["0"], &[], json!([["1"], []]))
}

/// `w'' = 0` on ψ = z(z−1).
fn flat() -> String {
    op(2, &["0", "1"], &[], json!([[], []]))
}

fn strs(v: &Value) -> Vec<String> {
    v.as_array().unwrap().iter().map(|x| x.as_str().unwrap().to_string()).collect()
}

fn approx(v: &Value) -> (f64, f64) {
    (v[0].as_f64().unwrap(), v[1].as_f64().unwrap())
}

#[test]
fn dimensions_and_exit_codes() {
    let v = run(&["dimensions", "--m", "2", "--n", "2"]).ok();
    assert_eq!((v["e"].as_i64(), v["c"].as_i64()), (Some(0), Some(0)));
    assert_eq!(v["command"], "dimensions");

    let v = run(&["dimensions", "--m", "2", "--n", "3", "--N", "1"]).ok();
    assert_eq!(v["parameter_count"], 11);
    assert_eq!(v["condition_count"], 10);
    assert_eq!(v["difference"], 1);
    let v = run(&["dimensions", "--m", "3", "--n", "3"]).ok();
    assert_eq!((v["e"].as_i64(), v["c"].as_i64()), (Some(4), Some(8)));

    let r = run(&["dimensions", "--m", "2", "--n", "1"]);
    assert_eq!(r.code, 1);
    let v = r.json();
    assert_eq!(v["error"]["kind"], "precondition");
    assert!(v["error"]["message"].as_str().unwrap().contains("n must be ≥ 2"));
}

#[test]
fn usage_errors_exit_two() {
    let r = run(&["dimensions", "--m", "2", "--n", "2", "--bogus"]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("Usage"));
    assert_eq!(run(&["no-such-command"]).code, 2);
    assert_eq!(run(&["dimensions", "--m", "x", "--n", "2"]).code, 2);
    assert_eq!(run(&["apparent", "--input", "{}"]).code, 2);
    assert_eq!(run(&["--help"]).code, 0);
}

#[test]
fn domain_errors_are_structured() {
    let r = run(&["validate", "--input", "{\"order\": 2"]);
    assert_eq!(r.code, 1);
    assert_eq!(r.json()["error"]["kind"], "parse");

    let repeated = op(2, &["0", "0"], &[], json!([[], []]));
    let r = run(&["validate", "--input", &repeated]);
    assert_eq!(r.code, 1);
    assert!(r.json()["error"]["message"].as_str().unwrap().contains("points not distinct"));

    let r = run(&["validate", "--input", "/definitely/not/here.json"]);
    assert_eq!(r.code, 1);
    assert_eq!(r.json()["error"]["kind"], "io");
}

#[test]
fn input_from_file_stdin_and_output_file() {
    let dir = std::env::temp_dir().join(format!("fuchskit-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("op.json");
    std::fs::write(&path, z_squared()).unwrap();

    let v = run(&["apparent", "--input", path.to_str().unwrap(), "--point", "0"]).ok();
    assert_eq!(v["is_apparent"], true);

    let v = run_with(&["apparent", "--input", "-", "--point", "0"], Some(&z_squared())).ok();
    assert_eq!(v["is_apparent"], true);

    let text = "points: 0\nw'' = (1)/psi w' + (0)/psi^2 w\n";
    let v = run_with(&["apparent", "--input", "-", "--point", "0"], Some(text)).ok();
    assert_eq!(v["is_apparent"], true);

    let out = dir.join("report.json");
    let r = run(&["dimensions", "--m", "2", "--n", "2", "--output", out.to_str().unwrap()]);
    assert_eq!(r.code, 0);
    assert!(r.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["e"], 0);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn seeded_check_is_byte_identical() {
    let a = run(&["check", "--seed", "5", "--count", "10"]);
    let b = run(&["check", "--seed", "5", "--count", "10"]);
    assert_eq!(a.code, 0);
    assert_eq!(a.stdout, b.stdout);
    let v = a.ok();
    assert_eq!(v["pass"], true);
    assert_eq!(v["disagreements"].as_array().unwrap().len(), 0);
    assert_eq!(run(&["check", "--seed", "6", "--count", "10"]).ok()["pass"], true);
}

#[test]
fn algebra_examples() {
    let v = run(&["algebra", "det", "--input", "[[1,2],[3,4]]"]).ok();
    assert_eq!(v["determinant"], "-2");
    let v = run(&["algebra", "det", "--input", "[[1,0,0],[0,1,0],[0,0,1]]"]).ok();
    assert_eq!(v["determinant"], "1");
    let v = run(&["algebra", "rank", "--input", "[[0,0,0,0],[0,0,0,0],[0,0,0,0]]"]).ok();
    assert_eq!(v["rank"], 0);
    let v = run(&["algebra", "rank", "--input", "[[1,1,1],[1,2,4],[1,3,9]]"]).ok();
    assert_eq!(v["rank"], 3);

    let v = run(&["algebra", "roots", "--coeffs", "0,-2,1"]).ok();
    assert_eq!(v["roots"], json!([{"root": "0", "multiplicity": 1}, {"root": "2", "multiplicity": 1}]));
    let v = run(&["algebra", "roots", "--coeffs", "1,0,1"]).ok();
    assert_eq!(v["roots"].as_array().unwrap().len(), 2);
    let v = run(&["algebra", "roots", "--coeffs", "-2,0,1"]).ok();
    assert_eq!(v["unfactored"], true);
    assert!(v["roots"].as_array().unwrap().is_empty());

    let v = run(&["algebra", "series", "--num", "1", "--den", "1,-1", "--order", "4"]).ok();
    assert_eq!(strs(&v["coeffs"]), ["1", "1", "1", "1"]);
    let v = run(&["algebra", "series", "--num", "0,0,1", "--at", "1", "--order", "3"]).ok();
    assert_eq!(strs(&v["coeffs"]), ["1", "2", "1"]);

    let v = run(&["algebra", "falling", "--rho", "5", "--l", "2"]).ok();
    assert_eq!(v["value"], "20");
    let v = run(&["algebra", "falling", "--l", "2"]).ok();
    assert_eq!(strs(&v["polynomial"]), ["0", "-1", "1"]);
    let v = run(&["algebra", "falling", "--l", "0"]).ok();
    assert_eq!(strs(&v["polynomial"]), ["1"]);
}

#[test]
fn operator_examples() {
    let v = run(&["validate", "--input", &flat()]).ok();
    assert_eq!(v["valid"], true);
    assert_eq!(strs(&v["psi"]), ["0", "-1", "1"]);

    let v = run(&["validate", "--input", &op(2, &["0"], &[], json!([["1"], ["0", "-1"]]))]).ok();
    assert_eq!(v["valid"], false);
    assert_eq!(v["fuchs_degree_ok"][1]["ok"], false);

    let v = run(&["validate", "--input", &op(2, &["0"], &["2"], json!([[], []]))]).ok();
    assert_eq!(strs(&v["psi"]), ["0", "-2", "1"]);

    let v = run(&["validate", "--input", &op(2, &["0", "1", "2"], &["3"], json!([[], []]))]).ok();
    assert_eq!(v["accessory_degrees"]["total"], 11);
}

#[test]
fn connection_examples() {
    let v = run(&["companion", "--input", &flat()]).ok();
    assert_eq!(v["companion_matrix"], json!([[[], []], [["1"], ["-1", "2"]]]));

    let v = run(&["companion", "--input", &op(1, &["0", "1"], &[], json!([["1/3"]]))]).ok();
    assert_eq!(v["companion_matrix"], json!([[["1/3"]]]));

    let v = run(&["infinity-gauge", "--m", "2", "--n", "3"]).ok();
    assert_eq!(v["gauge"], json!([[["1"], []], [[], ["0", "0", "-1"]]]));
    let v = run(&["infinity-gauge", "--m", "3", "--n", "2"]).ok();
    assert_eq!(v["gauge"], json!([[["1"], [], []], [[], ["0", "-1"], []], [[], [], ["0", "0", "1"]]]));

    let v = run(&["exponents", "--input", &flat(), "--point", "0"]).ok();
    assert_eq!(strs(&v["points"][0]["eigenvalues"]), ["0", "1"]);

    let half = op(1, &["0", "1"], &[], json!([["-1/2", "1/2"]]));
    let v = run(&["exponents", "--input", &half, "--point", "0"]).ok();
    assert_eq!(strs(&v["points"][0]["eigenvalues"]), ["1/2"]);

    let cubic = op(3, &["0", "1", "-1"], &[], json!([["1", "2"], ["0", "1", "-3"], ["2", "0", "1", "5"]]));
    let v = run(&["exponents", "--input", &cubic]).ok();
    assert_eq!(v["trace_sum"], v["fuchs_relation"]);

    let v = run(&["bundle-type", "--input", &op(2, &["0", "1", "2"], &[], json!([[], []]))]).ok();
    assert_eq!(v["total"], -2);
    let v = run(&["bundle-type", "--input", &op(3, &["0", "1", "2"], &[], json!([[], [], []]))]).ok();
    assert_eq!(v["degrees"], json!([0, -2, -4]));

    let id = json!([[{"num": ["1"]}, {"num": []}], [{"num": []}, {"num": ["1"]}]]).to_string();
    let before = run(&["companion", "--input", &flat()]).ok();
    let after = run(&["gauge", "--input", &flat(), "--matrix", &id]).ok();
    assert_eq!(before["matrix"], after["matrix"]);

    let v = run(&["rigidity", "--input", &flat(), "--other", &flat()]).ok();
    assert_eq!(v["is_scalars"], true);
    let other = op(2, &["0", "1"], &[], json!([[], ["1"]]));
    let v = run(&["rigidity", "--input", &flat(), "--other", &other]).ok();
    assert_eq!(v["gauge_exists"], false);

    let v = run(&["genericity", "--input", r#"{"exponents":[["0","1/2"],["0","1/2"],["0","1/2"]]}"#]).ok();
    assert_eq!(v["generic"], false);
    let v = run(&["genericity", "--input", r#"{"exponents":[["1/5","1/7"],["1/5","1/7"],["1/5","1/7"]]}"#]).ok();
    assert_eq!(v["generic"], true);
    let v = run(&["genericity", "--input", r#"{"exponents":[["1"],["2"]]}"#]).ok();
    assert_eq!(v["generic"], true);
}

#[test]
fn frobenius_examples() {
    let v = run(&["apparent", "--input", &z_squared(), "--point", "0", "--cross-check"]).ok();
    assert_eq!(v["is_apparent"], true);
    assert_eq!(v["is_special_apparent"], true);
    assert_eq!(strs(&v["exponents"]), ["2", "0"]);
    assert_eq!(v["oracle_agrees"], true);

    let obstructed = op(2, &["0"], &[], json!([["1"], ["0", "-1"]]));
    let v = run(&["apparent", "--input", &obstructed, "--point", "0", "--cross-check"]).ok();
    assert_eq!(v["is_apparent"], false);
    assert_eq!(v["oracle_agrees"], true);

    let v = run(&["local", "--input", &z_squared(), "--point", "0"]).ok();
    assert_eq!(strs(&v["f"][0]), ["0", "-2", "1"]);

    let v = run(&["special-apparent", "--input", &z_squared(), "--point", "0"]).ok();
    assert_eq!(v["is_apparent"], true);
    assert_eq!(v["index1"]["value"], "1");

    let v = run(&["oracle", "--input", &z_squared(), "--point", "0"]).ok();
    assert_eq!(v["is_apparent"], true);
    assert_eq!(v["series"].as_array().unwrap().len(), 2);
    // w'' = (1/z)w' − (1/z)w
    let log = op(2, &["0"], &[], json!([["1"], ["0", "-1"]]));
    let v = run(&["oracle", "--input", &log, "--point", "0"]).ok();
    assert_eq!(v["is_apparent"], false);
    assert!(v["obstruction"].is_object());
    let v = run(&["oracle", "--input", &flat(), "--point", "5"]).ok();
    assert_eq!(strs(&v["exponents"]), ["1", "0"]);

    let v = run(&["annihilate", "--input", r#"{"basis":[["1"],["0","0","1"]]}"#]).ok();
    assert_eq!(v["coeffs"], json!([["1"], []]));
    let v = run(&["annihilate", "--input", r#"{"basis":[["1"],["0","1"]]}"#]).ok();
    assert!(v["apparent_points"].as_array().unwrap().is_empty());

    let third = run(&["annihilate", "--input", r#"{"basis":[["1"],["0","1"],["0","0","0","1"]]}"#]).ok();
    let mut doc = third.clone();
    let obj = doc.as_object_mut().unwrap();
    obj.remove("schema");
    obj.remove("command");
    let doc = doc.to_string();
    for a in strs(&third["apparent_points"]) {
        let v = run(&["special-apparent", "--input", &doc, "--point", &a]).ok();
        assert_eq!(v["is_apparent"], true, "{a}");
        assert_eq!(v["condition_residuals"].as_array().unwrap().len(), 3);
    }
}

#[test]
fn moduli_examples() {
    let v = run(&["constraints", "--input", r#"{"m":1,"points":["0","1"]}"#]).ok();
    assert_eq!(v["rank"]["rank"], 2);
    assert_eq!(v["system"]["blocks"][0]["rows"].as_array().unwrap().len(), 3);
    let v = run(&["constraints", "--input", r#"{"m":1,"points":["0","1"],"apparent":["2"]}"#]).ok();
    assert_eq!(v["rank"]["rank"], 3);
    let v = run(&["constraints", "--input", r#"{"m":2,"points":["0","1","-1"],"apparent":["1/2"]}"#, "--matrix"]).ok();
    assert_eq!(v["rank"]["rank"], 10);
    assert_eq!(v["rank"]["pass"], true);
    assert!(v["matrix"].is_array());

    let v = run(&["vandermonde", "--points", "0,1,2"]).ok();
    assert_eq!(v["abs_equal"], true);
    assert_eq!(v["matrix"].as_array().unwrap().len(), 4);
    assert!(v["determinant"] == "4" || v["determinant"] == "-4");
    let v = run(&["vandermonde", "--points", "3,-1/2"]).ok();
    assert_eq!(v["matrix"], json!([["1", "3"], ["1", "-1/2"]]));
    let v = run(&["vandermonde", "--points", "0,1,1"]).ok();
    assert_eq!(v["closed_form"], "0");
    assert_eq!(v["determinant"], "0");
    let v = run(&["vandermonde", "--points", "0,1,2", "--plan", "cubic"]).ok();
    assert_eq!(v["matrix"].as_array().unwrap().len(), 6);

    let v = run(&["hodge-params", "--input", r#"{"mu":[["1/4","-3/2"]],"m":2,"n":3}"#]).ok();
    assert_eq!(v["beta"], "1/4");
    assert_eq!(v["lambdas"][0][0], "0");
    assert_eq!(v["alphas"][0][1], "1/2");
}

#[test]
fn cyclic_examples() {
    let v = run(&["roundtrip", "--input", &flat()]).ok();
    assert_eq!(v["pass"], true);
    let v = run(&["roundtrip", "--input", &z_squared()]).ok();
    assert_eq!(v["pass"], true);
    let v = run(&["cyclic", "--input", &op(1, &["2"], &[], json!([["1/3"]]))]).ok();
    assert_eq!(v["candidate"], 0);
    assert!(v["apparent_locus"].as_array().unwrap().is_empty());

    let base = op(2, &["0", "1"], &[], json!([["1", "-3"], ["2"]]));
    let g = json!([[{"num": ["1"]}, {"num": []}], [{"num": ["1"]}, {"num": ["1"]}]]).to_string();
    let v = run(&["cyclic", "--input", &base, "--gauge", &g]).ok();
    let recovered = v["recovered"].to_string();
    let locus = &v["apparent_locus"];
    assert!(!locus.as_array().unwrap().is_empty());
    for p in ["0", "1"] {
        let a = run(&["exponents", "--input", &base, "--point", p]).ok();
        let b = run(&["exponents", "--input", &recovered, "--point", p]).ok();
        assert_eq!(a["points"][0]["eigenvalues"], b["points"][0]["eigenvalues"]);
    }
    for r in locus.as_array().unwrap() {
        let v = run(&["apparent", "--input", &recovered, "--point", r["root"].as_str().unwrap()]).ok();
        assert_eq!(v["is_apparent"], true);
    }
}

#[test]
fn monodromy_examples() {
    let half = op(1, &["0"], &[], json!([["1/2"]]));
    let v = run(&["monodromy", "--input", &half, "--point", "0", "--tolerance", "1e-9"]).ok();
    let (re, im) = approx(&v["matrix"][0][0]);
    assert!((re + 1.0).abs() < 1e-8 && im.abs() < 1e-8, "{re} {im}");

    let v = run(&["monodromy", "--input", &z_squared(), "--point", "0", "--apparent"]).ok();
    assert_eq!(v["apparent"], true);
    let log = op(2, &["0", "1"], &[], json!([["1", "-1"], []]));
    let v = run(&["monodromy", "--input", &log, "--point", "0", "--apparent"]).ok();
    assert_eq!(v["apparent"], false);
    let trivial = op(1, &["0"], &[], json!([[]]));
    let v = run(&["monodromy", "--input", &trivial, "--point", "0", "--apparent"]).ok();
    assert_eq!(v["apparent"], true);

    let v = run(&["monodromy", "--input", &flat(), "--global"]).ok();
    assert_eq!(v["pass"], true);

    let r = run(&["monodromy", "--input", &flat()]);
    assert_eq!(r.code, 1);
    let r = run(&["monodromy", "--input", &flat(), "--point", "7"]);
    assert_eq!(r.code, 1);
    assert_eq!(r.json()["error"]["kind"], "precondition");
}

#[test]
fn sweep_formats() {
    // varying only H_2's top coefficient keeps the exponents at 0 fixed
    let family = json!({
        "base": {"order": 2, "real_points": ["0", "1", "-1"], "coeffs": [["1/3"], ["0", "1/5"]]},
        "delta": [[], ["0", "0", "1/7"]],
        "grid": ["0", "1/2", "1"],
    })
    .to_string();
    let v = run(&["sweep", "--input", &family, "--point", "0"]).ok();
    assert_eq!(v["rows"].as_array().unwrap().len(), 3);
    assert_eq!(v["failures"], 0);
    assert!(v["max_deviation"].as_f64().unwrap() < 1e-5);

    let r = run(&["sweep", "--input", &family, "--point", "0", "--format", "csv"]);
    assert_eq!(r.code, 0);
    let lines: Vec<&str> = r.stdout.lines().collect();
    assert_eq!(lines[0], "parameter,point,char_poly,error_estimate,deviation,failure");
    assert_eq!(lines.len(), 4);
    assert!(lines[2].starts_with("1/2,0,"));
}
