//! End-to-end checks of the binary: flags, JSON shapes, exit codes, and
//! byte stability.

use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hyperloop"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json_of(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn fold_a3_flip_gives_c2() {
    let out = run(&["fold", "--type", "A3", "--auto", "flip"]);
    assert!(out.status.success());
    let v = json_of(&out);
    assert_eq!(v["folded_type"], "C2");
    assert_eq!(v["order"], 2);
}

#[test]
fn fold_d4_rot3_gives_g2() {
    let out = run(&["fold", "--type", "D4", "--auto", "rot3"]);
    assert!(out.status.success());
    assert_eq!(json_of(&out)["folded_type"], "G2");
}

#[test]
fn fold_identity() {
    let out = run(&["fold", "--type", "A1", "--auto", "id"]);
    assert!(out.status.success());
    let v = json_of(&out);
    assert_eq!(v["folded_type"], "A1");
    assert_eq!(v["order"], 1);
}

#[test]
fn fold_bad_type_is_usage_error() {
    let out = run(&["fold", "--type", "E9", "--auto", "flip"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn module_dimensions() {
    let out = run(&["module", "--type", "A1", "--hw", "3", "--field", "Q"]);
    assert!(out.status.success());
    assert_eq!(json_of(&out)["weyl_dim"], 4);

    let out = run(&["module", "--type", "A2", "--hw", "1,1", "--field", "F5", "--simple"]);
    assert!(out.status.success());
    let v = json_of(&out);
    assert_eq!(v["weyl_dim"], 8);
    assert_eq!(v["simple_dim"], 8);

    let out = run(&["module", "--type", "A1", "--hw", "2", "--field", "F2", "--simple"]);
    assert!(out.status.success());
    assert_eq!(json_of(&out)["simple_dim"], 2);
}

#[test]
fn verify_heisenberg_passes() {
    let out = run(&["verify", "heisenberg", "--nmax", "4"]);
    assert!(out.status.success());
    let v = json_of(&out);
    assert_eq!(v["suite"], "heisenberg");
    assert_eq!(v["cases"].as_array().unwrap().len(), 4);
}

#[test]
fn verify_restriction_single_case() {
    let out = run(&[
        "verify", "restriction", "--type", "A2", "--auto", "flip", "--field", "F5", "--pi",
        "w1@2",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json_of(&out);
    // the field is enlarged to carry sqrt 2
    assert!(v["cases"][0]["case"].as_str().unwrap().contains("F5^2"));
}

#[test]
fn drinfeld_single_linear_factor() {
    let out = run(&[
        "drinfeld", "--type", "A3", "--auto", "flip", "--field", "F7", "--pi", "1:(1-2u)",
    ]);
    assert!(out.status.success());
    let v = json_of(&out);
    let blocks = v["standard_decomposition"]["blocks"].as_array().unwrap();
    assert_eq!(blocks.len(), 1);
    assert_eq!(blocks[0]["a"], "2");
    // omega is supported at the node-map image with the same point
    assert_eq!(v["evaluation_factors"][0]["point"], "2");
}

#[test]
fn drinfeld_trivial_pi() {
    let out = run(&["drinfeld", "--type", "A3", "--auto", "flip", "--field", "F7", "--pi", "1"]);
    assert!(out.status.success());
    let v = json_of(&out);
    assert!(v["standard_decomposition"]["blocks"].as_array().unwrap().is_empty());
}

#[test]
fn drinfeld_nonsplit_is_precondition_error() {
    let out = run(&[
        "drinfeld", "--type", "A3", "--auto", "flip", "--field", "F5", "--pi", "1:(1-2u^2)",
    ]);
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("degree"), "{err}");
}

#[test]
fn pi_grammars_agree() {
    let a = run(&[
        "drinfeld", "--type", "A3", "--auto", "flip", "--field", "F7", "--pi", "w1@2*w1@3",
    ]);
    let b = run(&[
        "drinfeld", "--type", "A3", "--auto", "flip", "--field", "F7", "--pi", "1:(1-2u)(1-3u)",
    ]);
    assert!(a.status.success() && b.status.success());
    assert_eq!(json_of(&a)["omega"], json_of(&b)["omega"]);
    assert_eq!(
        json_of(&a)["standard_decomposition"],
        json_of(&b)["standard_decomposition"]
    );
}

#[test]
fn output_is_byte_stable() {
    let args = ["verify", "heisenberg", "--nmax", "3"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.stdout, b.stdout);

    let args = ["fold", "--type", "A4", "--auto", "flip"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn out_flag_writes_file() {
    let dir = std::env::temp_dir().join("hyperloop-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("fold.json");
    let out = run(&["fold", "--type", "A2", "--auto", "flip", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["folded_type"], "A1");
    std::fs::remove_file(&path).ok();
}
