use std::process::{Command, Output};

use serde_json::Value;

fn bartool(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bartool"))
        .args(args)
        .output()
        .expect("spawn bartool")
}

fn ok(args: &[&str]) -> Value {
    let out = bartool(args);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

fn code(args: &[&str]) -> i32 {
    bartool(args).status.code().unwrap()
}

#[test]
fn uniform_bound() {
    let v = ok(&["uniform-bound", "--fan", "binary", "--bar", "len3"]);
    assert_eq!(v["command"], "uniform-bound");
    assert_eq!(v["result"]["N"], 3);
    assert_eq!(v["result"]["level_sizes"], serde_json::json!([1, 2, 4, 8]));
    assert_eq!(v["result"]["minimality"]["node"], serde_json::json!([0, 0]));
    assert_eq!(
        code(&[
            "uniform-bound",
            "--fan",
            "binary",
            "--bar",
            "len3",
            "--max-depth",
            "2"
        ]),
        3
    );
    assert_eq!(
        code(&["uniform-bound", "--fan", "binary", "--bar", "nope"]),
        2
    );
    assert_eq!(
        code(&["uniform-bound", "--fan", "binary", "--bar", "first_one"]),
        2
    );
    assert_eq!(
        code(&[
            "uniform-bound",
            "--fan",
            "binary",
            "--bar",
            "first_one",
            "--monotonize"
        ]),
        3
    );
}

#[test]
fn embed() {
    assert_eq!(ok(&["embed", "--fan", "binary", "2"])["result"]["phi"], 7);
    assert_eq!(ok(&["embed", "--fan", "ternary", "1"])["result"]["phi"], 5);
    let v = ok(&["embed", "--fan", "ternary", "--transfer", "4"]);
    assert_eq!(
        (v["result"]["N"].clone(), v["result"]["M"].clone()),
        (4.into(), 1.into())
    );
    assert_eq!(
        ok(&["embed", "--fan", "binary", "--transfer", "0"])["result"]["M"],
        0
    );
}

#[test]
fn modulus() {
    let n = |args: &[&str]| ok(args)["result"]["N"].as_u64().unwrap();
    assert_eq!(
        n(&["modulus", "--fan", "binary", "--function", "coord0"]),
        1
    );
    assert_eq!(n(&["modulus", "--fan", "binary", "--function", "one"]), 0);
    assert_eq!(
        n(&["modulus", "--fan", "binary", "--function", "coord3"]),
        4
    );
    assert_eq!(
        n(&["modulus", "--fan", "binary", "--function", "from_c3"]),
        3
    );
    assert_eq!(
        n(&[
            "modulus",
            "--fan",
            "binary",
            "--function",
            "weighted5",
            "--epsilon",
            "1/8"
        ]),
        5
    );
    let via = ok(&[
        "modulus",
        "--fan",
        "ternary",
        "--function",
        "coord0",
        "--via-embedding",
    ]);
    assert_eq!(via["result"]["method"], "transferred");
    let v = ok(&[
        "modulus",
        "--compact",
        "unit",
        "--function",
        "identity",
        "--epsilon",
        "1/4",
    ]);
    assert_eq!(v["result"]["verification"]["passed"], true);
    let v = ok(&[
        "modulus",
        "--compact",
        "cantor",
        "--function",
        "binary_value",
        "--epsilon",
        "1/10",
    ]);
    assert_eq!(v["result"]["verification"]["passed"], true);
    assert_eq!(
        code(&["modulus", "--fan", "binary", "--function", "weighted5"]),
        2
    );
}

#[test]
fn convert() {
    let v = ok(&[
        "convert", "--bar", "p_len2", "--to", "cbar", "--fan", "binary",
    ]);
    assert_eq!(v["result"]["containment"]["passed"], true);
    assert_eq!(
        v["result"]["d_table"][0],
        serde_json::json!({"d": true, "node": []})
    );
    ok(&["convert", "--bar", "c_len2", "--to", "pi01"]);
    assert_eq!(
        code(&["convert", "--bar", "len3", "--to", "cbar", "--fan", "binary"]),
        2
    );
}

#[test]
fn instance_files() {
    let dir = env!("CARGO_TARGET_TMPDIR");
    let path = format!("{dir}/four.json");
    std::fs::write(
        &path,
        r#"{"fan": "kary:4", "bar": {"kind": "dec", "pred": "len >= 2 or entry(0) = 3"}}"#,
    )
    .unwrap();
    let v = ok(&[
        "--instance",
        &path,
        "uniform-bound",
        "--fan",
        "default",
        "--bar",
        "default",
    ]);
    assert_eq!(v["result"]["N"], 2);
    assert_eq!(v["instance_sha256"].as_str().unwrap().len(), 64);
    let bad = format!("{dir}/bad.json");
    std::fs::write(
        &bad,
        r#"{"fan": "binary", "bar": {"kind": "dec", "pred": "len >"}}"#,
    )
    .unwrap();
    assert_eq!(code(&["--instance", &bad, "list"]), 2);
}

#[test]
fn output_is_deterministic() {
    let cases: [&[&str]; 3] = [
        &["uniform-bound", "--fan", "ternary", "--bar", "sum2_or_len4"],
        &["modulus", "--fan", "binary", "--function", "coord3"],
        &[
            "modulus",
            "--compact",
            "unit",
            "--function",
            "square",
            "--epsilon",
            "1/4",
        ],
    ];
    for args in cases {
        let first = bartool(args).stdout;
        assert_eq!(bartool(args).stdout, first);
        let one: Vec<&str> = ["--threads", "1"].iter().chain(args).copied().collect();
        let four: Vec<&str> = ["--threads", "4"].iter().chain(args).copied().collect();
        assert_eq!(bartool(&one).stdout, first, "{args:?}");
        assert_eq!(bartool(&four).stdout, first, "{args:?}");
    }
}
