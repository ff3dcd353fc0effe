mod common;

use std::path::Path;
use std::process::{Command, Output};

use common::problem_path;
use ljet::jet::JetContext;
use serde_json::Value;

fn run(args: &[&str], file: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ljet"))
        .args(args)
        .arg(file)
        .output()
        .expect("binary runs")
}

fn json(command: &str, n: u32) -> (i32, Value) {
    let out = run(&["--format", "json", command], &problem_path(n));
    let value: Value = serde_json::from_slice(&out.stdout)
        .unwrap_or_else(|e| panic!("{command} on example {n}: {e}"));
    (out.status.code().expect("exit code"), value)
}

fn scratch_file(name: &str, contents: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("ljet-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

/// Parsing a printed expression and printing it again gives the same text.
fn assert_round_trips(ctx: &JetContext, text: &str) {
    let e = ctx
        .parse(text)
        .unwrap_or_else(|err| panic!("{text}: {err}"));
    assert_eq!(e.to_string(), text);
}

#[test]
fn exit_codes_on_the_examples() {
    let expected = [
        ("check", [0, 0, 0, 0, 0]),
        ("chi", [0, 0, 1, 0, 1]),
        ("reduce", [1, 1, 0, 0, 0]),
    ];
    for (command, codes) in expected {
        for (i, code) in codes.iter().enumerate() {
            let n = i as u32 + 1;
            let (status, value) = json(command, n);
            assert_eq!(status, *code, "{command} on example {n}");
            assert_eq!(value["exit_code"], *code, "{command} on example {n}");
            assert_eq!(value["schema_version"], 1);
            assert_eq!(value["command"], command);
        }
    }
}

#[test]
fn text_output_agrees_with_json_exit_codes() {
    for n in 1..=5 {
        let text = run(&["chi"], &problem_path(n));
        let (status, _) = json("chi", n);
        assert_eq!(text.status.code(), Some(status));
        assert!(!text.stdout.is_empty());
    }
}

#[test]
fn malformed_input_reports_a_location() {
    let path = scratch_file("truncated.json", "{\"order\": 2,\n");
    let out = run(&["check"], &path);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 2"), "{err}");

    let path = scratch_file(
        "bad_expr.json",
        r#"{"order": 2, "equation": {"rhs": "v*(v1"}, "lambda": "0",
            "vector_field": {"rho": "0", "psi": "1"}}"#,
    );
    let out = run(&["check"], &path);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(
        err.contains("equation.rhs") && err.contains("column"),
        "{err}"
    );
}

#[test]
fn missing_file_is_an_input_error() {
    let out = run(&["check"], Path::new("/nonexistent/ljet/problem.json"));
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
}

#[test]
fn verify_solution_honours_the_tolerance_flag() {
    let path = problem_path(4);
    let out = run(&["--format", "json", "verify-solution"], &path);
    assert_eq!(out.status.code(), Some(0));
    let wrong = run(
        &[
            "--format",
            "json",
            "--solution",
            "cos(t + c1)",
            "verify-solution",
        ],
        &path,
    );
    assert_eq!(wrong.status.code(), Some(1));
    let value: Value = serde_json::from_slice(&wrong.stdout).unwrap();
    assert_eq!(value["residual"]["passed"], false);
}

#[test]
fn printed_expressions_parse_back() {
    let base = |n: u32| {
        let declared = common::load(n).ode.ctx().clone();
        let mut ctx = JetContext::new(declared.order()).with_constant("c1");
        for p in declared.parameters() {
            ctx = ctx.with_parameter(p);
        }
        for f in declared.functions() {
            ctx = ctx.with_function(f);
        }
        ctx
    };
    for n in 1..=5 {
        let ctx = base(n);
        let (_, check) = json("check", n);
        for key in ["lambda", "psi", "rho"] {
            assert_round_trips(&ctx, check["pair"][key].as_str().unwrap());
        }
        assert_round_trips(&ctx, check["residual"].as_str().unwrap());
        assert_round_trips(&ctx, check["commutation"]["mu"].as_str().unwrap());

        let (code, chi) = json("chi", n);
        if code == 0 {
            assert_round_trips(&ctx, chi["chi"].as_str().unwrap());
        }

        let (code, rec) = json("reconstruct", n);
        if code == 0 {
            let nonlocal = base(n).with_nonlocal();
            assert_round_trips(&nonlocal, rec["generator"]["xi"].as_str().unwrap());
            for e in rec["field"]["eta"].as_array().unwrap() {
                assert_round_trips(&nonlocal, e.as_str().unwrap());
            }
        }

        let (code, red) = json("reduce", n);
        if code == 0 {
            for z in red["zeta"].as_array().unwrap() {
                assert_round_trips(&ctx, z.as_str().unwrap());
            }
            assert_round_trips(&ctx, red["x"].as_str().unwrap());
        }
    }
}
