use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn models() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../models")
}

fn bumperbot_files() -> Vec<PathBuf> {
    ["Types", "Devices", "Timer", "Controller", "BumperBot"]
        .iter()
        .map(|n| models().join("bumperbot").join(format!("{n}.arc")))
        .collect()
}

fn arc(args: &[&str], files: &[PathBuf]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_arc"))
        .env("ARC_COLOR", "never")
        .args(args.iter().take(1))
        .args(files)
        .args(args.iter().skip(1))
        .output()
        .expect("arc runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

#[test]
fn check_clean_model_exits_zero() {
    let o = arc(&["check"], &bumperbot_files());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(stdout(&o), "");
}

#[test]
fn check_reports_model_errors_with_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "Bad.arc", "component Src { port out Integer o; native; }\ncomponent Bad {\n  port out Boolean b;\n  instance Src s;\n  connect s.o -> b;\n}\n");
    let o = arc(&["check"], std::slice::from_ref(&f));
    assert_eq!(code(&o), 1);
    let out = stdout(&o);
    assert_eq!(out, format!("{}:5:3: error[W5]: connector `s.o -> b` joins Integer to Boolean\n", f.display()));

    let o = arc(&["check", "--json"], &[f]);
    assert_eq!(code(&o), 1);
    let line: serde_json::Value = serde_json::from_str(stdout(&o).lines().next().unwrap()).unwrap();
    assert_eq!(line["code"], "W5");
    assert_eq!(line["line"], 5);
}

#[test]
fn check_parse_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "Broken.arc", "component Broken {\n  port in Integer\n}\n");
    let o = arc(&["check"], &[f]);
    assert_eq!(code(&o), 2);
    assert!(stdout(&o).contains("error[P"), "{}", stdout(&o));
}

#[test]
fn missing_file_exits_two() {
    let o = arc(&["check"], &[PathBuf::from("/nonexistent/x.arc")]);
    assert_eq!(code(&o), 2);
}

#[test]
fn warnings_alone_do_not_fail_check() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(
        dir.path(),
        "Overlap.arc",
        "component Overlap {\n  port in Integer i;\n  port out Integer o;\n  automaton {\n    state A;\n    initial A;\n    A -> A [i = 1] / { o = 1 };\n    A -> A [i = 1] / { o = 2 };\n  }\n}\n",
    );
    let o = arc(&["check"], &[f]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(stdout(&o).contains("warning[W13]"), "{}", stdout(&o));
}

#[test]
fn simulate_reproduces_golden_trace() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("trace.jsonl");
    let golden = models().join("bumperbot/golden");
    let o = arc(
        &[
            "simulate",
            "--root",
            "BumperBot",
            "--input",
            golden.join("input.jsonl").to_str().unwrap(),
            "--stubs",
            golden.join("stubs.jsonl").to_str().unwrap(),
            "--ticks",
            "20",
            "--output",
            out.to_str().unwrap(),
        ],
        &bumperbot_files(),
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(fs::read_to_string(out).unwrap(), fs::read_to_string(golden.join("expected.jsonl")).unwrap());
}

#[test]
fn simulate_without_stub_for_sensor_exits_three() {
    let o = arc(&["simulate", "--root", "BumperBot", "--ticks", "5"], &bumperbot_files());
    assert_eq!(code(&o), 3);
    assert!(stderr(&o).contains("bumperBot.sensor"), "{}", stderr(&o));
}

#[test]
fn simulate_zero_ticks_writes_empty_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t.jsonl");
    let stubs = models().join("bumperbot/golden/stubs.jsonl");
    let o = arc(
        &["simulate", "--root", "BumperBot", "--stubs", stubs.to_str().unwrap(), "--ticks", "0", "--output", out.to_str().unwrap()],
        &bumperbot_files(),
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(fs::read_to_string(out).unwrap(), "");
}

#[test]
fn simulate_rejects_bad_input() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "Echo.arc", "component Echo {\n  port in Integer i;\n  port out Integer o;\n  rules { [i = *] => { o = i }; }\n}\n");
    let cases = [
        "{\"tick\":0,\"ports\":{\"echo.nope\":1}}\n",
        "{\"tick\":0,\"ports\":{\"echo.i\":true}}\n",
        "not json\n",
        "{\"tick\":1,\"ports\":{}}\n{\"tick\":0,\"ports\":{}}\n",
    ];
    for (k, text) in cases.iter().enumerate() {
        let input = write(dir.path(), &format!("in{k}.jsonl"), text);
        let o = arc(&["simulate", "--root", "Echo", "--input", input.to_str().unwrap(), "--ticks", "2"], std::slice::from_ref(&f));
        assert_eq!(code(&o), 2, "case {k}: {}", stderr(&o));
    }

    let input = write(dir.path(), "ok.jsonl", "{\"tick\":1,\"ports\":{\"echo.i\":7}}\n");
    let o = arc(&["simulate", "--root", "Echo", "--input", input.to_str().unwrap(), "--ticks", "3"], &[f]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(
        stdout(&o),
        concat!(
            "{\"tick\":0,\"ports\":{\"echo.i\":null,\"echo.o\":null}}\n",
            "{\"tick\":1,\"ports\":{\"echo.i\":7,\"echo.o\":null}}\n",
            "{\"tick\":2,\"ports\":{\"echo.i\":null,\"echo.o\":7}}\n",
        )
    );
}

#[test]
fn simulate_runtime_overflow_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(
        dir.path(),
        "Grow.arc",
        "component Grow {\n  port out Integer o;\n  rules {\n    var Integer x = 9223372036854775806;\n    [] => { x = x + 1, o = x };\n  }\n}\n",
    );
    let o = arc(&["simulate", "--root", "Grow", "--ticks", "5"], &[f]);
    assert_eq!(code(&o), 3, "{}", stderr(&o));
}

#[test]
fn unknown_root_exits_two_and_model_errors_exit_one() {
    let o = arc(&["simulate", "--root", "Nope", "--ticks", "1"], &bumperbot_files());
    assert_eq!(code(&o), 2);

    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "Bad.arc", "component Bad {\n  port out Integer o;\n  instance Missing m;\n}\n");
    let o = arc(&["simulate", "--root", "Bad", "--ticks", "1"], &[f]);
    assert_eq!(code(&o), 1);
}

#[test]
fn generate_twice_preserves_user_stubs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("gen");
    let args = ["generate", "--root", "BumperBot", "--backend", "reference", "--out", out.to_str().unwrap()];
    let o = arc(&args, &bumperbot_files());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).contains("skipped: 0"), "{}", stdout(&o));

    let impl_file = out.join("impl/TouchSensorImpl.py");
    fs::write(&impl_file, "# mine\n").unwrap();
    let o = arc(&args, &bumperbot_files());
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("skipped: 1, unchanged: 9"), "{}", stdout(&o));
    assert_eq!(fs::read_to_string(impl_file).unwrap(), "# mine\n");
}

#[test]
fn generate_unknown_backend_and_option() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap().to_string();
    let o = arc(&["generate", "--root", "BumperBot", "--backend", "cobol", "--out", &out], &bumperbot_files());
    assert_eq!(code(&o), 2);
    let o = arc(&["generate", "--root", "BumperBot", "--out", &out, "--option", "colour=blue"], &bumperbot_files());
    assert_eq!(code(&o), 2);
}

#[test]
fn generate_into_unwritable_location_exits_four() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = write(dir.path(), "file", "x");
    let o = arc(&["generate", "--root", "BumperBot", "--out", blocker.to_str().unwrap()], &bumperbot_files());
    assert_eq!(code(&o), 4, "{}", stderr(&o));
}

#[test]
fn graph_prints_dot() {
    let o = arc(&["graph", "--root", "BumperBot"], &bumperbot_files());
    assert_eq!(code(&o), 0);
    let dot = stdout(&o);
    assert!(dot.contains("digraph \"BumperBot\""));
    assert!(dot.contains("\"bumperBot.timer\" [label=\"timer : Timer\"]"), "{dot}");
}

#[test]
fn color_is_off_when_never_or_piped() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "Bad.arc", "component Bad {\n  instance Missing m;\n}\n");
    for mode in ["never", "auto"] {
        let o = Command::new(env!("CARGO_BIN_EXE_arc")).env("ARC_COLOR", mode).arg("check").arg(&f).output().unwrap();
        assert!(!stdout(&o).contains('\x1b'), "{mode}");
    }
}
