use super::*;
use crate::load;

fn model(text: &str, root: &str) -> InstanceModel {
    load(&[("m.arc", text)]).unwrap_or_else(|d| panic!("{d:?}")).instantiate(root).unwrap()
}

const SMALL: &str = "
enum Cmd { GO, HALT }
component Src { port out Cmd o; native; }
component Relay { port in Cmd i, out Cmd o; rules { [i = GO] => { o = HALT }; [i = *] => { o = i }; } }
component Top { instance Src s; instance Relay r; instance Relay q; connect s.o -> r.i, q.i; }
";

fn reference(m: &InstanceModel) -> Vec<GeneratedFile> {
    ReferenceBackend.generate(m, &Options::new()).unwrap()
}

#[test]
fn default_layout() {
    let files = reference(&model(SMALL, "Top"));
    let paths: Vec<&str> = files.iter().map(|f| f.path.as_str()).collect();
    assert_eq!(
        paths,
        [
            "src/arc_runtime.py",
            "src/main.py",
            "src/units/r_1.py",
            "src/units/q_2.py",
            "src/wrappers/SrcWrapper.py",
            "impl/SrcImpl.py",
            "src/model.py",
            "arc-manifest.json",
        ]
    );
    let stubs: Vec<&str> = files.iter().filter(|f| f.kind == FileKind::UserStub).map(|f| f.path.as_str()).collect();
    assert_eq!(stubs, ["impl/SrcImpl.py"]);
    for f in files.iter().filter(|f| f.kind == FileKind::Generated && f.path.ends_with(".py")) {
        assert!(f.content.starts_with(b"# Generated by arc-reference "), "{}", f.path);
    }
}

#[test]
fn options_relocate_and_validate() {
    let m = model(SMALL, "Top");
    let opts = Options::from([("impl_dir".to_string(), "custom".to_string())]);
    let files = ReferenceBackend.generate(&m, &opts).unwrap();
    assert!(files.iter().any(|f| f.path == "custom/SrcImpl.py"));
    let bad = Options::from([("colour".to_string(), "x".to_string())]);
    assert_eq!(ReferenceBackend.generate(&m, &bad), Err(CodegenError::UnknownOption("colour".into())));
    let bad = Options::from([("src_dir".to_string(), "../x".to_string())]);
    assert!(matches!(ReferenceBackend.generate(&m, &bad), Err(CodegenError::InvalidOption { .. })));
}

#[test]
fn generation_is_deterministic() {
    let m = model(SMALL, "Top");
    assert_eq!(reference(&m), reference(&m));
    assert_eq!(DotBackend.generate(&m, &Options::new()), DotBackend.generate(&m, &Options::new()));
}

#[test]
fn manifest_inventories_files() {
    let m = model(SMALL, "Top");
    let files = reference(&m);
    let manifest: serde_json::Value = serde_json::from_slice(&files.last().unwrap().content).unwrap();
    assert_eq!(manifest["model_hash"], model_hash(&m));
    assert_eq!(manifest["generator_version"], GENERATOR_VERSION);
    let listed = manifest["files"].as_array().unwrap();
    assert_eq!(listed.len(), files.len() - 1);
    assert_eq!(listed[0]["sha256"], sha256_hex(&files[0].content));
    assert_eq!(listed[5]["kind"], "UserStub");
}

#[test]
fn emit_protects_user_stubs() {
    let dir = tempfile::tempdir().unwrap();
    let files = reference(&model(SMALL, "Top"));
    let first = emit(&files, dir.path());
    assert!(first.is_ok());
    assert_eq!(first.written.len(), files.len());

    let stub = dir.path().join("impl/SrcImpl.py");
    std::fs::write(&stub, "# mine\n").unwrap();
    let second = emit(&files, dir.path());
    assert_eq!(second.skipped, ["impl/SrcImpl.py"]);
    assert_eq!(second.unchanged.len(), files.len() - 1);
    assert!(second.written.is_empty());
    assert_eq!(std::fs::read_to_string(&stub).unwrap(), "# mine\n");
}

#[test]
fn emit_collects_io_errors() {
    let dir = tempfile::tempdir().unwrap();
    // a file where a directory is needed
    std::fs::write(dir.path().join("src"), "").unwrap();
    let report = emit(&reference(&model(SMALL, "Top")), dir.path());
    assert!(!report.is_ok());
    assert!(report.errors.iter().all(|(p, _)| p.starts_with("src/")));
    assert!(report.written.contains(&"impl/SrcImpl.py".to_string()));
}

fn dot(m: &InstanceModel) -> String {
    let files = DotBackend.generate(m, &Options::new()).unwrap();
    assert_eq!(files.len(), 1);
    String::from_utf8(files[0].content.clone()).unwrap()
}

#[test]
fn dot_fan_out_shares_source() {
    let text = dot(&model(SMALL, "Top"));
    assert!(text.contains("\"top.s\" -> \"top.r\" [label=\"Cmd\", taillabel=\"o\", headlabel=\"i\"];"), "{text}");
    assert!(text.contains("\"top.s\" -> \"top.q\" [label=\"Cmd\""));
    assert_eq!(text.matches(" -> ").count(), 2);
}

#[test]
fn dot_single_atomic() {
    let text = dot(&model("component A { port out Integer o; rules { } }", "A"));
    assert_eq!(text.matches("[label=\"a : A\"]").count(), 1);
    assert_eq!(text.matches(" -> ").count(), 0);
}
