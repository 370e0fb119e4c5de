//! Executable Python projects that replay the simulator's semantics.
//!
//! Layout (directories configurable with the `src_dir` / `impl_dir`
//! options):
//!
//! ```text
//! src/arc_runtime.py          scheduler, checked arithmetic, trace I/O
//! src/main.py                 --input/--ticks/--output entry point
//! src/model.py                wiring tables and unit construction
//! src/units/<inst>_<n>.py     one unit per automaton or rule-table instance
//! src/wrappers/<C>Wrapper.py  one wrapper per native component
//! impl/<C>Impl.py             user implementation, created once
//! arc-manifest.json
//! ```

use std::collections::BTreeMap;
use std::fmt::Write;

use crate::model::*;
use crate::sim::{port_sources, PortSource};

use super::scaffold::{self, render};
use super::{manifest, Backend, CodegenError, GeneratedFile, Options, GENERATOR_VERSION};

pub struct ReferenceBackend;

struct Layout {
    src: String,
    imp: String,
}

fn layout(options: &Options) -> Result<Layout, CodegenError> {
    let mut l = Layout { src: "src".to_string(), imp: "impl".to_string() };
    for (k, v) in options {
        let slot = match k.as_str() {
            "src_dir" => &mut l.src,
            "impl_dir" => &mut l.imp,
            _ => return Err(CodegenError::UnknownOption(k.clone())),
        };
        let valid = !v.is_empty()
            && v.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
            && !v.starts_with(|c: char| c.is_ascii_digit());
        if !valid {
            return Err(CodegenError::InvalidOption { option: k.clone(), value: v.clone() });
        }
        *slot = v.clone();
    }
    if l.src == l.imp {
        return Err(CodegenError::InvalidOption { option: "impl_dir".into(), value: l.imp });
    }
    Ok(l)
}

impl Backend for ReferenceBackend {
    fn name(&self) -> &'static str {
        "reference"
    }

    fn generate(&self, model: &InstanceModel, options: &Options) -> Result<Vec<GeneratedFile>, CodegenError> {
        let l = layout(options)?;
        let header = format!("# Generated by arc-reference {GENERATOR_VERSION} for {}; do not edit.\n", model.root.definition);
        let slots: BTreeMap<&str, &str> = [
            ("generator_version", GENERATOR_VERSION),
            ("model_name", model.root.definition.as_str()),
        ]
        .into_iter()
        .collect();

        let mut files = vec![
            GeneratedFile::generated(format!("{}/{}", l.src, scaffold::RUNTIME.path), render(&scaffold::RUNTIME, &slots)?),
            GeneratedFile::generated(format!("{}/{}", l.src, scaffold::MAIN.path), render(&scaffold::MAIN, &slots)?),
        ];

        let atomics = model.atomic_nodes();
        let mut natives: BTreeMap<&str, &InstanceNode> = BTreeMap::new();
        let mut unit_modules = Vec::with_capacity(atomics.len());
        for (idx, n) in atomics.iter().enumerate() {
            match n.behavior().expect("atomic") {
                ResolvedBehavior::Native => {
                    natives.entry(&n.definition).or_insert(n);
                    unit_modules.push(None);
                }
                b => {
                    let module = format!("{}_{idx}", n.name);
                    files.push(GeneratedFile::generated(
                        format!("{}/units/{module}.py", l.src),
                        format!("{header}{}", unit_source(n, b)?),
                    ));
                    unit_modules.push(Some(module));
                }
            }
        }
        for def in natives.keys() {
            files.push(GeneratedFile::generated(
                format!("{}/wrappers/{def}Wrapper.py", l.src),
                format!("{header}{}", wrapper_source(def, &l.imp)),
            ));
            files.push(GeneratedFile::user_stub(format!("{}/{def}Impl.py", l.imp), impl_stub(def)));
        }
        files.push(GeneratedFile::generated(
            format!("{}/model.py", l.src),
            format!("{header}{}", model_source(model, &atomics, &unit_modules)?),
        ));
        let m = manifest("reference", model, &files);
        files.push(m);
        Ok(files)
    }
}

fn py_str(s: &str) -> String {
    // JSON string syntax is a subset of Python's
    serde_json::to_string(s).expect("string")
}

fn py_value(v: &Value) -> String {
    match v {
        Value::Bool(true) => "True".to_string(),
        Value::Bool(false) => "False".to_string(),
        Value::Int(i) => i.to_string(),
        Value::Str(s) => py_str(s),
        Value::Enum { value, .. } => py_str(value),
    }
}

fn py_type(ty: &TypeExpr, enums: &BTreeMap<String, Vec<String>>) -> Result<String, CodegenError> {
    Ok(match ty {
        TypeExpr::Primitive(p) => py_str(p.keyword()),
        TypeExpr::EnumRef(e) => {
            let values = enums.get(e).ok_or_else(|| CodegenError::UnsupportedConstruct(format!("unknown enumeration {e}")))?;
            let vs: Vec<String> = values.iter().map(|v| py_str(v)).collect();
            format!("[{}, [{}]]", py_str(e), vs.join(", "))
        }
        TypeExpr::TypeParam(t) => return Err(CodegenError::UnsupportedConstruct(format!("unbound type parameter {t}"))),
    })
}

fn py_expr(e: &RExpr, ports: &[ResolvedPort]) -> String {
    match e {
        RExpr::Const(v) => py_value(v),
        RExpr::Var(i) => format!("v[{i}]"),
        RExpr::Port(i) => format!("rt.read(i, {})", py_str(&ports[*i].name)),
        RExpr::Unary(UnOp::Neg, x) => format!("rt.neg({})", py_expr(x, ports)),
        RExpr::Unary(UnOp::Not, x) => format!("(not {})", py_expr(x, ports)),
        RExpr::Binary(op, l, r) => {
            let (l, r) = (py_expr(l, ports), py_expr(r, ports));
            match op {
                BinOp::Add => format!("rt.add({l}, {r})"),
                BinOp::Sub => format!("rt.sub({l}, {r})"),
                BinOp::Mul => format!("rt.mul({l}, {r})"),
                BinOp::Div => format!("rt.div({l}, {r})"),
                _ => format!("({l} {} {r})", op.symbol()),
            }
        }
    }
}

fn py_outputs(outs: &[(usize, ROutput)], ports: &[ResolvedPort]) -> String {
    let items: Vec<String> = outs
        .iter()
        .map(|(p, o)| {
            let rhs = match o {
                ROutput::Absent => "None".to_string(),
                ROutput::Expr(e) => py_expr(e, ports),
            };
            format!("{}: {rhs}", py_str(&ports[*p].name))
        })
        .collect();
    format!("{{{}}}", items.join(", "))
}

/// Body of one firing: outputs first, then updates against pre-tick `v`.
fn py_fire(out: &mut String, r: &Reaction, ports: &[ResolvedPort], indent: &str, next_state: Option<usize>) {
    writeln!(out, "{indent}out = {}", py_outputs(&r.outputs, ports)).unwrap();
    if !r.updates.is_empty() {
        writeln!(out, "{indent}nv = list(v)").unwrap();
        for (k, e) in &r.updates {
            writeln!(out, "{indent}nv[{k}] = {}", py_expr(e, ports)).unwrap();
        }
        writeln!(out, "{indent}self.v = nv").unwrap();
    }
    if let Some(s) = next_state {
        writeln!(out, "{indent}self.state = {s}").unwrap();
    }
    writeln!(out, "{indent}return out").unwrap();
}

fn py_condition(r: &Reaction, ports: &[ResolvedPort]) -> String {
    let mut parts: Vec<String> = r
        .patterns
        .iter()
        .map(|(p, pat)| {
            let m = format!("i[{}]", py_str(&ports[*p].name));
            match pat {
                RPattern::Absent => format!("{m} is None"),
                RPattern::Wildcard => format!("{m} is not None"),
                RPattern::Value(v) => format!("{m} == {}", py_value(v)),
            }
        })
        .collect();
    if let Some(c) = &r.condition {
        parts.push(py_expr(c, ports));
    }
    if parts.is_empty() {
        "True".to_string()
    } else {
        parts.join(" and ")
    }
}

fn unit_source(n: &InstanceNode, b: &ResolvedBehavior) -> Result<String, CodegenError> {
    let ports = &n.ports;
    let ins: Vec<String> = ports.iter().filter(|p| p.direction == Direction::In).map(|p| py_str(&p.name)).collect();
    let mut s = String::new();
    let kind = if matches!(b, ResolvedBehavior::Automaton(_)) { "automaton" } else { "rules" };
    writeln!(s, "\"\"\"{} : {} ({kind}).\"\"\"\n", n.path, n.definition).unwrap();
    s.push_str("import arc_runtime as rt\n\n");
    if let ResolvedBehavior::Automaton(a) = b {
        let states: Vec<String> = a.states.iter().map(|x| py_str(x)).collect();
        writeln!(s, "STATES = [{}]\n", states.join(", ")).unwrap();
    }
    s.push_str("\nclass Unit:\n");
    writeln!(s, "    path = {}", py_str(&n.path)).unwrap();
    writeln!(s, "    ins = [{}]\n", ins.join(", ")).unwrap();
    s.push_str("    def __init__(self):\n");
    if let ResolvedBehavior::Automaton(a) = b {
        writeln!(s, "        self.state = {}", a.initial).unwrap();
    }
    s.push_str("        self.v = []\n\n");
    s.push_str("    def init(self):\n");
    let inits: Vec<String> = b.variables().iter().map(|v| py_expr(&v.init, ports)).collect();
    s.push_str("        v = []\n");
    writeln!(s, "        self.v = [{}]", inits.join(", ")).unwrap();
    match b {
        ResolvedBehavior::Automaton(a) => {
            s.push_str("        v = self.v\n");
            writeln!(s, "        return {}\n", py_outputs(&a.initial_outputs, ports)).unwrap();
        }
        _ => s.push_str("        return {}\n\n"),
    }
    s.push_str("    def react(self, tick, i):\n        v = self.v\n");
    match b {
        ResolvedBehavior::Automaton(a) => {
            for (si, _) in a.states.iter().enumerate() {
                let ts: Vec<&ResolvedTransition> = a.transitions.iter().filter(|t| t.from == si).collect();
                if ts.is_empty() {
                    continue;
                }
                writeln!(s, "        if self.state == {si}:").unwrap();
                for t in ts {
                    writeln!(s, "            if {}:", py_condition(&t.reaction, ports)).unwrap();
                    py_fire(&mut s, &t.reaction, ports, "                ", Some(t.to));
                }
            }
        }
        ResolvedBehavior::Rules(r) => {
            for rule in &r.rules {
                writeln!(s, "        if {}:", py_condition(rule, ports)).unwrap();
                py_fire(&mut s, rule, ports, "            ", None);
            }
        }
        ResolvedBehavior::Native => unreachable!("natives have wrappers"),
    }
    s.push_str("        return {}\n");
    Ok(s)
}

fn wrapper_source(def: &str, imp: &str) -> String {
    format!(
        "\"\"\"Wrapper for native component {def}; the implementation is {imp}/{def}Impl.py.\"\"\"

import arc_runtime as rt
from {imp}.{def}Impl import {def}Impl


def create(path, ins, outs, config, override=None):
    impl = override if override is not None else {def}Impl()
    return rt.NativeUnit(path, ins, outs, config, impl)
"
    )
}

fn impl_stub(def: &str) -> String {
    format!(
        "\"\"\"Implementation of native component {def}.

Created once by the generator and never overwritten; edit freely.
\"\"\"


class {def}Impl:
    def init(self, config):
        \"\"\"Messages visible on the out-ports at tick 0 (omitted ports are absent).\"\"\"
        return {{}}

    def react(self, tick, inputs):
        \"\"\"Messages seen at `tick` -> out-port messages visible at tick + 1.\"\"\"
        return {{}}
"
    )
}

fn model_source(
    model: &InstanceModel,
    atomics: &[&InstanceNode],
    unit_modules: &[Option<String>],
) -> Result<String, CodegenError> {
    let enums = &model.enums;
    let mut s = String::new();
    writeln!(s, "\"\"\"Wiring of {} as flattened tables.\"\"\"\n", model.root.definition).unwrap();
    s.push_str("import arc_runtime as rt\n");
    for m in unit_modules.iter().flatten() {
        writeln!(s, "from units import {m}").unwrap();
    }
    let mut wrappers: Vec<&str> = atomics
        .iter()
        .filter(|n| matches!(n.behavior(), Some(ResolvedBehavior::Native)))
        .map(|n| n.definition.as_str())
        .collect();
    wrappers.sort();
    wrappers.dedup();
    for w in &wrappers {
        writeln!(s, "from wrappers import {w}Wrapper").unwrap();
    }
    writeln!(s, "\nMODEL_NAME = {}\n", py_str(&model.root.definition)).unwrap();

    let unit_index: BTreeMap<&str, usize> = atomics.iter().enumerate().map(|(i, n)| (n.path.as_str(), i)).collect();
    let mut keys = Vec::new();
    let mut inputs = Vec::new();
    let mut native_outputs = Vec::new();
    for n in model.nodes() {
        let native = matches!(n.behavior(), Some(ResolvedBehavior::Native));
        for p in &n.ports {
            let k = PortPath::new(&n.path, &p.name).key();
            let ty = py_type(&p.ty, enums)?;
            if n.path == model.root.path && p.direction == Direction::In {
                inputs.push(format!("    {}: {ty},", py_str(&k)));
            }
            if native && p.direction == Direction::Out {
                native_outputs.push(format!("    {}: {ty},", py_str(&k)));
            }
            keys.push(k);
        }
    }
    keys.sort();
    s.push_str("KEYS = [\n");
    for k in &keys {
        writeln!(s, "    {},", py_str(k)).unwrap();
    }
    s.push_str("]\n\nINPUTS = {\n");
    for l in &inputs {
        writeln!(s, "{l}").unwrap();
    }
    s.push_str("}\n\nNATIVE_OUTPUTS = {\n");
    for l in &native_outputs {
        writeln!(s, "{l}").unwrap();
    }
    s.push_str("}\n\nNATIVES = [\n");
    for n in atomics.iter().filter(|n| matches!(n.behavior(), Some(ResolvedBehavior::Native))) {
        writeln!(s, "    {},", py_str(&n.path)).unwrap();
    }
    s.push_str("]\n\nSOURCES = {\n");
    for (k, src) in port_sources(model) {
        let v = match src {
            PortSource::Output(pp) => format!("(\"out\", {}, {})", unit_index[pp.instance.as_str()], py_str(&pp.port)),
            PortSource::Input(pp) => format!("(\"in\", {})", py_str(&pp.key())),
            PortSource::Absent => "None".to_string(),
        };
        writeln!(s, "    {}: {v},", py_str(&k)).unwrap();
    }
    s.push_str("}\n\n\ndef build(stubs):\n    \"\"\"One unit per atomic instance; `stubs` maps native paths to schedules.\"\"\"\n    return [\n");
    for (n, m) in atomics.iter().zip(unit_modules) {
        match m {
            Some(m) => writeln!(s, "        {m}.Unit(),").unwrap(),
            None => {
                let ins: Vec<String> =
                    n.ports.iter().filter(|p| p.direction == Direction::In).map(|p| py_str(&p.name)).collect();
                let mut outs = Vec::new();
                for p in n.ports.iter().filter(|p| p.direction == Direction::Out) {
                    outs.push(format!("{}: {}", py_str(&p.name), py_type(&p.ty, enums)?));
                }
                let config: Vec<String> = n.config.iter().map(|(k, v)| format!("{}: {}", py_str(k), py_value(v))).collect();
                let path = py_str(&n.path);
                writeln!(
                    s,
                    "        {}Wrapper.create({path}, [{}], {{{}}}, {{{}}}, rt.ScriptedStub(stubs[{path}]) if {path} in stubs else None),",
                    n.definition,
                    ins.join(", "),
                    outs.join(", "),
                    config.join(", ")
                )
                .unwrap();
            }
        }
    }
    s.push_str("    ]\n");
    Ok(s)
}
