//! Graphviz view of the instance tree: one cluster per composed instance,
//! one box per atomic instance, one edge per connector labelled with the
//! type it carries.  Ports of composed instances are drawn as points.

use std::fmt::Write;

use crate::model::*;

use super::{Backend, CodegenError, GeneratedFile, Options, GENERATOR_VERSION};

pub struct DotBackend;

impl Backend for DotBackend {
    fn name(&self) -> &'static str {
        "dot"
    }

    fn generate(&self, model: &InstanceModel, options: &Options) -> Result<Vec<GeneratedFile>, CodegenError> {
        if let Some(k) = options.keys().next() {
            return Err(CodegenError::UnknownOption(k.clone()));
        }
        let mut s = String::new();
        writeln!(s, "// Generated by arc-dot {GENERATOR_VERSION}; do not edit.").unwrap();
        writeln!(s, "digraph {} {{", quote(&model.root.definition)).unwrap();
        s.push_str("  rankdir=LR;\n  node [shape=box];\n");
        node(&mut s, &model.root, 1);
        let mut edges = Vec::new();
        for n in model.nodes() {
            for c in n.connectors() {
                edges.push(edge(model, c));
            }
        }
        for e in edges {
            writeln!(s, "  {e}").unwrap();
        }
        s.push_str("}\n");
        Ok(vec![GeneratedFile::generated(format!("{}.dot", model.root.definition), s)])
    }
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

fn node(s: &mut String, n: &InstanceNode, depth: usize) {
    let pad = "  ".repeat(depth);
    match &n.kind {
        NodeKind::Atomic(_) => {
            writeln!(s, "{pad}{} [label={}];", quote(&n.path), quote(&format!("{} : {}", n.name, n.definition))).unwrap();
        }
        NodeKind::Composed { children, .. } => {
            writeln!(s, "{pad}subgraph {} {{", quote(&format!("cluster_{}", n.path))).unwrap();
            writeln!(s, "{pad}  label={};", quote(&format!("{} : {}", n.name, n.definition))).unwrap();
            for p in &n.ports {
                let key = PortPath::new(&n.path, &p.name).key();
                writeln!(s, "{pad}  {} [shape=point, xlabel={}];", quote(&key), quote(&p.name)).unwrap();
            }
            for c in children {
                node(s, c, depth + 1);
            }
            writeln!(s, "{pad}}}").unwrap();
        }
    }
}

/// Atomic ports collapse onto their instance's node.
fn endpoint(model: &InstanceModel, p: &PortPath) -> (String, Option<String>, Option<TypeExpr>) {
    let n = model.find(&p.instance);
    let ty = n.and_then(|n| n.port(&p.port)).map(|port| port.ty.clone());
    match n {
        Some(n) if n.is_atomic() => (quote(&n.path), Some(p.port.clone()), ty),
        _ => (quote(&p.key()), None, ty),
    }
}

fn edge(model: &InstanceModel, c: &InstanceConnector) -> String {
    let (src, tail, ty) = endpoint(model, &c.source);
    let (dst, head, _) = endpoint(model, &c.target);
    let mut attrs = vec![format!("label={}", quote(&ty.map(|t| t.to_string()).unwrap_or_default()))];
    if let Some(t) = tail {
        attrs.push(format!("taillabel={}", quote(&t)));
    }
    if let Some(h) = head {
        attrs.push(format!("headlabel={}", quote(&h)));
    }
    format!("{src} -> {dst} [{}];", attrs.join(", "))
}
