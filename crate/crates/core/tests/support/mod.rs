//! Random models, source mutations and corpus loading shared by the
//! property and acceptance suites.  Everything is driven by a caller-owned
//! RNG so failures reproduce from a seed.

#![allow(dead_code)]

use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::Rng;

use arc_core::model::*;

pub fn repo() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

/// Every bundled `.arc` file, as `(relative name, text)`, sorted.
pub fn corpus() -> Vec<(String, String)> {
    fn walk(dir: &Path, out: &mut Vec<PathBuf>) {
        for e in std::fs::read_dir(dir).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                walk(&p, out);
            } else if p.extension().is_some_and(|x| x == "arc") {
                out.push(p);
            }
        }
    }
    let root = repo().join("models");
    let mut files = Vec::new();
    walk(&root, &mut files);
    files.sort();
    files
        .into_iter()
        .map(|p| (p.strip_prefix(&root).unwrap().display().to_string(), std::fs::read_to_string(&p).unwrap()))
        .collect()
}

/// Sources of one model directory below `models/`.
pub fn model_dir(name: &str) -> Vec<(String, String)> {
    corpus().into_iter().filter(|(p, _)| p.starts_with(&format!("{name}/"))).collect()
}

pub fn refs(src: &[(String, String)]) -> Vec<(&str, &str)> {
    src.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect()
}

// ---------------------------------------------------------------------------
// random syntax trees

const WORDS: &[&str] = &["a", "b", "x", "y", "go", "cmd", "val", "n", "t", "acc", "signal", "left", "z9", "_p", "Q"];

fn ident(rng: &mut impl Rng) -> String {
    let w = WORDS.choose(rng).unwrap();
    if rng.gen_bool(0.5) {
        format!("{w}{}", rng.gen_range(0..20))
    } else {
        w.to_string()
    }
}

fn upper(rng: &mut impl Rng, prefix: &str) -> String {
    format!("{prefix}{}", rng.gen_range(0..1000))
}

fn string_lit(rng: &mut impl Rng) -> String {
    const CHARS: &[char] = &['a', 'Z', ' ', '"', '\\', '\n', '\t', 'é', '→', '0', '-', '{', '}', ';', '/', '*'];
    (0..rng.gen_range(0..6)).map(|_| *CHARS.choose(rng).unwrap()).collect()
}

fn ty(rng: &mut impl Rng, params: &[String], enums: &[String]) -> TypeExpr {
    match rng.gen_range(0..5) {
        0 => TypeExpr::BOOLEAN,
        1 => TypeExpr::STRING,
        2 if !params.is_empty() => TypeExpr::TypeParam(params.choose(rng).unwrap().clone()),
        3 if !enums.is_empty() => TypeExpr::EnumRef(enums.choose(rng).unwrap().clone()),
        _ => TypeExpr::INTEGER,
    }
}

/// Only trees the parser can produce: no negative integer literals, no
/// enum literals (bare names parse as `Name`).
pub fn expr(rng: &mut impl Rng, depth: u32) -> Expr {
    if depth == 0 || rng.gen_bool(0.3) {
        return match rng.gen_range(0..4) {
            0 => Expr::Lit(Literal::Bool(rng.gen())),
            1 => Expr::Lit(Literal::Int(rng.gen_range(0..i64::MAX))),
            2 => Expr::Lit(Literal::Str(string_lit(rng))),
            _ => Expr::Name(ident(rng)),
        };
    }
    match rng.gen_range(0..6) {
        0 => Expr::Unary(if rng.gen() { UnOp::Neg } else { UnOp::Not }, Box::new(expr(rng, depth - 1))),
        _ => {
            use BinOp::*;
            let op = *[Add, Sub, Mul, Div, Eq, Ne, Lt, Le, Gt, Ge, And, Or].choose(rng).unwrap();
            Expr::binary(op, expr(rng, depth - 1), expr(rng, depth - 1))
        }
    }
}

fn literal(rng: &mut impl Rng) -> Literal {
    match rng.gen_range(0..4) {
        0 => Literal::Bool(rng.gen()),
        1 => Literal::Int(rng.gen_range(-i64::MAX..=i64::MAX)),
        2 => Literal::Str(string_lit(rng)),
        _ => Literal::Enum(upper(rng, "V")),
    }
}

fn patterns(rng: &mut impl Rng) -> Vec<PortPattern> {
    (0..rng.gen_range(0..3))
        .map(|_| PortPattern {
            port: ident(rng),
            pattern: match rng.gen_range(0..3) {
                0 => Pattern::Wildcard,
                1 => Pattern::Absent,
                _ => Pattern::Literal(literal(rng)),
            },
            span: Span::default(),
        })
        .collect()
}

fn actions(rng: &mut impl Rng) -> Vec<Assignment> {
    (0..rng.gen_range(0..3))
        .map(|_| Assignment {
            target: ident(rng),
            value: if rng.gen_bool(0.2) { ActionValue::Absent } else { ActionValue::Expr(expr(rng, 3)) },
            span: Span::default(),
        })
        .collect()
}

fn vars(rng: &mut impl Rng, params: &[String], enums: &[String]) -> Vec<VarDecl> {
    (0..rng.gen_range(0..3))
        .map(|_| VarDecl { ty: ty(rng, params, enums), name: ident(rng), init: expr(rng, 2), span: Span::default() })
        .collect()
}

fn behavior(rng: &mut impl Rng, params: &[String], enums: &[String]) -> Behavior {
    match rng.gen_range(0..3) {
        0 => Behavior::Native,
        1 => {
            let states: Vec<StateDecl> =
                (0..rng.gen_range(1..4)).map(|_| StateDecl { name: upper(rng, "S"), span: Span::default() }).collect();
            let pick = |rng: &mut _| states.choose(rng).unwrap().name.clone();
            let initial_state = pick(rng);
            let transitions = (0..rng.gen_range(0..4))
                .map(|_| Transition {
                    from: pick(rng),
                    to: pick(rng),
                    patterns: patterns(rng),
                    guard: rng.gen_bool(0.4).then(|| expr(rng, 3)),
                    actions: actions(rng),
                    span: Span::default(),
                })
                .collect();
            Behavior::Automaton(Automaton {
                variables: vars(rng, params, enums),
                initial_state,
                initial_outputs: actions(rng),
                initial_span: Span::default(),
                states,
                transitions,
            })
        }
        _ => Behavior::Rules(RuleTable {
            variables: vars(rng, params, enums),
            rules: (0..rng.gen_range(0..4))
                .map(|_| Rule {
                    patterns: patterns(rng),
                    condition: rng.gen_bool(0.4).then(|| expr(rng, 3)),
                    actions: actions(rng),
                    span: Span::default(),
                })
                .collect(),
        }),
    }
}

fn port_ref(rng: &mut impl Rng) -> PortRef {
    if rng.gen() {
        PortRef::own(ident(rng))
    } else {
        PortRef::sub(ident(rng), ident(rng))
    }
}

fn component(rng: &mut impl Rng, name: String, enums: &[String], others: &[String]) -> ComponentType {
    let type_params: Vec<String> = (0..rng.gen_range(0..3)).map(|i| format!("T{i}")).collect();
    let config_params = (0..rng.gen_range(0..3))
        .map(|_| ConfigParam { ty: ty(rng, &type_params, enums), name: ident(rng), span: Span::default() })
        .collect();
    let ports = (0..rng.gen_range(0..4))
        .map(|_| PortDecl {
            name: ident(rng),
            direction: if rng.gen() { Direction::In } else { Direction::Out },
            ty: ty(rng, &type_params, enums),
            span: Span::default(),
        })
        .collect();
    let composed = rng.gen_bool(0.4) && !others.is_empty();
    let (subcomponents, connectors, behaviors) = if composed {
        let subs = (0..rng.gen_range(1..4))
            .map(|_| SubcomponentDecl {
                instance_name: ident(rng),
                component: others.choose(rng).unwrap().clone(),
                type_args: (0..rng.gen_range(0..2)).map(|_| ty(rng, &type_params, enums)).collect(),
                config_args: (0..rng.gen_range(0..3)).map(|_| expr(rng, 2)).collect(),
                span: Span::default(),
            })
            .collect();
        let conns = (0..rng.gen_range(0..4))
            .map(|_| Connector { source: port_ref(rng), target: port_ref(rng), span: Span::default() })
            .collect();
        (subs, conns, Vec::new())
    } else {
        (Vec::new(), Vec::new(), vec![behavior(rng, &type_params, enums)])
    };
    ComponentType { name, type_params, config_params, ports, subcomponents, connectors, behaviors, span: Span::default() }
}

/// A syntactically valid (not necessarily well-typed) source unit.
pub fn source_unit(rng: &mut impl Rng) -> SourceUnit {
    let n_enums = rng.gen_range(0..3);
    let n_comps = rng.gen_range(1..5);
    let enums: Vec<EnumDecl> = (0..n_enums)
        .map(|i| EnumDecl {
            name: format!("E{i}"),
            values: (0..rng.gen_range(1..4)).map(|_| upper(rng, "V")).collect(),
            span: Span::default(),
        })
        .collect();
    let enum_names: Vec<String> = enums.iter().map(|e| e.name.clone()).collect();
    let comp_names: Vec<String> = (0..n_comps).map(|i| format!("C{i}")).collect();
    let components = comp_names.iter().map(|n| component(rng, n.clone(), &enum_names, &comp_names)).collect();
    SourceUnit { path: "random.arc".into(), enums, components }
}

// ---------------------------------------------------------------------------
// random well-formed hierarchies

/// Atomic building blocks; every output stays within a few thousand so
/// long runs cannot overflow.
pub const LEAVES: &str = "
component Inc(Integer k) {
  port in Integer i, out Integer o;
  rules {
    [i = *, i > 1000 or i < -1000] => { o = 0 };
    [i = *] => { o = i + k };
  }
}
component Mix {
  port in Integer a, in Integer b, out Integer o;
  rules {
    [a = *, b = *] => { o = (a + b) / 2 };
    [a = *] => { o = a };
    [b = *] => { o = -b };
  }
}
component Acc {
  port in Integer i, out Integer o;
  rules {
    var Integer s = 0;
    [i = *, s > 5000 or s < -5000] => { s = 0, o = 0 };
    [i = *, i > 1000 or i < -1000] => { o = s };
    [i = *] => { s = s + i, o = s + i };
    [] => { o = s };
  }
}
component Toggle {
  port in Integer i, out Integer o;
  automaton {
    state Lo, Hi;
    initial Lo / { o = 0 };
    Lo -> Hi [i = *] { i > 0 } / { o = 1 };
    Hi -> Lo [i = *] { i <= 0 } / { o = -1 };
    Hi -> Hi [i = --] / { o = 2 };
  }
}
component Hold {
  port in Integer i, out Integer o;
  rules {
    var Integer last = 0;
    [i = --] => { o = last };
    [i = *, i > 1000 or i < -1000] => { o = 0 };
    [i = *] => { last = i, o = i };
  }
}
component Delay<T> {
  port in T i, out T o;
  rules { [i = *] => { o = i }; }
}
";

struct Leaf {
    decl: String,
    inputs: &'static [&'static str],
}

fn leaf(rng: &mut impl Rng) -> Leaf {
    match rng.gen_range(0..6) {
        0 => Leaf { decl: format!("Inc({})", rng.gen_range(-5..=5)), inputs: &["i"] },
        1 => Leaf { decl: "Mix".into(), inputs: &["a", "b"] },
        2 => Leaf { decl: "Acc".into(), inputs: &["i"] },
        3 => Leaf { decl: "Toggle".into(), inputs: &["i"] },
        4 => Leaf { decl: "Hold".into(), inputs: &["i"] },
        _ => Leaf { decl: "Delay<Integer>".into(), inputs: &["i"] },
    }
}

pub struct Hierarchy {
    pub source: String,
    pub root: String,
    /// Keys of the root's in-ports.
    pub inputs: Vec<String>,
    pub atomics: usize,
    pub depth: usize,
}

struct HierGen<'r, R> {
    rng: &'r mut R,
    defs: Vec<String>,
    budget: usize,
    max_depth: usize,
    atomics: usize,
    boxes: usize,
    deepest: usize,
}

struct Child {
    name: String,
    inputs: Vec<String>,
    outputs: Vec<String>,
}

impl<R: Rng> HierGen<'_, R> {
    /// Defines a composed component at `depth` (root = 1); returns its name
    /// and port counts.  Needs `budget >= 1`.
    fn composite(&mut self, depth: usize) -> (String, usize, usize) {
        self.deepest = self.deepest.max(depth);
        let name = format!("Box{}", self.boxes);
        self.boxes += 1;
        let n_in = self.rng.gen_range(1..=2);
        let n_out = self.rng.gen_range(1..=2);
        let mut children = Vec::new();
        let mut lines = Vec::new();
        for k in 0..self.rng.gen_range(1..=3) {
            if self.budget == 0 {
                break;
            }
            let inst = format!("c{k}");
            if depth < self.max_depth && self.budget >= 2 && self.rng.gen_bool(0.4) {
                let (sub, sub_in, sub_out) = self.composite(depth + 1);
                lines.push(format!("  instance {sub} {inst};"));
                children.push(Child {
                    inputs: (0..sub_in).map(|i| format!("x{i}")).collect(),
                    outputs: (0..sub_out).map(|j| format!("y{j}")).collect(),
                    name: inst,
                });
            } else {
                self.budget -= 1;
                self.atomics += 1;
                let l = leaf(self.rng);
                lines.push(format!("  instance {} {inst};", l.decl));
                children.push(Child { inputs: l.inputs.iter().map(|s| s.to_string()).collect(), outputs: vec!["o".into()], name: inst });
            }
        }
        assert!(!children.is_empty());
        let mut sources: Vec<String> = (0..n_in).map(|i| format!("x{i}")).collect();
        for c in &children {
            sources.extend(c.outputs.iter().map(|o| format!("{}.{o}", c.name)));
        }
        let mut conns = Vec::new();
        for c in &children {
            for p in &c.inputs {
                if self.rng.gen_bool(0.9) {
                    conns.push(format!("  connect {} -> {}.{p};", sources.choose(self.rng).unwrap(), c.name));
                }
            }
        }
        for j in 0..n_out {
            conns.push(format!("  connect {} -> y{j};", sources.choose(self.rng).unwrap()));
        }
        let mut ports: Vec<String> = (0..n_in).map(|i| format!("in Integer x{i}")).collect();
        ports.extend((0..n_out).map(|j| format!("out Integer y{j}")));
        let def = format!("component {name} {{\n  port {};\n{}\n{}\n}}\n", ports.join(", "), lines.join("\n"), conns.join("\n"));
        self.defs.push(def);
        (name, n_in, n_out)
    }
}

/// A random, checkable hierarchy with depth <= `max_depth` and between 1
/// and `max_atomics` atomic instances.
pub fn hierarchy(rng: &mut impl Rng, max_depth: usize, max_atomics: usize) -> Hierarchy {
    let budget = rng.gen_range(1..=max_atomics);
    let mut g = HierGen { rng, defs: Vec::new(), budget, max_depth, atomics: 0, boxes: 0, deepest: 0 };
    let (root, n_in, _) = g.composite(1);
    let path = root_instance_name(&root);
    Hierarchy {
        source: format!("{LEAVES}\n{}", g.defs.join("\n")),
        inputs: (0..n_in).map(|i| format!("{path}.x{i}")).collect(),
        root,
        atomics: g.atomics,
        depth: g.deepest,
    }
}

// ---------------------------------------------------------------------------
// fuzzing

const TOKENS: &[&str] = &[
    "component", "enum", "port", "in", "out", "instance", "connect", "automaton", "rules", "native", "var", "state",
    "initial", "->", "=>", "=", "==", "!=", "<", ">", "<=", ">=", "{", "}", "(", ")", "[", "]", "<", ">", ",", ";",
    ".", "/", "*", "--", "-", "+", "Integer", "Boolean", "String", "true", "false", "and", "or", "not", "\"s\"",
    "\"unterminated", "/*", "*/", "//", "0", "9223372036854775807", "9223372036854775808", "A", "b", "_", "\n", " ",
    "\u{0}", "é", "@",
];

/// A mutated corpus file or a random token soup.
pub fn fuzz_input(rng: &mut impl Rng, corpus: &[(String, String)]) -> Vec<u8> {
    match rng.gen_range(0..4) {
        0 => (0..rng.gen_range(0..80)).map(|_| *TOKENS.choose(rng).unwrap()).collect::<Vec<_>>().join(" ").into_bytes(),
        1 => {
            let mut b = corpus.choose(rng).unwrap().1.clone().into_bytes();
            for _ in 0..rng.gen_range(1..10) {
                if b.is_empty() {
                    break;
                }
                let i = rng.gen_range(0..b.len());
                match rng.gen_range(0..3) {
                    0 => b[i] = rng.gen(),
                    1 => {
                        b.remove(i);
                    }
                    _ => b.insert(i, *b"{}();=->[]*-\"/".choose(rng).unwrap()),
                }
            }
            b
        }
        2 => {
            let text = &corpus.choose(rng).unwrap().1;
            let cut = rng.gen_range(0..=text.len());
            text.as_bytes()[..cut].to_vec()
        }
        _ => {
            // splice two files at random points
            let a = corpus.choose(rng).unwrap().1.as_bytes();
            let b = corpus.choose(rng).unwrap().1.as_bytes();
            let (i, j) = (rng.gen_range(0..=a.len()), rng.gen_range(0..=b.len()));
            [&a[..i], &b[j..]].concat()
        }
    }
}
