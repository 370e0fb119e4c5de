//! Property tests over the parser, checker, simulator and code generators.

mod support;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use arc_core::codegen::{Backend, DotBackend, Options, ReferenceBackend};
use arc_core::model::*;
use arc_core::parser::{parse, pretty, pretty_expr};
use arc_core::sim::{self, init_runtime, NativeBinding, PortMessages, Trace};
use arc_core::{checker, load};

fn arb_expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        any::<bool>().prop_map(|b| Expr::Lit(Literal::Bool(b))),
        (0..=i64::MAX).prop_map(Expr::int),
        "[a-z \"\\\\\n\té]{0,6}".prop_map(|s| Expr::Lit(Literal::Str(s))),
        "[a-z][a-z0-9_]{0,4}"
            .prop_filter("keyword", |s| !arc_core::parser::is_keyword(s))
            .prop_map(Expr::Name),
    ];
    leaf.prop_recursive(5, 48, 2, |inner| {
        prop_oneof![
            (prop_oneof![Just(UnOp::Neg), Just(UnOp::Not)], inner.clone()).prop_map(|(op, e)| Expr::Unary(op, Box::new(e))),
            (
                prop::sample::select(vec![
                    BinOp::Add,
                    BinOp::Sub,
                    BinOp::Mul,
                    BinOp::Div,
                    BinOp::Eq,
                    BinOp::Ne,
                    BinOp::Lt,
                    BinOp::Le,
                    BinOp::Gt,
                    BinOp::Ge,
                    BinOp::And,
                    BinOp::Or,
                ]),
                inner.clone(),
                inner
            )
                .prop_map(|(op, l, r)| Expr::binary(op, l, r)),
        ]
    })
}

fn reparse_expr(e: &Expr) -> Expr {
    let text = format!("component A {{ rules {{ var Integer v = {}; }} }}", pretty_expr(e));
    let unit = parse(&text, "e.arc").unwrap_or_else(|d| panic!("{text}\n{d:?}"));
    match &unit.components[0].behaviors[0] {
        Behavior::Rules(r) => r.variables[0].init.clone(),
        other => panic!("{other:?}"),
    }
}

/// A hierarchy and an input trace for it, both from one seed.
fn scenario(seed: u64, ticks: usize) -> (InstanceModel, Trace) {
    use rand::Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = support::hierarchy(&mut rng, 3, 8);
    let m = load(&[("h.arc", &h.source)]).unwrap_or_else(|d| panic!("{d:?}")).instantiate(&h.root).unwrap();
    let mut env = Trace::new();
    for t in 0..ticks {
        for k in &h.inputs {
            if rng.gen_bool(0.6) {
                env.set(k, t, Value::Int(rng.gen_range(-20..=20)).into());
            }
        }
    }
    (m, env)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn printed_expressions_reparse_to_the_same_tree(e in arb_expr()) {
        prop_assert_eq!(reparse_expr(&e), e);
    }

    #[test]
    fn printing_is_idempotent(seed in any::<u64>()) {
        let u = support::source_unit(&mut ChaCha8Rng::seed_from_u64(seed));
        let once = pretty(&u);
        let again = pretty(&parse(&once, "r.arc").unwrap());
        prop_assert_eq!(once, again);
    }

    #[test]
    fn checker_accepts_any_parsed_unit_without_panicking(seed in any::<u64>()) {
        let u = support::source_unit(&mut ChaCha8Rng::seed_from_u64(seed));
        let (_, diags) = checker::check(&[u]);
        // sorted output with real positions
        let mut sorted = diags.clone();
        arc_core::diag::sort_diagnostics(&mut sorted);
        prop_assert_eq!(diags, sorted);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn shorter_runs_are_prefixes(seed in any::<u64>(), short in 0usize..20, extra in 0usize..20) {
        let (m, env) = scenario(seed, short + extra);
        let a = sim::run(&m, NativeBinding::new(), &env, short).unwrap();
        let b = sim::run(&m, NativeBinding::new(), &env, short + extra).unwrap();
        for k in a.keys() {
            prop_assert_eq!(a.series(k).unwrap(), &b.series(k).unwrap()[..short]);
        }
    }

    #[test]
    fn inlining_any_single_box_preserves_retained_ports(seed in any::<u64>(), pick in any::<prop::sample::Index>()) {
        let (mut m, env) = scenario(seed, 30);
        let boxes: Vec<String> = m.nodes().iter().skip(1).filter(|n| !n.is_atomic()).map(|n| n.path.clone()).collect();
        prop_assume!(!boxes.is_empty());
        let before = sim::run(&m, NativeBinding::new(), &env, 30).unwrap();
        m.inline(&boxes[pick.index(boxes.len())]).unwrap();
        let after = sim::run(&m, NativeBinding::new(), &env, 30).unwrap();
        for k in after.keys() {
            prop_assert_eq!(before.series(k), after.series(k), "{}", k);
        }
    }

    #[test]
    fn traces_survive_jsonl(seed in any::<u64>()) {
        let (m, env) = scenario(seed, 15);
        let t = sim::run(&m, NativeBinding::new(), &env, 15).unwrap();
        let back = Trace::from_jsonl(&t.to_jsonl(), &sim::port_types(&m), &m.enums).unwrap();
        prop_assert_eq!(back.to_jsonl(), t.to_jsonl());
    }

    #[test]
    fn generation_is_deterministic(seed in any::<u64>()) {
        let (m, _) = scenario(seed, 0);
        let opts = Options::new();
        prop_assert_eq!(ReferenceBackend.generate(&m, &opts).unwrap(), ReferenceBackend.generate(&m.clone(), &opts).unwrap());
        prop_assert_eq!(DotBackend.generate(&m, &opts).unwrap(), DotBackend.generate(&m, &opts).unwrap());
    }
}

const GATED: &str = "
component Gate {
  port in Integer i, in Boolean open, out Integer o;
  automaton {
    var Integer seen = 0;
    state Closed, Open;
    initial Closed;
    Closed -> Open [open = true] / { seen = seen + 1 };
    Open -> Closed [open = false] / { o = seen };
    Open -> Open [i = *] / { o = i, seen = seen + 1 };
  }
}
";

proptest! {
    /// Ticks where no transition matches leave state and variables alone
    /// and put nothing on the out-port.
    #[test]
    fn unmatched_ticks_stutter(inputs in prop::collection::vec((prop::option::of(-9i64..9), prop::option::of(any::<bool>())), 1..40)) {
        let m = load(&[("g.arc", GATED)]).unwrap().instantiate("Gate").unwrap();
        let mut rt = init_runtime(&m, NativeBinding::new()).unwrap();
        for (i, open) in inputs {
            let state = rt.automaton_state("gate").unwrap().to_string();
            let seen = rt.variable("gate", "seen").cloned();
            let matches = match state.as_str() {
                "Closed" => open == Some(true),
                _ => open == Some(false) || i.is_some(),
            };
            let mut env = PortMessages::new();
            if let Some(v) = i {
                env.insert("gate.i".into(), Value::Int(v).into());
            }
            if let Some(b) = open {
                env.insert("gate.open".into(), Value::Bool(b).into());
            }
            rt.step(&env).unwrap();
            if !matches {
                prop_assert_eq!(rt.automaton_state("gate").unwrap(), state.as_str());
                prop_assert_eq!(rt.variable("gate", "seen").cloned(), seen);
                prop_assert_eq!(rt.pending("gate", "o"), Some(&Message::Absent));
            }
        }
    }
}
