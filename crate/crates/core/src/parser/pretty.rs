use std::fmt::Write;

use crate::model::*;

/// Canonical text of a source unit: enums first, then components, two-space
/// indentation, one declaration per line, one `connect` per connector.
pub fn pretty(unit: &SourceUnit) -> String {
    let mut blocks: Vec<String> = Vec::new();
    for e in &unit.enums {
        blocks.push(format!("enum {} {{ {} }}\n", e.name, e.values.join(", ")));
    }
    for c in &unit.components {
        blocks.push(pretty_component(c));
    }
    blocks.join("\n")
}

pub fn pretty_component(c: &ComponentType) -> String {
    let mut out = String::new();
    out.push_str("component ");
    out.push_str(&c.name);
    if !c.type_params.is_empty() {
        write!(out, "<{}>", c.type_params.join(", ")).unwrap();
    }
    if !c.config_params.is_empty() {
        let params: Vec<String> = c.config_params.iter().map(|p| format!("{} {}", p.ty, p.name)).collect();
        write!(out, "({})", params.join(", ")).unwrap();
    }
    out.push_str(" {\n");
    for p in &c.ports {
        writeln!(out, "  port {} {} {};", p.direction.keyword(), p.ty, p.name).unwrap();
    }
    for s in &c.subcomponents {
        out.push_str("  instance ");
        out.push_str(&s.component);
        if !s.type_args.is_empty() {
            let args: Vec<String> = s.type_args.iter().map(|t| t.to_string()).collect();
            write!(out, "<{}>", args.join(", ")).unwrap();
        }
        if !s.config_args.is_empty() {
            let args: Vec<String> = s.config_args.iter().map(pretty_expr).collect();
            write!(out, "({})", args.join(", ")).unwrap();
        }
        writeln!(out, " {};", s.instance_name).unwrap();
    }
    for k in &c.connectors {
        writeln!(out, "  connect {} -> {};", k.source, k.target).unwrap();
    }
    for b in &c.behaviors {
        match b {
            Behavior::Native => out.push_str("  native;\n"),
            Behavior::Automaton(a) => {
                out.push_str("  automaton {\n");
                for v in &a.variables {
                    writeln!(out, "    var {} {} = {};", v.ty, v.name, pretty_expr(&v.init)).unwrap();
                }
                let states: Vec<&str> = a.states.iter().map(|s| s.name.as_str()).collect();
                writeln!(out, "    state {};", states.join(", ")).unwrap();
                write!(out, "    initial {}", a.initial_state).unwrap();
                if !a.initial_outputs.is_empty() {
                    write!(out, " / {}", actions(&a.initial_outputs)).unwrap();
                }
                out.push_str(";\n");
                for t in &a.transitions {
                    write!(out, "    {} -> {}", t.from, t.to).unwrap();
                    if !t.patterns.is_empty() {
                        write!(out, " [{}]", patterns(&t.patterns)).unwrap();
                    }
                    if let Some(g) = &t.guard {
                        write!(out, " {{ {} }}", pretty_expr(g)).unwrap();
                    }
                    if !t.actions.is_empty() {
                        write!(out, " / {}", actions(&t.actions)).unwrap();
                    }
                    out.push_str(";\n");
                }
                out.push_str("  }\n");
            }
            Behavior::Rules(r) => {
                out.push_str("  rules {\n");
                for v in &r.variables {
                    writeln!(out, "    var {} {} = {};", v.ty, v.name, pretty_expr(&v.init)).unwrap();
                }
                for rule in &r.rules {
                    let mut cond = patterns(&rule.patterns);
                    if let Some(e) = &rule.condition {
                        if !cond.is_empty() {
                            cond.push_str(", ");
                        }
                        cond.push_str(&pretty_expr(e));
                    }
                    writeln!(out, "    [{cond}] => {};", actions(&rule.actions)).unwrap();
                }
                out.push_str("  }\n");
            }
        }
    }
    out.push_str("}\n");
    out
}

fn patterns(pats: &[PortPattern]) -> String {
    let items: Vec<String> = pats
        .iter()
        .map(|p| {
            let rhs = match &p.pattern {
                Pattern::Wildcard => "*".to_string(),
                Pattern::Absent => "--".to_string(),
                Pattern::Literal(l) => literal(l),
            };
            format!("{} = {rhs}", p.port)
        })
        .collect();
    items.join(", ")
}

fn actions(items: &[Assignment]) -> String {
    if items.is_empty() {
        return "{ }".to_string();
    }
    let items: Vec<String> = items
        .iter()
        .map(|a| match &a.value {
            ActionValue::Absent => format!("{} = --", a.target),
            ActionValue::Expr(e) => format!("{} = {}", a.target, pretty_expr(e)),
        })
        .collect();
    format!("{{ {} }}", items.join(", "))
}

fn literal(l: &Literal) -> String {
    match l {
        Literal::Bool(b) => b.to_string(),
        Literal::Int(i) => i.to_string(),
        Literal::Enum(v) => v.clone(),
        Literal::Str(s) => {
            let mut out = String::with_capacity(s.len() + 2);
            out.push('"');
            for c in s.chars() {
                match c {
                    '"' => out.push_str("\\\""),
                    '\\' => out.push_str("\\\\"),
                    '\n' => out.push_str("\\n"),
                    '\t' => out.push_str("\\t"),
                    c => out.push(c),
                }
            }
            out.push('"');
            out
        }
    }
}

// binding strength, loosest first
const OR: u8 = 1;
const AND: u8 = 2;
const NOT: u8 = 3;
const CMP: u8 = 4;
const ADD: u8 = 5;
const MUL: u8 = 6;
const NEG: u8 = 7;
const ATOM: u8 = 8;

fn precedence(e: &Expr) -> u8 {
    match e {
        Expr::Lit(_) | Expr::Name(_) => ATOM,
        Expr::Unary(UnOp::Neg, _) => NEG,
        Expr::Unary(UnOp::Not, _) => NOT,
        Expr::Binary(op, _, _) => binary_precedence(*op),
    }
}

fn binary_precedence(op: BinOp) -> u8 {
    match op {
        BinOp::Or => OR,
        BinOp::And => AND,
        BinOp::Eq | BinOp::Ne | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => CMP,
        BinOp::Add | BinOp::Sub => ADD,
        BinOp::Mul | BinOp::Div => MUL,
    }
}

/// Prints an expression with the fewest parentheses that reparse to the same tree.
pub fn pretty_expr(e: &Expr) -> String {
    let mut out = String::new();
    write_expr(&mut out, e, 0);
    out
}

fn write_expr(out: &mut String, e: &Expr, min: u8) {
    let prec = precedence(e);
    let parens = prec < min;
    if parens {
        out.push('(');
    }
    match e {
        Expr::Lit(Literal::Int(i)) if *i < 0 => {
            // not producible by the parser; keep the text re-parsable anyway
            write!(out, "({i})").unwrap();
        }
        Expr::Lit(l) => out.push_str(&literal(l)),
        Expr::Name(n) => out.push_str(n),
        Expr::Unary(UnOp::Neg, inner) => {
            out.push('-');
            let inner_min = if matches!(inner.as_ref(), Expr::Unary(UnOp::Neg, _)) { ATOM } else { NEG };
            write_expr(out, inner, inner_min);
        }
        Expr::Unary(UnOp::Not, inner) => {
            out.push_str("not ");
            write_expr(out, inner, NOT);
        }
        Expr::Binary(op, l, r) => {
            let p = binary_precedence(*op);
            let left_min = if p == CMP { CMP + 1 } else { p };
            write_expr(out, l, left_min);
            write!(out, " {} ", op.symbol()).unwrap();
            write_expr(out, r, p + 1);
        }
    }
    if parens {
        out.push(')');
    }
}
