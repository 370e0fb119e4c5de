//! Recursive-descent parser and canonical pretty-printer for `.arc` files.

mod lexer;
mod pretty;

use std::collections::BTreeSet;

use crate::diag::{sort_diagnostics, Diagnostic};
use crate::model::*;

pub use lexer::{lex, Tok, Token};
pub use pretty::{pretty, pretty_component, pretty_expr};

pub const KEYWORDS: &[&str] = &[
    "enum", "component", "port", "in", "out", "instance", "connect", "automaton", "rules", "native", "var",
    "state", "initial", "true", "false", "and", "or", "not", "Boolean", "Integer", "String",
];

pub fn is_keyword(s: &str) -> bool {
    KEYWORDS.contains(&s)
}

/// Parses one source file.  On failure every diagnostic found is returned,
/// sorted by position; at least one of them is an error.
pub fn parse(text: &str, origin: &str) -> Result<SourceUnit, Vec<Diagnostic>> {
    let (tokens, mut diags) = lex(text, origin);
    let mut p = Parser { toks: tokens, pos: 0, depth: 0, file: origin, diags: Vec::new(), type_params: Vec::new() };
    let unit = p.unit();
    diags.append(&mut p.diags);
    if diags.is_empty() {
        Ok(unit)
    } else {
        sort_diagnostics(&mut diags);
        Err(diags)
    }
}

/// Like [`parse`] but accepts arbitrary bytes; invalid UTF-8 is a P001 error.
pub fn parse_bytes(bytes: &[u8], origin: &str) -> Result<SourceUnit, Vec<Diagnostic>> {
    match std::str::from_utf8(bytes) {
        Ok(text) => parse(text, origin),
        Err(e) => {
            let before = &bytes[..e.valid_up_to()];
            let line = 1 + before.iter().filter(|b| **b == b'\n').count() as u32;
            let line_start = before.iter().rposition(|b| *b == b'\n').map_or(0, |i| i + 1);
            let column = 1 + String::from_utf8_lossy(&before[line_start..]).chars().count() as u32;
            Err(vec![Diagnostic::error("P001", "source is not valid UTF-8", origin, Span::new(line, column))])
        }
    }
}

type PResult<T> = Result<T, ()>;

struct Parser<'a> {
    toks: Vec<Token>,
    pos: usize,
    /// Number of `{` consumed and not yet closed.
    depth: usize,
    file: &'a str,
    diags: Vec<Diagnostic>,
    type_params: Vec<String>,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, n: usize) -> &Tok {
        let i = (self.pos + n).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn span(&self) -> Span {
        self.toks[self.pos].span
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        match t.tok {
            Tok::LBrace => self.depth += 1,
            Tok::RBrace => self.depth = self.depth.saturating_sub(1),
            Tok::Eof => return t,
            _ => {}
        }
        self.pos += 1;
        t
    }

    fn at(&self, tok: &Tok) -> bool {
        self.peek() == tok
    }

    fn at_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn at_decl_start(&self) -> bool {
        self.at_kw("component") || self.at_kw("enum")
    }

    fn at_body_keyword(&self) -> bool {
        ["port", "instance", "connect", "automaton", "rules", "native"].iter().any(|k| self.at_kw(k))
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.at(tok) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn error<T>(&mut self, msg: impl Into<String>) -> PResult<T> {
        let found = self.peek().describe();
        let span = self.span();
        self.diags.push(Diagnostic::error("P002", format!("{}, found {found}", msg.into()), self.file, span));
        Err(())
    }

    fn expect(&mut self, tok: Tok) -> PResult<Span> {
        if self.at(&tok) {
            Ok(self.bump().span)
        } else {
            self.error(format!("expected {}", tok.describe()))
        }
    }

    fn expect_kw(&mut self, kw: &str) -> PResult<Span> {
        if self.at_kw(kw) {
            Ok(self.bump().span)
        } else {
            self.error(format!("expected `{kw}`"))
        }
    }

    fn ident(&mut self, what: &str) -> PResult<(String, Span)> {
        match self.peek().clone() {
            Tok::Ident(s) if !is_keyword(&s) => {
                let span = self.bump().span;
                Ok((s, span))
            }
            _ => self.error(format!("expected {what}")),
        }
    }

    /// Skips to the end of the current statement: past the next `;` at
    /// brace depth `base`, or up to a `}` closing depth `base`.
    fn recover(&mut self, base: usize) {
        loop {
            match self.peek() {
                Tok::Eof => return,
                Tok::RBrace if self.depth <= base => return,
                Tok::Semi if self.depth <= base => {
                    self.bump();
                    return;
                }
                _ if self.depth <= base && (self.at_decl_start() || self.at_body_keyword()) => return,
                _ => {
                    self.bump();
                }
            }
        }
    }

    fn statement<T>(&mut self, f: impl FnOnce(&mut Self) -> PResult<T>) -> Option<T> {
        let base = self.depth;
        let start = self.pos;
        match f(self) {
            Ok(v) => Some(v),
            Err(()) => {
                // leave any brace this statement opened, then skip to its end
                while self.depth > base && !self.at(&Tok::Eof) {
                    self.bump();
                }
                self.recover(base);
                if self.pos == start && !self.at(&Tok::Eof) && !self.at(&Tok::RBrace) && !self.at_decl_start() {
                    self.bump();
                }
                None
            }
        }
    }

    fn unit(&mut self) -> SourceUnit {
        let mut unit = SourceUnit { path: self.file.to_string(), enums: Vec::new(), components: Vec::new() };
        let mut names: BTreeSet<String> = BTreeSet::new();
        loop {
            match self.peek() {
                Tok::Eof => break,
                Tok::Ident(kw) if kw == "enum" => {
                    if let Ok(e) = self.enum_decl() {
                        if !names.insert(e.name.clone()) {
                            self.duplicate(&e.name, e.span);
                        }
                        unit.enums.push(e);
                    } else {
                        self.sync_top();
                    }
                }
                Tok::Ident(kw) if kw == "component" => {
                    if let Ok(c) = self.component_decl() {
                        if !names.insert(c.name.clone()) {
                            self.duplicate(&c.name, c.span);
                        }
                        unit.components.push(c);
                    } else {
                        self.sync_top();
                    }
                }
                _ => {
                    let _ = self.error::<()>("expected `enum` or `component`");
                    self.sync_top();
                }
            }
        }
        unit
    }

    fn duplicate(&mut self, name: &str, span: Span) {
        self.diags.push(Diagnostic::error("P003", format!("`{name}` is declared more than once in this file"), self.file, span));
    }

    fn sync_top(&mut self) {
        self.depth = 0;
        while !self.at(&Tok::Eof) && !self.at_decl_start() {
            self.bump();
        }
        self.depth = 0;
    }

    fn enum_decl(&mut self) -> PResult<EnumDecl> {
        self.expect_kw("enum")?;
        let (name, span) = self.ident("enumeration name")?;
        self.expect(Tok::LBrace)?;
        let mut values = vec![self.ident("enumeration value")?.0];
        while self.eat(&Tok::Comma) {
            values.push(self.ident("enumeration value")?.0);
        }
        self.expect(Tok::RBrace)?;
        Ok(EnumDecl { name, values, span })
    }

    fn component_decl(&mut self) -> PResult<ComponentType> {
        self.expect_kw("component")?;
        let (name, span) = self.ident("component name")?;
        self.type_params.clear();
        let mut type_params = Vec::new();
        if self.eat(&Tok::Lt) {
            type_params.push(self.ident("type parameter")?.0);
            while self.eat(&Tok::Comma) {
                type_params.push(self.ident("type parameter")?.0);
            }
            self.expect(Tok::Gt)?;
        }
        self.type_params = type_params.clone();
        let mut config_params = Vec::new();
        if self.eat(&Tok::LParen) {
            loop {
                let pspan = self.span();
                let ty = self.type_expr()?;
                let (pname, _) = self.ident("parameter name")?;
                config_params.push(ConfigParam { ty, name: pname, span: pspan });
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
            self.expect(Tok::RParen)?;
        }
        self.expect(Tok::LBrace)?;
        let mut c = ComponentType {
            name,
            type_params,
            config_params,
            ports: Vec::new(),
            subcomponents: Vec::new(),
            connectors: Vec::new(),
            behaviors: Vec::new(),
            span,
        };
        let base = self.depth;
        loop {
            if self.at(&Tok::RBrace) {
                self.bump();
                break;
            }
            if self.at(&Tok::Eof) || self.at_decl_start() {
                let _ = self.error::<()>(format!("expected `}}` to close component `{}`", c.name));
                break;
            }
            self.statement(|p| p.element(&mut c));
            debug_assert!(self.depth >= base);
        }
        if c.subcomponents.is_empty() && c.behaviors.is_empty() {
            self.diags.push(Diagnostic::error(
                "P002",
                format!("component `{}` needs at least one subcomponent or a behavior", c.name),
                self.file,
                c.span,
            ));
        }
        Ok(c)
    }

    fn element(&mut self, c: &mut ComponentType) -> PResult<()> {
        match self.peek() {
            Tok::Ident(kw) if kw == "port" => {
                self.bump();
                loop {
                    let span = self.span();
                    let direction = if self.at_kw("in") {
                        self.bump();
                        Direction::In
                    } else if self.at_kw("out") {
                        self.bump();
                        Direction::Out
                    } else {
                        return self.error("expected `in` or `out`");
                    };
                    let ty = self.type_expr()?;
                    let (name, _) = self.ident("port name")?;
                    c.ports.push(PortDecl { name, direction, ty, span });
                    if !self.eat(&Tok::Comma) {
                        break;
                    }
                }
                self.expect(Tok::Semi)?;
            }
            Tok::Ident(kw) if kw == "instance" => {
                let span = self.bump().span;
                let (component, _) = self.ident("component name")?;
                let mut type_args = Vec::new();
                if self.eat(&Tok::Lt) {
                    type_args.push(self.type_expr()?);
                    while self.eat(&Tok::Comma) {
                        type_args.push(self.type_expr()?);
                    }
                    self.expect(Tok::Gt)?;
                }
                let mut config_args = Vec::new();
                if self.eat(&Tok::LParen) {
                    config_args.push(self.expr()?);
                    while self.eat(&Tok::Comma) {
                        config_args.push(self.expr()?);
                    }
                    self.expect(Tok::RParen)?;
                }
                let (instance_name, _) = self.ident("instance name")?;
                self.expect(Tok::Semi)?;
                c.subcomponents.push(SubcomponentDecl { instance_name, component, type_args, config_args, span });
            }
            Tok::Ident(kw) if kw == "connect" => {
                let span = self.bump().span;
                let source = self.port_ref()?;
                self.expect(Tok::Arrow)?;
                let mut targets = vec![self.port_ref()?];
                while self.eat(&Tok::Comma) {
                    targets.push(self.port_ref()?);
                }
                self.expect(Tok::Semi)?;
                for target in targets {
                    c.connectors.push(Connector { source: source.clone(), target, span });
                }
            }
            Tok::Ident(kw) if kw == "native" => {
                self.bump();
                self.expect(Tok::Semi)?;
                c.behaviors.push(Behavior::Native);
            }
            Tok::Ident(kw) if kw == "automaton" => {
                let a = self.automaton()?;
                c.behaviors.push(Behavior::Automaton(a));
            }
            Tok::Ident(kw) if kw == "rules" => {
                let r = self.rules()?;
                c.behaviors.push(Behavior::Rules(r));
            }
            _ => return self.error("expected `port`, `instance`, `connect`, `automaton`, `rules` or `native`"),
        }
        Ok(())
    }

    fn port_ref(&mut self) -> PResult<PortRef> {
        let (first, _) = self.ident("port reference")?;
        if self.eat(&Tok::Dot) {
            let (port, _) = self.ident("port name")?;
            Ok(PortRef::sub(first, port))
        } else {
            Ok(PortRef::own(first))
        }
    }

    fn type_expr(&mut self) -> PResult<TypeExpr> {
        match self.peek().clone() {
            Tok::Ident(s) if s == "Boolean" => {
                self.bump();
                Ok(TypeExpr::BOOLEAN)
            }
            Tok::Ident(s) if s == "Integer" => {
                self.bump();
                Ok(TypeExpr::INTEGER)
            }
            Tok::Ident(s) if s == "String" => {
                self.bump();
                Ok(TypeExpr::STRING)
            }
            Tok::Ident(s) if !is_keyword(&s) => {
                self.bump();
                if self.type_params.contains(&s) {
                    Ok(TypeExpr::TypeParam(s))
                } else {
                    Ok(TypeExpr::EnumRef(s))
                }
            }
            _ => self.error("expected a type"),
        }
    }

    fn var_decl(&mut self) -> PResult<VarDecl> {
        let span = self.expect_kw("var")?;
        let ty = self.type_expr()?;
        let (name, _) = self.ident("variable name")?;
        self.expect(Tok::Assign)?;
        let init = self.expr()?;
        self.expect(Tok::Semi)?;
        Ok(VarDecl { ty, name, init, span })
    }

    /// Parses statements until the `}` closing the current block.
    fn block_body(&mut self, mut f: impl FnMut(&mut Self) -> PResult<()>) -> PResult<()> {
        let base = self.depth;
        while !self.at(&Tok::RBrace) {
            if self.at(&Tok::Eof) || self.at_decl_start() {
                return self.error("expected `}`");
            }
            self.statement(&mut f);
            if self.depth < base {
                return Ok(());
            }
        }
        self.expect(Tok::RBrace)?;
        Ok(())
    }

    fn automaton(&mut self) -> PResult<Automaton> {
        self.expect_kw("automaton")?;
        self.expect(Tok::LBrace)?;
        let mut a = Automaton {
            variables: Vec::new(),
            states: Vec::new(),
            initial_state: String::new(),
            initial_outputs: Vec::new(),
            initial_span: Span::default(),
            transitions: Vec::new(),
        };
        let mut seen_initial = false;
        let mut phase = 0u8;
        let block_span = self.span();
        self.block_body(|p| {
            if p.at_kw("var") {
                if phase > 0 {
                    return p.error("variables must be declared before states");
                }
                a.variables.push(p.var_decl()?);
            } else if p.at_kw("state") {
                if phase > 1 {
                    return p.error("states must be declared before `initial`");
                }
                phase = 1;
                let span = p.bump().span;
                let mut first = true;
                loop {
                    let sspan = if first { span } else { p.span() };
                    first = false;
                    let (name, _) = p.ident("state name")?;
                    a.states.push(StateDecl { name, span: sspan });
                    if !p.eat(&Tok::Comma) {
                        break;
                    }
                }
                p.expect(Tok::Semi)?;
            } else if p.at_kw("initial") {
                if phase != 1 || seen_initial {
                    return p.error("`initial` must follow the state declarations exactly once");
                }
                phase = 2;
                seen_initial = true;
                a.initial_span = p.bump().span;
                a.initial_state = p.ident("state name")?.0;
                if p.eat(&Tok::Slash) {
                    a.initial_outputs = p.action_block()?;
                }
                p.expect(Tok::Semi)?;
            } else {
                if phase != 2 {
                    return p.error("expected `var`, `state` or `initial`");
                }
                a.transitions.push(p.transition()?);
            }
            Ok(())
        })?;
        if !seen_initial {
            self.diags.push(Diagnostic::error(
                "P002",
                "automaton needs `state` declarations followed by an `initial` declaration",
                self.file,
                block_span,
            ));
        }
        Ok(a)
    }

    fn transition(&mut self) -> PResult<Transition> {
        let (from, span) = self.ident("source state")?;
        self.expect(Tok::Arrow)?;
        let (to, _) = self.ident("target state")?;
        let mut patterns = Vec::new();
        if self.eat(&Tok::LBracket) {
            if !self.at(&Tok::RBracket) {
                patterns.push(self.port_pattern()?);
                while self.eat(&Tok::Comma) {
                    patterns.push(self.port_pattern()?);
                }
            }
            self.expect(Tok::RBracket)?;
        }
        let mut guard = None;
        if self.at(&Tok::LBrace) {
            self.bump();
            guard = Some(self.expr()?);
            self.expect(Tok::RBrace)?;
        }
        let mut actions = Vec::new();
        if self.eat(&Tok::Slash) {
            actions = self.action_block()?;
        }
        self.expect(Tok::Semi)?;
        Ok(Transition { from, to, patterns, guard, actions, span })
    }

    fn rules(&mut self) -> PResult<RuleTable> {
        self.expect_kw("rules")?;
        self.expect(Tok::LBrace)?;
        let mut table = RuleTable { variables: Vec::new(), rules: Vec::new() };
        self.block_body(|p| {
            if p.at_kw("var") {
                if !table.rules.is_empty() {
                    return p.error("variables must be declared before rules");
                }
                table.variables.push(p.var_decl()?);
            } else {
                table.rules.push(p.rule()?);
            }
            Ok(())
        })?;
        Ok(table)
    }

    fn rule(&mut self) -> PResult<Rule> {
        let span = self.expect(Tok::LBracket)?;
        let mut patterns = Vec::new();
        let mut condition = None;
        loop {
            if self.at(&Tok::RBracket) {
                break;
            }
            if matches!(self.peek(), Tok::Ident(s) if !is_keyword(s)) && self.peek_at(1) == &Tok::Assign {
                patterns.push(self.port_pattern()?);
                if !self.eat(&Tok::Comma) {
                    break;
                }
            } else {
                condition = Some(self.expr()?);
                break;
            }
        }
        self.expect(Tok::RBracket)?;
        self.expect(Tok::FatArrow)?;
        let actions = self.action_block()?;
        self.expect(Tok::Semi)?;
        Ok(Rule { patterns, condition, actions, span })
    }

    fn port_pattern(&mut self) -> PResult<PortPattern> {
        let (port, span) = self.ident("port name")?;
        self.expect(Tok::Assign)?;
        let pattern = match self.peek().clone() {
            Tok::Star => {
                self.bump();
                Pattern::Wildcard
            }
            Tok::Absent => {
                self.bump();
                Pattern::Absent
            }
            _ => Pattern::Literal(self.literal()?),
        };
        Ok(PortPattern { port, pattern, span })
    }

    fn literal(&mut self) -> PResult<Literal> {
        match self.peek().clone() {
            Tok::Ident(s) if s == "true" => {
                self.bump();
                Ok(Literal::Bool(true))
            }
            Tok::Ident(s) if s == "false" => {
                self.bump();
                Ok(Literal::Bool(false))
            }
            Tok::Ident(s) if !is_keyword(&s) => {
                self.bump();
                Ok(Literal::Enum(s))
            }
            Tok::Str(s) => {
                self.bump();
                Ok(Literal::Str(s))
            }
            Tok::Int(v) => {
                self.bump();
                self.int_literal(v, false)
            }
            Tok::Minus => {
                self.bump();
                match self.peek().clone() {
                    Tok::Int(v) => {
                        self.bump();
                        self.int_literal(v, true)
                    }
                    _ => self.error("expected an integer after `-`"),
                }
            }
            _ => self.error("expected a literal, `*` or `--`"),
        }
    }

    fn int_literal(&mut self, magnitude: u64, negative: bool) -> PResult<Literal> {
        let value = if negative {
            0i64.checked_sub_unsigned(magnitude)
        } else {
            i64::try_from(magnitude).ok()
        };
        match value {
            Some(v) => Ok(Literal::Int(v)),
            None => {
                self.pos -= 1;
                self.error("integer literal out of range")
            }
        }
    }

    fn action_block(&mut self) -> PResult<Vec<Assignment>> {
        self.expect(Tok::LBrace)?;
        let mut out = Vec::new();
        if !self.at(&Tok::RBrace) {
            loop {
                let (target, span) = self.ident("port or variable name")?;
                self.expect(Tok::Assign)?;
                let value = if self.eat(&Tok::Absent) { ActionValue::Absent } else { ActionValue::Expr(self.expr()?) };
                out.push(Assignment { target, value, span });
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
        }
        self.expect(Tok::RBrace)?;
        Ok(out)
    }

    // expr := or ; or := and ("or" and)* ; and := not ("and" not)* ;
    // not := "not" not | cmp ; cmp := add [op add] ; add := mul (("+"|"-") mul)* ;
    // mul := unary (("*"|"/") unary)* ; unary := "-" unary | primary
    fn expr(&mut self) -> PResult<Expr> {
        let mut lhs = self.and_expr()?;
        while self.at_kw("or") {
            self.bump();
            let rhs = self.and_expr()?;
            lhs = Expr::binary(BinOp::Or, lhs, rhs);
        }
        Ok(lhs)
    }

    fn and_expr(&mut self) -> PResult<Expr> {
        let mut lhs = self.not_expr()?;
        while self.at_kw("and") {
            self.bump();
            let rhs = self.not_expr()?;
            lhs = Expr::binary(BinOp::And, lhs, rhs);
        }
        Ok(lhs)
    }

    fn not_expr(&mut self) -> PResult<Expr> {
        if self.at_kw("not") {
            self.bump();
            return Ok(Expr::Unary(UnOp::Not, Box::new(self.not_expr()?)));
        }
        self.cmp_expr()
    }

    fn cmp_expr(&mut self) -> PResult<Expr> {
        let lhs = self.add_expr()?;
        let op = match self.peek() {
            Tok::EqEq => BinOp::Eq,
            Tok::Ne => BinOp::Ne,
            Tok::Lt => BinOp::Lt,
            Tok::Le => BinOp::Le,
            Tok::Gt => BinOp::Gt,
            Tok::Ge => BinOp::Ge,
            _ => return Ok(lhs),
        };
        self.bump();
        let rhs = self.add_expr()?;
        Ok(Expr::binary(op, lhs, rhs))
    }

    fn add_expr(&mut self) -> PResult<Expr> {
        let mut lhs = self.mul_expr()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.mul_expr()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
    }

    fn mul_expr(&mut self) -> PResult<Expr> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
    }

    fn unary(&mut self) -> PResult<Expr> {
        if self.eat(&Tok::Minus) {
            return Ok(Expr::Unary(UnOp::Neg, Box::new(self.unary()?)));
        }
        self.primary()
    }

    fn primary(&mut self) -> PResult<Expr> {
        match self.peek().clone() {
            Tok::Int(v) => {
                self.bump();
                match i64::try_from(v) {
                    Ok(v) => Ok(Expr::int(v)),
                    Err(_) => {
                        self.pos -= 1;
                        self.error("integer literal out of range")
                    }
                }
            }
            Tok::Str(s) => {
                self.bump();
                Ok(Expr::Lit(Literal::Str(s)))
            }
            Tok::Ident(s) if s == "true" => {
                self.bump();
                Ok(Expr::Lit(Literal::Bool(true)))
            }
            Tok::Ident(s) if s == "false" => {
                self.bump();
                Ok(Expr::Lit(Literal::Bool(false)))
            }
            Tok::Ident(s) if !is_keyword(&s) => {
                self.bump();
                Ok(Expr::Name(s))
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            _ => self.error("expected an expression"),
        }
    }
}
