//! Name resolution and well-formedness checking.
//!
//! Rule codes:
//!
//! | code | rule |
//! |------|------|
//! | W1   | names are unique per scope (also enum values globally, action and pattern keys per block) |
//! | W2   | connector source is a subcomponent out-port or an own in-port |
//! | W3   | connector target is a subcomponent in-port or an own out-port |
//! | W4   | at most one connector per target port; `W4b` (warning) flags unconnected targets |
//! | W5   | connector endpoints have equal types after substitution |
//! | W6   | behaviors only touch their own ports and variables the right way round |
//! | W7   | type/config argument arity and config argument types match the definition |
//! | W8   | exactly one of {subcomponents, behavior} |
//! | W9   | automaton states referenced by `initial` and transitions are declared |
//! | W10  | instantiation is not recursive |
//! | W11  | type, enum value and component references resolve |
//! | W12  | expressions are well typed |
//! | W13  | (warning) two unguarded transitions from one state with overlapping literal patterns |

mod typing;

use std::collections::{BTreeMap, BTreeSet};

use crate::diag::{sort_diagnostics, Diagnostic};
use crate::model::*;

use typing::{ExprScope, TypeError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymbolKind {
    TypeParam,
    ConfigParam,
    Port(Direction),
    Subcomponent,
    Variable,
    State,
}

/// Identifiers bound inside one component definition.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ComponentScope {
    pub bindings: BTreeMap<String, SymbolKind>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SymbolTable {
    pub library: Library,
    pub scopes: BTreeMap<String, ComponentScope>,
    /// Component or enumeration name -> declaring file.
    pub files: BTreeMap<String, String>,
}

/// Checks a set of parsed units as one model.  All problems are returned as
/// diagnostics sorted by (file, line, column, code).
pub fn check(units: &[SourceUnit]) -> (SymbolTable, Vec<Diagnostic>) {
    let mut diags = Vec::new();
    let (library, files) = globals(units, &mut diags);
    let mut cx = Checker { lib: &library, files: &files, scopes: BTreeMap::new(), diags };
    for unit in units {
        for c in &unit.components {
            // only the first declaration of a name is checked in depth
            if files.get(&c.name).map(String::as_str) == Some(unit.path.as_str())
                && library.components.get(&c.name) == Some(c)
            {
                cx.component(c, &unit.path);
            }
        }
    }
    cx.recursion();
    let Checker { scopes, mut diags, .. } = cx;
    sort_diagnostics(&mut diags);
    (SymbolTable { library, scopes, files }, diags)
}

struct Checker<'l> {
    lib: &'l Library,
    files: &'l BTreeMap<String, String>,
    scopes: BTreeMap<String, ComponentScope>,
    diags: Vec<Diagnostic>,
}

fn globals(units: &[SourceUnit], diags: &mut Vec<Diagnostic>) -> (Library, BTreeMap<String, String>) {
    let mut lib = Library::default();
    let mut files: BTreeMap<String, String> = BTreeMap::new();
    let mut value_owner: BTreeMap<String, String> = BTreeMap::new();
    for unit in units {
        for e in &unit.enums {
            let file = unit.path.as_str();
            if let Some(prev) = files.get(&e.name) {
                diags.push(Diagnostic::error("W1", format!("`{}` is already declared in {prev}", e.name), file, e.span));
                continue;
            }
            files.insert(e.name.clone(), unit.path.clone());
            if e.values.is_empty() {
                diags.push(Diagnostic::error("W1", format!("enumeration `{}` has no values", e.name), file, e.span));
            }
            let mut seen = BTreeSet::new();
            for v in &e.values {
                if !seen.insert(v) {
                    let msg = format!("value `{v}` appears twice in `{}`", e.name);
                    diags.push(Diagnostic::error("W1", msg, file, e.span));
                } else if let Some(owner) = value_owner.get(v) {
                    let msg = format!("enumeration value `{v}` is already declared by `{owner}`");
                    diags.push(Diagnostic::error("W1", msg, file, e.span));
                } else {
                    value_owner.insert(v.clone(), e.name.clone());
                }
            }
            lib.add_enum(e.clone());
        }
    }
    for unit in units {
        for c in &unit.components {
            if let Some(prev) = files.get(&c.name) {
                let msg = format!("`{}` is already declared in {prev}", c.name);
                diags.push(Diagnostic::error("W1", msg, &unit.path, c.span));
                continue;
            }
            files.insert(c.name.clone(), unit.path.clone());
            lib.add_component(c.clone());
        }
    }
    (lib, files)
}

impl Checker<'_> {
    fn error(&mut self, code: &str, file: &str, span: Span, msg: impl Into<String>) {
        self.diags.push(Diagnostic::error(code, msg, file, span));
    }

    fn warn(&mut self, code: &str, file: &str, span: Span, msg: impl Into<String>) {
        self.diags.push(Diagnostic::warning(code, msg, file, span));
    }

    fn check_type(&mut self, ty: &TypeExpr, file: &str, span: Span) {
        if let TypeExpr::EnumRef(name) = ty {
            if !self.lib.enums.contains_key(name) {
                self.error("W11", file, span, format!("unknown type `{name}`"));
            }
        }
    }

    fn component(&mut self, c: &ComponentType, file: &str) {
        let mut scope = ComponentScope::default();
        let mut bind = |cx: &mut Checker, name: &str, kind: SymbolKind, span: Span| {
            if scope.bindings.contains_key(name) {
                cx.error("W1", file, span, format!("`{name}` is already declared in component `{}`", c.name));
            } else {
                scope.bindings.insert(name.to_string(), kind);
            }
        };

        for tp in &c.type_params {
            bind(self, tp, SymbolKind::TypeParam, c.span);
        }
        for p in &c.config_params {
            bind(self, &p.name, SymbolKind::ConfigParam, p.span);
            self.check_type(&p.ty, file, p.span);
        }
        for p in &c.ports {
            bind(self, &p.name, SymbolKind::Port(p.direction), p.span);
            self.check_type(&p.ty, file, p.span);
        }
        for s in &c.subcomponents {
            bind(self, &s.instance_name, SymbolKind::Subcomponent, s.span);
        }
        for b in &c.behaviors {
            let (vars, states): (&[VarDecl], &[StateDecl]) = match b {
                Behavior::Automaton(a) => (&a.variables, &a.states),
                Behavior::Rules(r) => (&r.variables, &[]),
                Behavior::Native => (&[], &[]),
            };
            for v in vars {
                bind(self, &v.name, SymbolKind::Variable, v.span);
            }
            for s in states {
                bind(self, &s.name, SymbolKind::State, s.span);
            }
        }

        let has_subs = !c.subcomponents.is_empty();
        match (has_subs, c.behaviors.len()) {
            (true, 0) | (false, 1) => {}
            (true, _) => self.error("W8", file, c.span, format!("component `{}` has both subcomponents and a behavior", c.name)),
            (false, 0) => self.error("W8", file, c.span, format!("component `{}` has neither subcomponents nor a behavior", c.name)),
            (false, _) => self.error("W8", file, c.span, format!("component `{}` has more than one behavior", c.name)),
        }
        if !has_subs && !c.connectors.is_empty() {
            self.error("W8", file, c.connectors[0].span, format!("atomic component `{}` cannot declare connectors", c.name));
        }

        self.subcomponents(c, file);
        self.connectors(c, file);
        for b in &c.behaviors {
            match b {
                Behavior::Native => {}
                Behavior::Automaton(a) => self.automaton(c, a, file),
                Behavior::Rules(r) => self.rules(c, r, file),
            }
        }
        self.scopes.insert(c.name.clone(), scope);
    }

    fn subcomponents(&mut self, c: &ComponentType, file: &str) {
        for s in &c.subcomponents {
            for t in &s.type_args {
                self.check_type(t, file, s.span);
            }
            let Some(def) = self.lib.component(&s.component).cloned() else {
                self.error("W11", file, s.span, format!("unknown component `{}`", s.component));
                continue;
            };
            if s.type_args.len() != def.type_params.len() {
                let msg = format!(
                    "`{}` takes {} type argument(s), {} given",
                    def.name,
                    def.type_params.len(),
                    s.type_args.len()
                );
                self.error("W7", file, s.span, msg);
            }
            if s.config_args.len() != def.config_params.len() {
                let msg = format!(
                    "`{}` takes {} config argument(s), {} given",
                    def.name,
                    def.config_params.len(),
                    s.config_args.len()
                );
                self.error("W7", file, s.span, msg);
                continue;
            }
            let subst: Vec<(String, TypeExpr)> =
                def.type_params.iter().cloned().zip(s.type_args.iter().cloned()).collect();
            let scope = ExprScope::constant(c, self.lib);
            for (param, arg) in def.config_params.iter().zip(&s.config_args) {
                let expected = param.ty.substitute(&subst);
                match scope.type_of(arg) {
                    Ok(found) if found == expected => {}
                    Ok(found) => {
                        let msg = format!("config argument `{}` of `{}` expects {expected}, found {found}", param.name, def.name);
                        self.error("W7", file, s.span, msg);
                    }
                    Err(TypeError { code, message }) => {
                        // non-constant arguments are an arity/type contract violation
                        let code = if code == "W12" { "W7" } else { code };
                        self.error(code, file, s.span, message);
                    }
                }
            }
        }
    }

    /// Type and role of a connector endpoint; `None` when it does not resolve.
    fn endpoint(&mut self, c: &ComponentType, r: &PortRef, file: &str, span: Span) -> Option<(bool, Direction, TypeExpr)> {
        match &r.instance {
            None => match c.port(&r.port) {
                Some(p) => Some((false, p.direction, p.ty.clone())),
                None => {
                    self.error("W11", file, span, format!("component `{}` has no port `{}`", c.name, r.port));
                    None
                }
            },
            Some(inst) => {
                let Some(sub) = c.subcomponent(inst) else {
                    self.error("W11", file, span, format!("unknown subcomponent `{inst}`"));
                    return None;
                };
                let def = self.lib.component(&sub.component)?.clone();
                let Some(p) = def.port(&r.port) else {
                    self.error("W11", file, span, format!("`{inst}` ({}) has no port `{}`", def.name, r.port));
                    return None;
                };
                if sub.type_args.len() != def.type_params.len() {
                    return None;
                }
                let subst: Vec<(String, TypeExpr)> =
                    def.type_params.iter().cloned().zip(sub.type_args.iter().cloned()).collect();
                Some((true, p.direction, p.ty.substitute(&subst)))
            }
        }
    }

    fn connectors(&mut self, c: &ComponentType, file: &str) {
        let mut targeted: BTreeSet<PortRef> = BTreeSet::new();
        for k in &c.connectors {
            let src = self.endpoint(c, &k.source, file, k.span);
            let dst = self.endpoint(c, &k.target, file, k.span);
            if let Some((is_sub, dir, _)) = &src {
                let ok = (*is_sub && *dir == Direction::Out) || (!*is_sub && *dir == Direction::In);
                if !ok {
                    let msg = format!("connector source `{}` must be a subcomponent out-port or an own in-port", k.source);
                    self.error("W2", file, k.span, msg);
                }
            }
            if let Some((is_sub, dir, _)) = &dst {
                let ok = (*is_sub && *dir == Direction::In) || (!*is_sub && *dir == Direction::Out);
                if !ok {
                    let msg = format!("connector target `{}` must be a subcomponent in-port or an own out-port", k.target);
                    self.error("W3", file, k.span, msg);
                }
            }
            if let (Some((_, _, st)), Some((_, _, dt))) = (&src, &dst) {
                if st != dt {
                    let msg = format!("connector `{} -> {}` joins {st} to {dt}", k.source, k.target);
                    self.error("W5", file, k.span, msg);
                }
            }
            if !targeted.insert(k.target.clone()) {
                self.error("W4", file, k.span, format!("port `{}` already has an incoming connector", k.target));
            }
        }

        if c.subcomponents.is_empty() {
            return;
        }
        for s in &c.subcomponents {
            let Some(def) = self.lib.component(&s.component).cloned() else { continue };
            for p in def.ports.iter().filter(|p| p.direction == Direction::In) {
                if !targeted.contains(&PortRef::sub(s.instance_name.clone(), p.name.clone())) {
                    let msg = format!("in-port `{}.{}` is not connected and reads -- every tick", s.instance_name, p.name);
                    self.warn("W4b", file, s.span, msg);
                }
            }
        }
        for p in c.ports.iter().filter(|p| p.direction == Direction::Out) {
            if !targeted.contains(&PortRef::own(p.name.clone())) {
                self.warn("W4b", file, p.span, format!("out-port `{}` is not connected and emits -- every tick", p.name));
            }
        }
    }

    fn variables(&mut self, c: &ComponentType, vars: &[VarDecl], file: &str) {
        let scope = ExprScope::constant(c, self.lib);
        for v in vars {
            self.check_type(&v.ty, file, v.span);
            match scope.type_of(&v.init) {
                Ok(t) if t == v.ty => {}
                Ok(t) => {
                    let msg = format!("variable `{}` has type {}, initializer has type {t}", v.name, v.ty);
                    self.error("W12", file, v.span, msg);
                }
                Err(e) => self.error(e.code, file, v.span, e.message),
            }
        }
    }

    fn patterns(&mut self, c: &ComponentType, pats: &[PortPattern], file: &str) -> BTreeSet<String> {
        let mut present = BTreeSet::new();
        let mut seen = BTreeSet::new();
        for pp in pats {
            if !seen.insert(pp.port.as_str()) {
                self.error("W1", file, pp.span, format!("port `{}` is matched twice", pp.port));
                continue;
            }
            let port = match c.port(&pp.port) {
                Some(p) if p.direction == Direction::In => p,
                Some(_) => {
                    self.error("W6", file, pp.span, format!("`{}` is an out-port; patterns match in-ports only", pp.port));
                    continue;
                }
                None => {
                    self.error("W6", file, pp.span, format!("component `{}` has no in-port `{}`", c.name, pp.port));
                    continue;
                }
            };
            match &pp.pattern {
                Pattern::Absent => {}
                Pattern::Wildcard => {
                    present.insert(pp.port.clone());
                }
                Pattern::Literal(l) => {
                    present.insert(pp.port.clone());
                    match typing::literal_type(l, self.lib) {
                        Ok(t) if t == port.ty => {}
                        Ok(t) => {
                            let msg = format!("pattern on `{}` has type {t}, port carries {}", pp.port, port.ty);
                            self.error("W12", file, pp.span, msg);
                        }
                        Err(e) => self.error(e.code, file, pp.span, e.message),
                    }
                }
            }
        }
        present
    }

    fn actions(
        &mut self,
        c: &ComponentType,
        vars: &[VarDecl],
        actions: &[Assignment],
        scope: &ExprScope<'_>,
        allow_updates: bool,
        file: &str,
    ) {
        let mut seen = BTreeSet::new();
        for a in actions {
            if !seen.insert(a.target.as_str()) {
                self.error("W1", file, a.span, format!("`{}` is assigned twice in one action block", a.target));
                continue;
            }
            let expected = if let Some(p) = c.port(&a.target) {
                if p.direction == Direction::In {
                    self.error("W6", file, a.span, format!("`{}` is an in-port and cannot be assigned", a.target));
                    continue;
                }
                p.ty.clone()
            } else if let Some(v) = vars.iter().find(|v| v.name == a.target) {
                if !allow_updates {
                    self.error("W6", file, a.span, format!("the initial block may only set out-ports, not `{}`", a.target));
                    continue;
                }
                if a.value == ActionValue::Absent {
                    self.error("W12", file, a.span, format!("variable `{}` cannot be set to --", a.target));
                    continue;
                }
                v.ty.clone()
            } else {
                let msg = format!("`{}` is neither an out-port nor a variable of `{}`", a.target, c.name);
                self.error("W6", file, a.span, msg);
                continue;
            };
            if let ActionValue::Expr(e) = &a.value {
                match scope.type_of(e) {
                    Ok(t) if t == expected => {}
                    Ok(t) => {
                        let msg = format!("`{}` has type {expected}, assigned expression has type {t}", a.target);
                        self.error("W12", file, a.span, msg);
                    }
                    Err(err) => self.error(err.code, file, a.span, err.message),
                }
            }
        }
    }

    fn condition(&mut self, e: &Expr, scope: &ExprScope<'_>, what: &str, file: &str, span: Span) {
        match scope.type_of(e) {
            Ok(t) if t == TypeExpr::BOOLEAN => {}
            Ok(t) => self.error("W12", file, span, format!("{what} must be Boolean, found {t}")),
            Err(err) => self.error(err.code, file, span, err.message),
        }
    }

    fn automaton(&mut self, c: &ComponentType, a: &Automaton, file: &str) {
        self.variables(c, &a.variables, file);
        let states: BTreeSet<&str> = a.states.iter().map(|s| s.name.as_str()).collect();
        if !states.contains(a.initial_state.as_str()) {
            self.error("W9", file, a.initial_span, format!("initial state `{}` is not declared", a.initial_state));
        }
        let no_ports = BTreeSet::new();
        let init_scope = ExprScope::behavior(c, &a.variables, &no_ports, self.lib);
        self.actions(c, &a.variables, &a.initial_outputs, &init_scope, false, file);

        let mut present_sets = Vec::with_capacity(a.transitions.len());
        for t in &a.transitions {
            for s in [&t.from, &t.to] {
                if !states.contains(s.as_str()) {
                    self.error("W9", file, t.span, format!("state `{s}` is not declared"));
                }
            }
            let present = self.patterns(c, &t.patterns, file);
            let scope = ExprScope::behavior(c, &a.variables, &present, self.lib);
            if let Some(g) = &t.guard {
                self.condition(g, &scope, "guard", file, t.span);
            }
            self.actions(c, &a.variables, &t.actions, &scope, true, file);
            present_sets.push(present);
        }

        for (i, t) in a.transitions.iter().enumerate() {
            for u in a.transitions.iter().skip(i + 1) {
                if t.from == u.from && t.guard.is_none() && u.guard.is_none() && patterns_overlap(&t.patterns, &u.patterns) {
                    let msg = format!(
                        "transitions `{} -> {}` and `{} -> {}` overlap; the first declared wins",
                        t.from, t.to, u.from, u.to
                    );
                    self.warn("W13", file, u.span, msg);
                }
            }
        }
    }

    fn rules(&mut self, c: &ComponentType, r: &RuleTable, file: &str) {
        self.variables(c, &r.variables, file);
        for rule in &r.rules {
            let present = self.patterns(c, &rule.patterns, file);
            let scope = ExprScope::behavior(c, &r.variables, &present, self.lib);
            if let Some(cond) = &rule.condition {
                self.condition(cond, &scope, "rule condition", file, rule.span);
            }
            self.actions(c, &r.variables, &rule.actions, &scope, true, file);
        }
    }

    fn recursion(&mut self) {
        #[derive(Clone, Copy, PartialEq)]
        enum Mark {
            Active,
            Done,
        }
        let lib = self.lib.clone();
        let mut marks: BTreeMap<&str, Mark> = BTreeMap::new();
        let mut found: Vec<(String, Span, String)> = Vec::new();

        fn visit<'a>(
            name: &'a str,
            lib: &'a Library,
            marks: &mut BTreeMap<&'a str, Mark>,
            found: &mut Vec<(String, Span, String)>,
        ) {
            marks.insert(name, Mark::Active);
            if let Some(c) = lib.component(name) {
                for s in &c.subcomponents {
                    let Some(child) = lib.components.get_key_value(&s.component).map(|(k, _)| k.as_str()) else {
                        continue;
                    };
                    match marks.get(child) {
                        Some(Mark::Active) => found.push((name.to_string(), s.span, child.to_string())),
                        Some(Mark::Done) => {}
                        None => visit(child, lib, marks, found),
                    }
                }
            }
            marks.insert(name, Mark::Done);
        }

        for name in lib.components.keys() {
            if !marks.contains_key(name.as_str()) {
                visit(name, &lib, &mut marks, &mut found);
            }
        }
        for (owner, span, child) in found {
            let file = self.files.get(&owner).cloned().unwrap_or_default();
            let msg = format!("`{owner}` instantiates `{child}`, which (transitively) instantiates `{owner}`");
            self.error("W10", &file, span, msg);
        }
    }
}

/// True unless some port is constrained incompatibly by the two pattern
/// lists.  Only pairs that both carry literal patterns are considered.
fn patterns_overlap(a: &[PortPattern], b: &[PortPattern]) -> bool {
    let has_literal = |p: &[PortPattern]| p.iter().any(|pp| matches!(pp.pattern, Pattern::Literal(_)));
    if !has_literal(a) || !has_literal(b) {
        return false;
    }
    for pa in a {
        let Some(pb) = b.iter().find(|pb| pb.port == pa.port) else { continue };
        let disjoint = match (&pa.pattern, &pb.pattern) {
            (Pattern::Absent, Pattern::Absent) | (Pattern::Wildcard, Pattern::Wildcard) => false,
            (Pattern::Absent, _) | (_, Pattern::Absent) => true,
            (Pattern::Literal(x), Pattern::Literal(y)) => x != y,
            (Pattern::Wildcard, Pattern::Literal(_)) | (Pattern::Literal(_), Pattern::Wildcard) => false,
        };
        if disjoint {
            return false;
        }
    }
    true
}
