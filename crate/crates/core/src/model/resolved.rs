//! Components with type parameters substituted and config parameters bound.

use serde::{Deserialize, Serialize};

use super::ast::{
    ActionValue, Assignment, Behavior, Body, ComponentType, Direction, Expr, Literal, PortPattern,
    PortRef, TypeExpr,
};
use super::expr::RExpr;
use super::library::Library;
use super::value::Value;
use super::ModelError;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ResolvedPort {
    pub name: String,
    pub direction: Direction,
    pub ty: TypeExpr,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ResolvedVar {
    pub name: String,
    pub ty: TypeExpr,
    pub init: RExpr,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RPattern {
    Value(Value),
    Wildcard,
    Absent,
}

impl RPattern {
    pub fn matches(&self, msg: &super::Message) -> bool {
        match (self, msg) {
            (RPattern::Absent, super::Message::Absent) => true,
            (RPattern::Wildcard, super::Message::Present(_)) => true,
            (RPattern::Value(v), super::Message::Present(m)) => v == m,
            _ => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ROutput {
    Expr(RExpr),
    Absent,
}

/// Body of one transition or rule once names are bound.  Port indices
/// refer to the owning component's port list, variable indices to its
/// variable list.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Reaction {
    pub patterns: Vec<(usize, RPattern)>,
    pub condition: Option<RExpr>,
    pub outputs: Vec<(usize, ROutput)>,
    pub updates: Vec<(usize, RExpr)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ResolvedTransition {
    pub from: usize,
    pub to: usize,
    pub reaction: Reaction,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ResolvedAutomaton {
    pub variables: Vec<ResolvedVar>,
    pub states: Vec<String>,
    pub initial: usize,
    pub initial_outputs: Vec<(usize, ROutput)>,
    pub transitions: Vec<ResolvedTransition>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ResolvedRules {
    pub variables: Vec<ResolvedVar>,
    pub rules: Vec<Reaction>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ResolvedBehavior {
    Automaton(ResolvedAutomaton),
    Rules(ResolvedRules),
    Native,
}

impl ResolvedBehavior {
    pub fn variables(&self) -> &[ResolvedVar] {
        match self {
            ResolvedBehavior::Automaton(a) => &a.variables,
            ResolvedBehavior::Rules(r) => &r.variables,
            ResolvedBehavior::Native => &[],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ResolvedSub {
    pub instance_name: String,
    pub component: String,
    pub type_args: Vec<TypeExpr>,
    pub config_args: Vec<Value>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ResolvedBody {
    Composed {
        subcomponents: Vec<ResolvedSub>,
        connectors: Vec<(PortRef, PortRef)>,
    },
    Atomic(ResolvedBehavior),
}

/// A component definition specialised for one set of type and config arguments.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ResolvedComponent {
    pub name: String,
    pub type_args: Vec<TypeExpr>,
    pub config: Vec<(String, Value)>,
    pub ports: Vec<ResolvedPort>,
    pub body: ResolvedBody,
}

/// Specialises `def` for the given arguments.
///
/// The definition is not modified; equal inputs give equal outputs.
pub fn substitute(
    def: &ComponentType,
    type_args: &[TypeExpr],
    config_args: &[Value],
    lib: &Library,
) -> Result<ResolvedComponent, ModelError> {
    if type_args.len() != def.type_params.len() {
        return Err(ModelError::ArityMismatch {
            component: def.name.clone(),
            kind: "type",
            expected: def.type_params.len(),
            found: type_args.len(),
        });
    }
    if config_args.len() != def.config_params.len() {
        return Err(ModelError::ArityMismatch {
            component: def.name.clone(),
            kind: "config",
            expected: def.config_params.len(),
            found: config_args.len(),
        });
    }
    let subst: Vec<(String, TypeExpr)> =
        def.type_params.iter().cloned().zip(type_args.iter().cloned()).collect();

    let mut config = Vec::with_capacity(config_args.len());
    for (param, arg) in def.config_params.iter().zip(config_args) {
        let expected = param.ty.substitute(&subst);
        if !arg.conforms_to(&expected) {
            return Err(ModelError::TypeMismatch {
                component: def.name.clone(),
                param: param.name.clone(),
                expected,
                found: arg.type_of(),
            });
        }
        config.push((param.name.clone(), arg.clone()));
    }

    let ports: Vec<ResolvedPort> = def
        .ports
        .iter()
        .map(|p| ResolvedPort { name: p.name.clone(), direction: p.direction, ty: p.ty.substitute(&subst) })
        .collect();

    let body = match def.body() {
        None => return Err(ModelError::MalformedBody(def.name.clone())),
        Some(Body::Composed { subcomponents, connectors }) => {
            let scope = Scope { lib, component: &def.name, ports: &[], read_ports: false, vars: &[], config: &config };
            let mut subs = Vec::with_capacity(subcomponents.len());
            for sub in subcomponents {
                let config_args = sub
                    .config_args
                    .iter()
                    .map(|e| {
                        scope.expr(e)?.eval_const().map_err(|kind| ModelError::ConstEval {
                            component: def.name.clone(),
                            reason: kind.to_string(),
                        })
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                subs.push(ResolvedSub {
                    instance_name: sub.instance_name.clone(),
                    component: sub.component.clone(),
                    type_args: sub.type_args.iter().map(|t| t.substitute(&subst)).collect(),
                    config_args,
                });
            }
            ResolvedBody::Composed {
                subcomponents: subs,
                connectors: connectors.iter().map(|c| (c.source.clone(), c.target.clone())).collect(),
            }
        }
        Some(Body::Atomic(behavior)) => {
            let scope = Scope { lib, component: &def.name, ports: &ports, read_ports: true, vars: &[], config: &config };
            ResolvedBody::Atomic(scope.behavior(behavior, &subst)?)
        }
    };

    Ok(ResolvedComponent { name: def.name.clone(), type_args: type_args.to_vec(), config, ports, body })
}

/// Out-port assignments and variable updates, by slot index.
type ResolvedActions = (Vec<(usize, ROutput)>, Vec<(usize, RExpr)>);

struct Scope<'a> {
    lib: &'a Library,
    component: &'a str,
    ports: &'a [ResolvedPort],
    /// False where in-ports are not readable (initializers, initial outputs).
    read_ports: bool,
    vars: &'a [String],
    config: &'a [(String, Value)],
}

impl<'a> Scope<'a> {
    fn unresolved(&self, name: &str) -> ModelError {
        ModelError::UnresolvedReference { context: self.component.to_string(), name: name.to_string() }
    }

    fn with_vars<'b>(&'b self, vars: &'b [String]) -> Scope<'b> {
        Scope { lib: self.lib, component: self.component, ports: self.ports, read_ports: self.read_ports, vars, config: self.config }
    }

    fn without_ports(&self) -> Scope<'_> {
        Scope { read_ports: false, ..*self }
    }

    fn literal(&self, lit: &Literal) -> Result<Value, ModelError> {
        Ok(match lit {
            Literal::Bool(b) => Value::Bool(*b),
            Literal::Int(i) => Value::Int(*i),
            Literal::Str(s) => Value::Str(s.clone()),
            Literal::Enum(v) => match self.lib.enum_of_value(v) {
                Some(ty) => Value::enum_value(ty, v.clone()),
                None => return Err(self.unresolved(v)),
            },
        })
    }

    fn expr(&self, e: &Expr) -> Result<RExpr, ModelError> {
        Ok(match e {
            Expr::Lit(lit) => RExpr::Const(self.literal(lit)?),
            Expr::Name(n) => {
                if let Some(i) = self.vars.iter().position(|v| v == n) {
                    RExpr::Var(i)
                } else if let Some(i) = self
                    .ports
                    .iter()
                    .position(|p| self.read_ports && p.name == *n && p.direction == Direction::In)
                {
                    RExpr::Port(i)
                } else if let Some((_, v)) = self.config.iter().find(|(c, _)| c == n) {
                    RExpr::Const(v.clone())
                } else if let Some(ty) = self.lib.enum_of_value(n) {
                    RExpr::Const(Value::enum_value(ty, n.clone()))
                } else {
                    return Err(self.unresolved(n));
                }
            }
            Expr::Unary(op, inner) => RExpr::Unary(*op, Box::new(self.expr(inner)?)),
            Expr::Binary(op, l, r) => RExpr::Binary(*op, Box::new(self.expr(l)?), Box::new(self.expr(r)?)),
        })
    }

    fn in_port(&self, name: &str) -> Result<usize, ModelError> {
        self.ports
            .iter()
            .position(|p| p.name == name && p.direction == Direction::In)
            .ok_or_else(|| self.unresolved(name))
    }

    fn patterns(&self, pats: &[PortPattern]) -> Result<Vec<(usize, RPattern)>, ModelError> {
        pats.iter()
            .map(|pp| {
                let idx = self.in_port(&pp.port)?;
                let pat = match &pp.pattern {
                    super::ast::Pattern::Literal(l) => RPattern::Value(self.literal(l)?),
                    super::ast::Pattern::Wildcard => RPattern::Wildcard,
                    super::ast::Pattern::Absent => RPattern::Absent,
                };
                Ok((idx, pat))
            })
            .collect()
    }

    /// Splits an action block into out-port assignments and variable updates.
    fn actions(&self, actions: &[Assignment]) -> Result<ResolvedActions, ModelError> {
        let mut outputs = Vec::new();
        let mut updates = Vec::new();
        for a in actions {
            if let Some(idx) =
                self.ports.iter().position(|p| p.name == a.target && p.direction == Direction::Out)
            {
                let out = match &a.value {
                    ActionValue::Expr(e) => ROutput::Expr(self.expr(e)?),
                    ActionValue::Absent => ROutput::Absent,
                };
                outputs.push((idx, out));
            } else if let Some(idx) = self.vars.iter().position(|v| *v == a.target) {
                match &a.value {
                    ActionValue::Expr(e) => updates.push((idx, self.expr(e)?)),
                    ActionValue::Absent => return Err(self.unresolved(&a.target)),
                }
            } else {
                return Err(self.unresolved(&a.target));
            }
        }
        Ok((outputs, updates))
    }

    fn reaction(
        &self,
        patterns: &[PortPattern],
        condition: Option<&Expr>,
        actions: &[Assignment],
    ) -> Result<Reaction, ModelError> {
        let (outputs, updates) = self.actions(actions)?;
        Ok(Reaction {
            patterns: self.patterns(patterns)?,
            condition: condition.map(|c| self.expr(c)).transpose()?,
            outputs,
            updates,
        })
    }

    fn variables(
        &self,
        decls: &[super::ast::VarDecl],
        subst: &[(String, TypeExpr)],
    ) -> Result<Vec<ResolvedVar>, ModelError> {
        let constant = Scope { lib: self.lib, component: self.component, ports: &[], read_ports: false, vars: &[], config: self.config };
        decls
            .iter()
            .map(|v| {
                Ok(ResolvedVar { name: v.name.clone(), ty: v.ty.substitute(subst), init: constant.expr(&v.init)? })
            })
            .collect()
    }

    fn behavior(&self, behavior: &Behavior, subst: &[(String, TypeExpr)]) -> Result<ResolvedBehavior, ModelError> {
        Ok(match behavior {
            Behavior::Native => ResolvedBehavior::Native,
            Behavior::Automaton(a) => {
                let variables = self.variables(&a.variables, subst)?;
                let names: Vec<String> = variables.iter().map(|v| v.name.clone()).collect();
                let scope = self.with_vars(&names);
                let states: Vec<String> = a.states.iter().map(|s| s.name.clone()).collect();
                let state_idx = |name: &str| {
                    states.iter().position(|s| s == name).ok_or_else(|| self.unresolved(name))
                };
                let initial = state_idx(&a.initial_state)?;
                let (initial_outputs, initial_updates) = scope.without_ports().actions(&a.initial_outputs)?;
                if let Some((idx, _)) = initial_updates.first() {
                    return Err(self.unresolved(&names[*idx]));
                }
                let transitions = a
                    .transitions
                    .iter()
                    .map(|t| {
                        Ok(ResolvedTransition {
                            from: state_idx(&t.from)?,
                            to: state_idx(&t.to)?,
                            reaction: scope.reaction(&t.patterns, t.guard.as_ref(), &t.actions)?,
                        })
                    })
                    .collect::<Result<Vec<_>, ModelError>>()?;
                ResolvedBehavior::Automaton(ResolvedAutomaton { variables, states, initial, initial_outputs, transitions })
            }
            Behavior::Rules(r) => {
                let variables = self.variables(&r.variables, subst)?;
                let names: Vec<String> = variables.iter().map(|v| v.name.clone()).collect();
                let scope = self.with_vars(&names);
                let rules = r
                    .rules
                    .iter()
                    .map(|rule| scope.reaction(&rule.patterns, rule.condition.as_ref(), &rule.actions))
                    .collect::<Result<Vec<_>, ModelError>>()?;
                ResolvedBehavior::Rules(ResolvedRules { variables, rules })
            }
        })
    }
}
