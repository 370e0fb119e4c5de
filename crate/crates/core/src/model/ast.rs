//! Surface syntax of the architecture language.
//!
//! These types mirror the text closely: names are kept as written and
//! identifiers inside expressions stay unresolved until checking or
//! substitution.  Source positions are recorded in [`Span`]s, which never
//! take part in structural equality, so two parses of differently formatted
//! text compare equal when they describe the same model.

use std::fmt;
use std::hash::{Hash, Hasher};

use serde::{Deserialize, Serialize};

/// 1-based source position of a syntax node.
///
/// Equality and hashing ignore the position.
#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
pub struct Span {
    pub line: u32,
    pub column: u32,
}

impl Span {
    pub fn new(line: u32, column: u32) -> Self {
        Span { line, column }
    }
}

impl PartialEq for Span {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

impl Eq for Span {}

impl Hash for Span {
    fn hash<H: Hasher>(&self, _: &mut H) {}
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PrimitiveType {
    Boolean,
    Integer,
    String,
}

impl PrimitiveType {
    pub fn keyword(self) -> &'static str {
        match self {
            PrimitiveType::Boolean => "Boolean",
            PrimitiveType::Integer => "Integer",
            PrimitiveType::String => "String",
        }
    }
}

/// Port, variable, and parameter types.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TypeExpr {
    Primitive(PrimitiveType),
    EnumRef(String),
    TypeParam(String),
}

impl TypeExpr {
    pub const BOOLEAN: TypeExpr = TypeExpr::Primitive(PrimitiveType::Boolean);
    pub const INTEGER: TypeExpr = TypeExpr::Primitive(PrimitiveType::Integer);
    pub const STRING: TypeExpr = TypeExpr::Primitive(PrimitiveType::String);

    /// Replaces type parameters according to `subst`; unknown parameters are kept.
    pub fn substitute(&self, subst: &[(String, TypeExpr)]) -> TypeExpr {
        match self {
            TypeExpr::TypeParam(name) => subst
                .iter()
                .find(|(param, _)| param == name)
                .map(|(_, ty)| ty.clone())
                .unwrap_or_else(|| self.clone()),
            other => other.clone(),
        }
    }

    pub fn is_concrete(&self) -> bool {
        !matches!(self, TypeExpr::TypeParam(_))
    }
}

impl fmt::Display for TypeExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TypeExpr::Primitive(p) => f.write_str(p.keyword()),
            TypeExpr::EnumRef(name) | TypeExpr::TypeParam(name) => f.write_str(name),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EnumDecl {
    pub name: String,
    pub values: Vec<String>,
    pub span: Span,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Direction {
    In,
    Out,
}

impl Direction {
    pub fn keyword(self) -> &'static str {
        match self {
            Direction::In => "in",
            Direction::Out => "out",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PortDecl {
    pub name: String,
    pub direction: Direction,
    pub ty: TypeExpr,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ConfigParam {
    pub ty: TypeExpr,
    pub name: String,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SubcomponentDecl {
    pub instance_name: String,
    pub component: String,
    pub type_args: Vec<TypeExpr>,
    pub config_args: Vec<Expr>,
    pub span: Span,
}

/// One end of a connector.  `instance == None` names a port of the
/// enclosing component.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PortRef {
    pub instance: Option<String>,
    pub port: String,
}

impl PortRef {
    pub fn own(port: impl Into<String>) -> Self {
        PortRef { instance: None, port: port.into() }
    }

    pub fn sub(instance: impl Into<String>, port: impl Into<String>) -> Self {
        PortRef { instance: Some(instance.into()), port: port.into() }
    }
}

impl fmt::Display for PortRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.instance {
            Some(inst) => write!(f, "{inst}.{}", self.port),
            None => f.write_str(&self.port),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Connector {
    pub source: PortRef,
    pub target: PortRef,
    pub span: Span,
}

/// A component definition.
///
/// The text may declare subcomponents and behaviors side by side; a
/// well-formed component has exactly one of the two (see [`ComponentType::body`]).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ComponentType {
    pub name: String,
    pub type_params: Vec<String>,
    pub config_params: Vec<ConfigParam>,
    pub ports: Vec<PortDecl>,
    pub subcomponents: Vec<SubcomponentDecl>,
    pub connectors: Vec<Connector>,
    pub behaviors: Vec<Behavior>,
    pub span: Span,
}

/// View of a well-formed component body.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Body<'a> {
    Composed {
        subcomponents: &'a [SubcomponentDecl],
        connectors: &'a [Connector],
    },
    Atomic(&'a Behavior),
}

impl ComponentType {
    /// Returns `None` unless the component has either subcomponents (and no
    /// behavior) or exactly one behavior (and no subcomponents or connectors).
    pub fn body(&self) -> Option<Body<'_>> {
        match (self.subcomponents.is_empty(), self.behaviors.as_slice()) {
            (false, []) => Some(Body::Composed {
                subcomponents: &self.subcomponents,
                connectors: &self.connectors,
            }),
            (true, [behavior]) if self.connectors.is_empty() => Some(Body::Atomic(behavior)),
            _ => None,
        }
    }

    pub fn port(&self, name: &str) -> Option<&PortDecl> {
        self.ports.iter().find(|p| p.name == name)
    }

    pub fn subcomponent(&self, name: &str) -> Option<&SubcomponentDecl> {
        self.subcomponents.iter().find(|s| s.instance_name == name)
    }

    pub fn is_native(&self) -> bool {
        matches!(self.body(), Some(Body::Atomic(Behavior::Native)))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Behavior {
    Automaton(Automaton),
    Rules(RuleTable),
    Native,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct VarDecl {
    pub ty: TypeExpr,
    pub name: String,
    pub init: Expr,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StateDecl {
    pub name: String,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Automaton {
    pub variables: Vec<VarDecl>,
    pub states: Vec<StateDecl>,
    pub initial_state: String,
    pub initial_outputs: Vec<Assignment>,
    pub initial_span: Span,
    pub transitions: Vec<Transition>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Transition {
    pub from: String,
    pub to: String,
    pub patterns: Vec<PortPattern>,
    pub guard: Option<Expr>,
    pub actions: Vec<Assignment>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RuleTable {
    pub variables: Vec<VarDecl>,
    pub rules: Vec<Rule>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Rule {
    pub patterns: Vec<PortPattern>,
    pub condition: Option<Expr>,
    pub actions: Vec<Assignment>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PortPattern {
    pub port: String,
    pub pattern: Pattern,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Pattern {
    Literal(Literal),
    /// `*`: any present message.
    Wildcard,
    /// `--`: no message.
    Absent,
}

/// `name = expr` or `name = --` inside an action block.  The name is an
/// out-port or a variable.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Assignment {
    pub target: String,
    pub value: ActionValue,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ActionValue {
    Expr(Expr),
    Absent,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Literal {
    Bool(bool),
    Int(i64),
    Str(String),
    /// An enumeration value, named without its enumeration.
    Enum(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum UnOp {
    Neg,
    Not,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    And,
    Or,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::And => "and",
            BinOp::Or => "or",
        }
    }

    pub fn is_arith(self) -> bool {
        matches!(self, BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Div)
    }

    pub fn is_ordering(self) -> bool {
        matches!(self, BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge)
    }

    pub fn is_equality(self) -> bool {
        matches!(self, BinOp::Eq | BinOp::Ne)
    }

    pub fn is_logical(self) -> bool {
        matches!(self, BinOp::And | BinOp::Or)
    }
}

/// An expression as written.
///
/// `Name` is resolved by context to a variable, an in-port read, a config
/// parameter, or an enumeration value (in that order).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    Lit(Literal),
    Name(String),
    Unary(UnOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn int(v: i64) -> Expr {
        Expr::Lit(Literal::Int(v))
    }

    pub fn name(n: impl Into<String>) -> Expr {
        Expr::Name(n.into())
    }

    pub fn binary(op: BinOp, lhs: Expr, rhs: Expr) -> Expr {
        Expr::Binary(op, Box::new(lhs), Box::new(rhs))
    }

    /// Every `Name` occurring in the expression, left to right.
    pub fn names(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_names(&mut out);
        out
    }

    fn collect_names<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            Expr::Lit(_) => {}
            Expr::Name(n) => out.push(n),
            Expr::Unary(_, e) => e.collect_names(out),
            Expr::Binary(_, l, r) => {
                l.collect_names(out);
                r.collect_names(out);
            }
        }
    }
}

/// All declarations of one `.arc` file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceUnit {
    pub path: String,
    pub enums: Vec<EnumDecl>,
    pub components: Vec<ComponentType>,
}

impl SourceUnit {
    pub fn component(&self, name: &str) -> Option<&ComponentType> {
        self.components.iter().find(|c| c.name == name)
    }
}
