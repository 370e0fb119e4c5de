//! Abstract syntax, resolved components, and the elaborated instance model.

pub mod ast;
pub mod expr;
pub mod instance;
pub mod library;
pub mod resolved;
pub mod value;

use thiserror::Error;

pub use ast::*;
pub use expr::{EvalEnv, EvalErrorKind, RExpr};
pub use instance::{elaborate, root_instance_name, InstanceConnector, InstanceModel, InstanceNode, NodeKind, PortPath};
pub use library::Library;
pub use resolved::{
    substitute, RPattern, ROutput, Reaction, ResolvedAutomaton, ResolvedBehavior, ResolvedBody, ResolvedComponent,
    ResolvedPort, ResolvedRules, ResolvedSub, ResolvedTransition, ResolvedVar,
};
pub use value::{Message, Value};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("`{component}` expects {expected} {kind} argument(s), found {found}")]
    ArityMismatch { component: String, kind: &'static str, expected: usize, found: usize },
    #[error("config parameter `{param}` of `{component}` has type {expected}, argument has type {found}")]
    TypeMismatch { component: String, param: String, expected: TypeExpr, found: TypeExpr },
    #[error("unresolved reference `{name}` in `{context}`")]
    UnresolvedReference { context: String, name: String },
    #[error("component `{0}` must have either subcomponents or exactly one behavior")]
    MalformedBody(String),
    #[error("constant argument in `{component}` cannot be evaluated: {reason}")]
    ConstEval { component: String, reason: String },
    #[error("component `{0}` instantiates itself")]
    RecursiveInstantiation(String),
    #[error("`{0}` is not a composed instance below the root")]
    NotInlinable(String),
}
