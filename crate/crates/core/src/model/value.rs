use std::fmt;

use serde::{Deserialize, Serialize};

use super::ast::{PrimitiveType, TypeExpr};

/// A runtime value carried by a port or held in a variable.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Value {
    Bool(bool),
    Int(i64),
    Str(String),
    Enum { ty: String, value: String },
}

impl Value {
    pub fn enum_value(ty: impl Into<String>, value: impl Into<String>) -> Value {
        Value::Enum { ty: ty.into(), value: value.into() }
    }

    /// The concrete type of the value.
    pub fn type_of(&self) -> TypeExpr {
        match self {
            Value::Bool(_) => TypeExpr::Primitive(PrimitiveType::Boolean),
            Value::Int(_) => TypeExpr::Primitive(PrimitiveType::Integer),
            Value::Str(_) => TypeExpr::Primitive(PrimitiveType::String),
            Value::Enum { ty, .. } => TypeExpr::EnumRef(ty.clone()),
        }
    }

    pub fn conforms_to(&self, ty: &TypeExpr) -> bool {
        self.type_of() == *ty
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(*b),
            _ => None,
        }
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            Value::Int(i) => Some(*i),
            _ => None,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        match self {
            Value::Bool(b) => serde_json::Value::Bool(*b),
            Value::Int(i) => serde_json::Value::from(*i),
            Value::Str(s) => serde_json::Value::String(s.clone()),
            Value::Enum { value, .. } => serde_json::Value::String(value.clone()),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Bool(b) => write!(f, "{b}"),
            Value::Int(i) => write!(f, "{i}"),
            Value::Str(s) => write!(f, "{s:?}"),
            Value::Enum { value, .. } => f.write_str(value),
        }
    }
}

/// The element on one port at one tick: a value, or ⊥.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum Message {
    Present(Value),
    #[default]
    Absent,
}

impl Message {
    pub fn is_absent(&self) -> bool {
        matches!(self, Message::Absent)
    }

    pub fn value(&self) -> Option<&Value> {
        match self {
            Message::Present(v) => Some(v),
            Message::Absent => None,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        match self {
            Message::Present(v) => v.to_json(),
            Message::Absent => serde_json::Value::Null,
        }
    }
}

impl From<Value> for Message {
    fn from(v: Value) -> Self {
        Message::Present(v)
    }
}

impl From<Option<Value>> for Message {
    fn from(v: Option<Value>) -> Self {
        v.map(Message::Present).unwrap_or(Message::Absent)
    }
}

impl fmt::Display for Message {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Message::Present(v) => v.fmt(f),
            Message::Absent => f.write_str("--"),
        }
    }
}
