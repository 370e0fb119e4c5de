//! Resolved expressions and their evaluation.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::ast::{BinOp, UnOp};
use super::value::{Message, Value};

/// An expression with every name bound: variables and ports by index into
/// the owning component's tables, config parameters folded to constants.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RExpr {
    Const(Value),
    Var(usize),
    Port(usize),
    Unary(UnOp, Box<RExpr>),
    Binary(BinOp, Box<RExpr>, Box<RExpr>),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalErrorKind {
    #[error("integer overflow in `{0}`")]
    Overflow(&'static str),
    #[error("division by zero")]
    DivisionByZero,
    #[error("read of absent port `{0}`")]
    AbsentRead(String),
    #[error("ill-typed operands for `{0}`")]
    IllTyped(&'static str),
}

/// Read-only evaluation context: current variable values and the port
/// messages visible this tick.
pub struct EvalEnv<'a> {
    pub vars: &'a [Value],
    pub ports: &'a [Message],
    pub port_names: &'a [String],
}

impl<'a> EvalEnv<'a> {
    pub const EMPTY: EvalEnv<'static> = EvalEnv { vars: &[], ports: &[], port_names: &[] };
}

impl RExpr {
    pub fn eval(&self, env: &EvalEnv<'_>) -> Result<Value, EvalErrorKind> {
        match self {
            RExpr::Const(v) => Ok(v.clone()),
            RExpr::Var(i) => Ok(env.vars[*i].clone()),
            RExpr::Port(i) => match &env.ports[*i] {
                Message::Present(v) => Ok(v.clone()),
                Message::Absent => Err(EvalErrorKind::AbsentRead(
                    env.port_names.get(*i).cloned().unwrap_or_else(|| format!("#{i}")),
                )),
            },
            RExpr::Unary(UnOp::Neg, e) => match e.eval(env)? {
                Value::Int(i) => i.checked_neg().map(Value::Int).ok_or(EvalErrorKind::Overflow("-")),
                _ => Err(EvalErrorKind::IllTyped("-")),
            },
            RExpr::Unary(UnOp::Not, e) => match e.eval(env)? {
                Value::Bool(b) => Ok(Value::Bool(!b)),
                _ => Err(EvalErrorKind::IllTyped("not")),
            },
            RExpr::Binary(op @ (BinOp::And | BinOp::Or), l, r) => {
                let lhs = l.eval(env)?.as_bool().ok_or(EvalErrorKind::IllTyped(op.symbol()))?;
                // short-circuit: the right operand is not evaluated once the result is known
                if (*op == BinOp::And && !lhs) || (*op == BinOp::Or && lhs) {
                    return Ok(Value::Bool(lhs));
                }
                let rhs = r.eval(env)?.as_bool().ok_or(EvalErrorKind::IllTyped(op.symbol()))?;
                Ok(Value::Bool(rhs))
            }
            RExpr::Binary(op, l, r) => {
                let lhs = l.eval(env)?;
                let rhs = r.eval(env)?;
                apply_binary(*op, &lhs, &rhs)
            }
        }
    }

    /// Evaluates an expression that refers to no variables or ports.
    pub fn eval_const(&self) -> Result<Value, EvalErrorKind> {
        self.eval(&EvalEnv::EMPTY)
    }

    pub fn is_const(&self) -> bool {
        match self {
            RExpr::Const(_) => true,
            RExpr::Var(_) | RExpr::Port(_) => false,
            RExpr::Unary(_, e) => e.is_const(),
            RExpr::Binary(_, l, r) => l.is_const() && r.is_const(),
        }
    }
}

fn apply_binary(op: BinOp, lhs: &Value, rhs: &Value) -> Result<Value, EvalErrorKind> {
    let sym = op.symbol();
    if op.is_equality() {
        let eq = lhs == rhs;
        return Ok(Value::Bool(if op == BinOp::Eq { eq } else { !eq }));
    }
    let (Value::Int(a), Value::Int(b)) = (lhs, rhs) else {
        return Err(EvalErrorKind::IllTyped(sym));
    };
    let (a, b) = (*a, *b);
    let v = match op {
        BinOp::Add => Value::Int(a.checked_add(b).ok_or(EvalErrorKind::Overflow(sym))?),
        BinOp::Sub => Value::Int(a.checked_sub(b).ok_or(EvalErrorKind::Overflow(sym))?),
        BinOp::Mul => Value::Int(a.checked_mul(b).ok_or(EvalErrorKind::Overflow(sym))?),
        BinOp::Div => {
            if b == 0 {
                return Err(EvalErrorKind::DivisionByZero);
            }
            Value::Int(a.checked_div(b).ok_or(EvalErrorKind::Overflow(sym))?)
        }
        BinOp::Lt => Value::Bool(a < b),
        BinOp::Le => Value::Bool(a <= b),
        BinOp::Gt => Value::Bool(a > b),
        BinOp::Ge => Value::Bool(a >= b),
        BinOp::Eq | BinOp::Ne | BinOp::And | BinOp::Or => unreachable!("handled above"),
    };
    Ok(v)
}
