use std::collections::BTreeSet;

use crate::model::*;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeError {
    pub code: &'static str,
    pub message: String,
}

fn err<T>(code: &'static str, message: impl Into<String>) -> Result<T, TypeError> {
    Err(TypeError { code, message: message.into() })
}

/// Names visible to an expression.  `vars == None` marks a constant
/// context (initializers and config arguments).
pub struct ExprScope<'a> {
    component: &'a ComponentType,
    vars: Option<&'a [VarDecl]>,
    present: Option<&'a BTreeSet<String>>,
    lib: &'a Library,
}

impl<'a> ExprScope<'a> {
    pub fn constant(component: &'a ComponentType, lib: &'a Library) -> Self {
        ExprScope { component, vars: None, present: None, lib }
    }

    /// `present` lists the in-ports guaranteed present by the enclosing patterns.
    pub fn behavior(
        component: &'a ComponentType,
        vars: &'a [VarDecl],
        present: &'a BTreeSet<String>,
        lib: &'a Library,
    ) -> Self {
        ExprScope { component, vars: Some(vars), present: Some(present), lib }
    }

    fn name(&self, n: &str) -> Result<TypeExpr, TypeError> {
        let c = self.component;
        let all_vars: Vec<&VarDecl> = c
            .behaviors
            .iter()
            .flat_map(|b| match b {
                Behavior::Automaton(a) => a.variables.iter(),
                Behavior::Rules(r) => r.variables.iter(),
                Behavior::Native => [].iter(),
            })
            .collect();
        if let Some(v) = all_vars.iter().find(|v| v.name == n) {
            return match self.vars {
                Some(vars) if vars.iter().any(|w| w.name == n) => Ok(v.ty.clone()),
                _ => err("W12", format!("`{n}` is a variable; only constants are allowed here")),
            };
        }
        if let Some(p) = c.port(n).filter(|p| p.direction == Direction::In) {
            return match self.present {
                Some(present) if present.contains(n) => Ok(p.ty.clone()),
                Some(_) => err("W6", format!("in-port `{n}` is read without a pattern requiring its presence")),
                None => err("W12", format!("`{n}` is a port; only constants are allowed here")),
            };
        }
        if let Some(p) = c.config_params.iter().find(|p| p.name == n) {
            return Ok(p.ty.clone());
        }
        if let Some(e) = self.lib.enum_of_value(n) {
            return Ok(TypeExpr::EnumRef(e.to_string()));
        }
        if c.port(n).is_some() {
            return match self.present {
                Some(_) => err("W6", format!("out-port `{n}` cannot be read")),
                None => err("W12", format!("`{n}` is a port; only constants are allowed here")),
            };
        }
        if c.subcomponent(n).is_some() {
            return err("W12", format!("`{n}` is a subcomponent, not a value"));
        }
        err("W11", format!("unknown name `{n}`"))
    }

    pub fn type_of(&self, e: &Expr) -> Result<TypeExpr, TypeError> {
        match e {
            Expr::Lit(l) => literal_type(l, self.lib),
            Expr::Name(n) => self.name(n),
            Expr::Unary(op, inner) => {
                let t = self.type_of(inner)?;
                let want = match op {
                    UnOp::Neg => TypeExpr::INTEGER,
                    UnOp::Not => TypeExpr::BOOLEAN,
                };
                if t != want {
                    let sym = if *op == UnOp::Neg { "-" } else { "not" };
                    return err("W12", format!("operator `{sym}` expects {want}, found {t}"));
                }
                Ok(want)
            }
            Expr::Binary(op, l, r) => {
                let lt = self.type_of(l)?;
                let rt = self.type_of(r)?;
                let sym = op.symbol();
                if op.is_arith() || op.is_ordering() {
                    if lt != TypeExpr::INTEGER || rt != TypeExpr::INTEGER {
                        return err("W12", format!("operator `{sym}` expects Integer operands, found {lt} and {rt}"));
                    }
                    Ok(if op.is_arith() { TypeExpr::INTEGER } else { TypeExpr::BOOLEAN })
                } else if op.is_equality() {
                    if lt != rt {
                        return err("W12", format!("cannot compare {lt} with {rt}"));
                    }
                    Ok(TypeExpr::BOOLEAN)
                } else {
                    if lt != TypeExpr::BOOLEAN || rt != TypeExpr::BOOLEAN {
                        return err("W12", format!("operator `{sym}` expects Boolean operands, found {lt} and {rt}"));
                    }
                    Ok(TypeExpr::BOOLEAN)
                }
            }
        }
    }
}

pub fn literal_type(l: &Literal, lib: &Library) -> Result<TypeExpr, TypeError> {
    match l {
        Literal::Bool(_) => Ok(TypeExpr::BOOLEAN),
        Literal::Int(_) => Ok(TypeExpr::INTEGER),
        Literal::Str(_) => Ok(TypeExpr::STRING),
        Literal::Enum(v) => match lib.enum_of_value(v) {
            Some(e) => Ok(TypeExpr::EnumRef(e.to_string())),
            None => err("W11", format!("unknown enumeration value `{v}`")),
        },
    }
}
