use std::collections::BTreeMap;

use serde_json::{Map, Value as Json};
use thiserror::Error;

use crate::model::{Message, TypeExpr, Value};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TraceError {
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("line {line}: unknown port `{port}`")]
    UnknownPort { line: usize, port: String },
    #[error("line {line}: tick {tick} is not greater than the previous tick")]
    TickOrder { line: usize, tick: u64 },
    #[error("line {line}: `{port}` expects {expected}, got {found}")]
    IllTyped { line: usize, port: String, expected: String, found: String },
}

/// Per-port message sequences.  Every sequence has length [`Trace::len`];
/// ports that were never written read as ⊥.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Trace {
    len: usize,
    ports: BTreeMap<String, Vec<Message>>,
}

impl Trace {
    pub fn new() -> Self {
        Trace::default()
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.ports.keys().map(String::as_str)
    }

    /// Message on `key` at `tick`; ⊥ outside the recorded range.
    pub fn get(&self, key: &str, tick: usize) -> &Message {
        static ABSENT: Message = Message::Absent;
        self.ports.get(key).and_then(|s| s.get(tick)).unwrap_or(&ABSENT)
    }

    pub fn series(&self, key: &str) -> Option<&[Message]> {
        self.ports.get(key).map(Vec::as_slice)
    }

    /// Declares a port so that it is listed even when it stays ⊥.
    pub fn declare(&mut self, key: impl Into<String>) {
        let len = self.len;
        self.ports.entry(key.into()).or_insert_with(|| vec![Message::Absent; len]);
    }

    pub fn set(&mut self, key: &str, tick: usize, msg: Message) {
        if tick >= self.len {
            self.extend_to(tick + 1);
        }
        self.declare(key);
        self.ports.get_mut(key).expect("declared")[tick] = msg;
    }

    pub fn extend_to(&mut self, len: usize) {
        if len > self.len {
            self.len = len;
            for s in self.ports.values_mut() {
                s.resize(len, Message::Absent);
            }
        }
    }

    pub fn truncate(&mut self, len: usize) {
        if len < self.len {
            self.len = len;
            for s in self.ports.values_mut() {
                s.truncate(len);
            }
        }
    }

    /// Appends one tick.  Ports missing from `tick` read ⊥.
    pub fn push_tick(&mut self, tick: &BTreeMap<String, Message>) {
        let t = self.len;
        self.extend_to(t + 1);
        for (k, m) in tick {
            self.set(k, t, m.clone());
        }
    }

    pub fn tick(&self, tick: usize) -> BTreeMap<String, Message> {
        self.ports.iter().map(|(k, s)| (k.clone(), s.get(tick).cloned().unwrap_or_default())).collect()
    }

    /// One JSON object per tick, `{"tick":n,"ports":{...}}`, keys sorted,
    /// ⊥ as `null`, every declared port listed.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for t in 0..self.len {
            let ports: Map<String, Json> = self.ports.iter().map(|(k, s)| (k.clone(), s[t].to_json())).collect();
            out.push_str("{\"tick\":");
            out.push_str(&t.to_string());
            out.push_str(",\"ports\":");
            out.push_str(&serde_json::to_string(&ports).expect("json"));
            out.push_str("}\n");
        }
        out
    }

    /// Reads a JSONL trace against a port typing.  Omitted ports and
    /// skipped ticks are ⊥; unknown ports, non-increasing ticks and values
    /// that do not fit the port type are errors.
    pub fn from_jsonl(
        text: &str,
        types: &BTreeMap<String, TypeExpr>,
        enums: &BTreeMap<String, Vec<String>>,
    ) -> Result<Trace, TraceError> {
        let mut trace = Trace::new();
        let mut last: Option<u64> = None;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            if raw.trim().is_empty() {
                continue;
            }
            let malformed = |reason: &str| TraceError::Malformed { line, reason: reason.to_string() };
            let obj: Json = serde_json::from_str(raw).map_err(|e| malformed(&e.to_string()))?;
            let obj = obj.as_object().ok_or_else(|| malformed("expected a JSON object"))?;
            let tick = obj.get("tick").and_then(Json::as_u64).ok_or_else(|| malformed("missing or invalid `tick`"))?;
            if obj.keys().any(|k| k != "tick" && k != "ports") {
                return Err(malformed("only `tick` and `ports` are allowed"));
            }
            if last.is_some_and(|l| tick <= l) {
                return Err(TraceError::TickOrder { line, tick });
            }
            last = Some(tick);
            let idx = usize::try_from(tick).map_err(|_| malformed("tick out of range"))?;
            let empty = Map::new();
            let ports = match obj.get("ports") {
                None => &empty,
                Some(p) => p.as_object().ok_or_else(|| malformed("`ports` must be an object"))?,
            };
            trace.extend_to(idx + 1);
            for (port, v) in ports {
                let ty = types.get(port).ok_or_else(|| TraceError::UnknownPort { line, port: port.clone() })?;
                let msg = decode(v, ty, enums).ok_or_else(|| TraceError::IllTyped {
                    line,
                    port: port.clone(),
                    expected: ty.to_string(),
                    found: v.to_string(),
                })?;
                trace.set(port, idx, msg);
            }
        }
        Ok(trace)
    }
}

fn decode(v: &Json, ty: &TypeExpr, enums: &BTreeMap<String, Vec<String>>) -> Option<Message> {
    if v.is_null() {
        return Some(Message::Absent);
    }
    let value = match ty {
        TypeExpr::Primitive(p) => match p {
            crate::model::PrimitiveType::Boolean => Value::Bool(v.as_bool()?),
            crate::model::PrimitiveType::Integer => Value::Int(v.as_i64()?),
            crate::model::PrimitiveType::String => Value::Str(v.as_str()?.to_string()),
        },
        TypeExpr::EnumRef(e) => {
            let s = v.as_str()?;
            if !enums.get(e)?.iter().any(|x| x == s) {
                return None;
            }
            Value::enum_value(e.clone(), s)
        }
        TypeExpr::TypeParam(_) => return None,
    };
    Some(Message::Present(value))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn types() -> BTreeMap<String, TypeExpr> {
        BTreeMap::from([
            ("a.b".to_string(), TypeExpr::BOOLEAN),
            ("a.i".to_string(), TypeExpr::INTEGER),
            ("a.m".to_string(), TypeExpr::EnumRef("M".into())),
        ])
    }

    fn enums() -> BTreeMap<String, Vec<String>> {
        BTreeMap::from([("M".to_string(), vec!["X".to_string(), "Y".to_string()])])
    }

    #[test]
    fn round_trip_with_gaps() {
        let t = Trace::from_jsonl("{\"tick\":2,\"ports\":{\"a.b\":true,\"a.m\":\"Y\"}}\n", &types(), &enums()).unwrap();
        assert_eq!(t.len(), 3);
        assert_eq!(t.get("a.b", 0), &Message::Absent);
        assert_eq!(t.get("a.m", 2), &Message::Present(Value::enum_value("M", "Y")));
        assert_eq!(
            t.to_jsonl(),
            "{\"tick\":0,\"ports\":{\"a.b\":null,\"a.m\":null}}\n{\"tick\":1,\"ports\":{\"a.b\":null,\"a.m\":null}}\n{\"tick\":2,\"ports\":{\"a.b\":true,\"a.m\":\"Y\"}}\n"
        );
    }

    #[test]
    fn rejects_bad_input() {
        let read = |s: &str| Trace::from_jsonl(s, &types(), &enums());
        assert!(matches!(read("{\"tick\":0,\"ports\":{\"zz\":1}}"), Err(TraceError::UnknownPort { .. })));
        assert!(matches!(read("{\"tick\":1}\n{\"tick\":1}"), Err(TraceError::TickOrder { .. })));
        assert!(matches!(read("{\"tick\":0,\"ports\":{\"a.i\":true}}"), Err(TraceError::IllTyped { .. })));
        assert!(matches!(read("{\"tick\":0,\"ports\":{\"a.m\":\"Z\"}}"), Err(TraceError::IllTyped { .. })));
        assert!(matches!(read("{\"tick\":0,\"ports\":{\"a.i\":1.5}}"), Err(TraceError::IllTyped { .. })));
        assert!(matches!(read("not json"), Err(TraceError::Malformed { .. })));
        assert!(matches!(read("{\"tick\":-1}"), Err(TraceError::Malformed { .. })));
    }

    #[test]
    fn empty_text_is_empty_trace() {
        assert!(Trace::from_jsonl("\n\n", &types(), &enums()).unwrap().is_empty());
    }
}
