use std::collections::BTreeMap;
use std::fmt;

use crate::model::{Message, Value};

use super::trace::Trace;

pub type PortMessages = BTreeMap<String, Message>;

/// Implementation of a native component.
///
/// `init` returns the messages visible on the out-ports at tick 0;
/// `react(t, inputs)` sees the messages delivered at tick `t` and returns
/// the outputs that become visible at tick `t + 1`.  Out-ports missing from
/// a returned map are ⊥.
pub trait NativeImpl: Send {
    fn init(&mut self, config: &[(String, Value)]) -> Result<PortMessages, String>;
    fn react(&mut self, tick: u64, inputs: &PortMessages) -> Result<PortMessages, String>;
}

/// Replays a fixed schedule keyed by the tick at which each message is
/// observed.  Unlisted ticks emit ⊥ on every out-port.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ScriptedStub {
    pub schedule: BTreeMap<u64, PortMessages>,
}

impl ScriptedStub {
    pub fn new(schedule: BTreeMap<u64, PortMessages>) -> Self {
        ScriptedStub { schedule }
    }

    /// A stub that never emits anything.
    pub fn silent() -> Self {
        ScriptedStub::default()
    }

    pub fn at(mut self, tick: u64, port: &str, msg: impl Into<Message>) -> Self {
        self.schedule.entry(tick).or_default().insert(port.to_string(), msg.into());
        self
    }

    fn observed(&self, tick: u64) -> PortMessages {
        self.schedule.get(&tick).cloned().unwrap_or_default()
    }
}

impl NativeImpl for ScriptedStub {
    fn init(&mut self, _config: &[(String, Value)]) -> Result<PortMessages, String> {
        Ok(self.observed(0))
    }

    fn react(&mut self, tick: u64, _inputs: &PortMessages) -> Result<PortMessages, String> {
        Ok(self.observed(tick + 1))
    }
}

/// Instance path -> implementation for every native instance of a model.
#[derive(Default)]
pub struct NativeBinding {
    impls: BTreeMap<String, Box<dyn NativeImpl>>,
}

impl fmt::Debug for NativeBinding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.impls.keys()).finish()
    }
}

impl NativeBinding {
    pub fn new() -> Self {
        NativeBinding::default()
    }

    pub fn bind(&mut self, path: impl Into<String>, imp: impl NativeImpl + 'static) -> &mut Self {
        self.impls.insert(path.into(), Box::new(imp));
        self
    }

    pub fn with(mut self, path: impl Into<String>, imp: impl NativeImpl + 'static) -> Self {
        self.bind(path, imp);
        self
    }

    pub fn contains(&self, path: &str) -> bool {
        self.impls.contains_key(path)
    }

    pub fn paths(&self) -> impl Iterator<Item = &str> {
        self.impls.keys().map(String::as_str)
    }

    pub(crate) fn take(&mut self, path: &str) -> Option<Box<dyn NativeImpl>> {
        self.impls.remove(path)
    }

    /// Splits a stub trace (keys `<instance path>.<port>`) into one scripted
    /// stub per instance.  `instances` are the candidate native paths; the
    /// longest matching path prefix wins.
    pub fn from_stub_trace<'a>(trace: &Trace, instances: impl IntoIterator<Item = &'a str>) -> Result<Self, String> {
        let instances: Vec<&str> = instances.into_iter().collect();
        let mut per: BTreeMap<String, ScriptedStub> = BTreeMap::new();
        for key in trace.keys() {
            let owner = instances
                .iter()
                .filter(|p| key.len() > p.len() && key.starts_with(*p) && key.as_bytes()[p.len()] == b'.')
                .max_by_key(|p| p.len())
                .ok_or_else(|| format!("`{key}` is not a port of a native instance"))?;
            let port = &key[owner.len() + 1..];
            let stub = per.entry(owner.to_string()).or_default();
            for t in 0..trace.len() {
                let msg = trace.get(key, t);
                if !msg.is_absent() {
                    stub.schedule.entry(t as u64).or_default().insert(port.to_string(), msg.clone());
                }
            }
        }
        let mut b = NativeBinding::new();
        for (path, stub) in per {
            b.bind(path, stub);
        }
        Ok(b)
    }
}
