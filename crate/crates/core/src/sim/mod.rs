//! Deterministic time-synchronous execution of an instance model.
//!
//! Every tick: out-port messages pending from the previous tick are
//! delivered along connectors (instantaneously, through any number of
//! pass-through ports) and the environment's values appear on the root's
//! in-ports.  Each atomic instance then reacts to what it sees; its outputs
//! become visible one tick later.  Automata fire the first enabled
//! transition in declaration order, rule tables the first enabled rule; with
//! nothing enabled the instance stutters (outputs ⊥, state unchanged).

mod native;
mod trace;

use std::collections::{BTreeMap, BTreeSet, HashMap};

use thiserror::Error;

use crate::model::*;

pub use native::{NativeBinding, NativeImpl, PortMessages, ScriptedStub};
pub use trace::{Trace, TraceError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("no native implementation bound for `{0}`")]
    MissingBinding(String),
    #[error("`{0}` is bound but is not a native instance")]
    UnexpectedBinding(String),
    #[error("`{path}`: initialization failed: {kind}")]
    InitEval { path: String, kind: EvalErrorKind },
    #[error("`{path}` at tick {tick}: {kind}")]
    Eval { path: String, tick: u64, kind: EvalErrorKind },
    #[error("`{path}` at tick {tick}: {message}")]
    Native { path: String, tick: u64, message: String },
    #[error("environment input `{0}` is not an in-port of the root")]
    UnknownInput(String),
}

/// Where the message observed on a port comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Source {
    /// Pending output of atomic instance `.0`, port index `.1`.
    Pending(usize, usize),
    /// Environment input on a root in-port.
    Env(usize),
    None,
}

enum Exec {
    Automaton { def: ResolvedAutomaton, state: usize, vars: Vec<Value> },
    Rules { def: ResolvedRules, vars: Vec<Value> },
    Native(Box<dyn NativeImpl>),
}

struct Atomic {
    path: String,
    ports: Vec<ResolvedPort>,
    port_names: Vec<String>,
    /// Slot index of each port.
    slots: Vec<usize>,
    pending: Vec<Message>,
    exec: Exec,
}

/// Port typing of a model, keyed `<instance path>.<port>`.
pub fn port_types(model: &InstanceModel) -> BTreeMap<String, TypeExpr> {
    let mut out = BTreeMap::new();
    for n in model.nodes() {
        for p in &n.ports {
            out.insert(PortPath::new(&n.path, &p.name).key(), p.ty.clone());
        }
    }
    out
}

/// Typing of the root's in-ports, the only ports an environment drives.
pub fn input_types(model: &InstanceModel) -> BTreeMap<String, TypeExpr> {
    let root = &model.root;
    root.ports
        .iter()
        .filter(|p| p.direction == Direction::In)
        .map(|p| (PortPath::new(&root.path, &p.name).key(), p.ty.clone()))
        .collect()
}

/// Typing of the out-ports of native instances, the ports a stub trace drives.
pub fn native_output_types(model: &InstanceModel) -> BTreeMap<String, TypeExpr> {
    let mut out = BTreeMap::new();
    for n in model.atomic_nodes() {
        if matches!(n.behavior(), Some(ResolvedBehavior::Native)) {
            for p in n.ports.iter().filter(|p| p.direction == Direction::Out) {
                out.insert(PortPath::new(&n.path, &p.name).key(), p.ty.clone());
            }
        }
    }
    out
}

/// Paths of the native instances of a model, preorder.
pub fn native_paths(model: &InstanceModel) -> Vec<String> {
    model
        .atomic_nodes()
        .into_iter()
        .filter(|n| matches!(n.behavior(), Some(ResolvedBehavior::Native)))
        .map(|n| n.path.clone())
        .collect()
}

/// Bindings for a stub-driven run: one scripted stub per native instance
/// named in `stubs`, plus silent stubs for natives without out-ports.
/// Natives that emit but have no schedule stay unbound.
pub fn stub_bindings(model: &InstanceModel, stubs: &Trace) -> Result<NativeBinding, String> {
    let natives = native_paths(model);
    let mut b = NativeBinding::from_stub_trace(stubs, natives.iter().map(String::as_str))?;
    for p in &natives {
        let emits = model.find(p).is_some_and(|n| n.ports.iter().any(|q| q.direction == Direction::Out));
        if !emits && !b.contains(p) {
            b.bind(p.clone(), ScriptedStub::silent());
        }
    }
    Ok(b)
}

/// What a port observes each tick.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PortSource {
    /// The pending output of an atomic instance's out-port.
    Output(PortPath),
    /// An environment input on a root in-port.
    Input(PortPath),
    /// Nothing: unconnected, or only reachable through a cycle of connectors.
    Absent,
}

/// Resolves every port of every instance to the atomic out-port or root
/// in-port whose message it observes, following connector chains.
pub fn port_sources(model: &InstanceModel) -> BTreeMap<String, PortSource> {
    let mut origin: HashMap<String, PortSource> = HashMap::new();
    let mut incoming: HashMap<String, String> = HashMap::new();
    let mut keys = Vec::new();
    for n in model.nodes() {
        for p in &n.ports {
            let pp = PortPath::new(&n.path, &p.name);
            if n.is_atomic() && p.direction == Direction::Out {
                origin.insert(pp.key(), PortSource::Output(pp.clone()));
            } else if n.path == model.root.path && p.direction == Direction::In {
                origin.insert(pp.key(), PortSource::Input(pp.clone()));
            }
            keys.push(pp.key());
        }
        for c in n.connectors() {
            incoming.entry(c.target.key()).or_insert_with(|| c.source.key());
        }
    }
    keys.into_iter()
        .map(|k| {
            let mut seen = BTreeSet::new();
            let mut cur = k.clone();
            let src = loop {
                if let Some(o) = origin.get(&cur) {
                    break o.clone();
                }
                match incoming.get(&cur) {
                    Some(src) if seen.insert(cur.clone()) => cur = src.clone(),
                    _ => break PortSource::Absent,
                }
            };
            (k, src)
        })
        .collect()
}

/// Execution state of one model.
pub struct RuntimeState {
    tick: u64,
    keys: Vec<String>,
    sources: Vec<Source>,
    env_keys: Vec<String>,
    atomics: Vec<Atomic>,
    by_path: HashMap<String, usize>,
}

/// Binds every instance, evaluates variable initializers and the tick-0
/// outputs.  `bindings` must cover exactly the native instances.
pub fn init_runtime(model: &InstanceModel, mut bindings: NativeBinding) -> Result<RuntimeState, SimError> {
    let nodes = model.nodes();
    let mut keys = Vec::new();
    let mut slot_of: HashMap<String, usize> = HashMap::new();
    for n in &nodes {
        for p in &n.ports {
            let k = PortPath::new(&n.path, &p.name).key();
            slot_of.insert(k.clone(), keys.len());
            keys.push(k);
        }
    }

    let mut atomics = Vec::new();
    let mut by_path = HashMap::new();
    let mut pending_slot: HashMap<usize, (usize, usize)> = HashMap::new();
    for n in nodes.iter().filter(|n| n.is_atomic()) {
        let behavior = n.behavior().expect("atomic").clone();
        let idx = atomics.len();
        let slots: Vec<usize> = n.ports.iter().map(|p| slot_of[&PortPath::new(&n.path, &p.name).key()]).collect();
        for (pi, p) in n.ports.iter().enumerate() {
            if p.direction == Direction::Out {
                pending_slot.insert(slots[pi], (idx, pi));
            }
        }
        let init_err = |kind| SimError::InitEval { path: n.path.clone(), kind };
        let init_vars = |vars: &[ResolvedVar]| -> Result<Vec<Value>, SimError> {
            vars.iter().map(|v| v.init.eval(&EvalEnv::EMPTY).map_err(init_err)).collect()
        };
        let port_names: Vec<String> = n.ports.iter().map(|p| p.name.clone()).collect();
        let mut pending = vec![Message::Absent; n.ports.len()];
        let exec = match behavior {
            ResolvedBehavior::Automaton(def) => {
                let vars = init_vars(&def.variables)?;
                let env = EvalEnv { vars: &vars, ports: &[], port_names: &port_names };
                for (pi, out) in &def.initial_outputs {
                    pending[*pi] = match out {
                        ROutput::Absent => Message::Absent,
                        ROutput::Expr(e) => Message::Present(e.eval(&env).map_err(init_err)?),
                    };
                }
                Exec::Automaton { state: def.initial, def, vars }
            }
            ResolvedBehavior::Rules(def) => {
                let vars = init_vars(&def.variables)?;
                Exec::Rules { def, vars }
            }
            ResolvedBehavior::Native => {
                let mut imp = bindings.take(&n.path).ok_or_else(|| SimError::MissingBinding(n.path.clone()))?;
                let out = imp.init(&n.config).map_err(|message| SimError::Native { path: n.path.clone(), tick: 0, message })?;
                write_native_outputs(&n.path, 0, &n.ports, &out, &mut pending)?;
                Exec::Native(imp)
            }
        };
        by_path.insert(n.path.clone(), idx);
        atomics.push(Atomic { path: n.path.clone(), ports: n.ports.clone(), port_names, slots, pending, exec });
    }
    if let Some(extra) = bindings.paths().next() {
        return Err(SimError::UnexpectedBinding(extra.to_string()));
    }

    let root = &model.root;
    let env_keys: Vec<String> = root
        .ports
        .iter()
        .filter(|p| p.direction == Direction::In)
        .map(|p| PortPath::new(&root.path, &p.name).key())
        .collect();
    let delivery = port_sources(model);
    let sources = keys
        .iter()
        .map(|k| match &delivery[k] {
            PortSource::Output(pp) => {
                let (a, p) = pending_slot[&slot_of[&pp.key()]];
                Source::Pending(a, p)
            }
            PortSource::Input(pp) => Source::Env(env_keys.iter().position(|e| *e == pp.key()).expect("root in-port")),
            PortSource::Absent => Source::None,
        })
        .collect();

    Ok(RuntimeState { tick: 0, keys, sources, env_keys, atomics, by_path })
}

fn write_native_outputs(
    path: &str,
    tick: u64,
    ports: &[ResolvedPort],
    out: &PortMessages,
    pending: &mut [Message],
) -> Result<(), SimError> {
    pending.iter_mut().for_each(|m| *m = Message::Absent);
    for (name, msg) in out {
        let bad = |message: String| SimError::Native { path: path.to_string(), tick, message };
        let Some(pi) = ports.iter().position(|p| &p.name == name && p.direction == Direction::Out) else {
            return Err(bad(format!("`{name}` is not an out-port")));
        };
        if let Message::Present(v) = msg {
            if !v.conforms_to(&ports[pi].ty) {
                return Err(bad(format!("value {v} does not fit `{name}` of type {}", ports[pi].ty)));
            }
        }
        pending[pi] = msg.clone();
    }
    Ok(())
}

impl RuntimeState {
    /// Index of the next tick to be executed.
    pub fn tick(&self) -> u64 {
        self.tick
    }

    pub fn port_keys(&self) -> &[String] {
        &self.keys
    }

    /// Current state name of the automaton at `path`.
    pub fn automaton_state(&self, path: &str) -> Option<&str> {
        match &self.atomics[*self.by_path.get(path)?].exec {
            Exec::Automaton { def, state, .. } => Some(&def.states[*state]),
            _ => None,
        }
    }

    /// Current value of variable `name` of the automaton or rule table at `path`.
    pub fn variable(&self, path: &str, name: &str) -> Option<&Value> {
        let (decls, vals) = match &self.atomics[*self.by_path.get(path)?].exec {
            Exec::Automaton { def, vars, .. } => (&def.variables, vars),
            Exec::Rules { def, vars } => (&def.variables, vars),
            Exec::Native(_) => return None,
        };
        decls.iter().position(|v| v.name == name).map(|i| &vals[i])
    }

    /// Output of `path.port` that will be visible at the next tick.
    pub fn pending(&self, path: &str, port: &str) -> Option<&Message> {
        let a = &self.atomics[*self.by_path.get(path)?];
        a.port_names.iter().position(|p| p == port).map(|i| &a.pending[i])
    }

    /// Executes one tick.  `env` holds messages for root in-ports; missing
    /// entries are ⊥.  Returns the message observed on every port.
    pub fn step(&mut self, env: &PortMessages) -> Result<PortMessages, SimError> {
        if let Some(k) = env.keys().find(|k| !self.env_keys.contains(k)) {
            return Err(SimError::UnknownInput(k.clone()));
        }
        let env_vals: Vec<Message> = self.env_keys.iter().map(|k| env.get(k).cloned().unwrap_or_default()).collect();
        let observed: Vec<Message> = self
            .sources
            .iter()
            .map(|s| match *s {
                Source::Pending(a, p) => self.atomics[a].pending[p].clone(),
                Source::Env(e) => env_vals[e].clone(),
                Source::None => Message::Absent,
            })
            .collect();

        let tick = self.tick;
        for a in &mut self.atomics {
            let inputs: Vec<Message> = a
                .slots
                .iter()
                .zip(&a.ports)
                .map(|(&s, p)| if p.direction == Direction::In { observed[s].clone() } else { Message::Absent })
                .collect();
            a.react(tick, &inputs)?;
        }
        self.tick += 1;
        Ok(self.keys.iter().cloned().zip(observed).collect())
    }
}

impl Atomic {
    fn react(&mut self, tick: u64, inputs: &[Message]) -> Result<(), SimError> {
        let path = &self.path;
        let err = |kind| SimError::Eval { path: path.clone(), tick, kind };
        match &mut self.exec {
            Exec::Automaton { def, state, vars } => {
                let env = EvalEnv { vars, ports: inputs, port_names: &self.port_names };
                let mut fired = None;
                for t in def.transitions.iter().filter(|t| t.from == *state) {
                    if enabled(&t.reaction, &env).map_err(err)? {
                        fired = Some(t);
                        break;
                    }
                }
                match fired {
                    Some(t) => {
                        let (outs, new_vars) = fire(&t.reaction, &env, self.ports.len()).map_err(err)?;
                        self.pending = outs;
                        *vars = new_vars;
                        *state = t.to;
                    }
                    None => self.pending.iter_mut().for_each(|m| *m = Message::Absent),
                }
            }
            Exec::Rules { def, vars } => {
                let env = EvalEnv { vars, ports: inputs, port_names: &self.port_names };
                let mut fired = None;
                for r in &def.rules {
                    if enabled(r, &env).map_err(err)? {
                        fired = Some(r);
                        break;
                    }
                }
                match fired {
                    Some(r) => {
                        let (outs, new_vars) = fire(r, &env, self.ports.len()).map_err(err)?;
                        self.pending = outs;
                        *vars = new_vars;
                    }
                    None => self.pending.iter_mut().for_each(|m| *m = Message::Absent),
                }
            }
            Exec::Native(imp) => {
                let ins: PortMessages = self
                    .ports
                    .iter()
                    .zip(inputs)
                    .filter(|(p, _)| p.direction == Direction::In)
                    .map(|(p, m)| (p.name.clone(), m.clone()))
                    .collect();
                let out = imp.react(tick, &ins).map_err(|message| SimError::Native { path: path.clone(), tick, message })?;
                write_native_outputs(path, tick, &self.ports, &out, &mut self.pending)?;
            }
        }
        Ok(())
    }
}

fn enabled(r: &Reaction, env: &EvalEnv<'_>) -> Result<bool, EvalErrorKind> {
    if !r.patterns.iter().all(|(p, pat)| pat.matches(&env.ports[*p])) {
        return Ok(false);
    }
    match &r.condition {
        None => Ok(true),
        Some(c) => c.eval(env)?.as_bool().ok_or(EvalErrorKind::IllTyped("condition")),
    }
}

/// Outputs of a firing reaction and the variable values after it; all
/// right-hand sides see the pre-tick variables.
fn fire(r: &Reaction, env: &EvalEnv<'_>, n_ports: usize) -> Result<(Vec<Message>, Vec<Value>), EvalErrorKind> {
    let mut outs = vec![Message::Absent; n_ports];
    for (p, o) in &r.outputs {
        outs[*p] = match o {
            ROutput::Absent => Message::Absent,
            ROutput::Expr(e) => Message::Present(e.eval(env)?),
        };
    }
    let mut vars = env.vars.to_vec();
    for (v, e) in &r.updates {
        vars[*v] = e.eval(env)?;
    }
    Ok((outs, vars))
}

/// Runs `ticks` ticks from a fresh runtime.  Ticks beyond the end of `env`
/// see ⊥ on every root in-port.  The result lists every port of every
/// instance.
pub fn run(model: &InstanceModel, bindings: NativeBinding, env: &Trace, ticks: usize) -> Result<Trace, SimError> {
    let mut state = init_runtime(model, bindings)?;
    if let Some(k) = env.keys().find(|k| !state.env_keys.iter().any(|e| e == k)) {
        return Err(SimError::UnknownInput(k.to_string()));
    }
    let mut out = Trace::new();
    if ticks == 0 {
        return Ok(out);
    }
    for k in &state.keys {
        out.declare(k.clone());
    }
    for t in 0..ticks {
        let inputs: PortMessages = state.env_keys.iter().map(|k| (k.clone(), env.get(k, t).clone())).collect();
        let observed = state.step(&inputs)?;
        out.push_tick(&observed);
    }
    Ok(out)
}

#[cfg(test)]
mod tests;
