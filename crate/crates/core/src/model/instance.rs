//! The elaborated instance tree.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::ast::{ComponentType, PortRef, TypeExpr};
use super::library::Library;
use super::resolved::{substitute, ResolvedBehavior, ResolvedBody, ResolvedPort};
use super::value::Value;
use super::ModelError;

/// A port of one instance, addressed by the instance's full dotted path.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PortPath {
    pub instance: String,
    pub port: String,
}

impl PortPath {
    pub fn new(instance: impl Into<String>, port: impl Into<String>) -> Self {
        PortPath { instance: instance.into(), port: port.into() }
    }

    pub fn key(&self) -> String {
        format!("{}.{}", self.instance, self.port)
    }
}

impl fmt::Display for PortPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.instance, self.port)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct InstanceConnector {
    pub source: PortPath,
    pub target: PortPath,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NodeKind {
    Composed { children: Vec<InstanceNode>, connectors: Vec<InstanceConnector> },
    Atomic(ResolvedBehavior),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct InstanceNode {
    pub path: String,
    pub name: String,
    pub definition: String,
    pub type_args: Vec<TypeExpr>,
    pub ports: Vec<ResolvedPort>,
    pub config: Vec<(String, Value)>,
    pub kind: NodeKind,
}

impl InstanceNode {
    pub fn is_atomic(&self) -> bool {
        matches!(self.kind, NodeKind::Atomic(_))
    }

    pub fn behavior(&self) -> Option<&ResolvedBehavior> {
        match &self.kind {
            NodeKind::Atomic(b) => Some(b),
            NodeKind::Composed { .. } => None,
        }
    }

    pub fn children(&self) -> &[InstanceNode] {
        match &self.kind {
            NodeKind::Composed { children, .. } => children,
            NodeKind::Atomic(_) => &[],
        }
    }

    pub fn connectors(&self) -> &[InstanceConnector] {
        match &self.kind {
            NodeKind::Composed { connectors, .. } => connectors,
            NodeKind::Atomic(_) => &[],
        }
    }

    pub fn port(&self, name: &str) -> Option<&ResolvedPort> {
        self.ports.iter().find(|p| p.name == name)
    }

    fn visit<'a>(&'a self, out: &mut Vec<&'a InstanceNode>) {
        out.push(self);
        for c in self.children() {
            c.visit(out);
        }
    }

    fn find_mut(&mut self, path: &str) -> Option<&mut InstanceNode> {
        if self.path == path {
            return Some(self);
        }
        match &mut self.kind {
            NodeKind::Composed { children, .. } => children.iter_mut().find_map(|c| c.find_mut(path)),
            NodeKind::Atomic(_) => None,
        }
    }

    /// The composed node listing `path` among its children.  Paths are kept
    /// through inlining, so this is not always the path prefix.
    fn parent_of_mut(&mut self, path: &str) -> Option<&mut InstanceNode> {
        let NodeKind::Composed { children, .. } = &mut self.kind else { return None };
        if children.iter().any(|c| c.path == path) {
            return Some(self);
        }
        let NodeKind::Composed { children, .. } = &mut self.kind else { unreachable!() };
        children.iter_mut().find_map(|c| c.parent_of_mut(path))
    }
}

/// The fully elaborated model: every instance with concrete types and bound
/// configuration, plus the enumerations its types refer to.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct InstanceModel {
    pub root: InstanceNode,
    pub enums: BTreeMap<String, Vec<String>>,
}

/// Instance name used for the root: the definition name with its first
/// letter lower-cased.
pub fn root_instance_name(definition: &str) -> String {
    let mut chars = definition.chars();
    match chars.next() {
        Some(first) => first.to_lowercase().chain(chars).collect(),
        None => String::new(),
    }
}

/// Builds the instance tree rooted at `root`.
pub fn elaborate(root: &ComponentType, library: &Library) -> Result<InstanceModel, ModelError> {
    let mut stack = Vec::new();
    let node = elaborate_node(
        root,
        &root_instance_name(&root.name),
        &root_instance_name(&root.name),
        &[],
        &[],
        library,
        &mut stack,
    )?;
    let enums = library.enums.iter().map(|(name, decl)| (name.clone(), decl.values.clone())).collect();
    Ok(InstanceModel { root: node, enums })
}

fn elaborate_node(
    def: &ComponentType,
    name: &str,
    path: &str,
    type_args: &[TypeExpr],
    config_args: &[Value],
    library: &Library,
    stack: &mut Vec<String>,
) -> Result<InstanceNode, ModelError> {
    if stack.contains(&def.name) {
        return Err(ModelError::RecursiveInstantiation(def.name.clone()));
    }
    stack.push(def.name.clone());
    let resolved = substitute(def, type_args, config_args, library)?;
    let kind = match resolved.body {
        ResolvedBody::Atomic(b) => NodeKind::Atomic(b),
        ResolvedBody::Composed { subcomponents, connectors } => {
            let mut children = Vec::with_capacity(subcomponents.len());
            for sub in &subcomponents {
                let child_def = library.component(&sub.component).ok_or_else(|| {
                    ModelError::UnresolvedReference { context: def.name.clone(), name: sub.component.clone() }
                })?;
                let child_path = format!("{path}.{}", sub.instance_name);
                children.push(elaborate_node(
                    child_def,
                    &sub.instance_name,
                    &child_path,
                    &sub.type_args,
                    &sub.config_args,
                    library,
                    stack,
                )?);
            }
            let to_path = |r: &PortRef| match &r.instance {
                Some(inst) => PortPath::new(format!("{path}.{inst}"), r.port.clone()),
                None => PortPath::new(path, r.port.clone()),
            };
            let connectors = connectors
                .iter()
                .map(|(s, t)| InstanceConnector { source: to_path(s), target: to_path(t) })
                .collect();
            NodeKind::Composed { children, connectors }
        }
    };
    stack.pop();
    Ok(InstanceNode {
        path: path.to_string(),
        name: name.to_string(),
        definition: def.name.clone(),
        type_args: resolved.type_args,
        ports: resolved.ports,
        config: resolved.config,
        kind,
    })
}

impl InstanceModel {
    /// All nodes in depth-first pre-order.
    pub fn nodes(&self) -> Vec<&InstanceNode> {
        let mut out = Vec::new();
        self.root.visit(&mut out);
        out
    }

    pub fn atomic_nodes(&self) -> Vec<&InstanceNode> {
        self.nodes().into_iter().filter(|n| n.is_atomic()).collect()
    }

    pub fn find(&self, path: &str) -> Option<&InstanceNode> {
        self.nodes().into_iter().find(|n| n.path == path)
    }

    pub fn find_mut(&mut self, path: &str) -> Option<&mut InstanceNode> {
        self.root.find_mut(path)
    }

    /// `"<path>.<port>"` for every port of every instance, in tree order.
    pub fn port_keys(&self) -> Vec<String> {
        self.nodes()
            .into_iter()
            .flat_map(|n| n.ports.iter().map(move |p| format!("{}.{}", n.path, p.name)))
            .collect()
    }

    /// True when no type parameter survives anywhere in the tree.  Config
    /// references cannot survive by construction of the resolved form.
    pub fn is_fully_resolved(&self) -> bool {
        self.nodes().into_iter().all(|n| {
            n.type_args.iter().all(TypeExpr::is_concrete)
                && n.ports.iter().all(|p| p.ty.is_concrete())
                && n.behavior().is_none_or(|b| b.variables().iter().all(|v| v.ty.is_concrete()))
        })
    }

    /// Replaces the composed instance at `path` by its children, composing
    /// every connector chain that passed through its ports.
    pub fn inline(&mut self, path: &str) -> Result<(), ModelError> {
        let parent = self.root.parent_of_mut(path).ok_or_else(|| ModelError::NotInlinable(path.to_string()))?;
        let NodeKind::Composed { children, connectors } = &mut parent.kind else {
            return Err(ModelError::NotInlinable(path.to_string()));
        };
        let pos = children
            .iter()
            .position(|c| c.path == path)
            .ok_or_else(|| ModelError::NotInlinable(path.to_string()))?;
        if children[pos].is_atomic() {
            return Err(ModelError::NotInlinable(path.to_string()));
        }
        let removed = children.remove(pos);
        let NodeKind::Composed { children: grandchildren, connectors: inner } = removed.kind else {
            unreachable!("checked above");
        };
        for (i, gc) in grandchildren.into_iter().enumerate() {
            children.insert(pos + i, gc);
        }

        let mut all: Vec<InstanceConnector> = connectors.drain(..).chain(inner).collect();
        for port in &removed.ports {
            let through = PortPath::new(removed.path.clone(), port.name.clone());
            let (touching, rest): (Vec<_>, Vec<_>) =
                all.into_iter().partition(|c| c.source == through || c.target == through);
            all = rest;
            let drivers: Vec<&PortPath> =
                touching.iter().filter(|c| c.target == through && c.source != through).map(|c| &c.source).collect();
            for sink in touching.iter().filter(|c| c.source == through && c.target != through) {
                for d in &drivers {
                    all.push(InstanceConnector { source: (*d).clone(), target: sink.target.clone() });
                }
            }
        }
        *connectors = all;
        Ok(())
    }

    /// Inlines every composed instance below the root.
    pub fn flatten(&mut self) -> Vec<String> {
        let mut inlined = Vec::new();
        loop {
            let next = self
                .root
                .children()
                .iter()
                .find(|c| !c.is_atomic())
                .map(|c| c.path.clone());
            match next {
                Some(p) => {
                    self.inline(&p).expect("composed child of the root is inlinable");
                    inlined.push(p);
                }
                None => return inlined,
            }
        }
    }
}
