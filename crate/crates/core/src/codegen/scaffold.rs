//! Static runtime files copied into generated projects.

use std::collections::BTreeMap;

use thiserror::Error;

/// A template with `{{slot}}` placeholders.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScaffoldAsset {
    pub path: &'static str,
    pub template: &'static str,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("missing scaffold slot `{0}`")]
pub struct MissingSlot(pub String);

pub const RUNTIME: ScaffoldAsset = ScaffoldAsset { path: "arc_runtime.py", template: include_str!("assets/arc_runtime.py") };
pub const MAIN: ScaffoldAsset = ScaffoldAsset { path: "main.py", template: include_str!("assets/main.py") };

impl ScaffoldAsset {
    /// Names of the slots the template uses, in order of first occurrence.
    pub fn slots(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        let mut rest = self.template;
        while let Some(start) = rest.find("{{") {
            let Some(len) = rest[start + 2..].find("}}") else { break };
            let name = &rest[start + 2..start + 2 + len];
            if !out.contains(&name) {
                out.push(name);
            }
            rest = &rest[start + 2 + len + 2..];
        }
        out
    }
}

/// Substitutes every `{{slot}}`.  Every slot the template uses must be given.
pub fn render(asset: &ScaffoldAsset, slots: &BTreeMap<&str, &str>) -> Result<String, MissingSlot> {
    let mut out = String::with_capacity(asset.template.len());
    let mut rest = asset.template;
    while let Some(start) = rest.find("{{") {
        let Some(len) = rest[start + 2..].find("}}") else { break };
        let name = &rest[start + 2..start + 2 + len];
        let value = slots.get(name).ok_or_else(|| MissingSlot(name.to_string()))?;
        out.push_str(&rest[..start]);
        out.push_str(value);
        rest = &rest[start + 2 + len + 2..];
    }
    out.push_str(rest);
    Ok(out)
}
