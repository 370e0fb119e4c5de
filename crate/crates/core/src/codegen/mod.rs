//! Code generation backends and the regeneration-safe writer.
//!
//! A backend turns an [`InstanceModel`] into a list of files without
//! touching the filesystem; [`emit`] writes them.  `Generated` files are
//! always rewritten, `UserStub` files only when they do not exist yet, so
//! hand-written implementations survive regeneration.  A stub still holding
//! its generated text is reported unchanged; an edited one is skipped.

mod dot;
mod reference;
pub mod scaffold;

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::model::InstanceModel;

pub use dot::DotBackend;
pub use reference::ReferenceBackend;

pub const GENERATOR_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FileKind {
    Generated,
    UserStub,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratedFile {
    /// Relative, `/`-separated.
    pub path: String,
    pub content: Vec<u8>,
    pub kind: FileKind,
}

impl GeneratedFile {
    pub fn generated(path: impl Into<String>, content: impl Into<Vec<u8>>) -> Self {
        GeneratedFile { path: path.into(), content: content.into(), kind: FileKind::Generated }
    }

    pub fn user_stub(path: impl Into<String>, content: impl Into<Vec<u8>>) -> Self {
        GeneratedFile { path: path.into(), content: content.into(), kind: FileKind::UserStub }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodegenError {
    #[error("unknown option `{0}`")]
    UnknownOption(String),
    #[error("invalid value `{value}` for option `{option}`")]
    InvalidOption { option: String, value: String },
    #[error("unsupported construct: {0}")]
    UnsupportedConstruct(String),
    #[error(transparent)]
    Scaffold(#[from] scaffold::MissingSlot),
}

pub type Options = BTreeMap<String, String>;

pub trait Backend {
    fn name(&self) -> &'static str;
    /// Pure and deterministic: equal models and options give equal files.
    fn generate(&self, model: &InstanceModel, options: &Options) -> Result<Vec<GeneratedFile>, CodegenError>;
}

/// Looks up a backend by its command-line name.
pub fn backend(name: &str) -> Option<Box<dyn Backend>> {
    match name {
        "reference" => Some(Box::new(ReferenceBackend)),
        "dot" => Some(Box::new(DotBackend)),
        _ => None,
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct WriteReport {
    pub written: Vec<String>,
    /// Existing user stubs with edits, left as they are.
    pub skipped: Vec<String>,
    /// Files whose content on disk was already identical.
    pub unchanged: Vec<String>,
    pub errors: Vec<(String, String)>,
}

impl WriteReport {
    pub fn is_ok(&self) -> bool {
        self.errors.is_empty()
    }
}

/// Writes `files` below `out_dir`, creating directories as needed.  I/O
/// failures are collected per path; the remaining files are still written.
pub fn emit(files: &[GeneratedFile], out_dir: &Path) -> WriteReport {
    let mut report = WriteReport::default();
    for f in files {
        let target = out_dir.join(&f.path);
        let existing = fs::read(&target).ok();
        match (f.kind, &existing) {
            (_, Some(old)) if *old == f.content => {
                report.unchanged.push(f.path.clone());
                continue;
            }
            (FileKind::UserStub, Some(_)) => {
                report.skipped.push(f.path.clone());
                continue;
            }
            _ => {}
        }
        let result = target
            .parent()
            .map_or(Ok(()), fs::create_dir_all)
            .and_then(|_| fs::write(&target, &f.content));
        match result {
            Ok(()) => report.written.push(f.path.clone()),
            Err(e) => report.errors.push((f.path.clone(), e.to_string())),
        }
    }
    report
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Content hash of an elaborated model.
pub fn model_hash(model: &InstanceModel) -> String {
    sha256_hex(&serde_json::to_vec(model).expect("model serializes"))
}

#[derive(Serialize)]
struct ManifestEntry<'a> {
    path: &'a str,
    kind: FileKind,
    sha256: String,
}

#[derive(Serialize)]
struct Manifest<'a> {
    generator: String,
    generator_version: &'a str,
    model: &'a str,
    model_hash: String,
    files: Vec<ManifestEntry<'a>>,
}

/// `arc-manifest.json` listing `files` with their hashes.  User stubs are
/// hashed as first generated.
pub fn manifest(backend: &str, model: &InstanceModel, files: &[GeneratedFile]) -> GeneratedFile {
    let m = Manifest {
        generator: format!("arc-{backend} {GENERATOR_VERSION}"),
        generator_version: GENERATOR_VERSION,
        model: &model.root.definition,
        model_hash: model_hash(model),
        files: files
            .iter()
            .map(|f| ManifestEntry { path: &f.path, kind: f.kind, sha256: sha256_hex(&f.content) })
            .collect(),
    };
    let mut text = serde_json::to_string_pretty(&m).expect("manifest serializes");
    text.push('\n');
    GeneratedFile::generated("arc-manifest.json", text)
}

#[cfg(test)]
mod tests;
