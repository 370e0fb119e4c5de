//! Parser, checker, simulator and code generators for the `.arc`
//! component & connector language.

pub mod checker;
pub mod diag;
pub mod model;
pub mod parser;
pub mod codegen;
pub mod sim;

use checker::SymbolTable;
use diag::Diagnostic;
use model::{InstanceModel, ModelError, SourceUnit};

/// A parsed and checked set of files.
#[derive(Debug, Clone)]
pub struct Checked {
    pub units: Vec<SourceUnit>,
    pub table: SymbolTable,
    /// Warnings only; a `Checked` never carries errors.
    pub warnings: Vec<Diagnostic>,
}

impl Checked {
    /// Elaborates the component named `root`.
    pub fn instantiate(&self, root: &str) -> Result<InstanceModel, ModelError> {
        let def = self.table.library.component(root).ok_or_else(|| ModelError::UnresolvedReference {
            context: "root".to_string(),
            name: root.to_string(),
        })?;
        model::elaborate(def, &self.table.library)
    }
}

/// Parses `(file name, text)` pairs and checks them as one model.  On
/// failure returns every diagnostic, errors and warnings, sorted.
pub fn load(sources: &[(&str, &str)]) -> Result<Checked, Vec<Diagnostic>> {
    let mut units = Vec::new();
    let mut diags = Vec::new();
    for (file, text) in sources {
        match parser::parse(text, file) {
            Ok(u) => units.push(u),
            Err(d) => diags.extend(d),
        }
    }
    if !diags.is_empty() {
        diag::sort_diagnostics(&mut diags);
        return Err(diags);
    }
    let (table, diags) = checker::check(&units);
    if diag::has_errors(&diags) {
        return Err(diags);
    }
    Ok(Checked { units, table, warnings: diags })
}
