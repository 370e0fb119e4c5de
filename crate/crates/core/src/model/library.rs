use std::collections::BTreeMap;

use super::ast::{ComponentType, EnumDecl, SourceUnit};

/// The global namespace formed by all source units of one model.
///
/// Later duplicates of a name are ignored here; the checker reports them.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Library {
    pub enums: BTreeMap<String, EnumDecl>,
    pub components: BTreeMap<String, ComponentType>,
    /// Enumeration value name -> owning enumeration.
    pub enum_values: BTreeMap<String, String>,
}

impl Library {
    pub fn from_units<'a>(units: impl IntoIterator<Item = &'a SourceUnit>) -> Self {
        let mut lib = Library::default();
        for unit in units {
            for e in &unit.enums {
                lib.add_enum(e.clone());
            }
            for c in &unit.components {
                lib.add_component(c.clone());
            }
        }
        lib
    }

    pub fn add_enum(&mut self, e: EnumDecl) {
        if self.enums.contains_key(&e.name) || self.components.contains_key(&e.name) {
            return;
        }
        for v in &e.values {
            self.enum_values.entry(v.clone()).or_insert_with(|| e.name.clone());
        }
        self.enums.insert(e.name.clone(), e);
    }

    pub fn add_component(&mut self, c: ComponentType) {
        if self.enums.contains_key(&c.name) || self.components.contains_key(&c.name) {
            return;
        }
        self.components.insert(c.name.clone(), c);
    }

    pub fn component(&self, name: &str) -> Option<&ComponentType> {
        self.components.get(name)
    }

    /// The enumeration a value name belongs to.
    pub fn enum_of_value(&self, value: &str) -> Option<&str> {
        self.enum_values.get(value).map(String::as_str)
    }
}
