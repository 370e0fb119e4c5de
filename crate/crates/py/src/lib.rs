//! Python bindings: `import arc_py`.
//!
//! Traces cross the boundary as lists of `{"tick": n, "ports": {...}}`
//! dicts, the same rows the JSONL files hold.

use std::collections::BTreeMap;
use std::path::PathBuf;

use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList, PyString};

use arc_core::codegen;
use arc_core::diag;
use arc_core::model::InstanceModel;
use arc_core::sim::{self, Trace};

create_exception!(arc_py, ArcError, PyException);
create_exception!(arc_py, ModelError, ArcError, "Parse or check errors; `args[1]` lists the diagnostics.");
create_exception!(arc_py, InputError, ArcError, "A malformed or ill-typed trace.");
create_exception!(arc_py, SimulationError, ArcError);
create_exception!(arc_py, GenerateError, ArcError);

#[pyclass(frozen, get_all, module = "arc_py")]
struct Diagnostic {
    severity: String,
    code: String,
    message: String,
    file: String,
    line: u32,
    column: u32,
}

#[pymethods]
impl Diagnostic {
    fn __repr__(&self) -> String {
        format!("{}:{}:{}: {}[{}]: {}", self.file, self.line, self.column, self.severity, self.code, self.message)
    }
}

impl From<&diag::Diagnostic> for Diagnostic {
    fn from(d: &diag::Diagnostic) -> Self {
        Diagnostic {
            severity: d.severity.to_string(),
            code: d.code.clone(),
            message: d.message.clone(),
            file: d.file.clone(),
            line: d.line,
            column: d.column,
        }
    }
}

fn model_error(py: Python<'_>, diags: &[diag::Diagnostic]) -> PyErr {
    let summary = diags.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("\n");
    let list: Vec<Diagnostic> = diags.iter().map(Diagnostic::from).collect();
    match list.into_pyobject(py) {
        Ok(objs) => ModelError::new_err((summary, objs.unbind())),
        Err(e) => e,
    }
}

fn as_refs(sources: &[(String, String)]) -> Vec<(&str, &str)> {
    sources.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect()
}

/// Canonical text of one source file.
#[pyfunction]
#[pyo3(signature = (text, origin = "<string>"))]
fn format_source(py: Python<'_>, text: &str, origin: &str) -> PyResult<String> {
    arc_core::parser::parse(text, origin)
        .map(|u| arc_core::parser::pretty(&u))
        .map_err(|d| model_error(py, &d))
}

/// All diagnostics for a set of `(file name, text)` pairs, sorted.
#[pyfunction]
fn check(sources: Vec<(String, String)>) -> Vec<Diagnostic> {
    let diags = match arc_core::load(&as_refs(&sources)) {
        Ok(c) => c.warnings,
        Err(d) => d,
    };
    diags.iter().map(Diagnostic::from).collect()
}

/// An elaborated model rooted at one component.
#[pyclass(frozen, module = "arc_py")]
struct Model {
    inner: InstanceModel,
    warnings: Vec<diag::Diagnostic>,
}

/// Accepts either JSONL text or a list of row dicts.
fn trace_text(py: Python<'_>, rows: &Bound<'_, PyAny>) -> PyResult<String> {
    if let Ok(s) = rows.cast::<PyString>() {
        return Ok(s.to_str()?.to_owned());
    }
    let json = py.import("json")?;
    let mut text = String::new();
    for row in rows.try_iter()? {
        let line: String = json.call_method1("dumps", (row?,))?.extract()?;
        text.push_str(&line);
        text.push('\n');
    }
    Ok(text)
}

impl Model {
    fn parse_trace(&self, py: Python<'_>, rows: Option<&Bound<'_, PyAny>>, types: BTreeMap<String, arc_core::model::TypeExpr>) -> PyResult<Trace> {
        match rows {
            None => Ok(Trace::new()),
            Some(r) => Trace::from_jsonl(&trace_text(py, r)?, &types, &self.inner.enums).map_err(|e| InputError::new_err(e.to_string())),
        }
    }
}

#[pymethods]
impl Model {
    #[staticmethod]
    fn load(py: Python<'_>, sources: Vec<(String, String)>, root: &str) -> PyResult<Model> {
        let checked = arc_core::load(&as_refs(&sources)).map_err(|d| model_error(py, &d))?;
        let inner = checked.instantiate(root).map_err(|e| ModelError::new_err((e.to_string(), Vec::<Diagnostic>::new())))?;
        Ok(Model { inner, warnings: checked.warnings })
    }

    #[staticmethod]
    fn from_files(py: Python<'_>, paths: Vec<PathBuf>, root: &str) -> PyResult<Model> {
        let mut sources = Vec::with_capacity(paths.len());
        for p in paths {
            let text = std::fs::read_to_string(&p).map_err(|e| InputError::new_err(format!("{}: {e}", p.display())))?;
            sources.push((p.display().to_string(), text));
        }
        Model::load(py, sources, root)
    }

    #[getter]
    fn root(&self) -> &str {
        &self.inner.root.path
    }

    #[getter]
    fn warnings(&self) -> Vec<Diagnostic> {
        self.warnings.iter().map(Diagnostic::from).collect()
    }

    fn port_keys(&self) -> Vec<String> {
        self.inner.port_keys()
    }

    fn native_instances(&self) -> Vec<String> {
        sim::native_paths(&self.inner)
    }

    /// Runs for `ticks` ticks and returns the trace as row dicts.
    #[pyo3(signature = (ticks, inputs = None, stubs = None))]
    fn simulate<'py>(
        &self,
        py: Python<'py>,
        ticks: usize,
        inputs: Option<&Bound<'py, PyAny>>,
        stubs: Option<&Bound<'py, PyAny>>,
    ) -> PyResult<Bound<'py, PyList>> {
        let env = self.parse_trace(py, inputs, sim::input_types(&self.inner))?;
        let stub_trace = self.parse_trace(py, stubs, sim::native_output_types(&self.inner))?;
        let bindings = sim::stub_bindings(&self.inner, &stub_trace).map_err(InputError::new_err)?;
        let trace = sim::run(&self.inner, bindings, &env, ticks).map_err(|e| SimulationError::new_err(e.to_string()))?;
        let json = py.import("json")?;
        let rows = PyList::empty(py);
        for line in trace.to_jsonl().lines() {
            rows.append(json.call_method1("loads", (line,))?)?;
        }
        Ok(rows)
    }

    /// Writes a backend's output below `out_dir`; returns the write report.
    #[pyo3(signature = (out_dir, backend = "reference", options = None))]
    fn generate<'py>(
        &self,
        py: Python<'py>,
        out_dir: PathBuf,
        backend: &str,
        options: Option<BTreeMap<String, String>>,
    ) -> PyResult<Bound<'py, PyDict>> {
        let b = codegen::backend(backend).ok_or_else(|| GenerateError::new_err(format!("unknown backend `{backend}`")))?;
        let files = b
            .generate(&self.inner, &options.unwrap_or_default())
            .map_err(|e| GenerateError::new_err(e.to_string()))?;
        let report = codegen::emit(&files, &out_dir);
        if !report.is_ok() {
            let msg = report.errors.iter().map(|(p, e)| format!("{p}: {e}")).collect::<Vec<_>>().join("; ");
            return Err(GenerateError::new_err(msg));
        }
        let d = PyDict::new(py);
        d.set_item("written", report.written)?;
        d.set_item("skipped", report.skipped)?;
        d.set_item("unchanged", report.unchanged)?;
        Ok(d)
    }

    fn dot(&self) -> PyResult<String> {
        use codegen::Backend;
        let files = codegen::DotBackend
            .generate(&self.inner, &codegen::Options::new())
            .map_err(|e| GenerateError::new_err(e.to_string()))?;
        Ok(String::from_utf8_lossy(&files[0].content).into_owned())
    }

    fn __repr__(&self) -> String {
        format!("Model({:?}, {} ports)", self.inner.root.definition, self.inner.port_keys().len())
    }
}

#[pymodule]
fn arc_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    let py = m.py();
    m.add("__version__", codegen::GENERATOR_VERSION)?;
    m.add("ArcError", py.get_type::<ArcError>())?;
    m.add("ModelError", py.get_type::<ModelError>())?;
    m.add("InputError", py.get_type::<InputError>())?;
    m.add("SimulationError", py.get_type::<SimulationError>())?;
    m.add("GenerateError", py.get_type::<GenerateError>())?;
    m.add_class::<Diagnostic>()?;
    m.add_class::<Model>()?;
    m.add_function(wrap_pyfunction!(format_source, m)?)?;
    m.add_function(wrap_pyfunction!(check, m)?)?;
    Ok(())
}
