//! Python bindings for `lgtables`.

use std::path::PathBuf;

use lgtables::formula::{ast_summary, parse_label as parse, PropertyLabel};
use lgtables::lexicon::{self, ExportFormat, LexiconRecord};
use lgtables::normalizer::{apply_script_with, ApplyMode, Script};
use lgtables::tableset::{self, LoadError};
use pyo3::create_exception;
use pyo3::exceptions::{PyKeyError, PyOSError, PyValueError};
use pyo3::prelude::*;

create_exception!(lgtables, LgtError, PyValueError, "Malformed label, table or definition.");
create_exception!(lgtables, ScriptError, LgtError, "A script step failed. args are (message, step, line).");

fn load_err(e: LoadError) -> PyErr {
    match e {
        LoadError::Io { .. } => PyOSError::new_err(e.to_string()),
        _ => LgtError::new_err(e.to_string()),
    }
}

fn lookup_err(e: impl ToString) -> PyErr {
    PyKeyError::new_err(e.to_string())
}

/// A parsed property label.
#[pyclass(name = "Label", frozen, eq, hash, ord, str, skip_from_py_object)]
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct PyLabel {
    inner: PropertyLabel,
}

impl std::fmt::Display for PyLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.inner.canonical())
    }
}

fn parse_inner(text: &str) -> PyResult<PropertyLabel> {
    parse(text).map_err(|e| LgtError::new_err(e.to_string()))
}

#[pymethods]
impl PyLabel {
    #[new]
    fn new(text: &str) -> PyResult<Self> {
        Ok(PyLabel { inner: parse_inner(text)? })
    }

    #[getter]
    fn canonical(&self) -> &str {
        self.inner.canonical()
    }

    #[getter]
    fn raw(&self) -> &str {
        self.inner.raw_text()
    }

    /// construction, constraint, equivalence or feature.
    #[getter]
    fn kind(&self) -> &'static str {
        self.inner.body().kind_name()
    }

    #[getter]
    fn summary(&self) -> String {
        ast_summary(&self.inner)
    }

    /// Every alternation-free reading, in canonical form.
    fn expansions(&self) -> Vec<String> {
        self.inner.expanded().iter().map(|l| l.canonical().to_string()).collect()
    }

    fn __repr__(&self) -> String {
        format!("Label({:?})", self.inner.canonical())
    }
}

#[pyfunction]
fn parse_label(text: &str) -> PyResult<PyLabel> {
    PyLabel::new(text)
}

fn strings<'a>(labels: impl IntoIterator<Item = &'a PropertyLabel>) -> Vec<String> {
    labels.into_iter().map(|l| l.canonical().to_string()).collect()
}

/// One entry of one class with its properties sorted by coding.
#[pyclass(name = "Record", frozen, get_all)]
struct PyRecord {
    class_id: String,
    lemma: String,
    category: String,
    accepted: Vec<String>,
    rejected: Vec<String>,
    uncoded: Vec<String>,
    links: Vec<String>,
}

impl From<&LexiconRecord> for PyRecord {
    fn from(r: &LexiconRecord) -> Self {
        PyRecord {
            class_id: r.class_id.clone(),
            lemma: r.lemma.clone(),
            category: r.category.as_str().to_string(),
            accepted: strings(&r.accepted),
            rejected: strings(&r.rejected),
            uncoded: strings(&r.uncoded),
            links: r.links.iter().map(|l| l.to_string()).collect(),
        }
    }
}

#[pymethods]
impl PyRecord {
    fn __repr__(&self) -> String {
        format!("Record({}:{}, {} accepted)", self.class_id, self.lemma, self.accepted.len())
    }
}

/// Tables plus class definitions and paraphrase links.
#[pyclass(name = "TableSet", frozen)]
struct PyTableSet {
    inner: tableset::TableSet,
}

#[pymethods]
impl PyTableSet {
    #[staticmethod]
    fn load(py: Python<'_>, tables: PathBuf, definitions: PathBuf) -> PyResult<Self> {
        let inner = py.detach(|| tableset::load_tableset(&tables, &definitions)).map_err(load_err)?;
        Ok(PyTableSet { inner })
    }

    /// Write `tables/` and `definitions.txt` under `out`.
    fn save(&self, py: Python<'_>, out: PathBuf) -> PyResult<()> {
        py.detach(|| tableset::save_tableset(&self.inner, &out)).map_err(load_err)
    }

    fn class_ids(&self) -> Vec<String> {
        self.inner.class_ids().cloned().collect()
    }

    fn entry_count(&self) -> usize {
        self.inner.entry_count()
    }

    fn lemmas(&self, class_id: &str) -> PyResult<Vec<String>> {
        let t = self.inner.table(class_id).map_err(lookup_err)?;
        Ok(t.entries.iter().map(|e| e.lemma.clone()).collect())
    }

    fn columns(&self, class_id: &str) -> PyResult<Vec<String>> {
        Ok(strings(&self.inner.table(class_id).map_err(lookup_err)?.columns))
    }

    fn definitional(&self, class_id: &str) -> PyResult<Vec<String>> {
        Ok(strings(&self.inner.definition(class_id).map_err(lookup_err)?.definitional))
    }

    /// `+`, `-` or `~` for a column, `+` for a definitional property.
    fn coding(&self, class_id: &str, lemma: &str, label: &str) -> PyResult<String> {
        let label = parse_inner(label)?;
        let c = self.inner.coding_of(class_id, lemma, &label).map_err(lookup_err)?;
        Ok(c.as_char().to_string())
    }

    /// Run script text over a copy. Returns the new set and the report as JSON lines.
    #[pyo3(signature = (script, resume = false))]
    fn apply_script(&self, py: Python<'_>, script: &str, resume: bool) -> PyResult<(PyTableSet, String)> {
        let mode = if resume { ApplyMode::Resume } else { ApplyMode::Strict };
        let result = py.detach(|| Script::parse(script).and_then(|s| apply_script_with(&self.inner, &s, mode)));
        match result {
            Ok((inner, report)) => Ok((PyTableSet { inner }, report.to_jsonl())),
            Err(e) => Err(ScriptError::new_err((e.to_string(), e.step, e.line))),
        }
    }

    fn records(&self, py: Python<'_>) -> Vec<PyRecord> {
        py.detach(|| lexicon::flatten(&self.inner)).iter().map(PyRecord::from).collect()
    }

    /// Licensing issues as (severity, entry, label, symbol) tuples.
    fn validate(&self, py: Python<'_>) -> Vec<(String, String, String, String)> {
        let issues = py.detach(|| lexicon::validate_licensing(&lexicon::flatten(&self.inner)));
        issues
            .iter()
            .map(|i| (i.severity.to_string(), i.record.to_string(), i.label.to_string(), i.symbol.bare().to_string()))
            .collect()
    }

    /// The lexicon rendered as `text` or `structured`.
    #[pyo3(signature = (format = "structured"))]
    fn export(&self, py: Python<'_>, format: &str) -> PyResult<String> {
        let format = match format {
            "text" => ExportFormat::Text,
            "structured" => ExportFormat::Structured,
            other => return Err(PyValueError::new_err(format!("unknown format {other:?}"))),
        };
        Ok(py.detach(|| lexicon::render(&lexicon::flatten(&self.inner), format)))
    }

    /// Per-class statistics, tab-separated.
    fn stats(&self, py: Python<'_>) -> String {
        py.detach(|| lgtables::cli::render_stats(&self.inner))
    }

    fn __len__(&self) -> usize {
        self.inner.tables.len()
    }

    fn __repr__(&self) -> String {
        format!("TableSet({} classes, {} entries)", self.inner.tables.len(), self.inner.entry_count())
    }
}

/// Read a structured lexicon back into records.
#[pyfunction]
fn read_structured(text: &str) -> PyResult<Vec<PyRecord>> {
    let records = lexicon::read_structured(text).map_err(LgtError::new_err)?;
    Ok(records.iter().map(PyRecord::from).collect())
}

#[pymodule(name = "lgtables")]
fn lgtables_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyLabel>()?;
    m.add_class::<PyRecord>()?;
    m.add_class::<PyTableSet>()?;
    m.add_function(wrap_pyfunction!(parse_label, m)?)?;
    m.add_function(wrap_pyfunction!(read_structured, m)?)?;
    m.add("LgtError", m.py().get_type::<LgtError>())?;
    m.add("ScriptError", m.py().get_type::<ScriptError>())?;
    Ok(())
}
