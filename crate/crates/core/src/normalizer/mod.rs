//! Logged, replayable rewrites of a table set.
//!
//! Every operation is a pure `TableSet -> TableSet` function returning the
//! step it performed. A step carries the script line that reproduces it, so a
//! report can be replayed over the original input.

mod script;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::formula::{Feature, LabelBody, PropertyLabel, Role, SlotSymbol};
use crate::lexicon::link_paraphrases;
use crate::splitter::{split_class, SplitError, SplitSpec};
use crate::tableset::{
    ClassDefinition, Coding, DefinitionError, EntryRef, LookupError, ParaphraseLink, Table, TableSet,
};

pub use script::{
    apply_script, apply_script_with, ApplyMode, Command, Script, ScriptError, ScriptErrorKind, ScriptStep,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StepKind {
    SplitConjoinedDefinition,
    ExpandDefinitionalAlternation,
    PromoteConstantColumn,
    DemoteDefinitionalToColumn,
    DuplicateColumnCoding,
    RenameColumn,
    DeriveComplementColumn,
    AddDefinitional,
    AddClass,
    LinkParaphrase,
    SplitClass,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransformationStep {
    pub kind: StepKind,
    #[serde(rename = "classId")]
    pub class_id: String,
    pub before: Vec<String>,
    pub after: Vec<String>,
    pub details: String,
    /// Script line that performs this step.
    pub command: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TransformationReport {
    pub steps: Vec<TransformationStep>,
}

impl TransformationReport {
    /// One JSON object per line.
    pub fn to_jsonl(&self) -> String {
        self.steps
            .iter()
            .map(|s| serde_json::to_string(s).expect("plain data serializes") + "\n")
            .collect()
    }

    pub fn from_jsonl(text: &str) -> Result<Self, serde_json::Error> {
        let steps = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(serde_json::from_str)
            .collect::<Result<_, _>>()?;
        Ok(TransformationReport { steps })
    }

    /// The script these steps came from.
    pub fn to_script(&self) -> String {
        self.steps.iter().map(|s| format!("{}\n", s.command)).collect()
    }

    /// Re-run every step over `original`.
    pub fn replay(&self, original: &TableSet) -> Result<TableSet, ScriptError> {
        let script = Script::parse(&self.to_script())?;
        apply_script_with(original, &script, ApplyMode::Strict).map(|(ts, _)| ts)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NormalizeError {
    #[error("unknown class {0}")]
    UnknownClass(String),
    #[error("class {0} already exists")]
    DuplicateClass(String),
    #[error("class {class}: `{label}` is not definitional")]
    NotDefinitional { class: String, label: String },
    #[error("class {class}: invalid decomposition: {reason}")]
    InvalidDecomposition { class: String, reason: String },
    #[error("class {class}: `{label}` has no alternation to expand")]
    NothingToExpand { class: String, label: String },
    #[error("class {class}: `{label}` is not + for: {}", .lemmas.join(", "))]
    NotConstant {
        class: String,
        label: String,
        lemmas: Vec<String>,
    },
    #[error("class {class}: refusing to promote in a table without entries")]
    EmptyTable { class: String },
    #[error("class {class}: no coding given for: {}", .missing.join(", "))]
    IncompleteCodings { class: String, missing: Vec<String> },
    #[error("class {class}: no entry `{lemma}`")]
    UnknownEntry { class: String, lemma: String },
    #[error("class {class}: no column `{label}`")]
    UnknownColumn { class: String, label: String },
    #[error("class {class}: `{label}` is already present")]
    DuplicateLabel { class: String, label: String },
    #[error(transparent)]
    Lookup(#[from] LookupError),
    #[error(transparent)]
    Split(#[from] SplitError),
    #[error(transparent)]
    Definition(#[from] DefinitionError),
}

impl NormalizeError {
    /// Refusals the resumable driver treats as "already done".
    pub fn is_skippable(&self) -> bool {
        matches!(self, NormalizeError::NothingToExpand { .. } | NormalizeError::NotConstant { .. })
    }
}

type OpResult<T> = std::result::Result<T, NormalizeError>;

fn strings<'a>(labels: impl IntoIterator<Item = &'a PropertyLabel>) -> Vec<String> {
    labels.into_iter().map(|l| l.canonical().to_string()).collect()
}

fn step(kind: StepKind, class: &str, before: Vec<String>, after: Vec<String>, details: impl Into<String>) -> TransformationStep {
    TransformationStep {
        kind,
        class_id: class.to_string(),
        before,
        after,
        details: details.into(),
        command: String::new(),
    }
}

struct Class<'a> {
    id: &'a str,
    table: &'a mut Table,
    def: &'a mut ClassDefinition,
}

impl<'a> Class<'a> {
    fn get(ts: &'a mut TableSet, id: &'a str) -> OpResult<Self> {
        let table = ts
            .tables
            .get_mut(id)
            .ok_or_else(|| NormalizeError::UnknownClass(id.to_string()))?;
        let def = ts
            .definitions
            .get_mut(id)
            .ok_or_else(|| NormalizeError::UnknownClass(id.to_string()))?;
        Ok(Class { id, table, def })
    }

    fn def_index(&self, label: &PropertyLabel) -> OpResult<usize> {
        self.def
            .definitional
            .iter()
            .position(|d| d == label)
            .ok_or_else(|| NormalizeError::NotDefinitional {
                class: self.id.to_string(),
                label: label.canonical().to_string(),
            })
    }

    fn column(&self, label: &PropertyLabel) -> OpResult<usize> {
        self.table.column_index(label).ok_or_else(|| NormalizeError::UnknownColumn {
            class: self.id.to_string(),
            label: label.canonical().to_string(),
        })
    }

    fn has(&self, label: &PropertyLabel) -> bool {
        self.def.is_definitional(label) || self.table.column_index(label).is_some()
    }

    fn ensure_fresh(&self, label: &PropertyLabel) -> OpResult<()> {
        if self.has(label) {
            return Err(NormalizeError::DuplicateLabel {
                class: self.id.to_string(),
                label: label.canonical().to_string(),
            });
        }
        Ok(())
    }
}

/// The labels a conjoined construction decomposes into: the construction
/// without its feature annotations, then one feature per annotated slot.
pub fn conjoined_parts(target: &PropertyLabel) -> Option<Vec<PropertyLabel>> {
    let c = target.as_construction()?;
    let mut features = Vec::new();
    let base = c.map_symbols(|s| match s.role.and_then(Role::feature_tag) {
        Some(tag) => {
            let subject = SlotSymbol { role: None, ..s.clone() };
            features.push(PropertyLabel::from_body(LabelBody::Feature(Feature {
                subject: subject.clone(),
                tag,
            })));
            subject
        }
        None => s.clone(),
    });
    let mut out = vec![PropertyLabel::from_construction(base)];
    out.extend(features);
    Some(out)
}

pub(crate) fn do_split(ts: &mut TableSet, class: &str, target: &PropertyLabel, parts: &[PropertyLabel]) -> OpResult<TransformationStep> {
    let c = Class::get(ts, class)?;
    let at = c.def_index(target)?;
    let invalid = |reason: String| NormalizeError::InvalidDecomposition {
        class: class.to_string(),
        reason,
    };
    if parts.len() < 2 {
        return Err(invalid(format!("{} part(s); at least two are needed", parts.len())));
    }
    let derived: BTreeSet<_> = conjoined_parts(target)
        .ok_or_else(|| invalid(format!("`{target}` is not a construction")))?
        .into_iter()
        .collect();
    let given: BTreeSet<_> = parts.iter().cloned().collect();
    if given.len() != parts.len() {
        return Err(invalid("a part is listed twice".into()));
    }
    if given != derived {
        return Err(invalid(format!(
            "`{target}` decomposes into {}",
            strings(&derived).join(" ; ")
        )));
    }
    c.def.definitional.remove(at);
    for p in parts {
        c.ensure_fresh(p)?;
        c.def.definitional.push(p.clone());
    }
    Ok(step(
        StepKind::SplitConjoinedDefinition,
        class,
        vec![target.canonical().to_string()],
        strings(parts),
        "",
    ))
}

pub(crate) fn do_expand(
    ts: &mut TableSet,
    class: &str,
    target: &PropertyLabel,
    replace_with: Option<&[PropertyLabel]>,
) -> OpResult<TransformationStep> {
    let c = Class::get(ts, class)?;
    let at = c.def_index(target)?;
    let has_alternation = target.as_construction().is_some_and(|x| !x.is_plain());
    if !has_alternation {
        return Err(NormalizeError::NothingToExpand {
            class: class.to_string(),
            label: target.canonical().to_string(),
        });
    }
    let (results, details) = match replace_with {
        Some(r) if !r.is_empty() => (r.to_vec(), "replace_with override"),
        Some(_) => {
            return Err(NormalizeError::InvalidDecomposition {
                class: class.to_string(),
                reason: "empty replacement".into(),
            })
        }
        None => (target.expanded(), "alternation expansion"),
    };
    c.def.definitional.remove(at);
    let mut added = Vec::new();
    for r in &results {
        if c.def.is_definitional(r) {
            continue;
        }
        c.ensure_fresh(r)?;
        added.push(r.clone());
    }
    let dropped = results.len() - added.len();
    for (i, r) in added.into_iter().enumerate() {
        c.def.definitional.insert(at + i, r);
    }
    let details = if dropped > 0 {
        format!("{details}; {dropped} already definitional")
    } else {
        details.to_string()
    };
    Ok(step(
        StepKind::ExpandDefinitionalAlternation,
        class,
        vec![target.canonical().to_string()],
        strings(&results),
        details,
    ))
}

pub(crate) fn do_promote(ts: &mut TableSet, class: &str, column: &PropertyLabel) -> OpResult<TransformationStep> {
    let c = Class::get(ts, class)?;
    let idx = c.column(column)?;
    if c.table.entries.is_empty() {
        return Err(NormalizeError::EmptyTable { class: class.to_string() });
    }
    let offending: Vec<String> = c
        .table
        .entries
        .iter()
        .filter(|e| e.codings[idx] != Coding::Plus)
        .map(|e| e.key())
        .collect();
    if !offending.is_empty() {
        return Err(NormalizeError::NotConstant {
            class: class.to_string(),
            label: column.canonical().to_string(),
            lemmas: offending,
        });
    }
    let n = c.table.entries.len();
    let label = c.table.remove_column(idx);
    c.def.definitional.push(label);
    let s = column.canonical().to_string();
    Ok(step(
        StepKind::PromoteConstantColumn,
        class,
        vec![s.clone()],
        vec![s],
        format!("+ for all {n} entries"),
    ))
}

pub(crate) fn do_demote(
    ts: &mut TableSet,
    class: &str,
    target: &PropertyLabel,
    codings: &BTreeMap<String, Coding>,
) -> OpResult<TransformationStep> {
    let c = Class::get(ts, class)?;
    let at = c.def_index(target)?;
    let keys: BTreeSet<String> = c.table.entries.iter().map(|e| e.key()).collect();
    if let Some(extra) = codings.keys().find(|k| !keys.contains(*k)) {
        return Err(NormalizeError::UnknownEntry {
            class: class.to_string(),
            lemma: extra.clone(),
        });
    }
    let missing: Vec<String> = keys.iter().filter(|k| !codings.contains_key(*k)).cloned().collect();
    if !missing.is_empty() {
        return Err(NormalizeError::IncompleteCodings {
            class: class.to_string(),
            missing,
        });
    }
    let label = c.def.definitional.remove(at);
    c.table.push_column(label, |e| codings[&e.key()]);
    let summary: Vec<String> = c
        .table
        .entries
        .iter()
        .map(|e| format!("{}={}", e.key(), codings[&e.key()]))
        .collect();
    let s = target.canonical().to_string();
    Ok(step(
        StepKind::DemoteDefinitionalToColumn,
        class,
        vec![s.clone()],
        vec![s],
        summary.join(", "),
    ))
}

pub(crate) fn do_duplicate(ts: &mut TableSet, class: &str, source: &PropertyLabel, new: &PropertyLabel) -> OpResult<TransformationStep> {
    let c = Class::get(ts, class)?;
    let idx = c.column(source)?;
    c.ensure_fresh(new)?;
    c.table.push_column(new.clone(), |e| e.codings[idx]);
    Ok(step(
        StepKind::DuplicateColumnCoding,
        class,
        vec![source.canonical().to_string()],
        vec![new.canonical().to_string()],
        format!("copied {} codings", c.table.entries.len()),
    ))
}

pub(crate) fn do_rename(ts: &mut TableSet, class: &str, old: &PropertyLabel, new: &PropertyLabel) -> OpResult<TransformationStep> {
    let c = Class::get(ts, class)?;
    let before = vec![old.canonical().to_string()];
    let after = vec![new.canonical().to_string()];
    let is_def = c.def.is_definitional(old);
    if !is_def {
        c.column(old)?;
    }
    if old == new {
        return Ok(step(StepKind::RenameColumn, class, before, after, "no-op"));
    }
    c.ensure_fresh(new)?;
    let details = if is_def {
        let at = c.def_index(old)?;
        c.def.definitional[at] = new.clone();
        "definitional"
    } else {
        let idx = c.column(old)?;
        c.table.columns[idx] = new.clone();
        "column"
    };
    Ok(step(StepKind::RenameColumn, class, before, after, details))
}

/// Fill the uncoded cells of `target` with the codings of `source`.
pub(crate) fn do_derive(ts: &mut TableSet, class: &str, source: &PropertyLabel, target: &PropertyLabel) -> OpResult<TransformationStep> {
    let c = Class::get(ts, class)?;
    let s = c.column(source)?;
    let t = c.column(target)?;
    let mut filled = 0;
    for e in &mut c.table.entries {
        if e.codings[t] == Coding::Uncoded && e.codings[s] != Coding::Uncoded {
            e.codings[t] = e.codings[s];
            filled += 1;
        }
    }
    Ok(step(
        StepKind::DeriveComplementColumn,
        class,
        vec![source.canonical().to_string()],
        vec![target.canonical().to_string()],
        format!("filled {filled} uncoded cells"),
    ))
}

pub(crate) fn do_add_definitional(ts: &mut TableSet, class: &str, label: &PropertyLabel) -> OpResult<TransformationStep> {
    let c = Class::get(ts, class)?;
    c.ensure_fresh(label)?;
    c.def.definitional.push(label.clone());
    Ok(step(
        StepKind::AddDefinitional,
        class,
        Vec::new(),
        vec![label.canonical().to_string()],
        "asserted",
    ))
}

pub(crate) fn do_add_class(ts: &mut TableSet, def: &ClassDefinition, table: &Table) -> OpResult<TransformationStep> {
    let id = &def.class_id;
    if ts.tables.contains_key(id) || ts.definitions.contains_key(id) {
        return Err(NormalizeError::DuplicateClass(id.clone()));
    }
    if table.class_id != *id || table.category != def.category {
        return Err(DefinitionError::CategoryMismatch {
            class: id.clone(),
            table: table.category,
            definition: def.category,
        }
        .into());
    }
    ts.tables.insert(id.clone(), table.clone());
    ts.definitions.insert(id.clone(), def.clone());
    Ok(step(
        StepKind::AddClass,
        id,
        Vec::new(),
        strings(&def.definitional),
        format!("{} entries", table.entries.len()),
    ))
}

pub(crate) fn do_link(ts: &mut TableSet, a: &EntryRef, b: &EntryRef) -> OpResult<TransformationStep> {
    *ts = link_paraphrases(ts, &[(a.clone(), b.clone())])?;
    let details = if a == b { format!("{a} (self-link)") } else { format!("{a} <-> {b}") };
    Ok(step(StepKind::LinkParaphrase, &a.class_id, Vec::new(), Vec::new(), details))
}

pub(crate) fn do_split_loc(ts: &mut TableSet, spec: &SplitSpec) -> OpResult<TransformationStep> {
    let (out, report) = split_class(ts, spec)?;
    *ts = out;
    let before = strings([&spec.source_column, &spec.dest_column, &spec.dependent_column]);
    let after = report.received.keys().cloned().collect();
    Ok(step(StepKind::SplitClass, &spec.source_class, before, after, report.summary()))
}

fn run(ts: &TableSet, cmd: Command) -> OpResult<(TableSet, TransformationStep)> {
    let mut out = ts.clone();
    let step = cmd.apply(&mut out)?;
    Ok((out, step))
}

pub fn split_conjoined_definition(
    ts: &TableSet,
    class: &str,
    target: &PropertyLabel,
    parts: &[PropertyLabel],
) -> OpResult<(TableSet, TransformationStep)> {
    run(ts, Command::Split {
        class: class.into(),
        target: target.clone(),
        parts: parts.to_vec(),
    })
}

/// Replace a definitional construction by its plain variants, or by
/// `replace_with` when given.
pub fn expand_definitional_alternation(
    ts: &TableSet,
    class: &str,
    target: &PropertyLabel,
    replace_with: Option<&[PropertyLabel]>,
) -> OpResult<(TableSet, TransformationStep)> {
    run(ts, Command::Expand {
        class: class.into(),
        target: target.clone(),
        replace_with: replace_with.map(<[_]>::to_vec),
    })
}

pub fn promote_constant_column(ts: &TableSet, class: &str, column: &PropertyLabel) -> OpResult<(TableSet, TransformationStep)> {
    run(ts, Command::Promote {
        class: class.into(),
        column: column.clone(),
    })
}

/// `codings` is keyed by entry key (lemma plus `#usage`).
pub fn demote_definitional_to_column(
    ts: &TableSet,
    class: &str,
    target: &PropertyLabel,
    codings: &BTreeMap<String, Coding>,
) -> OpResult<(TableSet, TransformationStep)> {
    run(ts, Command::Demote {
        class: class.into(),
        target: target.clone(),
        codings: codings.clone(),
    })
}

pub fn duplicate_column_coding(
    ts: &TableSet,
    class: &str,
    source: &PropertyLabel,
    new: &PropertyLabel,
) -> OpResult<(TableSet, TransformationStep)> {
    run(ts, Command::Dup {
        class: class.into(),
        source: source.clone(),
        new: new.clone(),
    })
}

/// Rename a column, or a definitional property.
pub fn rename_column(ts: &TableSet, class: &str, old: &PropertyLabel, new: &PropertyLabel) -> OpResult<(TableSet, TransformationStep)> {
    run(ts, Command::Rename {
        class: class.into(),
        old: old.clone(),
        new: new.clone(),
    })
}

pub fn derive_complement_column(
    ts: &TableSet,
    class: &str,
    source: &PropertyLabel,
    target: &PropertyLabel,
) -> OpResult<(TableSet, TransformationStep)> {
    run(ts, Command::Derive {
        class: class.into(),
        source: source.clone(),
        target: target.clone(),
    })
}

pub fn add_definitional(ts: &TableSet, class: &str, label: &PropertyLabel) -> OpResult<(TableSet, TransformationStep)> {
    run(ts, Command::AddDef {
        class: class.into(),
        label: label.clone(),
    })
}

/// Insert a new class. Entry flags other than `#usage` are not carried into
/// the step's script line, so they do not survive replay.
pub fn add_class(ts: &TableSet, def: ClassDefinition, table: Table) -> OpResult<(TableSet, TransformationStep)> {
    run(ts, Command::AddClass { def, table })
}

pub fn link(ts: &TableSet, a: &EntryRef, b: &EntryRef) -> OpResult<(TableSet, TransformationStep)> {
    run(ts, Command::Link {
        a: a.clone(),
        b: b.clone(),
    })
}

pub fn split_locative(ts: &TableSet, spec: &SplitSpec) -> OpResult<(TableSet, TransformationStep)> {
    run(ts, Command::SplitLoc(spec.clone()))
}

impl fmt::Display for TransformationStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} {}: [{}] -> [{}]", self.kind, self.class_id, self.before.join(" ; "), self.after.join(" ; "))?;
        if !self.details.is_empty() {
            write!(f, " ({})", self.details)?;
        }
        Ok(())
    }
}

pub(crate) fn link_exists(ts: &TableSet, a: &EntryRef, b: &EntryRef) -> bool {
    ts.links.contains(&ParaphraseLink::new(a.clone(), b.clone()))
}
