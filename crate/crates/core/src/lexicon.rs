//! Flattened lexicon records, licensing checks and paraphrase links.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};
use std::fs;
use std::path::Path;

use rayon::prelude::*;

use crate::formula::{parse_label, LabelBody, PropertyLabel, SlotKind, SlotSymbol};
use crate::tableset::{Category, Coding, EntryRef, LookupError, ParaphraseLink, Table, TableSet};

pub const STRUCTURED_VERSION: &str = "LGLEX/1";
pub const STRUCTURED_FIELDS: &str = "lemma|class|category|accepted|rejected|uncoded|links";

/// Everything known about one entry of one class.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LexiconRecord {
    pub class_id: String,
    pub lemma: String,
    pub category: Category,
    pub accepted: BTreeSet<PropertyLabel>,
    pub rejected: BTreeSet<PropertyLabel>,
    pub uncoded: BTreeSet<PropertyLabel>,
    pub links: BTreeSet<EntryRef>,
}

impl LexiconRecord {
    pub fn entry_ref(&self) -> EntryRef {
        EntryRef::new(&self.class_id, &self.lemma)
    }
}

fn expand_all<'a>(labels: impl IntoIterator<Item = &'a PropertyLabel>) -> BTreeSet<PropertyLabel> {
    labels.into_iter().flat_map(PropertyLabel::expanded).collect()
}

fn link_index(ts: &TableSet) -> BTreeMap<&EntryRef, BTreeSet<EntryRef>> {
    let mut out: BTreeMap<&EntryRef, BTreeSet<EntryRef>> = BTreeMap::new();
    for link in &ts.links {
        let (a, b) = link.ends();
        out.entry(a).or_default().insert(b.clone());
        out.entry(b).or_default().insert(a.clone());
    }
    out
}

fn flatten_table(
    table: &Table,
    definitional: &[PropertyLabel],
    links: &BTreeMap<&EntryRef, BTreeSet<EntryRef>>,
) -> Vec<LexiconRecord> {
    let base = expand_all(definitional);
    let mut records: Vec<LexiconRecord> = table
        .entries
        .iter()
        .map(|e| {
            let coded = |want: Coding| {
                table
                    .columns
                    .iter()
                    .zip(&e.codings)
                    .filter(move |(_, c)| **c == want)
                    .map(|(l, _)| l)
            };
            let mut accepted = base.clone();
            accepted.extend(expand_all(coded(Coding::Plus)));
            let rejected: BTreeSet<_> = coded(Coding::Minus)
                .filter(|l| !accepted.contains(*l))
                .cloned()
                .collect();
            let uncoded: BTreeSet<_> = coded(Coding::Uncoded)
                .filter(|l| !accepted.contains(*l) && !rejected.contains(*l))
                .cloned()
                .collect();
            let me = EntryRef::new(&table.class_id, e.key());
            LexiconRecord {
                class_id: table.class_id.clone(),
                lemma: e.key(),
                category: table.category,
                accepted,
                rejected,
                uncoded,
                links: links.get(&me).cloned().unwrap_or_default(),
            }
        })
        .collect();
    records.sort_by(|a, b| a.lemma.cmp(&b.lemma));
    records
}

/// One record per (class, entry), ordered by class then lemma. Classes are
/// processed in parallel on the current rayon pool.
pub fn flatten(ts: &TableSet) -> Vec<LexiconRecord> {
    let links = link_index(ts);
    let classes: Vec<(&Table, &[PropertyLabel])> = ts
        .tables
        .values()
        .map(|t| {
            let defs = ts
                .definitions
                .get(&t.class_id)
                .map_or(&[][..], |d| d.definitional.as_slice());
            (t, defs)
        })
        .collect();
    classes
        .par_iter()
        .map(|(t, d)| flatten_table(t, d, &links))
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Severity {
    Error,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LicensingIssue {
    pub record: EntryRef,
    pub label: PropertyLabel,
    pub symbol: SlotSymbol,
    pub severity: Severity,
}

impl fmt::Display for LicensingIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}\t{}\t{}\t{}",
            self.severity,
            self.record,
            self.label,
            self.symbol.bare()
        )
    }
}

type Key = (SlotKind, u8);

/// Argument keys a plain construction makes available.
///
/// Indexed symbols license themselves. A bare `Prép` or `Det` licenses the
/// index of the argument it introduces, and `V-n` stands for the argument
/// after the highest free argument before it.
pub fn licensed_keys(symbols: &[SlotSymbol]) -> BTreeSet<Key> {
    let mut out = BTreeSet::new();
    let mut highest: Option<u8> = None;
    for (i, s) in symbols.iter().enumerate() {
        if let Some(k) = s.reference_key() {
            out.insert(k);
        }
        match (s.kind, s.index) {
            (SlotKind::Preposition | SlotKind::Determiner, None) => {
                let next = symbols[i + 1..]
                    .iter()
                    .find(|n| !matches!(n.kind, SlotKind::Determiner | SlotKind::Possessive));
                if let Some(n) = next {
                    if n.kind.is_argument() {
                        if let Some(k) = n.index {
                            out.insert((s.kind, k));
                        }
                    }
                }
            }
            (SlotKind::DeverbalNoun, _) => {
                out.insert((SlotKind::FreeArg, highest.map_or(0, |h| h + 1)));
            }
            (SlotKind::FreeArg, Some(k)) => highest = Some(highest.map_or(k, |h| h.max(k))),
            _ => {}
        }
    }
    out
}

/// Indexed symbols a non-construction label refers to.
pub fn referenced_symbols(label: &PropertyLabel) -> Vec<&SlotSymbol> {
    let subjects: Vec<&SlotSymbol> = match label.body() {
        LabelBody::Construction(_) => Vec::new(),
        LabelBody::Constraint(c) => vec![&c.subject],
        LabelBody::Feature(f) => vec![&f.subject],
        LabelBody::Equivalence(e) => e.context.iter().collect(),
    };
    subjects.into_iter().filter(|s| s.reference_key().is_some()).collect()
}

fn check_record(r: &LexiconRecord) -> Vec<LicensingIssue> {
    let mut licensed = BTreeSet::new();
    for l in &r.accepted {
        if let Some(syms) = l.as_construction().and_then(|c| c.plain_symbols()) {
            let owned: Vec<SlotSymbol> = syms.into_iter().cloned().collect();
            licensed.extend(licensed_keys(&owned));
        }
    }
    let mut issues = Vec::new();
    let mut check = |labels: &BTreeSet<PropertyLabel>, severity| {
        for l in labels {
            for s in referenced_symbols(l) {
                let key = s.reference_key().expect("filtered");
                if !licensed.contains(&key) {
                    issues.push(LicensingIssue {
                        record: r.entry_ref(),
                        label: l.clone(),
                        symbol: s.clone(),
                        severity,
                    });
                }
            }
        }
    };
    check(&r.accepted, Severity::Error);
    check(&r.uncoded, Severity::Warning);
    issues
}

/// Every accepted constraint, equivalence or feature whose indexed subject
/// does not occur in an accepted construction is an error; the same in an
/// uncoded label is a warning.
pub fn validate_licensing(records: &[LexiconRecord]) -> Vec<LicensingIssue> {
    records.par_iter().flat_map_iter(check_record).collect()
}

/// Add paraphrase links. Both ends of every pair must exist.
pub fn link_paraphrases(ts: &TableSet, pairs: &[(EntryRef, EntryRef)]) -> Result<TableSet, LookupError> {
    let mut out = ts.clone();
    for (a, b) in pairs {
        for end in [a, b] {
            ts.table(&end.class_id)?;
            if ts.resolve(end).is_none() {
                return Err(LookupError::UnknownEntry(end.clone()));
            }
        }
        out.links.insert(ParaphraseLink::new(a.clone(), b.clone()));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Text,
    Structured,
}

impl ExportFormat {
    pub fn file_name(self) -> &'static str {
        match self {
            ExportFormat::Text => "lexicon.txt",
            ExportFormat::Structured => "lexicon.lglex",
        }
    }
}

pub fn render_text(records: &[LexiconRecord]) -> String {
    let mut out = String::new();
    for r in records {
        let _ = writeln!(out, "{}:{}", r.class_id, r.lemma);
        let _ = writeln!(out, "  category: {}", r.category);
        for (name, set) in [("accepted", &r.accepted), ("rejected", &r.rejected), ("uncoded", &r.uncoded)] {
            for l in set {
                let _ = writeln!(out, "  {name}: {l}");
            }
        }
        for l in &r.links {
            let _ = writeln!(out, "  link: {l}");
        }
        out.push('\n');
    }
    out
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '\\' | '|' | ';' => {
                out.push('\\');
                out.push(c);
            }
            '\n' => out.push_str("\\n"),
            _ => out.push(c),
        }
    }
    out
}

fn join<I: IntoIterator<Item = String>>(items: I) -> String {
    items.into_iter().map(|s| escape(&s)).collect::<Vec<_>>().join(";")
}

pub fn render_structured(records: &[LexiconRecord]) -> String {
    let mut out = format!("#{STRUCTURED_VERSION} {STRUCTURED_FIELDS}\n");
    for r in records {
        let labels = |set: &BTreeSet<PropertyLabel>| join(set.iter().map(|l| l.canonical().to_string()));
        let _ = writeln!(
            out,
            "{}|{}|{}|{}|{}|{}|{}",
            escape(&r.lemma),
            escape(&r.class_id),
            r.category,
            labels(&r.accepted),
            labels(&r.rejected),
            labels(&r.uncoded),
            join(r.links.iter().map(ToString::to_string)),
        );
    }
    out
}

/// Split on an unescaped separator, then unescape each piece.
fn split_escaped(s: &str, sep: char) -> Vec<String> {
    let mut parts = vec![String::new()];
    let mut chars = s.chars();
    while let Some(c) = chars.next() {
        if c == '\\' {
            let cur = parts.last_mut().expect("non-empty");
            cur.push(c);
            if let Some(n) = chars.next() {
                cur.push(n);
            }
        } else if c == sep {
            parts.push(String::new());
        } else {
            parts.last_mut().expect("non-empty").push(c);
        }
    }
    parts
}

fn unescape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut chars = s.chars();
    while let Some(c) = chars.next() {
        if c == '\\' {
            match chars.next() {
                Some('n') => out.push('\n'),
                Some(n) => out.push(n),
                None => {}
            }
        } else {
            out.push(c);
        }
    }
    out
}

fn list(field: &str) -> Vec<String> {
    if field.is_empty() {
        return Vec::new();
    }
    split_escaped(field, ';').iter().map(|s| unescape(s)).collect()
}

/// Parse the structured export back into records.
pub fn read_structured(text: &str) -> Result<Vec<LexiconRecord>, String> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h == format!("#{STRUCTURED_VERSION} {STRUCTURED_FIELDS}") => {}
        _ => return Err(format!("line 1: expected #{STRUCTURED_VERSION} header")),
    }
    let mut out = Vec::new();
    for (i, line) in lines {
        let n = i + 1;
        let f = split_escaped(line, '|');
        if f.len() != 7 {
            return Err(format!("line {n}: {} fields, expected 7", f.len()));
        }
        let labels = |field: &str| -> Result<BTreeSet<PropertyLabel>, String> {
            list(field)
                .iter()
                .map(|s| parse_label(s).map_err(|e| format!("line {n}: `{s}`: {e}")))
                .collect()
        };
        let links = list(&f[6])
            .into_iter()
            .map(|s| {
                s.split_once(':')
                    .map(|(c, l)| EntryRef::new(c, l))
                    .ok_or_else(|| format!("line {n}: link `{s}` lacks a class"))
            })
            .collect::<Result<_, _>>()?;
        out.push(LexiconRecord {
            lemma: unescape(&f[0]),
            class_id: unescape(&f[1]),
            category: f[2].parse().map_err(|e| format!("line {n}: {e}"))?,
            accepted: labels(&f[3])?,
            rejected: labels(&f[4])?,
            uncoded: labels(&f[5])?,
            links,
        });
    }
    Ok(out)
}

pub fn render(records: &[LexiconRecord], format: ExportFormat) -> String {
    match format {
        ExportFormat::Text => render_text(records),
        ExportFormat::Structured => render_structured(records),
    }
}

pub fn export_lexicon(records: &[LexiconRecord], out: &Path, format: ExportFormat) -> std::io::Result<()> {
    fs::write(out, render(records, format))
}
