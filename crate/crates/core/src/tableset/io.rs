//! Reading and writing table directories and definitions files.
//!
//! A table is `<classId>.tsv`: a header row `<ENT>` followed by one label
//! per column (plus an optional trailing `<FLAGS>`), then one row per entry.
//! The definitions file groups blank-line separated stanzas:
//!
//! ```text
//! class 36DT Verb
//! def: N0 V N1 à N2
//! note: free text
//!
//! link: ADVPS	pratiquement	PC	en pratique
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;
use unicode_normalization::UnicodeNormalization;

use super::{
    Category, ClassDefinition, Coding, DefinitionError, Entry, EntryRef, ParaphraseLink, Table,
    TableSet,
};
use crate::formula::{parse_label, PropertyLabel, SyntaxError};

pub const LEMMA_COLUMN: &str = "<ENT>";
pub const FLAGS_COLUMN: &str = "<FLAGS>";
pub const TABLE_EXT: &str = "tsv";
pub const DEFINITIONS_FILE: &str = "definitions.txt";
pub const TABLES_DIR: &str = "tables";

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}:{line}: {message}", path.display())]
    Format {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{}:{line}: label `{text}`: {source}", path.display())]
    Syntax {
        path: PathBuf,
        line: usize,
        text: String,
        #[source]
        source: SyntaxError,
    },
    #[error(transparent)]
    Definition(#[from] DefinitionError),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> LoadError + '_ {
    move |source| LoadError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn format_err(path: &Path, line: usize, message: impl Into<String>) -> LoadError {
    LoadError::Format {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

/// Read a file as UTF-8 and normalize to NFC.
fn read_text(path: &Path) -> Result<String, LoadError> {
    let bytes = fs::read(path).map_err(io_err(path))?;
    let text = String::from_utf8(bytes).map_err(|e| {
        let line = 1 + e.as_bytes()[..e.utf8_error().valid_up_to()]
            .iter()
            .filter(|&&b| b == b'\n')
            .count();
        format_err(path, line, "invalid UTF-8")
    })?;
    Ok(text.nfc().collect())
}

fn lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.split('\n')
        .map(|l| l.strip_suffix('\r').unwrap_or(l))
        .enumerate()
        .map(|(i, l)| (i + 1, l))
}

fn parse_at(path: &Path, line: usize, text: &str) -> Result<PropertyLabel, LoadError> {
    parse_label(text).map_err(|source| LoadError::Syntax {
        path: path.to_path_buf(),
        line,
        text: text.to_string(),
        source,
    })
}

fn parse_flags(field: &str) -> BTreeSet<String> {
    field
        .split(',')
        .map(str::trim)
        .filter(|f| !f.is_empty())
        .map(String::from)
        .collect()
}

/// Split `lemma#usage` into the bare lemma and its usage flag.
fn split_usage(key: &str) -> (&str, Option<&str>) {
    match key.find('#') {
        Some(i) if i > 0 => (&key[..i], Some(&key[i..])),
        _ => (key, None),
    }
}

pub(crate) fn read_table(path: &Path, class_id: &str, category: Category) -> Result<Table, LoadError> {
    let text = read_text(path)?;
    let mut rows = lines(&text);
    let (_, header) = rows
        .next()
        .filter(|(_, h)| !h.is_empty())
        .ok_or_else(|| format_err(path, 1, "missing header row"))?;
    let fields: Vec<&str> = header.split('\t').collect();
    if fields[0] != LEMMA_COLUMN {
        return Err(format_err(path, 1, format!("header must start with {LEMMA_COLUMN}")));
    }
    let mut flags_at = None;
    let mut columns = Vec::new();
    for (i, f) in fields.iter().enumerate().skip(1) {
        if *f == FLAGS_COLUMN {
            if flags_at.is_some() {
                return Err(format_err(path, 1, format!("{FLAGS_COLUMN} appears twice")));
            }
            flags_at = Some(i);
        } else {
            columns.push(parse_at(path, 1, f)?);
        }
    }

    let mut table = Table::new(class_id, category);
    table.columns = columns;
    let mut seen = BTreeSet::new();
    for (n, row) in rows {
        if row.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = row.split('\t').collect();
        if cells.len() != fields.len() {
            return Err(format_err(
                path,
                n,
                format!("{} fields, header has {}", cells.len(), fields.len()),
            ));
        }
        let key = cells[0].trim();
        let (lemma, usage) = split_usage(key);
        if lemma.is_empty() {
            return Err(format_err(path, n, "empty lemma"));
        }
        let mut codings = Vec::with_capacity(table.columns.len());
        let mut flags = BTreeSet::new();
        for (i, cell) in cells.iter().enumerate().skip(1) {
            if Some(i) == flags_at {
                flags = parse_flags(cell);
                continue;
            }
            let coding = Coding::from_cell(cell.trim()).ok_or_else(|| {
                format_err(
                    path,
                    n,
                    format!(
                        "cell `{cell}` under `{}` is not +, - or ~ (lexical-valued cells are not supported)",
                        fields[i]
                    ),
                )
            })?;
            codings.push(coding);
        }
        flags.retain(|f| !f.starts_with('#'));
        if let Some(u) = usage {
            flags.insert(u.to_string());
        }
        let entry = Entry {
            lemma: lemma.to_string(),
            codings,
            flags,
        };
        if !seen.insert(entry.key()) {
            return Err(format_err(path, n, format!("duplicate entry `{}`", entry.key())));
        }
        table.entries.push(entry);
    }
    Ok(table)
}

pub(crate) struct Definitions {
    pub classes: BTreeMap<String, ClassDefinition>,
    pub links: BTreeSet<ParaphraseLink>,
}

pub(crate) fn read_definitions(path: &Path) -> Result<Definitions, LoadError> {
    let text = read_text(path)?;
    let mut classes: BTreeMap<String, ClassDefinition> = BTreeMap::new();
    let mut links = BTreeSet::new();
    let mut current: Option<ClassDefinition> = None;

    let finish = |cur: &mut Option<ClassDefinition>, classes: &mut BTreeMap<_, _>, line| {
        if let Some(def) = cur.take() {
            let def: ClassDefinition = def;
            if classes.contains_key(&def.class_id) {
                return Err(format_err(path, line, format!("class {} defined twice", def.class_id)));
            }
            classes.insert(def.class_id.clone(), def);
        }
        Ok(())
    };

    for (n, raw) in lines(&text) {
        let line = raw.trim();
        if line.is_empty() {
            finish(&mut current, &mut classes, n)?;
            continue;
        }
        if line.starts_with('#') {
            continue;
        }
        if let Some(rest) = line.strip_prefix("link:") {
            let parts: Vec<&str> = rest.trim().split('\t').map(str::trim).collect();
            if parts.len() != 4 || parts.iter().any(|p| p.is_empty()) {
                return Err(format_err(
                    path,
                    n,
                    "link needs four tab-separated fields: class, lemma, class, lemma",
                ));
            }
            links.insert(ParaphraseLink::new(
                EntryRef::new(parts[0], parts[1]),
                EntryRef::new(parts[2], parts[3]),
            ));
            continue;
        }
        if let Some(rest) = line.strip_prefix("def:") {
            let def = current
                .as_mut()
                .ok_or_else(|| format_err(path, n, "`def:` outside a class stanza"))?;
            def.definitional.push(parse_at(path, n, rest.trim())?);
            continue;
        }
        if let Some(rest) = line.strip_prefix("note:") {
            let def = current
                .as_mut()
                .ok_or_else(|| format_err(path, n, "`note:` outside a class stanza"))?;
            if !def.notes.is_empty() {
                def.notes.push('\n');
            }
            def.notes.push_str(rest.trim());
            continue;
        }
        if let Some(rest) = line.strip_prefix("class ") {
            finish(&mut current, &mut classes, n)?;
            let mut it = rest.split_whitespace();
            let (Some(id), Some(cat), None) = (it.next(), it.next(), it.next()) else {
                return Err(format_err(path, n, "expected `class <id> <category>`"));
            };
            let category: Category = cat.parse().map_err(|m: String| format_err(path, n, m))?;
            current = Some(ClassDefinition::new(id, category, Vec::new()));
            continue;
        }
        return Err(format_err(path, n, format!("unrecognized line `{line}`")));
    }
    let end = text.lines().count() + 1;
    finish(&mut current, &mut classes, end)?;
    Ok(Definitions { classes, links })
}

/// Load every `*.tsv` table under `table_dir` together with the definitions
/// file, then check the invariants.
pub fn load_tableset(table_dir: &Path, definitions: &Path) -> Result<TableSet, LoadError> {
    let defs = read_definitions(definitions)?;
    let mut paths: Vec<PathBuf> = fs::read_dir(table_dir)
        .map_err(io_err(table_dir))?
        .map(|e| e.map(|e| e.path()).map_err(io_err(table_dir)))
        .collect::<Result<_, _>>()?;
    paths.retain(|p| p.is_file() && p.extension().is_some_and(|e| e == TABLE_EXT));
    paths.sort();

    let mut ts = TableSet::new();
    for path in paths {
        let class_id: String = path
            .file_stem()
            .and_then(|s| s.to_str())
            .ok_or_else(|| format_err(&path, 0, "table file name is not valid UTF-8"))?
            .nfc()
            .collect();
        let category = defs
            .classes
            .get(&class_id)
            .map(|d| d.category)
            .ok_or_else(|| DefinitionError::MissingDefinition(class_id.clone()))?;
        let table = read_table(&path, &class_id, category)?;
        ts.tables.insert(class_id, table);
    }
    ts.definitions = defs.classes;
    ts.links = defs.links;
    ts.validate()?;
    Ok(ts)
}

pub(crate) fn render_table(table: &Table) -> String {
    let with_flags = table
        .entries
        .iter()
        .any(|e| e.flags.iter().any(|f| !f.starts_with('#')));
    let mut out = String::from(LEMMA_COLUMN);
    for c in &table.columns {
        out.push('\t');
        out.push_str(c.canonical());
    }
    if with_flags {
        out.push('\t');
        out.push_str(FLAGS_COLUMN);
    }
    out.push('\n');
    for e in &table.entries {
        out.push_str(&e.key());
        for c in &e.codings {
            out.push('\t');
            out.push(c.as_char());
        }
        if with_flags {
            let flags: Vec<&str> = e
                .flags
                .iter()
                .filter(|f| !f.starts_with('#'))
                .map(String::as_str)
                .collect();
            out.push('\t');
            out.push_str(&flags.join(","));
        }
        out.push('\n');
    }
    out
}

pub(crate) fn render_definitions(ts: &TableSet) -> String {
    let mut out = String::new();
    for def in ts.definitions.values() {
        let _ = writeln!(out, "class {} {}", def.class_id, def.category);
        for d in &def.definitional {
            let _ = writeln!(out, "def: {}", d.canonical());
        }
        for note in def.notes.lines() {
            let _ = writeln!(out, "note: {note}");
        }
        out.push('\n');
    }
    for link in &ts.links {
        let (a, b) = link.ends();
        let _ = writeln!(out, "link: {}\t{}\t{}\t{}", a.class_id, a.lemma, b.class_id, b.lemma);
    }
    out
}

/// Write `out_dir/tables/<classId>.tsv` and `out_dir/definitions.txt`.
/// Labels are written canonically and line endings are LF.
pub fn save_tableset(ts: &TableSet, out_dir: &Path) -> Result<(), LoadError> {
    let tables = out_dir.join(TABLES_DIR);
    fs::create_dir_all(&tables).map_err(io_err(&tables))?;
    for (id, table) in &ts.tables {
        let path = tables.join(format!("{id}.{TABLE_EXT}"));
        fs::write(&path, render_table(table)).map_err(io_err(&path))?;
    }
    let path = out_dir.join(DEFINITIONS_FILE);
    fs::write(&path, render_definitions(ts)).map_err(io_err(&path))?;
    Ok(())
}
