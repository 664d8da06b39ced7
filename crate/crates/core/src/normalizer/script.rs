//! The line-oriented transformation script.
//!
//! ```text
//! split 32A "N0 V N1 apparition" -> "N0 V N1" ; "N1 apparition"
//! expand 36S "N0 V N1 (avec+à) N2" -> "N0 V N1 Prép N2"
//! promote 35S "Prép =: avec"
//! demote AN08 "il y avoir Det N Loc N0" with "bague"=+ "robe"=-
//! dup 36DT "N2 =: N-hum" -> "N0 =: N-hum"
//! rename AN09 "N0 avoir un N" -> "Det =: un"
//! derive 36DT "N2 =: N-hum" -> "Prép N2-hum = Ppv =: lui"
//! add-def AN07 "Det =: un-certain"
//! add-class 32D Verb def "N0 V N1" ; "N1 disparition" entries "démolir" ; "détruire"
//! link ADVPS "pratiquement" PC "en pratique"
//! split-loc 35L human=no src="…" dst="…" dep="…" -> both=35L srconly=35LS
//! ```
//!
//! `add-class` also takes `columns "l1" ; "l2"` before `entries`, with each
//! entry then written `"lemma"=+-`.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use thiserror::Error;

use super::{
    do_add_class, do_add_definitional, do_demote, do_derive, do_duplicate, do_expand, do_link,
    do_promote, do_rename, do_split, do_split_loc, link_exists, NormalizeError, TransformationReport,
    TransformationStep,
};
use crate::formula::{parse_label, PropertyLabel, SlotSymbol, SyntaxError};
use crate::splitter::{SplitSpec, SplitTarget, TargetSlot};
use crate::tableset::{Category, ClassDefinition, Coding, Entry, EntryRef, Table, TableSet};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Command {
    Split {
        class: String,
        target: PropertyLabel,
        parts: Vec<PropertyLabel>,
    },
    Expand {
        class: String,
        target: PropertyLabel,
        replace_with: Option<Vec<PropertyLabel>>,
    },
    Promote {
        class: String,
        column: PropertyLabel,
    },
    Demote {
        class: String,
        target: PropertyLabel,
        codings: BTreeMap<String, Coding>,
    },
    Dup {
        class: String,
        source: PropertyLabel,
        new: PropertyLabel,
    },
    Rename {
        class: String,
        old: PropertyLabel,
        new: PropertyLabel,
    },
    Derive {
        class: String,
        source: PropertyLabel,
        target: PropertyLabel,
    },
    AddDef {
        class: String,
        label: PropertyLabel,
    },
    AddClass {
        def: ClassDefinition,
        table: Table,
    },
    Link {
        a: EntryRef,
        b: EntryRef,
    },
    SplitLoc(SplitSpec),
}

impl Command {
    pub fn class_id(&self) -> &str {
        match self {
            Command::Split { class, .. }
            | Command::Expand { class, .. }
            | Command::Promote { class, .. }
            | Command::Demote { class, .. }
            | Command::Dup { class, .. }
            | Command::Rename { class, .. }
            | Command::Derive { class, .. }
            | Command::AddDef { class, .. } => class,
            Command::AddClass { def, .. } => &def.class_id,
            Command::Link { a, .. } => &a.class_id,
            Command::SplitLoc(spec) => &spec.source_class,
        }
    }

    pub fn is_split_loc(&self) -> bool {
        matches!(self, Command::SplitLoc(_))
    }

    /// Apply in place, then re-check every table set invariant. On error the
    /// table set may be partially modified; callers work on a copy.
    pub fn apply(&self, ts: &mut TableSet) -> Result<TransformationStep, NormalizeError> {
        let mut step = match self {
            Command::Split { class, target, parts } => do_split(ts, class, target, parts),
            Command::Expand {
                class,
                target,
                replace_with,
            } => do_expand(ts, class, target, replace_with.as_deref()),
            Command::Promote { class, column } => do_promote(ts, class, column),
            Command::Demote { class, target, codings } => do_demote(ts, class, target, codings),
            Command::Dup { class, source, new } => do_duplicate(ts, class, source, new),
            Command::Rename { class, old, new } => do_rename(ts, class, old, new),
            Command::Derive { class, source, target } => do_derive(ts, class, source, target),
            Command::AddDef { class, label } => do_add_definitional(ts, class, label),
            Command::AddClass { def, table } => do_add_class(ts, def, table),
            Command::Link { a, b } => do_link(ts, a, b),
            Command::SplitLoc(spec) => do_split_loc(ts, spec),
        }?;
        ts.validate()?;
        step.command = self.to_string();
        Ok(step)
    }

    /// Whether the step's effect is already present, so a resumed run can
    /// skip it.
    pub fn already_applied(&self, ts: &TableSet) -> bool {
        let class = |id: &str| ts.tables.get(id).zip(ts.definitions.get(id));
        let is_def = |id: &str, l: &PropertyLabel| class(id).is_some_and(|(_, d)| d.is_definitional(l));
        let is_col = |id: &str, l: &PropertyLabel| class(id).is_some_and(|(t, _)| t.column_index(l).is_some());
        match self {
            Command::Split { class, target, parts } => {
                !is_def(class, target) && parts.iter().all(|p| is_def(class, p))
            }
            Command::Expand {
                class,
                target,
                replace_with,
            } => {
                let results = replace_with.clone().unwrap_or_else(|| target.expanded());
                !is_def(class, target) && results.iter().all(|r| is_def(class, r))
            }
            Command::Promote { class, column } => !is_col(class, column) && is_def(class, column),
            Command::Demote { class, target, .. } => !is_def(class, target) && is_col(class, target),
            Command::Dup { class: id, source, new } => class(id).is_some_and(|(t, _)| {
                match (t.column_index(source), t.column_index(new)) {
                    (Some(s), Some(n)) => t.entries.iter().all(|e| e.codings[s] == e.codings[n]),
                    _ => false,
                }
            }),
            Command::Rename { class, old, .. } => !is_def(class, old) && !is_col(class, old),
            Command::Derive { .. } => false,
            Command::AddDef { class, label } => is_def(class, label),
            Command::AddClass { def, .. } => ts
                .definitions
                .get(&def.class_id)
                .is_some_and(|d| d.definitional == def.definitional),
            Command::Link { a, b } => link_exists(ts, a, b),
            Command::SplitLoc(spec) => match class(&spec.source_class) {
                None => true,
                Some((t, d)) => {
                    // Before the split the source class still holds the role-free base.
                    let base = spec
                        .source_column
                        .as_construction()
                        .map(|c| PropertyLabel::from_construction(c.map_symbols(|s| SlotSymbol { role: None, ..s.clone() })));
                    t.column_index(&spec.source_column).is_none() || !base.is_some_and(|b| d.is_definitional(&b))
                }
            },
        }
    }
}

fn quote(s: &str) -> String {
    let mut out = String::from("\"");
    for c in s.chars() {
        match c {
            '"' | '\\' => {
                out.push('\\');
                out.push(c);
            }
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            _ => out.push(c),
        }
    }
    out.push('"');
    out
}

fn ident(s: &str) -> String {
    let plain = !s.is_empty()
        && s.chars().all(|c| c.is_alphanumeric() || matches!(c, '_' | '.' | '-'))
        && !s.starts_with("->");
    if plain {
        s.to_string()
    } else {
        quote(s)
    }
}

fn label_list(v: &[PropertyLabel]) -> String {
    v.iter().map(|l| quote(l.canonical())).collect::<Vec<_>>().join(" ; ")
}

fn codings_word(c: &[Coding]) -> String {
    c.iter().map(|c| c.as_char()).collect()
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let q = |l: &PropertyLabel| quote(l.canonical());
        match self {
            Command::Split { class, target, parts } => {
                write!(f, "split {} {} -> {}", ident(class), q(target), label_list(parts))
            }
            Command::Expand {
                class,
                target,
                replace_with,
            } => {
                write!(f, "expand {} {}", ident(class), q(target))?;
                if let Some(r) = replace_with {
                    write!(f, " -> {}", label_list(r))?;
                }
                Ok(())
            }
            Command::Promote { class, column } => write!(f, "promote {} {}", ident(class), q(column)),
            Command::Demote { class, target, codings } => {
                write!(f, "demote {} {} with", ident(class), q(target))?;
                for (lemma, c) in codings {
                    write!(f, " {}={}", quote(lemma), c)?;
                }
                Ok(())
            }
            Command::Dup { class, source, new } => write!(f, "dup {} {} -> {}", ident(class), q(source), q(new)),
            Command::Rename { class, old, new } => write!(f, "rename {} {} -> {}", ident(class), q(old), q(new)),
            Command::Derive { class, source, target } => {
                write!(f, "derive {} {} -> {}", ident(class), q(source), q(target))
            }
            Command::AddDef { class, label } => write!(f, "add-def {} {}", ident(class), q(label)),
            Command::AddClass { def, table } => {
                write!(
                    f,
                    "add-class {} {} def {}",
                    ident(&def.class_id),
                    def.category,
                    label_list(&def.definitional)
                )?;
                if !table.columns.is_empty() {
                    write!(f, " columns {}", label_list(&table.columns))?;
                }
                if !table.entries.is_empty() {
                    let entries: Vec<String> = table
                        .entries
                        .iter()
                        .map(|e| {
                            if table.columns.is_empty() {
                                quote(&e.key())
                            } else {
                                format!("{}={}", quote(&e.key()), codings_word(&e.codings))
                            }
                        })
                        .collect();
                    write!(f, " entries {}", entries.join(" ; "))?;
                }
                Ok(())
            }
            Command::Link { a, b } => write!(
                f,
                "link {} {} {} {}",
                ident(&a.class_id),
                quote(&a.lemma),
                ident(&b.class_id),
                quote(&b.lemma)
            ),
            Command::SplitLoc(spec) => {
                write!(
                    f,
                    "split-loc {} human={} src={} dst={} dep={} ->",
                    ident(&spec.source_class),
                    if spec.human_n1 { "yes" } else { "no" },
                    q(&spec.source_column),
                    q(&spec.dest_column),
                    q(&spec.dependent_column)
                )?;
                for (slot, t) in &spec.targets {
                    write!(f, " {}={}", slot.as_str(), ident(&t.class_id))?;
                }
                Ok(())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Word(String),
    Str(String),
    Arrow,
    Semi,
    Eq,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Word(w) => write!(f, "`{w}`"),
            Tok::Str(s) => write!(f, "{}", quote(s)),
            Tok::Arrow => f.write_str("`->`"),
            Tok::Semi => f.write_str("`;`"),
            Tok::Eq => f.write_str("`=`"),
        }
    }
}

fn tokenize(line: &str) -> Result<Vec<Tok>, String> {
    let mut out = Vec::new();
    let mut chars = line.char_indices().peekable();
    while let Some(&(i, c)) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
        } else if c == '#' {
            break;
        } else if c == '"' {
            chars.next();
            let mut s = String::new();
            loop {
                match chars.next() {
                    None => return Err(format!("unterminated string starting at column {}", i + 1)),
                    Some((_, '"')) => break,
                    Some((j, '\\')) => match chars.next() {
                        Some((_, 'n')) => s.push('\n'),
                        Some((_, 't')) => s.push('\t'),
                        Some((_, e @ ('"' | '\\'))) => s.push(e),
                        _ => return Err(format!("bad escape at column {}", j + 1)),
                    },
                    Some((_, ch)) => s.push(ch),
                }
            }
            out.push(Tok::Str(s));
        } else if c == ';' {
            chars.next();
            out.push(Tok::Semi);
        } else if c == '=' {
            chars.next();
            out.push(Tok::Eq);
        } else if line[i..].starts_with("->") {
            chars.next();
            chars.next();
            out.push(Tok::Arrow);
        } else {
            let mut w = String::new();
            while let Some(&(_, ch)) = chars.peek() {
                if ch.is_whitespace() || matches!(ch, '"' | ';' | '=') {
                    break;
                }
                w.push(ch);
                chars.next();
            }
            out.push(Tok::Word(w));
        }
    }
    Ok(out)
}

#[derive(Debug)]
enum ParseFail {
    Msg(String),
    Label { text: String, source: SyntaxError },
}

impl From<String> for ParseFail {
    fn from(s: String) -> Self {
        ParseFail::Msg(s)
    }
}

struct Cursor {
    toks: Vec<Tok>,
    pos: usize,
}

type PResult<T> = Result<T, ParseFail>;

impl Cursor {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn found(&self) -> String {
        self.toks
            .get(self.pos.saturating_sub(1))
            .map_or("end of line".to_string(), |t| t.to_string())
    }

    fn expect(&mut self, want: Tok) -> PResult<()> {
        match self.next() {
            Some(t) if t == want => Ok(()),
            _ => Err(format!("expected {want}, found {}", self.found()).into()),
        }
    }

    fn eat(&mut self, want: &Tok) -> bool {
        if self.peek() == Some(want) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn keyword(&mut self, kw: &str) -> bool {
        self.eat(&Tok::Word(kw.to_string()))
    }

    fn word(&mut self, what: &str) -> PResult<String> {
        match self.next() {
            Some(Tok::Word(w)) => Ok(w),
            _ => Err(format!("expected {what}, found {}", self.found()).into()),
        }
    }

    fn string(&mut self, what: &str) -> PResult<String> {
        match self.next() {
            Some(Tok::Str(s)) => Ok(s),
            _ => Err(format!("expected quoted {what}, found {}", self.found()).into()),
        }
    }

    fn ident(&mut self, what: &str) -> PResult<String> {
        match self.next() {
            Some(Tok::Word(w) | Tok::Str(w)) => Ok(w),
            _ => Err(format!("expected {what}, found {}", self.found()).into()),
        }
    }

    fn label(&mut self) -> PResult<PropertyLabel> {
        let text = self.string("label")?;
        parse_label(&text).map_err(|source| ParseFail::Label { text, source })
    }

    fn labels(&mut self) -> PResult<Vec<PropertyLabel>> {
        let mut out = vec![self.label()?];
        while self.eat(&Tok::Semi) {
            out.push(self.label()?);
        }
        Ok(out)
    }

    fn key_value(&mut self, key: &str) -> PResult<()> {
        let k = self.word(key)?;
        if k != key {
            return Err(format!("expected `{key}=`, found `{k}`").into());
        }
        self.expect(Tok::Eq)
    }

    fn end(&self) -> PResult<()> {
        match self.peek() {
            None => Ok(()),
            Some(t) => Err(format!("unexpected {t} at end of step").into()),
        }
    }
}

fn parse_codings(word: &str) -> PResult<Vec<Coding>> {
    word.chars()
        .map(|c| {
            Coding::from_cell(&c.to_string()).ok_or_else(|| ParseFail::Msg(format!("`{c}` is not +, - or ~")))
        })
        .collect()
}

fn entry_from_key(key: &str, codings: Vec<Coding>) -> Entry {
    match key.find('#') {
        Some(i) if i > 0 => Entry::new(&key[..i], codings).with_flags([&key[i..]]),
        _ => Entry::new(key, codings),
    }
}

fn parse_command(toks: Vec<Tok>) -> PResult<Command> {
    let mut c = Cursor { toks, pos: 0 };
    let verb = c.word("operation")?;
    let cmd = match verb.as_str() {
        "split" => {
            let class = c.ident("class id")?;
            let target = c.label()?;
            c.expect(Tok::Arrow)?;
            let parts = c.labels()?;
            Command::Split { class, target, parts }
        }
        "expand" => {
            let class = c.ident("class id")?;
            let target = c.label()?;
            let replace_with = if c.eat(&Tok::Arrow) { Some(c.labels()?) } else { None };
            Command::Expand {
                class,
                target,
                replace_with,
            }
        }
        "promote" => Command::Promote {
            class: c.ident("class id")?,
            column: c.label()?,
        },
        "demote" => {
            let class = c.ident("class id")?;
            let target = c.label()?;
            let mut codings = BTreeMap::new();
            if c.keyword("with") {
                while let Some(Tok::Str(_)) = c.peek() {
                    let lemma = c.string("lemma")?;
                    c.expect(Tok::Eq)?;
                    let w = c.word("coding")?;
                    let coding = match parse_codings(&w)?.as_slice() {
                        [one] => *one,
                        _ => return Err(format!("`{w}` is not a single coding").into()),
                    };
                    if codings.insert(lemma.clone(), coding).is_some() {
                        return Err(format!("`{lemma}` coded twice").into());
                    }
                }
            }
            Command::Demote { class, target, codings }
        }
        "dup" | "rename" | "derive" => {
            let class = c.ident("class id")?;
            let from = c.label()?;
            c.expect(Tok::Arrow)?;
            let to = c.label()?;
            match verb.as_str() {
                "dup" => Command::Dup {
                    class,
                    source: from,
                    new: to,
                },
                "rename" => Command::Rename { class, old: from, new: to },
                _ => Command::Derive {
                    class,
                    source: from,
                    target: to,
                },
            }
        }
        "add-def" => Command::AddDef {
            class: c.ident("class id")?,
            label: c.label()?,
        },
        "add-class" => {
            let class = c.ident("class id")?;
            let category: Category = c.word("category")?.parse::<Category>()?;
            if !c.keyword("def") {
                return Err(format!("expected `def`, found {}", c.peek().map_or("end of line".into(), |t| t.to_string())).into());
            }
            let definitional = c.labels()?;
            let columns = if c.keyword("columns") { c.labels()? } else { Vec::new() };
            let mut table = Table::new(&class, category);
            if c.keyword("entries") {
                loop {
                    let key = c.string("lemma")?;
                    let codings = if c.eat(&Tok::Eq) {
                        parse_codings(&c.word("codings")?)?
                    } else {
                        Vec::new()
                    };
                    if codings.len() != columns.len() {
                        return Err(format!(
                            "entry `{key}` has {} codings for {} columns",
                            codings.len(),
                            columns.len()
                        )
                        .into());
                    }
                    table.entries.push(entry_from_key(&key, codings));
                    if !c.eat(&Tok::Semi) {
                        break;
                    }
                }
            }
            table.columns = columns;
            Command::AddClass {
                def: ClassDefinition::new(&class, category, definitional),
                table,
            }
        }
        "link" => {
            let ca = c.ident("class id")?;
            let la = c.string("lemma")?;
            let cb = c.ident("class id")?;
            let lb = c.string("lemma")?;
            Command::Link {
                a: EntryRef::new(ca, la),
                b: EntryRef::new(cb, lb),
            }
        }
        "split-loc" => {
            let source_class = c.ident("class id")?;
            c.key_value("human")?;
            let human_n1 = match c.word("yes or no")?.as_str() {
                "yes" => true,
                "no" => false,
                other => return Err(format!("human= takes yes or no, not `{other}`").into()),
            };
            c.key_value("src")?;
            let source_column = c.label()?;
            c.key_value("dst")?;
            let dest_column = c.label()?;
            c.key_value("dep")?;
            let dependent_column = c.label()?;
            c.expect(Tok::Arrow)?;
            let mut targets = BTreeMap::new();
            while c.peek().is_some() {
                let slot: TargetSlot = c.word("target name")?.parse()?;
                c.expect(Tok::Eq)?;
                let id = c.ident("class id")?;
                if targets.insert(slot, SplitTarget::new(id)).is_some() {
                    return Err(format!("{} given twice", slot.as_str()).into());
                }
            }
            if targets.is_empty() {
                return Err("split-loc needs at least one target".to_string().into());
            }
            Command::SplitLoc(SplitSpec {
                source_class,
                human_n1,
                source_column,
                dest_column,
                dependent_column,
                targets,
            })
        }
        other => return Err(format!("unknown operation `{other}`").into()),
    };
    c.end()?;
    Ok(cmd)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScriptStep {
    /// 1-based line in the script text.
    pub line: usize,
    pub command: Command,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Script {
    pub steps: Vec<ScriptStep>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScriptErrorKind {
    #[error("{0}")]
    Parse(String),
    #[error("label `{text}`: {source}")]
    Label { text: String, source: SyntaxError },
    #[error("{0}")]
    Apply(NormalizeError),
    #[error("{0}")]
    Io(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("step {step} (line {line}): {kind}")]
pub struct ScriptError {
    /// 1-based step index; 0 when the failure precedes any step.
    pub step: usize,
    pub line: usize,
    pub kind: ScriptErrorKind,
}

impl Script {
    pub fn parse(text: &str) -> Result<Script, ScriptError> {
        let mut steps = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let fail = |kind| ScriptError {
                step: steps.len() + 1,
                line,
                kind,
            };
            let toks = tokenize(raw).map_err(|m| fail(ScriptErrorKind::Parse(m)))?;
            if toks.is_empty() {
                continue;
            }
            let command = parse_command(toks).map_err(|e| {
                fail(match e {
                    ParseFail::Msg(m) => ScriptErrorKind::Parse(m),
                    ParseFail::Label { text, source } => ScriptErrorKind::Label { text, source },
                })
            })?;
            steps.push(ScriptStep { line, command });
        }
        Ok(Script { steps })
    }

    pub fn from_file(path: &Path) -> Result<Script, ScriptError> {
        let text = std::fs::read_to_string(path).map_err(|e| ScriptError {
            step: 0,
            line: 0,
            kind: ScriptErrorKind::Io(format!("{}: {e}", path.display())),
        })?;
        Script::parse(&text)
    }

    /// Keep only the steps matching `keep`.
    pub fn filtered(&self, keep: impl Fn(&Command) -> bool) -> Script {
        Script {
            steps: self.steps.iter().filter(|s| keep(&s.command)).cloned().collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ApplyMode {
    /// Every step must apply.
    Strict,
    /// Skip steps whose effect is already present, and treat
    /// `NothingToExpand` / `NotConstant` as skips.
    Resume,
}

/// Apply every step in order. All or nothing: on error the input is untouched
/// and the error names the failing step.
pub fn apply_script_with(
    ts: &TableSet,
    script: &Script,
    mode: ApplyMode,
) -> Result<(TableSet, TransformationReport), ScriptError> {
    let mut work = ts.clone();
    let mut report = TransformationReport::default();
    for (i, s) in script.steps.iter().enumerate() {
        if mode == ApplyMode::Resume && s.command.already_applied(&work) {
            continue;
        }
        let mut attempt = work.clone();
        match s.command.apply(&mut attempt) {
            Ok(step) => {
                work = attempt;
                report.steps.push(step);
            }
            Err(e) if mode == ApplyMode::Resume && e.is_skippable() => {}
            Err(e) => {
                return Err(ScriptError {
                    step: i + 1,
                    line: s.line,
                    kind: ScriptErrorKind::Apply(e),
                })
            }
        }
    }
    Ok((work, report))
}

pub fn apply_script(ts: &TableSet, script: &Path) -> Result<(TableSet, TransformationReport), ScriptError> {
    apply_script_with(ts, &Script::from_file(script)?, ApplyMode::Strict)
}
