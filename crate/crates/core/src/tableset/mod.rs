//! Tables, class definitions and codings.

mod io;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::formula::{LabelBody, PropertyLabel, SlotKind};

pub use io::{
    load_tableset, save_tableset, LoadError, DEFINITIONS_FILE, FLAGS_COLUMN, LEMMA_COLUMN, TABLES_DIR,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Coding {
    Plus,
    Minus,
    Uncoded,
}

impl Coding {
    pub fn as_char(self) -> char {
        match self {
            Coding::Plus => '+',
            Coding::Minus => '-',
            Coding::Uncoded => '~',
        }
    }

    pub fn from_cell(cell: &str) -> Option<Coding> {
        match cell {
            "+" => Some(Coding::Plus),
            "-" => Some(Coding::Minus),
            "~" => Some(Coding::Uncoded),
            _ => None,
        }
    }
}

impl fmt::Display for Coding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Category {
    Verb,
    PredicativeNoun,
    FrozenExpression,
    Adverb,
}

impl Category {
    pub fn as_str(self) -> &'static str {
        match self {
            Category::Verb => "Verb",
            Category::PredicativeNoun => "PredicativeNoun",
            Category::FrozenExpression => "FrozenExpression",
            Category::Adverb => "Adverb",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Category {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "Verb" | "verb" => Ok(Category::Verb),
            "PredicativeNoun" | "noun" => Ok(Category::PredicativeNoun),
            "FrozenExpression" | "frozen" => Ok(Category::FrozenExpression),
            "Adverb" | "adverb" => Ok(Category::Adverb),
            _ => Err(format!("unknown category `{s}`")),
        }
    }
}

/// One row of a table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entry {
    pub lemma: String,
    pub codings: Vec<Coding>,
    /// Free-form annotations. A `#usage` token distinguishes rows sharing a lemma.
    pub flags: BTreeSet<String>,
}

impl Entry {
    pub fn new(lemma: impl Into<String>, codings: Vec<Coding>) -> Self {
        Entry {
            lemma: lemma.into(),
            codings,
            flags: BTreeSet::new(),
        }
    }

    pub fn with_flags<I, S>(mut self, flags: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.flags.extend(flags.into_iter().map(Into::into));
        self
    }

    pub fn usage(&self) -> Option<&str> {
        self.flags.iter().find(|f| f.starts_with('#')).map(String::as_str)
    }

    /// Unique key within a class: the lemma plus its `#usage` suffix, if any.
    pub fn key(&self) -> String {
        match self.usage() {
            Some(u) => format!("{}{}", self.lemma, u),
            None => self.lemma.clone(),
        }
    }

    pub fn has_flag(&self, flag: &str) -> bool {
        self.flags.contains(flag)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    pub class_id: String,
    pub category: Category,
    pub columns: Vec<PropertyLabel>,
    pub entries: Vec<Entry>,
}

impl Table {
    pub fn new(class_id: impl Into<String>, category: Category) -> Self {
        Table {
            class_id: class_id.into(),
            category,
            columns: Vec::new(),
            entries: Vec::new(),
        }
    }

    pub fn column_index(&self, label: &PropertyLabel) -> Option<usize> {
        self.columns.iter().position(|c| c == label)
    }

    pub fn entry(&self, key: &str) -> Option<&Entry> {
        self.entries.iter().find(|e| e.key() == key)
    }

    pub fn column_codings(&self, idx: usize) -> impl Iterator<Item = Coding> + '_ {
        self.entries.iter().map(move |e| e.codings[idx])
    }

    pub fn remove_column(&mut self, idx: usize) -> PropertyLabel {
        for e in &mut self.entries {
            e.codings.remove(idx);
        }
        self.columns.remove(idx)
    }

    /// Append a column; `coding_for` supplies each entry's cell.
    pub fn push_column(&mut self, label: PropertyLabel, mut coding_for: impl FnMut(&Entry) -> Coding) {
        for e in &mut self.entries {
            let c = coding_for(e);
            e.codings.push(c);
        }
        self.columns.push(label);
    }

    pub fn cell_count(&self) -> usize {
        self.columns.len() * self.entries.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassDefinition {
    pub class_id: String,
    pub category: Category,
    /// Base constructions and the constraints/features true of every entry.
    pub definitional: Vec<PropertyLabel>,
    pub notes: String,
}

impl ClassDefinition {
    pub fn new(class_id: impl Into<String>, category: Category, definitional: Vec<PropertyLabel>) -> Self {
        ClassDefinition {
            class_id: class_id.into(),
            category,
            definitional,
            notes: String::new(),
        }
    }

    pub fn is_definitional(&self, label: &PropertyLabel) -> bool {
        self.definitional.contains(label)
    }

    /// Whether `label` holds for every entry: stated verbatim, or one of the
    /// plain variants of a definitional construction.
    pub fn implies(&self, label: &PropertyLabel) -> bool {
        self.is_definitional(label)
            || (label.is_construction()
                && self.definitional.iter().any(|d| d.expanded().contains(label)))
    }
}

/// `(class, lemma)` reference to one entry.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EntryRef {
    pub class_id: String,
    pub lemma: String,
}

impl EntryRef {
    pub fn new(class_id: impl Into<String>, lemma: impl Into<String>) -> Self {
        EntryRef {
            class_id: class_id.into(),
            lemma: lemma.into(),
        }
    }
}

impl fmt::Display for EntryRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.class_id, self.lemma)
    }
}

/// An unordered pair of entries; the smaller reference is always first.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ParaphraseLink {
    a: EntryRef,
    b: EntryRef,
}

impl ParaphraseLink {
    pub fn new(x: EntryRef, y: EntryRef) -> Self {
        if x <= y {
            ParaphraseLink { a: x, b: y }
        } else {
            ParaphraseLink { a: y, b: x }
        }
    }

    pub fn ends(&self) -> (&EntryRef, &EntryRef) {
        (&self.a, &self.b)
    }

    pub fn is_reflexive(&self) -> bool {
        self.a == self.b
    }

    /// The partner of `r`, if `r` is one end of the link.
    pub fn partner(&self, r: &EntryRef) -> Option<&EntryRef> {
        if &self.a == r {
            Some(&self.b)
        } else if &self.b == r {
            Some(&self.a)
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DefinitionError {
    #[error("class id is empty")]
    EmptyClassId,
    #[error("table {0} has no class definition")]
    MissingDefinition(String),
    #[error("class {0} is defined but has no table")]
    MissingTable(String),
    #[error("class {class}: table and definition disagree on category ({table} vs {definition})")]
    CategoryMismatch {
        class: String,
        table: Category,
        definition: Category,
    },
    #[error("class {0}: no base construction among the definitional properties")]
    NoConstruction(String),
    #[error("class {0}: frozen-expression class needs a construction with a frozen argument or lexical verb")]
    NoFrozenConstruction(String),
    #[error("class {class}: `{label}` is both definitional and a column")]
    Overlap { class: String, label: String },
    #[error("class {class}: `{label}` is listed twice")]
    DuplicateLabel { class: String, label: String },
    #[error("class {class}: duplicate entry `{lemma}`")]
    DuplicateEntry { class: String, lemma: String },
    #[error("class {class}: entry `{lemma}` has {found} codings for {expected} columns")]
    Arity {
        class: String,
        lemma: String,
        found: usize,
        expected: usize,
    },
    #[error("paraphrase link end {0} does not resolve to an entry")]
    DanglingLink(EntryRef),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LookupError {
    #[error("unknown class {0}")]
    UnknownClass(String),
    #[error("unknown entry {0}")]
    UnknownEntry(EntryRef),
    #[error("class {class}: `{label}` is neither definitional nor a column")]
    UnknownProperty { class: String, label: String },
}

fn check_definition(def: &ClassDefinition) -> Result<(), DefinitionError> {
    let id = &def.class_id;
    if id.is_empty() {
        return Err(DefinitionError::EmptyClassId);
    }
    let mut seen = BTreeSet::new();
    for l in &def.definitional {
        if !seen.insert(l.canonical()) {
            return Err(DefinitionError::DuplicateLabel {
                class: id.clone(),
                label: l.canonical().to_string(),
            });
        }
    }
    let constructions: Vec<_> = def
        .definitional
        .iter()
        .filter_map(PropertyLabel::as_construction)
        .collect();
    match def.category {
        Category::FrozenExpression => {
            let frozen = constructions.iter().any(|c| {
                let has_c = c.symbols().any(|s| s.kind == SlotKind::FrozenArg);
                let has_v = c.symbols().any(|s| s.kind == SlotKind::Verb);
                let has_lex = c.symbols().any(|s| s.kind == SlotKind::LexicalItem);
                has_c || (!has_v && has_lex)
            });
            if !frozen {
                return Err(DefinitionError::NoFrozenConstruction(id.clone()));
            }
        }
        _ => {
            if constructions.is_empty() {
                return Err(DefinitionError::NoConstruction(id.clone()));
            }
        }
    }
    Ok(())
}

fn check_table(table: &Table, def: &ClassDefinition) -> Result<(), DefinitionError> {
    let id = &table.class_id;
    if table.category != def.category {
        return Err(DefinitionError::CategoryMismatch {
            class: id.clone(),
            table: table.category,
            definition: def.category,
        });
    }
    let mut seen = BTreeSet::new();
    for c in &table.columns {
        if !seen.insert(c.canonical()) {
            return Err(DefinitionError::DuplicateLabel {
                class: id.clone(),
                label: c.canonical().to_string(),
            });
        }
        if def.is_definitional(c) {
            return Err(DefinitionError::Overlap {
                class: id.clone(),
                label: c.canonical().to_string(),
            });
        }
    }
    let mut keys = BTreeSet::new();
    for e in &table.entries {
        if e.codings.len() != table.columns.len() {
            return Err(DefinitionError::Arity {
                class: id.clone(),
                lemma: e.key(),
                found: e.codings.len(),
                expected: table.columns.len(),
            });
        }
        if !keys.insert(e.key()) {
            return Err(DefinitionError::DuplicateEntry {
                class: id.clone(),
                lemma: e.key(),
            });
        }
    }
    Ok(())
}

/// Every class of a lexicon: its table, its definition, and the cross-class
/// paraphrase links.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TableSet {
    pub tables: BTreeMap<String, Table>,
    pub definitions: BTreeMap<String, ClassDefinition>,
    pub links: BTreeSet<ParaphraseLink>,
}

impl TableSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn class_ids(&self) -> impl Iterator<Item = &String> {
        self.tables.keys()
    }

    pub fn table(&self, class_id: &str) -> Result<&Table, LookupError> {
        self.tables
            .get(class_id)
            .ok_or_else(|| LookupError::UnknownClass(class_id.to_string()))
    }

    pub fn definition(&self, class_id: &str) -> Result<&ClassDefinition, LookupError> {
        self.definitions
            .get(class_id)
            .ok_or_else(|| LookupError::UnknownClass(class_id.to_string()))
    }

    pub fn resolve(&self, r: &EntryRef) -> Option<&Entry> {
        self.tables.get(&r.class_id)?.entry(&r.lemma)
    }

    pub fn entry_count(&self) -> usize {
        self.tables.values().map(|t| t.entries.len()).sum()
    }

    /// Check every structural invariant.
    pub fn validate(&self) -> Result<(), DefinitionError> {
        for id in self.tables.keys() {
            if !self.definitions.contains_key(id) {
                return Err(DefinitionError::MissingDefinition(id.clone()));
            }
        }
        for (id, def) in &self.definitions {
            let table = self
                .tables
                .get(id)
                .ok_or_else(|| DefinitionError::MissingTable(id.clone()))?;
            check_definition(def)?;
            check_table(table, def)?;
        }
        for link in &self.links {
            let (a, b) = link.ends();
            for end in [a, b] {
                if self.resolve(end).is_none() {
                    return Err(DefinitionError::DanglingLink(end.clone()));
                }
            }
        }
        Ok(())
    }

    /// The coding of `label` for one entry. Definitional properties are `+`
    /// for every entry of the class.
    pub fn coding_of(&self, class_id: &str, lemma: &str, label: &PropertyLabel) -> Result<Coding, LookupError> {
        let table = self.table(class_id)?;
        let def = self.definition(class_id)?;
        let entry = table
            .entry(lemma)
            .ok_or_else(|| LookupError::UnknownEntry(EntryRef::new(class_id, lemma)))?;
        if def.implies(label) {
            return Ok(Coding::Plus);
        }
        match table.column_index(label) {
            Some(idx) => Ok(entry.codings[idx]),
            None => Err(LookupError::UnknownProperty {
                class: class_id.to_string(),
                label: label.canonical().to_string(),
            }),
        }
    }

    /// Every distinct label used anywhere in the set, canonically ordered.
    pub fn label_inventory(&self) -> BTreeSet<PropertyLabel> {
        let mut out = BTreeSet::new();
        for t in self.tables.values() {
            out.extend(t.columns.iter().cloned());
        }
        for d in self.definitions.values() {
            out.extend(d.definitional.iter().cloned());
        }
        out
    }
}

/// Labels that reference free argument `index` anywhere.
pub fn mentions_argument(label: &PropertyLabel, index: u8) -> bool {
    label_symbols(label).any(|s| s.kind == SlotKind::FreeArg && s.index == Some(index))
}

pub(crate) fn label_symbols(label: &PropertyLabel) -> Box<dyn Iterator<Item = &crate::formula::SlotSymbol> + '_> {
    use crate::formula::Realization;
    match label.body() {
        LabelBody::Construction(c) => Box::new(c.symbols()),
        LabelBody::Constraint(c) => Box::new(std::iter::once(&c.subject)),
        LabelBody::Feature(f) => Box::new(std::iter::once(&f.subject)),
        LabelBody::Equivalence(e) => {
            let rhs: Box<dyn Iterator<Item = _>> = match &e.realization {
                Realization::Constraint(c) => Box::new(std::iter::once(&c.subject)),
                Realization::Slots(s) => Box::new(s.iter()),
            };
            Box::new(e.context.iter().chain(rhs))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse_label;

    fn l(s: &str) -> PropertyLabel {
        parse_label(s).unwrap()
    }

    fn small_set() -> TableSet {
        let mut ts = TableSet::new();
        let mut t = Table::new("36DT", Category::Verb);
        t.columns = vec![l("N2 =: N-hum")];
        t.entries = vec![
            Entry::new("passer", vec![Coding::Minus]),
            Entry::new("retirer", vec![Coding::Plus]),
        ];
        ts.tables.insert("36DT".into(), t);
        ts.definitions.insert(
            "36DT".into(),
            ClassDefinition::new("36DT", Category::Verb, vec![l("N0 V N1 à N2"), l("N2 =: Nhum")]),
        );
        ts
    }

    #[test]
    fn coding_of_definitional_and_stored() {
        let ts = small_set();
        assert_eq!(ts.coding_of("36DT", "passer", &l("N0 V N1 à N2")), Ok(Coding::Plus));
        assert_eq!(ts.coding_of("36DT", "passer", &l("N2 =: N-hum")), Ok(Coding::Minus));
        assert_eq!(ts.coding_of("36DT", "retirer", &l("N2 =: N-hum")), Ok(Coding::Plus));
    }

    #[test]
    fn coding_of_errors() {
        let ts = small_set();
        assert!(matches!(
            ts.coding_of("36DT", "passer", &l("N0 =: Nhum")),
            Err(LookupError::UnknownProperty { .. })
        ));
        assert!(matches!(
            ts.coding_of("36DT", "donner", &l("N0 V N1 à N2")),
            Err(LookupError::UnknownEntry(_))
        ));
        assert!(matches!(
            ts.coding_of("99", "x", &l("V")),
            Err(LookupError::UnknownClass(_))
        ));
    }

    #[test]
    fn coding_of_expanded_definitional() {
        let mut ts = small_set();
        ts.definitions.get_mut("36DT").unwrap().definitional[0] = l("N0 V N1 (E+à N2)");
        assert_eq!(ts.coding_of("36DT", "passer", &l("N0 V N1")), Ok(Coding::Plus));
    }

    #[test]
    fn overlap_is_rejected() {
        let mut ts = small_set();
        ts.definitions
            .get_mut("36DT")
            .unwrap()
            .definitional
            .push(l("N2 = : N-hum"));
        assert!(matches!(ts.validate(), Err(DefinitionError::Overlap { .. })));
    }

    #[test]
    fn duplicate_entries_and_arity() {
        let mut ts = small_set();
        ts.tables.get_mut("36DT").unwrap().entries.push(Entry::new("passer", vec![Coding::Plus]));
        assert!(matches!(ts.validate(), Err(DefinitionError::DuplicateEntry { .. })));

        let mut ts = small_set();
        ts.tables.get_mut("36DT").unwrap().entries[0].codings.clear();
        assert!(matches!(ts.validate(), Err(DefinitionError::Arity { .. })));
    }

    #[test]
    fn usage_suffix_separates_keys() {
        let mut ts = small_set();
        ts.tables
            .get_mut("36DT")
            .unwrap()
            .entries
            .push(Entry::new("passer", vec![Coding::Plus]).with_flags(["#2"]));
        assert!(ts.validate().is_ok());
        assert!(ts.resolve(&EntryRef::new("36DT", "passer#2")).is_some());
    }

    #[test]
    fn class_needs_construction() {
        let mut ts = small_set();
        ts.definitions.get_mut("36DT").unwrap().definitional = vec![l("N2 =: Nhum")];
        assert_eq!(ts.validate(), Err(DefinitionError::NoConstruction("36DT".into())));
    }

    #[test]
    fn frozen_class_needs_frozen_slot() {
        let mut ts = TableSet::new();
        let mut t = Table::new("31I", Category::FrozenExpression);
        t.entries.push(Entry::new("pleuvoir", vec![]));
        ts.tables.insert("31I".into(), t);
        ts.definitions.insert(
            "31I".into(),
            ClassDefinition::new("31I", Category::FrozenExpression, vec![l("N0 V")]),
        );
        assert!(matches!(ts.validate(), Err(DefinitionError::NoFrozenConstruction(_))));
        ts.definitions.get_mut("31I").unwrap().definitional = vec![l("C0 V")];
        assert!(ts.validate().is_ok());
    }

    #[test]
    fn dangling_link() {
        let mut ts = small_set();
        ts.links.insert(ParaphraseLink::new(
            EntryRef::new("36DT", "passer"),
            EntryRef::new("PC", "en pratique"),
        ));
        assert!(matches!(ts.validate(), Err(DefinitionError::DanglingLink(_))));
    }

    #[test]
    fn link_is_unordered() {
        let a = EntryRef::new("PC", "en pratique");
        let b = EntryRef::new("ADVPS", "pratiquement");
        assert_eq!(ParaphraseLink::new(a.clone(), b.clone()), ParaphraseLink::new(b.clone(), a.clone()));
        assert_eq!(ParaphraseLink::new(a.clone(), b.clone()).partner(&a), Some(&b));
    }
}
