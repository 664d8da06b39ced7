#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use lgtables::formula::{
    Alternative, Constraint, Construction, DistributionValue, Equivalence, Feature, FeatureTag,
    Humanness, LabelBody, PropertyLabel, Realization, Role, SlotElement, SlotKind, SlotSymbol,
};
use lgtables::tableset::{load_tableset, Category, ClassDefinition, Coding, Entry, Table, TableSet};
use proptest::prelude::*;

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

pub fn pristine_tables() -> PathBuf {
    fixtures().join("pristine/tables")
}

pub fn pristine_defs() -> PathBuf {
    fixtures().join("pristine/definitions.txt")
}

pub fn script() -> PathBuf {
    fixtures().join("normalize.lgt")
}

pub fn expected() -> PathBuf {
    fixtures().join("expected")
}

pub fn pristine() -> TableSet {
    load_tableset(&pristine_tables(), &pristine_defs()).expect("pristine fixtures load")
}

pub fn normalized_expected() -> TableSet {
    load_tableset(&expected().join("tables"), &expected().join("definitions.txt")).expect("expected fixtures load")
}

pub fn label(s: &str) -> PropertyLabel {
    s.parse().unwrap_or_else(|e| panic!("`{s}`: {e}"))
}

/// Every label appearing in the inventory file and in both fixture sets.
pub fn fixture_labels() -> BTreeSet<String> {
    let mut out: BTreeSet<String> = std::fs::read_to_string(fixtures().join("labels.txt"))
        .unwrap()
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(str::to_string)
        .collect();
    for ts in [pristine(), normalized_expected()] {
        out.extend(ts.label_inventory().iter().map(|l| l.raw_text().to_string()));
    }
    out
}

// Random ASTs. Lexical words avoid every reserved word of the notation.

const WORDS: &[&str] = &["avoir", "être", "en", "y", "il", "ça", "de", "un", "lui", "d'avec", "à", "convertir"];
const VALUES: &[&str] = &["Nhum", "N-hum", "lui", "avec", "d'avec", "un certain", "il", "ça", "comporter"];

fn index() -> impl Strategy<Value = u8> {
    0u8..=3
}

fn lexical() -> impl Strategy<Value = SlotSymbol> {
    prop::collection::vec(prop::sample::select(WORDS), 1..=2).prop_map(|w| SlotSymbol::lexical(w.join(" ")))
}

fn argument() -> impl Strategy<Value = SlotSymbol> {
    (
        prop::bool::ANY,
        index(),
        prop::option::of(prop::sample::select(&[Humanness::Human, Humanness::NonHuman][..])),
    )
        .prop_map(|(free, i, q)| {
            if free {
                let s = SlotSymbol::free(i);
                match q {
                    Some(q) => s.with_qualifier(q),
                    None => s,
                }
            } else {
                SlotSymbol::frozen(i)
            }
        })
}

fn optional_index(kind: SlotKind) -> impl Strategy<Value = SlotSymbol> {
    prop::option::of(index()).prop_map(move |i| SlotSymbol {
        index: i,
        ..SlotSymbol::new(kind)
    })
}

/// Any symbol a constraint may take as subject.
fn subject() -> BoxedStrategy<SlotSymbol> {
    use SlotKind::*;
    prop_oneof![
        argument(),
        optional_index(Preposition),
        optional_index(Determiner),
        optional_index(Clause),
        optional_index(Possessive),
        prop::sample::select(&[
            Verb, SupportVerb, DeverbalNoun, Locative, CliticPronoun, Adverb, Remainder, PredicateNoun, Modifier,
        ][..])
        .prop_map(SlotSymbol::new),
    ]
    .boxed()
}

fn with_role(s: SlotSymbol, role: Option<Role>) -> SlotSymbol {
    match role {
        Some(r) if r.can_decorate(s.kind) => s.with_role(r),
        _ => s,
    }
}

/// A slot symbol for a construction body; commas only when `comma`.
fn slot(comma: bool) -> BoxedStrategy<SlotSymbol> {
    let roles = prop::option::weighted(
        0.2,
        prop::sample::select(&[Role::Source, Role::Destination, Role::Apparition, Role::Disparition][..]),
    );
    let base = prop_oneof![
        4 => (subject(), roles).prop_map(|(s, r)| with_role(s, r)),
        2 => lexical(),
        1 => prop::sample::select(&[SlotKind::NegationNe, SlotKind::NegationPas][..]).prop_map(SlotSymbol::new),
    ];
    if comma {
        prop_oneof![8 => base, 1 => Just(SlotSymbol::new(SlotKind::CommaBoundary))].boxed()
    } else {
        base.boxed()
    }
}

/// Drop a lexical item that directly follows another, since the parser
/// would merge the two.
fn unmerge(v: Vec<SlotSymbol>) -> Vec<SlotSymbol> {
    let mut out: Vec<SlotSymbol> = Vec::new();
    for s in v {
        let lexical_run = s.kind == SlotKind::LexicalItem
            && out.last().is_some_and(|p| p.kind == SlotKind::LexicalItem);
        if !lexical_run {
            out.push(s);
        }
    }
    out
}

fn symbols(comma: bool, max: usize) -> impl Strategy<Value = Vec<SlotSymbol>> {
    prop::collection::vec(slot(comma), 1..=max).prop_map(unmerge)
}

fn alternation(max_arms: usize) -> impl Strategy<Value = SlotElement> {
    (
        prop::collection::vec((prop::bool::weighted(0.2), symbols(false, 3)), 2..=max_arms),
        prop::option::of((prop::bool::weighted(0.3), 0usize..4)),
    )
        .prop_map(|(arms, empty)| {
            let mut arms: Vec<Alternative> = arms
                .into_iter()
                .map(|(starred, body)| Alternative { starred, body })
                .collect();
            if let Some((starred, at)) = empty {
                let at = at.min(arms.len() - 1);
                arms[at] = Alternative {
                    starred,
                    body: Vec::new(),
                };
            }
            SlotElement::Alternation(arms)
        })
}

/// Constructions with at most `max_alts` alternations of at most `max_arms`
/// arms each.
pub fn construction(max_alts: usize, max_arms: usize) -> impl Strategy<Value = Construction> {
    (
        prop::collection::vec(symbols(true, 3), 1..=max_alts + 1),
        prop::collection::vec(alternation(max_arms), 0..=max_alts),
    )
        .prop_map(|(runs, alts)| {
            let mut slots = Vec::new();
            let mut alts = alts.into_iter();
            let mut pending: Vec<SlotSymbol> = Vec::new();
            for run in runs {
                pending.extend(run);
                if let Some(a) = alts.next() {
                    slots.extend(unmerge(std::mem::take(&mut pending)).into_iter().map(SlotElement::Plain));
                    slots.push(a);
                }
            }
            slots.extend(unmerge(pending).into_iter().map(SlotElement::Plain));
            Construction { slots }
        })
}

fn constraint() -> impl Strategy<Value = Constraint> {
    (subject(), prop::sample::subsequence(VALUES, 1..=3)).prop_map(|(subject, vals)| Constraint {
        subject,
        values: vals
            .into_iter()
            .map(|v| match v {
                "Nhum" => DistributionValue::Human,
                "N-hum" => DistributionValue::NonHuman,
                other => DistributionValue::Lexical(other.to_string()),
            })
            .collect(),
    })
}

pub fn label_body() -> impl Strategy<Value = LabelBody> {
    prop_oneof![
        4 => construction(3, 4).prop_map(LabelBody::Construction),
        2 => constraint().prop_map(LabelBody::Constraint),
        2 => (
            symbols(true, 4),
            prop_oneof![
                constraint().prop_map(Realization::Constraint),
                symbols(true, 3).prop_map(Realization::Slots),
            ],
        )
            .prop_map(|(context, realization)| LabelBody::Equivalence(Equivalence { context, realization })),
        1 => (argument(), prop::sample::select(&[FeatureTag::Apparition, FeatureTag::Disparition][..]))
            .prop_map(|(subject, tag)| LabelBody::Feature(Feature { subject, tag })),
    ]
}

/// Brute-force expansion: enumerate every index tuple over the acceptable
/// arms, concatenate, join adjacent words, render, deduplicate.
pub fn oracle_expansions(c: &Construction) -> BTreeSet<String> {
    let choices: Vec<Vec<Vec<SlotSymbol>>> = c
        .slots
        .iter()
        .map(|el| match el {
            SlotElement::Plain(s) => vec![vec![s.clone()]],
            SlotElement::Alternation(arms) => arms.iter().filter(|a| !a.starred).map(|a| a.body.clone()).collect(),
        })
        .collect();
    let total: usize = choices.iter().map(Vec::len).product();
    let mut out = BTreeSet::new();
    for mut n in 0..total {
        let mut seq: Vec<SlotSymbol> = Vec::new();
        for options in &choices {
            let pick = n % options.len();
            n /= options.len();
            for s in &options[pick] {
                match (seq.last_mut(), s.kind) {
                    (Some(prev), SlotKind::LexicalItem) if prev.kind == SlotKind::LexicalItem => {
                        let joined = format!("{} {}", prev.lexeme.as_deref().unwrap(), s.lexeme.as_deref().unwrap());
                        prev.lexeme = Some(joined);
                    }
                    _ => seq.push(s.clone()),
                }
            }
        }
        if !seq.is_empty() {
            out.insert(PropertyLabel::from_construction(Construction::plain(seq)).canonical().to_string());
        }
    }
    out
}

/// A one-class table set: construction `N0 V N1` as definitional plus up to
/// `max_cols` constraint columns with random codings. Column `force_plus`
/// (if any) is coded `+` everywhere.
pub fn random_tableset(max_entries: usize, max_cols: usize) -> impl Strategy<Value = (TableSet, Option<usize>)> {
    (1..=max_cols, 0..=max_entries).prop_flat_map(|(ncols, nrows)| {
        (
            prop::collection::vec(prop::collection::vec(0u8..3, ncols), nrows),
            prop::option::of(0..ncols),
        )
            .prop_map(move |(rows, force)| {
                let columns: Vec<PropertyLabel> =
                    (0..ncols).map(|i| label(&format!("N{} =: val{i}", i % 2))).collect();
                let mut table = Table::new("T1", Category::Verb);
                table.columns = columns;
                for (r, cells) in rows.iter().enumerate() {
                    let codings = cells
                        .iter()
                        .enumerate()
                        .map(|(c, v)| match (Some(c) == force, v) {
                            (true, _) | (false, 0) => Coding::Plus,
                            (false, 1) => Coding::Minus,
                            _ => Coding::Uncoded,
                        })
                        .collect();
                    table.entries.push(Entry::new(format!("lemme{r}"), codings));
                }
                let mut ts = TableSet::new();
                ts.definitions.insert(
                    "T1".into(),
                    ClassDefinition::new("T1", Category::Verb, vec![label("N0 V N1")]),
                );
                ts.tables.insert("T1".into(), table);
                (ts, force)
            })
    })
}

pub fn lemmas(ts: &TableSet, class: &str) -> Vec<String> {
    ts.tables[class].entries.iter().map(|e| e.lemma.clone()).collect()
}

/// Run the bundled script over the pristine fixtures and write everything
/// the expected directory holds into `dir`.
pub fn replay_into(dir: &Path) -> TableSet {
    use lgtables::lexicon::{flatten, render, ExportFormat};
    use lgtables::normalizer::apply_script;
    use lgtables::tableset::save_tableset;

    let (ts, report) = apply_script(&pristine(), &script()).expect("script applies");
    save_tableset(&ts, dir).unwrap();
    std::fs::write(dir.join("report.jsonl"), report.to_jsonl()).unwrap();
    let records = flatten(&ts);
    for f in [ExportFormat::Text, ExportFormat::Structured] {
        std::fs::write(dir.join(f.file_name()), render(&records, f)).unwrap();
    }
    ts
}

fn files_under(root: &Path) -> BTreeSet<PathBuf> {
    let mut out = BTreeSet::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.insert(p.strip_prefix(root).unwrap().to_path_buf());
            }
        }
    }
    out
}

/// Relative paths that are missing on one side or differ in content.
pub fn dir_differences(a: &Path, b: &Path) -> Vec<String> {
    let (fa, fb) = (files_under(a), files_under(b));
    let mut out: Vec<String> = fa.symmetric_difference(&fb).map(|p| format!("only on one side: {}", p.display())).collect();
    for p in fa.intersection(&fb) {
        if std::fs::read(a.join(p)).unwrap() != std::fs::read(b.join(p)).unwrap() {
            out.push(format!("differs: {}", p.display()));
        }
    }
    out
}
