//! Property-label notation: the AST, its parser, the canonical printer and
//! the alternation expander.
//!
//! A label is one of four shapes:
//!
//! * a construction, e.g. `N0 V Loc N1 source Loc N2 destination`
//! * a distributional constraint, e.g. `Prép =: avec+d'avec`
//! * an equivalence, e.g. `Prép N2hum = Ppv =: lui`
//! * a feature, e.g. `N1 apparition`
//!
//! The grammar is documented in `docs/notation.md`.

mod expand;
mod parser;
mod print;
mod symbol;

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};

pub use expand::expand_alternations;
pub use parser::{parse_label, SyntaxError};
pub use symbol::{Humanness, Role, SlotKind, SlotSymbol};

/// One position of a construction.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum SlotElement {
    Plain(SlotSymbol),
    Alternation(Vec<Alternative>),
}

/// One arm of a `(a+b+E)` alternation. An empty body is the `E` arm.
/// A starred arm (`*E`, `*Modif`) is listed but unacceptable, so it never
/// contributes to an expansion.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Alternative {
    pub starred: bool,
    pub body: Vec<SlotSymbol>,
}

impl Alternative {
    pub fn empty() -> Self {
        Alternative {
            starred: false,
            body: Vec::new(),
        }
    }

    pub fn of(body: Vec<SlotSymbol>) -> Self {
        Alternative {
            starred: false,
            body,
        }
    }

    pub fn starred(mut self) -> Self {
        self.starred = true;
        self
    }

    pub fn is_empty(&self) -> bool {
        self.body.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Construction {
    pub slots: Vec<SlotElement>,
}

impl Construction {
    pub fn plain(symbols: Vec<SlotSymbol>) -> Self {
        Construction {
            slots: symbols.into_iter().map(SlotElement::Plain).collect(),
        }
    }

    /// A construction without any alternation.
    pub fn is_plain(&self) -> bool {
        self.slots
            .iter()
            .all(|s| matches!(s, SlotElement::Plain(_)))
    }

    pub fn alternation_count(&self) -> usize {
        self.slots
            .iter()
            .filter(|s| matches!(s, SlotElement::Alternation(_)))
            .count()
    }

    /// Every symbol of the construction, including those inside alternation arms.
    pub fn symbols(&self) -> impl Iterator<Item = &SlotSymbol> {
        self.slots.iter().flat_map(|el| -> Box<dyn Iterator<Item = &SlotSymbol>> {
            match el {
                SlotElement::Plain(s) => Box::new(std::iter::once(s)),
                SlotElement::Alternation(arms) => Box::new(arms.iter().flat_map(|a| a.body.iter())),
            }
        })
    }

    /// Symbols of a plain construction, in order. `None` if any alternation remains.
    pub fn plain_symbols(&self) -> Option<Vec<&SlotSymbol>> {
        self.slots
            .iter()
            .map(|el| match el {
                SlotElement::Plain(s) => Some(s),
                SlotElement::Alternation(_) => None,
            })
            .collect()
    }

    /// Apply `f` to every symbol, alternation arms included.
    pub fn map_symbols(&self, mut f: impl FnMut(&SlotSymbol) -> SlotSymbol) -> Construction {
        let slots = self
            .slots
            .iter()
            .map(|el| match el {
                SlotElement::Plain(s) => SlotElement::Plain(f(s)),
                SlotElement::Alternation(arms) => SlotElement::Alternation(
                    arms.iter()
                        .map(|a| Alternative {
                            starred: a.starred,
                            body: a.body.iter().map(&mut f).collect(),
                        })
                        .collect(),
                ),
            })
            .collect();
        Construction { slots }
    }
}

/// A distribution value on the right of `=:`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum DistributionValue {
    /// `Nhum`
    Human,
    /// `N-hum`
    NonHuman,
    Lexical(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Constraint {
    pub subject: SlotSymbol,
    pub values: Vec<DistributionValue>,
}

/// Right-hand side of an equivalence: either a constraint (`Ppv =: lui`) or a
/// bare slot sequence (`convertir en V-n`).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Realization {
    Constraint(Constraint),
    Slots(Vec<SlotSymbol>),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Equivalence {
    pub context: Vec<SlotSymbol>,
    pub realization: Realization,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FeatureTag {
    Apparition,
    Disparition,
}

impl FeatureTag {
    pub fn as_str(self) -> &'static str {
        match self {
            FeatureTag::Apparition => "apparition",
            FeatureTag::Disparition => "disparition",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Feature {
    pub subject: SlotSymbol,
    pub tag: FeatureTag,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum LabelBody {
    Construction(Construction),
    Constraint(Constraint),
    Equivalence(Equivalence),
    Feature(Feature),
}

impl LabelBody {
    pub fn kind_name(&self) -> &'static str {
        match self {
            LabelBody::Construction(_) => "construction",
            LabelBody::Constraint(_) => "constraint",
            LabelBody::Equivalence(_) => "equivalence",
            LabelBody::Feature(_) => "feature",
        }
    }
}

/// A parsed column header or definitional property.
///
/// Equality, ordering and hashing go through the canonical rendering, so two
/// labels written with different spacing or operator spellings compare equal.
/// `raw_text` keeps the source string for diagnostics only.
#[derive(Debug, Clone)]
pub struct PropertyLabel {
    body: LabelBody,
    raw_text: String,
    canonical: String,
}

impl PropertyLabel {
    pub(crate) fn with_raw(body: LabelBody, raw_text: String) -> Self {
        let body = normalize_body(body);
        let canonical = print::render_body(&body);
        PropertyLabel {
            body,
            raw_text,
            canonical,
        }
    }

    /// Build a label from an AST; the raw text is the canonical rendering.
    pub fn from_body(body: LabelBody) -> Self {
        let body = normalize_body(body);
        let canonical = print::render_body(&body);
        PropertyLabel {
            raw_text: canonical.clone(),
            body,
            canonical,
        }
    }

    pub fn from_construction(c: Construction) -> Self {
        Self::from_body(LabelBody::Construction(c))
    }

    pub fn body(&self) -> &LabelBody {
        &self.body
    }

    pub fn raw_text(&self) -> &str {
        &self.raw_text
    }

    pub fn canonical(&self) -> &str {
        &self.canonical
    }

    pub fn as_construction(&self) -> Option<&Construction> {
        match &self.body {
            LabelBody::Construction(c) => Some(c),
            _ => None,
        }
    }

    pub fn is_construction(&self) -> bool {
        self.as_construction().is_some()
    }

    /// Expand a construction label into its plain variants; other labels
    /// expand to themselves.
    pub fn expanded(&self) -> Vec<PropertyLabel> {
        match &self.body {
            LabelBody::Construction(c) if !c.is_plain() => expand_alternations(c)
                .into_iter()
                .map(PropertyLabel::from_construction)
                .collect(),
            _ => vec![self.clone()],
        }
    }
}

/// A lone argument slot carrying a feature annotation reads as a feature.
fn normalize_body(body: LabelBody) -> LabelBody {
    if let LabelBody::Construction(c) = &body {
        if let [SlotElement::Plain(sym)] = c.slots.as_slice() {
            if let Some(tag) = sym.role.and_then(Role::feature_tag) {
                let mut subject = sym.clone();
                subject.role = None;
                return LabelBody::Feature(Feature { subject, tag });
            }
        }
    }
    body
}

/// Canonical single-space rendering of a label.
pub fn print_canonical(label: &PropertyLabel) -> String {
    label.canonical.clone()
}

impl PartialEq for PropertyLabel {
    fn eq(&self, other: &Self) -> bool {
        self.canonical == other.canonical
    }
}

impl Eq for PropertyLabel {}

impl Hash for PropertyLabel {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.canonical.hash(state);
    }
}

impl PartialOrd for PropertyLabel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for PropertyLabel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.canonical.cmp(&other.canonical)
    }
}

impl fmt::Display for PropertyLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.canonical)
    }
}

impl std::str::FromStr for PropertyLabel {
    type Err = SyntaxError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_label(s)
    }
}

impl fmt::Display for Construction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print::render_construction(self))
    }
}

impl fmt::Display for SlotSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print::render_symbol(self))
    }
}

/// Short structural description used by `lgt parse`.
pub fn ast_summary(label: &PropertyLabel) -> String {
    fn sym(s: &SlotSymbol) -> String {
        let mut out = format!("{:?}", s.kind);
        if let Some(i) = s.index {
            out.push_str(&format!("({i})"));
        }
        if let Some(l) = &s.lexeme {
            out.push_str(&format!("({l:?})"));
        }
        if let Some(q) = s.qualifier {
            out.push_str(&format!("[{q:?}]"));
        }
        if let Some(r) = s.role {
            out.push_str(&format!("[{r:?}]"));
        }
        out
    }
    fn seq(v: &[SlotSymbol]) -> String {
        v.iter().map(sym).collect::<Vec<_>>().join(" ")
    }
    fn constraint(c: &Constraint) -> String {
        let vals: Vec<String> = c
            .values
            .iter()
            .map(|v| match v {
                DistributionValue::Human => "Nhum".to_string(),
                DistributionValue::NonHuman => "N-hum".to_string(),
                DistributionValue::Lexical(s) => format!("{s:?}"),
            })
            .collect();
        format!("{} := {{{}}}", sym(&c.subject), vals.join(", "))
    }
    match label.body() {
        LabelBody::Construction(c) => {
            let parts: Vec<String> = c
                .slots
                .iter()
                .map(|el| match el {
                    SlotElement::Plain(s) => sym(s),
                    SlotElement::Alternation(arms) => {
                        let arms: Vec<String> = arms
                            .iter()
                            .map(|a| {
                                let body = if a.is_empty() { "E".to_string() } else { seq(&a.body) };
                                if a.starred {
                                    format!("*{body}")
                                } else {
                                    body
                                }
                            })
                            .collect();
                        format!("Alt{{{}}}", arms.join(" | "))
                    }
                })
                .collect();
            format!("Construction[{}]", parts.join(", "))
        }
        LabelBody::Constraint(c) => format!("Constraint({})", constraint(c)),
        LabelBody::Equivalence(e) => {
            let rhs = match &e.realization {
                Realization::Constraint(c) => constraint(c),
                Realization::Slots(s) => seq(s),
            };
            format!("Equivalence([{}] = {})", seq(&e.context), rhs)
        }
        LabelBody::Feature(ft) => format!("Feature({}, {:?})", sym(&ft.subject), ft.tag),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equality_ignores_raw_spelling() {
        let a = parse_label("Prép = : avec").unwrap();
        let b = parse_label("Prep =: avec").unwrap();
        assert_eq!(a, b);
        assert_ne!(a.raw_text(), b.raw_text());
        assert_eq!(a.canonical(), "Prép =: avec");
    }

    #[test]
    fn single_annotated_slot_is_a_feature() {
        let c = Construction::plain(vec![SlotSymbol::free(2).with_role(Role::Apparition)]);
        let label = PropertyLabel::from_construction(c);
        assert!(matches!(label.body(), LabelBody::Feature(_)));
        assert_eq!(label.canonical(), "N2 apparition");
    }

    #[test]
    fn expanded_leaves_non_constructions_alone() {
        let l = parse_label("N1 =: Nhum").unwrap();
        assert_eq!(l.expanded(), vec![l.clone()]);
    }
}
