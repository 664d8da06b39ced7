use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SlotKind {
    /// `N0`..`N3`
    FreeArg,
    /// `C0`..`C3`
    FrozenArg,
    /// `V`
    Verb,
    /// `Vsup`
    SupportVerb,
    /// `V-n`
    DeverbalNoun,
    /// `Prép`, `Prép2`
    Preposition,
    /// `Loc`
    Locative,
    /// `Det`, `Det1`
    Determiner,
    /// `Ppv`
    CliticPronoun,
    /// `Adv`
    Adverb,
    /// `W`
    Remainder,
    LexicalItem,
    /// `,` after a fronted adverb
    CommaBoundary,
    /// `ne`
    NegationNe,
    /// `pas`
    NegationPas,
    /// bare `N`, the predicative noun of a support-verb construction
    PredicateNoun,
    /// `Modif`
    Modifier,
    /// `P1`, `P2`
    Clause,
    /// `Poss0`
    Possessive,
}

impl SlotKind {
    /// Kinds whose index is an argument position checked by licensing.
    pub fn is_argument(self) -> bool {
        matches!(self, SlotKind::FreeArg | SlotKind::FrozenArg)
    }

    fn takes_index(self) -> bool {
        matches!(
            self,
            SlotKind::FreeArg
                | SlotKind::FrozenArg
                | SlotKind::Preposition
                | SlotKind::Determiner
                | SlotKind::Clause
                | SlotKind::Possessive
        )
    }
}

/// Annotation attached to the argument slot just before it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Role {
    Source,
    Destination,
    Apparition,
    Disparition,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::Source => "source",
            Role::Destination => "destination",
            Role::Apparition => "apparition",
            Role::Disparition => "disparition",
        }
    }

    pub fn from_word(w: &str) -> Option<Role> {
        match w {
            "source" => Some(Role::Source),
            "destination" => Some(Role::Destination),
            "apparition" => Some(Role::Apparition),
            "disparition" => Some(Role::Disparition),
            _ => None,
        }
    }

    pub fn feature_tag(self) -> Option<super::FeatureTag> {
        match self {
            Role::Apparition => Some(super::FeatureTag::Apparition),
            Role::Disparition => Some(super::FeatureTag::Disparition),
            _ => None,
        }
    }

    /// Source/destination only decorate free arguments; features also apply
    /// to frozen ones.
    pub fn can_decorate(self, kind: SlotKind) -> bool {
        match self {
            Role::Source | Role::Destination => kind == SlotKind::FreeArg,
            Role::Apparition | Role::Disparition => kind.is_argument(),
        }
    }
}

/// `hum` / `-hum` suffix on a free argument, as in `Prép N2hum`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Humanness {
    Human,
    NonHuman,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SlotSymbol {
    pub kind: SlotKind,
    pub index: Option<u8>,
    pub lexeme: Option<String>,
    pub role: Option<Role>,
    pub qualifier: Option<Humanness>,
}

pub const MAX_INDEX: u8 = 3;

impl SlotSymbol {
    pub fn new(kind: SlotKind) -> Self {
        SlotSymbol {
            kind,
            index: None,
            lexeme: None,
            role: None,
            qualifier: None,
        }
    }

    pub fn indexed(kind: SlotKind, index: u8) -> Self {
        SlotSymbol {
            index: Some(index),
            ..Self::new(kind)
        }
    }

    pub fn free(index: u8) -> Self {
        Self::indexed(SlotKind::FreeArg, index)
    }

    pub fn frozen(index: u8) -> Self {
        Self::indexed(SlotKind::FrozenArg, index)
    }

    pub fn lexical(lexeme: impl Into<String>) -> Self {
        SlotSymbol {
            lexeme: Some(lexeme.into()),
            ..Self::new(SlotKind::LexicalItem)
        }
    }

    pub fn with_role(mut self, role: Role) -> Self {
        self.role = Some(role);
        self
    }

    pub fn with_qualifier(mut self, q: Humanness) -> Self {
        self.qualifier = Some(q);
        self
    }

    /// Kind plus index, dropping role, qualifier and lexeme.
    pub fn bare(&self) -> SlotSymbol {
        SlotSymbol {
            kind: self.kind,
            index: self.index,
            lexeme: self.lexeme.clone(),
            role: None,
            qualifier: None,
        }
    }

    /// Argument-position key: `(kind, index)` for indexed N/C/Prép/Det symbols.
    pub fn reference_key(&self) -> Option<(SlotKind, u8)> {
        match (self.kind, self.index) {
            (
                k @ (SlotKind::FreeArg
                | SlotKind::FrozenArg
                | SlotKind::Preposition
                | SlotKind::Determiner),
                Some(i),
            ) => Some((k, i)),
            _ => None,
        }
    }

    /// Check the per-symbol invariants.
    pub fn check(&self) -> Result<(), String> {
        if let Some(i) = self.index {
            if !self.kind.takes_index() {
                return Err(format!("{:?} cannot carry an index", self.kind));
            }
            if i > MAX_INDEX {
                return Err(format!("index {i} out of range 0..={MAX_INDEX}"));
            }
        }
        if self.kind.is_argument() && self.index.is_none() {
            return Err(format!("{:?} requires an index", self.kind));
        }
        match (&self.lexeme, self.kind) {
            (Some(l), SlotKind::LexicalItem) => {
                if l.is_empty() {
                    return Err("empty lexeme".into());
                }
                for w in l.split(' ') {
                    if classify_word(w) != Ok(WordClass::Lexical) {
                        return Err(format!("`{w}` is not a plain lexical word"));
                    }
                }
            }
            (None, SlotKind::LexicalItem) => return Err("lexical item without lexeme".into()),
            (Some(_), k) => return Err(format!("{k:?} cannot carry a lexeme")),
            (None, _) => {}
        }
        if let Some(r) = self.role {
            if !r.can_decorate(self.kind) {
                return Err(format!("`{}` cannot decorate {:?}", r.as_str(), self.kind));
            }
        }
        if self.qualifier.is_some() && self.kind != SlotKind::FreeArg {
            return Err("humanness qualifier only applies to free arguments".into());
        }
        Ok(())
    }
}

/// What a single whitespace-delimited word of the notation denotes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum WordClass {
    Symbol(SlotSymbol),
    Role(Role),
    /// `E`, the empty alternation arm.
    Empty,
    Lexical,
}

fn split_index(rest: &str) -> Result<(Option<u8>, &str), String> {
    let digits = rest.chars().take_while(|c| c.is_ascii_digit()).count();
    if digits == 0 {
        return Ok((None, rest));
    }
    let (num, tail) = rest.split_at(digits);
    match num.parse::<u8>() {
        Ok(i) if i <= MAX_INDEX && digits == 1 => Ok((Some(i), tail)),
        _ => Err(format!("index {num} out of range 0..={MAX_INDEX}")),
    }
}

pub(crate) fn classify_word(w: &str) -> Result<WordClass, String> {
    use SlotKind::*;
    let simple = |k| Ok(WordClass::Symbol(SlotSymbol::new(k)));
    match w {
        "E" => return Ok(WordClass::Empty),
        "V" => return simple(Verb),
        "Vsup" => return simple(SupportVerb),
        "V-n" => return simple(DeverbalNoun),
        "Loc" => return simple(Locative),
        "Ppv" => return simple(CliticPronoun),
        "Adv" => return simple(Adverb),
        "W" => return simple(Remainder),
        "Modif" => return simple(Modifier),
        "N" => return simple(PredicateNoun),
        "ne" => return simple(NegationNe),
        "pas" => return simple(NegationPas),
        _ => {}
    }
    if let Some(role) = Role::from_word(w) {
        return Ok(WordClass::Role(role));
    }
    // Longest prefixes first so `Poss0` is not read as `P` + garbage.
    const PREFIXES: &[(&str, SlotKind, bool)] = &[
        ("Prép", Preposition, false),
        ("Prep", Preposition, false),
        ("Poss", Possessive, false),
        ("Det", Determiner, false),
        ("N", FreeArg, true),
        ("C", FrozenArg, true),
        ("P", Clause, false),
    ];
    for &(prefix, kind, needs_index) in PREFIXES {
        let Some(rest) = w.strip_prefix(prefix) else {
            continue;
        };
        let starts_with_digit = rest.chars().next().is_some_and(|c| c.is_ascii_digit());
        if needs_index && !starts_with_digit {
            continue;
        }
        if !needs_index && !rest.is_empty() && !starts_with_digit {
            continue;
        }
        let (index, tail) = split_index(rest)?;
        let mut sym = SlotSymbol {
            index,
            ..SlotSymbol::new(kind)
        };
        match (kind, tail) {
            (_, "") => {}
            (FreeArg, "hum") => sym.qualifier = Some(Humanness::Human),
            (FreeArg, "-hum") => sym.qualifier = Some(Humanness::NonHuman),
            _ => return Err(format!("unknown symbol `{w}`")),
        }
        return Ok(WordClass::Symbol(sym));
    }
    let first = w.chars().next().ok_or_else(|| "empty word".to_string())?;
    if !first.is_alphabetic() {
        return Err(format!("unknown symbol `{w}`"));
    }
    if first.is_ascii_uppercase() && w.chars().any(|c| c.is_ascii_digit()) {
        return Err(format!("unknown symbol `{w}`"));
    }
    if !w
        .chars()
        .all(|c| c.is_alphanumeric() || matches!(c, '-' | '\'' | '’' | '.'))
    {
        return Err(format!("unknown symbol `{w}`"));
    }
    Ok(WordClass::Lexical)
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}
