//! Splitting a locative class by source/destination behaviour.
//!
//! Each entry is routed from three codings (source construction, destination
//! construction, dependent source) and, when neither locative complement is
//! accepted, from a `static` or `residual` flag set by a lexicographer.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::formula::{
    Construction, LabelBody, PropertyLabel, Realization, Role, SlotKind, SlotSymbol,
};
use crate::tableset::{
    mentions_argument, ClassDefinition, Coding, DefinitionError, Entry, Table, TableSet,
};

pub const STATIC_FLAG: &str = "static";
pub const RESIDUAL_FLAG: &str = "residual";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RouteKey {
    BothIndependent,
    BothDependentSource,
    SourceOnly,
    DestOnly,
    Static,
    Residual,
}

impl RouteKey {
    pub const ALL: [RouteKey; 6] = [
        RouteKey::BothIndependent,
        RouteKey::BothDependentSource,
        RouteKey::SourceOnly,
        RouteKey::DestOnly,
        RouteKey::Static,
        RouteKey::Residual,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RouteKey::BothIndependent => "BothIndependent",
            RouteKey::BothDependentSource => "BothDependentSource",
            RouteKey::SourceOnly => "SourceOnly",
            RouteKey::DestOnly => "DestOnly",
            RouteKey::Static => "Static",
            RouteKey::Residual => "Residual",
        }
    }
}

impl fmt::Display for RouteKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// The script-level target names. `both` covers both "both" routes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TargetSlot {
    Both,
    SourceOnly,
    DestOnly,
    Static,
    Residual,
}

impl TargetSlot {
    pub const ALL: [TargetSlot; 5] = [
        TargetSlot::Both,
        TargetSlot::SourceOnly,
        TargetSlot::DestOnly,
        TargetSlot::Static,
        TargetSlot::Residual,
    ];

    pub fn of(route: RouteKey) -> TargetSlot {
        match route {
            RouteKey::BothIndependent | RouteKey::BothDependentSource => TargetSlot::Both,
            RouteKey::SourceOnly => TargetSlot::SourceOnly,
            RouteKey::DestOnly => TargetSlot::DestOnly,
            RouteKey::Static => TargetSlot::Static,
            RouteKey::Residual => TargetSlot::Residual,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            TargetSlot::Both => "both",
            TargetSlot::SourceOnly => "srconly",
            TargetSlot::DestOnly => "dstonly",
            TargetSlot::Static => "static",
            TargetSlot::Residual => "residual",
        }
    }
}

impl FromStr for TargetSlot {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        TargetSlot::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| format!("unknown split target `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitTarget {
    pub class_id: String,
    /// Explicit definitional list; derived from the locative columns when absent.
    pub definitional: Option<Vec<PropertyLabel>>,
}

impl SplitTarget {
    pub fn new(class_id: impl Into<String>) -> Self {
        SplitTarget {
            class_id: class_id.into(),
            definitional: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitSpec {
    pub source_class: String,
    /// The first complement is obligatorily human (`N1 =: Nhum`).
    pub human_n1: bool,
    pub source_column: PropertyLabel,
    pub dest_column: PropertyLabel,
    pub dependent_column: PropertyLabel,
    pub targets: BTreeMap<TargetSlot, SplitTarget>,
}

/// The codings and flags a route was computed from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Evidence {
    pub source: Coding,
    pub dest: Coding,
    pub dependent: Coding,
    pub static_flag: bool,
    pub residual_flag: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoutingDecision {
    pub lemma: String,
    pub route: RouteKey,
    pub evidence: Evidence,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Unroutable {
    #[error("`{0}` is not coded")]
    Uncoded(&'static str),
    #[error("accepts neither locative complement but is flagged neither static nor residual")]
    Unflagged,
    #[error("flagged both static and residual")]
    FlagConflict,
    #[error("flagged {0} but accepts a locative complement")]
    MisplacedFlag(&'static str),
}

/// Pure routing function over the evidence.
pub fn route_from_evidence(ev: &Evidence) -> Result<RouteKey, Unroutable> {
    use Coding::*;
    if ev.static_flag && ev.residual_flag {
        return Err(Unroutable::FlagConflict);
    }
    if ev.source == Uncoded {
        return Err(Unroutable::Uncoded("source"));
    }
    if ev.dest == Uncoded {
        return Err(Unroutable::Uncoded("destination"));
    }
    let flagged = if ev.static_flag {
        Some(STATIC_FLAG)
    } else if ev.residual_flag {
        Some(RESIDUAL_FLAG)
    } else {
        None
    };
    match (ev.source, ev.dest) {
        (Minus, Minus) => match flagged {
            Some(STATIC_FLAG) => Ok(RouteKey::Static),
            Some(_) => Ok(RouteKey::Residual),
            None => Err(Unroutable::Unflagged),
        },
        _ if flagged.is_some() => Err(Unroutable::MisplacedFlag(flagged.unwrap_or_default())),
        (Plus, Plus) => match ev.dependent {
            Minus => Ok(RouteKey::BothIndependent),
            Plus => Ok(RouteKey::BothDependentSource),
            Uncoded => Err(Unroutable::Uncoded("dependent source")),
        },
        (Plus, _) => Ok(RouteKey::SourceOnly),
        _ => Ok(RouteKey::DestOnly),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SplitError {
    #[error("unknown class {0}")]
    UnknownClass(String),
    #[error("class {class}: no column `{label}`")]
    MissingColumn { class: String, label: String },
    #[error("invalid split specification: {0}")]
    InvalidSpec(String),
    #[error("unroutable entries: {}", .0.iter().map(|(l, r)| format!("{l} ({r})")).collect::<Vec<_>>().join(", "))]
    UnroutableEntry(Vec<(String, Unroutable)>),
    #[error("`N1 =: N-hum` is coded + for: {}", .0.join(", "))]
    HumanConstraintViolated(Vec<String>),
    #[error("target {class}: {message}")]
    TargetConflict { class: String, message: String },
    #[error(transparent)]
    Definition(#[from] DefinitionError),
}

fn column(table: &Table, label: &PropertyLabel) -> Result<usize, SplitError> {
    table.column_index(label).ok_or_else(|| SplitError::MissingColumn {
        class: table.class_id.clone(),
        label: label.canonical().to_string(),
    })
}

pub fn route_entry(spec: &SplitSpec, entry: &Entry, table: &Table) -> Result<RoutingDecision, SplitError> {
    let src = column(table, &spec.source_column)?;
    let dst = column(table, &spec.dest_column)?;
    let dep = column(table, &spec.dependent_column)?;
    let evidence = Evidence {
        source: entry.codings[src],
        dest: entry.codings[dst],
        dependent: entry.codings[dep],
        static_flag: entry.has_flag(STATIC_FLAG),
        residual_flag: entry.has_flag(RESIDUAL_FLAG),
    };
    let route = route_from_evidence(&evidence)
        .map_err(|r| SplitError::UnroutableEntry(vec![(entry.key(), r)]))?;
    Ok(RoutingDecision {
        lemma: entry.key(),
        route,
        evidence,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SplitReport {
    pub decisions: Vec<RoutingDecision>,
    /// Argument index renumbering applied in the destination-only target.
    pub renumber: BTreeMap<u8, u8>,
    /// Entry count received by each target class.
    pub received: BTreeMap<String, usize>,
}

impl SplitReport {
    pub fn summary(&self) -> String {
        let routes: Vec<String> = self
            .decisions
            .iter()
            .map(|d| format!("{}={}", d.lemma, d.route))
            .collect();
        let renumber: Vec<String> = self.renumber.iter().map(|(a, b)| format!("N{a}->N{b}")).collect();
        let received: Vec<String> = self.received.iter().map(|(c, n)| format!("{c}:{n}")).collect();
        format!(
            "routes [{}]; renumber [{}]; received [{}]",
            routes.join(", "),
            renumber.join(", "),
            received.join(", ")
        )
    }
}

fn plain_symbols(label: &PropertyLabel, what: &str) -> Result<Vec<SlotSymbol>, SplitError> {
    label
        .as_construction()
        .and_then(Construction::plain_symbols)
        .map(|v| v.into_iter().cloned().collect())
        .ok_or_else(|| SplitError::InvalidSpec(format!("{what} column `{label}` is not a plain construction")))
}

fn role_index(symbols: &[SlotSymbol], role: Role, what: &str) -> Result<u8, SplitError> {
    symbols
        .iter()
        .find(|s| s.role == Some(role) && s.kind == SlotKind::FreeArg)
        .and_then(|s| s.index)
        .ok_or_else(|| SplitError::InvalidSpec(format!("{what} column has no argument marked {role}")))
}

fn strip_roles(symbols: &[SlotSymbol]) -> Vec<SlotSymbol> {
    symbols
        .iter()
        .map(|s| SlotSymbol { role: None, ..s.clone() })
        .collect()
}

fn construction(symbols: Vec<SlotSymbol>) -> PropertyLabel {
    PropertyLabel::from_construction(Construction::plain(symbols))
}

/// Source slots followed by the destination group: the destination column's
/// slots after the common prefix, backed off to include its locative preposition.
fn combined(src: &[SlotSymbol], dst: &[SlotSymbol]) -> Vec<SlotSymbol> {
    let mut k = src.iter().zip(dst).take_while(|(a, b)| a == b).count();
    while k > 0 && matches!(dst[k - 1].kind, SlotKind::Locative | SlotKind::Preposition) {
        k -= 1;
    }
    src.iter().chain(&dst[k..]).cloned().collect()
}

fn renumber_symbol(s: &SlotSymbol, map: &BTreeMap<u8, u8>) -> SlotSymbol {
    let mut out = s.clone();
    if s.reference_key().is_some() {
        if let Some(i) = s.index.and_then(|i| map.get(&i)) {
            out.index = Some(*i);
        }
    }
    out
}

/// Rewrite argument indices in every slot of a label.
pub fn renumber_label(label: &PropertyLabel, map: &BTreeMap<u8, u8>) -> PropertyLabel {
    if map.is_empty() {
        return label.clone();
    }
    let f = |s: &SlotSymbol| renumber_symbol(s, map);
    let body = match label.body() {
        LabelBody::Construction(c) => LabelBody::Construction(c.map_symbols(f)),
        LabelBody::Constraint(c) => {
            let mut c = c.clone();
            c.subject = f(&c.subject);
            LabelBody::Constraint(c)
        }
        LabelBody::Feature(x) => {
            let mut x = x.clone();
            x.subject = f(&x.subject);
            LabelBody::Feature(x)
        }
        LabelBody::Equivalence(e) => {
            let mut e = e.clone();
            e.context = e.context.iter().map(f).collect();
            e.realization = match &e.realization {
                Realization::Constraint(c) => {
                    let mut c = c.clone();
                    c.subject = f(&c.subject);
                    Realization::Constraint(c)
                }
                Realization::Slots(v) => Realization::Slots(v.iter().map(f).collect()),
            };
            LabelBody::Equivalence(e)
        }
    };
    PropertyLabel::from_body(body)
}

struct Plan {
    definitional: Vec<PropertyLabel>,
    /// Source column indices kept, in order.
    keep: Vec<usize>,
    columns: Vec<PropertyLabel>,
}

fn human_constraint() -> (PropertyLabel, PropertyLabel) {
    let minus: PropertyLabel = "N1 =: N-hum".parse().expect("static label");
    let plus: PropertyLabel = "N1 =: Nhum".parse().expect("static label");
    (minus, plus)
}

/// Split a class per `spec`. All entries are routed before anything changes;
/// targets that receive no entry are not created, and targets that already
/// exist (other than the source itself) are merged into.
pub fn split_class(ts: &TableSet, spec: &SplitSpec) -> Result<(TableSet, SplitReport), SplitError> {
    let id = &spec.source_class;
    let table = ts.tables.get(id).ok_or_else(|| SplitError::UnknownClass(id.clone()))?;
    let def = ts.definitions.get(id).ok_or_else(|| SplitError::UnknownClass(id.clone()))?;

    let mut decisions = Vec::new();
    let mut failures = Vec::new();
    for e in &table.entries {
        match route_entry(spec, e, table) {
            Ok(d) => {
                if !spec.targets.contains_key(&TargetSlot::of(d.route)) {
                    return Err(SplitError::InvalidSpec(format!(
                        "entry `{}` routes to {} but no {} target is given",
                        d.lemma,
                        d.route,
                        TargetSlot::of(d.route).as_str()
                    )));
                }
                decisions.push(d);
            }
            Err(SplitError::UnroutableEntry(mut v)) => failures.append(&mut v),
            Err(other) => return Err(other),
        }
    }
    if !failures.is_empty() {
        return Err(SplitError::UnroutableEntry(failures));
    }

    let mut seen = BTreeSet::new();
    for t in spec.targets.values() {
        if !seen.insert(&t.class_id) {
            return Err(SplitError::InvalidSpec(format!("target class {} used twice", t.class_id)));
        }
    }

    let src = plain_symbols(&spec.source_column, "source")?;
    let dst = plain_symbols(&spec.dest_column, "destination")?;
    let src_idx = role_index(&src, Role::Source, "source")?;
    let dst_idx = role_index(&dst, Role::Destination, "destination")?;
    if src_idx == dst_idx {
        return Err(SplitError::InvalidSpec(format!(
            "source and destination share argument index {src_idx}"
        )));
    }
    let base = construction(strip_roles(&src));
    let base_at = def.definitional.iter().position(|d| d == &base).ok_or_else(|| {
        SplitError::InvalidSpec(format!("`{base}` is not definitional in {id}"))
    })?;

    let (n1_nonhum, n1_hum) = human_constraint();
    let human_col = if spec.human_n1 {
        let idx = column(table, &n1_nonhum)?;
        let bad: Vec<String> = table
            .entries
            .iter()
            .filter(|e| e.codings[idx] == Coding::Plus)
            .map(Entry::key)
            .collect();
        if !bad.is_empty() {
            return Err(SplitError::HumanConstraintViolated(bad));
        }
        Some(idx)
    } else {
        None
    };

    let locative_cols = [
        column(table, &spec.source_column)?,
        column(table, &spec.dest_column)?,
        column(table, &spec.dependent_column)?,
    ];
    let renumber: BTreeMap<u8, u8> = [(dst_idx, src_idx)].into();

    let plan_for = |slot: TargetSlot| -> Plan {
        let new_base = match slot {
            TargetSlot::Both => construction(combined(&src, &dst)),
            TargetSlot::SourceOnly => construction(src.clone()),
            TargetSlot::DestOnly => renumber_label(&construction(dst.clone()), &renumber),
            TargetSlot::Static | TargetSlot::Residual => base.clone(),
        };
        // Argument index that no longer exists in this target.
        let gone = match slot {
            TargetSlot::Both => None,
            TargetSlot::DestOnly => Some(src_idx),
            _ => Some(dst_idx),
        };
        let map = if slot == TargetSlot::DestOnly {
            renumber.clone()
        } else {
            BTreeMap::new()
        };
        let keep_label = |l: &PropertyLabel| gone.is_none_or(|g| !mentions_argument(l, g));

        let mut definitional = Vec::new();
        for (i, d) in def.definitional.iter().enumerate() {
            if i == base_at {
                definitional.push(new_base.clone());
            } else if keep_label(d) {
                definitional.push(renumber_label(d, &map));
            }
        }
        if spec.human_n1 && !definitional.contains(&n1_hum) {
            definitional.push(n1_hum.clone());
        }

        let mut keep = Vec::new();
        let mut columns = Vec::new();
        for (i, c) in table.columns.iter().enumerate() {
            // The both class keeps its single-argument columns and the dependency column.
            let locative = slot != TargetSlot::Both && locative_cols.contains(&i);
            if locative || Some(i) == human_col || !keep_label(c) {
                continue;
            }
            let c = renumber_label(c, &map);
            if definitional.contains(&c) {
                continue;
            }
            keep.push(i);
            columns.push(c);
        }
        Plan {
            definitional,
            keep,
            columns,
        }
    };

    let mut out = ts.clone();
    out.tables.remove(id);
    out.definitions.remove(id);

    let mut received = BTreeMap::new();
    let mut renumber_used = BTreeMap::new();
    for slot in TargetSlot::ALL {
        let entries: Vec<&Entry> = table
            .entries
            .iter()
            .zip(&decisions)
            .filter(|(_, d)| TargetSlot::of(d.route) == slot)
            .map(|(e, _)| e)
            .collect();
        if entries.is_empty() {
            continue;
        }
        let target = &spec.targets[&slot];
        let mut plan = plan_for(slot);
        if let Some(explicit) = &target.definitional {
            plan.definitional = explicit.clone();
        }
        if slot == TargetSlot::DestOnly {
            renumber_used = renumber.clone();
        }
        let rows: Vec<Entry> = entries
            .iter()
            .map(|e| Entry {
                lemma: e.lemma.clone(),
                codings: plan.keep.iter().map(|&i| e.codings[i]).collect(),
                flags: e.flags.clone(),
            })
            .collect();
        received.insert(target.class_id.clone(), rows.len());
        merge_target(&mut out, &target.class_id, def, plan, rows)?;
    }
    out.validate()?;
    Ok((
        out,
        SplitReport {
            decisions,
            renumber: renumber_used,
            received,
        },
    ))
}

fn merge_target(
    ts: &mut TableSet,
    class_id: &str,
    source: &ClassDefinition,
    plan: Plan,
    rows: Vec<Entry>,
) -> Result<(), SplitError> {
    let conflict = |message: String| SplitError::TargetConflict {
        class: class_id.to_string(),
        message,
    };
    let Some(existing) = ts.tables.get_mut(class_id) else {
        let mut table = Table::new(class_id, source.category);
        table.columns = plan.columns;
        table.entries = rows;
        ts.tables.insert(class_id.to_string(), table);
        let mut def = ClassDefinition::new(class_id, source.category, plan.definitional);
        def.notes = source.notes.clone();
        ts.definitions.insert(class_id.to_string(), def);
        return Ok(());
    };
    let def = &ts.definitions[class_id];
    let have: BTreeSet<_> = def.definitional.iter().collect();
    let want: BTreeSet<_> = plan.definitional.iter().collect();
    if have != want {
        return Err(conflict(format!(
            "existing definitional properties differ from the split's ({})",
            plan.definitional.iter().map(|l| l.canonical()).collect::<Vec<_>>().join("; ")
        )));
    }
    if existing.category != source.category {
        return Err(conflict("category differs".into()));
    }
    for c in &plan.columns {
        if existing.column_index(c).is_none() {
            existing.push_column(c.clone(), |_| Coding::Uncoded);
        }
    }
    let positions: Vec<Option<usize>> = existing
        .columns
        .iter()
        .map(|c| plan.columns.iter().position(|p| p == c))
        .collect();
    for row in rows {
        if existing.entry(&row.key()).is_some() {
            return Err(conflict(format!("already has entry `{}`", row.key())));
        }
        let codings = positions
            .iter()
            .map(|p| p.map_or(Coding::Uncoded, |i| row.codings[i]))
            .collect();
        existing.entries.push(Entry {
            lemma: row.lemma,
            codings,
            flags: row.flags,
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse_label;
    use crate::tableset::Category;
    use Coding::*;

    fn l(s: &str) -> PropertyLabel {
        parse_label(s).unwrap()
    }

    fn ev(source: Coding, dest: Coding, dependent: Coding, st: bool, res: bool) -> Evidence {
        Evidence {
            source,
            dest,
            dependent,
            static_flag: st,
            residual_flag: res,
        }
    }

    #[test]
    fn routing_table() {
        assert_eq!(route_from_evidence(&ev(Plus, Plus, Minus, false, false)), Ok(RouteKey::BothIndependent));
        assert_eq!(route_from_evidence(&ev(Plus, Plus, Plus, false, false)), Ok(RouteKey::BothDependentSource));
        assert_eq!(route_from_evidence(&ev(Plus, Minus, Uncoded, false, false)), Ok(RouteKey::SourceOnly));
        assert_eq!(route_from_evidence(&ev(Minus, Plus, Minus, false, false)), Ok(RouteKey::DestOnly));
        assert_eq!(route_from_evidence(&ev(Minus, Minus, Uncoded, true, false)), Ok(RouteKey::Static));
        assert_eq!(route_from_evidence(&ev(Minus, Minus, Minus, false, true)), Ok(RouteKey::Residual));
        assert_eq!(route_from_evidence(&ev(Minus, Minus, Minus, false, false)), Err(Unroutable::Unflagged));
        assert_eq!(route_from_evidence(&ev(Minus, Minus, Minus, true, true)), Err(Unroutable::FlagConflict));
        assert!(route_from_evidence(&ev(Uncoded, Plus, Minus, false, false)).is_err());
        assert!(route_from_evidence(&ev(Plus, Plus, Uncoded, false, false)).is_err());
        assert!(route_from_evidence(&ev(Plus, Minus, Minus, true, false)).is_err());
    }

    fn fixture_35l() -> TableSet {
        let mut ts = TableSet::new();
        let mut t = Table::new("35L", Category::Verb);
        t.columns = vec![
            l("N0 =: Nhum"),
            l("N0 V Loc N1 source"),
            l("N0 V Loc N2 destination"),
            l("N1 source dépendante"),
            l("N2 =: N-hum"),
        ];
        let row = |lemma: &str, c: [Coding; 5], flags: &[&str]| {
            Entry::new(lemma, c.to_vec()).with_flags(flags.iter().copied())
        };
        t.entries = vec![
            row("bondir", [Plus, Plus, Plus, Minus, Plus], &[]),
            row("cheminer", [Plus, Plus, Plus, Plus, Minus], &[]),
            row("dérailler", [Minus, Plus, Minus, Uncoded, Minus], &[]),
            row("s'enfoncer", [Plus, Minus, Plus, Minus, Plus], &[]),
            row("sortir", [Minus, Minus, Minus, Minus, Minus], &["static"]),
            row("patauger", [Plus, Minus, Minus, Minus, Minus], &["residual"]),
        ];
        ts.tables.insert("35L".into(), t);
        ts.definitions.insert(
            "35L".into(),
            ClassDefinition::new("35L", Category::Verb, vec![l("N0 V Loc N1")]),
        );
        ts.validate().unwrap();
        ts
    }

    fn spec_35l() -> SplitSpec {
        SplitSpec {
            source_class: "35L".into(),
            human_n1: false,
            source_column: l("N0 V Loc N1 source"),
            dest_column: l("N0 V Loc N2 destination"),
            dependent_column: l("N1 source dépendante"),
            targets: [
                (TargetSlot::Both, SplitTarget::new("35L")),
                (TargetSlot::SourceOnly, SplitTarget::new("35LS")),
                (TargetSlot::DestOnly, SplitTarget::new("35LD")),
                (TargetSlot::Static, SplitTarget::new("35ST")),
                (TargetSlot::Residual, SplitTarget::new("35LR")),
            ]
            .into(),
        }
    }

    fn lemmas(ts: &TableSet, id: &str) -> Vec<String> {
        ts.tables[id].entries.iter().map(Entry::key).collect()
    }

    #[test]
    fn splits_35l() {
        let (out, report) = split_class(&fixture_35l(), &spec_35l()).unwrap();
        assert_eq!(lemmas(&out, "35L"), ["bondir", "cheminer"]);
        assert_eq!(lemmas(&out, "35LS"), ["dérailler"]);
        assert_eq!(lemmas(&out, "35LD"), ["s'enfoncer"]);
        assert_eq!(lemmas(&out, "35ST"), ["sortir"]);
        assert_eq!(lemmas(&out, "35LR"), ["patauger"]);
        assert_eq!(out.entry_count(), 6);
        assert_eq!(report.renumber, BTreeMap::from([(2, 1)]));

        let defs = |id: &str| -> Vec<String> {
            out.definitions[id].definitional.iter().map(|d| d.canonical().to_string()).collect()
        };
        assert_eq!(defs("35L"), ["N0 V Loc N1 source Loc N2 destination"]);
        assert_eq!(defs("35LS"), ["N0 V Loc N1 source"]);
        assert_eq!(defs("35LD"), ["N0 V Loc N1 destination"]);
        assert_eq!(defs("35ST"), ["N0 V Loc N1"]);

        let cols = |id: &str| -> Vec<String> {
            out.tables[id].columns.iter().map(|d| d.canonical().to_string()).collect()
        };
        assert_eq!(
            cols("35L"),
            ["N0 =: Nhum", "N0 V Loc N1 source", "N0 V Loc N2 destination", "N1 source dépendante", "N2 =: N-hum"]
        );
        assert_eq!(cols("35LS"), ["N0 =: Nhum"]);
        assert_eq!(cols("35LD"), ["N0 =: Nhum", "N1 =: N-hum"]);
        assert_eq!(out.tables["35LD"].entries[0].codings, [Plus, Plus]);
    }

    #[test]
    fn unflagged_minus_minus_is_refused() {
        let mut ts = fixture_35l();
        ts.tables.get_mut("35L").unwrap().entries[4].flags.clear();
        match split_class(&ts, &spec_35l()) {
            Err(SplitError::UnroutableEntry(v)) => assert_eq!(v[0].0, "sortir"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn merges_into_existing_target() {
        let ts = fixture_35l();
        let (mut out, _) = split_class(&ts, &spec_35l()).unwrap();
        // A second source class feeding the same static target.
        let mut t = ts.tables["35L"].clone();
        t.class_id = "35X".into();
        t.entries.retain(|e| e.has_flag("static"));
        t.entries[0].lemma = "habiter".into();
        out.tables.insert("35X".into(), t);
        let mut d = ts.definitions["35L"].clone();
        d.class_id = "35X".into();
        out.definitions.insert("35X".into(), d);
        let mut spec = spec_35l();
        spec.source_class = "35X".into();
        spec.targets.remove(&TargetSlot::Both);
        let (merged, _) = split_class(&out, &spec).unwrap();
        assert_eq!(lemmas(&merged, "35ST"), ["sortir", "habiter"]);
    }

    #[test]
    fn renumbers_every_label_kind() {
        let map = BTreeMap::from([(3u8, 2u8)]);
        for (from, to) in [
            ("N0 V N1 Loc N3 destination", "N0 V N1 Loc N2 destination"),
            ("N3 =: N-hum", "N2 =: N-hum"),
            ("Prép N3hum = Ppv =: lui", "Prép N2hum = Ppv =: lui"),
            ("N3 apparition", "N2 apparition"),
            ("N1 =: Nhum", "N1 =: Nhum"),
        ] {
            assert_eq!(renumber_label(&l(from), &map).canonical(), to);
        }
    }

    #[test]
    fn combined_construction_keeps_locative() {
        let src = plain_symbols(&l("N0 V N1 Loc N2 source"), "").unwrap();
        let dst = plain_symbols(&l("N0 V N1 Loc N3 destination"), "").unwrap();
        assert_eq!(
            construction(combined(&src, &dst)).canonical(),
            "N0 V N1 Loc N2 source Loc N3 destination"
        );
    }
}
