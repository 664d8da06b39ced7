use super::{
    Alternative, Constraint, Construction, DistributionValue, LabelBody, Realization,
    SlotElement, SlotKind, SlotSymbol,
};
use super::symbol::Humanness;

pub(crate) fn render_symbol(s: &SlotSymbol) -> String {
    let idx = s.index.map(|i| i.to_string()).unwrap_or_default();
    let mut out = match s.kind {
        SlotKind::FreeArg => format!("N{idx}"),
        SlotKind::FrozenArg => format!("C{idx}"),
        SlotKind::Verb => "V".into(),
        SlotKind::SupportVerb => "Vsup".into(),
        SlotKind::DeverbalNoun => "V-n".into(),
        SlotKind::Preposition => format!("Prép{idx}"),
        SlotKind::Locative => "Loc".into(),
        SlotKind::Determiner => format!("Det{idx}"),
        SlotKind::CliticPronoun => "Ppv".into(),
        SlotKind::Adverb => "Adv".into(),
        SlotKind::Remainder => "W".into(),
        SlotKind::LexicalItem => s.lexeme.clone().unwrap_or_default(),
        SlotKind::CommaBoundary => ",".into(),
        SlotKind::NegationNe => "ne".into(),
        SlotKind::NegationPas => "pas".into(),
        SlotKind::PredicateNoun => "N".into(),
        SlotKind::Modifier => "Modif".into(),
        SlotKind::Clause => format!("P{idx}"),
        SlotKind::Possessive => format!("Poss{idx}"),
    };
    match s.qualifier {
        Some(Humanness::Human) => out.push_str("hum"),
        Some(Humanness::NonHuman) => out.push_str("-hum"),
        None => {}
    }
    if let Some(role) = s.role {
        out.push(' ');
        out.push_str(role.as_str());
    }
    out
}

/// Space-separated, with commas glued to the preceding token.
fn render_seq<'a>(items: impl IntoIterator<Item = (bool, String)> + 'a) -> String {
    let mut out = String::new();
    for (is_comma, text) in items {
        if is_comma {
            out.push(',');
        } else {
            if !out.is_empty() {
                out.push(' ');
            }
            out.push_str(&text);
        }
    }
    out
}

fn symbol_item(s: &SlotSymbol) -> (bool, String) {
    (s.kind == SlotKind::CommaBoundary, render_symbol(s))
}

pub(crate) fn render_symbols(v: &[SlotSymbol]) -> String {
    render_seq(v.iter().map(symbol_item))
}

fn render_alternative(a: &Alternative) -> String {
    let body = if a.body.is_empty() {
        "E".to_string()
    } else {
        render_symbols(&a.body)
    };
    if a.starred {
        format!("*{body}")
    } else {
        body
    }
}

pub(crate) fn render_construction(c: &Construction) -> String {
    render_seq(c.slots.iter().map(|el| match el {
        SlotElement::Plain(s) => symbol_item(s),
        SlotElement::Alternation(arms) => {
            let arms: Vec<String> = arms.iter().map(render_alternative).collect();
            (false, format!("({})", arms.join("+")))
        }
    }))
}

fn render_value(v: &DistributionValue) -> &str {
    match v {
        DistributionValue::Human => "Nhum",
        DistributionValue::NonHuman => "N-hum",
        DistributionValue::Lexical(s) => s,
    }
}

fn render_constraint(c: &Constraint) -> String {
    let values: Vec<&str> = c.values.iter().map(render_value).collect();
    format!("{} =: {}", render_symbol(&c.subject), values.join("+"))
}

pub(crate) fn render_body(b: &LabelBody) -> String {
    match b {
        LabelBody::Construction(c) => render_construction(c),
        LabelBody::Constraint(c) => render_constraint(c),
        LabelBody::Equivalence(e) => {
            let rhs = match &e.realization {
                Realization::Constraint(c) => render_constraint(c),
                Realization::Slots(s) => render_symbols(s),
            };
            format!("{} = {}", render_symbols(&e.context), rhs)
        }
        LabelBody::Feature(f) => format!("{} {}", render_symbol(&f.subject), f.tag.as_str()),
    }
}
