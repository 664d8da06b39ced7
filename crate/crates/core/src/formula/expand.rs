use std::collections::BTreeMap;

use super::{print, Construction, SlotElement, SlotKind, SlotSymbol};

/// All plain constructions obtained by picking one acceptable arm per
/// alternation. Starred arms are skipped, `E` contributes nothing, adjacent
/// lexical words are merged, and choices that collapse to an empty slot
/// sequence are dropped. Output is deduplicated and sorted canonically.
pub fn expand_alternations(c: &Construction) -> Vec<Construction> {
    if c.is_plain() {
        return vec![c.clone()];
    }
    let mut partial: Vec<Vec<SlotSymbol>> = vec![Vec::new()];
    for el in &c.slots {
        match el {
            SlotElement::Plain(s) => {
                for p in &mut partial {
                    p.push(s.clone());
                }
            }
            SlotElement::Alternation(arms) => {
                let live: Vec<_> = arms.iter().filter(|a| !a.starred).collect();
                partial = partial
                    .iter()
                    .flat_map(|p| {
                        live.iter().map(move |arm| {
                            let mut next = p.clone();
                            next.extend(arm.body.iter().cloned());
                            next
                        })
                    })
                    .collect();
            }
        }
    }
    let mut out: BTreeMap<String, Construction> = BTreeMap::new();
    for symbols in partial {
        let symbols = merge_lexical(symbols);
        if symbols.is_empty() {
            continue;
        }
        let c = Construction::plain(symbols);
        out.entry(print::render_construction(&c)).or_insert(c);
    }
    out.into_values().collect()
}

pub(crate) fn merge_lexical(symbols: Vec<SlotSymbol>) -> Vec<SlotSymbol> {
    let mut out: Vec<SlotSymbol> = Vec::with_capacity(symbols.len());
    for s in symbols {
        if s.kind == SlotKind::LexicalItem {
            if let Some(prev) = out.last_mut() {
                if prev.kind == SlotKind::LexicalItem {
                    let lex = prev.lexeme.get_or_insert_with(String::new);
                    lex.push(' ');
                    lex.push_str(s.lexeme.as_deref().unwrap_or_default());
                    continue;
                }
            }
        }
        out.push(s);
    }
    out
}
