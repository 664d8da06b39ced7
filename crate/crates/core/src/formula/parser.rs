//! Recursive-descent parser for property labels.
//!
//! ```text
//! label        = equivalence | constraint | construction ;
//! equivalence  = slots "=" ( constraint | slots ) ;
//! constraint   = symbol "=:" value { "+" value } ;
//! construction = element { element } ;
//! element      = slot | "," | "(" arm "+" arm { "+" arm } ")" ;
//! arm          = [ "*" ] ( "E" | slot { slot } ) ;
//! slot         = symbol [ role ] | word { word } ;
//! ```
//!
//! `= :` is accepted as a spelling of `=:`. A construction made of a single
//! argument followed by `apparition` or `disparition` is a feature.

use std::fmt;

use thiserror::Error;

use super::symbol::{classify_word, WordClass};
use super::{
    Alternative, Constraint, Construction, DistributionValue, Equivalence, LabelBody,
    PropertyLabel, Realization, SlotElement, SlotKind, SlotSymbol,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct SyntaxError {
    /// Byte offset into the input.
    pub offset: usize,
    pub message: String,
    pub expected: Vec<&'static str>,
}

impl fmt::Display for SyntaxError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "at byte {}: {}", self.offset, self.message)?;
        if !self.expected.is_empty() {
            write!(f, " (expected one of: {})", self.expected.join(", "))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    LParen,
    RParen,
    Plus,
    Star,
    Comma,
    /// `=:` or `= :`
    Assign,
    /// lone `=`
    Equals,
    Word(String),
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Plus => "`+`".into(),
            Tok::Star => "`*`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Assign => "`=:`".into(),
            Tok::Equals => "`=`".into(),
            Tok::Word(w) => format!("`{w}`"),
        }
    }
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    offset: usize,
}

fn is_special(c: char) -> bool {
    c.is_whitespace() || matches!(c, '(' | ')' | '+' | '*' | ',' | '=' | ':')
}

fn lex(text: &str) -> Result<Vec<Spanned>, SyntaxError> {
    let mut out = Vec::new();
    let mut chars = text.char_indices().peekable();
    while let Some(&(offset, c)) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
            continue;
        }
        let tok = match c {
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '+' => Tok::Plus,
            '*' => Tok::Star,
            ',' => Tok::Comma,
            ':' => {
                return Err(SyntaxError {
                    offset,
                    message: "stray `:`".into(),
                    expected: vec!["`=:`"],
                })
            }
            '=' => {
                chars.next();
                while chars.peek().is_some_and(|&(_, c)| c.is_whitespace() && c != '\n') {
                    chars.next();
                }
                if chars.peek().is_some_and(|&(_, c)| c == ':') {
                    chars.next();
                    out.push(Spanned {
                        tok: Tok::Assign,
                        offset,
                    });
                } else {
                    out.push(Spanned {
                        tok: Tok::Equals,
                        offset,
                    });
                }
                continue;
            }
            _ => {
                let mut word = String::new();
                while let Some(&(_, c)) = chars.peek() {
                    if is_special(c) {
                        break;
                    }
                    word.push(c);
                    chars.next();
                }
                out.push(Spanned {
                    tok: Tok::Word(word),
                    offset,
                });
                continue;
            }
        };
        chars.next();
        out.push(Spanned { tok, offset });
    }
    Ok(out)
}

struct Parser<'a> {
    toks: &'a [Spanned],
    pos: usize,
    end: usize,
}

const SLOT_START: &[&str] = &["symbol", "word", "`(`", "`,`"];

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&'a Spanned> {
        self.toks.get(self.pos)
    }

    fn offset(&self) -> usize {
        self.peek().map_or(self.end, |t| t.offset)
    }

    fn err(&self, message: impl Into<String>, expected: &[&'static str]) -> SyntaxError {
        SyntaxError {
            offset: self.offset(),
            message: message.into(),
            expected: expected.to_vec(),
        }
    }

    fn unexpected(&self, expected: &[&'static str]) -> SyntaxError {
        match self.peek() {
            Some(t) => self.err(format!("unexpected {}", t.tok.describe()), expected),
            None => self.err("unexpected end of label", expected),
        }
    }

    /// A run of slots; alternations only when `allow_alt`. Stops at `=`, `=:`,
    /// `)`, `+` or end of input.
    fn slot_run(&mut self, allow_alt: bool, allow_comma: bool) -> Result<Vec<SlotElement>, SyntaxError> {
        let mut out: Vec<SlotElement> = Vec::new();
        while let Some(t) = self.peek() {
            match &t.tok {
                Tok::Word(w) => {
                    let class = classify_word(w).map_err(|m| SyntaxError {
                        offset: t.offset,
                        message: m,
                        expected: SLOT_START.to_vec(),
                    })?;
                    match class {
                        WordClass::Symbol(sym) => out.push(SlotElement::Plain(sym)),
                        WordClass::Lexical => push_lexical(&mut out, w),
                        WordClass::Empty => {
                            return Err(SyntaxError {
                                offset: t.offset,
                                message: "`E` is only valid as a whole alternation arm".into(),
                                expected: SLOT_START.to_vec(),
                            })
                        }
                        WordClass::Role(role) => {
                            let target = match out.last_mut() {
                                Some(SlotElement::Plain(s))
                                    if s.role.is_none() && role.can_decorate(s.kind) =>
                                {
                                    s
                                }
                                _ => {
                                    return Err(SyntaxError {
                                        offset: t.offset,
                                        message: format!(
                                            "annotation `{}` must follow an argument slot",
                                            role.as_str()
                                        ),
                                        expected: vec!["argument slot"],
                                    })
                                }
                            };
                            target.role = Some(role);
                        }
                    }
                    self.pos += 1;
                }
                Tok::Comma if allow_comma => {
                    out.push(SlotElement::Plain(SlotSymbol::new(SlotKind::CommaBoundary)));
                    self.pos += 1;
                }
                Tok::LParen if allow_alt => {
                    let alt = self.alternation()?;
                    out.push(alt);
                }
                Tok::Equals | Tok::Assign | Tok::RParen | Tok::Plus => break,
                _ => return Err(self.unexpected(SLOT_START)),
            }
        }
        Ok(out)
    }

    fn alternation(&mut self) -> Result<SlotElement, SyntaxError> {
        let open = self.offset();
        self.pos += 1; // (
        let mut arms = Vec::new();
        loop {
            let starred = matches!(self.peek().map(|t| &t.tok), Some(Tok::Star));
            if starred {
                self.pos += 1;
            }
            let arm_start = self.offset();
            let is_empty_marker = matches!(self.peek().map(|t| &t.tok), Some(Tok::Word(w)) if w == "E");
            let body = if is_empty_marker {
                self.pos += 1;
                Vec::new()
            } else {
                let slots = self.slot_run(false, false)?;
                if slots.is_empty() {
                    return Err(match self.peek() {
                        Some(Spanned { tok: Tok::Plus | Tok::RParen, .. }) => SyntaxError {
                            offset: arm_start,
                            message: "empty alternation arm (write `E`)".into(),
                            expected: vec!["`E`", "symbol", "word"],
                        },
                        _ => self.unexpected(&["`E`", "symbol", "word"]),
                    });
                }
                slots
                    .into_iter()
                    .map(|el| match el {
                        SlotElement::Plain(s) => s,
                        SlotElement::Alternation(_) => unreachable!("nested alternation"),
                    })
                    .collect()
            };
            arms.push(Alternative { starred, body });
            match self.peek().map(|t| &t.tok) {
                Some(Tok::Plus) => self.pos += 1,
                Some(Tok::RParen) => {
                    self.pos += 1;
                    break;
                }
                Some(Tok::LParen) => return Err(self.err("nested alternation", &["`+`", "`)`"])),
                None => {
                    return Err(SyntaxError {
                        offset: open,
                        message: "unbalanced parenthesis".into(),
                        expected: vec!["`)`"],
                    })
                }
                _ => return Err(self.unexpected(&["`+`", "`)`"])),
            }
        }
        if arms.len() < 2 {
            return Err(SyntaxError {
                offset: open,
                message: "alternation needs at least two arms".into(),
                expected: vec!["`+`"],
            });
        }
        if arms.iter().filter(|a| a.is_empty()).count() > 1 {
            return Err(SyntaxError {
                offset: open,
                message: "alternation has more than one `E` arm".into(),
                expected: vec![],
            });
        }
        Ok(SlotElement::Alternation(arms))
    }

    fn plain_slots(&mut self, what: &str) -> Result<Vec<SlotSymbol>, SyntaxError> {
        let start = self.offset();
        let els = self.slot_run(false, true)?;
        if els.is_empty() {
            return Err(SyntaxError {
                offset: start,
                message: format!("empty {what}"),
                expected: vec!["symbol", "word"],
            });
        }
        Ok(els
            .into_iter()
            .map(|el| match el {
                SlotElement::Plain(s) => s,
                SlotElement::Alternation(_) => unreachable!(),
            })
            .collect())
    }

    /// `subject =: v1+v2`, with the cursor on the subject word.
    fn constraint(&mut self) -> Result<Constraint, SyntaxError> {
        let subj_off = self.offset();
        let subject = match self.peek().map(|t| &t.tok) {
            Some(Tok::Word(w)) => match classify_word(w) {
                Ok(WordClass::Symbol(s))
                    if !matches!(
                        s.kind,
                        SlotKind::CommaBoundary | SlotKind::NegationNe | SlotKind::NegationPas
                    ) =>
                {
                    s
                }
                Ok(_) => {
                    return Err(SyntaxError {
                        offset: subj_off,
                        message: format!("`{w}` cannot be constrained"),
                        expected: vec!["symbol"],
                    })
                }
                Err(m) => {
                    return Err(SyntaxError {
                        offset: subj_off,
                        message: m,
                        expected: vec!["symbol"],
                    })
                }
            },
            _ => return Err(self.unexpected(&["symbol"])),
        };
        self.pos += 1;
        match self.peek().map(|t| &t.tok) {
            Some(Tok::Assign) => self.pos += 1,
            _ => return Err(self.unexpected(&["`=:`"])),
        }
        let mut values: Vec<DistributionValue> = Vec::new();
        loop {
            let val_off = self.offset();
            let mut words = Vec::new();
            while let Some(Spanned { tok: Tok::Word(w), .. }) = self.peek() {
                words.push(w.as_str());
                self.pos += 1;
            }
            if words.is_empty() {
                return Err(SyntaxError {
                    offset: val_off,
                    message: "constraint with an empty value".into(),
                    expected: vec!["value"],
                });
            }
            let text = words.join(" ");
            let value = match text.as_str() {
                "Nhum" => DistributionValue::Human,
                "N-hum" => DistributionValue::NonHuman,
                _ => DistributionValue::Lexical(text),
            };
            if values.contains(&value) {
                return Err(SyntaxError {
                    offset: val_off,
                    message: "duplicate value in constraint".into(),
                    expected: vec![],
                });
            }
            values.push(value);
            match self.peek().map(|t| &t.tok) {
                Some(Tok::Plus) => self.pos += 1,
                None => break,
                _ => return Err(self.unexpected(&["`+`", "end of label"])),
            }
        }
        Ok(Constraint { subject, values })
    }
}

/// Merge consecutive plain words into one lexical item.
fn push_lexical(out: &mut Vec<SlotElement>, word: &str) {
    if let Some(SlotElement::Plain(prev)) = out.last_mut() {
        if prev.kind == SlotKind::LexicalItem {
            let lex = prev.lexeme.get_or_insert_with(String::new);
            lex.push(' ');
            lex.push_str(word);
            return;
        }
    }
    out.push(SlotElement::Plain(SlotSymbol::lexical(word)));
}

/// Parse one property label.
pub fn parse_label(text: &str) -> Result<PropertyLabel, SyntaxError> {
    let toks = lex(text)?;
    if toks.is_empty() {
        return Err(SyntaxError {
            offset: 0,
            message: "empty label".into(),
            expected: SLOT_START.to_vec(),
        });
    }
    let mut p = Parser {
        toks: &toks,
        pos: 0,
        end: text.len(),
    };
    let has_equals = toks.iter().any(|t| t.tok == Tok::Equals);
    let has_assign = toks.iter().any(|t| t.tok == Tok::Assign);
    let body = if has_equals {
        let context = p.plain_slots("equivalence context")?;
        match p.peek().map(|t| &t.tok) {
            Some(Tok::Equals) => p.pos += 1,
            _ => return Err(p.unexpected(&["`=`"])),
        }
        let realization = if has_assign {
            Realization::Constraint(p.constraint()?)
        } else {
            let slots = p.plain_slots("equivalence right-hand side")?;
            if p.peek().is_some() {
                return Err(p.unexpected(&["end of label"]));
            }
            Realization::Slots(slots)
        };
        LabelBody::Equivalence(Equivalence {
            context,
            realization,
        })
    } else if has_assign {
        LabelBody::Constraint(p.constraint()?)
    } else {
        let slots = p.slot_run(true, true)?;
        if p.peek().is_some() {
            let t = p.peek().unwrap();
            return Err(match t.tok {
                Tok::RParen => p.err("unbalanced parenthesis", &["`(`"]),
                _ => p.unexpected(SLOT_START),
            });
        }
        LabelBody::Construction(Construction { slots })
    };
    Ok(PropertyLabel::with_raw(body, text.to_string()))
}
