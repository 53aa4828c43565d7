//! Restricted SVO grammar: `SUBJ VERB OBJ` and `SUBJ VERB OBJ PREP PREP_OBJ`.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::lexicon::{Lexicon, Role};

/// Syntactic role assigned to a token by the grammar.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Tag {
    Subj,
    Verb,
    Obj,
    Prep,
    PrepObj,
}

/// A parsed sentence: lowercase tokens (noun chunks may contain spaces) with
/// one tag per token.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sentence {
    pub tokens: Vec<String>,
    pub tags: Vec<Tag>,
}

impl Sentence {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn has_prep(&self) -> bool {
        self.tags.contains(&Tag::Prep)
    }

    /// The same sentence with tokens in a different order; tags follow
    /// their tokens. Only meaningful for order-free readers.
    pub fn permuted(&self, order: &[usize]) -> Sentence {
        Sentence {
            tokens: order.iter().map(|&i| self.tokens[i].clone()).collect(),
            tags: order.iter().map(|&i| self.tags[i]).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("parse error at token {position}: {message}")]
pub struct ParseError {
    pub position: usize,
    pub message: String,
}

const PATTERN: [Tag; 5] = [Tag::Subj, Tag::Verb, Tag::Obj, Tag::Prep, Tag::PrepObj];

/// Parses `text` against the SVO(+PP) patterns. Unknown words are accepted in
/// noun slots; verbs and prepositions must come from the lexicon.
pub fn parse_svo(text: &str, lexicon: &Lexicon) -> Result<Sentence, ParseError> {
    let tokens = lexicon.chunk(text);
    if tokens.is_empty() {
        return Err(ParseError {
            position: 0,
            message: "empty sentence".into(),
        });
    }
    for (pos, token) in tokens.iter().enumerate() {
        let Some(&slot) = PATTERN.get(pos) else {
            return Err(ParseError {
                position: pos,
                message: format!("unexpected token `{token}` after the sentence"),
            });
        };
        let role = lexicon.role(token);
        let ok = match slot {
            Tag::Subj | Tag::Obj | Tag::PrepObj => matches!(role, None | Some(Role::Noun)),
            Tag::Verb => role == Some(Role::Verb),
            Tag::Prep => role == Some(Role::Prep),
        };
        if !ok {
            return Err(ParseError {
                position: pos,
                message: format!(
                    "expected {}, found {} `{token}`",
                    slot_name(slot),
                    role_name(role)
                ),
            });
        }
    }
    match tokens.len() {
        3 | 5 => {}
        n => {
            return Err(ParseError {
                position: n,
                message: format!("unexpected end of sentence, expected {}", slot_name(PATTERN[n])),
            })
        }
    }
    let tags = PATTERN[..tokens.len()].to_vec();
    Ok(Sentence { tokens, tags })
}

fn slot_name(tag: Tag) -> &'static str {
    match tag {
        Tag::Subj => "a subject noun",
        Tag::Verb => "a verb",
        Tag::Obj => "an object noun",
        Tag::Prep => "a preposition",
        Tag::PrepObj => "a noun after the preposition",
    }
}

fn role_name(role: Option<Role>) -> &'static str {
    match role {
        None => "unknown word",
        Some(Role::Noun) => "noun",
        Some(Role::Verb) => "verb",
        Some(Role::Prep) => "preposition",
    }
}
