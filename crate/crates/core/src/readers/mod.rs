//! Sentence → diagram readers for the five compositional models.

mod grammar;
mod lexicon;

pub use grammar::{parse_svo, ParseError, Sentence, Tag};
pub use lexicon::{Lexicon, LexiconError, Role};

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::diagram::{pregroup_reduce, Atom, Diagram, DiagramError, Morphism, PregroupType};

/// Compositional model used to turn a sentence into a diagram.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReaderKind {
    Discocat,
    Spider,
    Cups,
    Stairs,
    Tree,
}

impl ReaderKind {
    pub const ALL: [ReaderKind; 5] = [
        ReaderKind::Discocat,
        ReaderKind::Spider,
        ReaderKind::Cups,
        ReaderKind::Stairs,
        ReaderKind::Tree,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ReaderKind::Discocat => "discocat",
            ReaderKind::Spider => "spider",
            ReaderKind::Cups => "cups",
            ReaderKind::Stairs => "stairs",
            ReaderKind::Tree => "tree",
        }
    }
}

impl fmt::Display for ReaderKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ReaderKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ReaderKind::ALL
            .into_iter()
            .find(|k| k.name() == s.to_lowercase())
            .ok_or_else(|| alloc::format!("unknown reader `{s}`"))
    }
}

/// Reader switches.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReaderOptions {
    /// Type prepositions with the `p` atom and attach the phrase to the verb
    /// (`verb: n^r·s·p^l·n^l`, `prep: p·n^l`). When off, a preposition is a
    /// noun modifier `n^r·n·n^l` folded into the object chunk.
    pub explicit_prep: bool,
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum ReadError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("the {reader} reader needs at least {needed} tokens, got {got}")]
    TooShort {
        reader: ReaderKind,
        needed: usize,
        got: usize,
    },
    #[error("sentence does not reduce to `s` (remainder {0})")]
    Ungrammatical(PregroupType),
    #[error(transparent)]
    Diagram(#[from] DiagramError),
}

/// Parses `text` and reads it with `kind`.
pub fn read_text(
    kind: ReaderKind,
    text: &str,
    lexicon: &Lexicon,
    opts: ReaderOptions,
) -> Result<Diagram, ReadError> {
    let sentence = parse_svo(text, lexicon)?;
    read(kind, &sentence, opts)
}

pub fn read(kind: ReaderKind, s: &Sentence, opts: ReaderOptions) -> Result<Diagram, ReadError> {
    match kind {
        ReaderKind::Discocat => read_discocat(s, opts),
        ReaderKind::Spider => read_spider(s),
        ReaderKind::Cups => read_cups(s),
        ReaderKind::Stairs => read_stairs(s),
        ReaderKind::Tree => read_tree(s),
    }
}

fn box_name(token: &str) -> String {
    token.replace(' ', "_")
}

fn words(s: &Sentence, types: impl Fn(usize) -> PregroupType) -> Diagram {
    s.tokens
        .iter()
        .enumerate()
        .fold(Diagram::empty(), |d, (i, tok)| {
            d.tensor(&Diagram::from_box(Morphism::word(box_name(tok), types(i))))
        })
}

/// Applies the cups of a pregroup reduction to `d`, whose codomain is the
/// concatenated word types.
fn reduce(d: Diagram) -> Result<Diagram, ReadError> {
    let reduction = pregroup_reduce(d.cod());
    if reduction.remainder.atoms() != [Atom::S] {
        return Err(ReadError::Ungrammatical(reduction.remainder));
    }
    let offsets = reduction.cup_offsets(d.cod().len());
    offsets
        .into_iter()
        .try_fold(d, |d, at| d.add_cup(at, at + 1))
        .map_err(ReadError::from)
}

/// Grammar-driven reader: words carry pregroup types and cups wire them.
pub fn read_discocat(s: &Sentence, opts: ReaderOptions) -> Result<Diagram, ReadError> {
    let (n, sent, p) = (Atom::N, Atom::S, Atom::P);
    let explicit = opts.explicit_prep && s.has_prep();
    let types = |i: usize| -> PregroupType {
        let atoms: Vec<Atom> = match s.tags[i] {
            Tag::Subj | Tag::Obj | Tag::PrepObj => alloc::vec![n],
            Tag::Verb if explicit => alloc::vec![n.r(), sent, p.l(), n.l()],
            Tag::Verb => alloc::vec![n.r(), sent, n.l()],
            Tag::Prep if explicit => alloc::vec![p, n.l()],
            Tag::Prep => alloc::vec![n.r(), n, n.l()],
        };
        PregroupType::new(atoms)
    };
    reduce(words(s, types))
}

/// Bag-of-words reader: every word is a sentence state, merged by one spider.
pub fn read_spider(s: &Sentence) -> Result<Diagram, ReadError> {
    let d = words(s, |_| PregroupType::from(Atom::S));
    if s.len() == 1 {
        return Ok(d);
    }
    Ok(d.apply(0, Morphism::spider(Atom::S, s.len()))?)
}

/// Word-sequence reader: a chain of cups between consecutive words, leaving
/// the last word's sentence wire open.
pub fn read_cups(s: &Sentence) -> Result<Diagram, ReadError> {
    if s.len() < 2 {
        return Err(ReadError::TooShort {
            reader: ReaderKind::Cups,
            needed: 2,
            got: s.len(),
        });
    }
    let d = words(s, |i| {
        if i == 0 {
            PregroupType::from(Atom::S)
        } else {
            PregroupType::new(alloc::vec![Atom::S.r(), Atom::S])
        }
    });
    reduce(d)
}

/// Staircase reader: a left fold combining the running sentence wire with
/// each next word.
pub fn read_stairs(s: &Sentence) -> Result<Diagram, ReadError> {
    let word = |tok: &String| Morphism::word(box_name(tok), PregroupType::from(Atom::S));
    let mut d = Diagram::from_box(word(&s.tokens[0]));
    for tok in &s.tokens[1..] {
        d = d.apply(1, word(tok))?.apply(0, Morphism::combine("stairs"))?;
    }
    Ok(d)
}

/// Tree reader: `SUBJ (VERB OBJ)`, with a prepositional phrase joining the
/// verb-object node before the subject does.
pub fn read_tree(s: &Sentence) -> Result<Diagram, ReadError> {
    let d = words(s, |_| PregroupType::from(Atom::S));
    let node = || Morphism::combine("tree");
    let d = d.apply(1, node())?;
    let d = if s.has_prep() {
        // [subj, vo, prep, pobj] -> [subj, vo, pp] -> [subj, vop]
        d.apply(2, node())?.apply(1, node())?
    } else {
        d
    };
    Ok(d.apply(0, node())?)
}
