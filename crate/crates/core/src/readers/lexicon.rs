use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

/// Grammatical role a lexicon entry can fill.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Role {
    Noun,
    Verb,
    Prep,
}

impl Role {
    fn parse(s: &str) -> Option<Role> {
        match s {
            "noun" => Some(Role::Noun),
            "verb" => Some(Role::Verb),
            "prep" => Some(Role::Prep),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("lexicon line {line}: {message}")]
pub struct LexiconError {
    pub line: usize,
    pub message: String,
}

/// Word → role table. Entries may span several words (`competitive sport`),
/// which the tokenizer then keeps together as one noun chunk.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Lexicon {
    entries: BTreeMap<String, Role>,
    longest: usize,
}

const BUILTIN: &str = include_str!("../../data/lexicon.tsv");

impl Lexicon {
    /// The lexicon shipped with the crate.
    pub fn builtin() -> Self {
        Lexicon::parse(BUILTIN).expect("builtin lexicon is well formed")
    }

    /// Parses `word<TAB>role` lines. Blank lines and lines starting with `#`
    /// are ignored.
    pub fn parse(text: &str) -> Result<Self, LexiconError> {
        let mut lex = Lexicon::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let mut cols = line.split('\t');
            let (Some(word), Some(role), None) = (cols.next(), cols.next(), cols.next()) else {
                return Err(LexiconError {
                    line: i + 1,
                    message: "expected `word<TAB>role`".to_string(),
                });
            };
            let role = Role::parse(role.trim()).ok_or_else(|| LexiconError {
                line: i + 1,
                message: alloc::format!("unknown role `{}`", role.trim()),
            })?;
            let word = normalize(word);
            if word.is_empty() {
                return Err(LexiconError {
                    line: i + 1,
                    message: "empty word".to_string(),
                });
            }
            lex.insert(&word, role);
        }
        Ok(lex)
    }

    pub fn insert(&mut self, word: &str, role: Role) {
        let word = normalize(word);
        self.longest = self.longest.max(word.split(' ').count());
        self.entries.insert(word, role);
    }

    pub fn role(&self, word: &str) -> Option<Role> {
        self.entries.get(word).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Lowercases, strips surrounding punctuation, and groups multiword
    /// lexicon entries into single chunks (longest match first).
    pub fn chunk(&self, text: &str) -> Vec<String> {
        let words: Vec<String> = text
            .split_whitespace()
            .map(|w| {
                w.trim_matches(|c: char| !c.is_alphanumeric() && c != '\'' && c != '-')
                    .to_lowercase()
            })
            .filter(|w| !w.is_empty())
            .collect();
        let mut chunks = Vec::new();
        let mut i = 0;
        while i < words.len() {
            let mut taken = 1;
            for len in (2..=self.longest.min(words.len() - i)).rev() {
                let candidate = words[i..i + len].join(" ");
                if self.entries.contains_key(&candidate) {
                    taken = len;
                    break;
                }
            }
            chunks.push(words[i..i + taken].join(" "));
            i += taken;
        }
        chunks
    }
}

fn normalize(word: &str) -> String {
    let parts: Vec<String> = word.split_whitespace().map(|w| w.to_lowercase()).collect();
    parts.join(" ")
}
