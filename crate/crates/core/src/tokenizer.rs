//! Raw text to normalized word tokens.
//!
//! A word is a maximal run of Unicode letters (general category `L*`).
//! Combining marks (`M*`) directly after a letter stay in the word so that
//! decomposed diacritics survive. A single apostrophe (`'` or `’`, the
//! latter rewritten to `'`) or hyphen is kept when a letter follows it and
//! the word is already open. Every other character separates words,
//! including digits. Words are case-folded with full Unicode folding and are
//! never stemmed, so inflected forms remain distinct types.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use unicode_general_category::{get_general_category, GeneralCategory};

use crate::error::{Error, Result};
use crate::freq::FrequencyTable;

/// Tokens longer than this many characters are dropped with a warning.
pub const MAX_TOKEN_CHARS: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenStream {
    pub source_id: String,
    pub tokens: Vec<String>,
    pub warnings: Vec<TokenWarning>,
}

/// A token rejected for exceeding [`MAX_TOKEN_CHARS`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenWarning {
    pub byte_offset: usize,
    pub chars: usize,
    /// First few characters, for locating the offender.
    pub preview: String,
}

impl TokenStream {
    pub fn new(source_id: impl Into<String>, tokens: Vec<String>) -> Self {
        TokenStream { source_id: source_id.into(), tokens, warnings: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Keeps only the first `n` tokens.
    pub fn truncate(&mut self, n: usize) {
        self.tokens.truncate(n);
    }

    /// Appends another stream; the source id of `self` is kept.
    pub fn extend(&mut self, other: TokenStream) {
        self.tokens.extend(other.tokens);
        self.warnings.extend(other.warnings);
    }
}

fn is_letter(c: char) -> bool {
    matches!(
        get_general_category(c),
        GeneralCategory::UppercaseLetter
            | GeneralCategory::LowercaseLetter
            | GeneralCategory::TitlecaseLetter
            | GeneralCategory::ModifierLetter
            | GeneralCategory::OtherLetter
    )
}

fn is_mark(c: char) -> bool {
    matches!(
        get_general_category(c),
        GeneralCategory::NonspacingMark | GeneralCategory::SpacingMark | GeneralCategory::EnclosingMark
    )
}

fn joiner(c: char) -> Option<char> {
    match c {
        '\'' | '\u{2019}' => Some('\''),
        '-' => Some('-'),
        _ => None,
    }
}

/// Tokenizes `text`. Infallible because `&str` is already valid UTF-8.
pub fn tokenize(text: &str, source_id: &str) -> TokenStream {
    let mut out = TokenStream::new(source_id, Vec::new());
    let mut word = String::new();
    let mut start = 0usize;
    let mut chars = text.char_indices().peekable();

    while let Some((offset, c)) = chars.next() {
        if is_letter(c) {
            if word.is_empty() {
                start = offset;
            }
            word.push(c);
        } else if !word.is_empty() && is_mark(c) {
            word.push(c);
        } else if let (false, Some(j)) = (word.is_empty(), joiner(c)) {
            match chars.peek() {
                Some(&(_, next)) if is_letter(next) => word.push(j),
                _ => flush(&mut word, start, &mut out),
            }
        } else {
            flush(&mut word, start, &mut out);
        }
    }
    flush(&mut word, start, &mut out);
    out
}

fn flush(word: &mut String, start: usize, out: &mut TokenStream) {
    if word.is_empty() {
        return;
    }
    let folded = caseless::default_case_fold_str(word);
    let chars = folded.chars().count();
    if chars > MAX_TOKEN_CHARS {
        out.warnings.push(TokenWarning {
            byte_offset: start,
            chars,
            preview: folded.chars().take(16).collect(),
        });
    } else {
        out.tokens.push(folded);
    }
    word.clear();
}

/// Decodes `bytes` as UTF-8 and tokenizes. Invalid input is an error naming
/// the first bad byte offset.
pub fn tokenize_bytes(bytes: &[u8], source_id: &str) -> Result<TokenStream> {
    match std::str::from_utf8(bytes) {
        Ok(text) => Ok(tokenize(text, source_id)),
        Err(e) => Err(Error::InvalidUtf8 { source_id: source_id.to_owned(), offset: e.valid_up_to() }),
    }
}

/// Counts occurrences; the table is labelled with the stream's source id.
pub fn count_tokens(stream: &TokenStream) -> FrequencyTable {
    let mut counts: BTreeMap<String, u64> = BTreeMap::new();
    for t in &stream.tokens {
        *counts.entry(t.clone()).or_default() += 1;
    }
    FrequencyTable::from_map(stream.source_id.clone(), counts)
}
