use alloc::string::String;
use core::ops::Range;

const TRAILING_PUNCT: &[char] = &['.', '?', '!', ','];

/// One whitespace-delimited sentence token. `word` excludes trailing
/// punctuation glued to the token ("hedgehog." -> "hedgehog").
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct SentenceToken {
    pub index: usize,
    pub word: Range<usize>,
}

/// Tokenizes on ASCII whitespace. Token indices follow COGS variable
/// numbering: a standalone "." is its own token but carries an empty word.
pub(crate) fn sentence_tokens(sentence: &str) -> alloc::vec::Vec<SentenceToken> {
    let mut out = alloc::vec::Vec::new();
    let bytes = sentence.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i].is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        while i < bytes.len() && !bytes[i].is_ascii_whitespace() {
            i += 1;
        }
        let tok = &sentence[start..i];
        let trimmed = tok.trim_end_matches(TRAILING_PUNCT);
        let word_end = start + trimmed.len();
        out.push(SentenceToken {
            index: out.len(),
            word: start..word_end,
        });
    }
    out
}

/// Replaces byte ranges of `text`. Edits must not overlap; order is free.
pub(crate) fn splice(text: &str, edits: &mut [(Range<usize>, String)]) -> String {
    edits.sort_by_key(|(r, _)| r.start);
    let mut out = String::with_capacity(text.len() + 16);
    let mut cursor = 0;
    for (range, replacement) in edits.iter() {
        debug_assert!(range.start >= cursor, "overlapping splice edits");
        out.push_str(&text[cursor..range.start]);
        out.push_str(replacement);
        cursor = range.end;
    }
    out.push_str(&text[cursor..]);
    out
}
