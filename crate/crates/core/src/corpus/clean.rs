use unicode_normalization::UnicodeNormalization;

use super::CorpusError;
use crate::script::ScriptBlock;

const ZWNJ: char = '\u{200C}';
const ZWJ: char = '\u{200D}';
const PUNCTUATION: &[char] = &['.', ',', '?', '!', ';', ':', '\'', '"', '-', '(', ')', '\u{0964}', '\u{0965}'];

fn keep(c: char) -> bool {
    c.is_alphanumeric() || ScriptBlock::of(c).is_some() || c == ZWJ || c == ZWNJ || PUNCTUATION.contains(&c)
}

/// NFC-normalises, drops control characters and symbols outside the
/// punctuation whitelist, and collapses whitespace to single spaces.
pub fn clean_text(raw: &str) -> Result<String, CorpusError> {
    let mut out = String::with_capacity(raw.len());
    let mut pending_space = false;
    for c in raw.nfc() {
        if c.is_whitespace() {
            pending_space = true;
        } else if keep(c) {
            if pending_space && !out.is_empty() {
                out.push(' ');
            }
            pending_space = false;
            out.push(c);
        }
    }
    if out.is_empty() {
        return Err(CorpusError::EmptyAfterCleaning);
    }
    Ok(out)
}
