//! Multi-language character map.
//!
//! Every Brahmic block in Unicode follows the same layout, so the canonical
//! token for a codepoint is its offset into the block, expressed against the
//! Devanagari reference block. The shipped table lists every codepoint that
//! belongs to the common inventory; characters without an offset-aligned
//! Devanagari counterpart (Malayalam chillus, Bengali khanda ta, ...) carry a
//! named label instead.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use unicode_normalization::UnicodeNormalization;

use super::{ScriptBlock, ScriptError};
use crate::lang::Language;

const BUILTIN_TABLE: &str = include_str!("../../data/mlcm.tsv");

const ZWJ: char = '\u{200D}';
const ZWNJ: char = '\u{200C}';

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Label {
    /// Offset into the reference block, `0x00..0x80`.
    Offset(u8),
    Named(String),
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Offset(o) => write!(f, "{o:02X}"),
            Label::Named(n) => f.write_str(n),
        }
    }
}

impl FromStr for Label {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.len() == 2 && s.chars().all(|c| c.is_ascii_hexdigit()) {
            let v = u8::from_str_radix(s, 16).map_err(|e| e.to_string())?;
            if v >= 0x80 {
                return Err(format!("label offset {s} outside a 128-codepoint block"));
            }
            Ok(Label::Offset(v))
        } else if !s.is_empty() && s.chars().all(|c| c.is_ascii_uppercase() || c.is_ascii_digit() || c == '_') {
            Ok(Label::Named(s.to_string()))
        } else {
            Err(format!("malformed label `{s}`"))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Category {
    IndependentVowel,
    Consonant,
    VowelSign,
    Virama,
    /// Candrabindu, anusvara and visarga.
    Nasalization,
    Nukta,
    Digit,
    Punctuation,
    Space,
}

impl Category {
    fn parse(s: &str) -> Option<Category> {
        Some(match s {
            "independent-vowel" => Category::IndependentVowel,
            "consonant" => Category::Consonant,
            "vowel-sign" => Category::VowelSign,
            "virama" => Category::Virama,
            "nasalization" => Category::Nasalization,
            "nukta" => Category::Nukta,
            "digit" => Category::Digit,
            "punctuation" => Category::Punctuation,
            "space" => Category::Space,
            _ => return None,
        })
    }

    pub fn is_separator(self) -> bool {
        matches!(self, Category::Punctuation | Category::Space)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CommonToken {
    pub label: Label,
    pub category: Category,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MlcmSequence {
    pub tokens: Vec<CommonToken>,
    pub source_script: ScriptBlock,
    pub language: Language,
}

#[derive(Debug, Default)]
struct ScriptMap {
    forward: HashMap<char, Label>,
    inverse: HashMap<Label, char>,
}

/// Parsed mapping table.
#[derive(Debug)]
pub struct MlcmTable {
    scripts: HashMap<ScriptBlock, ScriptMap>,
    shared: ScriptMap,
    categories: HashMap<Label, Category>,
}

impl MlcmTable {
    /// The table bundled with the crate.
    pub fn builtin() -> &'static MlcmTable {
        static TABLE: OnceLock<MlcmTable> = OnceLock::new();
        TABLE.get_or_init(|| MlcmTable::parse(BUILTIN_TABLE).expect("bundled MLCM table is valid"))
    }

    pub fn parse(src: &str) -> Result<MlcmTable, ScriptError> {
        let mut table = MlcmTable {
            scripts: HashMap::new(),
            shared: ScriptMap::default(),
            categories: HashMap::new(),
        };
        for (idx, raw) in src.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim_end();
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |msg: String| ScriptError::Table { line: line_no, message: msg };
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 3 {
                return Err(bad(format!("expected 3 tab-separated fields, found {}", fields.len())));
            }
            let cp = u32::from_str_radix(fields[0], 16)
                .ok()
                .and_then(char::from_u32)
                .ok_or_else(|| bad(format!("bad codepoint `{}`", fields[0])))?;
            let label: Label = fields[1].parse().map_err(bad)?;
            let category = Category::parse(fields[2])
                .ok_or_else(|| bad(format!("unknown category `{}`", fields[2])))?;

            match table.categories.get(&label) {
                Some(existing) if *existing != category => {
                    return Err(bad(format!(
                        "label {label} already has category {existing:?}, not {category:?}"
                    )))
                }
                _ => {
                    table.categories.insert(label.clone(), category);
                }
            }

            let map = match ScriptBlock::of(cp) {
                Some(block) if !category.is_separator() => table.scripts.entry(block).or_default(),
                _ => &mut table.shared,
            };
            if map.forward.insert(cp, label.clone()).is_some() {
                return Err(bad(format!("codepoint U+{:04X} listed twice", cp as u32)));
            }
            if map.inverse.insert(label.clone(), cp).is_some() {
                return Err(bad(format!("label {label} mapped twice within one script")));
            }
        }
        Ok(table)
    }

    pub fn category(&self, label: &Label) -> Option<Category> {
        self.categories.get(label).copied()
    }

    /// Every (codepoint, token) pair in the inventory of `script`.
    pub fn inventory(&self, script: ScriptBlock) -> Vec<(char, CommonToken)> {
        let mut out: Vec<_> = self
            .scripts
            .get(&script)
            .map(|m| {
                m.forward
                    .iter()
                    .map(|(&c, l)| (c, self.token(l.clone())))
                    .collect()
            })
            .unwrap_or_default();
        out.sort_by_key(|(c, _)| *c);
        out
    }

    pub fn shared_inventory(&self) -> Vec<(char, CommonToken)> {
        let mut out: Vec<_> = self
            .shared
            .forward
            .iter()
            .map(|(&c, l)| (c, self.token(l.clone())))
            .collect();
        out.sort_by_key(|(c, _)| *c);
        out
    }

    fn token(&self, label: Label) -> CommonToken {
        let category = self.categories[&label];
        CommonToken { label, category }
    }

    /// Maps one codepoint of `script` text.
    pub fn map_char(&self, c: char, script: ScriptBlock) -> Result<CommonToken, ScriptError> {
        if let Some(label) = self.shared.forward.get(&c) {
            return Ok(self.token(label.clone()));
        }
        if let Some(label) = self.scripts.get(&script).and_then(|m| m.forward.get(&c)) {
            return Ok(self.token(label.clone()));
        }
        match ScriptBlock::of(c) {
            Some(block) if block == script => Err(ScriptError::UnmappableCodepoint { codepoint: c, script }),
            Some(found) => Err(ScriptError::MixedScript { first: script, second: found }),
            None => Err(ScriptError::ForeignCharacter(c)),
        }
    }

    pub fn render_token(&self, token: &CommonToken, target: ScriptBlock) -> Result<char, ScriptError> {
        self.scripts
            .get(&target)
            .and_then(|m| m.inverse.get(&token.label))
            .or_else(|| self.shared.inverse.get(&token.label))
            .copied()
            .ok_or_else(|| ScriptError::UnrenderableToken {
                label: token.label.clone(),
                target,
            })
    }
}

/// Canonical composition with joiners removed and whitespace runs collapsed
/// to one space.
pub fn normalize(text: &str) -> String {
    let composed: String = text.nfd().nfc().filter(|&c| c != ZWJ && c != ZWNJ).collect();
    composed.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn is_shared_punctuation(c: char) -> bool {
    matches!(c, '\u{0964}' | '\u{0965}')
}

/// The unique script block covering all Indic codepoints in `text`.
pub fn detect_script(text: &str) -> Result<ScriptBlock, ScriptError> {
    let content = || {
        text.chars()
            .filter(|c| !c.is_whitespace() && !c.is_ascii_punctuation() && !is_shared_punctuation(*c))
    };
    if content().next().is_none() {
        return Err(ScriptError::EmptyText);
    }
    let mut found: Option<ScriptBlock> = None;
    for c in content() {
        if let Some(block) = ScriptBlock::of(c) {
            match found {
                None => found = Some(block),
                Some(first) if first != block => {
                    return Err(ScriptError::MixedScript { first, second: block })
                }
                _ => {}
            }
        }
    }
    found.ok_or(ScriptError::NoIndicContent)
}

pub fn to_mlcm(text: &str, language: Language) -> Result<MlcmSequence, ScriptError> {
    to_mlcm_with(MlcmTable::builtin(), text, language)
}

pub fn to_mlcm_with(table: &MlcmTable, text: &str, language: Language) -> Result<MlcmSequence, ScriptError> {
    let text = normalize(text);
    let script = detect_script(&text)?;
    if script != language.script() {
        return Err(ScriptError::ScriptMismatch {
            language,
            expected: language.script(),
            found: script,
        });
    }
    let tokens = text
        .chars()
        .map(|c| table.map_char(c, script))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(MlcmSequence {
        tokens,
        source_script: script,
        language,
    })
}

pub fn render_from_mlcm(seq: &MlcmSequence, target: ScriptBlock) -> Result<String, ScriptError> {
    render_from_mlcm_with(MlcmTable::builtin(), seq, target)
}

pub fn render_from_mlcm_with(
    table: &MlcmTable,
    seq: &MlcmSequence,
    target: ScriptBlock,
) -> Result<String, ScriptError> {
    seq.tokens.iter().map(|t| table.render_token(t, target)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(text: &str, lang: Language) -> MlcmSequence {
        to_mlcm(text, lang).unwrap()
    }

    #[test]
    fn detect() {
        assert_eq!(detect_script("कमल").unwrap(), ScriptBlock::Devanagari);
        assert_eq!(detect_script("கடல்").unwrap(), ScriptBlock::Tamil);
        assert!(matches!(
            detect_script("कमலம்"),
            Err(ScriptError::MixedScript { first: ScriptBlock::Devanagari, second: ScriptBlock::Tamil })
        ));
        assert!(matches!(detect_script("hello"), Err(ScriptError::NoIndicContent)));
        assert!(matches!(detect_script(" ।, "), Err(ScriptError::EmptyText)));
    }

    #[test]
    fn danda_is_not_devanagari_content() {
        assert_eq!(detect_script("কমল।").unwrap(), ScriptBlock::Bengali);
    }

    #[test]
    fn reference_block_is_identity() {
        let s = seq("क", Language::Hindi);
        assert_eq!(
            s.tokens,
            vec![CommonToken { label: Label::Offset(0x15), category: Category::Consonant }]
        );
    }

    #[test]
    fn bengali_ka_aligns_with_devanagari() {
        let s = seq("ক", Language::Bengali);
        assert_eq!(s.tokens[0].label, Label::Offset((0x0995u32 - 0x0980) as u8));
        assert_eq!(s.tokens[0].category, Category::Consonant);
    }

    #[test]
    fn tamil_sha_is_unmappable() {
        assert!(matches!(
            to_mlcm("ஶ", Language::Tamil),
            Err(ScriptError::UnmappableCodepoint { codepoint: '\u{0BB6}', script: ScriptBlock::Tamil })
        ));
    }

    #[test]
    fn foreign_letters_rejected() {
        assert!(matches!(to_mlcm("कमल abc", Language::Hindi), Err(ScriptError::ForeignCharacter('a'))));
    }

    #[test]
    fn language_must_match_script() {
        assert!(matches!(
            to_mlcm("কমল", Language::Hindi),
            Err(ScriptError::ScriptMismatch { found: ScriptBlock::Bengali, .. })
        ));
    }

    #[test]
    fn render_identity_and_transposition() {
        let s = seq("कमल", Language::Hindi);
        assert_eq!(render_from_mlcm(&s, ScriptBlock::Devanagari).unwrap(), "कमल");
        assert_eq!(render_from_mlcm(&s, ScriptBlock::Bengali).unwrap(), "কমল");
    }

    #[test]
    fn chillu_has_no_tamil_form() {
        let s = seq("ൻ", Language::Malayalam);
        assert_eq!(s.tokens[0].label, Label::Named("CHILLU_N".into()));
        assert!(matches!(
            render_from_mlcm(&s, ScriptBlock::Tamil),
            Err(ScriptError::UnrenderableToken { target: ScriptBlock::Tamil, .. })
        ));
    }

    #[test]
    fn joiners_dropped_and_whitespace_collapsed() {
        assert_eq!(normalize(" क\u{200D}्ष  \t म "), "क्ष म");
    }

    #[test]
    fn decomposed_vowel_sign_composes() {
        // Bengali O sign: E sign + AA sign recomposes to U+09CB.
        let a = seq("কো", Language::Bengali);
        let b = seq("কে\u{09BE}", Language::Bengali);
        assert_eq!(a, b);
        assert_eq!(a.tokens.len(), 2);
    }

    #[test]
    fn category_is_function_of_label() {
        let table = MlcmTable::builtin();
        for script in ScriptBlock::ALL {
            for (_, tok) in table.inventory(script) {
                assert_eq!(table.category(&tok.label), Some(tok.category));
            }
        }
    }

    #[test]
    fn table_rejects_conflicts() {
        let dup = "0915\t15\tconsonant\n0916\t15\tconsonant\n";
        assert!(matches!(MlcmTable::parse(dup), Err(ScriptError::Table { line: 2, .. })));
        let cat = "0915\t15\tconsonant\n0995\t15\tvowel-sign\n";
        assert!(matches!(MlcmTable::parse(cat), Err(ScriptError::Table { line: 2, .. })));
        assert!(MlcmTable::parse("0915\t15\n").is_err());
    }
}
