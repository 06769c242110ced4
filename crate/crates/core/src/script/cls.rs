//! Common-label-set phone parser.
//!
//! Text is first mapped to MLCM tokens, grouped into aksharas, and each
//! akshara expanded to phones. Indo-Aryan languages then lose schwas,
//! Tamil stops are voiced by context.

use std::collections::HashMap;
use std::fmt;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use super::mlcm::{to_mlcm, Category, CommonToken, Label};
use super::ScriptError;
use crate::lang::{Family, Language};

const BUILTIN_INVENTORY: &str = include_str!("../../data/cls.tsv");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PhoneClass {
    Vowel,
    Stop,
    Nasal,
    Approximant,
    Fricative,
    Flap,
    Modifier,
}

impl PhoneClass {
    fn parse(s: &str) -> Option<PhoneClass> {
        Some(match s {
            "vowel" => PhoneClass::Vowel,
            "stop" => PhoneClass::Stop,
            "nasal" => PhoneClass::Nasal,
            "approximant" => PhoneClass::Approximant,
            "fricative" => PhoneClass::Fricative,
            "flap" => PhoneClass::Flap,
            "modifier" => PhoneClass::Modifier,
            _ => return None,
        })
    }
}

/// Closed set of phone labels.
#[derive(Debug, Clone)]
pub struct PhoneInventory {
    order: Vec<String>,
    classes: HashMap<String, PhoneClass>,
}

impl PhoneInventory {
    pub fn builtin() -> &'static PhoneInventory {
        static INV: OnceLock<PhoneInventory> = OnceLock::new();
        INV.get_or_init(|| PhoneInventory::parse(BUILTIN_INVENTORY).expect("bundled CLS inventory is valid"))
    }

    pub fn parse(src: &str) -> Result<PhoneInventory, ScriptError> {
        let mut inv = PhoneInventory {
            order: Vec::new(),
            classes: HashMap::new(),
        };
        for (idx, line) in src.lines().enumerate() {
            let line = line.trim_end();
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |message: String| ScriptError::Table { line: idx + 1, message };
            let (label, class) = line
                .split_once('\t')
                .ok_or_else(|| bad("expected `label<TAB>class`".into()))?;
            let class = PhoneClass::parse(class).ok_or_else(|| bad(format!("unknown class `{class}`")))?;
            if inv.classes.insert(label.to_string(), class).is_some() {
                return Err(bad(format!("phone `{label}` listed twice")));
            }
            inv.order.push(label.to_string());
        }
        Ok(inv)
    }

    pub fn class(&self, phone: &str) -> Option<PhoneClass> {
        self.classes.get(phone).copied()
    }

    pub fn contains(&self, phone: &str) -> bool {
        self.classes.contains_key(phone)
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.order.iter().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhoneSequence {
    pub phones: Vec<String>,
    pub language: Language,
    /// Index of the first phone of every word.
    pub word_boundaries: Vec<usize>,
}

impl PhoneSequence {
    /// Phones of each word.
    pub fn words(&self) -> Vec<&[String]> {
        let mut out = Vec::with_capacity(self.word_boundaries.len());
        for (i, &start) in self.word_boundaries.iter().enumerate() {
            let end = self.word_boundaries.get(i + 1).copied().unwrap_or(self.phones.len());
            out.push(&self.phones[start..end]);
        }
        out
    }
}

impl fmt::Display for PhoneSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.phones.join(" "))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ParseOptions {
    pub schwa_deletion: bool,
    pub tamil_voicing: bool,
}

impl ParseOptions {
    pub fn for_language(language: Language) -> ParseOptions {
        ParseOptions {
            schwa_deletion: language.family() == Family::IndoAryan,
            tamil_voicing: language == Language::Tamil,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Seg {
    Cons(&'static str),
    Vowel { phone: &'static str, inherent: bool },
    Mod(&'static str),
}

impl Seg {
    fn phone(self) -> &'static str {
        match self {
            Seg::Cons(p) | Seg::Mod(p) | Seg::Vowel { phone: p, .. } => p,
        }
    }

    fn is_vowel(self) -> bool {
        matches!(self, Seg::Vowel { .. })
    }

    fn is_cons(self) -> bool {
        matches!(self, Seg::Cons(_))
    }
}

fn consonant_phone(offset: u8) -> Option<&'static str> {
    const TABLE: [&str; 0x25] = [
        "k", "kh", "g", "gh", "ng", // 15..19
        "c", "ch", "j", "jh", "nj", // 1a..1e
        "tx", "txh", "dx", "dxh", "nx", // 1f..23
        "t", "th", "d", "dh", "n", "nn", // 24..29
        "p", "ph", "b", "bh", "m", // 2a..2e
        "y", "r", "rx", "l", "lx", "zh", "w", // 2f..35
        "sh", "sx", "s", "h", // 36..39
    ];
    (0x15..=0x39).contains(&offset).then(|| TABLE[(offset - 0x15) as usize])
}

fn vowel_phone(offset: u8) -> Option<&'static str> {
    Some(match offset {
        0x05 => "a",
        0x06 | 0x3E => "aa",
        0x07 | 0x3F => "i",
        0x08 | 0x40 => "ii",
        0x09 | 0x41 => "u",
        0x0A | 0x42 => "uu",
        0x0B | 0x43 | 0x60 | 0x44 => "rq",
        0x0C | 0x61 | 0x62 | 0x63 => "lq",
        0x0D | 0x45 => "ae",
        0x0E | 0x46 => "e",
        0x0F | 0x47 => "ee",
        0x10 | 0x48 => "ai",
        0x11 | 0x49 => "ax",
        0x12 | 0x4A => "o",
        0x13 | 0x4B => "oo",
        0x14 | 0x4C => "au",
        _ => return None,
    })
}

fn modifier_phone(offset: u8) -> Option<&'static str> {
    Some(match offset {
        0x01 => "nq",
        0x02 => "mq",
        0x03 => "hq",
        _ => return None,
    })
}

fn nukta_variant(phone: &'static str) -> &'static str {
    match phone {
        "k" => "kq",
        "kh" => "khq",
        "g" => "gq",
        "j" => "z",
        "dx" => "dxq",
        "dxh" => "dxhq",
        "ph" => "f",
        other => other,
    }
}

/// Named consonants. The second field is true for dead consonants, which
/// never carry the inherent vowel.
fn named_consonant(name: &str) -> Option<(&'static str, bool)> {
    Some(match name {
        "KHANDA_TA" => ("t", true),
        "ODIA_WA" => ("w", false),
        "ODIA_YYA" => ("y", false),
        "CHILLU_NN" => ("nx", true),
        "CHILLU_N" => ("n", true),
        "CHILLU_RR" => ("rx", true),
        "CHILLU_L" => ("l", true),
        "CHILLU_LL" => ("lx", true),
        "CHILLU_K" => ("k", true),
        "CHILLU_M" => ("m", true),
        "CHILLU_Y" => ("y", true),
        "CHILLU_LLL" => ("zh", true),
        _ => return None,
    })
}

fn offset_of(token: &CommonToken) -> Option<u8> {
    match token.label {
        Label::Offset(o) => Some(o),
        Label::Named(_) => None,
    }
}

fn orphan(token: &CommonToken) -> ScriptError {
    ScriptError::OrphanSign { label: token.label.clone() }
}

/// Expands one word's tokens into consonant/vowel segments.
fn syllabify(tokens: &[CommonToken]) -> Result<Vec<Seg>, ScriptError> {
    let mut segs = Vec::with_capacity(tokens.len() * 2);
    let mut i = 0;
    while i < tokens.len() {
        let tok = &tokens[i];
        match tok.category {
            Category::Consonant => {
                let (mut phone, dead) = match &tok.label {
                    Label::Offset(o) => (consonant_phone(*o).ok_or_else(|| orphan(tok))?, false),
                    Label::Named(n) => named_consonant(n).ok_or_else(|| orphan(tok))?,
                };
                i += 1;
                if dead {
                    segs.push(Seg::Cons(phone));
                    continue;
                }
                if tokens.get(i).map(|t| t.category) == Some(Category::Nukta) {
                    phone = nukta_variant(phone);
                    i += 1;
                }
                segs.push(Seg::Cons(phone));
                match tokens.get(i) {
                    Some(t) if t.category == Category::Virama => i += 1,
                    Some(t) if t.category == Category::VowelSign => {
                        let v = offset_of(t).and_then(vowel_phone).ok_or_else(|| orphan(t))?;
                        segs.push(Seg::Vowel { phone: v, inherent: false });
                        i += 1;
                    }
                    _ => segs.push(Seg::Vowel { phone: "a", inherent: true }),
                }
            }
            Category::IndependentVowel => {
                let v = offset_of(tok).and_then(vowel_phone).ok_or_else(|| orphan(tok))?;
                segs.push(Seg::Vowel { phone: v, inherent: false });
                i += 1;
            }
            Category::Nasalization => {
                if segs.is_empty() {
                    return Err(orphan(tok));
                }
                let m = offset_of(tok).and_then(modifier_phone).ok_or_else(|| orphan(tok))?;
                segs.push(Seg::Mod(m));
                i += 1;
            }
            Category::VowelSign | Category::Virama | Category::Nukta => return Err(orphan(tok)),
            Category::Digit => return Err(ScriptError::UnexpandedDigit),
            Category::Space | Category::Punctuation => i += 1,
        }
    }
    Ok(segs)
}

/// Deletes the word-final inherent schwa, then medial schwas in a `VC_CV`
/// context scanning right to left, never creating a three-consonant cluster.
fn delete_schwas(segs: &mut Vec<Seg>) {
    if matches!(segs.last(), Some(Seg::Vowel { inherent: true, .. })) {
        segs.pop();
    }
    let mut k = segs.len();
    while k > 0 {
        k -= 1;
        if !matches!(segs[k], Seg::Vowel { inherent: true, .. }) {
            continue;
        }
        if k < 2 || k + 2 >= segs.len() {
            continue;
        }
        let context = segs[k - 2].is_vowel()
            && segs[k - 1].is_cons()
            && segs[k + 1].is_cons()
            && segs[k + 2].is_vowel();
        if !context {
            continue;
        }
        let left = segs[..k].iter().rev().take_while(|s| s.is_cons()).count();
        let right = segs[k + 1..].iter().take_while(|s| s.is_cons()).count();
        if left + right <= 2 {
            segs.remove(k);
        }
    }
}

fn voiced(stop: &str) -> Option<&'static str> {
    Some(match stop {
        "k" => "g",
        "c" => "j",
        "tx" => "dx",
        "t" => "d",
        "p" => "b",
        _ => return None,
    })
}

fn homorganic(nasal: &str, stop: &str) -> bool {
    matches!(
        (nasal, stop),
        ("ng", "k") | ("nj", "c") | ("nx", "tx") | ("n", "t") | ("nn", "t") | ("m", "p")
    )
}

/// Tamil writes voiced and voiceless stops alike; voicing follows from
/// context.
fn voice_tamil_stops(segs: &mut [Seg]) {
    let original = segs.to_vec();
    for (k, seg) in segs.iter_mut().enumerate() {
        let Seg::Cons(stop) = *seg else { continue };
        let Some(voiced_form) = voiced(stop) else { continue };
        if k == 0 {
            continue;
        }
        let prev = original[k - 1];
        let next = original.get(k + 1).copied();
        let geminate = prev == Seg::Cons(stop) || next == Some(Seg::Cons(stop));
        if geminate {
            continue;
        }
        let post_nasal = matches!(prev, Seg::Cons(n) if homorganic(n, stop));
        let intervocalic = prev.is_vowel() && next.is_some_and(Seg::is_vowel);
        if post_nasal || intervocalic {
            *seg = Seg::Cons(voiced_form);
        }
    }
}

pub fn parse_to_cls(text: &str, language: Language) -> Result<PhoneSequence, ScriptError> {
    parse_to_cls_with(text, language, ParseOptions::for_language(language))
}

pub fn parse_to_cls_with(
    text: &str,
    language: Language,
    options: ParseOptions,
) -> Result<PhoneSequence, ScriptError> {
    let seq = to_mlcm(text, language)?;
    let mut phones = Vec::new();
    let mut word_boundaries = Vec::new();
    for word in seq.tokens.split(|t| t.category.is_separator()) {
        if word.is_empty() {
            continue;
        }
        let mut segs = syllabify(word)?;
        if options.schwa_deletion {
            delete_schwas(&mut segs);
        }
        if options.tamil_voicing {
            voice_tamil_stops(&mut segs);
        }
        if segs.is_empty() {
            continue;
        }
        word_boundaries.push(phones.len());
        phones.extend(segs.iter().map(|s| s.phone().to_string()));
    }
    Ok(PhoneSequence {
        phones,
        language,
        word_boundaries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn phones(text: &str, lang: Language) -> String {
        parse_to_cls(text, lang).unwrap().to_string()
    }

    #[test]
    fn inventory_is_closed_and_sized() {
        let inv = PhoneInventory::builtin();
        assert!((55..=70).contains(&inv.len()));
        assert_eq!(inv.class("dxq"), Some(PhoneClass::Flap));
        assert_eq!(inv.class("a"), Some(PhoneClass::Vowel));
    }

    #[test]
    fn every_internal_phone_is_in_inventory() {
        let inv = PhoneInventory::builtin();
        let mut all: Vec<&str> = (0x15..=0x39).filter_map(consonant_phone).collect();
        all.extend((0..0x80).filter_map(vowel_phone));
        all.extend((0..0x80).filter_map(modifier_phone));
        let cons: Vec<&str> = all.clone();
        all.extend(cons.iter().map(|p| nukta_variant(p)));
        all.extend(cons.iter().filter_map(|p| voiced(p)));
        for name in [
            "KHANDA_TA", "ODIA_WA", "ODIA_YYA", "CHILLU_NN", "CHILLU_N", "CHILLU_RR", "CHILLU_L", "CHILLU_LL",
            "CHILLU_K", "CHILLU_M", "CHILLU_Y", "CHILLU_LLL",
        ] {
            all.push(named_consonant(name).unwrap().0);
        }
        for p in all {
            assert!(inv.contains(p), "{p} missing from inventory");
        }
    }

    #[test]
    fn hindi_kamal() {
        assert_eq!(phones("कमल", Language::Hindi), "k a m a l");
    }

    #[test]
    fn virama_suppresses_inherent_vowel() {
        assert_eq!(phones("क्", Language::Hindi), "k");
        assert_eq!(phones("క్", Language::Telugu), "k");
    }

    #[test]
    fn tamil_intervocalic_voicing() {
        assert_eq!(phones("அடி", Language::Tamil), "a dx i");
    }

    #[test]
    fn nukta_letters() {
        // Precomposed QA decomposes to KA + NUKTA under normalisation.
        assert_eq!(phones("क़लम", Language::Hindi), "kq a l a m");
        assert_eq!(phones("ज़रा", Language::Hindi), "z a r aa");
    }

    #[test]
    fn anusvara_blocks_final_deletion() {
        assert_eq!(phones("कं", Language::Hindi), "k a mq");
    }

    #[test]
    fn word_boundaries() {
        let seq = parse_to_cls("कमल, नमक।", Language::Hindi).unwrap();
        assert_eq!(seq.word_boundaries, vec![0, 5]);
        assert_eq!(seq.words()[1].join(" "), "n a m a k");
    }

    #[test]
    fn dravidian_keeps_final_a() {
        assert_eq!(phones("ಕಮಲ", Language::Kannada), "k a m a l a");
    }

    #[test]
    fn chillu_is_dead_consonant() {
        assert_eq!(phones("അവൻ", Language::Malayalam), "a w a n");
    }

    #[test]
    fn orphan_signs_rejected() {
        assert!(matches!(parse_to_cls("ि", Language::Hindi), Err(ScriptError::OrphanSign { .. })));
        assert!(matches!(parse_to_cls("अ्", Language::Hindi), Err(ScriptError::OrphanSign { .. })));
    }

    #[test]
    fn digits_not_expanded() {
        assert!(matches!(parse_to_cls("कमल ५", Language::Hindi), Err(ScriptError::UnexpandedDigit)));
    }
}
