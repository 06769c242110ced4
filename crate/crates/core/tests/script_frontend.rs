use std::path::Path;

use indicvox::script::{
    self, parse_to_cls, parse_to_cls_with, render_from_mlcm, CommonToken, MlcmSequence, MlcmTable,
    ParseOptions, PhoneClass, PhoneInventory, ScriptBlock,
};
use indicvox::Language;
use proptest::prelude::*;

fn run_golden(name: &str) {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    let src = std::fs::read_to_string(&path).unwrap();
    let mut checked = 0;
    for line in src.lines().filter(|l| !l.starts_with('#') && !l.trim().is_empty()) {
        let mut f = line.split('\t');
        let (text, lang, expected) = (f.next().unwrap(), f.next().unwrap(), f.next().unwrap());
        let lang: Language = lang.parse().unwrap();
        let got = parse_to_cls(text, lang).unwrap_or_else(|e| panic!("{text}: {e}"));
        assert_eq!(got.to_string(), expected, "{name}: {text} ({lang})");
        checked += 1;
    }
    assert!(checked >= 50, "{name} has only {checked} entries");
}

#[test]
fn golden_schwa_deletion() {
    run_golden("schwa_deletion.tsv");
}

#[test]
fn golden_virama() {
    run_golden("virama.tsv");
}

#[test]
fn golden_tamil_voicing() {
    run_golden("tamil_voicing.tsv");
}

#[test]
fn every_inventory_codepoint_round_trips() {
    let table = MlcmTable::builtin();
    for script in ScriptBlock::ALL {
        let inventory = table.inventory(script);
        assert!(inventory.len() > 50, "{script} inventory too small");
        for (c, token) in inventory {
            assert_eq!(table.map_char(c, script).unwrap(), token);
            assert_eq!(table.render_token(&token, script).unwrap(), c, "{script} U+{:04X}", c as u32);
        }
    }
}

#[test]
fn transposition_is_bijective_on_shared_tokens() {
    let table = MlcmTable::builtin();
    for a in ScriptBlock::ALL {
        for b in ScriptBlock::ALL {
            for (c, token) in table.inventory(a) {
                let Ok(in_b) = table.render_token(&token, b) else { continue };
                let back = table.map_char(in_b, b).unwrap();
                assert_eq!(back, token);
                assert_eq!(table.render_token(&back, a).unwrap(), c);
            }
        }
    }
}

#[test]
fn unmappable_tamil_codepoints_are_exactly_those_missing_from_table() {
    let table = MlcmTable::builtin();
    let listed: Vec<char> = table.inventory(ScriptBlock::Tamil).into_iter().map(|(c, _)| c).collect();
    assert!(!listed.contains(&'\u{0BB6}'));
    for (c, _) in table.inventory(ScriptBlock::Devanagari) {
        let offset = ScriptBlock::Devanagari.offset(c).unwrap();
        let tamil = ScriptBlock::Tamil.char_at(offset).unwrap();
        let mapped = table.map_char(tamil, ScriptBlock::Tamil).is_ok();
        assert_eq!(mapped, listed.contains(&tamil), "U+{:04X}", tamil as u32);
    }
}

fn inventory_chars(script: ScriptBlock) -> Vec<char> {
    MlcmTable::builtin()
        .inventory(script)
        .into_iter()
        .map(|(c, _)| c)
        .collect()
}

fn consonants(script: ScriptBlock) -> Vec<char> {
    MlcmTable::builtin()
        .inventory(script)
        .into_iter()
        .filter(|(_, t)| t.category == script::Category::Consonant && matches!(t.label, script::Label::Offset(_)))
        .map(|(c, _)| c)
        .collect()
}

fn vowel_signs(script: ScriptBlock) -> Vec<char> {
    MlcmTable::builtin()
        .inventory(script)
        .into_iter()
        .filter(|(_, t)| t.category == script::Category::VowelSign)
        .map(|(c, _)| c)
        .collect()
}

fn language_for(script: ScriptBlock) -> Language {
    Language::ALL.into_iter().find(|l| l.script() == script).unwrap()
}

#[test]
fn one_inherent_vowel_per_bare_consonant() {
    let no_deletion = ParseOptions { schwa_deletion: false, tamil_voicing: false };
    for lang in [Language::Kannada, Language::Malayalam, Language::Telugu, Language::Tamil] {
        for c in consonants(lang.script()) {
            let seq = parse_to_cls_with(&c.to_string(), lang, no_deletion).unwrap();
            assert_eq!(seq.phones.len(), 2, "{c}");
            assert_eq!(seq.phones[1], "a", "{c}");
        }
    }
}

fn vowel_like(inv: &PhoneInventory, p: &str) -> bool {
    inv.class(p) == Some(PhoneClass::Vowel)
}

proptest! {
    #[test]
    fn mlcm_round_trip_on_random_strings(
        script_idx in 0usize..8,
        picks in prop::collection::vec(any::<prop::sample::Index>(), 1..24),
    ) {
        let script = ScriptBlock::ALL[script_idx];
        let chars = inventory_chars(script);
        let text: String = picks.iter().map(|i| chars[i.index(chars.len())]).collect();
        let lang = language_for(script);
        let normalized = script::normalize(&text);
        let seq = script::to_mlcm(&text, lang).unwrap();
        prop_assert_eq!(render_from_mlcm(&seq, script).unwrap(), normalized);
    }

    #[test]
    fn no_adjacent_vowels_within_an_akshara(
        script_idx in 0usize..8,
        syllables in prop::collection::vec((any::<prop::sample::Index>(), any::<prop::sample::Index>(), any::<bool>()), 1..6),
    ) {
        let script = ScriptBlock::ALL[script_idx];
        let cons = consonants(script);
        let signs = vowel_signs(script);
        let mut text = String::new();
        for (c, v, bare) in &syllables {
            text.push(cons[c.index(cons.len())]);
            if !bare {
                text.push(signs[v.index(signs.len())]);
            }
        }
        let lang = language_for(script);
        let seq = parse_to_cls(&text, lang).unwrap();
        let inv = PhoneInventory::builtin();
        for w in seq.phones.windows(2) {
            prop_assert!(!(vowel_like(inv, &w[0]) && vowel_like(inv, &w[1])), "{} -> {}", text, seq);
        }
        for p in &seq.phones {
            prop_assert!(inv.contains(p));
        }
        prop_assert!(seq.word_boundaries.windows(2).all(|w| w[0] < w[1]));
        prop_assert!(seq.word_boundaries.iter().all(|&b| b < seq.phones.len()));
    }

    #[test]
    fn transposition_round_trip(a in 0usize..8, b in 0usize..8, picks in prop::collection::vec(any::<prop::sample::Index>(), 1..16)) {
        let (a, b) = (ScriptBlock::ALL[a], ScriptBlock::ALL[b]);
        let table = MlcmTable::builtin();
        let shared: Vec<(char, CommonToken)> = table
            .inventory(a)
            .into_iter()
            .filter(|(_, t)| table.render_token(t, b).is_ok())
            .collect();
        let tokens: Vec<CommonToken> = picks.iter().map(|i| shared[i.index(shared.len())].1.clone()).collect();
        let seq_a = MlcmSequence { tokens: tokens.clone(), source_script: a, language: language_for(a) };
        let text_b = render_from_mlcm(&seq_a, b).unwrap();
        let back: Vec<CommonToken> = text_b.chars().map(|c| table.map_char(c, b).unwrap()).collect();
        prop_assert_eq!(back, tokens);
    }
}

/// Tamil stop letters with their voiceless and voiced phones.
const TAMIL_STOPS: [(char, &str, &str); 5] = [
    ('க', "k", "g"),
    ('ச', "c", "j"),
    ('ட', "tx", "dx"),
    ('த', "t", "d"),
    ('ப', "p", "b"),
];
const TAMIL_NASAL_FOR: [char; 5] = ['ங', 'ஞ', 'ண', 'ந', 'ம'];
const TAMIL_VOWEL_SIGNS: [char; 5] = ['ா', 'ி', 'ு', 'ெ', 'ை'];
const PULLI: char = '்';

#[test]
fn tamil_voicing_contexts_over_generated_forms() {
    let lang = Language::Tamil;
    for (i, &(stop, voiceless, voiced)) in TAMIL_STOPS.iter().enumerate() {
        for &(onset, _, _) in &TAMIL_STOPS {
            for &sign in &TAMIL_VOWEL_SIGNS {
                // CV: word-initial stop stays voiceless.
                let cv = format!("{stop}{sign}");
                assert_eq!(parse_to_cls(&cv, lang).unwrap().phones[0], voiceless, "{cv}");

                // CVCV: the second stop sits between vowels.
                let cvcv = format!("{onset}{sign}{stop}{sign}");
                let seq = parse_to_cls(&cvcv, lang).unwrap();
                assert_eq!(seq.phones[2], voiced, "{cvcv}");

                // CVC்CV: geminate halves are both voiceless.
                let gem = format!("{onset}{sign}{stop}{PULLI}{stop}{sign}");
                let seq = parse_to_cls(&gem, lang).unwrap();
                assert_eq!(&seq.phones[2..4], [voiceless, voiceless], "{gem}");

                // CVN்CV: homorganic nasal before the stop voices it.
                let nasal = TAMIL_NASAL_FOR[i];
                let nc = format!("{onset}{sign}{nasal}{PULLI}{stop}{sign}");
                let seq = parse_to_cls(&nc, lang).unwrap();
                assert_eq!(seq.phones[3], voiced, "{nc}");
            }
        }
    }
}
