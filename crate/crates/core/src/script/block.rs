use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::lang::UnknownName;

/// One of the eight Brahmic Unicode blocks handled by the frontend. Every
/// block spans 128 codepoints starting at a multiple of 0x80.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ScriptBlock {
    Devanagari,
    Bengali,
    Gujarati,
    Odia,
    Tamil,
    Telugu,
    Kannada,
    Malayalam,
}

impl ScriptBlock {
    pub const ALL: [ScriptBlock; 8] = [
        ScriptBlock::Devanagari,
        ScriptBlock::Bengali,
        ScriptBlock::Gujarati,
        ScriptBlock::Odia,
        ScriptBlock::Tamil,
        ScriptBlock::Telugu,
        ScriptBlock::Kannada,
        ScriptBlock::Malayalam,
    ];

    pub const SIZE: u32 = 0x80;

    pub const fn base(self) -> u32 {
        match self {
            ScriptBlock::Devanagari => 0x0900,
            ScriptBlock::Bengali => 0x0980,
            ScriptBlock::Gujarati => 0x0A80,
            ScriptBlock::Odia => 0x0B00,
            ScriptBlock::Tamil => 0x0B80,
            ScriptBlock::Telugu => 0x0C00,
            ScriptBlock::Kannada => 0x0C80,
            ScriptBlock::Malayalam => 0x0D00,
        }
    }

    pub fn contains(self, c: char) -> bool {
        let cp = c as u32;
        (self.base()..self.base() + Self::SIZE).contains(&cp)
    }

    /// The block a codepoint falls in, if any.
    pub fn of(c: char) -> Option<ScriptBlock> {
        let cp = c as u32;
        if !(0x0900..0x0D80).contains(&cp) {
            return None;
        }
        Self::ALL.into_iter().find(|b| b.contains(c))
    }

    /// Offset of `c` within this block.
    pub fn offset(self, c: char) -> Option<u8> {
        self.contains(c).then(|| (c as u32 - self.base()) as u8)
    }

    pub fn char_at(self, offset: u8) -> Option<char> {
        if u32::from(offset) >= Self::SIZE {
            return None;
        }
        char::from_u32(self.base() + u32::from(offset))
    }

    pub fn name(self) -> &'static str {
        match self {
            ScriptBlock::Devanagari => "Devanagari",
            ScriptBlock::Bengali => "Bengali",
            ScriptBlock::Gujarati => "Gujarati",
            ScriptBlock::Odia => "Odia",
            ScriptBlock::Tamil => "Tamil",
            ScriptBlock::Telugu => "Telugu",
            ScriptBlock::Kannada => "Kannada",
            ScriptBlock::Malayalam => "Malayalam",
        }
    }
}

impl fmt::Display for ScriptBlock {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScriptBlock {
    type Err = UnknownName;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.trim().to_ascii_lowercase();
        let lower = if lower == "oriya" { "odia".to_string() } else { lower };
        ScriptBlock::ALL
            .into_iter()
            .find(|b| b.name().to_ascii_lowercase() == lower)
            .ok_or_else(|| UnknownName(s.to_string()))
    }
}
