//! The bundled law files.

use crate::error::LawError;
use crate::lang::LawLibrary;

/// `(file name, source)` for each correct-law file.
pub const STANDARD: &[(&str, &str)] = &[
    ("movement.law", include_str!("../laws/movement.law")),
    ("collect.law", include_str!("../laws/collect.law")),
    ("craft.law", include_str!("../laws/craft.law")),
    ("place.law", include_str!("../laws/place.law")),
    ("combat.law", include_str!("../laws/combat.law")),
    ("npc.law", include_str!("../laws/npc.law")),
    ("meters.law", include_str!("../laws/meters.law")),
    ("bookkeeping.law", include_str!("../laws/bookkeeping.law")),
];

pub const DISTRACTORS: (&str, &str) = ("distractors.law", include_str!("../laws/distractors.law"));

fn load(files: &[(&str, &str)]) -> Result<LawLibrary, LawError> {
    files.iter().try_fold(LawLibrary::default(), |lib, (name, src)| {
        lib.merge(LawLibrary::parse_named(name, src)?)
    })
}

/// Laws that describe the environment correctly.
pub fn standard() -> LawLibrary {
    load(STANDARD).expect("bundled laws parse")
}

/// Deliberately wrong laws on their own.
pub fn distractors() -> LawLibrary {
    load(&[DISTRACTORS]).expect("bundled laws parse")
}

/// Standard laws followed by the distractors.
pub fn full() -> LawLibrary {
    standard().merge(distractors()).expect("bundled law names are unique")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_files_load() {
        for (name, src) in STANDARD.iter().chain([&DISTRACTORS]) {
            if let Err(e) = LawLibrary::parse_named(name, src) {
                panic!("{e}");
            }
        }
        assert_eq!(full().len(), standard().len() + 5);
    }
}
