//! Difficulties (P1–P12), support tools (T1–T17) and learning strategies
//! (S1–S22) with their survey labels.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

pub const N_DIFFICULTIES: usize = 12;
pub const N_TOOLS: usize = 17;
pub const N_STRATEGIES: usize = 22;
pub const N_TARGETS: usize = N_TOOLS + N_STRATEGIES;

const DIFFICULTY_LABELS: [&str; N_DIFFICULTIES] = [
    "Reading",
    "Writing",
    "Understanding difficult words",
    "Understanding the lessons",
    "Concentration",
    "Paying attention during presential lessons",
    "Paying attention during online lessons",
    "Memorising recently studied concepts",
    "Remembering concepts studied during the exam",
    "Study time management",
    "Taking notes",
    "Limited time available to prepare a task/question/exam",
];

const TOOL_LABELS: [&str; N_TOOLS] = [
    "Human voice audio book",
    "Robotic voice audio book",
    "Different colour words",
    "Using the EasyReading font",
    "Using a smart pen or tablet to take notes and record voice",
    "Clearer layout of the study material",
    "Having the key words of the text highlighted",
    "Prepared concept maps",
    "Prepared schemes",
    "Prepared summaries",
    "E-Books",
    "Digital tutor",
    "Images to help understand the meaning of difficult words",
    "Images that help to memorise a concept",
    "Audio recording of lessons",
    "Video lessons",
    "Supplementing study material with internet research",
];

const STRATEGY_LABELS: [&str; N_STRATEGIES] = [
    "A person reading for him/her",
    "A map made by himself/herself",
    "A scheme made by himself/herself",
    "A summary made by himself/herself",
    "Repeat the studied material",
    "Marking keywords",
    "Underlining with different colours",
    "Having a study group",
    "Having a tutor",
    "Dyslexic student group to exchange resources",
    "Presential lessons",
    "Online lessons available",
    "Taking breaks during lessons",
    "Lesson slides available",
    "Recording the lesson",
    "Taking notes",
    "Having the lesson plan in advance",
    "Dividing an examination/task/question into several parts",
    "Only written tests",
    "Only oral tests",
    "Conducting the exams in the presence of the professor alone",
    "Having an online database with notes made by other students",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FeatureKind {
    Difficulty,
    Tool,
    Strategy,
}

impl FeatureKind {
    pub fn prefix(self) -> char {
        match self {
            FeatureKind::Difficulty => 'P',
            FeatureKind::Tool => 'T',
            FeatureKind::Strategy => 'S',
        }
    }

    pub fn count(self) -> usize {
        match self {
            FeatureKind::Difficulty => N_DIFFICULTIES,
            FeatureKind::Tool => N_TOOLS,
            FeatureKind::Strategy => N_STRATEGIES,
        }
    }
}

/// A catalog identifier such as `P3`, `T7` or `S22`.
///
/// Ordering follows catalog order: difficulties, then tools, then
/// strategies, each by number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FeatureId {
    kind: FeatureKind,
    number: u8,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CatalogError {
    #[error("'{0}' is not a catalog identifier")]
    UnknownIdentifier(String),
    #[error("duplicate identifier {0}")]
    Duplicate(FeatureId),
    #[error("catalog has {found} {kind:?} entries, expected {expected}")]
    WrongCount {
        kind: FeatureKind,
        found: usize,
        expected: usize,
    },
}

impl FeatureId {
    /// `number` is 1-based, as printed.
    pub fn new(kind: FeatureKind, number: usize) -> Option<Self> {
        (1..=kind.count()).contains(&number).then_some(FeatureId {
            kind,
            number: number as u8,
        })
    }

    pub fn difficulty(number: usize) -> Self {
        Self::new(FeatureKind::Difficulty, number).expect("difficulty number out of range")
    }

    pub fn tool(number: usize) -> Self {
        Self::new(FeatureKind::Tool, number).expect("tool number out of range")
    }

    pub fn strategy(number: usize) -> Self {
        Self::new(FeatureKind::Strategy, number).expect("strategy number out of range")
    }

    pub fn kind(self) -> FeatureKind {
        self.kind
    }

    pub fn number(self) -> usize {
        self.number as usize
    }

    pub fn is_target(self) -> bool {
        self.kind != FeatureKind::Difficulty
    }

    /// Position among the 39 targets (tools first), or `None` for difficulties.
    pub fn target_index(self) -> Option<usize> {
        match self.kind {
            FeatureKind::Difficulty => None,
            FeatureKind::Tool => Some(self.number() - 1),
            FeatureKind::Strategy => Some(N_TOOLS + self.number() - 1),
        }
    }

    pub fn from_target_index(index: usize) -> Option<Self> {
        if index < N_TOOLS {
            Some(Self::tool(index + 1))
        } else if index < N_TARGETS {
            Some(Self::strategy(index - N_TOOLS + 1))
        } else {
            None
        }
    }

    pub fn difficulties() -> impl Iterator<Item = FeatureId> {
        (1..=N_DIFFICULTIES).map(Self::difficulty)
    }

    /// All 39 targets in catalog order.
    pub fn targets() -> impl Iterator<Item = FeatureId> {
        (0..N_TARGETS).filter_map(Self::from_target_index)
    }
}

impl fmt::Display for FeatureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.kind.prefix(), self.number)
    }
}

impl FromStr for FeatureId {
    type Err = CatalogError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let unknown = || CatalogError::UnknownIdentifier(s.to_string());
        let mut chars = s.chars();
        let kind = match chars.next() {
            Some('P') => FeatureKind::Difficulty,
            Some('T') => FeatureKind::Tool,
            Some('S') => FeatureKind::Strategy,
            _ => return Err(unknown()),
        };
        let digits = chars.as_str();
        if digits.is_empty() || digits.starts_with('0') {
            return Err(unknown());
        }
        let number: usize = digits.parse().map_err(|_| unknown())?;
        FeatureId::new(kind, number).ok_or_else(unknown)
    }
}

impl Serialize for FeatureId {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for FeatureId {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Identifier → label table. Always holds exactly 12 difficulties,
/// 17 tools and 22 strategies.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureCatalog {
    difficulties: Vec<String>,
    tools: Vec<String>,
    strategies: Vec<String>,
}

impl Default for FeatureCatalog {
    fn default() -> Self {
        Self::standard()
    }
}

impl FeatureCatalog {
    /// The survey's own item wording.
    pub fn standard() -> Self {
        let owned = |labels: &[&str]| labels.iter().map(|s| s.to_string()).collect();
        FeatureCatalog {
            difficulties: owned(&DIFFICULTY_LABELS),
            tools: owned(&TOOL_LABELS),
            strategies: owned(&STRATEGY_LABELS),
        }
    }

    /// Builds a catalog from `(identifier, label)` entries in any order.
    /// Every identifier must appear exactly once.
    pub fn from_entries<I, S>(entries: I) -> Result<Self, CatalogError>
    where
        I: IntoIterator<Item = (FeatureId, S)>,
        S: Into<String>,
    {
        let mut difficulties = alloc::vec![None; N_DIFFICULTIES];
        let mut tools = alloc::vec![None; N_TOOLS];
        let mut strategies = alloc::vec![None; N_STRATEGIES];
        for (id, label) in entries {
            let slot = match id.kind() {
                FeatureKind::Difficulty => &mut difficulties[id.number() - 1],
                FeatureKind::Tool => &mut tools[id.number() - 1],
                FeatureKind::Strategy => &mut strategies[id.number() - 1],
            };
            if slot.is_some() {
                return Err(CatalogError::Duplicate(id));
            }
            *slot = Some(label.into());
        }
        let finish = |kind: FeatureKind, slots: Vec<Option<String>>| {
            let found = slots.iter().filter(|s| s.is_some()).count();
            if found != kind.count() {
                return Err(CatalogError::WrongCount {
                    kind,
                    found,
                    expected: kind.count(),
                });
            }
            Ok(slots.into_iter().flatten().collect())
        };
        Ok(FeatureCatalog {
            difficulties: finish(FeatureKind::Difficulty, difficulties)?,
            tools: finish(FeatureKind::Tool, tools)?,
            strategies: finish(FeatureKind::Strategy, strategies)?,
        })
    }

    pub fn label(&self, id: FeatureId) -> &str {
        let list = match id.kind() {
            FeatureKind::Difficulty => &self.difficulties,
            FeatureKind::Tool => &self.tools,
            FeatureKind::Strategy => &self.strategies,
        };
        &list[id.number() - 1]
    }

    /// Every `(identifier, label)` pair in catalog order.
    pub fn entries(&self) -> impl Iterator<Item = (FeatureId, &str)> + '_ {
        FeatureId::difficulties()
            .chain(FeatureId::targets())
            .map(move |id| (id, self.label(id)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::collections::BTreeSet;

    #[test]
    fn standard_catalog_counts_and_uniqueness() {
        let catalog = FeatureCatalog::standard();
        let ids: Vec<_> = catalog.entries().map(|(id, _)| id).collect();
        assert_eq!(ids.len(), 51);
        assert_eq!(ids.iter().collect::<BTreeSet<_>>().len(), 51);
        assert_eq!(FeatureId::targets().count(), 39);
        assert_eq!(catalog.label(FeatureId::tool(4)), "Using the EasyReading font");
        assert_eq!(catalog.label(FeatureId::difficulty(12)), "Limited time available to prepare a task/question/exam");
        assert_eq!(catalog.label(FeatureId::strategy(20)), "Only oral tests");
    }

    #[test]
    fn parse_and_display_round_trip() {
        for id in FeatureId::difficulties().chain(FeatureId::targets()) {
            let text = id.to_string();
            assert_eq!(text.parse::<FeatureId>().unwrap(), id);
        }
        for bad in ["", "P0", "P13", "T18", "S23", "X1", "T04", "t1", "S"] {
            assert!(bad.parse::<FeatureId>().is_err(), "{bad}");
        }
    }

    #[test]
    fn target_index_is_catalog_order() {
        for (i, id) in FeatureId::targets().enumerate() {
            assert_eq!(id.target_index(), Some(i));
        }
        assert_eq!(FeatureId::difficulty(1).target_index(), None);
        assert!(FeatureId::tool(17) < FeatureId::strategy(1));
    }

    #[test]
    fn from_entries_rejects_incomplete_and_duplicates() {
        let std_cat = FeatureCatalog::standard();
        let entries: Vec<_> = std_cat.entries().map(|(id, l)| (id, l.to_string())).collect();
        assert_eq!(FeatureCatalog::from_entries(entries.clone()).unwrap(), std_cat);

        let mut short = entries.clone();
        short.pop();
        assert!(matches!(
            FeatureCatalog::from_entries(short),
            Err(CatalogError::WrongCount { kind: FeatureKind::Strategy, found: 21, .. })
        ));

        let mut dup = entries;
        dup.push((FeatureId::tool(3), "again".to_string()));
        assert_eq!(
            FeatureCatalog::from_entries(dup),
            Err(CatalogError::Duplicate(FeatureId::tool(3)))
        );
    }
}
