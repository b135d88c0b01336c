//! Rosenberg self-esteem scoring and the VR session data model.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const ROSENBERG_ITEMS: usize = 10;
/// 1-based positions of the negatively worded items.
pub const REVERSED_ITEMS: [usize; 5] = [2, 5, 6, 8, 9];
pub const INTERACTION_FIELDS: usize = 9;
pub const MAX_READING_ERRORS: u8 = 9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Agreement {
    StronglyAgree,
    Agree,
    Disagree,
    StronglyDisagree,
}

impl Agreement {
    pub const ALL: [Agreement; 4] = [
        Agreement::StronglyAgree,
        Agreement::Agree,
        Agreement::Disagree,
        Agreement::StronglyDisagree,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Agreement::StronglyAgree => "strongly_agree",
            Agreement::Agree => "agree",
            Agreement::Disagree => "disagree",
            Agreement::StronglyDisagree => "strongly_disagree",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown agreement level {0:?}")]
pub struct UnknownAgreement(pub String);

impl FromStr for Agreement {
    type Err = UnknownAgreement;

    /// Accepts `strongly_agree`, `strongly agree`, `SA`, etc.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm: String = s
            .trim()
            .chars()
            .map(|c| if c == ' ' || c == '-' { '_' } else { c.to_ascii_lowercase() })
            .collect();
        match norm.as_str() {
            "strongly_agree" | "sa" => Ok(Agreement::StronglyAgree),
            "agree" | "a" => Ok(Agreement::Agree),
            "disagree" | "d" => Ok(Agreement::Disagree),
            "strongly_disagree" | "sd" => Ok(Agreement::StronglyDisagree),
            _ => Err(UnknownAgreement(s.into())),
        }
    }
}

impl fmt::Display for Agreement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

pub fn score_item(response: Agreement, reversed: bool) -> u8 {
    let s = match response {
        Agreement::StronglyAgree => 4,
        Agreement::Agree => 3,
        Agreement::Disagree => 2,
        Agreement::StronglyDisagree => 1,
    };
    if reversed {
        5 - s
    } else {
        s
    }
}

pub fn is_reversed(item: usize) -> bool {
    REVERSED_ITEMS.contains(&item)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Band {
    Low,
    Medium,
    High,
}

impl Band {
    /// High 30-40, Medium 26-29, Low up to 25.
    pub fn of(total: u8) -> Band {
        match total {
            30.. => Band::High,
            26..=29 => Band::Medium,
            _ => Band::Low,
        }
    }
}

impl fmt::Display for Band {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Band::Low => "Low",
            Band::Medium => "Medium",
            Band::High => "High",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelfEsteemScore {
    pub total: u8,
    pub band: Band,
}

impl fmt::Display for SelfEsteemScore {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.total, self.band)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScoringError {
    #[error("expected {ROSENBERG_ITEMS} answers, got {0}")]
    WrongAnswerCount(usize),
}

pub fn score_answers(answers: &[Agreement]) -> Result<SelfEsteemScore, ScoringError> {
    if answers.len() != ROSENBERG_ITEMS {
        return Err(ScoringError::WrongAnswerCount(answers.len()));
    }
    let total = answers
        .iter()
        .enumerate()
        .map(|(i, &a)| score_item(a, is_reversed(i + 1)))
        .sum();
    Ok(SelfEsteemScore {
        total,
        band: Band::of(total),
    })
}

pub fn score_rosenberg(session: &RosenbergSession) -> Result<SelfEsteemScore, ScoringError> {
    score_answers(&session.answers)
}

/// Answers giving the highest possible total.
pub fn maximal_pattern() -> [Agreement; ROSENBERG_ITEMS] {
    core::array::from_fn(|i| {
        if is_reversed(i + 1) {
            Agreement::StronglyDisagree
        } else {
            Agreement::StronglyAgree
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Environment {
    NoisyClass = 1,
    NaturalLandscape = 2,
    DiaphanousRoom = 3,
    InfiniteRoom = 4,
}

impl Environment {
    pub const ALL: [Environment; 4] = [
        Environment::NoisyClass,
        Environment::NaturalLandscape,
        Environment::DiaphanousRoom,
        Environment::InfiniteRoom,
    ];

    pub fn id(self) -> u8 {
        self as u8
    }

    pub fn from_id(id: u8) -> Option<Environment> {
        Environment::ALL.into_iter().find(|e| e.id() == id)
    }

    pub fn name(self) -> &'static str {
        match self {
            Environment::NoisyClass => "Noisy class",
            Environment::NaturalLandscape => "Natural landscape",
            Environment::DiaphanousRoom => "Diaphanous room",
            Environment::InfiniteRoom => "Infinite room",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Language {
    English,
    Italian,
    Spanish,
    French,
}

impl Language {
    pub const ALL: [Language; 4] = [Language::English, Language::Italian, Language::Spanish, Language::French];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AssociatedDifficulty {
    Dysorthography,
    Dyscalculia,
    Dysgraphia,
    Other,
}

/// A proleptic Gregorian date, serialized as `YYYY-MM-DD`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct CalendarDate {
    pub year: u16,
    pub month: u8,
    pub day: u8,
}

fn days_in_month(year: u16, month: u8) -> u8 {
    match month {
        1 | 3 | 5 | 7 | 8 | 10 | 12 => 31,
        4 | 6 | 9 | 11 => 30,
        2 if (year % 4 == 0 && year % 100 != 0) || year % 400 == 0 => 29,
        2 => 28,
        _ => 0,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid date {0:?}, expected YYYY-MM-DD")]
pub struct InvalidDate(pub String);

impl CalendarDate {
    pub fn new(year: u16, month: u8, day: u8) -> Option<Self> {
        (day >= 1 && day <= days_in_month(year, month)).then_some(CalendarDate { year, month, day })
    }
}

impl FromStr for CalendarDate {
    type Err = InvalidDate;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || InvalidDate(s.into());
        let b = s.as_bytes();
        if b.len() != 10 || b[4] != b'-' || b[7] != b'-' {
            return Err(err());
        }
        let num = |r: core::ops::Range<usize>| -> Option<u16> {
            let part = &s[r];
            part.bytes().all(|c| c.is_ascii_digit()).then(|| part.parse().ok())?
        };
        let (y, m, d) = (num(0..4).ok_or_else(err)?, num(5..7).ok_or_else(err)?, num(8..10).ok_or_else(err)?);
        CalendarDate::new(y, m as u8, d as u8).ok_or_else(err)
    }
}

impl TryFrom<String> for CalendarDate {
    type Error = InvalidDate;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<CalendarDate> for String {
    fn from(d: CalendarDate) -> String {
        alloc::format!("{d}")
    }
}

impl fmt::Display for CalendarDate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}-{:02}", self.year, self.month, self.day)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UserRecord {
    pub id: u32,
    pub name: String,
    pub surname: String,
    pub age: u32,
    pub gender: String,
    pub email: String,
    pub associated_difficulties: Vec<AssociatedDifficulty>,
    pub additional_difficulties: String,
    pub registration_date: CalendarDate,
}

/// One silent-reading run. `start_time` is Unix seconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SilentReadingSession {
    pub user_id: u32,
    pub environment: u8,
    pub language: Language,
    pub start_time: i64,
    pub error_count: u8,
    /// Seconds per interaction.
    pub interaction_times: Vec<f64>,
    pub voice_recognition_errors: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RosenbergSession {
    pub user_id: u32,
    pub environment: u8,
    pub start_time: i64,
    /// Seconds.
    pub elapsed_time: f64,
    pub answers: Vec<Agreement>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub field: &'static str,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

fn violation(field: &'static str, message: impl Into<String>) -> Violation {
    Violation {
        field,
        message: message.into(),
    }
}

fn check_environment(id: u8, out: &mut Vec<Violation>) {
    if Environment::from_id(id).is_none() {
        out.push(violation("environment", alloc::format!("unknown environment id {id}")));
    }
}

/// `local@domain.tld` with no whitespace and a single `@`.
pub fn is_valid_email(email: &str) -> bool {
    let Some((local, domain)) = email.split_once('@') else {
        return false;
    };
    !local.is_empty()
        && !domain.contains('@')
        && !email.chars().any(char::is_whitespace)
        && domain.split('.').count() >= 2
        && domain.split('.').all(|p| !p.is_empty())
}

/// A record that can be checked with [`validate`]. An empty list means the
/// record passes.
pub trait Validate {
    fn violations(&self) -> Vec<Violation>;
}

pub fn validate<T: Validate + ?Sized>(record: &T) -> Vec<Violation> {
    record.violations()
}

impl Validate for UserRecord {
    fn violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.age == 0 {
            out.push(violation("age", "must be positive"));
        }
        if !is_valid_email(&self.email) {
            out.push(violation("email", alloc::format!("not a valid address: {:?}", self.email)));
        }
        let mut seen = Vec::new();
        for d in &self.associated_difficulties {
            if seen.contains(d) {
                out.push(violation("associated_difficulties", "duplicate entry"));
                break;
            }
            seen.push(*d);
        }
        out
    }
}

impl Validate for SilentReadingSession {
    fn violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        check_environment(self.environment, &mut out);
        if self.error_count > MAX_READING_ERRORS {
            out.push(violation(
                "error_count",
                alloc::format!("{} outside 0-{MAX_READING_ERRORS}", self.error_count),
            ));
        }
        if self.interaction_times.len() != INTERACTION_FIELDS {
            out.push(violation(
                "interaction_times",
                alloc::format!("expected {INTERACTION_FIELDS} durations, got {}", self.interaction_times.len()),
            ));
        }
        if let Some(i) = self.interaction_times.iter().position(|t| !(t.is_finite() && *t > 0.0)) {
            out.push(violation(
                "interaction_times",
                alloc::format!("duration {} must be positive", i + 1),
            ));
        }
        out
    }
}

impl Validate for RosenbergSession {
    fn violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        check_environment(self.environment, &mut out);
        if self.answers.len() != ROSENBERG_ITEMS {
            out.push(violation(
                "answers",
                alloc::format!("expected {ROSENBERG_ITEMS} answers, got {}", self.answers.len()),
            ));
        }
        if !(self.elapsed_time.is_finite() && self.elapsed_time > 0.0) {
            out.push(violation("elapsed_time", "must be positive"));
        }
        out
    }
}
