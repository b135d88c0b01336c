//! Append-only store for the VR app's six tables.
//!
//! Each table is one `<name>.jsonl` file in the store directory. The first
//! line is a header `{"table":..,"version":..,"fields":[..]}` and every
//! further line is one JSON record. Records are only ever appended.
//!
//! | table            | key                    | references                          |
//! |------------------|------------------------|-------------------------------------|
//! | users            | id                     |                                     |
//! | environments     | id                     |                                     |
//! | languages        | id                     |                                     |
//! | silent_reading   | id                     | users, environments, languages      |
//! | rosenberg        | id                     | users, environments                 |
//! | emotional_states | (rosenberg_id, item)   | rosenberg                           |

use std::fs::{self, OpenOptions};
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use lexisupport_core::psychometrics::{
    score_answers, validate, Agreement, Band, Environment, Language, RosenbergSession, SilentReadingSession,
    UserRecord, Violation,
};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Table {
    Users,
    Environments,
    Languages,
    SilentReading,
    Rosenberg,
    EmotionalStates,
}

impl Table {
    pub const ALL: [Table; 6] = [
        Table::Users,
        Table::Environments,
        Table::Languages,
        Table::SilentReading,
        Table::Rosenberg,
        Table::EmotionalStates,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Table::Users => "users",
            Table::Environments => "environments",
            Table::Languages => "languages",
            Table::SilentReading => "silent_reading",
            Table::Rosenberg => "rosenberg",
            Table::EmotionalStates => "emotional_states",
        }
    }

    pub fn fields(self) -> &'static [&'static str] {
        match self {
            Table::Users => &[
                "id",
                "name",
                "surname",
                "age",
                "gender",
                "email",
                "associated_difficulties",
                "additional_difficulties",
                "registration_date",
            ],
            Table::Environments => &["id", "name"],
            Table::Languages => &["id", "name"],
            Table::SilentReading => &[
                "id",
                "user_id",
                "environment",
                "language",
                "start_time",
                "error_count",
                "interaction_times",
                "voice_recognition_errors",
            ],
            Table::Rosenberg => &["id", "user_id", "environment", "start_time", "elapsed_time", "total", "band"],
            Table::EmotionalStates => &["rosenberg_id", "item", "answer"],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct Header {
    table: String,
    version: u32,
    fields: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvironmentRow {
    pub id: u8,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LanguageRow {
    pub id: u8,
    pub name: Language,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ReadingRow {
    id: u64,
    user_id: u32,
    environment: u8,
    language: Language,
    start_time: i64,
    error_count: u8,
    interaction_times: Vec<f64>,
    voice_recognition_errors: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RosenbergRow {
    id: u64,
    user_id: u32,
    environment: u8,
    start_time: i64,
    elapsed_time: f64,
    total: u8,
    band: Band,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EmotionalStateRow {
    rosenberg_id: u64,
    item: u8,
    answer: Agreement,
}

/// A stored silent-reading session and its key.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoredReading {
    pub id: u64,
    pub session: SilentReadingSession,
}

/// A stored Rosenberg session, its key and the score recorded with it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoredRosenberg {
    pub id: u64,
    pub session: RosenbergSession,
    pub total: u8,
    pub band: Band,
}

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{table} line {line}: {message}")]
    Parse { table: &'static str, line: usize, message: String },
    #[error("{table}: {message}")]
    Schema { table: &'static str, message: String },
    #[error("invalid record: {}", list(.0))]
    Invalid(Vec<Violation>),
    #[error("unknown user id {0}")]
    UnknownUser(u32),
    #[error("unknown environment id {0}")]
    UnknownEnvironment(u8),
    #[error("language {0:?} is not in the languages table")]
    UnknownLanguage(Language),
    #[error("user id {0} already exists")]
    DuplicateUser(u32),
}

fn list(v: &[Violation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

impl StoreError {
    /// Referential and validation failures are data errors, the rest are
    /// environment or corruption problems.
    pub fn is_data_error(&self) -> bool {
        !matches!(self, StoreError::Io { .. })
    }
}

/// Filter for [`SessionStore::list_reading`] and
/// [`SessionStore::list_rosenberg`]. Time bounds are inclusive Unix seconds.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SessionFilter {
    pub user: Option<u32>,
    pub environment: Option<u8>,
    pub from: Option<i64>,
    pub to: Option<i64>,
}

impl SessionFilter {
    pub fn matches(&self, user: u32, environment: u8, start: i64) -> bool {
        self.user.map_or(true, |u| u == user)
            && self.environment.map_or(true, |e| e == environment)
            && self.from.map_or(true, |f| start >= f)
            && self.to.map_or(true, |t| start <= t)
    }
}

#[derive(Debug, Clone)]
pub struct SessionStore {
    dir: PathBuf,
}

impl SessionStore {
    /// Creates any missing table file. A new environments or languages
    /// table is filled with the fixed reference rows.
    pub fn init(dir: &Path) -> Result<SessionStore, StoreError> {
        fs::create_dir_all(dir).map_err(|source| StoreError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        let store = SessionStore { dir: dir.to_path_buf() };
        for table in Table::ALL {
            let path = store.path(table);
            if path.exists() {
                continue;
            }
            let header = Header {
                table: table.name().into(),
                version: SCHEMA_VERSION,
                fields: table.fields().iter().map(|f| f.to_string()).collect(),
            };
            let mut text = json_line(&header);
            match table {
                Table::Environments => {
                    for e in Environment::ALL {
                        text.push_str(&json_line(&EnvironmentRow {
                            id: e.id(),
                            name: e.name().into(),
                        }));
                    }
                }
                Table::Languages => {
                    for (i, l) in Language::ALL.into_iter().enumerate() {
                        text.push_str(&json_line(&LanguageRow { id: i as u8 + 1, name: l }));
                    }
                }
                _ => {}
            }
            fs::write(&path, text).map_err(|source| StoreError::Io { path, source })?;
        }
        SessionStore::open(dir)
    }

    /// Opens an initialized store, checking every table header.
    pub fn open(dir: &Path) -> Result<SessionStore, StoreError> {
        let store = SessionStore { dir: dir.to_path_buf() };
        for table in Table::ALL {
            store.lines(table)?;
        }
        Ok(store)
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path(&self, table: Table) -> PathBuf {
        self.dir.join(format!("{}.jsonl", table.name()))
    }

    /// Data lines of a table, after checking its header.
    fn lines(&self, table: Table) -> Result<Vec<String>, StoreError> {
        let path = self.path(table);
        let text = fs::read_to_string(&path).map_err(|source| StoreError::Io { path, source })?;
        let mut lines = text.lines();
        let schema = |message: String| StoreError::Schema {
            table: table.name(),
            message,
        };
        let header: Header = serde_json::from_str(lines.next().unwrap_or(""))
            .map_err(|e| schema(format!("bad header: {e}")))?;
        if header.table != table.name() {
            return Err(schema(format!("header names table {:?}", header.table)));
        }
        if header.version != SCHEMA_VERSION {
            return Err(schema(format!("unsupported schema version {}", header.version)));
        }
        if header.fields != table.fields() {
            return Err(schema("field list differs from the schema".into()));
        }
        Ok(lines.map(str::to_string).collect())
    }

    fn rows<T: DeserializeOwned>(&self, table: Table) -> Result<Vec<T>, StoreError> {
        self.lines(table)?
            .iter()
            .enumerate()
            .map(|(i, l)| {
                serde_json::from_str(l).map_err(|e| StoreError::Parse {
                    table: table.name(),
                    line: i + 2,
                    message: e.to_string(),
                })
            })
            .collect()
    }

    fn append(&self, table: Table, lines: &str) -> Result<(), StoreError> {
        let path = self.path(table);
        let io = |source| StoreError::Io {
            path: path.clone(),
            source,
        };
        let mut f = OpenOptions::new().append(true).open(&path).map_err(io)?;
        f.write_all(lines.as_bytes()).map_err(io)?;
        f.sync_data().map_err(io)
    }

    pub fn users(&self) -> Result<Vec<UserRecord>, StoreError> {
        self.rows(Table::Users)
    }

    pub fn environments(&self) -> Result<Vec<EnvironmentRow>, StoreError> {
        self.rows(Table::Environments)
    }

    pub fn languages(&self) -> Result<Vec<LanguageRow>, StoreError> {
        self.rows(Table::Languages)
    }

    pub fn add_user(&self, user: &UserRecord) -> Result<(), StoreError> {
        let v = validate(user);
        if !v.is_empty() {
            return Err(StoreError::Invalid(v));
        }
        if self.users()?.iter().any(|u| u.id == user.id) {
            return Err(StoreError::DuplicateUser(user.id));
        }
        self.append(Table::Users, &json_line(user))
    }

    fn check_refs(&self, user: u32, environment: u8) -> Result<(), StoreError> {
        if !self.users()?.iter().any(|u| u.id == user) {
            return Err(StoreError::UnknownUser(user));
        }
        if !self.environments()?.iter().any(|e| e.id == environment) {
            return Err(StoreError::UnknownEnvironment(environment));
        }
        Ok(())
    }

    fn next_id(&self, table: Table) -> Result<u64, StoreError> {
        #[derive(Deserialize)]
        struct Id {
            id: u64,
        }
        Ok(self
            .rows::<Id>(table)?
            .iter()
            .map(|r| r.id)
            .max()
            .map_or(1, |m| m + 1))
    }

    /// Validates, checks references and appends; returns the new key.
    pub fn store_reading(&self, s: &SilentReadingSession) -> Result<u64, StoreError> {
        let v = validate(s);
        if !v.is_empty() {
            return Err(StoreError::Invalid(v));
        }
        self.check_refs(s.user_id, s.environment)?;
        if !self.languages()?.iter().any(|l| l.name == s.language) {
            return Err(StoreError::UnknownLanguage(s.language));
        }
        let id = self.next_id(Table::SilentReading)?;
        let row = ReadingRow {
            id,
            user_id: s.user_id,
            environment: s.environment,
            language: s.language,
            start_time: s.start_time,
            error_count: s.error_count,
            interaction_times: s.interaction_times.clone(),
            voice_recognition_errors: s.voice_recognition_errors,
        };
        self.append(Table::SilentReading, &json_line(&row))?;
        Ok(id)
    }

    /// Appends the scored session and one emotional-state row per answer.
    pub fn store_rosenberg(&self, s: &RosenbergSession) -> Result<u64, StoreError> {
        let v = validate(s);
        if !v.is_empty() {
            return Err(StoreError::Invalid(v));
        }
        self.check_refs(s.user_id, s.environment)?;
        let score = score_answers(&s.answers).map_err(|e| StoreError::Invalid(vec![Violation {
            field: "answers",
            message: e.to_string(),
        }]))?;
        let id = self.next_id(Table::Rosenberg)?;
        // answers first so a crash never leaves a session without them
        let answers: String = s
            .answers
            .iter()
            .enumerate()
            .map(|(i, &answer)| {
                json_line(&EmotionalStateRow {
                    rosenberg_id: id,
                    item: i as u8 + 1,
                    answer,
                })
            })
            .collect();
        self.append(Table::EmotionalStates, &answers)?;
        let row = RosenbergRow {
            id,
            user_id: s.user_id,
            environment: s.environment,
            start_time: s.start_time,
            elapsed_time: s.elapsed_time,
            total: score.total,
            band: score.band,
        };
        self.append(Table::Rosenberg, &json_line(&row))?;
        Ok(id)
    }

    pub fn list_reading(&self, filter: &SessionFilter) -> Result<Vec<StoredReading>, StoreError> {
        Ok(self
            .rows::<ReadingRow>(Table::SilentReading)?
            .into_iter()
            .filter(|r| filter.matches(r.user_id, r.environment, r.start_time))
            .map(|r| StoredReading {
                id: r.id,
                session: SilentReadingSession {
                    user_id: r.user_id,
                    environment: r.environment,
                    language: r.language,
                    start_time: r.start_time,
                    error_count: r.error_count,
                    interaction_times: r.interaction_times,
                    voice_recognition_errors: r.voice_recognition_errors,
                },
            })
            .collect())
    }

    pub fn list_rosenberg(&self, filter: &SessionFilter) -> Result<Vec<StoredRosenberg>, StoreError> {
        let states: Vec<EmotionalStateRow> = self.rows(Table::EmotionalStates)?;
        Ok(self
            .rows::<RosenbergRow>(Table::Rosenberg)?
            .into_iter()
            .filter(|r| filter.matches(r.user_id, r.environment, r.start_time))
            .map(|r| {
                let mut items: Vec<&EmotionalStateRow> = states.iter().filter(|s| s.rosenberg_id == r.id).collect();
                items.sort_by_key(|s| s.item);
                StoredRosenberg {
                    id: r.id,
                    session: RosenbergSession {
                        user_id: r.user_id,
                        environment: r.environment,
                        start_time: r.start_time,
                        elapsed_time: r.elapsed_time,
                        answers: items.iter().map(|s| s.answer).collect(),
                    },
                    total: r.total,
                    band: r.band,
                }
            })
            .collect())
    }
}

fn json_line<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string(value).expect("records serialize");
    s.push('\n');
    s
}
