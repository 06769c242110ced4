use std::collections::{BTreeMap, HashSet};
use std::fs::{self, File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};
use std::time::{SystemTime, UNIX_EPOCH};

use arc_swap::ArcSwap;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::session::{listener_order, RatingRecord, SessionConfig, TestKind, TestSession};
use super::stats::{aggregate_means, compute_results, score_summary, Aggregate, AggregateInput, SessionResults};
use super::EvalError;

pub const SESSIONS_LOG: &str = "sessions.jsonl";
pub const RATINGS_LOG: &str = "ratings.jsonl";

struct SessionState {
    session: TestSession,
    ratings: Vec<RatingRecord>,
    rated: HashSet<(String, String)>,
}

impl SessionState {
    fn new(session: TestSession) -> SessionState {
        SessionState { session, ratings: Vec::new(), rated: HashSet::new() }
    }

    fn key(r: &RatingRecord) -> (String, String) {
        (r.listener_id.clone(), r.stimulus_id.clone())
    }
}

#[derive(Default)]
struct Snapshot {
    sessions: BTreeMap<String, Arc<SessionState>>,
}

struct Writer {
    sessions: File,
    ratings: File,
    next_id: u64,
}

/// What a listener should rate next. The stimulus role is deliberately absent.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct NextStimulus {
    pub session_id: String,
    pub stimulus_id: String,
    pub kind: TestKind,
    pub completed: usize,
    pub total: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub option_labels: Option<Vec<String>>,
    /// Reference audio for similarity sessions.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub reference_stimulus_ids: Vec<String>,
}

/// Durable listening-test state: two append-only JSON-lines logs and an
/// in-memory index rebuilt from them on open. Writes go through one lock;
/// reads use immutable snapshots and never wait for writers.
pub struct EvalStore {
    dir: PathBuf,
    writer: Mutex<Writer>,
    snapshot: ArcSwap<Snapshot>,
}

/// Reads a JSON-lines log. A final line without a newline is a torn write:
/// it is dropped and cut from the file.
fn replay<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, EvalError> {
    if !path.exists() {
        return Ok(Vec::new());
    }
    let mut text = fs::read_to_string(path)?;
    if !text.is_empty() && !text.ends_with('\n') {
        let keep = text.rfind('\n').map_or(0, |i| i + 1);
        text.truncate(keep);
        OpenOptions::new().write(true).open(path)?.set_len(keep as u64)?;
    }
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| EvalError::CorruptLog { path: path.to_path_buf(), line: i + 1, reason: e.to_string() })
        })
        .collect()
}

fn append(path: &Path) -> Result<File, EvalError> {
    Ok(OpenOptions::new().create(true).append(true).open(path)?)
}

fn write_line<T: Serialize>(file: &mut File, value: &T) -> Result<(), EvalError> {
    let mut line = serde_json::to_string(value).expect("log records serialize");
    line.push('\n');
    file.write_all(line.as_bytes())?;
    file.sync_data()?;
    Ok(())
}

fn now_ms() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_millis() as u64)
}

impl EvalStore {
    /// Opens or creates a store in `dir`, replaying both logs.
    pub fn open(dir: impl AsRef<Path>) -> Result<EvalStore, EvalError> {
        let dir = dir.as_ref().to_path_buf();
        fs::create_dir_all(&dir)?;
        let sessions_path = dir.join(SESSIONS_LOG);
        let ratings_path = dir.join(RATINGS_LOG);
        let mut states: BTreeMap<String, SessionState> = BTreeMap::new();
        for (i, session) in replay::<TestSession>(&sessions_path)?.into_iter().enumerate() {
            if states.contains_key(&session.id) {
                return Err(EvalError::CorruptLog { path: sessions_path, line: i + 1, reason: format!("session {} repeated", session.id) });
            }
            states.insert(session.id.clone(), SessionState::new(session));
        }
        for (i, rating) in replay::<RatingRecord>(&ratings_path)?.into_iter().enumerate() {
            let corrupt = |reason: String| EvalError::CorruptLog { path: ratings_path.clone(), line: i + 1, reason };
            let state = states.get_mut(&rating.session_id).ok_or_else(|| corrupt(format!("unknown session {}", rating.session_id)))?;
            state.session.check_rating(&rating).map_err(|e| corrupt(e.to_string()))?;
            if !state.rated.insert(SessionState::key(&rating)) {
                return Err(corrupt(format!("duplicate rating by {} for {}", rating.listener_id, rating.stimulus_id)));
            }
            state.ratings.push(rating);
        }
        let writer = Writer { sessions: append(&sessions_path)?, ratings: append(&ratings_path)?, next_id: states.len() as u64 + 1 };
        let snapshot = Snapshot { sessions: states.into_iter().map(|(k, v)| (k, Arc::new(v))).collect() };
        Ok(EvalStore { dir, writer: Mutex::new(writer), snapshot: ArcSwap::from_pointee(snapshot) })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn lock(&self) -> std::sync::MutexGuard<'_, Writer> {
        self.writer.lock().unwrap_or_else(|poisoned| poisoned.into_inner())
    }

    fn state(&self, id: &str) -> Result<Arc<SessionState>, EvalError> {
        self.snapshot.load().sessions.get(id).cloned().ok_or_else(|| EvalError::UnknownSession(id.to_string()))
    }

    /// Validates and persists a new session. Without an id in `config` the
    /// next free `sNNNN` is used.
    pub fn create_session(&self, config: &SessionConfig) -> Result<TestSession, EvalError> {
        config.validate()?;
        let mut w = self.lock();
        let current = self.snapshot.load_full();
        let id = match &config.id {
            Some(id) if current.sessions.contains_key(id) => {
                return Err(EvalError::InvalidConfig(format!("session {id} already exists")));
            }
            Some(id) => id.clone(),
            None => loop {
                let candidate = format!("s{:04}", w.next_id);
                w.next_id += 1;
                if !current.sessions.contains_key(&candidate) {
                    break candidate;
                }
            },
        };
        let session = TestSession::from_config(config, &id)?;
        write_line(&mut w.sessions, &session)?;
        let mut sessions = current.sessions.clone();
        sessions.insert(id, Arc::new(SessionState::new(session.clone())));
        self.snapshot.store(Arc::new(Snapshot { sessions }));
        Ok(session)
    }

    /// Appends one rating. Each (listener, stimulus) pair is accepted once.
    pub fn submit_rating(&self, mut rating: RatingRecord) -> Result<RatingRecord, EvalError> {
        let mut w = self.lock();
        let current = self.snapshot.load_full();
        let state = current.sessions.get(&rating.session_id).ok_or_else(|| EvalError::UnknownSession(rating.session_id.clone()))?;
        state.session.check_rating(&rating)?;
        let key = SessionState::key(&rating);
        if state.rated.contains(&key) {
            return Err(EvalError::DuplicateRating { listener: key.0, stimulus: key.1 });
        }
        if rating.timestamp == 0 {
            rating.timestamp = now_ms();
        }
        write_line(&mut w.ratings, &rating)?;
        let mut next = SessionState { session: state.session.clone(), ratings: state.ratings.clone(), rated: state.rated.clone() };
        next.rated.insert(key);
        next.ratings.push(rating.clone());
        let mut sessions = current.sessions.clone();
        sessions.insert(rating.session_id.clone(), Arc::new(next));
        self.snapshot.store(Arc::new(Snapshot { sessions }));
        Ok(rating)
    }

    pub fn session(&self, id: &str) -> Result<TestSession, EvalError> {
        Ok(self.state(id)?.session.clone())
    }

    pub fn sessions(&self) -> Vec<TestSession> {
        self.snapshot.load().sessions.values().map(|s| s.session.clone()).collect()
    }

    /// Ratings of one session in log order.
    pub fn ratings(&self, id: &str) -> Result<Vec<RatingRecord>, EvalError> {
        Ok(self.state(id)?.ratings.clone())
    }

    /// First stimulus in the listener's seeded order they have not rated,
    /// or `None` once they are done.
    pub fn next_stimulus(&self, session_id: &str, listener_id: &str) -> Result<Option<NextStimulus>, EvalError> {
        if listener_id.trim().is_empty() {
            return Err(EvalError::InvalidListener);
        }
        let state = self.state(session_id)?;
        let session = &state.session;
        let order = listener_order(session, listener_id);
        let is_rated = |i: &usize| state.rated.contains(&(listener_id.to_string(), session.stimuli[*i].id.clone()));
        let completed = order.iter().filter(|i| is_rated(i)).count();
        let Some(&next) = order.iter().find(|i| !is_rated(i)) else {
            return Ok(None);
        };
        let stimulus = &session.stimuli[next];
        Ok(Some(NextStimulus {
            session_id: session.id.clone(),
            stimulus_id: stimulus.id.clone(),
            kind: session.kind,
            completed,
            total: order.len(),
            option_labels: stimulus.option_labels.clone(),
            reference_stimulus_ids: session.references().map(|s| s.id.clone()).collect(),
        }))
    }

    /// Audio file behind a stimulus id of the form `{session}-{index}`.
    pub fn stimulus_audio(&self, stimulus_id: &str) -> Result<PathBuf, EvalError> {
        let unknown = || EvalError::UnknownStimulus { session: String::new(), stimulus: stimulus_id.to_string() };
        let (session_id, _) = stimulus_id.rsplit_once('-').ok_or_else(unknown)?;
        let state = self.state(session_id)?;
        state.session.stimulus(stimulus_id).map(|s| s.audio_path.clone()).ok_or_else(unknown)
    }

    pub fn results(&self, session_id: &str, trim: Option<f64>) -> Result<SessionResults, EvalError> {
        let state = self.state(session_id)?;
        compute_results(&state.session, &state.ratings, trim)
    }

    /// Combines the synthesized-stimulus means of several opinion-score
    /// sessions. An empty `ids` selects every rated session of `kind`.
    pub fn aggregate(&self, kind: TestKind, ids: &[String]) -> Result<Aggregate, EvalError> {
        if !kind.is_scale() {
            return Err(EvalError::InvalidConfig(format!("{kind} sessions have no mean score to aggregate")));
        }
        let snapshot = self.snapshot.load();
        let mut inputs = Vec::new();
        if ids.is_empty() {
            for state in snapshot.sessions.values().filter(|s| s.session.kind == kind) {
                if let Ok(summary) = score_summary(&state.session, &state.ratings, None) {
                    inputs.push(AggregateInput::from(&summary.synthesized));
                }
            }
        } else {
            for id in ids {
                let state = snapshot.sessions.get(id).ok_or_else(|| EvalError::UnknownSession(id.clone()))?;
                if state.session.kind != kind {
                    return Err(EvalError::WrongKind { session: id.clone(), expected: kind, found: state.session.kind });
                }
                inputs.push(AggregateInput::from(&score_summary(&state.session, &state.ratings, None)?.synthesized));
            }
        }
        aggregate_means(&inputs)
    }
}
