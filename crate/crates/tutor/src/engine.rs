//! The session registry shared by the HTTP service and the CLI.
//!
//! Each session sits behind its own mutex. An action takes the lock with
//! `try_lock`, so a second action arriving while one is in flight is refused
//! with [`EngineError::Busy`] instead of queueing. Sessions of different
//! students never contend. The event record is written while the lock is
//! held; if the write fails, the session is rolled back.

use std::collections::{BTreeMap, HashMap};
use std::io;
use std::path::{Path, PathBuf};
use std::sync::{Arc, RwLock};

use parking_lot::{Mutex, RawMutex};

use crate::exercise::{load_exercise, Exercise, ExerciseView, Warning};
use crate::log::{now_utc, read_log, EventLog, EventRecord, MalformedLog};
use crate::session::{
    dispatch, statement_of, Action, Dispatched, EngineError, SessionState, SessionView, Settings, Snapshot,
};
use crate::stats::{compute_stats, StatFilter, StatReport};

struct SlotState {
    state: SessionState,
    actions: Vec<Action>,
}

struct Slot {
    exercise_id: String,
    group: Option<String>,
    inner: Arc<Mutex<SlotState>>,
}

/// Holds a session's lock; actions on it fail with `Busy` until dropped.
pub struct SessionGuard {
    _guard: parking_lot::ArcMutexGuard<RawMutex, SlotState>,
}

/// What one directory scan found.
#[derive(Debug, Default)]
pub struct DirReport {
    pub loaded: Vec<String>,
    pub warnings: Vec<(PathBuf, Warning)>,
    pub errors: Vec<(PathBuf, String)>,
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct ExerciseSummary {
    pub id: String,
    pub title: String,
}

pub struct Engine {
    exercises: BTreeMap<String, Arc<Exercise>>,
    sessions: RwLock<HashMap<String, Arc<Slot>>>,
    log: Option<EventLog>,
    settings: Settings,
}

impl Engine {
    pub fn new(settings: Settings, log: Option<EventLog>) -> Self {
        Engine { exercises: BTreeMap::new(), sessions: RwLock::new(HashMap::new()), log, settings }
    }

    pub fn settings(&self) -> &Settings {
        &self.settings
    }

    pub fn log_path(&self) -> Option<&Path> {
        self.log.as_ref().map(EventLog::path)
    }

    /// Registers `exercise` under the slug of its name. Two exercises with
    /// the same slug are refused.
    pub fn add_exercise(&mut self, exercise: Exercise) -> Result<String, String> {
        let id = exercise_id(&exercise.name);
        if self.exercises.contains_key(&id) {
            return Err(format!("exercise id `{id}` is already taken"));
        }
        self.exercises.insert(id.clone(), Arc::new(exercise));
        Ok(id)
    }

    /// Loads every `*.xml` file below `dir`. Files that fail to load are
    /// reported and skipped.
    pub fn load_dir(&mut self, dir: &Path) -> io::Result<DirReport> {
        let mut report = DirReport::default();
        for path in xml_files(dir)? {
            let text = match std::fs::read_to_string(&path) {
                Ok(text) => text,
                Err(e) => {
                    report.errors.push((path, e.to_string()));
                    continue;
                }
            };
            match load_exercise(&text) {
                Ok(loaded) => {
                    report.warnings.extend(loaded.warnings.into_iter().map(|w| (path.clone(), w)));
                    match self.add_exercise(loaded.exercise) {
                        Ok(id) => report.loaded.push(id),
                        Err(e) => report.errors.push((path, e)),
                    }
                }
                Err(failure) => {
                    report.warnings.extend(failure.warnings.into_iter().map(|w| (path.clone(), w)));
                    report.errors.extend(failure.errors.into_iter().map(|e| (path.clone(), e.to_string())));
                }
            }
        }
        Ok(report)
    }

    pub fn exercises(&self) -> Vec<ExerciseSummary> {
        self.exercises.iter().map(|(id, e)| ExerciseSummary { id: id.clone(), title: e.title.clone() }).collect()
    }

    pub fn exercise(&self, id: &str) -> Result<&Arc<Exercise>, EngineError> {
        self.exercises.get(id).ok_or_else(|| EngineError::ExerciseNotFound(id.into()))
    }

    pub fn exercise_view(&self, id: &str) -> Result<ExerciseView, EngineError> {
        Ok(self.exercise(id)?.view(id))
    }

    pub fn create_session(&self, exercise_id: &str, group: Option<String>) -> Result<String, EngineError> {
        let exercise = self.exercise(exercise_id)?;
        let id = uuid::Uuid::new_v4().simple().to_string();
        let state = SessionState::start(id.clone(), exercise);
        self.insert(Slot {
            exercise_id: exercise_id.into(),
            group,
            inner: Arc::new(Mutex::new(SlotState { state, actions: Vec::new() })),
        });
        Ok(id)
    }

    fn insert(&self, slot: Slot) {
        let id = slot.inner.lock().state.id.clone();
        self.sessions.write().expect("session map").insert(id, Arc::new(slot));
    }

    fn slot(&self, id: &str) -> Result<Arc<Slot>, EngineError> {
        self.sessions
            .read()
            .expect("session map")
            .get(id)
            .cloned()
            .ok_or_else(|| EngineError::SessionNotFound(id.into()))
    }

    pub fn session_view(&self, id: &str) -> Result<SessionView, EngineError> {
        let slot = self.slot(id)?;
        let inner = slot.inner.lock();
        Ok(inner.state.view(&slot.exercise_id, slot.group.as_deref()))
    }

    /// Takes the session's lock, as an in-flight action would.
    pub fn lock(&self, id: &str) -> Result<SessionGuard, EngineError> {
        let slot = self.slot(id)?;
        let guard = slot.inner.try_lock_arc().ok_or(EngineError::Busy)?;
        Ok(SessionGuard { _guard: guard })
    }

    /// Dispatches `action` and logs it. Returns once the record is durable.
    pub fn act(&self, id: &str, action: Action) -> Result<(Dispatched, Option<EventRecord>), EngineError> {
        let slot = self.slot(id)?;
        let exercise = self.exercise(&slot.exercise_id)?;
        let mut inner = slot.inner.try_lock().ok_or(EngineError::Busy)?;
        let backup = inner.state.clone();
        let dispatched = dispatch(exercise, &mut inner.state, &action, &self.settings)?;
        let mut logged = None;
        if let Some(log) = &self.log {
            let statement_type =
                statement_of(exercise, action.task, dispatched.statement).and_then(|s| s.statement_type.clone());
            let record = EventRecord {
                seq: 0,
                timestamp: now_utc(),
                session: id.into(),
                exercise: slot.exercise_id.clone(),
                group: slot.group.clone(),
                task: action.task,
                statement: dispatched.statement,
                statement_type,
                action: action.kind.name().into(),
                accepted: dispatched.result.accepted,
                classification: dispatched.class.clone(),
                text: action.kind.text(),
                score: dispatched.score,
            };
            match log.append(record) {
                Ok(record) => logged = Some(record),
                Err(e) => {
                    inner.state = backup;
                    return Err(EngineError::Storage(e.0));
                }
            }
        }
        inner.actions.push(action);
        Ok((dispatched, logged))
    }

    pub fn snapshot(&self, id: &str) -> Result<Snapshot, EngineError> {
        let slot = self.slot(id)?;
        let inner = slot.inner.lock();
        Ok(Snapshot {
            version: crate::session::SNAPSHOT_VERSION,
            exercise_id: slot.exercise_id.clone(),
            group: slot.group.clone(),
            state: inner.state.clone(),
            actions: inner.actions.clone(),
        })
    }

    /// Writes one `<session>.json` per session, each via a rename so a
    /// crash never leaves a half-written snapshot.
    pub fn persist_snapshots(&self, dir: &Path) -> io::Result<usize> {
        std::fs::create_dir_all(dir)?;
        let ids: Vec<String> = self.sessions.read().expect("session map").keys().cloned().collect();
        let mut written = 0;
        for id in ids {
            let Ok(snapshot) = self.snapshot(&id) else { continue };
            let tmp = dir.join(format!("{id}.json.tmp"));
            std::fs::write(&tmp, snapshot.to_json())?;
            std::fs::rename(&tmp, dir.join(format!("{id}.json")))?;
            written += 1;
        }
        Ok(written)
    }

    /// Restores sessions from `dir` by replaying their actions. Snapshots
    /// that do not replay to their stored state are skipped with a warning.
    pub fn restore_snapshots(&self, dir: &Path) -> io::Result<(usize, Vec<String>)> {
        let mut warnings = Vec::new();
        let mut restored = 0;
        if !dir.exists() {
            return Ok((0, warnings));
        }
        for entry in std::fs::read_dir(dir)? {
            let path = entry?.path();
            if path.extension().is_none_or(|e| e != "json") {
                continue;
            }
            let text = std::fs::read_to_string(&path)?;
            let result = Snapshot::from_json(&text).map_err(|e| e.to_string()).and_then(|snapshot| {
                let exercise = self.exercise(&snapshot.exercise_id).map_err(|e| e.to_string())?;
                let state = snapshot.restore(exercise, &self.settings).map_err(|e| e.to_string())?;
                Ok((snapshot, state))
            });
            match result {
                Ok((snapshot, state)) => {
                    self.insert(Slot {
                        exercise_id: snapshot.exercise_id,
                        group: snapshot.group,
                        inner: Arc::new(Mutex::new(SlotState { state, actions: snapshot.actions })),
                    });
                    restored += 1;
                }
                Err(e) => warnings.push(format!("{}: {e}", path.display())),
            }
        }
        Ok((restored, warnings))
    }

    /// Statistics over the event log as it is on disk.
    pub fn stats(&self, filter: &StatFilter) -> Result<StatReport, EngineError> {
        let Some(path) = self.log_path() else { return Ok(StatReport::default()) };
        let bytes = std::fs::read(path).map_err(|e| EngineError::Storage(e.to_string()))?;
        let contents = read_log(&bytes).map_err(|e: MalformedLog| EngineError::Internal(format!("event log {e}")))?;
        Ok(compute_stats(&contents.records, filter))
    }
}

/// The URL-safe id of an exercise name: `Faulty Software System Exercise`
/// becomes `faulty-software-system-exercise`.
pub fn exercise_id(name: &str) -> String {
    let mut id = String::with_capacity(name.len());
    for c in name.chars() {
        if c.is_ascii_alphanumeric() {
            id.push(c.to_ascii_lowercase());
        } else if !id.is_empty() && !id.ends_with('-') {
            id.push('-');
        }
    }
    while id.ends_with('-') {
        id.pop();
    }
    if id.is_empty() {
        id.push_str("exercise");
    }
    id
}

/// `path` itself if it is a file, else every `*.xml` below it, sorted.
pub fn xml_files(path: &Path) -> io::Result<Vec<PathBuf>> {
    if path.is_file() {
        return Ok(vec![path.to_path_buf()]);
    }
    let mut files = Vec::new();
    for entry in walkdir::WalkDir::new(path).sort_by_file_name() {
        let entry = entry.map_err(io::Error::other)?;
        if entry.file_type().is_file() && entry.path().extension().is_some_and(|e| e == "xml") {
            files.push(entry.into_path());
        }
    }
    Ok(files)
}
