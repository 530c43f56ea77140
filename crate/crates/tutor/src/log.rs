//! Append-only event log, one JSON object per line.
//!
//! Fields of a record, in order: `seq`, `timestamp` (UTC, RFC 3339), `session`
//! (random id), `exercise` (exercise id), `group`, `task`, `statement`,
//! `statement_type`, `action`, `accepted`, `classification`, `text`, `score`.
//! Optional fields are omitted when empty. Nothing identifies a person.
//!
//! All appends go through one writer thread. It takes every request queued
//! so far, writes them as one batch, syncs the file and only then answers,
//! so a caller that got a sequence number knows the record is on disk.

use std::fs::{File, OpenOptions};
use std::io::{self, Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};
use std::sync::mpsc;
use std::thread::JoinHandle;

use logic_tutor_core::feedback::ErrorClass;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventRecord {
    pub seq: u64,
    pub timestamp: String,
    pub session: String,
    pub exercise: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<String>,
    pub task: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub statement: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub statement_type: Option<String>,
    pub action: String,
    pub accepted: bool,
    pub classification: ErrorClass,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub score: Option<f64>,
}

impl EventRecord {
    pub fn to_line(&self) -> String {
        let mut line = serde_json::to_string(self).expect("records serialize");
        line.push('\n');
        line
    }
}

pub fn now_utc() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {message}")]
pub struct MalformedLog {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogContents {
    pub records: Vec<EventRecord>,
    pub warnings: Vec<String>,
}

/// Parses log bytes. A final line without its newline is the remains of an
/// interrupted write; it is dropped with a warning.
pub fn read_log(bytes: &[u8]) -> Result<LogContents, MalformedLog> {
    let mut warnings = Vec::new();
    let complete = match bytes.iter().rposition(|b| *b == b'\n') {
        Some(end) => &bytes[..=end],
        None => &bytes[..0],
    };
    if complete.len() < bytes.len() {
        let line = complete.iter().filter(|b| **b == b'\n').count() + 1;
        warnings.push(format!("line {line}: incomplete trailing record discarded"));
    }
    let mut records: Vec<EventRecord> = Vec::new();
    for (i, raw) in complete.split_inclusive(|b| *b == b'\n').enumerate() {
        let line = i + 1;
        let text = std::str::from_utf8(&raw[..raw.len() - 1])
            .map_err(|_| MalformedLog { line, message: "not UTF-8".into() })?;
        let record: EventRecord =
            serde_json::from_str(text).map_err(|e| MalformedLog { line, message: e.to_string() })?;
        if let Some(prev) = records.last() {
            if record.seq != prev.seq + 1 {
                return Err(MalformedLog {
                    line,
                    message: format!("sequence number {} does not follow {}", record.seq, prev.seq),
                });
            }
        }
        records.push(record);
    }
    Ok(LogContents { records, warnings })
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("event log write failed: {0}")]
pub struct LogError(pub String);

struct Request {
    record: EventRecord,
    reply: mpsc::SyncSender<Result<EventRecord, LogError>>,
}

pub struct EventLog {
    path: PathBuf,
    tx: Option<mpsc::Sender<Request>>,
    writer: Option<JoinHandle<()>>,
}

impl EventLog {
    /// Opens `path` for appending, creating it if needed. A torn final line
    /// is cut off first; the returned warnings say so.
    pub fn open(path: impl AsRef<Path>) -> io::Result<(EventLog, Vec<String>)> {
        let path = path.as_ref().to_path_buf();
        let mut file = OpenOptions::new().read(true).append(true).create(true).open(&path)?;
        let mut warnings = Vec::new();
        let mut last_seq = 0;
        if file.metadata()?.is_file() {
            let mut bytes = Vec::new();
            file.read_to_end(&mut bytes)?;
            let contents = read_log(&bytes).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))?;
            if !contents.warnings.is_empty() {
                let keep = bytes.iter().rposition(|b| *b == b'\n').map_or(0, |i| i + 1);
                file.set_len(keep as u64)?;
                file.seek(SeekFrom::End(0))?;
            }
            warnings = contents.warnings;
            last_seq = contents.records.last().map_or(0, |r| r.seq);
        }
        let (tx, rx) = mpsc::channel();
        let writer =
            std::thread::Builder::new().name("event-log".into()).spawn(move || write_loop(file, rx, last_seq))?;
        Ok((EventLog { path, tx: Some(tx), writer: Some(writer) }, warnings))
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// Appends `record`, assigning its sequence number. Returns once the
    /// record is synced to disk.
    pub fn append(&self, record: EventRecord) -> Result<EventRecord, LogError> {
        let (reply, answer) = mpsc::sync_channel(1);
        let tx = self.tx.as_ref().expect("open log");
        tx.send(Request { record, reply }).map_err(|_| LogError("writer stopped".into()))?;
        answer.recv().map_err(|_| LogError("writer stopped".into()))?
    }
}

impl Drop for EventLog {
    fn drop(&mut self) {
        self.tx.take();
        if let Some(writer) = self.writer.take() {
            let _ = writer.join();
        }
    }
}

fn write_loop(mut file: File, rx: mpsc::Receiver<Request>, mut last_seq: u64) {
    while let Ok(first) = rx.recv() {
        let mut batch = vec![first];
        batch.extend(rx.try_iter());
        let mut buf = String::new();
        for (i, req) in batch.iter_mut().enumerate() {
            req.record.seq = last_seq + 1 + i as u64;
            buf.push_str(&req.record.to_line());
        }
        let before = file.metadata().map(|m| m.len()).ok();
        let written = file.write_all(buf.as_bytes()).and_then(|()| file.sync_data());
        match written {
            Ok(()) => {
                last_seq += batch.len() as u64;
                for req in batch {
                    let _ = req.reply.send(Ok(req.record));
                }
            }
            Err(e) => {
                // Cut a partial batch so the file stays a sequence of whole lines.
                if let Some(len) = before {
                    let _ = file.set_len(len);
                }
                for req in batch {
                    let _ = req.reply.send(Err(LogError(e.to_string())));
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(session: &str) -> EventRecord {
        EventRecord {
            seq: 0,
            timestamp: now_utc(),
            session: session.into(),
            exercise: "ex".into(),
            group: None,
            task: 0,
            statement: Some(0),
            statement_type: None,
            action: "submit-formula".into(),
            accepted: true,
            classification: ErrorClass::None,
            text: "A".into(),
            score: None,
        }
    }

    #[test]
    fn sequence_numbers_continue_across_reopen() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("events.jsonl");
        {
            let (log, _) = EventLog::open(&path).unwrap();
            assert_eq!(log.append(record("a")).unwrap().seq, 1);
            assert_eq!(log.append(record("b")).unwrap().seq, 2);
        }
        let (log, warnings) = EventLog::open(&path).unwrap();
        assert!(warnings.is_empty());
        assert_eq!(log.append(record("c")).unwrap().seq, 3);
        drop(log);
        let contents = read_log(&std::fs::read(&path).unwrap()).unwrap();
        assert_eq!(contents.records.iter().map(|r| r.seq).collect::<Vec<_>>(), [1, 2, 3]);
    }

    #[test]
    fn torn_tail_is_discarded() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("events.jsonl");
        let mut bytes = record("a").to_line().replace("\"seq\":0", "\"seq\":1").into_bytes();
        bytes.extend_from_slice(b"{\"seq\":2,\"times");
        std::fs::write(&path, &bytes).unwrap();
        let contents = read_log(&bytes).unwrap();
        assert_eq!(contents.records.len(), 1);
        assert_eq!(contents.warnings, ["line 2: incomplete trailing record discarded"]);

        let (log, warnings) = EventLog::open(&path).unwrap();
        assert_eq!(warnings.len(), 1);
        assert_eq!(log.append(record("b")).unwrap().seq, 2);
        drop(log);
        let reread = read_log(&std::fs::read(&path).unwrap()).unwrap();
        assert!(reread.warnings.is_empty());
        assert_eq!(reread.records.len(), 2);
    }

    #[test]
    fn malformed_lines_are_reported_with_their_number() {
        let mut bytes = record("a").to_line().replace("\"seq\":0", "\"seq\":1").into_bytes();
        bytes.extend_from_slice(b"not json\n");
        assert_eq!(read_log(&bytes).unwrap_err().line, 2);
        let gap = record("a").to_line().replace("\"seq\":0", "\"seq\":1")
            + &record("b").to_line().replace("\"seq\":0", "\"seq\":3");
        assert!(read_log(gap.as_bytes()).unwrap_err().message.contains("does not follow"));
    }

    #[test]
    fn concurrent_appends_have_no_gaps() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("events.jsonl");
        let (log, _) = EventLog::open(&path).unwrap();
        std::thread::scope(|s| {
            for t in 0..8 {
                let log = &log;
                s.spawn(move || {
                    for _ in 0..25 {
                        log.append(record(&format!("s{t}"))).unwrap();
                    }
                });
            }
        });
        drop(log);
        let contents = read_log(&std::fs::read(&path).unwrap()).unwrap();
        assert_eq!(contents.records.len(), 200);
        assert!(contents.records.iter().enumerate().all(|(i, r)| r.seq == i as u64 + 1));
    }
}
