use std::collections::BTreeMap;
use std::fs::{self, File, OpenOptions, TryLockError};
use std::io::{BufRead, BufReader, Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use super::record::{RecordKey, WarehouseRecord};
use super::table::Warehouse;
use super::WarehouseError;

const LOG_FILE: &str = "records.log";
const CHECKPOINT_FILE: &str = "checkpoint.json";
const LOCK_FILE: &str = "run.lock";

/// Durable progress marker, replaced atomically after each committed batch.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Checkpoint {
    /// Last journal event id whose batch is fully reflected in the log.
    pub watermark: u64,
    /// Committed length of the record log; bytes past it are discarded on open.
    pub log_len: u64,
    pub commits: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Change {
    Upsert(Box<WarehouseRecord>),
    Delete(RecordKey),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CommitSummary {
    pub inserted: u64,
    pub updated: u64,
    pub unchanged: u64,
    pub deleted: u64,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "lowercase")]
enum LogEntry {
    Upsert { record: Map<String, Value> },
    Delete { source: super::RecordSource, event_id: u64 },
}

fn read_checkpoint(dir: &Path) -> Result<Checkpoint, WarehouseError> {
    match fs::read(dir.join(CHECKPOINT_FILE)) {
        Ok(bytes) => serde_json::from_slice(&bytes).map_err(|e| WarehouseError::Corrupt {
            line: 0,
            reason: format!("checkpoint: {e}"),
        }),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(Checkpoint::default()),
        Err(e) => Err(e.into()),
    }
}

fn write_checkpoint(dir: &Path, checkpoint: &Checkpoint) -> Result<(), WarehouseError> {
    let tmp = dir.join(format!("{CHECKPOINT_FILE}.tmp"));
    {
        let mut file = File::create(&tmp)?;
        serde_json::to_writer_pretty(&mut file, checkpoint).map_err(std::io::Error::from)?;
        file.write_all(b"\n")?;
        file.sync_all()?;
    }
    fs::rename(&tmp, dir.join(CHECKPOINT_FILE))?;
    Ok(())
}

/// Replays the committed prefix of the record log.
fn replay(reader: impl Read, checkpoint: &Checkpoint) -> Result<Warehouse, WarehouseError> {
    let mut warehouse = Warehouse::new();
    let reader = BufReader::new(reader.take(checkpoint.log_len));
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let corrupt = |reason: String| WarehouseError::Corrupt { line: idx + 1, reason };
        let entry: LogEntry = serde_json::from_str(&line).map_err(|e| corrupt(e.to_string()))?;
        match entry {
            LogEntry::Upsert { record } => {
                warehouse.upsert(WarehouseRecord::from_compact_row(record).map_err(corrupt)?);
            }
            LogEntry::Delete { source, event_id } => {
                warehouse.remove(&RecordKey { source, event_id });
            }
        }
    }
    Ok(warehouse)
}

/// Loads the last committed warehouse state without taking the run lock.
pub fn read_warehouse(dir: impl AsRef<Path>) -> Result<(Warehouse, Checkpoint), WarehouseError> {
    let dir = dir.as_ref();
    let checkpoint = read_checkpoint(dir)?;
    let warehouse = match File::open(dir.join(LOG_FILE)) {
        Ok(file) => replay(file, &checkpoint)?,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound && checkpoint.log_len == 0 => Warehouse::new(),
        Err(e) => return Err(e.into()),
    };
    Ok((warehouse, checkpoint))
}

/// A warehouse directory opened for loading. Holds the exclusive run lock
/// until dropped.
pub struct WarehouseStore {
    dir: PathBuf,
    warehouse: Warehouse,
    checkpoint: Checkpoint,
    log: File,
    _lock: File,
}

impl WarehouseStore {
    pub fn open(dir: impl AsRef<Path>) -> Result<Self, WarehouseError> {
        let dir = dir.as_ref().to_path_buf();
        fs::create_dir_all(&dir)?;
        let lock = OpenOptions::new()
            .create(true)
            .truncate(false)
            .write(true)
            .open(dir.join(LOCK_FILE))?;
        match lock.try_lock() {
            Ok(()) => {}
            Err(TryLockError::WouldBlock) => return Err(WarehouseError::Locked(dir)),
            Err(TryLockError::Error(e)) => return Err(e.into()),
        }

        let checkpoint = read_checkpoint(&dir)?;
        let mut log = OpenOptions::new()
            .create(true)
            .truncate(false)
            .read(true)
            .write(true)
            .open(dir.join(LOG_FILE))?;
        let actual_len = log.metadata()?.len();
        if actual_len < checkpoint.log_len {
            return Err(WarehouseError::Corrupt {
                line: 0,
                reason: format!("record log is {actual_len} bytes, checkpoint expects {}", checkpoint.log_len),
            });
        }
        if actual_len > checkpoint.log_len {
            log::warn!(
                "discarding {} uncommitted bytes from {}",
                actual_len - checkpoint.log_len,
                dir.join(LOG_FILE).display()
            );
            log.set_len(checkpoint.log_len)?;
            log.sync_all()?;
        }
        log.seek(SeekFrom::Start(0))?;
        let warehouse = replay(&mut log, &checkpoint)?;
        log.seek(SeekFrom::End(0))?;
        Ok(Self {
            dir,
            warehouse,
            checkpoint,
            log,
            _lock: lock,
        })
    }

    /// Opens with all previous contents discarded.
    pub fn open_fresh(dir: impl AsRef<Path>) -> Result<Self, WarehouseError> {
        let mut store = Self::open(dir)?;
        store.log.set_len(0)?;
        store.log.seek(SeekFrom::Start(0))?;
        store.log.sync_all()?;
        store.checkpoint = Checkpoint::default();
        write_checkpoint(&store.dir, &store.checkpoint)?;
        store.warehouse = Warehouse::new();
        Ok(store)
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn warehouse(&self) -> &Warehouse {
        &self.warehouse
    }

    pub fn checkpoint(&self) -> &Checkpoint {
        &self.checkpoint
    }

    /// Durably applies `changes` and moves the watermark in one step: the log
    /// is appended and synced first, then the checkpoint is replaced. A crash
    /// in between leaves log bytes past the checkpoint, which the next open
    /// discards. Only changes that alter the table are written.
    pub fn commit(&mut self, changes: Vec<Change>, watermark: u64) -> Result<CommitSummary, WarehouseError> {
        let mut summary = CommitSummary::default();
        let mut pending: BTreeMap<RecordKey, Option<WarehouseRecord>> = BTreeMap::new();
        let mut buf = Vec::new();
        for change in changes {
            let key = match &change {
                Change::Upsert(r) => r.key(),
                Change::Delete(k) => *k,
            };
            let current = match pending.get(&key) {
                Some(p) => p.as_ref(),
                None => self.warehouse.get(&key),
            };
            match change {
                Change::Upsert(record) => {
                    if current == Some(record.as_ref()) {
                        summary.unchanged += 1;
                        continue;
                    }
                    if current.is_some() {
                        summary.updated += 1;
                    } else {
                        summary.inserted += 1;
                    }
                    serde_json::to_writer(&mut buf, &LogEntry::Upsert { record: record.to_compact_row() })
                        .map_err(std::io::Error::from)?;
                    buf.push(b'\n');
                    pending.insert(key, Some(*record));
                }
                Change::Delete(key) => {
                    if current.is_none() {
                        continue;
                    }
                    summary.deleted += 1;
                    serde_json::to_writer(
                        &mut buf,
                        &LogEntry::Delete {
                            source: key.source,
                            event_id: key.event_id,
                        },
                    )
                    .map_err(std::io::Error::from)?;
                    buf.push(b'\n');
                    pending.insert(key, None);
                }
            }
        }

        self.log.write_all(&buf)?;
        self.log.sync_data()?;
        let next = Checkpoint {
            watermark: watermark.max(self.checkpoint.watermark),
            log_len: self.checkpoint.log_len + buf.len() as u64,
            commits: self.checkpoint.commits + 1,
        };
        write_checkpoint(&self.dir, &next)?;
        self.checkpoint = next;

        for (key, value) in pending {
            match value {
                Some(record) => {
                    self.warehouse.upsert(record);
                }
                None => {
                    self.warehouse.remove(&key);
                }
            }
        }
        Ok(summary)
    }

    /// Test hook: appends raw bytes to the log without committing them.
    #[doc(hidden)]
    pub fn append_uncommitted(&mut self, bytes: &[u8]) -> Result<(), WarehouseError> {
        self.log.write_all(bytes)?;
        self.log.sync_data()?;
        Ok(())
    }
}
