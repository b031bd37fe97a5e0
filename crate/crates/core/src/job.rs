//! Deterministic chunked sweeps with an append-only checkpoint.
//!
//! A sweep is a sequence of positions `0..total` cut into fixed-length
//! chunks. Chunks are handed to a worker pool in index order, one batch at
//! a time, and the result is the smallest position that is a hit. Because
//! the chunk plan does not depend on the worker count, neither does the
//! result, and a resumed run skips exactly the chunks recorded as done.
//!
//! Checkpoint file: one JSON header line, then one line per completed chunk.
//!
//! ```text
//! {"format":"rankscatter-checkpoint/1","fingerprint":"..."}
//! {"chunk":0,"start":0,"end":16384,"hit":null}
//! ```

use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const CHECKPOINT_FORMAT: &str = "rankscatter-checkpoint/1";

/// Environment variable consulted for the default worker count.
pub const WORKERS_ENV: &str = "RANKSCATTER_WORKERS";

pub trait Sweep: Sync {
    /// Number of positions.
    fn total(&self) -> u64;
    /// Positions per chunk; must depend only on the job, not on the pool.
    fn chunk_len(&self) -> u64;
    /// First hit among positions `start..end` of chunk `chunk`.
    fn scan(&self, chunk: u64, start: u64, end: u64) -> Option<u64>;
}

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// 0 means: environment variable, else the number of CPUs.
    pub workers: usize,
    pub checkpoint: Option<PathBuf>,
    /// Identifies the job inside the checkpoint.
    pub fingerprint: String,
    /// Stop after this many chunks have been completed by this invocation.
    pub halt_after: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunOutcome {
    /// Smallest hit position.
    pub hit: Option<u64>,
    /// Positions up to and including the hit, or all of them.
    pub positions_checked: u64,
    /// False when stopped by `halt_after` before a verdict.
    pub finished: bool,
    /// Chunks taken from an existing checkpoint.
    pub resumed_chunks: u64,
    pub workers: usize,
}

#[derive(Serialize, Deserialize)]
struct Header {
    format: String,
    fingerprint: String,
}

#[derive(Serialize, Deserialize)]
struct ChunkRecord {
    chunk: u64,
    start: u64,
    end: u64,
    hit: Option<u64>,
}

pub fn resolve_workers(requested: usize) -> usize {
    if requested > 0 {
        return requested;
    }
    std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&w| w > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

fn chunk_bounds(sweep: &impl Sweep, chunk: u64) -> (u64, u64) {
    let len = sweep.chunk_len().max(1);
    let start = chunk * len;
    (start, (start + len).min(sweep.total()))
}

fn load_checkpoint(path: &Path, fingerprint: &str) -> Result<BTreeMap<u64, Option<u64>>> {
    let mut done = BTreeMap::new();
    let file = match File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(done),
        Err(e) => return Err(e.into()),
    };
    let mut lines = BufReader::new(file).lines();
    match lines.next() {
        None => return Ok(done),
        Some(line) => {
            let header: Header = serde_json::from_str(&line?).map_err(|_| Error::CheckpointMismatch)?;
            if header.format != CHECKPOINT_FORMAT || header.fingerprint != fingerprint {
                return Err(Error::CheckpointMismatch);
            }
        }
    }
    for line in lines {
        let line = line?;
        // a torn final line from an interrupted write is ignored
        if let Ok(rec) = serde_json::from_str::<ChunkRecord>(&line) {
            done.insert(rec.chunk, rec.hit);
        }
    }
    Ok(done)
}

fn open_checkpoint(path: &Path, fingerprint: &str, fresh: bool) -> Result<File> {
    let mut file = OpenOptions::new().create(true).append(true).open(path)?;
    if !fresh && !ends_with_newline(path)? {
        writeln!(file)?;
    }
    if fresh {
        let header = Header { format: CHECKPOINT_FORMAT.into(), fingerprint: fingerprint.into() };
        writeln!(file, "{}", serde_json::to_string(&header)?)?;
        file.flush()?;
    }
    Ok(file)
}

fn ends_with_newline(path: &Path) -> Result<bool> {
    use std::io::{Read, Seek, SeekFrom};
    let mut f = File::open(path)?;
    if f.seek(SeekFrom::End(-1)).is_err() {
        return Ok(true);
    }
    let mut last = [0u8; 1];
    f.read_exact(&mut last)?;
    Ok(last[0] == b'\n')
}

pub fn run<S: Sweep>(sweep: &S, opts: &RunOptions) -> Result<RunOutcome> {
    let workers = resolve_workers(opts.workers);
    let total = sweep.total();
    let len = sweep.chunk_len().max(1);
    let chunks = total.div_ceil(len);

    let mut done = match &opts.checkpoint {
        Some(p) => load_checkpoint(p, &opts.fingerprint)?,
        None => BTreeMap::new(),
    };
    done.retain(|&c, _| c < chunks);
    let resumed_chunks = done.len() as u64;
    let mut writer = match &opts.checkpoint {
        Some(p) => {
            let fresh = std::fs::metadata(p).map(|m| m.len() == 0).unwrap_or(true);
            Some(open_checkpoint(p, &opts.fingerprint, fresh)?)
        }
        None => None,
    };

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidParams(format!("worker pool: {e}")))?;

    let mut allowance = opts.halt_after;
    let mut cursor = 0u64;
    loop {
        // the hit in the lowest chunk wins once every earlier chunk is done
        let first_hit_chunk = done.iter().find(|(_, h)| h.is_some()).map(|(&c, _)| c);
        let limit = first_hit_chunk.unwrap_or(chunks);
        while cursor < limit && done.contains_key(&cursor) {
            cursor += 1;
        }
        if cursor >= limit {
            let hit = first_hit_chunk.and_then(|c| done[&c]);
            let positions_checked = hit.map_or(total, |h| h + 1);
            return Ok(RunOutcome { hit, positions_checked, finished: true, resumed_chunks, workers });
        }
        if allowance == Some(0) {
            return Ok(RunOutcome {
                hit: None,
                positions_checked: 0,
                finished: false,
                resumed_chunks,
                workers,
            });
        }
        let mut batch_size = workers as u64;
        if let Some(a) = allowance {
            batch_size = batch_size.min(a);
        }
        let batch: Vec<u64> = (cursor..limit).filter(|c| !done.contains_key(c)).take(batch_size as usize).collect();
        let results: Vec<(u64, Option<u64>)> = pool.install(|| {
            batch
                .par_iter()
                .map(|&c| {
                    let (s, e) = chunk_bounds(sweep, c);
                    (c, sweep.scan(c, s, e))
                })
                .collect()
        });
        for (c, hit) in results {
            if let Some(w) = writer.as_mut() {
                let (start, end) = chunk_bounds(sweep, c);
                writeln!(w, "{}", serde_json::to_string(&ChunkRecord { chunk: c, start, end, hit })?)?;
            }
            done.insert(c, hit);
        }
        if let Some(w) = writer.as_mut() {
            w.flush()?;
        }
        if let Some(a) = allowance.as_mut() {
            *a -= batch.len() as u64;
        }
    }
}

/// Evaluates `f` on consecutive ranges of `0..total` in a pool of `workers`
/// threads; results come back in range order.
pub fn map_ranges<T, F>(workers: usize, total: u64, chunk_len: u64, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64, u64, u64) -> T + Sync,
{
    let len = chunk_len.max(1);
    let chunks: Vec<u64> = (0..total.div_ceil(len)).collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(resolve_workers(workers))
        .build()
        .map_err(|e| Error::InvalidParams(format!("worker pool: {e}")))?;
    Ok(pool.install(|| chunks.par_iter().map(|&c| f(c, c * len, ((c + 1) * len).min(total))).collect()))
}

/// 64-bit FNV-1a, used to fingerprint jobs in checkpoints.
pub fn fingerprint(parts: &[&[u8]]) -> String {
    let mut h: u64 = 0xcbf29ce484222325;
    for part in parts {
        for &b in part.iter().chain(std::iter::once(&0xff)) {
            h ^= b as u64;
            h = h.wrapping_mul(0x100000001b3);
        }
    }
    format!("{h:016x}")
}
