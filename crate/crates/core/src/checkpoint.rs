//! On-disk checkpoints for the column recursion.
//!
//! Every column update writes `phi_step<N>_col<K>.jsonl`: a metadata line
//! `{"step":N,"k":K,"m":M,"count":C}` followed by `C` placement lines. Files
//! are written to a temporary name and renamed, so a file that exists is
//! complete. Resuming picks, for every column, the file of the step that
//! last refreshed it.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::{self, BufRead, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::board::{Placement, PlacementParseError};
use crate::phi::PhiColumnState;

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("checkpoint I/O on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Format {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("incomplete checkpoint in {dir}: {message}")]
    Incomplete { dir: PathBuf, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnMeta {
    pub step: usize,
    pub k: usize,
    pub m: usize,
    pub count: usize,
}

pub fn column_file_name(step: usize, k: usize) -> String {
    format!("phi_step{step}_col{k}.jsonl")
}

fn parse_file_name(name: &str) -> Option<(usize, usize)> {
    let rest = name.strip_prefix("phi_step")?.strip_suffix(".jsonl")?;
    let (step, k) = rest.split_once("_col")?;
    Some((step.parse().ok()?, k.parse().ok()?))
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> CheckpointError + '_ {
    move |source| CheckpointError::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub fn write_column(
    dir: &Path,
    step: usize,
    k: usize,
    set: &[Placement],
) -> Result<PathBuf, CheckpointError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let path = dir.join(column_file_name(step, k));
    let tmp = dir.join(format!(".{}.tmp", column_file_name(step, k)));
    let meta = ColumnMeta {
        step,
        k,
        m: (step + k) / 2,
        count: set.len(),
    };
    {
        let file = fs::File::create(&tmp).map_err(io_err(&tmp))?;
        let mut w = BufWriter::new(file);
        let write = |w: &mut BufWriter<fs::File>| -> io::Result<()> {
            writeln!(w, "{}", serde_json::to_string(&meta)?)?;
            for p in set {
                writeln!(w, "{}", p.to_json())?;
            }
            w.flush()?;
            w.get_ref().sync_all()
        };
        write(&mut w).map_err(io_err(&tmp))?;
    }
    fs::rename(&tmp, &path).map_err(io_err(&path))?;
    Ok(path)
}

pub fn read_column(path: &Path) -> Result<(ColumnMeta, Vec<Placement>), CheckpointError> {
    let file = fs::File::open(path).map_err(io_err(path))?;
    let format = |line: usize, message: String| CheckpointError::Format {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut lines = io::BufReader::new(file).lines();
    let header = lines
        .next()
        .ok_or_else(|| format(1, "missing metadata line".into()))?
        .map_err(io_err(path))?;
    let meta: ColumnMeta =
        serde_json::from_str(&header).map_err(|e| format(1, format!("bad metadata: {e}")))?;
    let mut set = Vec::with_capacity(meta.count);
    for (i, line) in lines.enumerate() {
        let line = line.map_err(io_err(path))?;
        let p = Placement::from_json(&line)
            .map_err(|e: PlacementParseError| format(i + 2, e.to_string()))?;
        if p.size() != meta.m || p.len() != meta.k {
            return Err(format(
                i + 2,
                format!("expected {} points on order {}", meta.k, meta.m),
            ));
        }
        set.push(p);
    }
    if set.len() != meta.count {
        return Err(format(
            set.len() + 1,
            format!(
                "metadata announces {} placements, found {}",
                meta.count,
                set.len()
            ),
        ));
    }
    Ok((meta, set))
}

/// `(step, k)` pairs present in `dir`.
pub fn scan(dir: &Path) -> Result<BTreeSet<(usize, usize)>, CheckpointError> {
    if !dir.exists() {
        return Ok(BTreeSet::new());
    }
    let mut out = BTreeSet::new();
    for entry in fs::read_dir(dir).map_err(io_err(dir))? {
        let entry = entry.map_err(io_err(dir))?;
        if let Some(found) = entry.file_name().to_str().and_then(parse_file_name) {
            out.insert(found);
        }
    }
    Ok(out)
}

/// Rebuilds the recursion state from the newest files in `dir`, or `None`
/// when the directory holds no checkpoint.
pub fn load_state(dir: &Path) -> Result<Option<PhiColumnState>, CheckpointError> {
    let present = scan(dir)?;
    let Some(&(latest, _)) = present.iter().next_back() else {
        return Ok(None);
    };
    let incomplete = |message: String| CheckpointError::Incomplete {
        dir: dir.to_path_buf(),
        message,
    };
    let schedule: Vec<usize> = (1..=latest).filter(|k| k % 2 == latest % 2).collect();
    let done: Vec<usize> = present
        .iter()
        .filter(|(s, _)| *s == latest)
        .map(|&(_, k)| k)
        .collect();
    if schedule[..done.len().min(schedule.len())] != done[..] {
        return Err(incomplete(format!(
            "step {latest} has columns {done:?}, expected a prefix of {schedule:?}"
        )));
    }
    let complete = done.len() == schedule.len();
    let (step, in_progress) = if complete {
        (latest, None)
    } else {
        (latest - 1, done.last().copied())
    };
    let mut columns = BTreeMap::new();
    for k in 1..=latest {
        let source_step = if k % 2 == latest % 2 {
            if done.contains(&k) {
                latest
            } else if k + 2 <= latest {
                latest - 2
            } else {
                continue;
            }
        } else if k < latest {
            latest - 1
        } else {
            continue;
        };
        if !present.contains(&(source_step, k)) {
            return Err(incomplete(format!(
                "missing {}",
                column_file_name(source_step, k)
            )));
        }
        let (meta, set) = read_column(&dir.join(column_file_name(source_step, k)))?;
        if meta.step != source_step || meta.k != k {
            return Err(incomplete(format!(
                "{} carries metadata for step {}, column {}",
                column_file_name(source_step, k),
                meta.step,
                meta.k
            )));
        }
        columns.insert(k, set);
    }
    Ok(Some(PhiColumnState::from_parts(step, in_progress, columns)))
}
