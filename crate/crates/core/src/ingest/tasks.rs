use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::records::format_real;
use crate::environment::TaskInstance;
use crate::error::{Error, Result};

/// Field list of a task stream file written by `gen`. Same conventions as
/// prediction records: tab-separated, 17 significant digits, `#fields:` header.
pub const TASK_FIELDS: [&str; 7] = ["scenario_id", "replication", "m", "index", "x", "y", "y_clean"];

/// One `(X_index, Y_index)` pair of a task; `index` runs over `1..=T+1`.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskRow {
    pub scenario_id: String,
    pub replication: usize,
    pub m: usize,
    pub index: usize,
    pub x: f64,
    pub y: f64,
    pub y_clean: f64,
}

pub fn write_tasks<'a>(
    tasks: impl IntoIterator<Item = &'a TaskInstance>,
    path: impl AsRef<Path>,
    comments: &[String],
) -> Result<()> {
    let path = path.as_ref();
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io = |e| Error::io(path, e);
    writeln!(w, "#fields:\t{}", TASK_FIELDS.join("\t")).map_err(io)?;
    for c in comments {
        writeln!(w, "# {c}").map_err(io)?;
    }
    for task in tasks {
        for k in 0..task.xs.len() {
            writeln!(
                w,
                "{}\t{}\t{}\t{}\t{}\t{}\t{}",
                task.scenario_id,
                task.replication,
                task.m,
                k + 1,
                format_real(task.xs[k]),
                format_real(task.ys[k]),
                format_real(task.ys_clean[k])
            )
            .map_err(io)?;
        }
    }
    w.flush().map_err(io)
}

pub fn read_tasks(path: impl AsRef<Path>) -> Result<Vec<TaskRow>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rows = Vec::new();
    for (k, line) in BufReader::new(file).lines().enumerate() {
        let lineno = k + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        if k == 0 {
            if !line.starts_with("#fields:") {
                return Err(Error::data(format!("{}: line 1: missing `#fields:` header", path.display())));
            }
            continue;
        }
        if line.starts_with('#') || line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split('\t').collect();
        let bad = |what: &str| Error::data(format!("{}: line {lineno}: {what}", path.display()));
        if f.len() != TASK_FIELDS.len() {
            return Err(bad("wrong number of fields"));
        }
        let int = |s: &str| s.parse::<usize>().map_err(|_| bad(&format!("bad integer `{s}`")));
        let real = |s: &str| s.parse::<f64>().map_err(|_| bad(&format!("bad real `{s}`")));
        rows.push(TaskRow {
            scenario_id: f[0].to_string(),
            replication: int(f[1])?,
            m: int(f[2])?,
            index: int(f[3])?,
            x: real(f[4])?,
            y: real(f[5])?,
            y_clean: real(f[6])?,
        });
    }
    Ok(rows)
}
