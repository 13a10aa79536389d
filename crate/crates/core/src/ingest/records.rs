use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::environment::ScenarioGrid;
use crate::error::{Error, Result};

pub const RECORD_FIELDS: [&str; 7] = [
    "learner_id",
    "scenario_id",
    "replication",
    "t",
    "x_query",
    "y_true",
    "y_pred",
];

const MAX_REPORTED: usize = 20;

/// One learner prediction after `t` demonstrations of one replication.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionRecord {
    pub learner_id: String,
    pub scenario_id: String,
    pub replication: usize,
    pub t: usize,
    pub x_query: f64,
    pub y_true: f64,
    pub y_pred: f64,
}

impl PredictionRecord {
    pub fn key(&self) -> (&str, &str, usize, usize) {
        (&self.learner_id, &self.scenario_id, self.replication, self.t)
    }

    pub fn squared_error(&self) -> f64 {
        let e = self.y_pred - self.y_true;
        e * e
    }
}

/// 17 significant digits, scientific notation.
pub fn format_real(v: f64) -> String {
    format!("{v:.16e}")
}

/// A validated set of records with unique keys.
///
/// `lines[k]` is the 1-based source line of `records[k]` (0 when built in memory).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Dataset {
    pub records: Vec<PredictionRecord>,
    pub lines: Vec<usize>,
}

impl Dataset {
    pub fn new(records: Vec<PredictionRecord>) -> Result<Self> {
        let lines = vec![0; records.len()];
        Self::with_lines(records, lines)
    }

    fn with_lines(records: Vec<PredictionRecord>, lines: Vec<usize>) -> Result<Self> {
        let mut problems = Vec::new();
        let mut seen: HashMap<(&str, &str, usize, usize), usize> = HashMap::with_capacity(records.len());
        for (r, &line) in records.iter().zip(&lines) {
            if let Some(p) = record_problem(r) {
                problems.push(format!("{}: {p}", where_(line)));
            }
            if let Some(first) = seen.insert(r.key(), line) {
                problems.push(format!(
                    "{}: duplicate key ({}, {}, {}, {}) first seen at {}",
                    where_(line),
                    r.learner_id,
                    r.scenario_id,
                    r.replication,
                    r.t,
                    where_(first)
                ));
            }
        }
        if !problems.is_empty() {
            return Err(Error::data(summarize(problems)));
        }
        Ok(Self { records, lines })
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Sorts by `(learner_id, scenario_id, replication, t)`.
    pub fn sort(&mut self) {
        let mut idx: Vec<usize> = (0..self.records.len()).collect();
        idx.sort_by(|&a, &b| self.records[a].key().cmp(&self.records[b].key()));
        self.records = idx.iter().map(|&k| self.records[k].clone()).collect();
        self.lines = idx.iter().map(|&k| self.lines[k]).collect();
    }

    /// Concatenates datasets, re-checking key uniqueness.
    pub fn merge(parts: impl IntoIterator<Item = Dataset>) -> Result<Self> {
        let mut records = Vec::new();
        let mut lines = Vec::new();
        for p in parts {
            records.extend(p.records);
            lines.extend(p.lines);
        }
        Self::with_lines(records, lines)
    }

    pub fn learners(&self) -> BTreeSet<String> {
        self.records.iter().map(|r| r.learner_id.clone()).collect()
    }

    pub fn scenarios(&self) -> BTreeSet<String> {
        self.records.iter().map(|r| r.scenario_id.clone()).collect()
    }

    /// Records of one `(learner, scenario)` pair.
    pub fn select(&self, learner_id: &str, scenario_id: &str) -> Vec<&PredictionRecord> {
        self.records
            .iter()
            .filter(|r| r.learner_id == learner_id && r.scenario_id == scenario_id)
            .collect()
    }

    /// Records grouped by `(learner_id, scenario_id)`.
    pub fn groups(&self) -> BTreeMap<(String, String), Vec<&PredictionRecord>> {
        let mut out: BTreeMap<(String, String), Vec<&PredictionRecord>> = BTreeMap::new();
        for r in &self.records {
            out.entry((r.learner_id.clone(), r.scenario_id.clone())).or_default().push(r);
        }
        out
    }

    /// Checks scenario ids, replication ranges and `1 <= t <= T` against a grid.
    pub fn check_bounds(&self, grid: &ScenarioGrid) -> Result<()> {
        let mut problems = Vec::new();
        for (r, &line) in self.records.iter().zip(&self.lines) {
            match grid.get(&r.scenario_id) {
                None => problems.push(format!("{}: unknown scenario `{}`", where_(line), r.scenario_id)),
                Some(s) => {
                    if r.replication >= s.replications {
                        problems.push(format!(
                            "{}: replication {} out of range (scenario has {})",
                            where_(line),
                            r.replication,
                            s.replications
                        ));
                    }
                    if r.t < 1 || r.t > s.horizon {
                        problems.push(format!("{}: t = {} outside 1..={}", where_(line), r.t, s.horizon));
                    }
                }
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::data(summarize(problems)))
        }
    }
}

fn where_(line: usize) -> String {
    if line == 0 {
        "record".to_string()
    } else {
        format!("line {line}")
    }
}

fn summarize(problems: Vec<String>) -> String {
    let n = problems.len();
    let mut msg: Vec<String> = problems.into_iter().take(MAX_REPORTED).collect();
    if n > MAX_REPORTED {
        msg.push(format!("... and {} more", n - MAX_REPORTED));
    }
    msg.join("\n")
}

fn record_problem(r: &PredictionRecord) -> Option<String> {
    if r.learner_id.is_empty() || r.learner_id.chars().any(char::is_whitespace) {
        return Some(format!("learner_id `{}` is empty or contains whitespace", r.learner_id));
    }
    if r.scenario_id.is_empty() || r.scenario_id.chars().any(char::is_whitespace) {
        return Some(format!("scenario_id `{}` is empty or contains whitespace", r.scenario_id));
    }
    if r.t == 0 {
        return Some("t must be >= 1".into());
    }
    for (name, v) in [("x_query", r.x_query), ("y_true", r.y_true), ("y_pred", r.y_pred)] {
        if !v.is_finite() {
            return Some(format!("{name} is not finite ({v})"));
        }
    }
    None
}

/// Writes records with the `#fields:` header and optional `# key: value` comments.
pub fn write_records<'a>(
    records: impl IntoIterator<Item = &'a PredictionRecord>,
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
    writeln!(w, "#fields:\t{}", RECORD_FIELDS.join("\t")).map_err(io)?;
    for c in comments {
        writeln!(w, "# {c}").map_err(io)?;
    }
    for r in records {
        writeln!(
            w,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}",
            r.learner_id,
            r.scenario_id,
            r.replication,
            r.t,
            format_real(r.x_query),
            format_real(r.y_true),
            format_real(r.y_pred)
        )
        .map_err(io)?;
    }
    w.flush().map_err(io)
}

/// Parses a record stream without consulting any scenario grid.
pub fn parse_records(reader: impl BufRead) -> Result<Dataset> {
    let mut records = Vec::new();
    let mut lines = Vec::new();
    let mut problems = Vec::new();
    let mut saw_header = false;
    for (k, line) in reader.lines().enumerate() {
        let lineno = k + 1;
        let line = line.map_err(|e| Error::data(format!("line {lineno}: {e}")))?;
        if k == 0 {
            if !line.starts_with("#fields:") {
                return Err(Error::data("line 1: missing `#fields:` header"));
            }
            let names: Vec<&str> = line["#fields:".len()..].split('\t').filter(|f| !f.is_empty()).collect();
            if names != RECORD_FIELDS {
                return Err(Error::data(format!("line 1: unexpected field list {names:?}")));
            }
            saw_header = true;
            continue;
        }
        if line.starts_with('#') || line.trim().is_empty() {
            continue;
        }
        match parse_line(&line) {
            Ok(r) => {
                records.push(r);
                lines.push(lineno);
            }
            Err(e) => problems.push(format!("line {lineno}: {e}")),
        }
    }
    if !saw_header {
        return Err(Error::data("empty record file (missing `#fields:` header)"));
    }
    if !problems.is_empty() {
        return Err(Error::data(summarize(problems)));
    }
    Dataset::with_lines(records, lines)
}

fn parse_line(line: &str) -> std::result::Result<PredictionRecord, String> {
    let f: Vec<&str> = line.split('\t').collect();
    if f.len() != RECORD_FIELDS.len() {
        return Err(format!("expected {} tab-separated fields, found {}", RECORD_FIELDS.len(), f.len()));
    }
    let int = |name: &str, s: &str| s.parse::<usize>().map_err(|e| format!("{name}: `{s}`: {e}"));
    let real = |name: &str, s: &str| s.parse::<f64>().map_err(|e| format!("{name}: `{s}`: {e}"));
    Ok(PredictionRecord {
        learner_id: f[0].to_string(),
        scenario_id: f[1].to_string(),
        replication: int("replication", f[2])?,
        t: int("t", f[3])?,
        x_query: real("x_query", f[4])?,
        y_true: real("y_true", f[5])?,
        y_pred: real("y_pred", f[6])?,
    })
}

/// Reads a record file and checks it against `grid` (scenario ids, ranges).
pub fn read_records(path: impl AsRef<Path>, grid: &ScenarioGrid) -> Result<Dataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let ds = parse_records(BufReader::new(file)).map_err(|e| match e {
        Error::Data(msg) => Error::data(format!("{}: {msg}", path.display())),
        other => other,
    })?;
    ds.check_bounds(grid).map_err(|e| match e {
        Error::Data(msg) => Error::data(format!("{}: {msg}", path.display())),
        other => other,
    })?;
    Ok(ds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::environment::Scenario;
    use proptest::prelude::*;

    fn rec(t: usize, y_pred: f64) -> PredictionRecord {
        PredictionRecord {
            learner_id: "L".into(),
            scenario_id: "s".into(),
            replication: 0,
            t,
            x_query: 0.5,
            y_true: 1.0,
            y_pred,
        }
    }

    fn grid() -> ScenarioGrid {
        ScenarioGrid::new(vec![Scenario::new("s", 2, 1.0, 0.1).with_horizon(5).with_replications(2)]).unwrap()
    }

    #[test]
    fn real_format_has_seventeen_significant_digits() {
        assert_eq!(format_real(0.1), "1.0000000000000001e-1");
        assert_eq!(format_real(-2.0), "-2.0000000000000000e0");
    }

    #[test]
    fn duplicates_and_non_finite_are_rejected() {
        let err = Dataset::new(vec![rec(1, 0.0), rec(1, 0.3)]).unwrap_err();
        assert!(err.to_string().contains("duplicate key"));
        let err = Dataset::new(vec![rec(1, f64::NAN)]).unwrap_err();
        assert!(err.to_string().contains("y_pred is not finite"));
    }

    #[test]
    fn horizon_overflow_is_rejected_with_line_number() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.tsv");
        write_records(&[rec(5, 0.0), rec(6, 0.0)], &path, &[]).unwrap();
        let err = read_records(&path, &grid()).unwrap_err().to_string();
        assert!(err.contains("line 3: t = 6 outside 1..=5"), "{err}");
    }

    #[test]
    fn malformed_lines_report_line_numbers() {
        let text = "#fields:\tlearner_id\tscenario_id\treplication\tt\tx_query\ty_true\ty_pred\n\
                    # comment\n\
                    L\ts\t0\t1\t0.5\t1.0\tnope\n";
        let err = parse_records(text.as_bytes()).unwrap_err().to_string();
        assert!(err.contains("line 3: y_pred"), "{err}");
        let err = parse_records("L\ts\n".as_bytes()).unwrap_err().to_string();
        assert!(err.contains("#fields:"));
    }

    #[test]
    fn thousand_record_round_trip() {
        let records: Vec<PredictionRecord> = (0..1000)
            .map(|k| PredictionRecord {
                learner_id: format!("L{}", k % 3),
                scenario_id: "s".into(),
                replication: k / 3 % 2,
                t: k + 1,
                x_query: (k as f64 * 0.731).sin() * 5.0,
                y_true: 1.0 / (k as f64 + 0.3),
                y_pred: -(k as f64).sqrt() * 1e-7,
            })
            .collect();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.tsv");
        write_records(&records, &path, &["config_hash: abc".into()]).unwrap();
        let file = std::fs::File::open(&path).unwrap();
        let back = parse_records(BufReader::new(file)).unwrap();
        assert_eq!(back.records, records);
    }

    proptest! {
        #[test]
        fn reals_round_trip_bit_exactly(bits in any::<u64>()) {
            let v = f64::from_bits(bits);
            prop_assume!(v.is_finite());
            let back: f64 = format_real(v).parse().unwrap();
            prop_assert_eq!(back.to_bits(), v.to_bits());
        }
    }
}
