//! Tab-separated event table: `queue<TAB>start<TAB>end<TAB>event`, one line
//! per event, LF-terminated, sorted by (start, end, queue).

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use super::ProfReport;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExportRecord {
    pub queue_name: String,
    pub start_ns: u64,
    pub end_ns: u64,
    pub event_name: String,
}

pub fn write_table<W: Write>(report: &ProfReport, mut out: W) -> Result<()> {
    let mut rows: Vec<_> = report.infos.iter().collect();
    rows.sort_by(|a, b| (a.start_ns, a.end_ns, &a.queue_name).cmp(&(b.start_ns, b.end_ns, &b.queue_name)));
    for r in rows {
        writeln!(out, "{}\t{}\t{}\t{}", r.queue_name, r.start_ns, r.end_ns, r.event_name)?;
    }
    out.flush()?;
    Ok(())
}

pub fn export_table(report: &ProfReport, path: impl AsRef<Path>) -> Result<()> {
    write_table(report, BufWriter::new(File::create(path)?))
}

/// Parses an exported table. Errors carry the 1-based line number.
pub fn parse_table(text: &str) -> Result<Vec<ExportRecord>> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line_no = n + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        // 1-based column where field `f` begins
        let col = |f: usize| 1 + fields[..f].iter().map(|s| s.len() + 1).sum::<usize>();
        let bad = |column: usize, msg: &str| Error::Parse { line: line_no, column, msg: msg.to_string() };
        let [queue, start, end, event] = fields[..] else {
            return Err(bad(1, &format!("expected 4 tab-separated fields, found {}", fields.len())));
        };
        let start: u64 = start.parse().map_err(|_| bad(col(1), "start instant is not an integer"))?;
        let end: u64 = end.parse().map_err(|_| bad(col(2), "end instant is not an integer"))?;
        if end < start {
            return Err(bad(col(2), "end instant precedes start instant"));
        }
        if queue.is_empty() {
            return Err(bad(1, "empty queue name"));
        }
        if event.is_empty() {
            return Err(bad(col(3), "empty event name"));
        }
        out.push(ExportRecord { queue_name: queue.to_string(), start_ns: start, end_ns: end, event_name: event.to_string() });
    }
    Ok(out)
}
