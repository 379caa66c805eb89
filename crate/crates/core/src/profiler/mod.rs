//! Event profiling over finalized traces.
//!
//! Queues are registered under a name, then [`Profiler::calc`] produces a
//! [`ProfReport`] with per-name aggregates, per-name-pair overlaps, start/end
//! instants, and the effective device time (measure of the union of all event
//! intervals).

mod export;
mod summary;

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::sim::{QueueTrace, TraceRecord};

pub use export::{export_table, parse_table, write_table, ExportRecord};
pub use summary::{summary, AggSort, OverlapSort, SortOrder};
pub(crate) use summary::sci;

/// One event, as seen by the profiler.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProfInfo {
    pub event_name: String,
    pub queue_name: String,
    pub queued_ns: u64,
    pub submitted_ns: u64,
    pub start_ns: u64,
    pub end_ns: u64,
}

impl ProfInfo {
    pub fn duration_ns(&self) -> u64 {
        self.end_ns - self.start_ns
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum InstKind {
    Start,
    End,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProfInst {
    pub event_name: String,
    pub queue_name: String,
    pub kind: InstKind,
    pub instant_ns: u64,
}

/// Total and relative duration of all events sharing a name.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfAgg {
    pub event_name: String,
    pub abs_duration_ns: u64,
    pub rel_duration: f64,
}

/// Summed overlap between events of two names (sorted so `name_a <= name_b`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProfOverlap {
    pub name_a: String,
    pub name_b: String,
    pub overlap_ns: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProfReport {
    pub aggs: Vec<ProfAgg>,
    pub overlaps: Vec<ProfOverlap>,
    pub infos: Vec<ProfInfo>,
    pub total_events_ns: u64,
    pub effective_ns: u64,
    pub elapsed_ns: u64,
    pub device_fraction: f64,
    pub host_fraction: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfView {
    Agg,
    Info,
    Inst,
    Overlap,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProfItem<'a> {
    Agg(&'a ProfAgg),
    Info(&'a ProfInfo),
    Inst(ProfInst),
    Overlap(&'a ProfOverlap),
}

impl ProfReport {
    /// Start and end instants of every event, ordered by instant.
    pub fn insts(&self) -> Vec<ProfInst> {
        let mut out: Vec<ProfInst> = self
            .infos
            .iter()
            .flat_map(|i| {
                [(InstKind::Start, i.start_ns), (InstKind::End, i.end_ns)].map(|(kind, instant_ns)| ProfInst {
                    event_name: i.event_name.clone(),
                    queue_name: i.queue_name.clone(),
                    kind,
                    instant_ns,
                })
            })
            .collect();
        out.sort_by_key(|p| (p.instant_ns, p.kind));
        out
    }

    pub fn iterate(&self, view: ProfView) -> Vec<ProfItem<'_>> {
        match view {
            ProfView::Agg => self.aggs.iter().map(ProfItem::Agg).collect(),
            ProfView::Info => self.infos.iter().map(ProfItem::Info).collect(),
            ProfView::Inst => self.insts().into_iter().map(ProfItem::Inst).collect(),
            ProfView::Overlap => self.overlaps.iter().map(ProfItem::Overlap).collect(),
        }
    }

    pub fn agg(&self, name: &str) -> Option<&ProfAgg> {
        self.aggs.iter().find(|a| a.event_name == name)
    }

    pub fn overlap(&self, a: &str, b: &str) -> Option<&ProfOverlap> {
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        self.overlaps.iter().find(|o| o.name_a == a && o.name_b == b)
    }

    pub fn total_overlap_ns(&self) -> u64 {
        self.overlaps.iter().map(|o| o.overlap_ns).sum()
    }
}

#[derive(Debug, Clone, Default)]
pub struct Profiler {
    queues: Vec<(String, Vec<ProfInfo>)>,
    elapsed_ns: Option<u64>,
}

impl Profiler {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registers a finalized queue's events under `name`.
    pub fn add_queue(&mut self, name: &str, queue: &QueueTrace) -> Result<()> {
        if !queue.finalized {
            return Err(Error::NotFinalized(queue.name.clone()));
        }
        self.add_records(name, &queue.records)
    }

    /// Registers completed records directly, without a session trace.
    pub fn add_records(&mut self, name: &str, records: &[TraceRecord]) -> Result<()> {
        if name.is_empty() || name.chars().any(char::is_control) {
            return Err(Error::InvalidName(name.to_string()));
        }
        if self.queues.iter().any(|(n, _)| n == name) {
            return Err(Error::DuplicateQueueName(name.to_string()));
        }
        if let Some(r) = records.iter().find(|r| r.end_ns < r.start_ns) {
            return Err(Error::InvariantViolation(format!("event {} ends before it starts", r.event_name)));
        }
        let infos = records
            .iter()
            .map(|r| ProfInfo {
                event_name: r.event_name.clone(),
                queue_name: name.to_string(),
                queued_ns: r.queued_ns,
                submitted_ns: r.submitted_ns,
                start_ns: r.start_ns,
                end_ns: r.end_ns,
            })
            .collect();
        self.queues.push((name.to_string(), infos));
        Ok(())
    }

    pub fn queue_count(&self) -> usize {
        self.queues.len()
    }

    /// Overrides the elapsed time with an externally measured wall time.
    /// Must not be shorter than the span of the profiled events.
    pub fn set_elapsed(&mut self, elapsed_ns: u64) {
        self.elapsed_ns = Some(elapsed_ns);
    }

    pub fn calc(&self) -> Result<ProfReport> {
        if self.queues.is_empty() {
            return Err(Error::NoQueues);
        }
        let mut infos: Vec<ProfInfo> = self.queues.iter().flat_map(|(_, v)| v.iter().cloned()).collect();
        if infos.is_empty() {
            return Err(Error::EmptyTrace);
        }
        infos.sort_by(|a, b| {
            (a.start_ns, a.end_ns, &a.queue_name, &a.event_name).cmp(&(b.start_ns, b.end_ns, &b.queue_name, &b.event_name))
        });

        let mut by_name: BTreeMap<&str, u64> = BTreeMap::new();
        for i in &infos {
            *by_name.entry(&i.event_name).or_default() += i.duration_ns();
        }
        let total_events_ns: u64 = by_name.values().sum();
        let aggs = by_name
            .iter()
            .map(|(&name, &abs)| ProfAgg {
                event_name: name.to_string(),
                abs_duration_ns: abs,
                rel_duration: if total_events_ns > 0 { abs as f64 / total_events_ns as f64 } else { 0.0 },
            })
            .collect();

        let overlaps = pairwise_overlaps(&infos)
            .into_iter()
            .map(|((name_a, name_b), overlap_ns)| ProfOverlap { name_a, name_b, overlap_ns })
            .collect();

        let effective_ns = union_measure(infos.iter().map(|i| (i.start_ns, i.end_ns)));
        let span = infos.iter().map(|i| i.end_ns).max().unwrap() - infos.iter().map(|i| i.start_ns).min().unwrap();
        let elapsed_ns = match self.elapsed_ns {
            Some(e) if e < span => return Err(Error::InvalidElapsed { elapsed: e, span }),
            Some(e) => e,
            None => span,
        };
        let device_fraction = if elapsed_ns > 0 { effective_ns as f64 / elapsed_ns as f64 } else { 0.0 };

        Ok(ProfReport {
            aggs,
            overlaps,
            infos,
            total_events_ns,
            effective_ns,
            elapsed_ns,
            device_fraction,
            host_fraction: 1.0 - device_fraction,
        })
    }
}

/// Sweep over events sorted by start: each event is compared only with the
/// earlier-starting events still running when it begins.
fn pairwise_overlaps(sorted: &[ProfInfo]) -> BTreeMap<(String, String), u64> {
    let mut buckets: BTreeMap<(String, String), u64> = BTreeMap::new();
    let mut active: Vec<&ProfInfo> = Vec::new();
    for ev in sorted {
        active.retain(|a| a.end_ns > ev.start_ns);
        for a in &active {
            let ov = a.end_ns.min(ev.end_ns).saturating_sub(ev.start_ns);
            if ov > 0 {
                let key = if a.event_name <= ev.event_name {
                    (a.event_name.clone(), ev.event_name.clone())
                } else {
                    (ev.event_name.clone(), a.event_name.clone())
                };
                *buckets.entry(key).or_default() += ov;
            }
        }
        active.push(ev);
    }
    buckets
}

/// Total length of the union of half-open intervals.
pub fn union_measure(intervals: impl IntoIterator<Item = (u64, u64)>) -> u64 {
    let mut v: Vec<(u64, u64)> = intervals.into_iter().filter(|(s, e)| e > s).collect();
    v.sort_unstable();
    let mut total = 0;
    let mut current: Option<(u64, u64)> = None;
    for (s, e) in v {
        match current {
            Some((cs, ce)) if s <= ce => current = Some((cs, ce.max(e))),
            Some((cs, ce)) => {
                total += ce - cs;
                current = Some((s, e));
            }
            None => current = Some((s, e)),
        }
    }
    total + current.map_or(0, |(s, e)| e - s)
}
