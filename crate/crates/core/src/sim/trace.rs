use crate::device::DeviceDescriptor;

/// One profiled command, timestamps in nanoseconds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceRecord {
    pub queue_name: String,
    pub event_name: String,
    pub queued_ns: u64,
    pub submitted_ns: u64,
    pub start_ns: u64,
    pub end_ns: u64,
}

impl TraceRecord {
    pub fn duration_ns(&self) -> u64 {
        self.end_ns - self.start_ns
    }
}

/// Records of one command queue, in enqueue order.
#[derive(Debug, Clone, PartialEq)]
pub struct QueueTrace {
    pub name: String,
    pub device: DeviceDescriptor,
    pub profiling: bool,
    pub finalized: bool,
    pub records: Vec<TraceRecord>,
}

/// Snapshot of every queue of a session.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub queues: Vec<QueueTrace>,
    pub finalized: bool,
}

impl Trace {
    pub fn queue(&self, name: &str) -> Option<&QueueTrace> {
        self.queues.iter().find(|q| q.name == name)
    }

    pub fn records(&self) -> impl Iterator<Item = &TraceRecord> {
        self.queues.iter().flat_map(|q| q.records.iter())
    }

    pub fn count(&self, event_name: &str) -> usize {
        self.records().filter(|r| r.event_name == event_name).count()
    }
}
