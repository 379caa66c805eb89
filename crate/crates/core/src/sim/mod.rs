//! Contexts, command queues, buffers, kernels and events.
//!
//! A [`Session`] owns every object it creates. Commands are recorded by the
//! `enqueue_*` calls and run by [`Session::finish`]. In [`ClockMode::Virtual`]
//! the scheduler in [`schedule`] assigns instants from a nanosecond virtual
//! clock and side effects are applied in start order on the calling thread.
//! In [`ClockMode::Host`] each queue is drained by its own worker thread and
//! instants come from a monotonic host timer.

pub mod kernel;
pub mod schedule;
pub mod trace;

use std::collections::HashMap;
use std::fmt;
use std::io;
use std::sync::{Arc, Condvar, Mutex, RwLock};
use std::thread;
use std::time::Instant;

use crate::device::{DeviceDescriptor, DeviceType, Registry};
use crate::error::{Error, Result};
use crate::selector::{apply_filter_chain, builtin_type_filter, FilterChain};
use crate::worksize::requires_divisible_gws;

pub use kernel::{ArgView, KernelArg, PrivateValue, WorkFn, WorkItem};
pub use schedule::{CommandSpec, Schedule, Slot};
pub use trace::{QueueTrace, Trace, TraceRecord};

use kernel::KernelState;
use schedule::schedule;

macro_rules! handle {
    ($name:ident) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub struct $name(pub u32);
    };
}

handle!(ContextId);
handle!(QueueId);
handle!(BufferId);
handle!(KernelId);
handle!(EventId);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ClockMode {
    #[default]
    Virtual,
    Host,
}

pub const DEFAULT_KERNEL_NAME: &str = "NDRANGE_KERNEL";
pub const DEFAULT_READ_NAME: &str = "READ_BUFFER";
pub const DEFAULT_WRITE_NAME: &str = "WRITE_BUFFER";

pub type SinkFn<'s> = Box<dyn FnMut(&[u8]) -> io::Result<()> + Send + 's>;

/// Where the bytes of a read command go.
pub enum ReadDest<'s> {
    /// Keep the bytes; fetch them with [`Session::read_data`] after finishing.
    Capture,
    /// Hand the bytes to a callback when the read executes.
    Sink(SinkFn<'s>),
}

impl fmt::Debug for ReadDest<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReadDest::Capture => f.write_str("Capture"),
            ReadDest::Sink(_) => f.write_str("Sink(..)"),
        }
    }
}

/// Event instants in nanoseconds. Start and end are unset until finished.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventInfo {
    pub name: String,
    pub queue: QueueId,
    pub queued: u64,
    pub submitted: u64,
    pub start: Option<u64>,
    pub end: Option<u64>,
}

/// Live object counts, for leak accounting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct LiveCounts {
    pub contexts: usize,
    pub queues: usize,
    pub buffers: usize,
    pub kernels: usize,
}

impl LiveCounts {
    pub fn total(&self) -> usize {
        self.contexts + self.queues + self.buffers + self.kernels
    }
}

type SharedBytes = Arc<RwLock<Vec<u8>>>;

/// An executed event and the bytes it captured, if any.
type Completed = (EventId, Option<Vec<u8>>);

struct ContextState {
    devices: Vec<DeviceDescriptor>,
    released: bool,
}

struct QueueState {
    name: String,
    device: DeviceDescriptor,
    profiling: bool,
    events: Vec<EventId>,
    tail_end: u64,
    released: bool,
}

struct BufferState {
    size: usize,
    data: Option<SharedBytes>,
}

enum ResolvedArg {
    Private(PrivateValue),
    Buffer(BufferId, SharedBytes),
}

enum Op<'s> {
    Kernel { work: Arc<WorkFn>, args: Vec<ResolvedArg>, gws: [u64; 3] },
    Read { data: SharedBytes, offset: usize, nbytes: usize, dest: ReadDest<'s> },
    Write { data: SharedBytes, offset: usize, bytes: Vec<u8> },
}

struct Pending<'s> {
    event: EventId,
    queue: QueueId,
    duration: u64,
    deps: Vec<EventId>,
    op: Op<'s>,
}

impl Op<'_> {
    /// Applies the side effect; returns captured bytes for `ReadDest::Capture`.
    fn execute(&mut self) -> Result<Option<Vec<u8>>> {
        match self {
            Op::Kernel { work, args, gws } => {
                let mut order: Vec<(BufferId, usize)> = args
                    .iter()
                    .enumerate()
                    .filter_map(|(i, a)| match a {
                        ResolvedArg::Buffer(id, _) => Some((*id, i)),
                        ResolvedArg::Private(_) => None,
                    })
                    .collect();
                // lock in id order so concurrent workers never deadlock
                order.sort();
                let mut guards: Vec<Option<_>> = (0..args.len()).map(|_| None).collect();
                for (_, i) in order {
                    if let ResolvedArg::Buffer(_, data) = &args[i] {
                        guards[i] = Some(data.write().expect("buffer lock poisoned"));
                    }
                }
                let mut views: Vec<ArgView<'_>> = args
                    .iter()
                    .zip(guards.iter_mut())
                    .map(|(a, g)| match a {
                        ResolvedArg::Private(v) => ArgView::Scalar(*v),
                        ResolvedArg::Buffer(..) => ArgView::Buffer(g.as_mut().expect("locked").as_mut_slice()),
                    })
                    .collect();
                for z in 0..gws[2] {
                    for y in 0..gws[1] {
                        for x in 0..gws[0] {
                            work(WorkItem { gid: [x, y, z], gws: *gws }, &mut views);
                        }
                    }
                }
                Ok(None)
            }
            Op::Read { data, offset, nbytes, dest } => {
                let guard = data.read().expect("buffer lock poisoned");
                let bytes = &guard[*offset..*offset + *nbytes];
                match dest {
                    ReadDest::Capture => Ok(Some(bytes.to_vec())),
                    ReadDest::Sink(sink) => {
                        if !bytes.is_empty() {
                            sink(bytes).map_err(Error::Sink)?;
                        }
                        Ok(None)
                    }
                }
            }
            Op::Write { data, offset, bytes } => {
                let mut guard = data.write().expect("buffer lock poisoned");
                guard[*offset..*offset + bytes.len()].copy_from_slice(bytes);
                Ok(None)
            }
        }
    }
}

fn validate_name(name: &str) -> Result<()> {
    if name.is_empty() || name.chars().any(char::is_control) {
        Err(Error::InvalidName(name.to_string()))
    } else {
        Ok(())
    }
}

/// Single-owner simulation instance.
pub struct Session<'s> {
    mode: ClockMode,
    epoch: Instant,
    clock_ns: u64,
    contexts: Vec<ContextState>,
    queues: Vec<QueueState>,
    buffers: Vec<BufferState>,
    kernels: Vec<KernelState>,
    events: Vec<EventInfo>,
    pending: Vec<Pending<'s>>,
    captures: HashMap<EventId, Vec<u8>>,
    finalized: bool,
}

impl Default for Session<'_> {
    fn default() -> Self {
        Session::new(ClockMode::Virtual)
    }
}

impl<'s> Session<'s> {
    pub fn new(mode: ClockMode) -> Self {
        Session {
            mode,
            epoch: Instant::now(),
            clock_ns: 0,
            contexts: Vec::new(),
            queues: Vec::new(),
            buffers: Vec::new(),
            kernels: Vec::new(),
            events: Vec::new(),
            pending: Vec::new(),
            captures: HashMap::new(),
            finalized: false,
        }
    }

    pub fn mode(&self) -> ClockMode {
        self.mode
    }

    pub fn is_finalized(&self) -> bool {
        self.finalized
    }

    fn now(&mut self) -> u64 {
        match self.mode {
            ClockMode::Virtual => {
                let t = self.clock_ns;
                self.clock_ns += 1;
                t
            }
            ClockMode::Host => self.epoch.elapsed().as_nanos() as u64,
        }
    }

    fn check_open(&self) -> Result<()> {
        if self.finalized {
            Err(Error::AlreadyFinalized)
        } else {
            Ok(())
        }
    }

    // ---- contexts -------------------------------------------------------

    pub fn create_context(&mut self, devices: &[DeviceDescriptor]) -> Result<ContextId> {
        self.check_open()?;
        if devices.is_empty() {
            return Err(Error::EmptyDeviceList);
        }
        self.contexts.push(ContextState { devices: devices.to_vec(), released: false });
        Ok(ContextId(self.contexts.len() as u32 - 1))
    }

    /// First device of type `t` in registry order, wrapped in a one-device context.
    pub fn create_context_for_type(&mut self, reg: &Registry, t: DeviceType) -> Result<ContextId> {
        let found = apply_filter_chain(reg, &FilterChain::new().with(builtin_type_filter(t)));
        let dev = found.into_iter().next().ok_or_else(|| Error::NoMatchingDevice(t.to_string()))?;
        self.create_context(&[dev])
    }

    fn context(&self, id: ContextId) -> Result<&ContextState> {
        self.contexts.get(id.0 as usize).filter(|c| !c.released).ok_or(Error::InvalidHandle("context"))
    }

    pub fn context_devices(&self, ctx: ContextId) -> Result<&[DeviceDescriptor]> {
        Ok(&self.context(ctx)?.devices)
    }

    pub fn release_context(&mut self, ctx: ContextId) -> Result<()> {
        self.context(ctx)?;
        self.contexts[ctx.0 as usize].released = true;
        Ok(())
    }

    // ---- queues ---------------------------------------------------------

    pub fn create_queue(
        &mut self,
        ctx: ContextId,
        device: &DeviceDescriptor,
        name: &str,
        profiling: bool,
    ) -> Result<QueueId> {
        self.check_open()?;
        validate_name(name)?;
        let c = self.context(ctx)?;
        let device = c
            .devices
            .iter()
            .find(|d| d.same_device(device))
            .ok_or_else(|| Error::DeviceNotInContext(device.id.clone()))?
            .clone();
        self.queues.push(QueueState {
            name: name.to_string(),
            device,
            profiling,
            events: Vec::new(),
            tail_end: 0,
            released: false,
        });
        Ok(QueueId(self.queues.len() as u32 - 1))
    }

    fn queue(&self, id: QueueId) -> Result<&QueueState> {
        self.queues.get(id.0 as usize).filter(|q| !q.released).ok_or(Error::InvalidHandle("queue"))
    }

    pub fn queue_name(&self, q: QueueId) -> Result<&str> {
        Ok(&self.queue(q)?.name)
    }

    pub fn queue_events(&self, q: QueueId) -> Result<&[EventId]> {
        Ok(&self.queue(q)?.events)
    }

    pub fn release_queue(&mut self, q: QueueId) -> Result<()> {
        self.queue(q)?;
        self.queues[q.0 as usize].released = true;
        Ok(())
    }

    // ---- buffers --------------------------------------------------------

    pub fn create_buffer(&mut self, ctx: ContextId, size_bytes: usize) -> Result<BufferId> {
        self.check_open()?;
        self.context(ctx)?;
        if size_bytes == 0 {
            return Err(Error::ZeroSize);
        }
        self.buffers.push(BufferState { size: size_bytes, data: Some(Arc::new(RwLock::new(vec![0; size_bytes]))) });
        Ok(BufferId(self.buffers.len() as u32 - 1))
    }

    fn buffer(&self, id: BufferId) -> Result<(usize, &SharedBytes)> {
        let b = self.buffers.get(id.0 as usize).ok_or(Error::InvalidHandle("buffer"))?;
        Ok((b.size, b.data.as_ref().ok_or(Error::InvalidHandle("buffer"))?))
    }

    pub fn buffer_size(&self, id: BufferId) -> Result<usize> {
        Ok(self.buffer(id)?.0)
    }

    /// Host-side copy of a buffer's current contents.
    pub fn buffer_contents(&self, id: BufferId) -> Result<Vec<u8>> {
        Ok(self.buffer(id)?.1.read().expect("buffer lock poisoned").clone())
    }

    /// Drops the session's reference; commands already enqueued keep theirs.
    pub fn release_buffer(&mut self, id: BufferId) -> Result<()> {
        self.buffer(id)?;
        self.buffers[id.0 as usize].data = None;
        Ok(())
    }

    // ---- kernels --------------------------------------------------------

    pub fn create_kernel<F>(&mut self, name: &str, arity: usize, work: F) -> Result<KernelId>
    where
        F: Fn(WorkItem, &mut [ArgView<'_>]) + Send + Sync + 'static,
    {
        self.check_open()?;
        validate_name(name)?;
        self.kernels.push(KernelState {
            name: name.to_string(),
            arity,
            work: Arc::new(work),
            sticky: vec![None; arity],
            released: false,
        });
        Ok(KernelId(self.kernels.len() as u32 - 1))
    }

    fn kernel(&self, id: KernelId) -> Result<&KernelState> {
        self.kernels.get(id.0 as usize).filter(|k| !k.released).ok_or(Error::InvalidHandle("kernel"))
    }

    /// Sets one argument ahead of enqueueing, so later calls can skip it.
    pub fn set_kernel_arg(&mut self, k: KernelId, index: usize, arg: KernelArg) -> Result<()> {
        let state = self.kernel(k)?;
        if index >= state.arity {
            return Err(Error::ArityMismatch { kernel: state.name.clone(), expected: state.arity, got: index + 1 });
        }
        match arg {
            KernelArg::Skip => {
                if state.sticky[index].is_none() {
                    return Err(Error::SkipWithoutPriorValue { kernel: state.name.clone(), index });
                }
            }
            KernelArg::Buffer(b) => {
                self.buffer(b)?;
                self.kernels[k.0 as usize].sticky[index] = Some(arg);
            }
            KernelArg::Private(_) => self.kernels[k.0 as usize].sticky[index] = Some(arg),
        }
        Ok(())
    }

    pub fn release_kernel(&mut self, k: KernelId) -> Result<()> {
        self.kernel(k)?;
        self.kernels[k.0 as usize].released = true;
        Ok(())
    }

    // ---- commands -------------------------------------------------------

    fn check_wait_list(&self, wait_list: &[EventId]) -> Result<()> {
        if wait_list.iter().any(|e| e.0 as usize >= self.events.len()) {
            return Err(Error::InvalidHandle("event"));
        }
        Ok(())
    }

    fn record(
        &mut self,
        q: QueueId,
        name: &str,
        duration: u64,
        wait_list: &[EventId],
        op: Op<'s>,
    ) -> Result<EventId> {
        let queued = self.now();
        let event = EventId(self.events.len() as u32);
        self.events.push(EventInfo { name: name.to_string(), queue: q, queued, submitted: queued, start: None, end: None });
        self.queues[q.0 as usize].events.push(event);
        self.pending.push(Pending { event, queue: q, duration, deps: wait_list.to_vec(), op });
        Ok(event)
    }

    /// Enqueues an N-dimensional kernel launch.
    ///
    /// `lws`, when given, is checked against the device limits and, on
    /// devices older than 2.0, must divide `gws`.
    #[allow(clippy::too_many_arguments)]
    pub fn enqueue_kernel(
        &mut self,
        q: QueueId,
        k: KernelId,
        dims: usize,
        gws: &[u64],
        lws: Option<&[u64]>,
        args: &[KernelArg],
        wait_list: &[EventId],
        name: Option<&str>,
    ) -> Result<EventId> {
        self.check_open()?;
        let queue = self.queue(q)?;
        let kernel = self.kernel(k)?;
        if !(1..=3).contains(&dims) {
            return Err(Error::BadDims(format!("dims must be 1, 2 or 3, got {dims}")));
        }
        if gws.len() != dims || gws.contains(&0) {
            return Err(Error::BadDims(format!("global work size {gws:?} does not match {dims} dims")));
        }
        if let Some(lws) = lws {
            let dev = &queue.device;
            let ok = lws.len() == dims
                && lws.iter().all(|&l| l >= 1)
                && lws.iter().product::<u64>() <= dev.max_wg_total
                && lws.iter().zip(dev.max_wg_per_dim).all(|(&l, m)| l <= m)
                && (!requires_divisible_gws(dev) || gws.iter().zip(lws).all(|(g, l)| g % l == 0));
            if !ok {
                return Err(Error::InvalidWorkGroupSize(format!("lws {lws:?} for gws {gws:?}")));
            }
        }
        if args.len() != kernel.arity {
            return Err(Error::ArityMismatch { kernel: kernel.name.clone(), expected: kernel.arity, got: args.len() });
        }
        self.check_wait_list(wait_list)?;
        let name = name.unwrap_or(DEFAULT_KERNEL_NAME);
        validate_name(name)?;

        let mut effective = Vec::with_capacity(args.len());
        for (i, a) in args.iter().enumerate() {
            let a = match a {
                KernelArg::Skip => kernel.sticky[i]
                    .ok_or_else(|| Error::SkipWithoutPriorValue { kernel: kernel.name.clone(), index: i })?,
                other => *other,
            };
            effective.push(a);
        }
        let mut resolved = Vec::with_capacity(args.len());
        let mut seen = Vec::new();
        for a in &effective {
            resolved.push(match *a {
                KernelArg::Private(v) => ResolvedArg::Private(v),
                KernelArg::Buffer(b) => {
                    if seen.contains(&b) {
                        return Err(Error::AliasedBuffer { kernel: kernel.name.clone(), buffer: b.0 });
                    }
                    seen.push(b);
                    ResolvedArg::Buffer(b, self.buffer(b)?.1.clone())
                }
                KernelArg::Skip => unreachable!("skips resolved above"),
            });
        }

        let mut grid = [1u64; 3];
        grid[..dims].copy_from_slice(gws);
        let items: u64 = grid.iter().product();
        let dev = &queue.device;
        let duration = (items as f64 * dev.kernel_cost_ns_per_item / f64::from(dev.compute_units)).ceil() as u64;
        let work = kernel.work.clone();

        let sticky = &mut self.kernels[k.0 as usize].sticky;
        for (slot, a) in sticky.iter_mut().zip(effective) {
            *slot = Some(a);
        }
        self.record(q, name, duration, wait_list, Op::Kernel { work, args: resolved, gws: grid })
    }

    fn transfer_duration(&self, q: QueueId, nbytes: usize) -> u64 {
        (nbytes as f64 / self.queues[q.0 as usize].device.bandwidth_bytes_per_ns).ceil() as u64
    }

    #[allow(clippy::too_many_arguments)]
    pub fn enqueue_read(
        &mut self,
        q: QueueId,
        buf: BufferId,
        offset: usize,
        nbytes: usize,
        dest: ReadDest<'s>,
        wait_list: &[EventId],
        name: Option<&str>,
    ) -> Result<EventId> {
        self.check_open()?;
        self.queue(q)?;
        let (size, data) = self.buffer(buf)?;
        if offset.checked_add(nbytes).is_none_or(|e| e > size) {
            return Err(Error::OutOfBounds { offset, nbytes, size });
        }
        self.check_wait_list(wait_list)?;
        let name = name.unwrap_or(DEFAULT_READ_NAME);
        validate_name(name)?;
        let data = data.clone();
        let duration = self.transfer_duration(q, nbytes);
        self.record(q, name, duration, wait_list, Op::Read { data, offset, nbytes, dest })
    }

    pub fn enqueue_write(
        &mut self,
        q: QueueId,
        buf: BufferId,
        offset: usize,
        src: &[u8],
        wait_list: &[EventId],
        name: Option<&str>,
    ) -> Result<EventId> {
        self.check_open()?;
        self.queue(q)?;
        let (size, data) = self.buffer(buf)?;
        if offset.checked_add(src.len()).is_none_or(|e| e > size) {
            return Err(Error::OutOfBounds { offset, nbytes: src.len(), size });
        }
        self.check_wait_list(wait_list)?;
        let name = name.unwrap_or(DEFAULT_WRITE_NAME);
        validate_name(name)?;
        let data = data.clone();
        let duration = self.transfer_duration(q, src.len());
        self.record(q, name, duration, wait_list, Op::Write { data, offset, bytes: src.to_vec() })
    }

    // ---- execution ------------------------------------------------------

    pub fn event_info(&self, e: EventId) -> Result<&EventInfo> {
        self.events.get(e.0 as usize).ok_or(Error::InvalidHandle("event"))
    }

    /// Bytes captured by a finished read with [`ReadDest::Capture`].
    pub fn read_data(&self, e: EventId) -> Option<&[u8]> {
        self.captures.get(&e).map(Vec::as_slice)
    }

    /// Runs every pending command to completion.
    pub fn finish(&mut self) -> Result<()> {
        if self.pending.is_empty() {
            return Ok(());
        }
        let pending = std::mem::take(&mut self.pending);
        let index: HashMap<EventId, usize> = pending.iter().enumerate().map(|(i, p)| (p.event, i)).collect();
        let specs: Vec<CommandSpec> = pending
            .iter()
            .map(|p| {
                let mut not_before = self.queues[p.queue.0 as usize].tail_end;
                let mut deps = Vec::new();
                for d in &p.deps {
                    match index.get(d) {
                        Some(&i) => deps.push(i),
                        None => not_before = not_before.max(self.events[d.0 as usize].end.unwrap_or(0)),
                    }
                }
                CommandSpec {
                    queue: p.queue.0 as usize,
                    queued: self.events[p.event.0 as usize].queued,
                    duration: p.duration,
                    deps,
                    not_before,
                }
            })
            .collect();
        let plan = schedule(&specs)?;

        match self.mode {
            ClockMode::Virtual => self.run_virtual(pending, plan),
            ClockMode::Host => self.run_host(pending, &index),
        }
    }

    fn complete(&mut self, event: EventId, start: u64, end: u64, captured: Option<Vec<u8>>) {
        let info = &mut self.events[event.0 as usize];
        info.start = Some(start);
        info.end = Some(end);
        let q = &mut self.queues[info.queue.0 as usize];
        q.tail_end = q.tail_end.max(end);
        if let Some(bytes) = captured {
            self.captures.insert(event, bytes);
        }
    }

    fn run_virtual(&mut self, pending: Vec<Pending<'s>>, plan: Schedule) -> Result<()> {
        let mut slots: Vec<Option<Pending<'s>>> = pending.into_iter().map(Some).collect();
        for &i in &plan.order {
            let mut p = slots[i].take().expect("each command runs once");
            let captured = p.op.execute()?;
            let Slot { start, end } = plan.slots[i];
            self.complete(p.event, start, end, captured);
            self.clock_ns = self.clock_ns.max(end);
        }
        Ok(())
    }

    fn run_host(&mut self, pending: Vec<Pending<'s>>, index: &HashMap<EventId, usize>) -> Result<()> {
        struct Board {
            done: Vec<Option<(u64, u64)>>,
            failed: bool,
        }
        let n = pending.len();
        let board = Mutex::new(Board { done: vec![None; n], failed: false });
        let signal = Condvar::new();
        let epoch = self.epoch;

        let mut lanes: Vec<Vec<(usize, Pending<'s>)>> = Vec::new();
        let mut lane_of: HashMap<QueueId, usize> = HashMap::new();
        for (i, p) in pending.into_iter().enumerate() {
            let lane = *lane_of.entry(p.queue).or_insert_with(|| {
                lanes.push(Vec::new());
                lanes.len() - 1
            });
            lanes[lane].push((i, p));
        }

        let results: Vec<Result<Vec<Completed>>> = thread::scope(|scope| {
            let workers: Vec<_> = lanes
                .into_iter()
                .map(|lane| {
                    let (board, signal) = (&board, &signal);
                    scope.spawn(move || {
                        let mut out = Vec::with_capacity(lane.len());
                        for (i, mut p) in lane {
                            let deps: Vec<usize> = p.deps.iter().filter_map(|d| index.get(d).copied()).collect();
                            {
                                let mut b = board.lock().expect("board lock poisoned");
                                while !b.failed && deps.iter().any(|&d| b.done[d].is_none()) {
                                    b = signal.wait(b).expect("board lock poisoned");
                                }
                                if b.failed {
                                    return Ok(out);
                                }
                            }
                            let start = epoch.elapsed().as_nanos() as u64;
                            let res = p.op.execute();
                            let end = epoch.elapsed().as_nanos() as u64;
                            let mut b = board.lock().expect("board lock poisoned");
                            match res {
                                Ok(captured) => {
                                    b.done[i] = Some((start, end));
                                    out.push((p.event, captured));
                                    signal.notify_all();
                                }
                                Err(e) => {
                                    b.failed = true;
                                    signal.notify_all();
                                    return Err(e);
                                }
                            }
                        }
                        Ok(out)
                    })
                })
                .collect();
            workers.into_iter().map(|w| w.join().expect("worker panicked")).collect()
        });

        let board = board.into_inner().expect("board lock poisoned");
        let mut first_err = None;
        for r in results {
            match r {
                Ok(done) => {
                    for (event, captured) in done {
                        let (start, end) = board.done[index[&event]].expect("recorded");
                        self.complete(event, start, end, captured);
                    }
                }
                Err(e) => {
                    first_err.get_or_insert(e);
                }
            }
        }
        first_err.map_or(Ok(()), Err)
    }

    /// Snapshot of all queues. Only completed events of profiling queues appear.
    pub fn trace(&self) -> Trace {
        let queues = self
            .queues
            .iter()
            .map(|q| QueueTrace {
                name: q.name.clone(),
                device: q.device.clone(),
                profiling: q.profiling,
                finalized: self.finalized,
                records: if q.profiling {
                    q.events
                        .iter()
                        .filter_map(|e| {
                            let info = &self.events[e.0 as usize];
                            Some(TraceRecord {
                                queue_name: q.name.clone(),
                                event_name: info.name.clone(),
                                queued_ns: info.queued,
                                submitted_ns: info.submitted,
                                start_ns: info.start?,
                                end_ns: info.end?,
                            })
                        })
                        .collect()
                } else {
                    Vec::new()
                },
            })
            .collect();
        Trace { queues, finalized: self.finalized }
    }

    /// Finishes all pending work and freezes the session.
    pub fn finalize(&mut self) -> Result<Trace> {
        self.check_open()?;
        self.finish()?;
        self.finalized = true;
        Ok(self.trace())
    }

    pub fn live_objects(&self) -> LiveCounts {
        LiveCounts {
            contexts: self.contexts.iter().filter(|c| !c.released).count(),
            queues: self.queues.iter().filter(|q| !q.released).count(),
            buffers: self.buffers.iter().filter(|b| b.data.is_some()).count(),
            kernels: self.kernels.iter().filter(|k| !k.released).count(),
        }
    }
}
