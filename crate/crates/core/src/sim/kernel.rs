use std::fmt;
use std::sync::Arc;

use super::BufferId;

/// Immediate scalar argument with its declared byte width.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PrivateValue {
    pub bits: u64,
    pub width: u8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelArg {
    Private(PrivateValue),
    Buffer(BufferId),
    /// Reuse the value set for this index by an earlier call.
    Skip,
}

impl KernelArg {
    pub fn private_u32(v: u32) -> Self {
        KernelArg::Private(PrivateValue { bits: v.into(), width: 4 })
    }

    pub fn private_u64(v: u64) -> Self {
        KernelArg::Private(PrivateValue { bits: v, width: 8 })
    }
}

impl From<BufferId> for KernelArg {
    fn from(b: BufferId) -> Self {
        KernelArg::Buffer(b)
    }
}

/// What a work function sees for each argument while it runs.
pub enum ArgView<'a> {
    Scalar(PrivateValue),
    Buffer(&'a mut [u8]),
}

impl ArgView<'_> {
    pub fn scalar(&self) -> Option<u64> {
        match self {
            ArgView::Scalar(v) => Some(v.bits),
            ArgView::Buffer(_) => None,
        }
    }
}

impl fmt::Debug for ArgView<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ArgView::Scalar(v) => write!(f, "Scalar({v:?})"),
            ArgView::Buffer(b) => write!(f, "Buffer({} bytes)", b.len()),
        }
    }
}

/// Coordinates of one work-item.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WorkItem {
    pub gid: [u64; 3],
    pub gws: [u64; 3],
}

/// Host-side body of a kernel, invoked once per global id.
///
/// Must only touch the buffers it receives; invocation order across
/// work-items is unspecified.
pub type WorkFn = dyn Fn(WorkItem, &mut [ArgView<'_>]) + Send + Sync;

pub(crate) struct KernelState {
    pub name: String,
    pub arity: usize,
    pub work: Arc<WorkFn>,
    pub sticky: Vec<Option<KernelArg>>,
    pub released: bool,
}
