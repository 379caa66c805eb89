//! Error type shared by every module, plus the numeric error-code table.
//!
//! Codes that have an OpenCL host API counterpart reuse its numeric value.
//! Codes specific to the simulator live in the disjoint range starting at
//! [`SIM_CODE_BASE`].

use std::fmt;
use std::io;

/// First code of the simulator-specific range.
pub const SIM_CODE_BASE: i32 = 10000;

/// Numeric error codes.
pub mod code {
    pub const SUCCESS: i32 = 0;
    pub const DEVICE_NOT_FOUND: i32 = -1;
    pub const DEVICE_NOT_AVAILABLE: i32 = -2;
    pub const COMPILER_NOT_AVAILABLE: i32 = -3;
    pub const MEM_OBJECT_ALLOCATION_FAILURE: i32 = -4;
    pub const OUT_OF_RESOURCES: i32 = -5;
    pub const OUT_OF_HOST_MEMORY: i32 = -6;
    pub const PROFILING_INFO_NOT_AVAILABLE: i32 = -7;
    pub const MEM_COPY_OVERLAP: i32 = -8;
    pub const IMAGE_FORMAT_MISMATCH: i32 = -9;
    pub const IMAGE_FORMAT_NOT_SUPPORTED: i32 = -10;
    pub const BUILD_PROGRAM_FAILURE: i32 = -11;
    pub const MAP_FAILURE: i32 = -12;
    pub const MISALIGNED_SUB_BUFFER_OFFSET: i32 = -13;
    pub const EXEC_STATUS_ERROR_FOR_EVENTS_IN_WAIT_LIST: i32 = -14;
    pub const COMPILE_PROGRAM_FAILURE: i32 = -15;
    pub const LINKER_NOT_AVAILABLE: i32 = -16;
    pub const LINK_PROGRAM_FAILURE: i32 = -17;
    pub const DEVICE_PARTITION_FAILED: i32 = -18;
    pub const KERNEL_ARG_INFO_NOT_AVAILABLE: i32 = -19;
    pub const INVALID_VALUE: i32 = -30;
    pub const INVALID_DEVICE_TYPE: i32 = -31;
    pub const INVALID_PLATFORM: i32 = -32;
    pub const INVALID_DEVICE: i32 = -33;
    pub const INVALID_CONTEXT: i32 = -34;
    pub const INVALID_QUEUE_PROPERTIES: i32 = -35;
    pub const INVALID_COMMAND_QUEUE: i32 = -36;
    pub const INVALID_HOST_PTR: i32 = -37;
    pub const INVALID_MEM_OBJECT: i32 = -38;
    pub const INVALID_IMAGE_FORMAT_DESCRIPTOR: i32 = -39;
    pub const INVALID_IMAGE_SIZE: i32 = -40;
    pub const INVALID_SAMPLER: i32 = -41;
    pub const INVALID_BINARY: i32 = -42;
    pub const INVALID_BUILD_OPTIONS: i32 = -43;
    pub const INVALID_PROGRAM: i32 = -44;
    pub const INVALID_PROGRAM_EXECUTABLE: i32 = -45;
    pub const INVALID_KERNEL_NAME: i32 = -46;
    pub const INVALID_KERNEL_DEFINITION: i32 = -47;
    pub const INVALID_KERNEL: i32 = -48;
    pub const INVALID_ARG_INDEX: i32 = -49;
    pub const INVALID_ARG_VALUE: i32 = -50;
    pub const INVALID_ARG_SIZE: i32 = -51;
    pub const INVALID_KERNEL_ARGS: i32 = -52;
    pub const INVALID_WORK_DIMENSION: i32 = -53;
    pub const INVALID_WORK_GROUP_SIZE: i32 = -54;
    pub const INVALID_WORK_ITEM_SIZE: i32 = -55;
    pub const INVALID_GLOBAL_OFFSET: i32 = -56;
    pub const INVALID_EVENT_WAIT_LIST: i32 = -57;
    pub const INVALID_EVENT: i32 = -58;
    pub const INVALID_OPERATION: i32 = -59;
    pub const INVALID_GL_OBJECT: i32 = -60;
    pub const INVALID_BUFFER_SIZE: i32 = -61;
    pub const INVALID_MIP_LEVEL: i32 = -62;
    pub const INVALID_GLOBAL_WORK_SIZE: i32 = -63;
    pub const INVALID_PROPERTY: i32 = -64;
    pub const INVALID_IMAGE_DESCRIPTOR: i32 = -65;
    pub const INVALID_COMPILER_OPTIONS: i32 = -66;
    pub const INVALID_LINKER_OPTIONS: i32 = -67;
    pub const INVALID_DEVICE_PARTITION_COUNT: i32 = -68;
    pub const INVALID_PIPE_SIZE: i32 = -69;
    pub const INVALID_DEVICE_QUEUE: i32 = -70;

    pub const FILE_NOT_FOUND: i32 = super::SIM_CODE_BASE;
    pub const PARSE_ERROR: i32 = super::SIM_CODE_BASE + 1;
    pub const INVARIANT_VIOLATION: i32 = super::SIM_CODE_BASE + 2;
    pub const UNKNOWN_KEY: i32 = super::SIM_CODE_BASE + 3;
    pub const DEPENDENCY_CYCLE: i32 = super::SIM_CODE_BASE + 4;
    pub const DUPLICATE_QUEUE_NAME: i32 = super::SIM_CODE_BASE + 5;
    pub const NOT_FINALIZED: i32 = super::SIM_CODE_BASE + 6;
    pub const NO_QUEUES: i32 = super::SIM_CODE_BASE + 7;
    pub const EMPTY_TRACE: i32 = super::SIM_CODE_BASE + 8;
    pub const IO_ERROR: i32 = super::SIM_CODE_BASE + 9;
    pub const SINK_ERROR: i32 = super::SIM_CODE_BASE + 10;
    pub const INVALID_NAME: i32 = super::SIM_CODE_BASE + 11;
    pub const ALREADY_FINALIZED: i32 = super::SIM_CODE_BASE + 12;
    pub const INVALID_HANDLE: i32 = super::SIM_CODE_BASE + 13;
    pub const INVALID_ELAPSED: i32 = super::SIM_CODE_BASE + 14;
}

const MESSAGES: &[(i32, &str)] = &[
    (code::SUCCESS, "success"),
    (code::DEVICE_NOT_FOUND, "device not found"),
    (code::DEVICE_NOT_AVAILABLE, "device not available"),
    (code::COMPILER_NOT_AVAILABLE, "compiler not available"),
    (code::MEM_OBJECT_ALLOCATION_FAILURE, "memory object allocation failure"),
    (code::OUT_OF_RESOURCES, "out of resources"),
    (code::OUT_OF_HOST_MEMORY, "out of host memory"),
    (code::PROFILING_INFO_NOT_AVAILABLE, "profiling info not available"),
    (code::MEM_COPY_OVERLAP, "memory copy overlap"),
    (code::IMAGE_FORMAT_MISMATCH, "image format mismatch"),
    (code::IMAGE_FORMAT_NOT_SUPPORTED, "image format not supported"),
    (code::BUILD_PROGRAM_FAILURE, "program build failure"),
    (code::MAP_FAILURE, "map failure"),
    (code::MISALIGNED_SUB_BUFFER_OFFSET, "misaligned sub-buffer offset"),
    (code::EXEC_STATUS_ERROR_FOR_EVENTS_IN_WAIT_LIST, "execution status error for events in wait list"),
    (code::COMPILE_PROGRAM_FAILURE, "program compilation failure"),
    (code::LINKER_NOT_AVAILABLE, "linker not available"),
    (code::LINK_PROGRAM_FAILURE, "program link failure"),
    (code::DEVICE_PARTITION_FAILED, "device partition failed"),
    (code::KERNEL_ARG_INFO_NOT_AVAILABLE, "kernel argument info not available"),
    (code::INVALID_VALUE, "invalid value"),
    (code::INVALID_DEVICE_TYPE, "invalid device type"),
    (code::INVALID_PLATFORM, "invalid platform"),
    (code::INVALID_DEVICE, "invalid device"),
    (code::INVALID_CONTEXT, "invalid context"),
    (code::INVALID_QUEUE_PROPERTIES, "invalid queue properties"),
    (code::INVALID_COMMAND_QUEUE, "invalid command queue"),
    (code::INVALID_HOST_PTR, "invalid host pointer"),
    (code::INVALID_MEM_OBJECT, "invalid memory object"),
    (code::INVALID_IMAGE_FORMAT_DESCRIPTOR, "invalid image format descriptor"),
    (code::INVALID_IMAGE_SIZE, "invalid image size"),
    (code::INVALID_SAMPLER, "invalid sampler"),
    (code::INVALID_BINARY, "invalid binary"),
    (code::INVALID_BUILD_OPTIONS, "invalid build options"),
    (code::INVALID_PROGRAM, "invalid program"),
    (code::INVALID_PROGRAM_EXECUTABLE, "invalid program executable"),
    (code::INVALID_KERNEL_NAME, "invalid kernel name"),
    (code::INVALID_KERNEL_DEFINITION, "invalid kernel definition"),
    (code::INVALID_KERNEL, "invalid kernel"),
    (code::INVALID_ARG_INDEX, "invalid argument index"),
    (code::INVALID_ARG_VALUE, "invalid argument value"),
    (code::INVALID_ARG_SIZE, "invalid argument size"),
    (code::INVALID_KERNEL_ARGS, "invalid kernel arguments"),
    (code::INVALID_WORK_DIMENSION, "invalid work dimension"),
    (code::INVALID_WORK_GROUP_SIZE, "invalid work group size"),
    (code::INVALID_WORK_ITEM_SIZE, "invalid work item size"),
    (code::INVALID_GLOBAL_OFFSET, "invalid global offset"),
    (code::INVALID_EVENT_WAIT_LIST, "invalid event wait list"),
    (code::INVALID_EVENT, "invalid event"),
    (code::INVALID_OPERATION, "invalid operation"),
    (code::INVALID_GL_OBJECT, "invalid OpenGL object"),
    (code::INVALID_BUFFER_SIZE, "invalid buffer size"),
    (code::INVALID_MIP_LEVEL, "invalid mip-map level"),
    (code::INVALID_GLOBAL_WORK_SIZE, "invalid global work size"),
    (code::INVALID_PROPERTY, "invalid property"),
    (code::INVALID_IMAGE_DESCRIPTOR, "invalid image descriptor"),
    (code::INVALID_COMPILER_OPTIONS, "invalid compiler options"),
    (code::INVALID_LINKER_OPTIONS, "invalid linker options"),
    (code::INVALID_DEVICE_PARTITION_COUNT, "invalid device partition count"),
    (code::INVALID_PIPE_SIZE, "invalid pipe size"),
    (code::INVALID_DEVICE_QUEUE, "invalid device queue"),
    (code::FILE_NOT_FOUND, "file not found"),
    (code::PARSE_ERROR, "parse error"),
    (code::INVARIANT_VIOLATION, "invariant violation"),
    (code::UNKNOWN_KEY, "unknown info key"),
    (code::DEPENDENCY_CYCLE, "dependency cycle among pending commands"),
    (code::DUPLICATE_QUEUE_NAME, "duplicate queue name"),
    (code::NOT_FINALIZED, "queue not finalized"),
    (code::NO_QUEUES, "no queues added to profiler"),
    (code::EMPTY_TRACE, "trace contains no events"),
    (code::IO_ERROR, "i/o error"),
    (code::SINK_ERROR, "output sink error"),
    (code::INVALID_NAME, "invalid name"),
    (code::ALREADY_FINALIZED, "session already finalized"),
    (code::INVALID_HANDLE, "invalid or released handle"),
    (code::INVALID_ELAPSED, "elapsed time shorter than trace span"),
];

/// Every defined error code, in table order.
pub fn defined_codes() -> impl Iterator<Item = i32> {
    MESSAGES.iter().map(|&(c, _)| c)
}

/// Converts an error code into a human-readable message.
///
/// Total: unknown codes map to `"unknown error <code>"`.
pub fn error_string(code: i32) -> String {
    MESSAGES
        .iter()
        .find(|&&(c, _)| c == code)
        .map(|&(_, m)| m.to_string())
        .unwrap_or_else(|| format!("unknown error {code}"))
}

/// Errors raised by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("file not found: {0}")]
    FileNotFound(String),
    #[error("parse error at line {line}, column {column}: {msg}")]
    Parse { line: usize, column: usize, msg: String },
    #[error("invariant violation: {0}")]
    InvariantViolation(String),
    #[error("unknown info key: {0}")]
    UnknownKey(String),
    #[error("context requires at least one device")]
    EmptyDeviceList,
    #[error("no device of type {0}")]
    NoMatchingDevice(String),
    #[error("device {0} does not belong to the context")]
    DeviceNotInContext(String),
    #[error("buffer size must be at least one byte")]
    ZeroSize,
    #[error("kernel {kernel} expects {expected} arguments, got {got}")]
    ArityMismatch { kernel: String, expected: usize, got: usize },
    #[error("kernel {kernel} argument {index} skipped without a prior value")]
    SkipWithoutPriorValue { kernel: String, index: usize },
    #[error("kernel {kernel} receives buffer {buffer} more than once")]
    AliasedBuffer { kernel: String, buffer: u32 },
    #[error("invalid work dimensions: {0}")]
    BadDims(String),
    #[error("invalid work-group size: {0}")]
    InvalidWorkGroupSize(String),
    #[error("real work size must be positive in every dimension")]
    ZeroRealWorkSize,
    #[error("transfer of {nbytes} bytes at offset {offset} exceeds buffer of {size} bytes")]
    OutOfBounds { offset: usize, nbytes: usize, size: usize },
    #[error("dependency cycle among pending commands")]
    DependencyCycle,
    #[error("queue name {0:?} already added")]
    DuplicateQueueName(String),
    #[error("queue {0:?} is not finalized")]
    NotFinalized(String),
    #[error("no queues added to profiler")]
    NoQueues,
    #[error("trace contains no events")]
    EmptyTrace,
    #[error("elapsed time {elapsed} ns is shorter than trace span {span} ns")]
    InvalidElapsed { elapsed: u64, span: u64 },
    #[error("invalid name {0:?}")]
    InvalidName(String),
    #[error("session already finalized")]
    AlreadyFinalized,
    #[error("invalid or released {0} handle")]
    InvalidHandle(&'static str),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("sink error: {0}")]
    Sink(io::Error),
}

impl Error {
    /// Numeric code for this error.
    pub fn code(&self) -> i32 {
        use code::*;
        match self {
            Error::FileNotFound(_) => FILE_NOT_FOUND,
            Error::Parse { .. } => PARSE_ERROR,
            Error::InvariantViolation(_) => INVARIANT_VIOLATION,
            Error::UnknownKey(_) => UNKNOWN_KEY,
            Error::EmptyDeviceList => INVALID_VALUE,
            Error::NoMatchingDevice(_) => DEVICE_NOT_FOUND,
            Error::DeviceNotInContext(_) => INVALID_DEVICE,
            Error::ZeroSize => INVALID_BUFFER_SIZE,
            Error::ArityMismatch { .. } | Error::AliasedBuffer { .. } => INVALID_KERNEL_ARGS,
            Error::SkipWithoutPriorValue { .. } => INVALID_ARG_VALUE,
            Error::BadDims(_) => INVALID_WORK_DIMENSION,
            Error::InvalidWorkGroupSize(_) => INVALID_WORK_GROUP_SIZE,
            Error::ZeroRealWorkSize => INVALID_GLOBAL_WORK_SIZE,
            Error::OutOfBounds { .. } => INVALID_VALUE,
            Error::DependencyCycle => DEPENDENCY_CYCLE,
            Error::DuplicateQueueName(_) => DUPLICATE_QUEUE_NAME,
            Error::NotFinalized(_) => NOT_FINALIZED,
            Error::NoQueues => NO_QUEUES,
            Error::EmptyTrace => EMPTY_TRACE,
            Error::InvalidElapsed { .. } => INVALID_ELAPSED,
            Error::InvalidName(_) => INVALID_NAME,
            Error::AlreadyFinalized => ALREADY_FINALIZED,
            Error::InvalidHandle(_) => INVALID_HANDLE,
            Error::Io(_) => IO_ERROR,
            Error::Sink(_) => SINK_ERROR,
        }
    }

    /// Packs this error into an [`ErrorInfo`] tagged with the failing operation.
    pub fn info(&self, origin: &str) -> ErrorInfo {
        ErrorInfo { code: self.code(), message: self.to_string(), origin: origin.to_string() }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Detached error report: code, message and the operation that failed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ErrorInfo {
    pub code: i32,
    pub message: String,
    pub origin: String,
}

impl fmt::Display for ErrorInfo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {} (code {}: {})", self.origin, self.message, self.code, error_string(self.code))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn success_code() {
        assert_eq!(error_string(0), "success");
    }

    #[test]
    fn build_failure_mentions_build() {
        assert!(error_string(code::BUILD_PROGRAM_FAILURE).contains("build"));
    }

    #[test]
    fn unknown_code_fallback() {
        assert_eq!(error_string(999999), "unknown error 999999");
        assert_eq!(error_string(-1000), "unknown error -1000");
    }

    #[test]
    fn table_is_injective_and_complete() {
        let codes: HashSet<i32> = defined_codes().collect();
        assert_eq!(codes.len(), MESSAGES.len());
        let msgs: HashSet<String> = defined_codes().map(error_string).collect();
        assert_eq!(msgs.len(), MESSAGES.len());
        for c in defined_codes() {
            assert!(!error_string(c).is_empty());
            assert!(!error_string(c).starts_with("unknown error"));
        }
    }

    #[test]
    fn simulator_codes_disjoint_from_opencl_range() {
        for c in defined_codes().filter(|&c| c > 0) {
            assert!(c >= SIM_CODE_BASE);
        }
    }

    #[test]
    fn error_info_carries_origin() {
        let info = Error::ZeroSize.info("create_buffer");
        assert_eq!(info.code, code::INVALID_BUFFER_SIZE);
        assert_eq!(info.origin, "create_buffer");
        assert!(info.to_string().contains("invalid buffer size"));
    }
}
