//! Filter chains for picking devices out of a [`Registry`].
//!
//! Independent filters test one device at a time. Dependent filters see the
//! whole candidate list and may drop or reorder entries (but never add any).
//! Client code can plug in its own filters of either kind.

use std::fmt;
use std::sync::Arc;

use crate::device::{DeviceDescriptor, DeviceType, Registry};

type Predicate = dyn Fn(&DeviceDescriptor) -> bool + Send + Sync;
type Transform = dyn Fn(Vec<DeviceDescriptor>) -> Vec<DeviceDescriptor> + Send + Sync;

#[derive(Clone)]
pub enum Filter {
    Independent(Arc<Predicate>),
    Dependent(Arc<Transform>),
}

impl Filter {
    pub fn independent<F>(pred: F) -> Self
    where
        F: Fn(&DeviceDescriptor) -> bool + Send + Sync + 'static,
    {
        Filter::Independent(Arc::new(pred))
    }

    pub fn dependent<F>(transform: F) -> Self
    where
        F: Fn(Vec<DeviceDescriptor>) -> Vec<DeviceDescriptor> + Send + Sync + 'static,
    {
        Filter::Dependent(Arc::new(transform))
    }

    fn apply(&self, devices: Vec<DeviceDescriptor>) -> Vec<DeviceDescriptor> {
        match self {
            Filter::Independent(pred) => devices.into_iter().filter(|d| pred(d)).collect(),
            Filter::Dependent(transform) => {
                let out = transform(devices.clone());
                debug_assert!(is_sub_multiset(&out, &devices), "dependent filter invented devices");
                out
            }
        }
    }
}

impl fmt::Debug for Filter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Filter::Independent(_) => f.write_str("Filter::Independent(..)"),
            Filter::Dependent(_) => f.write_str("Filter::Dependent(..)"),
        }
    }
}

/// Ordered list of filters, applied front to back.
#[derive(Debug, Clone, Default)]
pub struct FilterChain {
    filters: Vec<Filter>,
}

impl FilterChain {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, filter: Filter) -> Self {
        self.filters.push(filter);
        self
    }

    pub fn push(&mut self, filter: Filter) {
        self.filters.push(filter);
    }

    pub fn len(&self) -> usize {
        self.filters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.filters.is_empty()
    }
}

impl FromIterator<Filter> for FilterChain {
    fn from_iter<I: IntoIterator<Item = Filter>>(iter: I) -> Self {
        FilterChain { filters: iter.into_iter().collect() }
    }
}

/// Runs `chain` over every registry device (platform order, then device order).
pub fn apply_filter_chain(reg: &Registry, chain: &FilterChain) -> Vec<DeviceDescriptor> {
    apply_to_list(reg.devices().cloned().collect(), chain)
}

/// Runs `chain` over an explicit starting list.
pub fn apply_to_list(devices: Vec<DeviceDescriptor>, chain: &FilterChain) -> Vec<DeviceDescriptor> {
    chain.filters.iter().fold(devices, |acc, f| f.apply(acc))
}

pub fn builtin_type_filter(t: DeviceType) -> Filter {
    Filter::independent(move |d| d.dev_type == t)
}

/// Case-insensitive substring match on the vendor string.
pub fn builtin_vendor_filter(substr: &str) -> Filter {
    let needle = substr.to_lowercase();
    Filter::independent(move |d| d.vendor.to_lowercase().contains(&needle))
}

/// Keeps only devices sharing the platform of the first incoming device.
pub fn builtin_same_platform_filter() -> Filter {
    Filter::dependent(|devices| {
        let Some(anchor) = devices.first().map(|d| d.platform_id.clone()) else {
            return devices;
        };
        devices.into_iter().filter(|d| d.platform_id == anchor).collect()
    })
}

fn is_sub_multiset(sub: &[DeviceDescriptor], sup: &[DeviceDescriptor]) -> bool {
    let mut used = vec![false; sup.len()];
    sub.iter().all(|d| {
        match sup.iter().enumerate().position(|(i, s)| !used[i] && s.same_device(d)) {
            Some(i) => {
                used[i] = true;
                true
            }
            None => false,
        }
    })
}
