//! Global/local work size suggestion.
//!
//! Devices older than OpenCL 2.0 require every global size to be a multiple of
//! the local size, so the global size is padded. Newer devices accept a
//! ragged last work-group and get the real work size unchanged.

use crate::device::{DeviceDescriptor, Version};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WorkSizes {
    pub dims: usize,
    pub gws: [u64; 3],
    pub lws: [u64; 3],
}

impl WorkSizes {
    pub fn gws(&self) -> &[u64] {
        &self.gws[..self.dims]
    }

    pub fn lws(&self) -> &[u64] {
        &self.lws[..self.dims]
    }

    pub fn global_items(&self) -> u64 {
        self.gws().iter().product()
    }
}

/// Whether `dev` needs the global size padded to a multiple of the local size.
pub fn requires_divisible_gws(dev: &DeviceDescriptor) -> bool {
    dev.version < Version::V2_0
}

pub fn suggest_worksizes(dev: &DeviceDescriptor, dims: usize, real_ws: &[u64]) -> Result<WorkSizes> {
    if !(1..=3).contains(&dims) {
        return Err(Error::BadDims(format!("dims must be 1, 2 or 3, got {dims}")));
    }
    if real_ws.len() != dims {
        return Err(Error::BadDims(format!("expected {dims} real work sizes, got {}", real_ws.len())));
    }
    if real_ws.contains(&0) {
        return Err(Error::ZeroRealWorkSize);
    }

    let mut lws = [1u64; 3];
    for d in 0..dims {
        lws[d] = dev.max_wg_per_dim[d].min(real_ws[d].next_power_of_two());
    }

    while lws[..dims].iter().product::<u64>() > dev.max_wg_total {
        let d = (0..dims).rev().find(|&d| lws[d] > 1).expect("product > max_wg_total >= 1");
        lws[d] /= 2;
    }

    // The preferred multiple query does not exist before 1.1.
    let multiple = if dev.version == Version::V1_0 { 1 } else { dev.preferred_multiple };
    if lws[0] < real_ws[0] {
        let others: u64 = lws[1..dims].iter().product();
        let limit = dev.max_wg_per_dim[0].min(dev.max_wg_total / others);
        let aligned = limit / multiple * multiple;
        if aligned >= lws[0] {
            lws[0] = aligned;
        }
    }

    let mut gws = [1u64; 3];
    for d in 0..dims {
        gws[d] = if requires_divisible_gws(dev) { real_ws[d].div_ceil(lws[d]) * lws[d] } else { real_ws[d] };
    }
    Ok(WorkSizes { dims, gws, lws })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::device::tests::device;
    use crate::device::DeviceType;
    use proptest::prelude::*;

    fn dev(version: Version) -> DeviceDescriptor {
        let mut d = device("g", DeviceType::Gpu, "X");
        d.max_wg_total = 256;
        d.max_wg_per_dim = [256, 256, 256];
        d.preferred_multiple = 32;
        d.version = version;
        d
    }

    #[test]
    fn legacy_pads_to_multiple() {
        let ws = suggest_worksizes(&dev(Version::V1_2), 1, &[1000]).unwrap();
        assert_eq!(ws.lws(), [256]);
        assert_eq!(ws.gws(), [1024]);
    }

    #[test]
    fn relaxed_keeps_real_size() {
        let ws = suggest_worksizes(&dev(Version::V2_0), 1, &[1000]).unwrap();
        assert_eq!(ws.lws(), [256]);
        assert_eq!(ws.gws(), [1000]);
    }

    #[test]
    fn minimal_case() {
        for v in [Version::V1_0, Version::V1_2, Version::V2_1] {
            let ws = suggest_worksizes(&dev(v), 1, &[1]).unwrap();
            assert_eq!((ws.lws(), ws.gws()), (&[1][..], &[1][..]));
        }
    }

    #[test]
    fn halves_highest_dim_first() {
        // 16 * 16 * 4 = 1024 > 256: dim 2 goes 4 -> 2 -> 1, then dim 1 16 -> 8... until 256.
        let ws = suggest_worksizes(&dev(Version::V2_0), 3, &[16, 16, 4]).unwrap();
        assert_eq!(ws.lws(), [16, 16, 1]);
    }

    #[test]
    fn dim0_aligned_to_preferred_multiple() {
        let mut d = dev(Version::V1_2);
        d.max_wg_per_dim = [100, 256, 256];
        // candidate 100 < 1000; largest multiple of 32 below 100 is 96 < 100: keep 100.
        let ws = suggest_worksizes(&d, 1, &[1000]).unwrap();
        assert_eq!(ws.lws(), [100]);
        assert_eq!(ws.gws(), [1000]);
        d.max_wg_per_dim = [200, 4, 256];
        // cand = [200, 1] for rws [1000, 1] ... product 200 <= 256, limit min(200, 256) -> 192 < 200 keep.
        let ws = suggest_worksizes(&d, 2, &[1000, 1]).unwrap();
        assert_eq!(ws.lws(), [200, 1]);
    }

    #[test]
    fn v1_0_ignores_preferred_multiple() {
        let mut d = dev(Version::V1_0);
        d.max_wg_total = 100;
        d.max_wg_per_dim = [100, 100, 100];
        // power-of-two candidate 100 (capped), multiple 1: limit 100 -> stays 100.
        let ws = suggest_worksizes(&d, 1, &[1000]).unwrap();
        assert_eq!(ws.lws(), [100]);
        assert_eq!(ws.gws(), [1000]);
        let mut d11 = d.clone();
        d11.version = Version::V1_1;
        d11.preferred_multiple = 64;
        // limit 100 -> 64 < 100: keep 100 as well.
        assert_eq!(suggest_worksizes(&d11, 1, &[1000]).unwrap().lws(), [100]);
    }

    #[test]
    fn errors() {
        let d = dev(Version::V1_2);
        assert!(matches!(suggest_worksizes(&d, 0, &[]), Err(Error::BadDims(_))));
        assert!(matches!(suggest_worksizes(&d, 4, &[1, 1, 1, 1]), Err(Error::BadDims(_))));
        assert!(matches!(suggest_worksizes(&d, 2, &[1]), Err(Error::BadDims(_))));
        assert!(matches!(suggest_worksizes(&d, 1, &[0]), Err(Error::ZeroRealWorkSize)));
    }

    fn arb_device() -> impl Strategy<Value = DeviceDescriptor> {
        (0u32..=11, 0usize..5, any::<[u64; 3]>(), any::<u64>()).prop_map(|(lg, v, per, pm)| {
            let total = 1u64 << lg;
            let mut d = device("r", DeviceType::Gpu, "X");
            d.max_wg_total = total + (per[0] % 7).min(total.saturating_sub(1));
            d.max_wg_per_dim = per.map(|p| 1 + p % d.max_wg_total);
            d.preferred_multiple = 1 + pm % d.max_wg_total.min(64);
            d.version = [Version::V1_0, Version::V1_1, Version::V1_2, Version::V2_0, Version::V2_1][v];
            d
        })
    }

    proptest! {
        #[test]
        fn invariants_hold(d in arb_device(), dims in 1usize..=3, rws in proptest::array::uniform3(1u64..5000)) {
            let ws = suggest_worksizes(&d, dims, &rws[..dims]).unwrap();
            prop_assert!(ws.lws().iter().product::<u64>() <= d.max_wg_total);
            for k in 0..dims {
                prop_assert!(ws.lws[k] >= 1 && ws.lws[k] <= d.max_wg_per_dim[k]);
                prop_assert!(ws.gws[k] >= rws[k]);
                if requires_divisible_gws(&d) {
                    prop_assert_eq!(ws.gws[k] % ws.lws[k], 0);
                } else {
                    prop_assert_eq!(ws.gws[k], rws[k]);
                }
            }
            prop_assert_eq!(ws, suggest_worksizes(&d, dims, &rws[..dims]).unwrap());
        }
    }
}
