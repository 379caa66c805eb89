//! Platforms, simulated devices, their queryable properties and the registry
//! file they are loaded from.

use std::fmt;
use std::fs;
use std::io;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DeviceType {
    #[serde(rename = "CPU")]
    Cpu,
    #[serde(rename = "GPU")]
    Gpu,
    #[serde(rename = "ACCEL")]
    Accel,
    #[serde(rename = "OTHER")]
    Other,
}

impl DeviceType {
    pub fn as_str(self) -> &'static str {
        match self {
            DeviceType::Cpu => "CPU",
            DeviceType::Gpu => "GPU",
            DeviceType::Accel => "ACCEL",
            DeviceType::Other => "OTHER",
        }
    }
}

impl fmt::Display for DeviceType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DeviceType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "CPU" => Ok(DeviceType::Cpu),
            "GPU" => Ok(DeviceType::Gpu),
            "ACCEL" | "ACCELERATOR" => Ok(DeviceType::Accel),
            "OTHER" => Ok(DeviceType::Other),
            _ => Err(Error::UnknownKey(s.to_string())),
        }
    }
}

/// OpenCL version implemented by a device. Ordered oldest to newest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Version {
    #[serde(rename = "V1_0")]
    V1_0,
    #[serde(rename = "V1_1")]
    V1_1,
    #[serde(rename = "V1_2")]
    V1_2,
    #[serde(rename = "V2_0")]
    V2_0,
    #[serde(rename = "V2_1")]
    V2_1,
}

impl fmt::Display for Version {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Version::V1_0 => "1.0",
            Version::V1_1 => "1.1",
            Version::V1_2 => "1.2",
            Version::V2_0 => "2.0",
            Version::V2_1 => "2.1",
        };
        f.write_str(s)
    }
}

/// Capabilities and cost model of one simulated compute device.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceDescriptor {
    pub id: String,
    pub name: String,
    pub vendor: String,
    pub dev_type: DeviceType,
    pub compute_units: u32,
    pub max_wg_total: u64,
    pub max_wg_per_dim: [u64; 3],
    pub preferred_multiple: u64,
    pub version: Version,
    /// Transfer throughput used to time reads and writes.
    pub bandwidth_bytes_per_ns: f64,
    /// Per-work-item kernel cost before dividing across compute units.
    pub kernel_cost_ns_per_item: f64,
    /// Owning platform id, filled in when the device is placed on a platform.
    #[serde(skip)]
    pub platform_id: String,
}

impl DeviceDescriptor {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvariantViolation(format!("device {:?}: {msg}", self.id)));
        if self.compute_units < 1 {
            return bad("compute_units must be >= 1".into());
        }
        if self.max_wg_total < 1 {
            return bad("max_wg_total must be >= 1".into());
        }
        if self.preferred_multiple < 1 {
            return bad("preferred_multiple must be >= 1".into());
        }
        if self.preferred_multiple > self.max_wg_total {
            return bad(format!(
                "preferred_multiple {} exceeds max_wg_total {}",
                self.preferred_multiple, self.max_wg_total
            ));
        }
        for (d, &m) in self.max_wg_per_dim.iter().enumerate() {
            if m < 1 || m > self.max_wg_total {
                return bad(format!("max_wg_per_dim[{d}] = {m} outside [1, {}]", self.max_wg_total));
            }
        }
        for (field, v) in [
            ("bandwidth_bytes_per_ns", self.bandwidth_bytes_per_ns),
            ("kernel_cost_ns_per_item", self.kernel_cost_ns_per_item),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("{field} must be a positive finite number"));
            }
        }
        Ok(())
    }

    /// Whether two descriptors name the same physical device.
    pub fn same_device(&self, other: &DeviceDescriptor) -> bool {
        self.platform_id == other.platform_id && self.id == other.id
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Platform {
    pub id: String,
    pub name: String,
    pub vendor: String,
    pub devices: Vec<DeviceDescriptor>,
}

/// File-based stand-in for live platform enumeration.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Registry {
    pub platforms: Vec<Platform>,
}

impl Registry {
    /// Builds a registry from platforms, stamping ownership and checking invariants.
    pub fn new(mut platforms: Vec<Platform>) -> Result<Self> {
        for p in &mut platforms {
            for d in &mut p.devices {
                d.platform_id = p.id.clone();
            }
        }
        let reg = Registry { platforms };
        reg.validate()?;
        Ok(reg)
    }

    /// Parses a registry document.
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: Registry = serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            column: e.column(),
            msg: e.to_string(),
        })?;
        Registry::new(raw.platforms)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("registry serializes")
    }

    fn validate(&self) -> Result<()> {
        for (i, p) in self.platforms.iter().enumerate() {
            if self.platforms[..i].iter().any(|q| q.id == p.id) {
                return Err(Error::InvariantViolation(format!("duplicate platform id {:?}", p.id)));
            }
            for (j, d) in p.devices.iter().enumerate() {
                if p.devices[..j].iter().any(|e| e.id == d.id) {
                    return Err(Error::InvariantViolation(format!(
                        "duplicate device id {:?} on platform {:?}",
                        d.id, p.id
                    )));
                }
                d.validate()?;
            }
        }
        Ok(())
    }

    /// All devices, platform order then device order.
    pub fn devices(&self) -> impl Iterator<Item = &DeviceDescriptor> {
        self.platforms.iter().flat_map(|p| p.devices.iter())
    }

    pub fn platform(&self, id: &str) -> Option<&Platform> {
        self.platforms.iter().find(|p| p.id == id)
    }

    /// Single-platform registry with one simulated GPU and one CPU, used when
    /// no registry file is supplied.
    pub fn builtin() -> Self {
        let gpu = DeviceDescriptor {
            id: "gpu0".into(),
            name: "SimGPU".into(),
            vendor: "Simulated Devices Inc.".into(),
            dev_type: DeviceType::Gpu,
            compute_units: 20,
            max_wg_total: 1024,
            max_wg_per_dim: [1024, 1024, 64],
            preferred_multiple: 32,
            version: Version::V1_2,
            bandwidth_bytes_per_ns: 12.0,
            kernel_cost_ns_per_item: 0.1,
            platform_id: String::new(),
        };
        let cpu = DeviceDescriptor {
            id: "cpu0".into(),
            name: "SimCPU".into(),
            vendor: "Simulated Devices Inc.".into(),
            dev_type: DeviceType::Cpu,
            compute_units: 8,
            max_wg_total: 8192,
            max_wg_per_dim: [8192, 8192, 8192],
            preferred_multiple: 1,
            version: Version::V2_0,
            bandwidth_bytes_per_ns: 20.0,
            kernel_cost_ns_per_item: 1.0,
            platform_id: String::new(),
        };
        Registry::new(vec![Platform {
            id: "sim".into(),
            name: "Simulated Platform".into(),
            vendor: "Simulated Devices Inc.".into(),
            devices: vec![gpu, cpu],
        }])
        .expect("builtin registry is valid")
    }
}

/// Loads a registry document from disk.
pub fn load_registry(path: impl AsRef<Path>) -> Result<Registry> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| match e.kind() {
        io::ErrorKind::NotFound => Error::FileNotFound(path.display().to_string()),
        _ => Error::Io(e),
    })?;
    Registry::from_json(&text)
}

/// Platforms in registry order.
pub fn list_platforms(reg: &Registry) -> &[Platform] {
    &reg.platforms
}

/// Queryable device properties.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InfoKey {
    Name,
    Vendor,
    Type,
    ComputeUnits,
    MaxWgTotal,
    MaxWgPerDim,
    PreferredMultiple,
    Version,
}

impl InfoKey {
    pub const ALL: [InfoKey; 8] = [
        InfoKey::Name,
        InfoKey::Vendor,
        InfoKey::Type,
        InfoKey::ComputeUnits,
        InfoKey::MaxWgTotal,
        InfoKey::MaxWgPerDim,
        InfoKey::PreferredMultiple,
        InfoKey::Version,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            InfoKey::Name => "NAME",
            InfoKey::Vendor => "VENDOR",
            InfoKey::Type => "TYPE",
            InfoKey::ComputeUnits => "COMPUTE_UNITS",
            InfoKey::MaxWgTotal => "MAX_WG_TOTAL",
            InfoKey::MaxWgPerDim => "MAX_WG_PER_DIM",
            InfoKey::PreferredMultiple => "PREFERRED_MULTIPLE",
            InfoKey::Version => "VERSION",
        }
    }

    /// Stable numeric index used across the C interface.
    pub fn from_index(i: u32) -> Result<Self> {
        InfoKey::ALL.get(i as usize).copied().ok_or_else(|| Error::UnknownKey(i.to_string()))
    }
}

impl FromStr for InfoKey {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let up = s.trim().to_ascii_uppercase();
        InfoKey::ALL
            .iter()
            .copied()
            .find(|k| k.as_str() == up)
            .ok_or_else(|| Error::UnknownKey(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InfoValue {
    Text(String),
    Int(u64),
    Triple([u64; 3]),
}

impl fmt::Display for InfoValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InfoValue::Text(s) => f.write_str(s),
            InfoValue::Int(v) => write!(f, "{v}"),
            InfoValue::Triple([a, b, c]) => write!(f, "{a} {b} {c}"),
        }
    }
}

/// Reads one property of a device.
pub fn get_info(dev: &DeviceDescriptor, key: InfoKey) -> InfoValue {
    match key {
        InfoKey::Name => InfoValue::Text(dev.name.clone()),
        InfoKey::Vendor => InfoValue::Text(dev.vendor.clone()),
        InfoKey::Type => InfoValue::Text(dev.dev_type.to_string()),
        InfoKey::ComputeUnits => InfoValue::Int(dev.compute_units.into()),
        InfoKey::MaxWgTotal => InfoValue::Int(dev.max_wg_total),
        InfoKey::MaxWgPerDim => InfoValue::Triple(dev.max_wg_per_dim),
        InfoKey::PreferredMultiple => InfoValue::Int(dev.preferred_multiple),
        InfoKey::Version => InfoValue::Text(dev.version.to_string()),
    }
}

/// String-keyed variant of [`get_info`]; fails with `UnknownKey`.
pub fn get_info_by_name(dev: &DeviceDescriptor, key: &str) -> Result<InfoValue> {
    Ok(get_info(dev, key.parse()?))
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub fn device(id: &str, dev_type: DeviceType, vendor: &str) -> DeviceDescriptor {
        DeviceDescriptor {
            id: id.into(),
            name: format!("Dev {id}"),
            vendor: vendor.into(),
            dev_type,
            compute_units: 4,
            max_wg_total: 256,
            max_wg_per_dim: [256, 256, 64],
            preferred_multiple: 32,
            version: Version::V1_2,
            bandwidth_bytes_per_ns: 8.0,
            kernel_cost_ns_per_item: 1.0,
            platform_id: String::new(),
        }
    }

    const TWO_DEVICES: &str = r#"{
      "platforms": [
        {"id": "p0", "name": "Plat", "vendor": "ACME",
         "devices": [
           {"id": "d0", "name": "SimGPU", "vendor": "ACME", "dev_type": "GPU",
            "compute_units": 28, "max_wg_total": 1024, "max_wg_per_dim": [1024, 1024, 64],
            "preferred_multiple": 32, "version": "V1_2",
            "bandwidth_bytes_per_ns": 16.0, "kernel_cost_ns_per_item": 0.5},
           {"id": "d1", "name": "SimCPU", "vendor": "ACME", "dev_type": "CPU",
            "compute_units": 8, "max_wg_total": 8192, "max_wg_per_dim": [8192, 8192, 8192],
            "preferred_multiple": 1, "version": "V2_0",
            "bandwidth_bytes_per_ns": 4.0, "kernel_cost_ns_per_item": 2.0}
         ]}
      ]
    }"#;

    #[test]
    fn parses_two_devices() {
        let reg = Registry::from_json(TWO_DEVICES).unwrap();
        assert_eq!(reg.devices().count(), 2);
        let d: Vec<_> = reg.devices().collect();
        assert_eq!(d[0].name, "SimGPU");
        assert_eq!(d[1].platform_id, "p0");
    }

    #[test]
    fn empty_registry_is_valid() {
        let reg = Registry::from_json(r#"{"platforms": []}"#).unwrap();
        assert!(list_platforms(&reg).is_empty());
    }

    #[test]
    fn preferred_multiple_above_total_is_rejected() {
        let text = TWO_DEVICES.replacen(r#""max_wg_total": 1024"#, r#""max_wg_total": 256"#, 1).replacen(
            r#""max_wg_per_dim": [1024, 1024, 64], "#,
            r#""max_wg_per_dim": [256, 256, 64], "#,
            1,
        );
        let text = text.replacen(r#""preferred_multiple": 32"#, r#""preferred_multiple": 512"#, 1);
        assert!(matches!(Registry::from_json(&text), Err(Error::InvariantViolation(_))));
    }

    #[test]
    fn unknown_field_is_parse_error() {
        let text = TWO_DEVICES.replacen(r#""name": "SimGPU","#, r#""name": "SimGPU", "colour": 1,"#, 1);
        match Registry::from_json(&text) {
            Err(Error::Parse { line, .. }) => assert!(line > 1),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn duplicate_ids_rejected() {
        let text = TWO_DEVICES.replacen(r#""id": "d1""#, r#""id": "d0""#, 1);
        assert!(matches!(Registry::from_json(&text), Err(Error::InvariantViolation(_))));
    }

    #[test]
    fn missing_file() {
        assert!(matches!(load_registry("/nonexistent/registry.json"), Err(Error::FileNotFound(_))));
    }

    #[test]
    fn load_from_disk_preserves_order() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        io::Write::write_all(&mut f, TWO_DEVICES.as_bytes()).unwrap();
        let a = load_registry(f.path()).unwrap();
        let b = load_registry(f.path()).unwrap();
        assert_eq!(a, b);
        assert_eq!(list_platforms(&a), list_platforms(&b));
    }

    #[test]
    fn info_reads_fields() {
        let mut d = device("x", DeviceType::Gpu, "ACME");
        d.compute_units = 28;
        d.name = "SimGPU".into();
        assert_eq!(get_info(&d, InfoKey::Name), InfoValue::Text("SimGPU".into()));
        assert_eq!(get_info(&d, InfoKey::ComputeUnits), InfoValue::Int(28));
        assert_eq!(get_info(&d, InfoKey::MaxWgPerDim), InfoValue::Triple([256, 256, 64]));
        assert!(matches!(get_info_by_name(&d, "BOGUS"), Err(Error::UnknownKey(_))));
        assert!(matches!(InfoKey::from_index(8), Err(Error::UnknownKey(_))));
        for k in InfoKey::ALL {
            assert_eq!(k.as_str().parse::<InfoKey>().unwrap(), k);
        }
    }

    #[test]
    fn builtin_round_trips_through_json() {
        let reg = Registry::builtin();
        assert_eq!(Registry::from_json(&reg.to_json()).unwrap(), reg);
    }
}
