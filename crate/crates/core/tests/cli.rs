use std::path::Path;
use std::process::{Command, Output};

use cclsim::device::{DeviceType, Platform, Registry};

fn cclsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cclsim")).args(args).output().expect("spawn cclsim")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write_registry(dir: &Path, cpu_only: bool) -> String {
    let mut platforms: Vec<Platform> = Registry::builtin().platforms.clone();
    if cpu_only {
        platforms[0].devices.retain(|d| d.dev_type == DeviceType::Cpu);
    }
    let reg = Registry::new(platforms).unwrap();
    let path = dir.join(if cpu_only { "cpu.json" } else { "reg.json" });
    std::fs::write(&path, reg.to_json()).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn devinfo_lists_every_device() {
    let dir = tempfile::tempdir().unwrap();
    let reg = write_registry(dir.path(), false);
    let o = cclsim(&["devinfo", "--registry", &reg]);
    assert!(o.status.success());
    let text = stdout(&o);
    let blocks: Vec<&str> = text.split("\n\n").collect();
    assert_eq!(blocks.len(), 2);
    assert!(blocks[0].contains("NAME: SimGPU"));
    assert!(blocks[1].contains("NAME: SimCPU"));
    for b in blocks {
        assert_eq!(b.trim_end().lines().count(), 9, "{b}");
    }
}

#[test]
fn devinfo_type_filter_may_be_empty() {
    let dir = tempfile::tempdir().unwrap();
    let reg = write_registry(dir.path(), true);
    let o = cclsim(&["devinfo", "--registry", &reg, "--type", "GPU"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
}

#[test]
fn devinfo_info_restriction() {
    let o = cclsim(&["devinfo", "--info", "NAME,COMPUTE_UNITS"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "NAME: SimGPU\nCOMPUTE_UNITS: 20\n\nNAME: SimCPU\nCOMPUTE_UNITS: 8\n");
    let o = cclsim(&["devinfo", "--vendor", "simulated", "--type", "cpu", "--info", "version"]);
    assert_eq!(stdout(&o), "VERSION: 2.0\n");
}

#[test]
fn devinfo_errors() {
    assert_eq!(cclsim(&["devinfo", "--info", "BOGUS"]).status.code(), Some(2));
    assert_eq!(cclsim(&["devinfo", "--frobnicate"]).status.code(), Some(2));
    let o = cclsim(&["devinfo", "--registry", "/nonexistent/reg.json"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("not found"));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"platforms\": [\n  {\"id\": 3}\n]}").unwrap();
    let o = cclsim(&["devinfo", "--registry", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));
}

#[test]
fn rng_writes_exact_byte_count() {
    let o = cclsim(&["rng", "4096", "100"]);
    assert!(o.status.success());
    assert_eq!(o.stdout.len(), 3_276_800);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("Aggregate times by event"));
    assert!(err.contains("RNG_KERNEL"));
}

#[test]
fn rng_stream_prefix_is_stable() {
    let o = cclsim(&["rng", "3", "2", "--no-profile"]);
    assert!(o.status.success());
    assert!(o.stderr.is_empty());
    let hex: String = o.stdout.iter().map(|b| format!("{b:02x}")).collect();
    assert_eq!(
        hex,
        "4a431c436a49a9c09f39a1dc9d2c922759777cee753579c64ce97b0accb840fa2cfc3d10ec448a4af779b8e7070f40ae"
    );
}

#[test]
fn rng_rejects_bad_arguments() {
    for args in [&["rng", "0", "10"][..], &["rng", "10", "0"], &["rng", "ten", "1"], &["rng", "5"], &["rng", "4", "4", "--clock", "wall"]] {
        let o = cclsim(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(o.stdout.is_empty());
    }
    assert_eq!(cclsim(&["rng", "4", "4", "--device-index", "9"]).status.code(), Some(2));
}

#[test]
fn rng_host_clock_and_cpu_device() {
    let o = cclsim(&["rng", "500", "4", "--clock", "host", "--device-index", "1"]);
    assert!(o.status.success());
    assert_eq!(o.stdout.len(), 8 * 500 * 4);
    assert!(String::from_utf8_lossy(&o.stderr).contains("Wall elapsed time"));
    let det = cclsim(&["rng", "500", "4", "--no-profile"]);
    assert_eq!(o.stdout, det.stdout);
}

#[test]
fn export_then_plot() {
    let dir = tempfile::tempdir().unwrap();
    let tsv = dir.path().join("t.tsv");
    let svg = dir.path().join("t.svg");
    let o = cclsim(&["rng", "4096", "8", "--export", tsv.to_str().unwrap()]);
    assert!(o.status.success());
    let table = std::fs::read_to_string(&tsv).unwrap();
    assert_eq!(table.lines().count(), 16);

    let o = cclsim(&["plot-events", tsv.to_str().unwrap(), "-o", svg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let doc_text = std::fs::read_to_string(&svg).unwrap();
    let doc = roxmltree::Document::parse(&doc_text).unwrap();
    let lanes: Vec<_> = doc.descendants().filter(|n| n.attribute("class") == Some("lane")).collect();
    assert_eq!(lanes.len(), 2);
    assert_eq!(lanes[0].attribute("data-queue"), Some("Main"));
    assert_eq!(doc.descendants().filter(|n| n.attribute("class") == Some("event")).count(), 16);

    let o = cclsim(&["plot-events", tsv.to_str().unwrap(), "--text", "--width", "40"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("Main  |A"));
    assert!(text.contains("C = READ_BUFFER"));
}

#[test]
fn plot_events_errors() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.tsv");
    std::fs::write(&empty, "").unwrap();
    let o = cclsim(&["plot-events", empty.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("no records"));

    let bad = dir.path().join("bad.tsv");
    std::fs::write(&bad, "Main\t0\t10\tK\nMain\t10\tnope\tK\n").unwrap();
    let o = cclsim(&["plot-events", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));

    let o = cclsim(&["plot-events", dir.path().join("missing.tsv").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn help_goes_to_stdout() {
    let o = cclsim(&["--help"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("plot-events"));
}
