//! Command-line front end: `devinfo`, `plot-events` and `rng`.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use crate::chart::{render_svg, render_text, ChartSpec};
use crate::device::{get_info, load_registry, DeviceType, InfoKey, Registry};
use crate::error::{Error, Result};
use crate::prng::{run_pipeline, PipelineConfig};
use crate::profiler::{export_table, parse_table, sci, summary, AggSort, OverlapSort, SortOrder};
use crate::selector::{apply_filter_chain, builtin_type_filter, builtin_vendor_filter, FilterChain};
use crate::sim::ClockMode;

#[derive(Debug, Parser)]
#[command(name = "cclsim", version, about = "Simulated compute-device toolkit")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// List platforms and devices of a registry.
    Devinfo {
        /// Registry JSON file; the built-in registry when omitted.
        #[arg(long)]
        registry: Option<PathBuf>,
        /// Keep only devices of this type (CPU, GPU, ACCEL, OTHER).
        #[arg(long = "type")]
        dev_type: Option<DeviceType>,
        /// Keep only devices whose vendor contains this text.
        #[arg(long)]
        vendor: Option<String>,
        /// Comma-separated info keys to print.
        #[arg(long, value_delimiter = ',')]
        info: Vec<InfoKey>,
    },
    /// Draw a queue utilization chart from an exported event table.
    PlotEvents {
        input: PathBuf,
        /// SVG output path; standard output when omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Print a text lane view instead of SVG.
        #[arg(long)]
        text: bool,
        /// Columns of the text view.
        #[arg(long, default_value_t = 72)]
        width: usize,
    },
    /// Stream random bytes from the double-buffered generator to standard output.
    Rng {
        /// 64-bit values per iteration.
        #[arg(value_parser = clap::value_parser!(u32).range(1..))]
        n: u32,
        /// Number of iterations.
        #[arg(value_parser = clap::value_parser!(u64).range(1..))]
        i: u64,
        #[arg(long)]
        device_registry: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        device_index: usize,
        #[arg(long, value_enum, default_value_t = Clock::Virtual)]
        clock: Clock,
        /// Write the profiler event table to this file.
        #[arg(long)]
        export: Option<PathBuf>,
        /// Skip the summary and export.
        #[arg(long)]
        no_profile: bool,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Clock {
    Virtual,
    Host,
}

/// Runtime failure mapped to an exit status.
struct Failure {
    status: i32,
    msg: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure { status: 1, msg: e.to_string() }
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure { status: 2, msg: msg.into() }
}

/// Runs one invocation and returns the process exit status.
pub fn run<I, T>(args: I, out: &mut (dyn Write + Send), err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                2
            } else {
                let _ = write!(out, "{text}");
                0
            };
        }
    };
    let res = match cli.cmd {
        Command::Devinfo { registry, dev_type, vendor, info } => devinfo(registry, dev_type, vendor, &info, out),
        Command::PlotEvents { input, output, text, width } => plot_events(&input, output, text, width, out),
        Command::Rng { n, i, device_registry, device_index, clock, export, no_profile } => {
            rng(n, i, device_registry, device_index, clock, export, no_profile, out, err)
        }
    };
    match res {
        Ok(()) => 0,
        Err(f) => {
            let _ = writeln!(err, "cclsim: {}", f.msg);
            f.status
        }
    }
}

fn registry(path: Option<PathBuf>) -> Result<Registry> {
    path.map_or_else(|| Ok(Registry::builtin()), load_registry)
}

fn devinfo(
    path: Option<PathBuf>,
    dev_type: Option<DeviceType>,
    vendor: Option<String>,
    info: &[InfoKey],
    out: &mut dyn Write,
) -> std::result::Result<(), Failure> {
    let reg = registry(path)?;
    let mut chain = FilterChain::new();
    if let Some(t) = dev_type {
        chain.push(builtin_type_filter(t));
    }
    if let Some(v) = vendor {
        chain.push(builtin_vendor_filter(&v));
    }
    let keys: &[InfoKey] = if info.is_empty() { &InfoKey::ALL } else { info };
    let mut text = String::new();
    for (k, dev) in apply_filter_chain(&reg, &chain).iter().enumerate() {
        if k > 0 {
            text.push('\n');
        }
        if info.is_empty() {
            let p = reg.platform(&dev.platform_id).expect("device belongs to a platform");
            text.push_str(&format!("PLATFORM: {}\n", p.name));
        }
        for &key in keys {
            text.push_str(&format!("{}: {}\n", key.as_str(), get_info(dev, key)));
        }
    }
    out.write_all(text.as_bytes()).map_err(Error::Io)?;
    Ok(())
}

fn plot_events(
    input: &PathBuf,
    output: Option<PathBuf>,
    text: bool,
    width: usize,
    out: &mut dyn Write,
) -> std::result::Result<(), Failure> {
    let src = fs::read_to_string(input).map_err(|e| Failure { status: 1, msg: format!("{}: {e}", input.display()) })?;
    let records = parse_table(&src)?;
    if records.is_empty() {
        return Err(Failure { status: 1, msg: format!("{}: no records", input.display()) });
    }
    let spec = ChartSpec::from_records(&records)?;
    let doc = if text { render_text(&spec, width) } else { render_svg(&spec) };
    match output {
        Some(p) => fs::write(&p, doc).map_err(Error::Io)?,
        None => out.write_all(doc.as_bytes()).map_err(Error::Io)?,
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn rng(
    n: u32,
    i: u64,
    registry_path: Option<PathBuf>,
    index: usize,
    clock: Clock,
    export: Option<PathBuf>,
    no_profile: bool,
    out: &mut (dyn Write + Send),
    err: &mut dyn Write,
) -> std::result::Result<(), Failure> {
    let reg = registry(registry_path)?;
    let count = reg.devices().count();
    let device = reg
        .devices()
        .nth(index)
        .ok_or_else(|| usage(format!("device index {index} out of range ({count} devices)")))?
        .clone();
    let clock = match clock {
        Clock::Virtual => ClockMode::Virtual,
        Clock::Host => ClockMode::Host,
    };
    let cfg = PipelineConfig { n, iterations: i, clock, device };
    let res = run_pipeline(&cfg, out)?;
    out.flush().map_err(Error::Sink)?;
    if no_profile {
        return Ok(());
    }

    let report = res.profile()?;
    let text = summary(&report, (AggSort::Time, SortOrder::Desc), (OverlapSort::Duration, SortOrder::Desc));
    err.write_all(text.as_bytes()).map_err(Error::Io)?;
    if clock == ClockMode::Host {
        writeln!(err, " {:<26}: {}s", "Wall elapsed time", sci(res.wall_elapsed_ns as f64 * 1e-9, 6)).map_err(Error::Io)?;
    }
    if let Some(p) = export {
        export_table(&report, p)?;
    }
    Ok(())
}
