use std::cmp::Ordering;
use std::fmt::Write;

use super::{ProfAgg, ProfOverlap, ProfReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AggSort {
    Time,
    Name,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OverlapSort {
    Duration,
    Name,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SortOrder {
    Asc,
    Desc,
}

impl SortOrder {
    fn apply(self, o: Ordering) -> Ordering {
        match self {
            SortOrder::Asc => o,
            SortOrder::Desc => o.reverse(),
        }
    }
}

/// Scientific notation with a signed, at least two-digit exponent (`6.6521e+00`).
pub(crate) fn sci(v: f64, decimals: usize) -> String {
    let s = format!("{v:.decimals$e}");
    let (mantissa, exp) = s.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:02}", exp.abs())
}

fn secs(ns: u64) -> f64 {
    ns as f64 * 1e-9
}

const RULE: &str = "------------------------------------------------------------------";

/// Renders the two tables and the four footer lines.
pub fn summary(report: &ProfReport, agg_sort: (AggSort, SortOrder), ov_sort: (OverlapSort, SortOrder)) -> String {
    let mut aggs: Vec<&ProfAgg> = report.aggs.iter().collect();
    aggs.sort_by(|a, b| {
        let primary = match agg_sort.0 {
            AggSort::Time => a.abs_duration_ns.cmp(&b.abs_duration_ns),
            AggSort::Name => a.event_name.cmp(&b.event_name),
        };
        agg_sort.1.apply(primary).then_with(|| a.event_name.cmp(&b.event_name))
    });
    let mut overlaps: Vec<&ProfOverlap> = report.overlaps.iter().collect();
    overlaps.sort_by(|a, b| {
        let names = |o: &ProfOverlap| (o.name_a.clone(), o.name_b.clone());
        let primary = match ov_sort.0 {
            OverlapSort::Duration => a.overlap_ns.cmp(&b.overlap_ns),
            OverlapSort::Name => names(a).cmp(&names(b)),
        };
        ov_sort.1.apply(primary).then_with(|| names(a).cmp(&names(b)))
    });

    let mut out = String::new();
    let w = &mut out;
    // Writing to a String cannot fail.
    let _ = writeln!(w, " Aggregate times by event  :");
    let _ = writeln!(w, "   {RULE}");
    let _ = writeln!(w, "   | {:<30} | {:>13} | {:>13} |", "Event name", "Rel. time (%)", "Abs. time (s)");
    let _ = writeln!(w, "   {RULE}");
    for a in &aggs {
        let _ = writeln!(
            w,
            "   | {:<30} | {:>13.4} | {:>13} |",
            a.event_name,
            a.rel_duration * 100.0,
            sci(secs(a.abs_duration_ns), 4)
        );
    }
    let _ = writeln!(w, "   {RULE}");
    let _ = writeln!(w, "{:36}| {:>13} | {:>13} |", "", "Total", sci(secs(report.total_events_ns), 4));
    let _ = writeln!(w, "{:36}{}", "", &RULE[..33]);

    let _ = writeln!(w, " Event overlaps            :");
    let _ = writeln!(w, "   {RULE}");
    let _ = writeln!(w, "   | {:<22} | {:<22} | {:<12} |", "Event 1", "Event 2", "Overlap (s)");
    let _ = writeln!(w, "   {RULE}");
    for o in &overlaps {
        let _ = writeln!(w, "   | {:<22} | {:<22} | {:>12} |", o.name_a, o.name_b, sci(secs(o.overlap_ns), 4));
    }
    let _ = writeln!(w, "   {RULE}");
    let _ = writeln!(w, "{:28}| {:>22} | {:>12} |", "", "Total", sci(secs(report.total_overlap_ns()), 4));
    let _ = writeln!(w, "{:28}{}", "", &RULE[..41]);

    let _ = writeln!(w, " {:<26}: {}s", "Tot. of all events (eff.)", sci(secs(report.effective_ns), 6));
    let _ = writeln!(w, " {:<26}: {}s", "Total elapsed time", sci(secs(report.elapsed_ns), 6));
    let _ = writeln!(w, " {:<26}: {:.2}%", "Time spent in device", report.device_fraction * 100.0);
    let _ = writeln!(w, " {:<26}: {:.2}%", "Time spent in host", report.host_fraction * 100.0);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sci_matches_c_style() {
        assert_eq!(sci(6.6521, 4), "6.6521e+00");
        assert_eq!(sci(0.81531, 4), "8.1531e-01");
        assert_eq!(sci(6.2464e-5, 4), "6.2464e-05");
        assert_eq!(sci(7.451659, 6), "7.451659e+00");
        assert_eq!(sci(0.0, 4), "0.0000e+00");
        assert_eq!(sci(1.5e123, 1), "1.5e+123");
    }
}
