//! Queue utilization charts from exported event tables.

use std::fmt::Write;

use crate::error::{Error, Result};
use crate::profiler::ExportRecord;

const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segment {
    pub row: usize,
    pub start_ns: u64,
    pub end_ns: u64,
    pub event_name: String,
    pub color: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChartSpec {
    /// Queue names in order of first appearance.
    pub rows: Vec<String>,
    /// Event names in order of first appearance; index is the palette slot.
    pub names: Vec<String>,
    pub segments: Vec<Segment>,
}

impl ChartSpec {
    /// Fails if two events of the same queue overlap in time.
    pub fn from_records(records: &[ExportRecord]) -> Result<Self> {
        let mut rows: Vec<String> = Vec::new();
        let mut names: Vec<String> = Vec::new();
        let mut segments = Vec::with_capacity(records.len());
        for r in records {
            let row = index_of(&mut rows, &r.queue_name);
            let color = index_of(&mut names, &r.event_name);
            segments.push(Segment { row, start_ns: r.start_ns, end_ns: r.end_ns, event_name: r.event_name.clone(), color });
        }
        for (row, queue) in rows.iter().enumerate() {
            let mut lane: Vec<&Segment> = segments.iter().filter(|s| s.row == row).collect();
            lane.sort_by_key(|s| (s.start_ns, s.end_ns));
            if let Some(w) = lane.windows(2).find(|w| w[1].start_ns < w[0].end_ns) {
                return Err(Error::InvariantViolation(format!(
                    "events {} and {} overlap on queue {}",
                    w[0].event_name, w[1].event_name, queue
                )));
            }
        }
        Ok(Self { rows, names, segments })
    }

    pub fn t0(&self) -> u64 {
        self.segments.iter().map(|s| s.start_ns).min().unwrap_or(0)
    }

    pub fn t1(&self) -> u64 {
        self.segments.iter().map(|s| s.end_ns).max().unwrap_or(0)
    }

    pub fn color(&self, index: usize) -> &'static str {
        PALETTE[index % PALETTE.len()]
    }
}

fn index_of(list: &mut Vec<String>, name: &str) -> usize {
    match list.iter().position(|n| n == name) {
        Some(i) => i,
        None => {
            list.push(name.to_string());
            list.len() - 1
        }
    }
}

fn esc(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

const WIDTH: f64 = 1000.0;
const LEFT: f64 = 120.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 20.0;
const LANE_H: f64 = 30.0;
const LANE_GAP: f64 = 10.0;
const TICKS: u64 = 5;

/// Renders a standalone SVG 1.1 document: one lane per queue, one rectangle
/// per event, a legend of event names and a nanosecond time axis.
pub fn render_svg(spec: &ChartSpec) -> String {
    let (t0, t1) = (spec.t0(), spec.t1());
    let span = (t1 - t0).max(1) as f64;
    let plot_w = WIDTH - LEFT - RIGHT;
    let x = |t: u64| LEFT + (t - t0) as f64 / span * plot_w;
    let lanes_bottom = TOP + spec.rows.len() as f64 * (LANE_H + LANE_GAP);
    let axis_y = lanes_bottom + 5.0;
    let legend_y = axis_y + 45.0;
    let height = legend_y + spec.names.len() as f64 * 20.0 + 10.0;

    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8" standalone="no"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{height}" viewBox="0 0 {WIDTH} {height}" font-family="monospace" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{WIDTH}" height="{height}" fill="white"/>"#);

    for (row, name) in spec.rows.iter().enumerate() {
        let y = TOP + row as f64 * (LANE_H + LANE_GAP);
        let _ = writeln!(s, r#"<g class="lane" data-queue="{}">"#, esc(name));
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#,
            LEFT - 8.0,
            y + LANE_H / 2.0 + 4.0,
            esc(name)
        );
        let _ = writeln!(
            s,
            r##"<rect class="lane-bg" x="{LEFT}" y="{y:.1}" width="{plot_w}" height="{LANE_H}" fill="#f0f0f0"/>"##
        );
        for seg in spec.segments.iter().filter(|g| g.row == row) {
            let (x0, x1) = (x(seg.start_ns), x(seg.end_ns));
            let _ = writeln!(
                s,
                r#"<rect class="event" x="{x0:.3}" y="{y:.1}" width="{:.3}" height="{LANE_H}" fill="{}"><title>{} [{}, {}) ns</title></rect>"#,
                x1 - x0,
                spec.color(seg.color),
                esc(&seg.event_name),
                seg.start_ns,
                seg.end_ns
            );
        }
        let _ = writeln!(s, "</g>");
    }

    let _ = writeln!(s, r#"<g class="axis">"#);
    let _ = writeln!(s, r#"<line x1="{LEFT}" y1="{axis_y:.1}" x2="{:.1}" y2="{axis_y:.1}" stroke="black"/>"#, LEFT + plot_w);
    for k in 0..=TICKS {
        let t = t0 + (t1 - t0) * k / TICKS;
        let tx = x(t);
        let _ = writeln!(s, r#"<line x1="{tx:.3}" y1="{axis_y:.1}" x2="{tx:.3}" y2="{:.1}" stroke="black"/>"#, axis_y + 5.0);
        let _ = writeln!(s, r#"<text x="{tx:.3}" y="{:.1}" text-anchor="middle">{t}</text>"#, axis_y + 18.0);
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">Time (ns)</text>"#,
        LEFT + plot_w / 2.0,
        axis_y + 34.0
    );
    let _ = writeln!(s, "</g>");

    let _ = writeln!(s, r#"<g class="legend">"#);
    for (i, name) in spec.names.iter().enumerate() {
        let y = legend_y + i as f64 * 20.0;
        let _ = writeln!(s, r#"<rect x="{LEFT}" y="{y:.1}" width="14" height="14" fill="{}"/>"#, spec.color(i));
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}">{}</text>"#, LEFT + 20.0, y + 11.0, esc(name));
    }
    let _ = writeln!(s, "</g>");
    s.push_str("</svg>\n");
    s
}

const GLYPHS: &[u8] = b"ABCDEFGHIJKLMNOPQRSTUVWXYZ";

/// Fixed-width lane view for terminals. Each column covers `span / width`
/// nanoseconds and shows the glyph of the event occupying most of it.
pub fn render_text(spec: &ChartSpec, width: usize) -> String {
    let width = width.max(10);
    let (t0, t1) = (spec.t0(), spec.t1());
    let span = (t1 - t0).max(1) as f64;
    let label_w = spec.rows.iter().map(|r| r.chars().count()).max().unwrap_or(0);
    let mut s = String::new();
    for (row, name) in spec.rows.iter().enumerate() {
        let mut cover = vec![(0.0f64, b'.'); width];
        for seg in spec.segments.iter().filter(|g| g.row == row) {
            let a = (seg.start_ns - t0) as f64 / span * width as f64;
            let b = (seg.end_ns - t0) as f64 / span * width as f64;
            let glyph = GLYPHS[seg.color % GLYPHS.len()];
            for (c, cell) in cover.iter_mut().enumerate() {
                let part = b.min(c as f64 + 1.0) - a.max(c as f64);
                if part > cell.0 {
                    *cell = (part, glyph);
                }
            }
            // zero-length and sub-column events still get one cell
            let c = (a as usize).min(width - 1);
            if cover[c].1 == b'.' {
                cover[c] = (0.0, glyph);
            }
        }
        let bar: String = cover.iter().map(|&(_, g)| g as char).collect();
        let _ = writeln!(s, "{name:<label_w$} |{bar}|");
    }
    let pad = label_w + 2;
    let right = t1.to_string();
    let _ = writeln!(s, "{:pad$}{t0:<w$}{right}", "", w = (width + 1).saturating_sub(right.len()).max(1));
    let _ = writeln!(s, "{:pad$}time (ns)", "");
    for (i, n) in spec.names.iter().enumerate() {
        let _ = writeln!(s, "{} = {n}", GLYPHS[i % GLYPHS.len()] as char);
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(q: &str, s: u64, e: u64, n: &str) -> ExportRecord {
        ExportRecord { queue_name: q.into(), start_ns: s, end_ns: e, event_name: n.into() }
    }

    fn sample() -> Vec<ExportRecord> {
        vec![rec("Main", 0, 100, "INIT"), rec("Comms", 100, 400, "READ"), rec("Main", 100, 150, "RNG")]
    }

    #[test]
    fn rows_and_colors_by_first_appearance() {
        let c = ChartSpec::from_records(&sample()).unwrap();
        assert_eq!(c.rows, ["Main", "Comms"]);
        assert_eq!(c.names, ["INIT", "READ", "RNG"]);
        assert_eq!(c.segments[2].row, 0);
        assert_eq!(c.segments[2].color, 2);
        assert_eq!((c.t0(), c.t1()), (0, 400));
    }

    #[test]
    fn overlap_within_a_lane_is_rejected() {
        let r = ChartSpec::from_records(&[rec("Main", 0, 100, "A"), rec("Main", 50, 150, "B")]);
        assert!(matches!(r, Err(Error::InvariantViolation(_))));
        assert!(ChartSpec::from_records(&[rec("Main", 0, 100, "A"), rec("Main", 100, 150, "B")]).is_ok());
    }

    #[test]
    fn svg_structure() {
        let c = ChartSpec::from_records(&sample()).unwrap();
        let svg = render_svg(&c);
        let doc = roxmltree::Document::parse(&svg).unwrap();
        let class = |n: &roxmltree::Node, v: &str| n.attribute("class") == Some(v);
        assert_eq!(doc.descendants().filter(|n| class(n, "lane")).count(), 2);
        assert_eq!(doc.descendants().filter(|n| class(n, "event")).count(), 3);
        let legend = doc.descendants().find(|n| class(n, "legend")).unwrap();
        let labels: Vec<&str> = legend.descendants().filter(|n| n.has_tag_name("text")).filter_map(|n| n.text()).collect();
        assert_eq!(labels, ["INIT", "READ", "RNG"]);
        assert!(svg.contains("Time (ns)"));
        let main_lane = doc.descendants().find(|n| class(n, "lane")).unwrap();
        let fills: Vec<&str> = main_lane
            .descendants()
            .filter(|n| class(n, "event"))
            .filter_map(|n| n.attribute("fill"))
            .collect();
        assert_eq!(fills, [PALETTE[0], PALETTE[2]]);
    }

    #[test]
    fn names_are_escaped() {
        let c = ChartSpec::from_records(&[rec("Q<1>", 0, 10, "A&B")]).unwrap();
        let svg = render_svg(&c);
        let doc = roxmltree::Document::parse(&svg).unwrap();
        assert!(doc.descendants().any(|n| n.text() == Some("A&B")));
    }

    #[test]
    fn text_view() {
        let c = ChartSpec::from_records(&sample()).unwrap();
        let t = render_text(&c, 40);
        let lines: Vec<&str> = t.lines().collect();
        assert_eq!(lines[0], format!("Main  |{}{}{}|", "A".repeat(10), "CCCCC", ".".repeat(25)));
        assert_eq!(lines[1], format!("Comms |{}{}|", ".".repeat(10), "B".repeat(30)));
        assert!(lines[2].trim_start().starts_with('0') && lines[2].ends_with("400"));
        assert_eq!(&lines[4..], ["A = INIT", "B = READ", "C = RNG"]);
    }

    #[test]
    fn tiny_event_still_visible() {
        let c = ChartSpec::from_records(&[rec("M", 0, 1, "K"), rec("C", 0, 10_000, "R")]).unwrap();
        let t = render_text(&c, 20);
        assert!(t.lines().next().unwrap().contains('A'));
    }
}
