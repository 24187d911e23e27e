//! Minimal hand-written SVG line and strip plots.

use std::fmt::Write;

use super::classify::{pair_tests, Thresholds};
use super::report::{CaseRow, RateRow};
use super::trace::PoseTrace;

const W: f64 = 800.0;
const H: f64 = 300.0;
const PAD: f64 = 50.0;
const COLORS: [&str; 3] = ["#1f77b4", "#d62728", "#2ca02c"];

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn new(xs: impl Iterator<Item = f64> + Clone, ys: impl Iterator<Item = f64> + Clone) -> Self {
        let bounds = |it: &mut dyn Iterator<Item = f64>| {
            it.filter(|v| v.is_finite()).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
        };
        let (mut x0, mut x1) = bounds(&mut xs.clone());
        let (mut y0, mut y1) = bounds(&mut ys.clone());
        if !x0.is_finite() {
            (x0, x1) = (0.0, 1.0);
        }
        if !y0.is_finite() {
            (y0, y1) = (0.0, 1.0);
        }
        if x1 - x0 < 1e-12 {
            x1 = x0 + 1.0;
        }
        if y1 - y0 < 1e-12 {
            (y0, y1) = (y0 - 0.5, y1 + 0.5);
        }
        Self { x0, x1, y0, y1 }
    }

    fn x(&self, v: f64) -> f64 {
        PAD + (v - self.x0) / (self.x1 - self.x0) * (W - 2.0 * PAD)
    }

    fn y(&self, v: f64) -> f64 {
        H - PAD - (v - self.y0) / (self.y1 - self.y0) * (H - 2.0 * PAD)
    }
}

fn header(title: &str, xlabel: &str, ylabel: &str, f: &Frame) -> String {
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#);
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#, W / 2.0, escape(title));
    let _ = writeln!(
        s,
        r##"<rect x="{PAD}" y="{PAD}" width="{}" height="{}" fill="none" stroke="#444"/>"##,
        W - 2.0 * PAD,
        H - 2.0 * PAD
    );
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle" font-size="12">{}</text>"#, W / 2.0, H - 10.0, xlabel);
    let _ = writeln!(
        s,
        r#"<text x="14" y="{}" font-size="12" transform="rotate(-90 14 {})" text-anchor="middle">{}</text>"#,
        H / 2.0,
        H / 2.0,
        ylabel
    );
    let _ = writeln!(s, r#"<text x="{}" y="{}" font-size="10" text-anchor="end">{:.3}</text>"#, PAD - 4.0, PAD + 4.0, f.y1);
    let _ = writeln!(s, r#"<text x="{}" y="{}" font-size="10" text-anchor="end">{:.3}</text>"#, PAD - 4.0, H - PAD, f.y0);
    let _ = writeln!(s, r#"<text x="{PAD}" y="{}" font-size="10">{:.2}</text>"#, H - PAD + 14.0, f.x0);
    let _ = writeln!(s, r#"<text x="{}" y="{}" font-size="10" text-anchor="end">{:.2}</text>"#, W - PAD, H - PAD + 14.0, f.x1);
    s
}

fn polyline(s: &mut String, f: &Frame, pts: impl Iterator<Item = (f64, f64)>, color: &str, label: &str) {
    let coords: Vec<String> = pts.map(|(x, y)| format!("{:.2},{:.2}", f.x(x), f.y(y))).collect();
    let _ = writeln!(
        s,
        r#"<polyline class="series" data-label="{label}" fill="none" stroke="{color}" stroke-width="1.2" points="{}"/>"#,
        coords.join(" ")
    );
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// East/north/up position targets over time with one vertical line per
/// flagged pair (drawn at the second record of the pair).
pub fn targets_svg(trace: &PoseTrace, flagged: &[usize]) -> String {
    let r = &trace.records;
    let f = Frame::new(r.iter().map(|x| x.t), r.iter().flat_map(|x| [x.e, x.n, x.u]));
    let mut s = header(&format!("{} / {}: position target", trace.system, trace.case), "t (s)", "m", &f);
    for &i in flagged {
        if let Some(rec) = r.get(i + 1) {
            let x = f.x(rec.t);
            let _ = writeln!(
                s,
                r##"<line class="flag" data-index="{i}" x1="{x:.2}" x2="{x:.2}" y1="{PAD}" y2="{}" stroke="#888" stroke-dasharray="4 3"/>"##,
                H - PAD
            );
        }
    }
    polyline(&mut s, &f, r.iter().map(|x| (x.t, x.e)), COLORS[0], "east");
    polyline(&mut s, &f, r.iter().map(|x| (x.t, x.n)), COLORS[1], "north");
    polyline(&mut s, &f, r.iter().map(|x| (x.t, x.u)), COLORS[2], "up");
    s.push_str("</svg>\n");
    s
}

/// Angular speed per pair with the θ_a rule.
pub fn speed_svg(trace: &PoseTrace, th: &Thresholds) -> String {
    let tests = pair_tests(trace, th);
    let pts: Vec<(f64, f64)> = tests
        .iter()
        .enumerate()
        .filter_map(|(i, t)| t.map(|t| (trace.records[i + 1].t, t.speed)))
        .collect();
    let f = Frame::new(pts.iter().map(|p| p.0), pts.iter().map(|p| p.1).chain([0.0, th.theta_a]));
    let mut s = header(&format!("{} / {}: angular speed", trace.system, trace.case), "t (s)", "rad/s", &f);
    let y = f.y(th.theta_a);
    let _ = writeln!(
        s,
        r##"<line class="threshold" x1="{PAD}" x2="{}" y1="{y:.2}" y2="{y:.2}" stroke="#d62728" stroke-dasharray="6 3"/>"##,
        W - PAD
    );
    polyline(&mut s, &f, pts.into_iter(), COLORS[0], "speed");
    s.push_str("</svg>\n");
    s
}

/// Strip plots of per-case r_d and F for every system.
pub fn distributions_svg(cases: &[CaseRow], rates: &[RateRow]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{}">"#, 2.0 * H);
    let _ = writeln!(s, r#"<rect width="{W}" height="{}" fill="white"/>"#, 2.0 * H);
    let groups: [(&str, Vec<(&str, f64)>); 2] = [
        ("r_d", cases.iter().map(|c| (c.system.as_str(), c.r_d)).collect()),
        ("F (Hz)", rates.iter().map(|r| (r.system.as_str(), r.f)).collect()),
    ];
    for (panel, (name, values)) in groups.iter().enumerate() {
        let mut systems: Vec<&str> = values.iter().map(|v| v.0).collect();
        systems.sort_unstable();
        systems.dedup();
        let f = Frame::new([0.0, systems.len().max(1) as f64].into_iter(), values.iter().map(|v| v.1).chain([0.0]));
        let _ = writeln!(s, r#"<g transform="translate(0 {})">"#, panel as f64 * H);
        s.push_str(&header(name, "system", name, &f).replacen("<svg", "<svg x=\"0\"", 1));
        for (k, system) in systems.iter().enumerate() {
            let x = f.x(k as f64 + 0.5);
            let _ = writeln!(s, r#"<text x="{x:.2}" y="{}" font-size="11" text-anchor="middle">{}</text>"#, H - PAD + 28.0, escape(system));
            for (_, v) in values.iter().filter(|v| v.0 == *system) {
                let _ = writeln!(s, r#"<circle class="point" cx="{x:.2}" cy="{:.2}" r="3" fill="{}" fill-opacity="0.6"/>"#, f.y(*v), COLORS[k % 3]);
            }
        }
        s.push_str("</svg>\n</g>\n");
    }
    s.push_str("</svg>\n");
    s
}
