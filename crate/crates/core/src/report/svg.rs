//! Bare-bones static SVG renderings of the figure data.

use std::f64::consts::PI;
use std::fmt::Write as _;

use crate::stats::BoxplotSummary;

use super::AnalysisReport;

const W: f64 = 480.0;
const H: f64 = 320.0;
const PAD: f64 = 40.0;

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
    body: String,
}

impl Frame {
    fn new(title: &str, x: (f64, f64), y: (f64, f64)) -> Frame {
        let mut body = String::new();
        let _ = writeln!(
            body,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="11">"#
        );
        let _ = writeln!(body, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
        let _ = writeln!(body, r#"<text x="{}" y="20" text-anchor="middle">{title}</text>"#, W / 2.0);
        let _ = writeln!(
            body,
            r#"<path d="M{PAD} {PAD} V{b} H{r}" fill="none" stroke="black"/>"#,
            b = H - PAD,
            r = W - PAD
        );
        let (y1, y0) = if y.1 > y.0 { (y.1, y.0) } else { (y.0 + 1.0, y.0) };
        let mut f = Frame {
            x0: x.0,
            x1: x.1,
            y0,
            y1,
            body,
        };
        for (v, anchor) in [(x.0, "start"), (x.1, "end")] {
            let _ = writeln!(
                f.body,
                r#"<text x="{:.2}" y="{}" text-anchor="{anchor}">{}</text>"#,
                f.px(v),
                H - PAD + 14.0,
                tick(v)
            );
        }
        for v in [y0, y1] {
            let _ = writeln!(
                f.body,
                r#"<text x="{}" y="{:.2}" text-anchor="end">{}</text>"#,
                PAD - 4.0,
                f.py(v) + 4.0,
                tick(v)
            );
        }
        f
    }

    fn px(&self, x: f64) -> f64 {
        PAD + (x - self.x0) / (self.x1 - self.x0) * (W - 2.0 * PAD)
    }

    fn py(&self, y: f64) -> f64 {
        H - PAD - (y - self.y0) / (self.y1 - self.y0) * (H - 2.0 * PAD)
    }

    fn polyline(&mut self, pts: impl IntoIterator<Item = (f64, f64)>, colour: &str) {
        let coords: Vec<String> = pts
            .into_iter()
            .map(|(x, y)| format!("{:.2},{:.2}", self.px(x), self.py(y)))
            .collect();
        if !coords.is_empty() {
            let _ = writeln!(
                self.body,
                r#"<polyline points="{}" fill="none" stroke="{colour}" stroke-width="1.5"/>"#,
                coords.join(" ")
            );
        }
    }

    fn finish(mut self) -> String {
        self.body.push_str("</svg>\n");
        self.body
    }
}

fn tick(v: f64) -> String {
    let s = format!("{v:.3}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

/// Nodes on a circle, radius growing with position score; edges as lines.
pub fn network(r: &AnalysisReport) -> String {
    let n = r.shape.nodes.len().max(1) as f64;
    let (cx, cy, ring) = (W / 2.0, H / 2.0 + 10.0, H / 2.0 - 50.0);
    let at = |i: usize| {
        let a = 2.0 * PI * i as f64 / n;
        (cx + ring * a.cos(), cy + ring * a.sin())
    };
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="20" text-anchor="middle">week {}: {} residents, {} corrections</text>"#,
        W / 2.0,
        r.shape.peak_week,
        r.shape.n_nodes,
        r.shape.total_corrections
    );
    let index = |id: &str| r.shape.nodes.iter().position(|n| n.resident_id == id);
    for e in &r.shape.edges {
        if let (Some(a), Some(b)) = (index(&e.corrector_id), index(&e.corrected_id)) {
            let ((x1, y1), (x2, y2)) = (at(a), at(b));
            let _ = writeln!(
                s,
                r##"<line x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}" stroke="#888" stroke-opacity="0.4"/>"##
            );
        }
    }
    for (i, node) in r.shape.nodes.iter().enumerate() {
        let (x, y) = at(i);
        let _ = writeln!(
            s,
            r##"<circle cx="{x:.2}" cy="{y:.2}" r="{:.2}" fill="#3b6ea5"><title>{}</title></circle>"##,
            1.5 + 6.0 * node.position_score,
            node.resident_id
        );
    }
    s.push_str("</svg>\n");
    s
}

pub fn histogram(r: &AnalysisReport) -> String {
    let bins = &r.shape.histogram;
    let total = bins.iter().map(|b| b.count).sum::<usize>().max(1) as f64;
    let width = bins.first().map_or(1.0, |b| b.bin_high - b.bin_low);
    let mut top = bins.iter().map(|b| b.count as f64 / total / width).fold(0.0, f64::max);
    if let Some(k) = &r.shape.kde {
        top = k.points.iter().map(|p| p.1).fold(top, f64::max);
    }
    let mut f = Frame::new("peak-week eigenvector centrality", (0.0, 1.0), (0.0, top));
    for b in bins {
        let h = b.count as f64 / total / width;
        let (x, y) = (f.px(b.bin_low), f.py(h));
        let _ = writeln!(
            f.body,
            r##"<rect x="{x:.2}" y="{y:.2}" width="{:.2}" height="{:.2}" fill="#9bb7d4" stroke="white"/>"##,
            f.px(b.bin_high) - x,
            f.py(0.0) - y
        );
    }
    if let Some(k) = &r.shape.kde {
        f.polyline(k.points.iter().copied(), "#c0392b");
    }
    f.finish()
}

pub fn curve(r: &AnalysisReport) -> String {
    let pts: Vec<(f64, f64)> = r.seniority.curve.iter().map(|p| (p.program_week as f64, p.mean)).collect();
    let x1 = pts.last().map_or(1.0, |p| p.0).max(2.0);
    let lo = pts.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let hi = pts.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    let (lo, hi) = if lo.is_finite() { (lo, hi) } else { (0.0, 1.0) };
    let mut f = Frame::new("mean rolling centrality by program week", (1.0, x1), (lo, hi));
    f.polyline(pts, "#3b6ea5");
    f.finish()
}

pub fn boxplots(r: &AnalysisReport) -> String {
    let groups: [(&str, &Option<BoxplotSummary>); 2] = [
        ("first 4 weeks", &r.seniority.boxplot_first4),
        ("last 4 weeks", &r.seniority.boxplot_last4),
    ];
    let mut f = Frame::new("endpoint centrality", (0.0, 2.0), (0.0, 1.0));
    for (i, (name, b)) in groups.iter().enumerate() {
        let cx = f.px(i as f64 + 0.5);
        let _ = writeln!(f.body, r#"<text x="{cx:.2}" y="{}" text-anchor="middle">{name}</text>"#, H - 8.0);
        let Some(b) = b else { continue };
        let (q1, q3, med) = (f.py(b.q1), f.py(b.q3), f.py(b.median));
        let (lo, hi) = (f.py(b.whisker_low), f.py(b.whisker_high));
        let _ = writeln!(
            f.body,
            r##"<rect x="{:.2}" y="{q3:.2}" width="60" height="{:.2}" fill="#dde6f0" stroke="black"/>"##,
            cx - 30.0,
            q1 - q3
        );
        let _ = writeln!(
            f.body,
            r#"<path d="M{a:.2} {med:.2} H{b:.2} M{cx:.2} {q1:.2} V{lo:.2} M{cx:.2} {q3:.2} V{hi:.2}" stroke="black"/>"#,
            a = cx - 30.0,
            b = cx + 30.0
        );
        for o in &b.outliers {
            let _ = writeln!(f.body, r#"<circle cx="{cx:.2}" cy="{:.2}" r="2" fill="none" stroke="black"/>"#, f.py(*o));
        }
    }
    f.finish()
}

pub fn probcurve(r: &AnalysisReport) -> String {
    let mut f = Frame::new("predicted probability of graduation", (0.0, 1.0), (0.0, 1.0));
    f.polyline(r.graduation.prob_curve.iter().map(|p| (p.x, p.probability)), "#3b6ea5");
    f.finish()
}
