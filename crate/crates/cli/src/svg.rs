use std::fmt::Write;

use linmtl_core::DVector;

/// 2-D view of a k-dimensional point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Projection {
    /// Coordinates within the plane `Σ vᵢ = const` (k = 3); the first two
    /// coordinates otherwise.
    Simplex,
    /// Coordinates 1 and 2.
    #[value(name = "12")]
    #[serde(rename = "12")]
    Axes12,
    #[value(name = "13")]
    #[serde(rename = "13")]
    Axes13,
    #[value(name = "23")]
    #[serde(rename = "23")]
    Axes23,
}

impl Projection {
    pub fn apply(self, v: &DVector<f64>) -> (f64, f64) {
        let at = |i: usize| v.get(i).copied().unwrap_or(0.0);
        match self {
            Self::Simplex if v.len() == 3 => (
                (at(1) - at(0)) / 2f64.sqrt(),
                (2.0 * at(2) - at(0) - at(1)) / 6f64.sqrt(),
            ),
            Self::Simplex | Self::Axes12 => (at(0), at(1)),
            Self::Axes13 => (at(0), at(2)),
            Self::Axes23 => (at(1), at(2)),
        }
    }

    pub fn axis_labels(self) -> (&'static str, &'static str) {
        match self {
            Self::Simplex => ("u", "w"),
            Self::Axes12 => ("task 1", "task 2"),
            Self::Axes13 => ("task 1", "task 3"),
            Self::Axes23 => ("task 2", "task 3"),
        }
    }
}

pub struct Series {
    pub label: String,
    pub color: &'static str,
    pub radius: f64,
    pub points: Vec<(f64, f64)>,
}

pub const PALETTE: [&str; 8] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
];

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 520.0;
const MARGIN: f64 = 72.0;
const LEGEND: f64 = 150.0;

/// Renders a static scatter plot with a legend.
pub fn scatter(title: &str, axes: (&str, &str), series: &[Series]) -> String {
    let all = series.iter().flat_map(|s| s.points.iter());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in all {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    let pad = |lo: f64, hi: f64| {
        let span = if hi > lo { hi - lo } else { 1.0 };
        (lo - 0.05 * span, hi + 0.05 * span)
    };
    let (x0, x1) = pad(x0, x1);
    let (y0, y1) = pad(y0, y1);
    let plot_w = WIDTH - 2.0 * MARGIN - LEGEND;
    let plot_h = HEIGHT - 2.0 * MARGIN;
    let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * plot_w;
    let sy = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * plot_h;

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
        MARGIN + plot_w / 2.0,
        escape(title)
    );
    let _ = writeln!(
        out,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#
    );
    for i in 0..=4 {
        let f = i as f64 / 4.0;
        let (xv, yv) = (x0 + f * (x1 - x0), y0 + f * (y1 - y0));
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{:.3}</text>"#,
            sx(xv),
            HEIGHT - MARGIN + 16.0,
            xv
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{:.3}</text>"#,
            MARGIN - 6.0,
            sy(yv) + 4.0,
            yv
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        MARGIN + plot_w / 2.0,
        HEIGHT - 14.0,
        escape(axes.0)
    );
    let _ = writeln!(
        out,
        r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">{}</text>"#,
        MARGIN + plot_h / 2.0,
        MARGIN + plot_h / 2.0,
        escape(axes.1)
    );
    for s in series {
        let _ = writeln!(out, r#"<g fill="{}" fill-opacity="0.8">"#, s.color);
        for &(x, y) in &s.points {
            let _ = writeln!(out, r#"<circle cx="{:.2}" cy="{:.2}" r="{}"/>"#, sx(x), sy(y), s.radius);
        }
        let _ = writeln!(out, "</g>");
    }
    for (i, s) in series.iter().enumerate() {
        let y = MARGIN + 12.0 + 20.0 * i as f64;
        let x = WIDTH - LEGEND - MARGIN / 2.0 + 10.0;
        let _ = writeln!(out, r#"<circle cx="{x}" cy="{y}" r="5" fill="{}"/>"#, s.color);
        let _ = writeln!(out, r#"<text x="{}" y="{}">{}</text>"#, x + 12.0, y + 4.0, escape(&s.label));
    }
    out.push_str("</svg>\n");
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
