//! Minimal static SVG scatter plots. Every data point becomes exactly one
//! `<circle class="marker ...">`, so marker count equals CSV row count.

use std::fmt::Write;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 440.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 24.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 56.0;
const TICKS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    Linear,
    Log,
}

#[derive(Debug, Clone)]
pub struct Point {
    pub x: f64,
    pub y: f64,
    /// Extra CSS class, e.g. `stable`.
    pub class: &'static str,
}

#[derive(Debug, Clone)]
pub struct Plot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub x_scale: Scale,
    pub y_scale: Scale,
    pub points: Vec<Point>,
    /// Connect points of this class in order.
    pub line_class: Option<&'static str>,
    /// Dashed vertical guide, e.g. a critical frequency.
    pub guide_x: Option<(f64, String)>,
}

struct Axis {
    lo: f64,
    hi: f64,
    scale: Scale,
    from: f64,
    to: f64,
}

impl Axis {
    fn new(values: impl Iterator<Item = f64>, scale: Scale, from: f64, to: f64) -> Self {
        let (mut lo, mut hi) = values
            .map(|v| transform(v, scale))
            .filter(|v| v.is_finite())
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| {
                (a.min(v), b.max(v))
            });
        if !lo.is_finite() {
            (lo, hi) = (0.0, 1.0);
        }
        if hi - lo <= 1e-12 * lo.abs().max(1.0) {
            let pad = 0.5 * lo.abs().max(1.0);
            (lo, hi) = (lo - pad, hi + pad);
        }
        let pad = 0.04 * (hi - lo);
        Self {
            lo: lo - pad,
            hi: hi + pad,
            scale,
            from,
            to,
        }
    }

    fn map(&self, v: f64) -> f64 {
        let t = (transform(v, self.scale) - self.lo) / (self.hi - self.lo);
        self.from + t * (self.to - self.from)
    }

    fn contains(&self, v: f64) -> bool {
        let t = transform(v, self.scale);
        t.is_finite() && t >= self.lo && t <= self.hi
    }

    /// Tick values in data units.
    fn ticks(&self) -> Vec<f64> {
        match self.scale {
            Scale::Linear => (0..TICKS)
                .map(|i| self.lo + (self.hi - self.lo) * i as f64 / (TICKS - 1) as f64)
                .collect(),
            Scale::Log => {
                let (a, b) = (self.lo.ceil() as i32, self.hi.floor() as i32);
                if b - a >= 1 {
                    let step = ((b - a) as usize).div_ceil(TICKS).max(1);
                    (a..=b).step_by(step).map(|e| 10f64.powi(e)).collect()
                } else {
                    (0..TICKS)
                        .map(|i| {
                            10f64
                                .powf(self.lo + (self.hi - self.lo) * i as f64 / (TICKS - 1) as f64)
                        })
                        .collect()
                }
            }
        }
    }
}

fn transform(v: f64, scale: Scale) -> f64 {
    match scale {
        Scale::Linear => v,
        Scale::Log if v > 0.0 => v.log10(),
        Scale::Log => f64::NAN,
    }
}

fn label(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 || (1e-3..1e4).contains(&a) {
        let s = format!("{v:.4}");
        let s = s.trim_end_matches('0').trim_end_matches('.');
        if s == "-0" {
            "0".into()
        } else {
            s.into()
        }
    } else {
        format!("{v:.2e}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

impl Plot {
    /// Renders the plot. Points with non-finite coordinates (or nonpositive
    /// ones on a log axis) are drawn pinned to the lower axis edge so that
    /// the marker count never changes.
    pub fn render(&self) -> String {
        let x = Axis::new(
            self.points.iter().map(|p| p.x),
            self.x_scale,
            LEFT,
            WIDTH - RIGHT,
        );
        let y = Axis::new(
            self.points.iter().map(|p| p.y),
            self.y_scale,
            HEIGHT - BOTTOM,
            TOP,
        );
        let place = |axis: &Axis, v: f64| {
            if axis.contains(v) {
                axis.map(v)
            } else {
                axis.from
            }
        };

        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        );
        s.push_str(
            "<style>.marker{fill:#1f77b4;stroke:none}.marker.stable{fill:#bbbbbb}.curve{fill:none;stroke:#1f77b4;stroke-width:1.5}.guide{stroke:#d62728;stroke-dasharray:4 3}.grid{stroke:#eeeeee}</style>\n",
        );
        let _ = writeln!(
            s,
            r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
            WIDTH / 2.0,
            escape(&self.title)
        );

        for t in x.ticks() {
            let px = x.map(t);
            let _ = writeln!(
                s,
                r#"<line class="grid" x1="{px:.2}" y1="{TOP}" x2="{px:.2}" y2="{}"/><text x="{px:.2}" y="{}" text-anchor="middle">{}</text>"#,
                HEIGHT - BOTTOM,
                HEIGHT - BOTTOM + 18.0,
                label(t)
            );
        }
        for t in y.ticks() {
            let py = y.map(t);
            let _ = writeln!(
                s,
                r#"<line class="grid" x1="{LEFT}" y1="{py:.2}" x2="{}" y2="{py:.2}"/><text x="{}" y="{:.2}" text-anchor="end">{}</text>"#,
                WIDTH - RIGHT,
                LEFT - 6.0,
                py + 4.0,
                label(t)
            );
        }
        let _ = writeln!(
            s,
            r#"<rect x="{LEFT}" y="{TOP}" width="{}" height="{}" fill="none" stroke="black"/>"#,
            WIDTH - LEFT - RIGHT,
            HEIGHT - TOP - BOTTOM
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            (LEFT + WIDTH - RIGHT) / 2.0,
            HEIGHT - 12.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            s,
            r#"<text x="18" y="{0}" text-anchor="middle" transform="rotate(-90 18 {0})">{1}</text>"#,
            (TOP + HEIGHT - BOTTOM) / 2.0,
            escape(&self.y_label)
        );

        if let Some((gx, text)) = &self.guide_x {
            if x.contains(*gx) {
                let px = x.map(*gx);
                let _ = writeln!(
                    s,
                    r##"<line class="guide" x1="{px:.2}" y1="{TOP}" x2="{px:.2}" y2="{}"/><text x="{:.2}" y="{}" fill="#d62728">{}</text>"##,
                    HEIGHT - BOTTOM,
                    px + 4.0,
                    TOP + 14.0,
                    escape(text)
                );
            }
        }

        if let Some(class) = self.line_class {
            let pts: Vec<String> = self
                .points
                .iter()
                .filter(|p| p.class == class && x.contains(p.x) && y.contains(p.y))
                .map(|p| format!("{:.2},{:.2}", x.map(p.x), y.map(p.y)))
                .collect();
            if pts.len() >= 2 {
                let _ = writeln!(s, r#"<polyline class="curve" points="{}"/>"#, pts.join(" "));
            }
        }

        for p in &self.points {
            let _ = writeln!(
                s,
                r#"<circle class="marker {}" cx="{:.2}" cy="{:.2}" r="3"/>"#,
                p.class,
                place(&x, p.x),
                place(&y, p.y)
            );
        }
        s.push_str("</svg>\n");
        s
    }
}
