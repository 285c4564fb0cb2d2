//! Minimal native SVG charts: axes, 1-2-5 ticks, polylines, legend.
//! One file per panel, 800x600 viewBox, no external plotting dependency.

use std::path::Path;

use crate::CliError;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 600.0;
const MARGIN_L: f64 = 80.0;
const MARGIN_R: f64 = 25.0;
const MARGIN_T: f64 = 45.0;
const MARGIN_B: f64 = 60.0;

const COLORS: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf",
];

pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
    pub dashed: bool,
}

pub struct Chart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_x: bool,
    pub log_y: bool,
    pub series: Vec<Series>,
}

impl Chart {
    pub fn new(title: &str, x_label: &str, y_label: &str) -> Self {
        Self {
            title: title.into(),
            x_label: x_label.into(),
            y_label: y_label.into(),
            log_x: false,
            log_y: false,
            series: Vec::new(),
        }
    }

    pub fn log_log(mut self) -> Self {
        self.log_x = true;
        self.log_y = true;
        self
    }

    pub fn add(&mut self, name: &str, points: Vec<(f64, f64)>, dashed: bool) {
        self.series.push(Series {
            name: name.into(),
            points,
            dashed,
        });
    }

    fn tx(&self, x: f64) -> f64 {
        if self.log_x {
            x.log10()
        } else {
            x
        }
    }

    fn ty(&self, y: f64) -> f64 {
        if self.log_y {
            y.log10()
        } else {
            y
        }
    }

    pub fn render(&self) -> String {
        let mut x_min = f64::INFINITY;
        let mut x_max = f64::NEG_INFINITY;
        let mut y_min = f64::INFINITY;
        let mut y_max = f64::NEG_INFINITY;
        for s in &self.series {
            for &(x, y) in &s.points {
                if self.log_x && x <= 0.0 || self.log_y && y <= 0.0 {
                    continue;
                }
                let (tx, ty) = (self.tx(x), self.ty(y));
                if tx.is_finite() && ty.is_finite() {
                    x_min = x_min.min(tx);
                    x_max = x_max.max(tx);
                    y_min = y_min.min(ty);
                    y_max = y_max.max(ty);
                }
            }
        }
        if !x_min.is_finite() || x_min == x_max {
            x_min -= 0.5;
            x_max = x_min + 1.0;
        }
        if !y_min.is_finite() || y_min == y_max {
            y_min -= 0.5;
            y_max = y_min + 1.0;
        }
        let pad_y = 0.05 * (y_max - y_min);
        let (y_lo, y_hi) = (y_min - pad_y, y_max + pad_y);
        let (x_lo, x_hi) = (x_min, x_max);

        let px = |x: f64| MARGIN_L + (x - x_lo) / (x_hi - x_lo) * (WIDTH - MARGIN_L - MARGIN_R);
        let py = |y: f64| {
            HEIGHT - MARGIN_B - (y - y_lo) / (y_hi - y_lo) * (HEIGHT - MARGIN_T - MARGIN_B)
        };

        let mut out = String::new();
        out.push_str(&format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {WIDTH} {HEIGHT}\" \
             font-family=\"sans-serif\" font-size=\"14\">\n"
        ));
        out.push_str(&format!(
            "<rect x=\"0\" y=\"0\" width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n"
        ));
        out.push_str(&format!(
            "<text x=\"{}\" y=\"25\" text-anchor=\"middle\" font-size=\"17\">{}</text>\n",
            WIDTH / 2.0,
            escape(&self.title)
        ));

        // Axes box.
        out.push_str(&format!(
            "<rect x=\"{MARGIN_L}\" y=\"{MARGIN_T}\" width=\"{}\" height=\"{}\" fill=\"none\" \
             stroke=\"black\"/>\n",
            WIDTH - MARGIN_L - MARGIN_R,
            HEIGHT - MARGIN_T - MARGIN_B
        ));

        // Ticks.
        for t in ticks(x_lo, x_hi) {
            let x = px(t);
            out.push_str(&format!(
                "<line x1=\"{x:.2}\" y1=\"{}\" x2=\"{x:.2}\" y2=\"{}\" stroke=\"black\"/>\n",
                HEIGHT - MARGIN_B,
                HEIGHT - MARGIN_B + 6.0
            ));
            out.push_str(&format!(
                "<text x=\"{x:.2}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n",
                HEIGHT - MARGIN_B + 22.0,
                tick_label(t, self.log_x)
            ));
        }
        for t in ticks(y_lo, y_hi) {
            let y = py(t);
            out.push_str(&format!(
                "<line x1=\"{}\" y1=\"{y:.2}\" x2=\"{MARGIN_L}\" y2=\"{y:.2}\" stroke=\"black\"/>\n",
                MARGIN_L - 6.0
            ));
            out.push_str(&format!(
                "<text x=\"{}\" y=\"{:.2}\" text-anchor=\"end\">{}</text>\n",
                MARGIN_L - 10.0,
                y + 5.0,
                tick_label(t, self.log_y)
            ));
        }

        // Zero line when visible on a linear y axis.
        if !self.log_y && y_lo < 0.0 && y_hi > 0.0 {
            let y0 = py(0.0);
            out.push_str(&format!(
                "<line x1=\"{MARGIN_L}\" y1=\"{y0:.2}\" x2=\"{}\" y2=\"{y0:.2}\" \
                 stroke=\"#999\" stroke-dasharray=\"2,4\"/>\n",
                WIDTH - MARGIN_R
            ));
        }

        // Axis labels.
        out.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n",
            MARGIN_L + (WIDTH - MARGIN_L - MARGIN_R) / 2.0,
            HEIGHT - 12.0,
            escape(&self.x_label)
        ));
        out.push_str(&format!(
            "<text x=\"20\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 20 {})\">{}</text>\n",
            MARGIN_T + (HEIGHT - MARGIN_T - MARGIN_B) / 2.0,
            MARGIN_T + (HEIGHT - MARGIN_T - MARGIN_B) / 2.0,
            escape(&self.y_label)
        ));

        // Series.
        for (idx, s) in self.series.iter().enumerate() {
            let color = COLORS[idx % COLORS.len()];
            let dash = if s.dashed {
                " stroke-dasharray=\"6,4\""
            } else {
                ""
            };
            let pts: Vec<String> = s
                .points
                .iter()
                .filter(|&&(x, y)| {
                    !(self.log_x && x <= 0.0 || self.log_y && y <= 0.0)
                        && self.tx(x).is_finite()
                        && self.ty(y).is_finite()
                })
                .map(|&(x, y)| format!("{:.2},{:.2}", px(self.tx(x)), py(self.ty(y))))
                .collect();
            if pts.is_empty() {
                continue;
            }
            out.push_str(&format!(
                "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"{dash} \
                 points=\"{}\"/>\n",
                pts.join(" ")
            ));
            // Legend entry.
            let ly = MARGIN_T + 18.0 + 20.0 * idx as f64;
            let lx = WIDTH - MARGIN_R - 190.0;
            out.push_str(&format!(
                "<line x1=\"{lx}\" y1=\"{ly}\" x2=\"{}\" y2=\"{ly}\" stroke=\"{color}\" \
                 stroke-width=\"1.5\"{dash}/>\n",
                lx + 28.0
            ));
            out.push_str(&format!(
                "<text x=\"{}\" y=\"{}\">{}</text>\n",
                lx + 34.0,
                ly + 5.0,
                escape(&s.name)
            ));
        }
        out.push_str("</svg>\n");
        out
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).map_err(CliError::Io)?;
        }
        std::fs::write(path, self.render()).map_err(CliError::Io)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// Round 1-2-5 ticks covering [lo, hi].
fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let span = hi - lo;
    if !(span > 0.0) || !span.is_finite() {
        return vec![lo];
    }
    let raw = span / 6.0;
    let mag = 10f64.powf(raw.log10().floor());
    let norm = raw / mag;
    let step = if norm <= 1.0 {
        mag
    } else if norm <= 2.0 {
        2.0 * mag
    } else if norm <= 5.0 {
        5.0 * mag
    } else {
        10.0 * mag
    };
    let first = (lo / step).ceil() * step;
    let mut out = Vec::new();
    let mut t = first;
    while t <= hi + step * 1e-9 {
        out.push(if t.abs() < step * 1e-9 { 0.0 } else { t });
        t += step;
    }
    out
}

fn tick_label(t: f64, log: bool) -> String {
    if log {
        // Ticks live in log10 space.
        format!("1e{t:.0}")
    } else if t == 0.0 {
        "0".into()
    } else if t.abs() >= 1e4 || t.abs() < 1e-3 {
        format!("{t:.1e}")
    } else {
        let s = format!("{t:.4}");
        let s = s.trim_end_matches('0').trim_end_matches('.');
        s.to_string()
    }
}
