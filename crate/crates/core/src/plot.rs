//! Static SVG figures for a recorded run.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::stats::savitzky_golay;
use crate::trainer::EpisodeRecord;

pub const SMOOTHING_WINDOW: usize = 51;
pub const SMOOTHING_ORDER: usize = 2;
pub const HISTOGRAM_BINS: usize = 30;

pub const REWARD_CURVE_FILE: &str = "reward_curve.svg";
pub const REWARD_HISTOGRAM_FILE: &str = "reward_histogram.svg";
pub const STEPS_CURVE_FILE: &str = "steps_curve.svg";
pub const SUCCESS_RATE_FILE: &str = "success_rate.svg";

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 480.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 20.0;
const MARGIN_T: f64 = 50.0;
const MARGIN_B: f64 = 50.0;
const COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

pub struct Series {
    pub label: String,
    pub values: Vec<f64>,
}

struct Frame {
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn new(x: (f64, f64), y: (f64, f64)) -> Self {
        let widen = |(lo, hi): (f64, f64)| {
            if !(lo.is_finite() && hi.is_finite()) {
                (0.0, 1.0)
            } else if hi - lo < 1e-12 {
                (lo - 0.5, hi + 0.5)
            } else {
                (lo, hi)
            }
        };
        Self { x: widen(x), y: widen(y) }
    }

    fn px(&self, x: f64) -> f64 {
        MARGIN_L + (x - self.x.0) / (self.x.1 - self.x.0) * (WIDTH - MARGIN_L - MARGIN_R)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - MARGIN_B - (y - self.y.0) / (self.y.1 - self.y.0) * (HEIGHT - MARGIN_T - MARGIN_B)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn open(title: &str, note: Option<&str>) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="22" text-anchor="middle" font-size="15">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
    if let Some(note) = note {
        let _ = writeln!(
            s,
            r##"<text class="banner" x="{}" y="40" text-anchor="middle" fill="#a0522d">{}</text>"##,
            WIDTH / 2.0,
            escape(note)
        );
    }
    s
}

fn axes(s: &mut String, f: &Frame, x_label: &str, y_label: &str) {
    let (x0, x1) = (MARGIN_L, WIDTH - MARGIN_R);
    let (y0, y1) = (HEIGHT - MARGIN_B, MARGIN_T);
    let _ = writeln!(
        s,
        r#"<path d="M{x0},{y1} L{x0},{y0} L{x1},{y0}" fill="none" stroke="black"/>"#
    );
    for i in 0..=4 {
        let t = f64::from(i) / 4.0;
        let xv = f.x.0 + t * (f.x.1 - f.x.0);
        let yv = f.y.0 + t * (f.y.1 - f.y.0);
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            f.px(xv),
            y0 + 16.0,
            tick(xv)
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            x0 - 6.0,
            f.py(yv) + 4.0,
            tick(yv)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        (x0 + x1) / 2.0,
        HEIGHT - 12.0,
        escape(x_label)
    );
    let _ = writeln!(
        s,
        r#"<text transform="translate(16,{:.2}) rotate(-90)" text-anchor="middle">{}</text>"#,
        (y0 + y1) / 2.0,
        escape(y_label)
    );
}

fn tick(v: f64) -> String {
    if v.abs() >= 1e4 || (v != 0.0 && v.abs() < 1e-2) {
        format!("{v:.1e}")
    } else if v.fract() == 0.0 {
        format!("{v:.0}")
    } else {
        format!("{v:.2}")
    }
}

fn legend(s: &mut String, labels: &[&str]) {
    for (i, label) in labels.iter().enumerate() {
        let y = MARGIN_T + 14.0 + 16.0 * i as f64;
        let x = WIDTH - MARGIN_R - 110.0;
        let _ = writeln!(
            s,
            r#"<rect x="{x}" y="{:.2}" width="12" height="12" fill="{}"/><text x="{}" y="{:.2}">{}</text>"#,
            y - 10.0,
            COLORS[i % COLORS.len()],
            x + 18.0,
            y,
            escape(label)
        );
    }
}

fn bounds<'a>(values: impl Iterator<Item = &'a f64>) -> (f64, f64) {
    values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
}

/// Line chart of each series against its index (plus `x_offset`).
pub fn line_chart(title: &str, x_label: &str, y_label: &str, series: &[Series], x_offset: f64, note: Option<&str>) -> String {
    let n = series.iter().map(|s| s.values.len()).max().unwrap_or(0);
    let f = Frame::new(
        (x_offset, x_offset + n.saturating_sub(1) as f64),
        bounds(series.iter().flat_map(|s| &s.values)),
    );
    let mut s = open(title, note);
    axes(&mut s, &f, x_label, y_label);
    for (i, ser) in series.iter().enumerate() {
        let mut d = String::new();
        for (k, v) in ser.values.iter().enumerate().filter(|(_, v)| v.is_finite()) {
            let _ = write!(
                d,
                "{}{:.2},{:.2}",
                if d.is_empty() { "M" } else { " L" },
                f.px(x_offset + k as f64),
                f.py(*v)
            );
        }
        let _ = writeln!(
            s,
            r#"<path d="{d}" fill="none" stroke="{}" stroke-width="1.2"/>"#,
            COLORS[i % COLORS.len()]
        );
    }
    legend(&mut s, &series.iter().map(|x| x.label.as_str()).collect::<Vec<_>>());
    s.push_str("</svg>\n");
    s
}

/// Overlaid histograms on shared bins.
pub fn histogram(title: &str, x_label: &str, series: &[Series], bins: usize) -> String {
    let bins = bins.max(1);
    let (lo, hi) = bounds(series.iter().flat_map(|s| &s.values));
    let (lo, hi) = if lo.is_finite() && hi > lo { (lo, hi) } else { (lo.min(0.0) - 0.5, lo.max(0.0) + 0.5) };
    let width = (hi - lo) / bins as f64;
    let counts: Vec<Vec<u32>> = series
        .iter()
        .map(|ser| {
            let mut c = vec![0u32; bins];
            for v in ser.values.iter().filter(|v| v.is_finite()) {
                let b = (((v - lo) / width) as usize).min(bins - 1);
                c[b] += 1;
            }
            c
        })
        .collect();
    let top = counts.iter().flatten().copied().max().unwrap_or(0).max(1);
    let f = Frame::new((lo, hi), (0.0, f64::from(top)));
    let mut s = open(title, None);
    axes(&mut s, &f, x_label, "episodes");
    for (i, c) in counts.iter().enumerate() {
        for (b, &k) in c.iter().enumerate().filter(|(_, k)| **k > 0) {
            let x0 = f.px(lo + b as f64 * width);
            let x1 = f.px(lo + (b + 1) as f64 * width);
            let y = f.py(f64::from(k));
            let _ = writeln!(
                s,
                r#"<rect x="{x0:.2}" y="{y:.2}" width="{:.2}" height="{:.2}" fill="{}" fill-opacity="0.5"/>"#,
                x1 - x0,
                f.py(0.0) - y,
                COLORS[i % COLORS.len()]
            );
        }
    }
    legend(&mut s, &series.iter().map(|x| x.label.as_str()).collect::<Vec<_>>());
    s.push_str("</svg>\n");
    s
}

/// `out[t] = mean(xs[..=t])`
pub fn running_mean(xs: &[f64]) -> Vec<f64> {
    let mut sum = 0.0;
    xs.iter()
        .enumerate()
        .map(|(i, x)| {
            sum += x;
            sum / (i + 1) as f64
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlotReport {
    pub files: Vec<PathBuf>,
    /// False when the run was shorter than the smoothing window.
    pub smoothed: bool,
}

fn per_agent(records: &[EpisodeRecord], f: impl Fn(&crate::trainer::AgentEpisode) -> f64) -> Vec<Series> {
    let n = records.first().map_or(0, |r| r.agents.len());
    (0..n)
        .map(|a| Series {
            label: format!("agent {a}"),
            values: records.iter().map(|r| f(&r.agents[a])).collect(),
        })
        .collect()
}

/// Renders the four figures for `records` into `dir`.
pub fn write_plots(dir: &Path, records: &[EpisodeRecord]) -> Result<PlotReport> {
    let x0 = records.first().map_or(0.0, |r| r.episode as f64);
    let rewards = per_agent(records, |a| a.total_reward);
    let mut smoothed = true;
    let mut curves = Vec::with_capacity(rewards.len());
    for s in &rewards {
        let out = savitzky_golay(&s.values, SMOOTHING_WINDOW, SMOOTHING_ORDER)?;
        smoothed &= out.applied;
        curves.push(Series {
            label: s.label.clone(),
            values: out.values,
        });
    }
    let note = (!smoothed).then(|| {
        format!("unsmoothed: {} episodes is shorter than the {SMOOTHING_WINDOW}-point window", records.len())
    });
    let title = if smoothed {
        format!("Episode reward (Savitzky-Golay {SMOOTHING_WINDOW}/{SMOOTHING_ORDER})")
    } else {
        "Episode reward".to_string()
    };
    let steps = per_agent(records, |a| f64::from(a.steps));
    let success: Vec<Series> = per_agent(records, |a| f64::from(u8::from(a.success)))
        .into_iter()
        .map(|s| Series {
            values: running_mean(&s.values),
            ..s
        })
        .collect();

    let figures = [
        (REWARD_CURVE_FILE, line_chart(&title, "episode", "total reward", &curves, x0, note.as_deref())),
        (REWARD_HISTOGRAM_FILE, histogram("Episode reward distribution", "total reward", &rewards, HISTOGRAM_BINS)),
        (STEPS_CURVE_FILE, line_chart("Steps per episode", "episode", "steps", &steps, x0, None)),
        (SUCCESS_RATE_FILE, line_chart("Running success rate", "episode", "success rate", &success, x0, None)),
    ];
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut files = Vec::with_capacity(figures.len());
    for (name, svg) in figures {
        let path = dir.join(name);
        fs::write(&path, svg).map_err(|e| Error::io(&path, e))?;
        files.push(path);
    }
    Ok(PlotReport { files, smoothed })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn running_mean_values() {
        assert_eq!(running_mean(&[1.0, 0.0, 1.0, 1.0]), vec![1.0, 0.5, 2.0 / 3.0, 0.75]);
        assert!(running_mean(&[]).is_empty());
    }

    #[test]
    fn chart_is_wellformed() {
        let s = [Series { label: "a<b".into(), values: vec![1.0, 2.0, f64::NAN, 3.0] }];
        let svg = line_chart("t", "x", "y", &s, 1.0, Some("note"));
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
        assert!(svg.contains("a&lt;b"));
        assert!(svg.contains("class=\"banner\""));
        assert!(!svg.contains("NaN"));
    }

    #[test]
    fn histogram_counts_every_value() {
        let s = [Series { label: "a".into(), values: vec![0.0, 0.0, 1.0, 2.0] }];
        let svg = histogram("h", "x", &s, 2);
        assert_eq!(svg.matches("fill-opacity").count(), 2);
        // constant data still renders
        let s = [Series { label: "a".into(), values: vec![3.0; 5] }];
        assert!(histogram("h", "x", &s, 4).contains("fill-opacity"));
    }
}
