//! SVG figures rendered purely from the CSV text the drivers write, so a
//! figure can always be regenerated offline with `qsmooth plot`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{CliError, Result};
use crate::numfmt::format_g;

pub const HEATMAP_HEADER: [&str; 5] = ["method", "budget", "r_a", "r_d", "fraction"];
pub const CURVE_HEADER: [&str; 4] = ["method", "budget", "radius", "fraction"];
pub const CONVERGENCE_HEADER: [&str; 4] = ["method", "budget", "oracle_calls", "mean_abs_error"];

const PALETTE: [&str; 8] = [
    "#1b1b1b", "#d62728", "#1f77b4", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf",
];

/// Which figure a CSV feeds, decided by its header row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    Heatmap,
    CertifiedRatio,
    Convergence,
}

fn records(csv_text: &str, header: &[&str]) -> Result<Vec<csv::StringRecord>> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(csv_text.as_bytes());
    let found: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if found != header {
        return Err(CliError::config(format!("unexpected CSV header `{}`", found.join(","))));
    }
    Ok(rdr.records().collect::<std::result::Result<_, _>>()?)
}

fn field<T: std::str::FromStr>(rec: &csv::StringRecord, i: usize) -> Result<T> {
    let raw = rec.get(i).unwrap_or("");
    raw.parse()
        .map_err(|_| CliError::config(format!("bad CSV field `{raw}`")))
}

pub fn detect(csv_text: &str) -> Result<PlotKind> {
    let header = csv_text.lines().find(|l| !l.starts_with('#')).unwrap_or("");
    match header {
        h if h == HEATMAP_HEADER.join(",") => Ok(PlotKind::Heatmap),
        h if h == CURVE_HEADER.join(",") => Ok(PlotKind::CertifiedRatio),
        h if h == CONVERGENCE_HEADER.join(",") => Ok(PlotKind::Convergence),
        h => Err(CliError::config(format!("no figure for CSV header `{h}`"))),
    }
}

pub fn render(csv_text: &str) -> Result<String> {
    match detect(csv_text)? {
        PlotKind::Heatmap => render_heatmap(csv_text),
        PlotKind::CertifiedRatio => render_certified_ratio(csv_text),
        PlotKind::Convergence => render_convergence(csv_text),
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn comments(csv_text: &str) -> Vec<&str> {
    csv_text.lines().filter_map(|l| l.strip_prefix("# ")).collect()
}

fn open(width: f64, height: f64, csv_text: &str) -> String {
    let mut s = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" viewBox=\"0 0 {width} {height}\" font-family=\"sans-serif\" font-size=\"12\">\n"
    );
    let desc = comments(csv_text).join("; ");
    if !desc.is_empty() {
        let _ = writeln!(s, "<desc>{}</desc>", escape(&desc));
    }
    let _ = writeln!(s, "<rect width=\"{width}\" height=\"{height}\" fill=\"white\"/>");
    s
}

fn series_label(method: &str, budget: &str) -> String {
    match method {
        "exact" => "exact".into(),
        "qae" => format!("qae t={budget}"),
        "mc" => format!("mc N={budget}"),
        other => format!("{other} {budget}"),
    }
}

type Cells = BTreeMap<(usize, usize), f64>;

/// One panel per method: cell shade is the certified fraction.
pub fn render_heatmap(csv_text: &str) -> Result<String> {
    let mut panels: BTreeMap<(u8, u64), (String, Cells)> = BTreeMap::new();
    for rec in records(csv_text, &HEATMAP_HEADER)? {
        let method = rec.get(0).unwrap_or("").to_string();
        let budget: u64 = field(&rec, 1)?;
        let order = u8::from(method != "exact");
        let label = series_label(&method, &budget.to_string());
        panels
            .entry((order, budget))
            .or_insert_with(|| (label, BTreeMap::new()))
            .1
            .insert((field(&rec, 2)?, field(&rec, 3)?), field(&rec, 4)?);
    }
    let cell = 18.0;
    let (mut ra, mut rd) = (0usize, 0usize);
    for (_, cells) in panels.values() {
        for &(a, d) in cells.keys() {
            ra = ra.max(a);
            rd = rd.max(d);
        }
    }
    let panel_w = (rd + 1) as f64 * cell + 60.0;
    let panel_h = (ra + 1) as f64 * cell + 70.0;
    let width = panel_w * panels.len().max(1) as f64 + 20.0;
    let mut s = open(width, panel_h + 30.0, csv_text);
    for (k, (label, cells)) in panels.values().enumerate() {
        let x0 = 20.0 + k as f64 * panel_w + 30.0;
        let y0 = 50.0;
        let _ = writeln!(
            s,
            "<text x=\"{x0}\" y=\"30\" font-weight=\"bold\">{}</text>",
            escape(label)
        );
        let _ = writeln!(s, "<text x=\"{x0}\" y=\"44\" font-size=\"10\">r_d →, r_a ↓</text>");
        for (&(a, d), &f) in cells {
            // white (0) to dark blue (1)
            let shade = |lo: f64, hi: f64| (lo + (hi - lo) * f).round() as u8;
            let _ = writeln!(
                s,
                "<rect x=\"{}\" y=\"{}\" width=\"{cell}\" height=\"{cell}\" fill=\"rgb({},{},{})\" stroke=\"#ccc\"><title>r_a={a} r_d={d}: {}</title></rect>",
                x0 + d as f64 * cell,
                y0 + a as f64 * cell,
                shade(255.0, 8.0),
                shade(255.0, 48.0),
                shade(255.0, 107.0),
                format_g(f, 4)
            );
        }
        for a in 0..=ra {
            let _ = writeln!(
                s,
                "<text x=\"{}\" y=\"{}\" font-size=\"9\" text-anchor=\"end\">{a}</text>",
                x0 - 4.0,
                y0 + (a as f64 + 0.7) * cell
            );
        }
        for d in 0..=rd {
            let _ = writeln!(
                s,
                "<text x=\"{}\" y=\"{}\" font-size=\"9\" text-anchor=\"middle\">{d}</text>",
                x0 + (d as f64 + 0.5) * cell,
                y0 + (ra as f64 + 1.0) * cell + 12.0
            );
        }
    }
    s.push_str("</svg>\n");
    Ok(s)
}

struct Axes {
    x0: f64,
    y0: f64,
    w: f64,
    h: f64,
    xr: (f64, f64),
    yr: (f64, f64),
}

impl Axes {
    fn px(&self, x: f64) -> f64 {
        self.x0 + (x - self.xr.0) / (self.xr.1 - self.xr.0).max(1e-12) * self.w
    }

    fn py(&self, y: f64) -> f64 {
        self.y0 + self.h - (y - self.yr.0) / (self.yr.1 - self.yr.0).max(1e-12) * self.h
    }

    fn frame(&self, s: &mut String, xlabel: &str, ylabel: &str, xticks: &[(f64, String)], yticks: &[(f64, String)]) {
        let _ = writeln!(
            s,
            "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>",
            self.x0, self.y0, self.w, self.h
        );
        for (v, label) in xticks {
            let x = self.px(*v);
            let _ = writeln!(
                s,
                "<line x1=\"{x:.2}\" y1=\"{}\" x2=\"{x:.2}\" y2=\"{}\" stroke=\"black\"/>",
                self.y0 + self.h,
                self.y0 + self.h + 4.0
            );
            let _ = writeln!(
                s,
                "<text x=\"{x:.2}\" y=\"{}\" text-anchor=\"middle\" font-size=\"10\">{label}</text>",
                self.y0 + self.h + 16.0
            );
        }
        for (v, label) in yticks {
            let y = self.py(*v);
            let _ = writeln!(
                s,
                "<line x1=\"{}\" y1=\"{y:.2}\" x2=\"{}\" y2=\"{y:.2}\" stroke=\"black\"/>",
                self.x0 - 4.0,
                self.x0
            );
            let _ = writeln!(
                s,
                "<text x=\"{}\" y=\"{:.2}\" text-anchor=\"end\" font-size=\"10\">{label}</text>",
                self.x0 - 6.0,
                y + 3.0
            );
        }
        let _ = writeln!(
            s,
            "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>",
            self.x0 + self.w / 2.0,
            self.y0 + self.h + 34.0,
            escape(xlabel)
        );
        let _ = writeln!(
            s,
            "<text transform=\"translate({} {}) rotate(-90)\" text-anchor=\"middle\">{}</text>",
            self.x0 - 42.0,
            self.y0 + self.h / 2.0,
            escape(ylabel)
        );
    }

    fn series(&self, s: &mut String, k: usize, label: &str, pts: &[(f64, f64)]) {
        let color = PALETTE[k % PALETTE.len()];
        let path: Vec<String> = pts
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", self.px(x), self.py(y)))
            .collect();
        let _ = writeln!(
            s,
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>",
            path.join(" ")
        );
        for &(x, y) in pts {
            let _ = writeln!(
                s,
                "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"2.5\" fill=\"{color}\"/>",
                self.px(x),
                self.py(y)
            );
        }
        let ly = self.y0 + 14.0 + 16.0 * k as f64;
        let lx = self.x0 + self.w + 12.0;
        let _ = writeln!(
            s,
            "<line x1=\"{lx}\" y1=\"{ly}\" x2=\"{}\" y2=\"{ly}\" stroke=\"{color}\" stroke-width=\"2\"/>",
            lx + 18.0
        );
        let _ = writeln!(
            s,
            "<text x=\"{}\" y=\"{}\">{}</text>",
            lx + 24.0,
            ly + 4.0,
            escape(label)
        );
    }
}

type Series = BTreeMap<(u8, u64), (String, Vec<(f64, f64)>)>;

fn push_point(series: &mut Series, method: &str, budget: u64, x: f64, y: f64) {
    let order = match method {
        "exact" => 0,
        "mc" => 1,
        _ => 2,
    };
    series
        .entry((order, budget))
        .or_insert_with(|| (series_label(method, &budget.to_string()), Vec::new()))
        .1
        .push((x, y));
}

/// Certified fraction against radius.
pub fn render_certified_ratio(csv_text: &str) -> Result<String> {
    let mut series = Series::new();
    for rec in records(csv_text, &CURVE_HEADER)? {
        push_point(
            &mut series,
            rec.get(0).unwrap_or(""),
            field(&rec, 1)?,
            field::<f64>(&rec, 2)?,
            field(&rec, 3)?,
        );
    }
    let max_r = series
        .values()
        .flat_map(|(_, p)| p.iter().map(|q| q.0))
        .fold(1.0, f64::max);
    let axes = Axes {
        x0: 70.0,
        y0: 40.0,
        w: 480.0,
        h: 300.0,
        xr: (0.0, max_r),
        yr: (0.0, 1.0),
    };
    let mut s = open(700.0, 400.0, csv_text);
    let _ = writeln!(s, "<text x=\"70\" y=\"24\" font-weight=\"bold\">Certified ratio</text>");
    let step = (max_r / 10.0).ceil().max(1.0);
    let xticks: Vec<(f64, String)> = (0..)
        .map(|i| i as f64 * step)
        .take_while(|&v| v <= max_r)
        .map(|v| (v, format_g(v, 4)))
        .collect();
    let yticks: Vec<(f64, String)> = (0..=5).map(|i| (i as f64 / 5.0, format_g(i as f64 / 5.0, 2))).collect();
    let radius_label = comments(csv_text)
        .into_iter()
        .find(|c| c.starts_with("radius"))
        .unwrap_or("radius");
    axes.frame(&mut s, radius_label, "certified fraction", &xticks, &yticks);
    for (k, (label, pts)) in series.values().enumerate() {
        axes.series(&mut s, k, label, pts);
    }
    s.push_str("</svg>\n");
    Ok(s)
}

/// Log-log mean error against oracle calls, with the fitted slopes from the
/// CSV footer in the legend.
pub fn render_convergence(csv_text: &str) -> Result<String> {
    let mut per_method: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
    for rec in records(csv_text, &CONVERGENCE_HEADER)? {
        let calls: f64 = field(&rec, 2)?;
        let err: f64 = field(&rec, 3)?;
        if calls > 0.0 && err > 0.0 {
            per_method
                .entry(rec.get(0).unwrap_or("").to_string())
                .or_default()
                .push((calls.log10(), err.log10()));
        }
    }
    let footer: BTreeMap<&str, &str> = comments(csv_text)
        .into_iter()
        .filter_map(|c| c.split_once('='))
        .collect();
    let all: Vec<(f64, f64)> = per_method.values().flatten().copied().collect();
    let bounds = |f: fn(&(f64, f64)) -> f64| {
        let lo = all.iter().map(f).fold(f64::INFINITY, f64::min);
        let hi = all.iter().map(f).fold(f64::NEG_INFINITY, f64::max);
        if lo.is_finite() {
            (lo.floor(), hi.ceil().max(lo.floor() + 1.0))
        } else {
            (0.0, 1.0)
        }
    };
    let axes = Axes {
        x0: 70.0,
        y0: 40.0,
        w: 480.0,
        h: 300.0,
        xr: bounds(|p| p.0),
        yr: bounds(|p| p.1),
    };
    let mut s = open(760.0, 400.0, csv_text);
    let _ = writeln!(
        s,
        "<text x=\"70\" y=\"24\" font-weight=\"bold\">Mean |estimate − g(x)| vs oracle calls</text>"
    );
    let ticks = |r: (f64, f64)| -> Vec<(f64, String)> {
        (r.0 as i32..=r.1 as i32)
            .map(|e| (e as f64, format!("1e{e}")))
            .collect()
    };
    axes.frame(
        &mut s,
        "oracle calls",
        "mean absolute error",
        &ticks(axes.xr),
        &ticks(axes.yr),
    );
    for (k, (method, pts)) in per_method.iter().enumerate() {
        let label = match footer.get(format!("slope_{method}").as_str()) {
            Some(slope) => format!("{method} (slope {})", format_g(slope.parse().unwrap_or(f64::NAN), 3)),
            None => method.clone(),
        };
        axes.series(&mut s, k, &label, pts);
    }
    if let Some(e) = footer.get("exponent") {
        let _ = writeln!(
            s,
            "<text x=\"70\" y=\"390\">implied sample exponent: {}</text>",
            format_g(e.parse().unwrap_or(f64::NAN), 3)
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}
