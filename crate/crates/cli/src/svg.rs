//! Self-contained SVG line plots and space-time heat maps.

use std::fmt::Write as _;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SvgError {
    #[error("nothing to plot: {0}")]
    EmptyData(&'static str),
}

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;
const MAX_HEAT_COLUMNS: usize = 100;
const MAX_HEAT_ROWS: usize = 150;

#[derive(Debug, Clone, Copy)]
pub struct LineStyle<'a> {
    pub title: &'a str,
    pub x_label: &'a str,
    pub y_label: &'a str,
    pub log_y: bool,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn header(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
}

fn axes(out: &mut String, x_label: &str, y_label: &str) {
    let (x0, y0, x1, y1) = (LEFT, HEIGHT - BOTTOM, WIDTH - RIGHT, TOP);
    let _ = writeln!(out, r#"<path d="M{x0} {y1} L{x0} {y0} L{x1} {y0}" fill="none" stroke="black"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        (x0 + x1) / 2.0,
        HEIGHT - 12.0,
        escape(x_label)
    );
    let _ = writeln!(
        out,
        r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0,
        escape(y_label)
    );
}

fn span(lo: f64, hi: f64) -> (f64, f64) {
    if hi > lo {
        (lo, hi)
    } else {
        let pad = if lo == 0.0 { 1.0 } else { lo.abs() * 0.1 };
        (lo - pad, hi + pad)
    }
}

fn tick_label(v: f64) -> String {
    if v != 0.0 && (v.abs() >= 1e4 || v.abs() < 1e-2) {
        format!("{v:.2e}")
    } else {
        format!("{}", (v * 1000.0).round() / 1000.0)
    }
}

/// Line plot of `(x, y)` points; non-finite points are dropped, and so are
/// non-positive values on a log axis.
pub fn line_plot(points: &[(f64, f64)], style: &LineStyle) -> Result<String, SvgError> {
    let mut log_y = style.log_y;
    let finite: Vec<(f64, f64)> = points.iter().copied().filter(|(x, y)| x.is_finite() && y.is_finite()).collect();
    if finite.is_empty() {
        return Err(SvgError::EmptyData("no finite points"));
    }
    let mut title = style.title.to_string();
    let mut data: Vec<(f64, f64)> =
        if log_y { finite.iter().copied().filter(|p| p.1 > 0.0).collect() } else { finite.clone() };
    if data.is_empty() {
        log_y = false;
        data = finite;
        title.push_str(" (linear axis: no positive values)");
    }
    let ty = |y: f64| if log_y { y.log10() } else { y };
    let (xmin, xmax) = span(
        data.iter().map(|p| p.0).fold(f64::INFINITY, f64::min),
        data.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max),
    );
    let (ymin, ymax) = span(
        data.iter().map(|p| ty(p.1)).fold(f64::INFINITY, f64::min),
        data.iter().map(|p| ty(p.1)).fold(f64::NEG_INFINITY, f64::max),
    );
    let px = |x: f64| LEFT + (x - xmin) / (xmax - xmin) * (WIDTH - LEFT - RIGHT);
    let py = |y: f64| HEIGHT - BOTTOM - (ty(y) - ymin) / (ymax - ymin) * (HEIGHT - TOP - BOTTOM);

    let mut out = String::new();
    header(&mut out, &title);
    axes(&mut out, style.x_label, style.y_label);

    for k in 0..=4 {
        let f = k as f64 / 4.0;
        let xv = xmin + f * (xmax - xmin);
        let x = px(xv);
        let _ = writeln!(
            out,
            r#"<text x="{x:.1}" y="{}" text-anchor="middle">{}</text>"#,
            HEIGHT - BOTTOM + 16.0,
            tick_label(xv)
        );
        let yt = ymin + f * (ymax - ymin);
        let y = HEIGHT - BOTTOM - f * (HEIGHT - TOP - BOTTOM);
        let label = if log_y { format!("1e{yt:.1}") } else { tick_label(yt) };
        let _ = writeln!(out, r#"<text x="{}" y="{:.1}" text-anchor="end">{label}</text>"#, LEFT - 6.0, y + 4.0);
        let _ = writeln!(out, r##"<line x1="{LEFT}" y1="{y:.1}" x2="{}" y2="{y:.1}" stroke="#ddd"/>"##, WIDTH - RIGHT);
    }

    if data.len() == 1 {
        let (x, y) = data[0];
        let _ = writeln!(out, r##"<circle cx="{:.2}" cy="{:.2}" r="4" fill="#1f77b4"/>"##, px(x), py(y));
    } else {
        let mut path = String::new();
        for (i, &(x, y)) in data.iter().enumerate() {
            let _ = write!(path, "{}{:.2} {:.2} ", if i == 0 { "M" } else { "L" }, px(x), py(y));
        }
        let _ = writeln!(out, r##"<path d="{}" fill="none" stroke="#1f77b4" stroke-width="1.5"/>"##, path.trim_end());
    }
    out.push_str("</svg>\n");
    Ok(out)
}

/// Diverging blue-white-red colour for `v` in `[-1, 1]`.
fn colour(v: f64) -> String {
    if !v.is_finite() {
        return "#000000".into();
    }
    let v = v.clamp(-1.0, 1.0);
    let (r, g, b) = if v >= 0.0 {
        (255.0, 255.0 * (1.0 - v), 255.0 * (1.0 - v))
    } else {
        (255.0 * (1.0 + v), 255.0 * (1.0 + v), 255.0)
    };
    format!("#{:02x}{:02x}{:02x}", r.round() as u8, g.round() as u8, b.round() as u8)
}

fn pick(len: usize, max: usize) -> Vec<usize> {
    if len <= max {
        (0..len).collect()
    } else {
        (0..max).map(|k| k * (len - 1) / (max - 1)).collect()
    }
}

/// Space-time heat map of `u(t, x)`: one rectangle per (frame, node) cell,
/// with frames and nodes subsampled to keep the file small. Non-finite
/// values are drawn black.
pub fn heat_map(times: &[f64], nodes: &[f64], frames: &[Vec<f64>], title: &str) -> Result<String, SvgError> {
    if times.is_empty() || nodes.is_empty() || frames.is_empty() {
        return Err(SvgError::EmptyData("no snapshots"));
    }
    let rows = pick(frames.len().min(times.len()), MAX_HEAT_ROWS);
    let cols = pick(nodes.len(), MAX_HEAT_COLUMNS);
    let scale = rows
        .iter()
        .flat_map(|&r| cols.iter().map(move |&c| frames[r].get(c).copied().unwrap_or(f64::NAN)))
        .filter(|v| v.is_finite())
        .fold(0.0f64, |m, v| m.max(v.abs()));
    let scale = if scale > 0.0 { scale } else { 1.0 };

    let mut out = String::new();
    header(&mut out, &format!("{title} (|u| max {})", tick_label(scale)));
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let cw = plot_w / cols.len() as f64;
    let rh = plot_h / rows.len() as f64;
    for (ri, &r) in rows.iter().enumerate() {
        let y = TOP + ri as f64 * rh;
        for (ci, &c) in cols.iter().enumerate() {
            let v = frames[r].get(c).copied().unwrap_or(f64::NAN) / scale;
            let _ = writeln!(
                out,
                r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{}"/>"#,
                LEFT + ci as f64 * cw,
                y,
                cw + 0.05,
                rh + 0.05,
                colour(v)
            );
        }
    }
    axes(&mut out, "x", "t (downwards)");
    let t_first = times[rows[0]];
    let t_last = times[*rows.last().unwrap()];
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#,
        LEFT - 6.0,
        TOP + 10.0,
        tick_label(t_first)
    );
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#,
        LEFT - 6.0,
        HEIGHT - BOTTOM,
        tick_label(t_last)
    );
    let _ = writeln!(
        out,
        r#"<text x="{LEFT}" y="{}" text-anchor="middle">{}</text>"#,
        HEIGHT - BOTTOM + 16.0,
        tick_label(nodes[0])
    );
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        WIDTH - RIGHT,
        HEIGHT - BOTTOM + 16.0,
        tick_label(nodes[nodes.len() - 1])
    );
    out.push_str("</svg>\n");
    Ok(out)
}
