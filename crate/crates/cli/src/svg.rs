//! Minimal static SVG line plots: fixed 800x600 viewbox, polyline series,
//! axis ticks and labels, no scripts, styles, or external assets. One root
//! element, plain XML, deterministic output.

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 600.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 770.0;
const TOP: f64 = 50.0;
const BOTTOM: f64 = 550.0;
const COLORS: [&str; 4] = ["#1f6fb4", "#c23b22", "#3c8a3c", "#8a5ca8"];

pub struct Series<'a> {
    pub label: &'a str,
    pub x: &'a [f64],
    pub y: &'a [f64],
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn finite_range<'a>(series: &'a [Series], pick: impl Fn(&'a Series<'a>) -> &'a [f64]) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for s in series {
        for &v in pick(s) {
            if v.is_finite() {
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
    }
    if !lo.is_finite() || !hi.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo <= 0.0 {
        // degenerate span: open a symmetric window around the value
        let pad = lo.abs().max(1.0) * 0.05;
        return (lo - pad, hi + pad);
    }
    let pad = 0.05 * (hi - lo);
    (lo - pad, hi + pad)
}

/// Renders a titled line plot of the series onto the shared axes.
pub fn line_plot(title: &str, xlabel: &str, ylabel: &str, series: &[Series]) -> String {
    let (x0, x1) = finite_range(series, |s| s.x);
    let (y0, y1) = finite_range(series, |s| s.y);
    let sx = |v: f64| LEFT + (v - x0) / (x1 - x0) * (RIGHT - LEFT);
    let sy = |v: f64| BOTTOM - (v - y0) / (y1 - y0) * (BOTTOM - TOP);

    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    ));
    out.push_str("<rect x=\"0\" y=\"0\" width=\"800\" height=\"600\" fill=\"white\"/>\n");
    out.push_str(&format!(
        "<text x=\"{:.1}\" y=\"28\" font-family=\"monospace\" font-size=\"16\" text-anchor=\"middle\">{}</text>\n",
        0.5 * (LEFT + RIGHT),
        escape(title)
    ));

    // frame
    out.push_str(&format!(
        "<rect x=\"{LEFT}\" y=\"{TOP}\" width=\"{:.1}\" height=\"{:.1}\" fill=\"none\" stroke=\"black\"/>\n",
        RIGHT - LEFT,
        BOTTOM - TOP
    ));

    // ticks and numeric labels
    for k in 0..=4 {
        let f = k as f64 / 4.0;
        let xv = x0 + f * (x1 - x0);
        let yv = y0 + f * (y1 - y0);
        let xp = sx(xv);
        let yp = sy(yv);
        out.push_str(&format!(
            "<line x1=\"{xp:.2}\" y1=\"{BOTTOM}\" x2=\"{xp:.2}\" y2=\"{:.1}\" stroke=\"black\"/>\n",
            BOTTOM + 6.0
        ));
        out.push_str(&format!(
            "<text x=\"{xp:.2}\" y=\"{:.1}\" font-family=\"monospace\" font-size=\"12\" text-anchor=\"middle\">{}</text>\n",
            BOTTOM + 22.0,
            tick_label(xv)
        ));
        out.push_str(&format!(
            "<line x1=\"{:.1}\" y1=\"{yp:.2}\" x2=\"{LEFT}\" y2=\"{yp:.2}\" stroke=\"black\"/>\n",
            LEFT - 6.0
        ));
        out.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.2}\" font-family=\"monospace\" font-size=\"12\" text-anchor=\"end\">{}</text>\n",
            LEFT - 10.0,
            yp + 4.0,
            tick_label(yv)
        ));
    }
    out.push_str(&format!(
        "<text x=\"{:.1}\" y=\"585\" font-family=\"monospace\" font-size=\"14\" text-anchor=\"middle\">{}</text>\n",
        0.5 * (LEFT + RIGHT),
        escape(xlabel)
    ));
    out.push_str(&format!(
        "<text x=\"22\" y=\"{:.1}\" font-family=\"monospace\" font-size=\"14\" text-anchor=\"middle\" transform=\"rotate(-90 22 {:.1})\">{}</text>\n",
        0.5 * (TOP + BOTTOM),
        0.5 * (TOP + BOTTOM),
        escape(ylabel)
    ));

    for (idx, s) in series.iter().enumerate() {
        let color = COLORS[idx % COLORS.len()];
        let mut points = String::new();
        for (&xv, &yv) in s.x.iter().zip(s.y) {
            if xv.is_finite() && yv.is_finite() {
                points.push_str(&format!("{:.2},{:.2} ", sx(xv), sy(yv)));
            }
        }
        out.push_str(&format!(
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>\n",
            points.trim_end()
        ));
        if series.len() > 1 {
            let ly = TOP + 18.0 + 18.0 * idx as f64;
            out.push_str(&format!(
                "<line x1=\"{:.1}\" y1=\"{ly:.1}\" x2=\"{:.1}\" y2=\"{ly:.1}\" stroke=\"{color}\" stroke-width=\"1.5\"/>\n",
                LEFT + 12.0,
                LEFT + 40.0
            ));
            out.push_str(&format!(
                "<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"monospace\" font-size=\"12\">{}</text>\n",
                LEFT + 46.0,
                ly + 4.0,
                escape(s.label)
            ));
        }
    }
    out.push_str("</svg>\n");
    out
}

fn tick_label(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    let a = v.abs();
    if (1e-3..1e4).contains(&a) {
        let s = format!("{v:.4}");
        let s = s.trim_end_matches('0').trim_end_matches('.');
        s.to_string()
    } else {
        format!("{v:.2e}")
    }
}

pub fn write_plot(dir: &std::path::Path, name: &str, svg: &str) -> Result<(), crate::Failure> {
    let path = dir.join(name);
    std::fs::write(&path, svg)
        .map_err(|e| crate::Failure::Config(format!("cannot write {}: {e}", path.display())))
}
