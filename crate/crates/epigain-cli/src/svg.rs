//! Minimal self-contained SVG emission: line plots, heatmaps and the
//! inquiry-trace chart. Text only, fixed-precision coordinates, no
//! dependencies, byte-stable for identical inputs.

use std::fmt::Write;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 50.0;

const SERIES_COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

fn fmt(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.2}")
    } else {
        "0.00".to_string()
    }
}

/// Tick label formatting: compact but unambiguous.
fn fmt_tick(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    let magnitude = x.abs();
    if (0.01..10000.0).contains(&magnitude) {
        let s = format!("{x:.3}");
        let s = s.trim_end_matches('0').trim_end_matches('.');
        s.to_string()
    } else {
        format!("{x:.2e}")
    }
}

#[derive(Debug, Clone, Copy)]
struct Range {
    lo: f64,
    hi: f64,
}

impl Range {
    fn of(values: impl Iterator<Item = f64>) -> Self {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for v in values.filter(|v| v.is_finite()) {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if !lo.is_finite() || !hi.is_finite() {
            return Self { lo: 0.0, hi: 1.0 };
        }
        if lo == hi {
            // Degenerate span; widen symmetrically.
            let pad = lo.abs().max(1.0) * 0.05;
            return Self {
                lo: lo - pad,
                hi: hi + pad,
            };
        }
        Self { lo, hi }
    }

    fn padded(self, frac: f64) -> Self {
        let pad = (self.hi - self.lo) * frac;
        Self {
            lo: self.lo - pad,
            hi: self.hi + pad,
        }
    }

    fn ticks(&self, count: usize) -> Vec<f64> {
        (0..=count)
            .map(|i| self.lo + (self.hi - self.lo) * i as f64 / count as f64)
            .collect()
    }
}

/// One data series of a line plot.
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

/// A single-panel line plot.
pub struct LinePlot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
}

impl LinePlot {
    fn render_into(&self, out: &mut String, x_off: f64) {
        let xr = Range::of(
            self.series
                .iter()
                .flat_map(|s| s.points.iter().map(|p| p.0)),
        );
        let yr = Range::of(
            self.series
                .iter()
                .flat_map(|s| s.points.iter().map(|p| p.1)),
        )
        .padded(0.05);

        let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
        let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
        let sx = |x: f64| x_off + MARGIN_LEFT + (x - xr.lo) / (xr.hi - xr.lo) * plot_w;
        let sy = |y: f64| MARGIN_TOP + plot_h - (y - yr.lo) / (yr.hi - yr.lo) * plot_h;

        // Frame and grid.
        let _ = write!(
            out,
            "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#333333\" stroke-width=\"1\"/>",
            fmt(x_off + MARGIN_LEFT),
            fmt(MARGIN_TOP),
            fmt(plot_w),
            fmt(plot_h)
        );
        for tick in xr.ticks(5) {
            let x = sx(tick);
            let _ = write!(
                out,
                "<line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x0}\" y2=\"{y1}\" stroke=\"#cccccc\" stroke-width=\"0.5\"/>\
                 <text x=\"{x0}\" y=\"{ty}\" font-size=\"11\" text-anchor=\"middle\" fill=\"#333333\">{label}</text>",
                x0 = fmt(x),
                y0 = fmt(MARGIN_TOP),
                y1 = fmt(MARGIN_TOP + plot_h),
                ty = fmt(MARGIN_TOP + plot_h + 16.0),
                label = fmt_tick(tick)
            );
        }
        for tick in yr.ticks(5) {
            let y = sy(tick);
            let _ = write!(
                out,
                "<line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x1}\" y2=\"{y0}\" stroke=\"#cccccc\" stroke-width=\"0.5\"/>\
                 <text x=\"{tx}\" y=\"{ty}\" font-size=\"11\" text-anchor=\"end\" fill=\"#333333\">{label}</text>",
                x0 = fmt(x_off + MARGIN_LEFT),
                x1 = fmt(x_off + MARGIN_LEFT + plot_w),
                y0 = fmt(y),
                tx = fmt(x_off + MARGIN_LEFT - 6.0),
                ty = fmt(y + 4.0),
                label = fmt_tick(tick)
            );
        }

        // Series.
        for (i, series) in self.series.iter().enumerate() {
            let color = SERIES_COLORS[i % SERIES_COLORS.len()];
            let mut path = String::new();
            for (j, &(x, y)) in series.points.iter().enumerate() {
                if j > 0 {
                    path.push(' ');
                }
                let _ = write!(path, "{},{}", fmt(sx(x)), fmt(sy(y)));
            }
            let _ = write!(
                out,
                "<polyline points=\"{path}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>"
            );
            // Legend entry.
            let ly = MARGIN_TOP + 14.0 + 16.0 * i as f64;
            let _ = write!(
                out,
                "<line x1=\"{x0}\" y1=\"{y}\" x2=\"{x1}\" y2=\"{y}\" stroke=\"{color}\" stroke-width=\"2\"/>\
                 <text x=\"{tx}\" y=\"{ty}\" font-size=\"12\" fill=\"#333333\">{label}</text>",
                x0 = fmt(x_off + MARGIN_LEFT + plot_w - 110.0),
                x1 = fmt(x_off + MARGIN_LEFT + plot_w - 90.0),
                y = fmt(ly),
                tx = fmt(x_off + MARGIN_LEFT + plot_w - 84.0),
                ty = fmt(ly + 4.0),
                label = xml_escape(&series.label)
            );
        }

        // Titles and axis labels.
        let _ = write!(
            out,
            "<text x=\"{tx}\" y=\"22\" font-size=\"14\" text-anchor=\"middle\" fill=\"#111111\">{title}</text>\
             <text x=\"{tx}\" y=\"{by}\" font-size=\"12\" text-anchor=\"middle\" fill=\"#333333\">{xl}</text>\
             <text x=\"{lx}\" y=\"{ly}\" font-size=\"12\" text-anchor=\"middle\" fill=\"#333333\" transform=\"rotate(-90 {lx} {ly})\">{yl}</text>",
            tx = fmt(x_off + MARGIN_LEFT + plot_w / 2.0),
            by = fmt(HEIGHT - 12.0),
            lx = fmt(x_off + 18.0),
            ly = fmt(MARGIN_TOP + plot_h / 2.0),
            title = xml_escape(&self.title),
            xl = xml_escape(&self.x_label),
            yl = xml_escape(&self.y_label)
        );
    }
}

/// Two line plots side by side in one document.
pub fn render_pair(left: &LinePlot, right: &LinePlot) -> String {
    let mut out = svg_open(2.0 * WIDTH, HEIGHT);
    left.render_into(&mut out, 0.0);
    right.render_into(&mut out, WIDTH);
    out.push_str("</svg>\n");
    out
}

fn svg_open(width: f64, height: f64) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {} {}\" \
         font-family=\"sans-serif\"><rect width=\"{}\" height=\"{}\" fill=\"#ffffff\"/>",
        fmt(width),
        fmt(height),
        fmt(width),
        fmt(height)
    )
}

fn xml_escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// Color ramp, monotone in every channel: dark blue at 0 to yellow at 1.
pub fn ramp_color(t: f64) -> String {
    let t = t.clamp(0.0, 1.0);
    let lerp = |a: f64, b: f64| (a + (b - a) * t).round() as u8;
    format!(
        "#{:02x}{:02x}{:02x}",
        lerp(13.0, 240.0),
        lerp(8.0, 249.0),
        lerp(135.0, 33.0)
    )
}

/// Heatmap of one field over the (s_l, s_p) grid; s_l on the x axis,
/// s_p on the y axis increasing upward, one rect per cell.
pub struct Heatmap<'a> {
    pub title: String,
    pub x_values: &'a [f64],
    pub y_values: &'a [f64],
    /// Row-major by x then y: cells[ix * y_values.len() + iy].
    pub cells: &'a [f64],
}

impl Heatmap<'_> {
    pub fn render(&self) -> String {
        let nx = self.x_values.len();
        let ny = self.y_values.len();
        let range = Range::of(self.cells.iter().copied());
        let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
        let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
        let cell_w = plot_w / nx as f64;
        let cell_h = plot_h / ny as f64;

        let mut out = svg_open(WIDTH, HEIGHT);
        for ix in 0..nx {
            for iy in 0..ny {
                let value = self.cells[ix * ny + iy];
                let t = if range.hi > range.lo {
                    (value - range.lo) / (range.hi - range.lo)
                } else {
                    0.5
                };
                let x = MARGIN_LEFT + cell_w * ix as f64;
                let y = MARGIN_TOP + plot_h - cell_h * (iy + 1) as f64;
                let _ = write!(
                    out,
                    "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\"/>",
                    fmt(x),
                    fmt(y),
                    fmt(cell_w),
                    fmt(cell_h),
                    ramp_color(t)
                );
            }
        }
        // Axis labels: first/last values of each axis plus ranges.
        let _ = write!(
            out,
            "<text x=\"{tx}\" y=\"22\" font-size=\"14\" text-anchor=\"middle\" fill=\"#111111\">{title} \
             [{lo} .. {hi}]</text>\
             <text x=\"{x0}\" y=\"{by}\" font-size=\"11\" text-anchor=\"middle\" fill=\"#333333\">{xfirst}</text>\
             <text x=\"{x1}\" y=\"{by}\" font-size=\"11\" text-anchor=\"middle\" fill=\"#333333\">{xlast}</text>\
             <text x=\"{bx}\" y=\"{by}\" font-size=\"12\" text-anchor=\"middle\" fill=\"#333333\">s_l</text>\
             <text x=\"{yx}\" y=\"{y0}\" font-size=\"11\" text-anchor=\"end\" fill=\"#333333\">{yfirst}</text>\
             <text x=\"{yx}\" y=\"{y1}\" font-size=\"11\" text-anchor=\"end\" fill=\"#333333\">{ylast}</text>\
             <text x=\"{lx}\" y=\"{ly}\" font-size=\"12\" text-anchor=\"middle\" fill=\"#333333\" transform=\"rotate(-90 {lx} {ly})\">s_p</text>",
            tx = fmt(MARGIN_LEFT + plot_w / 2.0),
            title = xml_escape(&self.title),
            lo = fmt_tick(range.lo),
            hi = fmt_tick(range.hi),
            x0 = fmt(MARGIN_LEFT + cell_w / 2.0),
            x1 = fmt(MARGIN_LEFT + plot_w - cell_w / 2.0),
            bx = fmt(MARGIN_LEFT + plot_w / 2.0),
            by = fmt(HEIGHT - 12.0),
            xfirst = fmt_tick(self.x_values[0]),
            xlast = fmt_tick(self.x_values[nx - 1]),
            yx = fmt(MARGIN_LEFT - 6.0),
            y0 = fmt(MARGIN_TOP + plot_h - cell_h / 2.0 + 4.0),
            y1 = fmt(MARGIN_TOP + cell_h / 2.0 + 4.0),
            yfirst = fmt_tick(self.y_values[0]),
            ylast = fmt_tick(self.y_values[ny - 1]),
            lx = fmt(18.0),
            ly = fmt(MARGIN_TOP + plot_h / 2.0)
        );
        out.push_str("</svg>\n");
        out
    }
}

/// Horizontal shaded band of the trace chart.
pub struct Band {
    pub label: String,
    pub y_lo: f64,
    pub y_hi: f64,
    pub color: &'static str,
}

/// Surprise-vs-step chart with emotion-band shading.
pub fn render_trace(steps: &[(usize, f64)], bands: &[Band], title: &str) -> String {
    let xr = Range::of(steps.iter().map(|&(i, _)| i as f64));
    let yr = Range::of(
        steps
            .iter()
            .map(|&(_, s)| s)
            .chain(bands.iter().flat_map(|b| [b.y_lo, b.y_hi])),
    )
    .padded(0.05);

    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let sx = |x: f64| MARGIN_LEFT + (x - xr.lo) / (xr.hi - xr.lo) * plot_w;
    let sy = |y: f64| MARGIN_TOP + plot_h - (y - yr.lo) / (yr.hi - yr.lo) * plot_h;

    let mut out = svg_open(WIDTH, HEIGHT);
    for band in bands {
        let y_top = sy(band.y_hi.min(yr.hi));
        let y_bot = sy(band.y_lo.max(yr.lo));
        if y_bot <= y_top {
            continue;
        }
        let _ = write!(
            out,
            "<rect x=\"{x}\" y=\"{y}\" width=\"{w}\" height=\"{h}\" fill=\"{c}\" fill-opacity=\"0.25\"/>\
             <text x=\"{tx}\" y=\"{ty}\" font-size=\"11\" fill=\"#333333\">{label}</text>",
            x = fmt(MARGIN_LEFT),
            y = fmt(y_top),
            w = fmt(plot_w),
            h = fmt(y_bot - y_top),
            c = band.color,
            tx = fmt(MARGIN_LEFT + 6.0),
            ty = fmt((y_top + y_bot) / 2.0 + 4.0),
            label = xml_escape(&band.label)
        );
    }

    let mut path = String::new();
    for (j, &(i, s)) in steps.iter().enumerate() {
        if j > 0 {
            path.push(' ');
        }
        let _ = write!(path, "{},{}", fmt(sx(i as f64)), fmt(sy(s)));
    }
    let _ = write!(
        out,
        "<polyline points=\"{path}\" fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\"/>\
         <rect x=\"{fx}\" y=\"{fy}\" width=\"{fw}\" height=\"{fh}\" fill=\"none\" stroke=\"#333333\" stroke-width=\"1\"/>\
         <text x=\"{tx}\" y=\"22\" font-size=\"14\" text-anchor=\"middle\" fill=\"#111111\">{title}</text>\
         <text x=\"{tx}\" y=\"{by}\" font-size=\"12\" text-anchor=\"middle\" fill=\"#333333\">step</text>\
         <text x=\"{lx}\" y=\"{ly}\" font-size=\"12\" text-anchor=\"middle\" fill=\"#333333\" transform=\"rotate(-90 {lx} {ly})\">surprise</text>",
        fx = fmt(MARGIN_LEFT),
        fy = fmt(MARGIN_TOP),
        fw = fmt(plot_w),
        fh = fmt(plot_h),
        tx = fmt(MARGIN_LEFT + plot_w / 2.0),
        by = fmt(HEIGHT - 12.0),
        lx = fmt(18.0),
        ly = fmt(MARGIN_TOP + plot_h / 2.0),
        title = xml_escape(title)
    );
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ramp_is_monotone_per_channel() {
        let parse = |c: &str| {
            (
                u8::from_str_radix(&c[1..3], 16).unwrap(),
                u8::from_str_radix(&c[3..5], 16).unwrap(),
                u8::from_str_radix(&c[5..7], 16).unwrap(),
            )
        };
        let mut last = parse(&ramp_color(0.0));
        for i in 1..=20 {
            let next = parse(&ramp_color(i as f64 / 20.0));
            assert!(next.0 >= last.0 && next.1 >= last.1 && next.2 <= last.2);
            last = next;
        }
    }

    fn sample_plot(points: Vec<(f64, f64)>) -> LinePlot {
        LinePlot {
            title: "t".into(),
            x_label: "x".into(),
            y_label: "y".into(),
            series: vec![Series {
                label: "a".into(),
                points,
            }],
        }
    }

    #[test]
    fn line_plot_is_byte_stable() {
        let left = sample_plot(vec![(0.0, 1.0), (1.0, 2.0), (2.0, 0.5)]);
        let right = sample_plot(vec![(0.0, 0.0), (1.0, 4.0)]);
        let a = render_pair(&left, &right);
        assert_eq!(a, render_pair(&left, &right));
        assert!(a.starts_with("<svg"));
        assert!(a.ends_with("</svg>\n"));
    }

    #[test]
    fn degenerate_ranges_do_not_divide_by_zero() {
        let flat = sample_plot(vec![(0.0, 3.0), (1.0, 3.0)]);
        let rendered = render_pair(&flat, &flat);
        assert!(!rendered.contains("NaN"));
    }
}
