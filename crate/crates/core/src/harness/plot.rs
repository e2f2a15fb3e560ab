//! Minimal static SVG plots: forecast lines with interval bands, error
//! density curves, and observed-vs-predicted scatters.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

const WIDTH: f64 = 860.0;
const HEIGHT: f64 = 480.0;
const MARGIN_L: f64 = 64.0;
const MARGIN_R: f64 = 24.0;
const MARGIN_T: f64 = 42.0;
const MARGIN_B: f64 = 48.0;

struct Axes {
    x_min: f64,
    x_max: f64,
    y_min: f64,
    y_max: f64,
}

impl Axes {
    fn x(&self, v: f64) -> f64 {
        MARGIN_L + (v - self.x_min) / (self.x_max - self.x_min) * (WIDTH - MARGIN_L - MARGIN_R)
    }
    fn y(&self, v: f64) -> f64 {
        HEIGHT - MARGIN_B
            - (v - self.y_min) / (self.y_max - self.y_min) * (HEIGHT - MARGIN_T - MARGIN_B)
    }
}

fn svg_header(title: &str) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {WIDTH} {HEIGHT}\" \
         font-family=\"sans-serif\" font-size=\"12\">\n\
         <rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n\
         <text x=\"{}\" y=\"24\" font-size=\"15\" text-anchor=\"middle\">{}</text>\n",
        WIDTH / 2.0,
        escape(title)
    )
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn draw_axes(out: &mut String, axes: &Axes, x_label: &str, y_label: &str) {
    let x0 = MARGIN_L;
    let x1 = WIDTH - MARGIN_R;
    let y0 = HEIGHT - MARGIN_B;
    let y1 = MARGIN_T;
    let _ = writeln!(
        out,
        "<line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x1}\" y2=\"{y0}\" stroke=\"black\"/>\n\
         <line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x0}\" y2=\"{y1}\" stroke=\"black\"/>"
    );
    for i in 0..=5 {
        let frac = i as f64 / 5.0;
        let xv = axes.x_min + frac * (axes.x_max - axes.x_min);
        let yv = axes.y_min + frac * (axes.y_max - axes.y_min);
        let xp = axes.x(xv);
        let yp = axes.y(yv);
        let _ = writeln!(
            out,
            "<line x1=\"{xp}\" y1=\"{y0}\" x2=\"{xp}\" y2=\"{}\" stroke=\"black\"/>\
             <text x=\"{xp}\" y=\"{}\" text-anchor=\"middle\">{:.1}</text>",
            y0 + 5.0,
            y0 + 20.0,
            xv
        );
        let _ = writeln!(
            out,
            "<line x1=\"{}\" y1=\"{yp}\" x2=\"{x0}\" y2=\"{yp}\" stroke=\"black\"/>\
             <text x=\"{}\" y=\"{}\" text-anchor=\"end\">{:.1}</text>",
            x0 - 5.0,
            x0 - 8.0,
            yp + 4.0,
            yv
        );
    }
    let _ = writeln!(
        out,
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>",
        (x0 + x1) / 2.0,
        HEIGHT - 10.0,
        escape(x_label)
    );
    let _ = writeln!(
        out,
        "<text x=\"16\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {})\">{}</text>",
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0,
        escape(y_label)
    );
}

fn polyline(out: &mut String, axes: &Axes, xs: &[f64], ys: &[f64], color: &str, width: f64) {
    let mut points = String::new();
    for (x, y) in xs.iter().zip(ys) {
        if y.is_finite() {
            let _ = write!(points, "{:.2},{:.2} ", axes.x(*x), axes.y(*y));
        }
    }
    let _ = writeln!(
        out,
        "<polyline points=\"{points}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"{width}\"/>"
    );
}

fn legend(out: &mut String, entries: &[(&str, &str)]) {
    let mut x = MARGIN_L + 8.0;
    for (name, color) in entries {
        let _ = writeln!(
            out,
            "<rect x=\"{x}\" y=\"{}\" width=\"12\" height=\"12\" fill=\"{color}\"/>\
             <text x=\"{}\" y=\"{}\">{}</text>",
            MARGIN_T + 2.0,
            x + 16.0,
            MARGIN_T + 12.0,
            escape(name)
        );
        x += 22.0 + 7.5 * name.len() as f64;
    }
}

fn finite_bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in values.filter(|v| v.is_finite()) {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() || !hi.is_finite() {
        (0.0, 1.0)
    } else if lo == hi {
        (lo - 1.0, hi + 1.0)
    } else {
        (lo, hi)
    }
}

/// Observed and forecast lines over fold index, with an optional shaded
/// 95% band behind the forecast.
pub(crate) fn forecast_chart(
    path: &Path,
    title: &str,
    observed: &[f64],
    forecast: &[f64],
    band: Option<(&[f64], &[f64])>,
) -> Result<()> {
    let n = observed.len();
    let xs: Vec<f64> = (0..n).map(|i| i as f64).collect();
    let mut all: Vec<f64> = observed.iter().chain(forecast).copied().collect();
    if let Some((lo, hi)) = band {
        all.extend(lo.iter().chain(hi).copied());
    }
    let (y_min, y_max) = finite_bounds(all.into_iter());
    let pad = 0.05 * (y_max - y_min);
    let axes = Axes {
        x_min: 0.0,
        x_max: (n.max(2) - 1) as f64,
        y_min: y_min - pad,
        y_max: y_max + pad,
    };

    let mut out = svg_header(title);
    if let Some((lo, hi)) = band {
        let mut points = String::new();
        for (i, v) in lo.iter().enumerate() {
            let _ = write!(points, "{:.2},{:.2} ", axes.x(xs[i]), axes.y(*v));
        }
        for (i, v) in hi.iter().enumerate().rev() {
            let _ = write!(points, "{:.2},{:.2} ", axes.x(xs[i]), axes.y(*v));
        }
        let _ = writeln!(
            out,
            "<polygon points=\"{points}\" fill=\"#bbbbbb\" fill-opacity=\"0.45\" stroke=\"none\"/>"
        );
    }
    draw_axes(&mut out, &axes, "fold", "turbidity (NTU)");
    polyline(&mut out, &axes, &xs, observed, "#000000", 1.4);
    polyline(&mut out, &axes, &xs, forecast, "#1f6fd0", 1.4);
    legend(&mut out, &[("observed", "#000000"), ("forecast", "#1f6fd0")]);
    out.push_str("</svg>\n");
    write_svg(path, out)
}

fn write_svg(path: &Path, content: String) -> Result<()> {
    std::fs::write(path, content).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })
}

/// Kernel density curves of forecast errors, one per model.
pub(crate) fn density_chart(
    path: &Path,
    title: &str,
    series: &[(&str, &[f64], &str)],
) -> Result<()> {
    let all: Vec<f64> = series.iter().flat_map(|(_, v, _)| v.iter().copied()).collect();
    let (lo, hi) = finite_bounds(all.iter().copied());
    let span = hi - lo;
    let grid_lo = lo - 0.15 * span;
    let grid_hi = hi + 0.15 * span;
    let grid: Vec<f64> = (0..240)
        .map(|i| grid_lo + (grid_hi - grid_lo) * i as f64 / 239.0)
        .collect();

    let mut curves = Vec::new();
    let mut y_max: f64 = 0.0;
    for (name, errors, color) in series {
        let sd = crate::stats::sample_variance(errors).sqrt();
        let bw = (0.9 * sd * (errors.len() as f64).powf(-0.2)).max(1e-6);
        let dens: Vec<f64> = grid
            .iter()
            .map(|&g| {
                errors
                    .iter()
                    .map(|&e| {
                        let z = (g - e) / bw;
                        (-0.5 * z * z).exp()
                    })
                    .sum::<f64>()
                    / (errors.len() as f64 * bw * (2.0 * std::f64::consts::PI).sqrt())
            })
            .collect();
        y_max = y_max.max(dens.iter().cloned().fold(0.0, f64::max));
        curves.push((*name, dens, *color));
    }

    let axes = Axes {
        x_min: grid_lo,
        x_max: grid_hi,
        y_min: 0.0,
        y_max: y_max * 1.08,
    };
    let mut out = svg_header(title);
    draw_axes(&mut out, &axes, "forecast error (NTU)", "density");
    for (_, dens, color) in &curves {
        polyline(&mut out, &axes, &grid, dens, color, 1.6);
    }
    legend(
        &mut out,
        &curves.iter().map(|(n, _, c)| (*n, *c)).collect::<Vec<_>>(),
    );
    out.push_str("</svg>\n");
    write_svg(path, out)
}

/// Observed-vs-predicted scatter with the identity line.
pub(crate) fn scatter_chart(
    path: &Path,
    title: &str,
    series: &[(&str, &[f64], &[f64], &str)],
) -> Result<()> {
    let all: Vec<f64> = series
        .iter()
        .flat_map(|(_, a, p, _)| a.iter().chain(p.iter()).copied())
        .collect();
    let (lo, hi) = finite_bounds(all.iter().copied());
    let pad = 0.05 * (hi - lo);
    let axes = Axes {
        x_min: lo - pad,
        x_max: hi + pad,
        y_min: lo - pad,
        y_max: hi + pad,
    };
    let mut out = svg_header(title);
    draw_axes(&mut out, &axes, "observed (NTU)", "predicted (NTU)");
    let _ = writeln!(
        out,
        "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"#888888\" stroke-dasharray=\"5,4\"/>",
        axes.x(axes.x_min),
        axes.y(axes.x_min),
        axes.x(axes.x_max),
        axes.y(axes.x_max)
    );
    for (_, actual, predicted, color) in series {
        for (a, p) in actual.iter().zip(predicted.iter()) {
            let _ = writeln!(
                out,
                "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"2.4\" fill=\"{color}\" fill-opacity=\"0.6\"/>",
                axes.x(*a),
                axes.y(*p)
            );
        }
    }
    legend(
        &mut out,
        &series.iter().map(|(n, _, _, c)| (*n, *c)).collect::<Vec<_>>(),
    );
    out.push_str("</svg>\n");
    write_svg(path, out)
}
