//! Native SVG line plots, no plotting dependency.
//!
//! A plot is a pure derivation of an emitted CSV: the renderer parses the
//! CSV text it is handed and lays out axes, ticks, a dashed zero line, and
//! one polyline per series, all with deterministic formatting. Rendering
//! the same CSV twice yields byte-identical SVG.

use anyhow::{bail, Result};

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 20.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 50.0;

pub struct PlotSpec<'a> {
    pub title: &'a str,
    pub x_label: &'a str,
    pub y_label: &'a str,
}

/// Parse a two-column CSV (`x,y` after provenance comments and a header)
/// into points; rows with an empty second field are masked and break the
/// polyline.
fn parse_xy(csv_text: &str) -> Result<Vec<Option<(f64, f64)>>> {
    let mut points = Vec::new();
    let mut seen_header = false;
    for line in csv_text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if !seen_header {
            seen_header = true; // first non-comment line is the header
            continue;
        }
        let mut parts = line.splitn(3, ',');
        let x = parts.next().unwrap_or("");
        let y = parts.next().unwrap_or("");
        if y.is_empty() {
            points.push(None);
            continue;
        }
        let x: f64 = x
            .parse()
            .map_err(|_| anyhow::anyhow!("bad x value {x:?}"))?;
        let y: f64 = y
            .parse()
            .map_err(|_| anyhow::anyhow!("bad y value {y:?}"))?;
        points.push(Some((x, y)));
    }
    if points.iter().flatten().count() < 2 {
        bail!("need at least two unmasked points to plot");
    }
    Ok(points)
}

/// Round tick positions to "nice" steps of 1, 2 or 5 times a power of ten.
fn ticks(lo: f64, hi: f64, target: usize) -> Vec<f64> {
    let span = (hi - lo).max(f64::MIN_POSITIVE);
    let raw = span / target as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let norm = raw / mag;
    let step = if norm <= 1.0 {
        1.0
    } else if norm <= 2.0 {
        2.0
    } else if norm <= 5.0 {
        5.0
    } else {
        10.0
    } * mag;
    let first = (lo / step).ceil() * step;
    let mut out = Vec::new();
    let mut v = first;
    while v <= hi + 1e-9 * span {
        // Snap near-zero ticks to exactly zero for stable labels.
        out.push(if v.abs() < 1e-9 * span { 0.0 } else { v });
        v += step;
    }
    out
}

fn fmt_tick(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let a = v.abs();
    if (1e-3..1e5).contains(&a) {
        let s = format!("{v:.4}");
        let s = s.trim_end_matches('0').trim_end_matches('.');
        s.to_string()
    } else {
        format!("{v:.2e}")
    }
}

/// Render one or more `x,y` CSV series into an SVG line plot. The first
/// series is drawn in blue, the rest in light gray behind it.
pub fn plot_csv_series(csv_texts: &[&str], spec: &PlotSpec) -> Result<String> {
    if csv_texts.is_empty() {
        bail!("no series to plot");
    }
    let series: Vec<Vec<Option<(f64, f64)>>> = csv_texts
        .iter()
        .map(|t| parse_xy(t))
        .collect::<Result<_>>()?;
    let mut x_lo = f64::INFINITY;
    let mut x_hi = f64::NEG_INFINITY;
    let mut y_lo = f64::INFINITY;
    let mut y_hi = f64::NEG_INFINITY;
    for s in &series {
        for &(x, y) in s.iter().flatten() {
            x_lo = x_lo.min(x);
            x_hi = x_hi.max(x);
            y_lo = y_lo.min(y);
            y_hi = y_hi.max(y);
        }
    }
    // Always keep the zero line in view; pad the value range a little.
    y_lo = y_lo.min(0.0);
    y_hi = y_hi.max(0.0);
    let pad = 0.05 * (y_hi - y_lo).max(1e-12);
    y_lo -= pad;
    y_hi += pad;
    if x_hi <= x_lo {
        x_hi = x_lo + 1.0;
    }

    let plot_w = WIDTH - MARGIN_L - MARGIN_R;
    let plot_h = HEIGHT - MARGIN_T - MARGIN_B;
    let sx = move |x: f64| MARGIN_L + (x - x_lo) / (x_hi - x_lo) * plot_w;
    let sy = move |y: f64| MARGIN_T + (y_hi - y) / (y_hi - y_lo) * plot_h;

    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    ));
    // Carry the source CSV's provenance comments along, so the plot stays a
    // pure derivation of the data file while remaining traceable.
    for line in csv_texts[0].lines() {
        if let Some(rest) = line.strip_prefix('#') {
            out.push_str(&format!("<!--{} -->\n", rest.trim_end()));
        }
    }
    out.push_str(&format!(
        "<rect x=\"0\" y=\"0\" width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n"
    ));
    out.push_str(&format!(
        "<text x=\"{}\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\" \
         text-anchor=\"middle\">{}</text>\n",
        WIDTH / 2.0,
        spec.title
    ));

    // Axes.
    out.push_str(&format!(
        "<line x1=\"{MARGIN_L}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
        HEIGHT - MARGIN_B,
        WIDTH - MARGIN_R,
        HEIGHT - MARGIN_B
    ));
    out.push_str(&format!(
        "<line x1=\"{MARGIN_L}\" y1=\"{MARGIN_T}\" x2=\"{MARGIN_L}\" y2=\"{}\" stroke=\"black\"/>\n",
        HEIGHT - MARGIN_B
    ));

    for t in ticks(x_lo, x_hi, 6) {
        let x = sx(t);
        out.push_str(&format!(
            "<line x1=\"{x:.2}\" y1=\"{}\" x2=\"{x:.2}\" y2=\"{}\" stroke=\"black\"/>\n",
            HEIGHT - MARGIN_B,
            HEIGHT - MARGIN_B + 5.0
        ));
        out.push_str(&format!(
            "<text x=\"{x:.2}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\" \
             text-anchor=\"middle\">{}</text>\n",
            HEIGHT - MARGIN_B + 18.0,
            fmt_tick(t)
        ));
    }
    for t in ticks(y_lo, y_hi, 6) {
        let y = sy(t);
        out.push_str(&format!(
            "<line x1=\"{}\" y1=\"{y:.2}\" x2=\"{MARGIN_L}\" y2=\"{y:.2}\" stroke=\"black\"/>\n",
            MARGIN_L - 5.0
        ));
        out.push_str(&format!(
            "<text x=\"{}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"11\" \
             text-anchor=\"end\">{}</text>\n",
            MARGIN_L - 8.0,
            y + 4.0,
            fmt_tick(t)
        ));
    }

    // Dashed zero line.
    let y0 = sy(0.0);
    out.push_str(&format!(
        "<line x1=\"{MARGIN_L}\" y1=\"{y0:.2}\" x2=\"{}\" y2=\"{y0:.2}\" stroke=\"gray\" \
         stroke-dasharray=\"6,4\"/>\n",
        WIDTH - MARGIN_R
    ));

    // Series: background ones first, the primary last so it sits on top.
    for (i, s) in series.iter().enumerate().rev() {
        let color = if i == 0 { "#1f6fb2" } else { "#c0c0c0" };
        let width = if i == 0 { 1.5 } else { 1.0 };
        let mut segment = String::new();
        let flush = |seg: &mut String, out: &mut String| {
            if seg.matches(' ').count() >= 1 {
                out.push_str(&format!(
                    "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"{width}\" \
                     points=\"{}\"/>\n",
                    seg.trim_end()
                ));
            }
            seg.clear();
        };
        for p in s {
            match p {
                Some((x, y)) => {
                    segment.push_str(&format!("{:.2},{:.2} ", sx(*x), sy(*y)));
                }
                None => flush(&mut segment, &mut out),
            }
        }
        flush(&mut segment, &mut out);
    }

    // Axis labels.
    out.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"13\" \
         text-anchor=\"middle\">{}</text>\n",
        MARGIN_L + plot_w / 2.0,
        HEIGHT - 12.0,
        spec.x_label
    ));
    out.push_str(&format!(
        "<text x=\"16\" y=\"{}\" font-family=\"sans-serif\" font-size=\"13\" \
         text-anchor=\"middle\" transform=\"rotate(-90 16 {})\">{}</text>\n",
        MARGIN_T + plot_h / 2.0,
        MARGIN_T + plot_h / 2.0,
        spec.y_label
    ));
    out.push_str("</svg>\n");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_csv() -> String {
        let mut s = String::from("# seed = 1\nt,r\n");
        for i in 1..=100 {
            let t = i as f64 * 0.1;
            s.push_str(&format!("{t},{}\n", (-1.0 + 1.0 / t)));
        }
        s
    }

    #[test]
    fn rendering_is_deterministic() {
        let csv = sample_csv();
        let spec = PlotSpec {
            title: "ratio",
            x_label: "t",
            y_label: "log|X|/t",
        };
        let a = plot_csv_series(&[&csv], &spec).unwrap();
        let b = plot_csv_series(&[&csv], &spec).unwrap();
        assert_eq!(a, b);
        assert!(a.starts_with("<svg"));
        assert!(a.contains("polyline"));
        assert!(a.contains("stroke-dasharray"));
    }

    #[test]
    fn masked_rows_break_the_polyline() {
        let csv = "t,r\n0.0,\n1.0,0.5\n2.0,0.25\n3.0,\n4.0,0.1\n5.0,0.05\n";
        let spec = PlotSpec {
            title: "m",
            x_label: "t",
            y_label: "r",
        };
        let svg = plot_csv_series(&[csv], &spec).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 2);
    }

    #[test]
    fn empty_series_is_an_error() {
        let spec = PlotSpec {
            title: "m",
            x_label: "t",
            y_label: "r",
        };
        assert!(plot_csv_series(&["t,r\n1.0,\n"], &spec).is_err());
    }

    #[test]
    fn nice_ticks_cover_the_range() {
        let tk = ticks(-1.05, 0.02, 6);
        assert!(tk.contains(&0.0));
        assert!(tk.len() >= 4 && tk.len() <= 13);
    }
}
