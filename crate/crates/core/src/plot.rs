//! Minimal self-contained SVG panels: lines with optional bands, and
//! scatter plots for normal quantile diagrams.

use std::fmt::Write;

const W: f64 = 480.0;
const H: f64 = 320.0;
const PAD: f64 = 48.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

#[derive(Clone, Debug, Default)]
pub struct Series {
    pub label: String,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// Half-width of a shaded band around `y`.
    pub band: Option<Vec<f64>>,
    pub dashed: bool,
    pub points: bool,
}

pub struct Panel {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
}

fn bounds(series: &[Series]) -> (f64, f64, f64, f64) {
    let mut b = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for s in series {
        for (i, (&x, &y)) in s.x.iter().zip(&s.y).enumerate() {
            if !(x.is_finite() && y.is_finite()) {
                continue;
            }
            let w = s.band.as_ref().map_or(0.0, |b| b[i]);
            b = (b.0.min(x), b.1.max(x), b.2.min(y - w), b.3.max(y + w));
        }
    }
    if b.0 >= b.1 {
        b.1 = b.0 + 1.0;
    }
    if b.2 >= b.3 {
        b.3 = b.2 + 1.0;
    }
    let m = 0.05 * (b.3 - b.2);
    (b.0, b.1, b.2 - m, b.3 + m)
}

impl Panel {
    pub fn to_svg(&self) -> String {
        let (x0, x1, y0, y1) = bounds(&self.series);
        let px = |x: f64| PAD + (x - x0) / (x1 - x0) * (W - 2.0 * PAD);
        let py = |y: f64| H - PAD - (y - y0) / (y1 - y0) * (H - 2.0 * PAD);
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="11">"#
        );
        let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
        let _ = writeln!(
            s,
            r#"<rect x="{PAD}" y="{PAD}" width="{}" height="{}" fill="none" stroke="black"/>"#,
            W - 2.0 * PAD,
            H - 2.0 * PAD
        );
        let _ = writeln!(s, r#"<text x="{}" y="20" text-anchor="middle">{}</text>"#, W / 2.0, esc(&self.title));
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, W / 2.0, H - 10.0, esc(&self.x_label));
        let _ = writeln!(
            s,
            r#"<text x="14" y="{}" text-anchor="middle" transform="rotate(-90 14 {})">{}</text>"#,
            H / 2.0,
            H / 2.0,
            esc(&self.y_label)
        );
        for k in 0..=4 {
            let fx = x0 + (x1 - x0) * k as f64 / 4.0;
            let fy = y0 + (y1 - y0) * k as f64 / 4.0;
            let _ = writeln!(s, r#"<text x="{:.1}" y="{}" text-anchor="middle">{}</text>"#, px(fx), H - PAD + 14.0, tick(fx));
            let _ = writeln!(s, r#"<text x="{}" y="{:.1}" text-anchor="end">{}</text>"#, PAD - 4.0, py(fy) + 4.0, tick(fy));
        }
        for (i, ser) in self.series.iter().enumerate() {
            let c = COLORS[i % COLORS.len()];
            let pts: Vec<(f64, f64, usize)> = ser
                .x
                .iter()
                .zip(&ser.y)
                .enumerate()
                .filter(|(_, (x, y))| x.is_finite() && y.is_finite())
                .map(|(k, (&x, &y))| (x, y, k))
                .collect();
            if let Some(band) = &ser.band {
                let upper = pts.iter().map(|&(x, y, k)| format!("{:.2},{:.2}", px(x), py(y + band[k])));
                let lower = pts.iter().rev().map(|&(x, y, k)| format!("{:.2},{:.2}", px(x), py(y - band[k])));
                let poly: Vec<String> = upper.chain(lower).collect();
                let _ = writeln!(s, r#"<polygon points="{}" fill="{c}" fill-opacity="0.2" stroke="none"/>"#, poly.join(" "));
            }
            if ser.points {
                for &(x, y, _) in &pts {
                    let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="1.8" fill="{c}"/>"#, px(x), py(y));
                }
            } else {
                let line: Vec<String> = pts.iter().map(|&(x, y, _)| format!("{:.2},{:.2}", px(x), py(y))).collect();
                let dash = if ser.dashed { r#" stroke-dasharray="5,3""# } else { "" };
                let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="{c}" stroke-width="1.5"{dash}/>"#, line.join(" "));
            }
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{}" fill="{c}">{}</text>"#,
                PAD + 6.0,
                PAD + 14.0 + 13.0 * i as f64,
                esc(&ser.label)
            );
        }
        s.push_str("</svg>\n");
        s
    }
}

fn tick(v: f64) -> String {
    if v.abs() >= 1e4 || (v != 0.0 && v.abs() < 1e-2) {
        format!("{v:.1e}")
    } else {
        format!("{v:.2}")
    }
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn svg_is_well_formed_enough() {
        let p = Panel {
            title: "a < b".into(),
            x_label: "j".into(),
            y_label: "h".into(),
            series: vec![
                Series {
                    label: "mean".into(),
                    x: vec![1.0, 2.0, 3.0],
                    y: vec![0.2, 0.3, f64::NAN],
                    band: Some(vec![0.01, 0.02, 0.03]),
                    ..Default::default()
                },
                Series {
                    label: "qq".into(),
                    x: vec![0.0, 1.0],
                    y: vec![0.0, 1.0],
                    points: true,
                    ..Default::default()
                },
            ],
        };
        let svg = p.to_svg();
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert!(svg.contains("a &lt; b"));
        assert_eq!(svg.matches("<circle").count(), 2);
        assert!(!svg.contains("NaN"));
    }
}
