//! Text artifacts: CSV point clouds, SVG drawings and JSON certificates.

use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;
use serde::Serialize;

pub const SVG_SIZE: f64 = 1000.0;
const SVG_MARGIN: f64 = 20.0;

/// "re,im,path" rows; `paths` may be empty. Paths contain commas, so they are quoted.
pub fn points_csv(points: &[Complex64], paths: &[String]) -> String {
    let mut s = String::from("re,im,path\n");
    for (i, z) in points.iter().enumerate() {
        let p = paths.get(i).map(String::as_str).unwrap_or("");
        writeln!(s, "{},{},\"{}\"", z.re, z.im, p.replace('"', "\"\"")).expect("write to string");
    }
    s
}

/// Parses the output of `points_csv` back into points.
pub fn parse_points_csv(s: &str) -> Option<Vec<Complex64>> {
    let mut lines = s.lines();
    if lines.next()? != "re,im,path" {
        return None;
    }
    lines
        .map(|l| {
            let mut f = l.splitn(3, ',');
            let re = f.next()?.parse().ok()?;
            let im = f.next()?.parse().ok()?;
            Some(Complex64::new(re, im))
        })
        .collect()
}

#[derive(Clone, Debug)]
pub enum Shape {
    Dots { radius: f64 },
    Polyline { closed: bool, width: f64 },
}

#[derive(Clone, Debug)]
pub struct SvgLayer {
    pub points: Vec<Complex64>,
    pub color: String,
    pub shape: Shape,
}

/// Draws the layers in a 1000x1000 viewBox, all sharing one affine frame,
/// y pointing up, coordinates printed with six decimals.
pub fn svg(layers: &[SvgLayer]) -> String {
    let all = layers.iter().flat_map(|l| l.points.iter());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for z in all {
        x0 = x0.min(z.re);
        x1 = x1.max(z.re);
        y0 = y0.min(z.im);
        y1 = y1.max(z.im);
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    let span = (x1 - x0).max(y1 - y0).max(1e-300);
    let scale = (SVG_SIZE - 2.0 * SVG_MARGIN) / span;
    let cx = 0.5 * (x0 + x1);
    let cy = 0.5 * (y0 + y1);
    let map = |z: &Complex64| (SVG_SIZE / 2.0 + (z.re - cx) * scale, SVG_SIZE / 2.0 - (z.im - cy) * scale);
    let mut s = String::new();
    writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {0} {0}\" width=\"{0}\" height=\"{0}\">",
        SVG_SIZE as u32
    )
    .unwrap();
    writeln!(s, "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>").unwrap();
    for l in layers {
        match l.shape {
            Shape::Dots { radius } => {
                writeln!(s, "<g fill=\"{}\">", l.color).unwrap();
                for z in &l.points {
                    let (x, y) = map(z);
                    writeln!(s, "<circle cx=\"{x:.6}\" cy=\"{y:.6}\" r=\"{radius:.6}\"/>").unwrap();
                }
                writeln!(s, "</g>").unwrap();
            }
            Shape::Polyline { closed, width } => {
                let tag = if closed { "polygon" } else { "polyline" };
                write!(s, "<{tag} fill=\"none\" stroke=\"{}\" stroke-width=\"{width:.6}\" points=\"", l.color).unwrap();
                for (i, z) in l.points.iter().enumerate() {
                    let (x, y) = map(z);
                    if i > 0 {
                        s.push(' ');
                    }
                    write!(s, "{x:.6},{y:.6}").unwrap();
                }
                writeln!(s, "\"/>").unwrap();
            }
        }
    }
    s.push_str("</svg>\n");
    s
}

/// Horizontal bars for intervals of [0, 1), one row each.
pub fn intervals_svg(rows: &[Vec<(f64, f64)>], color: &str) -> String {
    let mut s = String::new();
    writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {0} {0}\" width=\"{0}\" height=\"{0}\">",
        SVG_SIZE as u32
    )
    .unwrap();
    writeln!(s, "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>").unwrap();
    let h = (SVG_SIZE - 2.0 * SVG_MARGIN) / rows.len().max(1) as f64;
    let w = SVG_SIZE - 2.0 * SVG_MARGIN;
    for (i, row) in rows.iter().enumerate() {
        let y = SVG_MARGIN + i as f64 * h;
        for &(a, b) in row {
            writeln!(
                s,
                "<rect x=\"{:.6}\" y=\"{:.6}\" width=\"{:.6}\" height=\"{:.6}\" fill=\"{color}\"/>",
                SVG_MARGIN + a * w,
                y,
                (b - a) * w,
                h * 0.8
            )
            .unwrap();
        }
    }
    s.push_str("</svg>\n");
    s
}

pub fn json<T: Serialize + ?Sized>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

pub fn write(dir: &Path, name: &str, contents: &str) -> std::io::Result<std::path::PathBuf> {
    std::fs::create_dir_all(dir)?;
    let p = dir.join(name);
    std::fs::write(&p, contents)?;
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip() {
        let pts = vec![Complex64::new(0.1, -2.5), Complex64::new(1e-17, 3.0)];
        let s = points_csv(&pts, &["(1,2,)".into(), String::new()]);
        assert!(s.starts_with("re,im,path\n"));
        assert!(s.contains(",\"(1,2,)\"\n"));
        assert_eq!(parse_points_csv(&s).unwrap(), pts);
    }

    #[test]
    fn svg_frame_and_precision() {
        let l = SvgLayer {
            points: vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 1.0)],
            color: "black".into(),
            shape: Shape::Dots { radius: 1.0 },
        };
        let s = svg(&[l]);
        assert!(s.contains("viewBox=\"0 0 1000 1000\""));
        assert!(s.contains("cx=\"20.000000\" cy=\"980.000000\""));
        assert!(s.contains("cx=\"980.000000\" cy=\"20.000000\""));
    }
}
