//! Static SVG overlays of level curves and truncating polygons.

use std::fmt::Write as _;
use std::path::Path;

use mincurv::end_model::LevelCurve;
use mincurv::lift::{ArcClass, PolygonP};
use mincurv::Complex;

use crate::error::{HarnessError, Result};

pub enum Layer<'a> {
    LevelCurves(&'a [LevelCurve]),
    Polygon(&'a PolygonP),
}

const SIZE: f64 = 800.0;
const MARGIN: f64 = 40.0;

struct Frame {
    lo: Complex,
    scale: f64,
}

impl Frame {
    fn fit(points: impl Iterator<Item = Complex>) -> Frame {
        let (mut lo, mut hi) =
            (Complex::new(f64::INFINITY, f64::INFINITY), Complex::new(f64::NEG_INFINITY, f64::NEG_INFINITY));
        for z in points {
            lo = Complex::new(lo.re.min(z.re), lo.im.min(z.im));
            hi = Complex::new(hi.re.max(z.re), hi.im.max(z.im));
        }
        let span = (hi.re - lo.re).max(hi.im - lo.im).max(1e-12);
        Frame { lo, scale: (SIZE - 2.0 * MARGIN) / span }
    }

    fn xy(&self, z: Complex) -> (f64, f64) {
        (MARGIN + (z.re - self.lo.re) * self.scale, SIZE - MARGIN - (z.im - self.lo.im) * self.scale)
    }

    fn points(&self, zs: impl Iterator<Item = Complex>) -> String {
        zs.map(|z| {
            let (x, y) = self.xy(z);
            format!("{x:.3},{y:.3}")
        })
        .collect::<Vec<_>>()
        .join(" ")
    }
}

fn arc_color(cls: ArcClass) -> &'static str {
    match cls {
        ArcClass::A { .. } => "#1f77b4",
        ArcClass::B { .. } => "#2ca02c",
        ArcClass::BStar => "#d62728",
    }
}

/// Renders the layers in order. Output depends only on the data.
pub fn render_svg(layers: &[Layer]) -> Result<String> {
    if layers.is_empty() {
        return Err(HarnessError::Input { path: "svg".into(), message: "no layers to render".into() });
    }
    let all = layers.iter().flat_map(|l| -> Box<dyn Iterator<Item = Complex>> {
        match l {
            Layer::LevelCurves(c) => Box::new(c.iter().flat_map(|l| l.samples.iter().copied())),
            Layer::Polygon(p) => Box::new(p.points.iter().map(|q| q.z)),
        }
    });
    let frame = Frame::fit(all);
    if !frame.lo.re.is_finite() {
        return Err(HarnessError::Input { path: "svg".into(), message: "layers contain no points".into() });
    }
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for layer in layers {
        match layer {
            Layer::LevelCurves(curves) => {
                let _ = writeln!(s, r##"<g id="level-curves" fill="none" stroke="#999999" stroke-width="1">"##);
                for l in *curves {
                    let _ = writeln!(
                        s,
                        r#"<polyline data-k="{}" points="{}"/>"#,
                        l.k,
                        frame.points(l.samples.iter().copied())
                    );
                }
                s.push_str("</g>\n");
            }
            Layer::Polygon(p) => {
                let _ = writeln!(s, r#"<g id="polygon" fill="none" stroke-width="2">"#);
                let n = p.points.len();
                for (cls, idx) in p.arcs() {
                    // Each run ends at the first point of the next run.
                    let next = (idx[idx.len() - 1] + 1) % n;
                    let zs = idx.iter().chain(std::iter::once(&next)).map(|&i| p.points[i].z);
                    let _ = writeln!(
                        s,
                        r#"<polyline class="arc-{}" data-arc="{cls}" stroke="{}" points="{}"/>"#,
                        cls.family(),
                        arc_color(cls),
                        frame.points(zs)
                    );
                }
                s.push_str("</g>\n<g id=\"vertices\" font-family=\"sans-serif\" font-size=\"11\">\n");
                for v in &p.vertices {
                    let (x, y) = frame.xy(v.z);
                    let (class, fill) =
                        if v.is_reflex() { ("vertex reflex", "#d62728") } else { ("vertex", "#000000") };
                    let deg = v.measured_angle.to_degrees();
                    let _ = writeln!(s, r#"<circle class="{class}" cx="{x:.3}" cy="{y:.3}" r="4" fill="{fill}"/>"#);
                    let _ = writeln!(
                        s,
                        r#"<text x="{:.3}" y="{:.3}" fill="{fill}">{deg:.1}&#176;</text>"#,
                        x + 6.0,
                        y - 6.0
                    );
                }
                s.push_str("</g>\n");
            }
        }
    }
    s.push_str("</svg>\n");
    Ok(s)
}

pub fn emit_svg(layers: &[Layer], path: &Path) -> Result<()> {
    std::fs::write(path, render_svg(layers)?)?;
    Ok(())
}
