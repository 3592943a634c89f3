//! SVG frames of snapshots. Coordinates are printed with fixed precision so identical
//! input gives identical bytes.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::contour::extract_contours;
use crate::error::Result;
use crate::geometry::{Polygon, Vec2};
use crate::grid::GridSet;
use crate::symmetry::HalfSpace;

#[derive(Clone, Debug)]
pub struct FrameStyle {
    pub width_px: u32,
    pub fill: String,
    /// Outlines drawn on every frame, typically the fitted Wulff shapes.
    pub outlines: Vec<Polygon>,
    pub halfspaces: Vec<HalfSpace>,
    /// Drawn dashed on the final frame only.
    pub final_overlay: Vec<Polygon>,
}

impl Default for FrameStyle {
    fn default() -> Self {
        FrameStyle { width_px: 640, fill: "#4a78b5".into(), outlines: Vec::new(), halfspaces: Vec::new(), final_overlay: Vec::new() }
    }
}

fn path_data(out: &mut String, poly: &[Vec2]) {
    for (k, p) in poly.iter().enumerate() {
        let _ = write!(out, "{}{:.5},{:.5}", if k == 0 { "M" } else { " L" }, p.x, -p.y);
    }
    out.push_str(" Z");
}

pub fn render_frame(set: &GridSet, step: usize, style: &FrameStyle, last: bool) -> Result<String> {
    let spec = set.spec();
    let (w, h) = (spec.nx as f64 * spec.dx, spec.ny as f64 * spec.dx);
    let (x0, y0) = (spec.origin.x, -(spec.origin.y + h));
    let px_h = (style.width_px as f64 * h / w).round() as u32;
    let stroke = spec.dx;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" viewBox="{:.5} {:.5} {:.5} {:.5}">"#,
        style.width_px, px_h, x0, y0, w, h
    );
    let _ = writeln!(s, r#"<defs><clipPath id="dom"><rect x="{x0:.5}" y="{y0:.5}" width="{w:.5}" height="{h:.5}"/></clipPath></defs>"#);
    let _ = writeln!(s, r#"<rect x="{x0:.5}" y="{y0:.5}" width="{w:.5}" height="{h:.5}" fill="white"/>"#);
    let _ = writeln!(s, r##"<g clip-path="url(#dom)">"##);
    if set.is_empty() {
        let _ = writeln!(
            s,
            r##"<text x="{:.5}" y="{:.5}" font-size="{:.5}" text-anchor="middle" fill="#999">empty set</text>"##,
            x0 + w / 2.0,
            y0 + h / 2.0,
            w / 12.0
        );
    } else {
        let mut d = String::new();
        for c in extract_contours(set)? {
            path_data(&mut d, &c.points);
            d.push(' ');
        }
        let _ = writeln!(s, r#"<path d="{}" fill="{}" fill-rule="evenodd"/>"#, d.trim_end(), style.fill);
    }
    for poly in &style.outlines {
        let mut d = String::new();
        path_data(&mut d, poly);
        let _ = writeln!(s, r##"<path d="{d}" fill="none" stroke="#c0392b" stroke-width="{stroke:.5}"/>"##);
    }
    let reach = w + h;
    for hs in &style.halfspaces {
        let base = hs.nu * hs.s;
        let (a, b) = (base + hs.nu.perp() * reach, base - hs.nu.perp() * reach);
        let _ = writeln!(
            s,
            r##"<line x1="{:.5}" y1="{:.5}" x2="{:.5}" y2="{:.5}" stroke="#27ae60" stroke-width="{stroke:.5}"/>"##,
            a.x, -a.y, b.x, -b.y
        );
    }
    if last {
        for poly in &style.final_overlay {
            let mut d = String::new();
            path_data(&mut d, poly);
            let _ = writeln!(
                s,
                r##"<path d="{d}" fill="none" stroke="#8e44ad" stroke-width="{stroke:.5}" stroke-dasharray="{:.5}"/>"##,
                4.0 * stroke
            );
        }
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(
        s,
        r#"<text x="{:.5}" y="{:.5}" font-size="{:.5}" fill="black">step {step}</text>"#,
        x0 + w / 40.0,
        y0 + h / 20.0,
        w / 30.0
    );
    s.push_str("</svg>\n");
    Ok(s)
}

/// Writes `frame_<step>.svg` for each snapshot into `dir`.
pub fn export_frames(snapshots: &[(usize, GridSet)], style: &FrameStyle, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut files = Vec::with_capacity(snapshots.len());
    for (k, (step, set)) in snapshots.iter().enumerate() {
        let svg = render_frame(set, *step, style, k + 1 == snapshots.len())?;
        let path = dir.join(format!("frame_{step:05}.svg"));
        std::fs::write(&path, svg)?;
        files.push(path);
    }
    Ok(files)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::regular_polygon;
    use crate::grid::{rasterize, GridSpec};

    #[test]
    fn frames_are_deterministic_and_counted() {
        let spec = GridSpec::centered(1.0, 1.0 / 32.0).unwrap();
        let a = rasterize(&[regular_polygon(Vec2::ZERO, 0.5, 64, 0.0)], spec).unwrap();
        let snaps = vec![(0, a.clone()), (5, a.clone()), (10, GridSet::empty(spec))];
        let style = FrameStyle {
            halfspaces: vec![HalfSpace::new(Vec2::new(1.0, 0.0), 0.0).unwrap()],
            final_overlay: vec![regular_polygon(Vec2::ZERO, 0.7, 8, 0.0)],
            ..FrameStyle::default()
        };
        let dir = tempfile::tempdir().unwrap();
        let files = export_frames(&snaps, &style, dir.path()).unwrap();
        assert_eq!(files.len(), 3);
        let again = render_frame(&a, 0, &style, false).unwrap();
        assert_eq!(std::fs::read_to_string(&files[0]).unwrap(), again);
        let last = std::fs::read_to_string(&files[2]).unwrap();
        assert!(last.contains("empty set") && last.contains("stroke-dasharray"));
        assert!(!again.contains("stroke-dasharray"));
    }
}
