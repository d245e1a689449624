//! SVG pictures of the `w`-slices of the Worm over chosen base points.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::Result;
use crate::geom::ComplexScalar;
use crate::worm::WormSpec;

use super::config::SliceParams;
use super::report::{ExperimentReport, Metadata, ReportRow};

/// Half-width of the drawn `w` window.
const VIEW: f64 = 2.5;
/// Slices thinner than this count as degenerate.
const DEGENERATE_RADIUS: f64 = 1e-6;
/// Distance in `θ` from `∂J` treated as on it.
const EDGE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SliceShape {
    Disc { centre: ComplexScalar, radius: f64 },
    /// `θ` on the boundary of `J`: the slice shrinks to a point.
    Degenerate { centre: ComplexScalar },
    Empty,
}

pub fn slice_shape(spec: &WormSpec, z: ComplexScalar) -> Result<(f64, SliceShape)> {
    let theta = spec.angle().theta(z)?;
    let centre = ComplexScalar::from_polar(1.0, theta);
    let shape = match spec.slice_radius(z)? {
        Some(r) if r > DEGENERATE_RADIUS => SliceShape::Disc { centre, radius: r },
        Some(_) => SliceShape::Degenerate { centre },
        None if (theta - spec.outer().lo()).abs() <= EDGE_TOL || (theta - spec.outer().hi()).abs() <= EDGE_TOL => SliceShape::Degenerate { centre },
        None => SliceShape::Empty,
    };
    Ok((theta, shape))
}

pub fn slice_svg(z: ComplexScalar, theta: f64, shape: SliceShape, size: u32) -> String {
    let s = f64::from(size);
    let px = |w: ComplexScalar| ((w.re + VIEW) / (2.0 * VIEW) * s, (VIEW - w.im) / (2.0 * VIEW) * s);
    let (ox, oy) = px(ComplexScalar::new(0.0, 0.0));
    let mut out = String::new();
    let _ = writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">"#);
    let _ = writeln!(out, r#"<rect width="{size}" height="{size}" fill="white"/>"#);
    let _ = writeln!(out, r#"<line x1="0" y1="{oy:.2}" x2="{s}" y2="{oy:.2}" stroke="gray"/><line x1="{ox:.2}" y1="0" x2="{ox:.2}" y2="{s}" stroke="gray"/>"#);
    let _ = writeln!(out, r#"<circle cx="{ox:.2}" cy="{oy:.2}" r="{:.2}" fill="none" stroke="silver" stroke-dasharray="4 3"/>"#, s / (2.0 * VIEW));
    match shape {
        SliceShape::Disc { centre, radius } => {
            let (cx, cy) = px(centre);
            let _ = writeln!(out, r#"<circle cx="{cx:.2}" cy="{cy:.2}" r="{:.2}" fill="steelblue" fill-opacity="0.5" stroke="navy"/>"#, radius / (2.0 * VIEW) * s);
        }
        SliceShape::Degenerate { centre } => {
            let (cx, cy) = px(centre);
            let _ = writeln!(out, r#"<circle cx="{cx:.2}" cy="{cy:.2}" r="3" fill="crimson"/>"#);
        }
        SliceShape::Empty => {}
    }
    let _ = writeln!(out, r#"<text x="8" y="18" font-family="monospace" font-size="13">z = {:.4}{:+.4}i  θ = {theta:.4}</text>"#, z.re, z.im);
    out.push_str("</svg>\n");
    out
}

/// Writes `slice_<k>.svg` for every base point, plus `slice_<k>.empty` or
/// `slice_<k>.degenerate` markers where the slice has no interior.
pub fn render_slices(spec: &WormSpec, p: &SliceParams, dir: &Path, metadata: Metadata) -> Result<(ExperimentReport, Vec<PathBuf>)> {
    std::fs::create_dir_all(dir)?;
    let mut rep = ExperimentReport::new("slices", metadata);
    let mut files = Vec::new();
    for (k, zc) in p.z_list.iter().enumerate() {
        let z = ComplexScalar::new(zc[0], zc[1]);
        let (theta, shape) = slice_shape(spec, z)?;
        rep.push(ReportRow::record(format!("theta/{k}"), theta));
        let radius = match shape {
            SliceShape::Disc { radius, .. } => radius,
            _ => 0.0,
        };
        rep.push(ReportRow::record(format!("radius/{k}"), radius));
        let svg = dir.join(format!("slice_{k}.svg"));
        std::fs::write(&svg, slice_svg(z, theta, shape, p.size))?;
        files.push(svg);
        let marker = match shape {
            SliceShape::Disc { .. } => None,
            SliceShape::Degenerate { .. } => Some("degenerate"),
            SliceShape::Empty => Some("empty"),
        };
        if let Some(ext) = marker {
            let path = dir.join(format!("slice_{k}.{ext}"));
            std::fs::write(&path, format!("theta = {theta:.8e} outside the open interval J\n"))?;
            files.push(path);
        }
    }
    Ok((rep, files))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_slices_and_markers() {
        let spec = WormSpec::classical_default();
        let dir = tempfile::tempdir().unwrap();
        let (rep, files) = render_slices(&spec, &SliceParams::default(), dir.path(), Metadata::new(1, 0.05, "")).unwrap();
        assert_eq!(rep.rows.len(), 10);
        assert!(files.iter().filter(|f| f.extension().unwrap() == "svg").count() == 5);
        let text = std::fs::read_to_string(&files[0]).unwrap();
        assert!(text.starts_with("<svg") && text.contains("θ = 0.0000"));
        let outer = spec.outer();
        let outside = ComplexScalar::new((0.5 * (outer.hi() + 0.3)).exp(), 0.0);
        assert_eq!(slice_shape(&spec, outside).unwrap().1, SliceShape::Empty);
        let edge = ComplexScalar::new((0.5 * outer.hi()).exp(), 0.0);
        assert!(matches!(slice_shape(&spec, edge).unwrap().1, SliceShape::Degenerate { .. }));
    }
}
