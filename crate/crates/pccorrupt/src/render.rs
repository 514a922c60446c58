//! Static inspection renderings: three orthographic SVG projections, or a
//! colored PLY for external viewers. Points flagged in a highlight mask
//! (typically: points absent from a reference cloud) are drawn red.

use crate::dataset::{export_ply, DatasetError};
use crate::geom::PointCloud;
use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::Path;

const PANEL: f64 = 300.0;
const MARGIN: f64 = 10.0;
const BASE_COLOR: &str = "#4477aa";
const HIGHLIGHT_COLOR: &str = "#cc3311";

/// Marks the points of `cloud` that do not occur in `reference`, compared at
/// the serialized `f32` resolution (the resolution of the PCB format).
pub fn highlight_mask(cloud: &PointCloud, reference: &PointCloud) -> Vec<bool> {
    let key = |p: &crate::geom::Point3| {
        (
            (p.x as f32).to_bits(),
            (p.y as f32).to_bits(),
            (p.z as f32).to_bits(),
        )
    };
    let known: HashSet<_> = reference.points().iter().map(key).collect();
    cloud.points().iter().map(|p| !known.contains(&key(p))).collect()
}

/// Three orthographic projections (XY, XZ, YZ) side by side, one circle per
/// point per panel. Output is deterministic for a given cloud and mask.
pub fn svg_projections(cloud: &PointCloud, highlight: &[bool]) -> String {
    debug_assert_eq!(highlight.len(), cloud.len());
    let extent = cloud
        .points()
        .iter()
        .flat_map(|p| [p.x.abs(), p.y.abs(), p.z.abs()])
        .fold(1.0f64, f64::max)
        * 1.05;
    let to_px = |v: f64| MARGIN + (v + extent) / (2.0 * extent) * (PANEL - 2.0 * MARGIN);

    let width = PANEL * 3.0 + MARGIN * 4.0;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{h}" viewBox="0 0 {width} {h}">"#,
        h = PANEL + 2.0 * MARGIN
    );
    type Project = fn(&crate::geom::Point3) -> (f64, f64);
    let panels: [(&str, Project); 3] = [
        ("XY", |p| (p.x, p.y)),
        ("XZ", |p| (p.x, p.z)),
        ("YZ", |p| (p.y, p.z)),
    ];
    for (i, (label, project)) in panels.iter().enumerate() {
        let x0 = MARGIN + i as f64 * (PANEL + MARGIN);
        let _ = writeln!(
            out,
            r##"<g transform="translate({x0},{MARGIN})"><rect width="{PANEL}" height="{PANEL}" fill="white" stroke="#999"/><text x="6" y="16" font-family="monospace" font-size="12">{label}</text>"##
        );
        for (p, &hot) in cloud.points().iter().zip(highlight) {
            let (u, v) = project(p);
            // SVG y grows downward
            let _ = writeln!(
                out,
                r#"<circle cx="{:.2}" cy="{:.2}" r="1.5" fill="{}"/>"#,
                to_px(u),
                PANEL - to_px(v),
                if hot { HIGHLIGHT_COLOR } else { BASE_COLOR }
            );
        }
        let _ = writeln!(out, "</g>");
    }
    let _ = writeln!(out, "</svg>");
    out
}

/// Write a colored PLY: highlighted points red, the rest steel blue.
pub fn export_highlight_ply(
    path: &Path,
    cloud: &PointCloud,
    highlight: &[bool],
) -> Result<(), DatasetError> {
    let colors: Vec<[u8; 3]> = highlight
        .iter()
        .map(|&hot| if hot { [204, 51, 17] } else { [68, 119, 170] })
        .collect();
    export_ply(path, cloud, Some(&colors))
}
