//! Render a corrupted cloud as SVG projections with the appended points
//! highlighted, plus a colored PLY for external viewers.
//!
//! ```sh
//! cargo run --example render_views
//! ```

use pccorrupt::corrupt::{add_global, SeverityTable};
use pccorrupt::geom::{normalize_unit_sphere, Point3, PointCloud};
use pccorrupt::render::{export_highlight_ply, highlight_mask, svg_projections};
use pccorrupt::rng::{derive_stream, RandomSource, SeedContext};

fn main() {
    let mut rng = pccorrupt::rng::RandomStream::from_u64_seed(3);
    let clean = normalize_unit_sphere(
        &PointCloud::new(
            (0..1024)
                .map(|_| {
                    let [x, y, z] = rng.point_in_unit_sphere();
                    Point3::new(x, 0.5 * y, z)
                })
                .collect(),
        )
        .unwrap(),
    )
    .unwrap();

    let ctx = SeedContext::new(42, 4, 5, 0).unwrap();
    let corrupted = add_global(&clean, 5, &SeverityTable::default(), &mut derive_stream(&ctx)).unwrap();
    let mask = highlight_mask(&corrupted, &clean);
    println!(
        "{} points, {} highlighted as additions",
        corrupted.len(),
        mask.iter().filter(|&&h| h).count()
    );

    let dir = std::env::temp_dir();
    let svg_path = dir.join("pccorrupt-example.svg");
    std::fs::write(&svg_path, svg_projections(&corrupted, &mask)).unwrap();
    println!("wrote {}", svg_path.display());

    let ply_path = dir.join("pccorrupt-example.ply");
    export_highlight_ply(&ply_path, &corrupted, &mask).unwrap();
    println!("wrote {}", ply_path.display());
}
