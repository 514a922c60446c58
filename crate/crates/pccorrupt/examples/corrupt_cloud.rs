//! Apply each corruption kind to one synthetic cloud and print what changed.
//!
//! ```sh
//! cargo run --example corrupt_cloud
//! ```

use pccorrupt::corrupt::{apply, CorruptionSpec, SeverityTable, ALL_KINDS};
use pccorrupt::geom::{normalize_unit_sphere, Point3, PointCloud};
use pccorrupt::rng::{derive_stream, RandomSource, RandomStream, SeedContext};

fn synthetic_cloud(n: usize, seed: u64) -> PointCloud {
    let mut rng = RandomStream::from_u64_seed(seed);
    let points = (0..n)
        .map(|_| {
            let [x, y, z] = rng.point_in_unit_sphere();
            // flatten into a rough disc so the corruptions are visible
            Point3::new(x, y, 0.3 * z)
        })
        .collect();
    normalize_unit_sphere(&PointCloud::new(points).unwrap()).unwrap()
}

fn main() {
    let table = SeverityTable::default();
    let clean = synthetic_cloud(1024, 7);
    println!(
        "clean: {} points, max norm {:.6}",
        clean.len(),
        clean.max_norm()
    );

    let level = 3;
    for kind in ALL_KINDS {
        let spec = CorruptionSpec::new(kind, level).unwrap();
        let ctx = SeedContext::new(42, kind.code(), level, 0).unwrap();
        let mut rng = derive_stream(&ctx);
        let out = apply(&spec, &clean, &table, &mut rng).unwrap();
        println!(
            "{:>11} L{}: {:>4} points, max norm {:.3}",
            kind.name(),
            level,
            out.len(),
            out.max_norm()
        );
    }
}
