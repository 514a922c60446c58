//! Run the deform-and-mix training augmentation on a pair of clouds and
//! print the mixed labels it produces.
//!
//! ```sh
//! cargo run --example augment_pairs
//! ```

use pccorrupt::augment::{conventional_augment, wolfmix, DeformConfig, MixConfig};
use pccorrupt::geom::{Point3, PointCloud};
use pccorrupt::rng::{derive_stream, RandomSource, RandomStream, SeedContext, DOMAIN_AUGMENT};

fn cloud(n: usize, seed: u64) -> PointCloud {
    let mut rng = RandomStream::from_u64_seed(seed);
    PointCloud::new(
        (0..n)
            .map(|_| {
                let [x, y, z] = rng.point_in_unit_sphere();
                Point3::new(x, y, z)
            })
            .collect(),
    )
    .unwrap()
}

fn main() {
    let a = cloud(1024, 10);
    let b = cloud(1024, 11);
    let dcfg = DeformConfig::default();
    let mcfg = MixConfig::default();

    println!("pair of 1024-point clouds, labels 3 and 27");
    for sample in 0..8u32 {
        let ctx = SeedContext::new(42, DOMAIN_AUGMENT, 0, sample).unwrap();
        let mut rng = derive_stream(&ctx);
        let (out, label) = wolfmix(&a, 3, &b, 27, &dcfg, &mcfg, &mut rng).unwrap();
        let entries: Vec<String> = label
            .entries()
            .iter()
            .map(|(l, w)| format!("class {l}: {w:.4}"))
            .collect();
        println!(
            "  draw {sample}: {} points, label {{{}}}",
            out.len(),
            entries.join(", ")
        );
    }

    // the conventional train-protocol transform, for comparison
    let mut rng = RandomStream::from_u64_seed(99);
    let scaled = conventional_augment(&a, &mut rng).unwrap();
    println!(
        "conventional transform: {} points, max norm {:.4} (no renormalization)",
        scaled.len(),
        scaled.max_norm()
    );
}
