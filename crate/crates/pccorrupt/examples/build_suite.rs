//! Generate a miniature benchmark suite end to end: synthesize a clean set,
//! write the 36 variants plus manifest, then verify the directory.
//!
//! ```sh
//! cargo run --example build_suite
//! ```

use pccorrupt::dataset::{
    generate_suite, verify_suite, write_pcb, CompositeRequest, Dataset, SuiteOptions,
};
use pccorrupt::geom::{Point3, PointCloud};
use pccorrupt::rng::{RandomSource, RandomStream};

fn main() {
    let dir = std::env::temp_dir().join(format!("pccorrupt-example-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let clean_path = dir.join("clean.pcb");

    let mut rng = RandomStream::from_u64_seed(1);
    let clouds: Vec<PointCloud> = (0..8)
        .map(|_| {
            let points = (0..1024)
                .map(|_| {
                    let [x, y, z] = rng.point_in_unit_sphere();
                    Point3::new(x, y, z)
                })
                .collect();
            PointCloud::new(points).unwrap()
        })
        .collect();
    let labels = (0..8).map(|i| i as u16).collect();
    write_pcb(&clean_path, &Dataset::new(clouds, labels).unwrap()).unwrap();

    let out_dir = dir.join("suite");
    let opts = SuiteOptions {
        composite: Some(CompositeRequest { size: 2, level: 3 }),
        ..SuiteOptions::new(42)
    };
    let manifest = generate_suite(&clean_path, &out_dir, &opts).unwrap();
    println!("suite at {}", out_dir.display());
    println!("severity table hash {}", &manifest.severity_hash[..16]);
    for entry in manifest.entries.iter().take(5) {
        println!(
            "  {:<22} level {} samples {} sha256 {}…",
            entry.path,
            entry.level,
            entry.samples,
            &entry.sha256[..12]
        );
    }
    println!("  … {} entries total", manifest.entries.len());

    let report = verify_suite(&out_dir).unwrap();
    println!(
        "verification: {}",
        if report.is_clean() { "zero mismatches".into() } else { format!("{:?}", report.issues) }
    );

    std::fs::remove_dir_all(&dir).unwrap();
}
