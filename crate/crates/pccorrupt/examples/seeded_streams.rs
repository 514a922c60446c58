//! Show the reproducibility contract: every random stream is a pure function
//! of (global seed, domain, level, sample index), so any sample can be
//! regenerated in isolation, in any order, on any thread.
//!
//! ```sh
//! cargo run --example seeded_streams
//! ```

use pccorrupt::rng::{derive_stream, RandomSource, SeedContext};

fn main() {
    let seed = 42;

    println!("derived seeds for (seed {seed}, jitter, level 3):");
    for sample in 0..4u32 {
        let ctx = SeedContext::new(seed, 1, 3, sample).unwrap();
        println!("  sample {sample}: {:#018x}", ctx.derived_seed());
    }

    let ctx = SeedContext::new(seed, 1, 3, 0).unwrap();
    let mut first = derive_stream(&ctx);
    let mut again = derive_stream(&ctx);
    println!("\nfirst draws of two independently derived copies:");
    for _ in 0..3 {
        let (a, b) = (first.next_u64(), again.next_u64());
        assert_eq!(a, b);
        println!("  {a:#018x} == {b:#018x}");
    }

    let mut stream = derive_stream(&ctx);
    println!("\ntyped draws from one stream:");
    println!("  uniform [0,1):   {:.6}", stream.next_uniform(0.0, 1.0).unwrap());
    println!("  gaussian (0,1):  {:+.6}", stream.next_gaussian(0.0, 1.0).unwrap());
    println!("  integer {{1..8}}:  {}", stream.next_int_inclusive(1, 8).unwrap());
    println!("  permutation of 5: {:?}", stream.permutation(5));
    let [x, y, z] = stream.point_in_unit_sphere();
    println!("  unit-ball point: ({x:+.4}, {y:+.4}, {z:+.4})");

    let mut parent = derive_stream(&ctx);
    let mut child_a = parent.split();
    let mut child_b = parent.split();
    println!("\nsplit children draw independently:");
    println!("  child A: {:#018x}", child_a.next_u64());
    println!("  child B: {:#018x}", child_b.next_u64());
}
