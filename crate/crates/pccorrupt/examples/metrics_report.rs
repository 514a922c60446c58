//! Score a published accuracy row against the bundled DGCNN baseline and
//! print the full CE/RCE report as a markdown table.
//!
//! ```sh
//! cargo run --example metrics_report
//! ```

use pccorrupt::corrupt::CorruptionKind;
use pccorrupt::metrics::{build_report, dgcnn_baseline, markdown_report, CorruptionOa, OaTable};

fn main() {
    // the PointNet row of the reference accuracy table (mean form)
    let values = [
        (CorruptionKind::Scale, 0.881),
        (CorruptionKind::Jitter, 0.797),
        (CorruptionKind::DropGlobal, 0.876),
        (CorruptionKind::DropLocal, 0.778),
        (CorruptionKind::AddGlobal, 0.121),
        (CorruptionKind::AddLocal, 0.562),
        (CorruptionKind::Rotate, 0.591),
    ];
    let method = OaTable {
        name: Some("pointnet".into()),
        clean: 0.907,
        corruptions: values.into_iter().map(|(k, v)| (k, CorruptionOa::Mean(v))).collect(),
    };

    let report = build_report(&method, &dgcnn_baseline()).unwrap();
    println!("method {} vs baseline {}", report.method, report.baseline);
    println!("clean OA {:.3}   mOA {:.3}", report.clean_oa, report.mean_oa);
    println!("mCE  {:.3}   RmCE {:.3}", report.mce, report.rmce);
    println!();
    print!("{}", markdown_report(&report));
    println!();
    println!("radar series (corruption, 1/CE, mean OA):");
    for c in &report.per_corruption {
        println!(
            "  {:<12} {:>6}  {:.3}",
            c.kind.name(),
            c.inverse_ce.map(|v| format!("{v:.3}")).unwrap_or_else(|| "inf".into()),
            c.mean_oa
        );
    }
}
