//! A reduced version of the full protocol: sweep training sizes, train,
//! retrain twice, evaluate on held-out sizes, compare at a larger grid and
//! write every artifact with a checksum manifest.
//!
//! `cargo run --release --example full_pipeline -- /tmp/amgtune-out`

use std::path::PathBuf;

use amgtune::experiment::{run_pipeline, stepped_range, PipelineConfig};
use amgtune::problems::ProblemSpec;

fn main() -> amgtune::Result<()> {
    let out: PathBuf = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("amgtune-pipeline"));
    let mut cfg = PipelineConfig::new(ProblemSpec::poisson(64));
    cfg.seed = 7;
    cfg.theta_step = 0.05;
    cfg.train_ns = stepped_range(32, 128, 8);
    cfg.draw_range = (136, 256);
    cfg.retrain1_count = 4;
    cfg.retrain2_count = 5;
    cfg.compare_ns = vec![320];
    let run = run_pipeline(&cfg, Some(&out))?;

    for ds in &run.reports.datasets {
        let ns: Vec<usize> = ds.rows.iter().map(|r| r.n).collect();
        println!("{:<9} {ns:?}", ds.tag.name());
    }
    for m in &run.reports.metrics {
        println!("{:<22} RMSE {:.4} PICP {:.3}", m.kernel, m.rmse.unwrap_or(f64::NAN), m.picp.unwrap_or(f64::NAN));
    }
    for c in &run.reports.compare {
        println!(
            "n={}: predicted {:.3} -> {:?}, sweep {} -> {:?}, default {} -> {:?}",
            c.n, c.theta_pred, c.iter_pred, c.theta_opt, c.iter_opt, c.theta_default, c.iter_default
        );
    }
    let files = run.manifest.map_or(0, |m| m.entries.len());
    println!("{files} artifacts in {}", out.display());
    Ok(())
}
