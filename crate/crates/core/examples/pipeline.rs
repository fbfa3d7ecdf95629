//! Run the whole analysis on the bundled synthetic city and list the
//! files written.
//!
//!     cargo run --release --example pipeline -- <out_dir> [threads]

use std::path::{Path, PathBuf};

use tourism_esda::report::{run_with_threads, RunConfig, Subcommand};

fn main() -> tourism_esda::Result<()> {
    let mut args = std::env::args().skip(1);
    let out_dir = PathBuf::from(args.next().unwrap_or_else(|| "out".into()));
    let threads = args.next().map_or(0, |s| s.parse().expect("thread count"));
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/synthetic_city");
    let config = RunConfig {
        tracts: Some(dir.join("tracts.geojson")),
        listings: Some(dir.join("listings.csv")),
        hotels: Some(dir.join("hotels.csv")),
        photos: Some(dir.join("photos.csv")),
        center_tracts: ["r9c10", "r10c9", "r10c10", "r10c11", "r11c10"].iter().map(|s| s.to_string()).collect(),
        out_dir,
        ..RunConfig::default()
    };
    let report = run_with_threads(Subcommand::Pipeline, &config, threads)?;
    for f in &report.files {
        println!("{}", config.out_dir.join(f).display());
    }
    Ok(())
}
