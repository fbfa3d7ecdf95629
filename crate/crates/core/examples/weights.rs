//! Inverse-distance band weights over tract centroids.
//!
//!     cargo run --example weights -- [radius_m]

use std::fs::File;
use std::path::Path;

use tourism_esda::tracts::TractSet;
use tourism_esda::weights::inverse_distance_band;

fn main() -> tourism_esda::Result<()> {
    let radius: f64 = std::env::args().nth(1).map_or(1000.0, |s| s.parse().expect("radius in meters"));
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/synthetic_city");
    let tracts = TractSet::from_geojson(File::open(dir.join("tracts.geojson"))?)?;
    let w = inverse_distance_band(&tracts.centroids(), radius, 1.0)?;
    let degrees: Vec<usize> = w.rows().iter().map(Vec::len).collect();
    println!(
        "{} tracts, {} links within {radius} m, degree {}..{}, {} islands",
        w.n(),
        w.nnz(),
        degrees.iter().min().unwrap(),
        degrees.iter().max().unwrap(),
        w.islands().len()
    );
    let rs = w.row_standardize();
    println!("S0 raw {:.4}, row-standardized {}", w.s0(), rs.s0());
    let i = tracts.index_of("r10c10").expect("center tract");
    println!("center tract neighbors (first 5):");
    for &(j, v) in rs.neighbors(i).iter().take(5) {
        println!("  {:<7} {v:.4}", tracts.tracts()[j].id);
    }
    let mut out = Vec::new();
    rs.write_header(&mut out)?;
    println!("{}", String::from_utf8_lossy(&out));
    Ok(())
}
