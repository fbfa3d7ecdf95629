//! Local Moran's I clusters of Airbnb places in the synthetic city, drawn
//! as a character map (north up).
//!
//!     cargo run --example lisa

use std::fs::File;
use std::path::Path;

use tourism_esda::autocorr::{cluster_table, local_moran, ClusterLabel, Inference};
use tourism_esda::ingest::parse_listings;
use tourism_esda::tabulate::assign_points_to_tracts;
use tourism_esda::tracts::TractSet;
use tourism_esda::weights::inverse_distance_band;

fn main() -> tourism_esda::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/synthetic_city");
    let tracts = TractSet::from_geojson(File::open(dir.join("tracts.geojson"))?)?;
    let listings = parse_listings(File::open(dir.join("listings.csv"))?, false)?.records;
    let pts = listings.iter().map(|l| tracts.project(l.location)).collect::<Result<Vec<_>, _>>()?;
    let beds: Vec<f64> = listings.iter().map(|l| f64::from(l.beds)).collect();
    let places = assign_points_to_tracts(&pts, Some(&beds), &tracts, "airbnb")?.vector;

    let w = inverse_distance_band(&tracts.centroids(), 1000.0, 1.0)?.row_standardize();
    let lisa = local_moran(places.values(), &w, &Inference::random(999, 42), 0.05)?;

    for row in (0..21).rev() {
        let line: String = (0..21)
            .map(|col| {
                let i = tracts.index_of(&format!("r{row}c{col}")).unwrap();
                match lisa.results[i].label {
                    ClusterLabel::HH => '#',
                    ClusterLabel::LL => '.',
                    ClusterLabel::LH => 'o',
                    ClusterLabel::HL => '+',
                    ClusterLabel::NotSignificant => ' ',
                    ClusterLabel::Island => '?',
                }
            })
            .collect();
        println!("|{line}|");
    }
    println!("# HH  . LL  o LH  + HL");
    for r in cluster_table(&lisa.results).rows {
        println!("{:<16} {:>4} {:>6.1}%", r.label, r.count, r.percentage);
    }
    Ok(())
}
