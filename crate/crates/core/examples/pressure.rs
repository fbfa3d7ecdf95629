//! Tourist places per 1000 residents, skipping sparsely populated tracts.
//!
//!     cargo run --example pressure -- [min_density]

use std::fs::File;
use std::path::Path;

use tourism_esda::ingest::{parse_hotels, parse_listings};
use tourism_esda::tabulate::{assign_points_to_tracts, pressure_ratio, VariableVector};
use tourism_esda::tracts::TractSet;

fn main() -> tourism_esda::Result<()> {
    let min_density: f64 = std::env::args().nth(1).map_or(5.0, |s| s.parse().expect("inhabitants per hectare"));
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/synthetic_city");
    let tracts = TractSet::from_geojson(File::open(dir.join("tracts.geojson"))?)?;
    let listings = parse_listings(File::open(dir.join("listings.csv"))?, false)?.records;
    let hotels = parse_hotels(File::open(dir.join("hotels.csv"))?, false)?.records;

    let mut pts = Vec::new();
    let mut places = Vec::new();
    for l in &listings {
        pts.push(tracts.project(l.location)?);
        places.push(f64::from(l.beds));
    }
    for h in &hotels {
        pts.push(tracts.project(h.location)?);
        places.push(f64::from(h.places));
    }
    let total: VariableVector = assign_points_to_tracts(&pts, Some(&places), &tracts, "places")?.vector;
    let result = pressure_ratio(&total, &tracts, min_density)?;

    let mut ranked: Vec<_> = result.rows.iter().filter_map(|r| r.ratio.map(|v| (v, &r.tract_id))).collect();
    ranked.sort_by(|a, b| b.0.total_cmp(&a.0));
    println!("highest pressure:");
    for (v, id) in ranked.iter().take(8) {
        println!("  {id:<7} {v:>8.1} places per 1000 residents");
    }
    let excluded: Vec<&str> =
        result.rows.iter().filter(|r| r.exclusion.is_some()).map(|r| r.tract_id.as_str()).collect();
    println!("excluded below {min_density} inhabitants/ha: {}", excluded.join(" "));
    Ok(())
}
