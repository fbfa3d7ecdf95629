//! Bivariate Moran's I: hotel places against the spatial lag of Airbnb places.
//!
//!     cargo run --example bivariate

use std::fs::File;
use std::path::Path;

use tourism_esda::autocorr::{bivariate_global_moran, bivariate_local_moran, cluster_table, Inference};
use tourism_esda::ingest::{parse_hotels, parse_listings};
use tourism_esda::tabulate::assign_points_to_tracts;
use tourism_esda::tracts::TractSet;
use tourism_esda::weights::inverse_distance_band;

fn main() -> tourism_esda::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/synthetic_city");
    let tracts = TractSet::from_geojson(File::open(dir.join("tracts.geojson"))?)?;
    let listings = parse_listings(File::open(dir.join("listings.csv"))?, false)?.records;
    let hotels = parse_hotels(File::open(dir.join("hotels.csv"))?, false)?.records;

    let aggregate = |locs: Vec<_>, weights: Vec<f64>, name: &str| -> tourism_esda::Result<Vec<f64>> {
        let pts = locs.into_iter().map(|l| tracts.project(l)).collect::<Result<Vec<_>, _>>()?;
        Ok(assign_points_to_tracts(&pts, Some(&weights), &tracts, name)?.vector.values().to_vec())
    };
    let h = aggregate(
        hotels.iter().map(|h| h.location).collect(),
        hotels.iter().map(|h| f64::from(h.places)).collect(),
        "hotels",
    )?;
    let a = aggregate(
        listings.iter().map(|l| l.location).collect(),
        listings.iter().map(|l| f64::from(l.beds)).collect(),
        "airbnb",
    )?;

    let w = inverse_distance_band(&tracts.centroids(), 1000.0, 1.0)?.row_standardize();
    let inf = Inference::random(999, 42);
    let g = bivariate_global_moran(&h, &a, &w, &inf)?;
    println!("I(hotels, lag airbnb) = {:.4}, pseudo p = {:.3}, z = {:.2}", g.statistic, g.pseudo_p, g.z_score.unwrap());
    let g = bivariate_global_moran(&a, &h, &w, &inf)?;
    println!("I(airbnb, lag hotels) = {:.4}, pseudo p = {:.3}", g.statistic, g.pseudo_p);

    let local = bivariate_local_moran(&h, &a, &w, &inf, 0.05)?;
    println!("\nclusters, hotels against neighboring Airbnb supply:");
    for r in cluster_table(&local.results).rows {
        println!("{:<16} {:>4} {:>6.1}%", r.label, r.count, r.percentage);
    }
    Ok(())
}
