//! Assign Airbnb listings and hotels to tracts, then summarize densities.
//!
//!     cargo run --example aggregate

use std::fs::File;
use std::path::Path;

use tourism_esda::ingest::{host_concentration, parse_hotels, parse_listings};
use tourism_esda::tabulate::{
    assign_points_to_tracts, density_per_hectare, descriptive_stats, difference_map, normalize,
};
use tourism_esda::tracts::TractSet;

fn main() -> tourism_esda::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/synthetic_city");
    let tracts = TractSet::from_geojson(File::open(dir.join("tracts.geojson"))?)?;
    let listings = parse_listings(File::open(dir.join("listings.csv"))?, false)?.records;
    let hotels = parse_hotels(File::open(dir.join("hotels.csv"))?, false)?.records;

    let project = |locs: Vec<_>| locs.into_iter().map(|l| tracts.project(l)).collect::<Result<Vec<_>, _>>();
    let beds: Vec<f64> = listings.iter().map(|l| f64::from(l.beds)).collect();
    let places: Vec<f64> = hotels.iter().map(|h| f64::from(h.places)).collect();
    let airbnb = assign_points_to_tracts(
        &project(listings.iter().map(|l| l.location).collect())?,
        Some(&beds),
        &tracts,
        "airbnb_places",
    )?;
    let hotel = assign_points_to_tracts(
        &project(hotels.iter().map(|h| h.location).collect())?,
        Some(&places),
        &tracts,
        "hotel_places",
    )?;
    println!("{} listings ({} outside every tract), {} hotels", listings.len(), airbnb.unassigned, hotels.len());

    println!("{:<16} {:>8} {:>8} {:>8} {:>8}", "places/ha", "min", "max", "mean", "sd");
    let a_ha = density_per_hectare(&airbnb.vector, &tracts)?;
    let h_ha = density_per_hectare(&hotel.vector, &tracts)?;
    for (name, v) in [("airbnb", &a_ha), ("hotels", &h_ha)] {
        let s = descriptive_stats(v.values())?;
        println!("{name:<16} {:>8.2} {:>8.2} {:>8.2} {:>8.2}", s.minimum, s.maximum, s.mean, s.standard_deviation);
    }

    let diff = difference_map(&normalize(&h_ha)?, &normalize(&a_ha)?)?;
    let (mut hi, mut lo) = (0, 0);
    for v in diff.values() {
        if *v > 1.0 {
            hi += 1;
        } else if *v < -1.0 {
            lo += 1;
        }
    }
    println!("tracts where hotels dominate by > 1 sd: {hi}, Airbnb by > 1 sd: {lo}");

    let hc = host_concentration(&listings)?;
    println!(
        "{} hosts, {:.1}% with several listings, {:.1}% of listings from hosts with 6+",
        hc.distinct_hosts, hc.pct_multi_hosts, hc.pct_listings_by_big_hosts
    );
    Ok(())
}
