//! Split photographers into tourists and residents by the time span of
//! their photographs.
//!
//!     cargo run --example classify_photos -- [threshold_days]

use std::fs::File;
use std::path::Path;

use tourism_esda::ingest::{classify_photographers, parse_photos, PhotographerKind};

fn main() -> tourism_esda::Result<()> {
    let threshold: i64 = std::env::args().nth(1).map_or(30, |s| s.parse().expect("days"));
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/synthetic_city");
    let photos = parse_photos(File::open(dir.join("photos.csv"))?, false)?.records;
    let classes = classify_photographers(&photos, threshold);
    let tourists = classes.iter().filter(|c| c.class == PhotographerKind::Tourist).count();
    println!("{} photos by {} photographers", photos.len(), classes.len());
    println!("tourists  {tourists:>5}");
    println!("residents {:>5}", classes.len() - tourists);
    let longest = classes.iter().max_by_key(|c| c.span_days).unwrap();
    println!("longest span: {} over {} days", longest.owner_id, longest.span_days);
    Ok(())
}
