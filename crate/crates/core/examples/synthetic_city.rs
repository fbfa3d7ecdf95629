//! Generate a synthetic city and write its input files.
//!
//!     cargo run --example synthetic_city -- <out_dir> [seed]

use std::path::PathBuf;

use tourism_esda::synth::{CityConfig, SyntheticCity};

fn main() -> tourism_esda::Result<()> {
    let mut args = std::env::args().skip(1);
    let out = PathBuf::from(args.next().unwrap_or_else(|| "synthetic_city".into()));
    let seed = args.next().map_or(42, |s| s.parse().expect("integer seed"));
    let city = SyntheticCity::generate(CityConfig { seed, ..CityConfig::default() })?;
    city.write_to(&out)?;
    let residents: u64 = city.tracts.tracts().iter().map(|t| t.population).sum();
    println!(
        "{} tracts ({} residents), {} listings, {} hotels, {} photos -> {}",
        city.tracts.len(),
        residents,
        city.listings.len(),
        city.hotels.len(),
        city.photos.len(),
        out.display()
    );
    Ok(())
}
