//! Projection, containment, area and centroid of a tract polygon.
//!
//!     cargo run --example geometry

use tourism_esda::geo::{project, unproject, GeoPoint, PlanarPoint, Polygon};

fn main() -> tourism_esda::Result<()> {
    let origin = GeoPoint::new(2.17, 41.39)?;
    let east = project(GeoPoint::new(2.18, 41.39)?, origin)?;
    let north = project(GeoPoint::new(2.17, 41.40)?, origin)?;
    println!("0.01 deg east  -> {:.4} m", east.x);
    println!("0.01 deg north -> {:.4} m", north.y);
    let back = unproject(east, origin);
    println!("round trip     -> ({:.10}, {:.10})", back.lon, back.lat);

    // 300 m square block with a 100 m courtyard
    let sq = |x0: f64, y0: f64, s: f64| {
        vec![
            PlanarPoint::new(x0, y0).unwrap(),
            PlanarPoint::new(x0 + s, y0).unwrap(),
            PlanarPoint::new(x0 + s, y0 + s).unwrap(),
            PlanarPoint::new(x0, y0 + s).unwrap(),
        ]
    };
    let block = Polygon::new(sq(0.0, 0.0, 300.0), vec![sq(100.0, 100.0, 100.0)])?;
    println!("area           -> {:.2} ha", block.area_hectares());
    let c = block.centroid();
    println!("centroid       -> ({:.1}, {:.1})", c.x, c.y);
    for (x, y) in [(50.0, 50.0), (150.0, 150.0), (100.0, 150.0), (400.0, 10.0)] {
        let p = PlanarPoint::new(x, y)?;
        println!("contains ({x:>5}, {y:>5}) -> {}", block.contains(p));
    }
    Ok(())
}
