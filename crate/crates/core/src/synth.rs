//! Synthetic tract grids, spatially autocorrelated fields and point
//! scatters with known properties.
//!
//! The same generators drive [`SyntheticCity`], a small deterministic city
//! whose files have exactly the layout the ingest and tract loaders read.

use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use chrono::{Duration, NaiveDate};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};

use crate::error::{Error, Result};
use crate::geo::{unproject, GeoPoint, MultiPolygon, PlanarPoint, Polygon};
use crate::ingest::{write_hotels, write_listings, write_photos, HotelRecord, Listing, PhotoRecord, RoomType};
use crate::tracts::{Tract, TractSet};
use crate::weights::SpatialWeights;

const SAR_TOLERANCE: f64 = 1e-10;
const SAR_MAX_ITERATIONS: usize = 1_000_000;
const MAX_REJECTION_ATTEMPTS: usize = 100_000;

fn stream(seed: u64, counter: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(counter);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub rows: usize,
    pub cols: usize,
    pub cell_size: f64,
    /// Lower-left corner of the grid.
    pub origin: PlanarPoint,
}

impl GridSpec {
    /// A grid centered on the planar origin.
    pub fn centered(rows: usize, cols: usize, cell_size: f64) -> Self {
        GridSpec {
            rows,
            cols,
            cell_size,
            origin: PlanarPoint { x: -(cols as f64) * cell_size / 2.0, y: -(rows as f64) * cell_size / 2.0 },
        }
    }

    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, row: usize, col: usize) -> usize {
        row * self.cols + col
    }

    pub fn cell_center(&self, row: usize, col: usize) -> PlanarPoint {
        PlanarPoint {
            x: self.origin.x + (col as f64 + 0.5) * self.cell_size,
            y: self.origin.y + (row as f64 + 0.5) * self.cell_size,
        }
    }

    pub fn center(&self) -> PlanarPoint {
        PlanarPoint {
            x: self.origin.x + self.cols as f64 * self.cell_size / 2.0,
            y: self.origin.y + self.rows as f64 * self.cell_size / 2.0,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.rows == 0 || self.cols == 0 || !(self.cell_size.is_finite() && self.cell_size > 0.0) {
            return Err(Error::InvalidConfig(format!("invalid grid spec {self:?}")));
        }
        Ok(())
    }
}

/// Square tracts `r{row}c{col}` in row-major order. `population` gets each
/// cell center relative to the grid center; `None` gives 100 inhabitants
/// everywhere.
pub fn generate_grid_tracts(spec: &GridSpec, population: Option<&dyn Fn(PlanarPoint) -> u64>) -> Result<Vec<Tract>> {
    spec.validate()?;
    let center = spec.center();
    let s = spec.cell_size;
    let mut tracts = Vec::with_capacity(spec.len());
    for r in 0..spec.rows {
        for c in 0..spec.cols {
            let x0 = spec.origin.x + c as f64 * s;
            let y0 = spec.origin.y + r as f64 * s;
            let ring = vec![
                PlanarPoint { x: x0, y: y0 },
                PlanarPoint { x: x0 + s, y: y0 },
                PlanarPoint { x: x0 + s, y: y0 + s },
                PlanarPoint { x: x0, y: y0 + s },
            ];
            let cc = spec.cell_center(r, c);
            let pop = population.map_or(100, |f| f(PlanarPoint { x: cc.x - center.x, y: cc.y - center.y }));
            let geom = MultiPolygon::from(Polygon::new(ring, vec![])?);
            tracts.push(Tract::new(format!("r{r}c{c}"), geom, pop, None)?);
        }
    }
    Ok(tracts)
}

/// Binary rook contiguity on the grid, row-standardized.
pub fn rook_weights(spec: &GridSpec) -> Result<SpatialWeights> {
    spec.validate()?;
    if spec.len() < 2 {
        return Err(Error::InsufficientObservations { needed: 2, got: spec.len() });
    }
    let mut rows = Vec::with_capacity(spec.len());
    for r in 0..spec.rows {
        for c in 0..spec.cols {
            let mut nb = Vec::with_capacity(4);
            if r > 0 {
                nb.push((spec.index(r - 1, c), 1.0));
            }
            if c > 0 {
                nb.push((spec.index(r, c - 1), 1.0));
            }
            if c + 1 < spec.cols {
                nb.push((spec.index(r, c + 1), 1.0));
            }
            if r + 1 < spec.rows {
                nb.push((spec.index(r + 1, c), 1.0));
            }
            rows.push(nb);
        }
    }
    Ok(SpatialWeights::from_neighbors(rows, false)?.row_standardize())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SarSpec {
    pub rho: f64,
    pub noise_sd: f64,
    pub seed: u64,
}

/// Solves `x = rho * W x + e` by fixed-point iteration, `e ~ N(0, noise_sd)`.
pub fn simulate_sar(w: &SpatialWeights, spec: &SarSpec) -> Result<Vec<f64>> {
    if !w.is_row_standardized() || !w.islands().is_empty() {
        return Err(Error::InvalidWeights("SAR simulation needs row-standardized weights without islands".into()));
    }
    if !(spec.rho.abs() < 1.0) {
        return Err(Error::InvalidConfig(format!("rho must lie in (-1, 1), got {}", spec.rho)));
    }
    let normal = Normal::new(0.0, spec.noise_sd)
        .ok()
        .filter(|_| spec.noise_sd > 0.0)
        .ok_or_else(|| Error::InvalidConfig(format!("noise_sd must be positive, got {}", spec.noise_sd)))?;
    let mut rng = stream(spec.seed, 0);
    let eps: Vec<f64> = (0..w.n()).map(|_| normal.sample(&mut rng)).collect();
    let mut x = eps.clone();
    for _ in 0..SAR_MAX_ITERATIONS {
        let next: Vec<f64> = (0..w.n())
            .map(|i| spec.rho * w.neighbors(i).iter().map(|&(j, wij)| wij * x[j]).sum::<f64>() + eps[i])
            .collect();
        let delta = next.iter().zip(&x).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
        x = next;
        if delta < SAR_TOLERANCE {
            return Ok(x);
        }
    }
    Err(Error::InvalidConfig("SAR iteration did not converge".into()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatteredPoint {
    /// Tract the point was drawn in.
    pub source: usize,
    pub location: PlanarPoint,
}

/// Poisson(intensity) points per tract, placed uniformly by rejection
/// sampling inside the tract geometry.
pub fn scatter_points(intensity: &[f64], tracts: &[Tract], seed: u64) -> Result<Vec<ScatteredPoint>> {
    if intensity.len() != tracts.len() {
        return Err(Error::Alignment(format!("{} intensities for {} tracts", intensity.len(), tracts.len())));
    }
    if let Some(bad) = intensity.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
        return Err(Error::InvalidIntensity(format!("intensity {bad} is negative or not finite")));
    }
    let mut out = Vec::new();
    for (k, (tract, &lambda)) in tracts.iter().zip(intensity).enumerate() {
        if lambda == 0.0 {
            continue;
        }
        let mut rng = stream(seed, k as u64);
        let count = Poisson::new(lambda).map_err(|e| Error::InvalidIntensity(e.to_string()))?.sample(&mut rng) as usize;
        let b = tract.geometry.bounds();
        for _ in 0..count {
            let mut placed = false;
            for _ in 0..MAX_REJECTION_ATTEMPTS {
                let p = PlanarPoint { x: rng.random_range(b.min_x..b.max_x), y: rng.random_range(b.min_y..b.max_y) };
                if tract.geometry.contains(p) {
                    out.push(ScatteredPoint { source: k, location: p });
                    placed = true;
                    break;
                }
            }
            if !placed {
                return Err(Error::InvalidGeometry(format!("could not sample a point inside tract {}", tract.id)));
            }
        }
    }
    Ok(out)
}

/// Parameters of the bundled synthetic city.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CityConfig {
    pub grid: GridSpec,
    /// Geographic position of the grid center.
    pub anchor: GeoPoint,
    pub seed: u64,
}

impl Default for CityConfig {
    fn default() -> Self {
        CityConfig { grid: GridSpec::centered(21, 21, 240.0), anchor: GeoPoint { lon: 2.1734, lat: 41.3851 }, seed: 42 }
    }
}

/// A synthetic city: Airbnb supply decaying with distance from the center,
/// hotels concentrated along a narrow north-south axis, photo hotspots and
/// a handful of near-empty tracts.
#[derive(Debug, Clone)]
pub struct SyntheticCity {
    pub config: CityConfig,
    pub tracts: TractSet,
    pub listings: Vec<Listing>,
    pub hotels: Vec<HotelRecord>,
    pub photos: Vec<PhotoRecord>,
}

/// Expected listings per tract at distance `r` from the center.
pub fn airbnb_intensity(p: PlanarPoint) -> f64 {
    let r = (p.x * p.x + p.y * p.y).sqrt();
    30.0 * (-(r / 900.0).powi(2)).exp() + 0.3
}

/// Expected hotels per tract: a single-column ridge through the center.
pub fn hotel_intensity(p: PlanarPoint, cell_size: f64) -> f64 {
    if p.x.abs() < cell_size / 2.0 && p.y.abs() < 2000.0 {
        4.0
    } else {
        0.03
    }
}

fn tourist_photo_intensity(p: PlanarPoint) -> f64 {
    let spot = |cx: f64, cy: f64, s: f64| (-((p.x - cx).powi(2) + (p.y - cy).powi(2)) / (s * s)).exp();
    40.0 * spot(0.0, -200.0, 400.0) + 25.0 * spot(900.0, 1000.0, 350.0) + 0.4
}

fn city_population(p: PlanarPoint, extent: f64) -> u64 {
    // north-east corner block is parkland
    if p.x > 0.75 * extent && p.y > 0.75 * extent {
        return 12;
    }
    let r = (p.x * p.x + p.y * p.y).sqrt();
    (450.0 * (-r / 2500.0).exp() + 120.0).round() as u64
}

impl SyntheticCity {
    pub fn generate(config: CityConfig) -> Result<Self> {
        let grid = config.grid;
        let extent = grid.cols.min(grid.rows) as f64 * grid.cell_size / 2.0;
        let population = move |p: PlanarPoint| city_population(p, extent);
        let tract_list = generate_grid_tracts(&grid, Some(&population))?;
        let center = grid.center();
        let rel: Vec<PlanarPoint> = tract_list
            .iter()
            .map(|t| {
                let c = t.centroid();
                PlanarPoint { x: c.x - center.x, y: c.y - center.y }
            })
            .collect();
        let to_geo = |p: PlanarPoint| unproject(PlanarPoint { x: p.x - center.x, y: p.y - center.y }, config.anchor);
        let seed = config.seed;

        let a: Vec<f64> = rel.iter().map(|&p| airbnb_intensity(p)).collect();
        let listing_pts = scatter_points(&a, &tract_list, seed ^ 0xA1)?;
        let mut rng = stream(seed, 1 << 40);
        let mut host = 0usize;
        let mut host_left = 0usize;
        let listings = listing_pts
            .iter()
            .enumerate()
            .map(|(k, sp)| {
                if host_left == 0 {
                    host += 1;
                    let u: f64 = rng.random();
                    host_left = if u < 0.75 {
                        1
                    } else if u < 0.95 {
                        rng.random_range(2..=5)
                    } else {
                        rng.random_range(6..=12)
                    };
                }
                host_left -= 1;
                let u: f64 = rng.random();
                let room_type = if u < 0.54 {
                    RoomType::EntireHome
                } else if u < 0.99 {
                    RoomType::PrivateRoom
                } else {
                    RoomType::SharedRoom
                };
                let beds = match room_type {
                    RoomType::EntireHome => rng.random_range(1..=6),
                    RoomType::PrivateRoom => rng.random_range(1..=2),
                    RoomType::SharedRoom => rng.random_range(2..=6),
                };
                let centrality = (-(rel[sp.source].x.powi(2) + rel[sp.source].y.powi(2)) / 1500.0_f64.powi(2)).exp();
                let reviews_per_month = (rng.random::<f64>() >= 0.1)
                    .then(|| ((0.6 + 0.8 * centrality) * rng.random_range(0.2..1.8) * 100.0).round() / 100.0);
                Listing {
                    id: format!("L{k:05}"),
                    location: to_geo(sp.location),
                    room_type,
                    price_per_night: rng.random_range(25..=180) as f64,
                    beds,
                    availability_365: rng.random_range(0..=365),
                    reviews_per_month,
                    host_id: format!("H{host:04}"),
                }
            })
            .collect();

        let b: Vec<f64> = rel.iter().map(|&p| hotel_intensity(p, grid.cell_size)).collect();
        let hotel_pts = scatter_points(&b, &tract_list, seed ^ 0xB2)?;
        let mut rng = stream(seed, 2 << 40);
        let hotels = hotel_pts
            .iter()
            .enumerate()
            .map(|(k, sp)| {
                let rooms: u32 = rng.random_range(20..=200);
                let beds = rooms * 2 - rng.random_range(0..=rooms / 4);
                HotelRecord {
                    id: format!("T{k:04}"),
                    location: to_geo(sp.location),
                    rooms,
                    beds,
                    places: beds + rooms / 10,
                }
            })
            .collect();

        let t: Vec<f64> = rel.iter().map(|&p| tourist_photo_intensity(p)).collect();
        let resident: Vec<f64> = vec![3.0; tract_list.len()];
        let mut tourist_pts = scatter_points(&t, &tract_list, seed ^ 0xC3)?;
        let mut resident_pts = scatter_points(&resident, &tract_list, seed ^ 0xD4)?;
        let mut rng = stream(seed, 3 << 40);
        shuffle_points(&mut rng, &mut tourist_pts);
        shuffle_points(&mut rng, &mut resident_pts);
        let year_start = NaiveDate::from_ymd_opt(2014, 1, 1).expect("valid date");
        let mut photos = Vec::with_capacity(tourist_pts.len() + resident_pts.len());
        let mut owner = 0usize;
        for (pts, resident) in [(&tourist_pts, false), (&resident_pts, true)] {
            let mut k = 0;
            while k < pts.len() {
                owner += 1;
                let size = if resident { rng.random_range(2..=12) } else { rng.random_range(1..=8) };
                let base = year_start + Duration::days(rng.random_range(0..300));
                let long_gap = rng.random_range(45..=400);
                for (m, sp) in pts[k..(k + size).min(pts.len())].iter().enumerate() {
                    let offset = match (resident, m) {
                        (true, 1) => long_gap,
                        (true, _) => rng.random_range(0..=long_gap),
                        (false, _) => rng.random_range(0..=20),
                    };
                    photos.push(PhotoRecord {
                        photo_id: format!("P{:06}", photos.len()),
                        owner_id: format!("U{owner:05}"),
                        location: to_geo(sp.location),
                        taken_at: base + Duration::days(offset),
                    });
                }
                k += size;
            }
        }

        Ok(SyntheticCity { config, tracts: reanchor(tract_list, center, config.anchor)?, listings, hotels, photos })
    }

    /// Writes `tracts.geojson`, `listings.csv`, `hotels.csv` and `photos.csv`.
    pub fn write_to(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        self.tracts.write_geojson(BufWriter::new(File::create(dir.join("tracts.geojson"))?), None)?;
        write_listings(BufWriter::new(File::create(dir.join("listings.csv"))?), &self.listings)?;
        write_hotels(BufWriter::new(File::create(dir.join("hotels.csv"))?), &self.hotels)?;
        write_photos(BufWriter::new(File::create(dir.join("photos.csv"))?), &self.photos)?;
        Ok(())
    }
}

fn shuffle_points(rng: &mut ChaCha8Rng, pts: &mut [ScatteredPoint]) {
    for i in (1..pts.len()).rev() {
        let j = rng.random_range(0..=i);
        pts.swap(i, j);
    }
}

/// Shifts planar tracts so the grid center sits at the projection origin.
fn reanchor(tracts: Vec<Tract>, center: PlanarPoint, anchor: GeoPoint) -> Result<TractSet> {
    let shifted = tracts
        .into_iter()
        .map(|t| {
            let parts = t
                .geometry
                .parts()
                .iter()
                .map(|poly| {
                    let shift =
                        |r: &crate::geo::Ring| r.points().iter().map(|p| p.translate(-center.x, -center.y)).collect();
                    Polygon::new(shift(poly.exterior()), poly.holes().iter().map(shift).collect())
                })
                .collect::<Result<Vec<_>>>()?;
            Tract::new(t.id, MultiPolygon::new(parts)?, t.population, Some(t.area_ha))
        })
        .collect::<Result<Vec<_>>>()?;
    TractSet::new(anchor, shifted)
}
