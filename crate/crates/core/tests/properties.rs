mod common;

use proptest::prelude::*;

use common::*;
use tourism_esda::autocorr::{global_moran, local_moran, ClusterLabel, Inference};
use tourism_esda::geo::{project, unproject, GeoPoint, PlanarPoint};
use tourism_esda::ingest::{parse_listings, write_listings};
use tourism_esda::synth::{
    generate_grid_tracts, rook_weights, scatter_points, simulate_sar, CityConfig, GridSpec, SarSpec, SyntheticCity,
};
use tourism_esda::tabulate::assign_points_to_tracts;
use tourism_esda::tracts::TractSet;
use tourism_esda::weights::{inverse_distance_band, SpatialWeights};

fn cloud(seed: u64, n: usize) -> (SpatialWeights, Vec<f64>) {
    let mut g = rng(seed);
    let pts = random_points(&mut g, n, 3000.0);
    let x = normal_field(&mut g, n);
    (inverse_distance_band(&pts, 900.0, 1.0).unwrap().row_standardize(), x)
}

fn pool(threads: usize) -> rayon::ThreadPool {
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn affine_maps_leave_moran_unchanged(seed in 0u64..1000, a in prop_oneof![-50.0..-0.01f64, 0.01..50.0f64], b in -1e3..1e3f64) {
        let (w, x) = cloud(seed, 60);
        let y: Vec<f64> = x.iter().map(|v| a * v + b).collect();
        let inf = Inference::random(199, seed);
        let r1 = global_moran(&x, &w, &inf).unwrap();
        let r2 = global_moran(&y, &w, &inf).unwrap();
        prop_assert!((r1.statistic - r2.statistic).abs() < 1e-9);
        prop_assert!((r1.z_score.unwrap() - r2.z_score.unwrap()).abs() < 1e-9);
        prop_assert_eq!(r1.pseudo_p, r2.pseudo_p);
    }

    #[test]
    fn p_values_respect_floor_and_labels_match_quadrants(seed in 0u64..1000, perms in 99usize..400) {
        let (w, x) = cloud(seed, 70);
        let inf = Inference::random(perms, seed);
        let floor = 1.0 / (perms as f64 + 1.0);
        let g = global_moran(&x, &w, &inf).unwrap();
        prop_assert!(g.pseudo_p >= floor && g.pseudo_p <= 1.0);
        let l = local_moran(&x, &w, &inf, 0.05).unwrap();
        for r in &l.results {
            match r.label {
                ClusterLabel::Island => prop_assert!(r.pseudo_p.is_none()),
                ClusterLabel::NotSignificant => prop_assert!(r.pseudo_p.unwrap() > 0.05),
                label => {
                    prop_assert!(r.pseudo_p.unwrap() <= 0.05 && r.pseudo_p.unwrap() >= floor);
                    prop_assert_eq!(label, ClusterLabel::quadrant(r.z.unwrap(), r.lag.unwrap()));
                }
            }
        }
    }

    #[test]
    fn band_weights_are_symmetric_before_standardization(seed in 0u64..1000, radius in 100.0..1500.0f64, power in 0.0..3.0f64) {
        let mut g = rng(seed);
        let pts = random_points(&mut g, 80, 3000.0);
        let w = inverse_distance_band(&pts, radius, power).unwrap();
        for i in 0..w.n() {
            for &(j, v) in w.neighbors(i) {
                let back = w.neighbors(j).iter().find(|&&(k, _)| k == i).map(|&(_, u)| u);
                prop_assert_eq!(back, Some(v));
            }
        }
        let rs = w.row_standardize();
        for i in 0..rs.n() {
            if !rs.is_island(i) {
                let s: f64 = rs.neighbors(i).iter().map(|&(_, v)| v).sum();
                prop_assert!((s - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn weights_files_round_trip_exactly(seed in 0u64..1000, standardize in any::<bool>()) {
        let mut g = rng(seed);
        let pts = random_points(&mut g, 50, 2500.0);
        let mut w = inverse_distance_band(&pts, 700.0, 1.5).unwrap();
        if standardize {
            w = w.row_standardize();
        }
        let mut header = Vec::new();
        let mut triplets = Vec::new();
        w.write_header(&mut header).unwrap();
        w.write_triplets(&mut triplets).unwrap();
        let back = SpatialWeights::read(header.as_slice(), triplets.as_slice()).unwrap();
        prop_assert_eq!(back, w);
    }

    #[test]
    fn projection_round_trips(lon in -179.0..179.0f64, lat in -80.0..80.0f64, dlon in -0.5..0.5f64, dlat in -0.5..0.5f64) {
        let origin = GeoPoint::new(lon, lat).unwrap();
        let p = GeoPoint::new(lon + dlon, (lat + dlat).clamp(-89.0, 89.0)).unwrap();
        let back = unproject(project(p, origin).unwrap(), origin);
        prop_assert!((back.lon - p.lon).abs() < 1e-9 && (back.lat - p.lat).abs() < 1e-9);
    }

    #[test]
    fn scattered_points_land_in_their_source_tract(seed in 0u64..10_000) {
        let spec = GridSpec::centered(5, 6, 130.0);
        let tracts = TractSet::new(GeoPoint { lon: 2.0, lat: 41.0 }, generate_grid_tracts(&spec, None).unwrap()).unwrap();
        let intensity: Vec<f64> = (0..30).map(|k| (k % 7) as f64).collect();
        let pts = scatter_points(&intensity, tracts.tracts(), seed).unwrap();
        let locs: Vec<PlanarPoint> = pts.iter().map(|p| p.location).collect();
        let a = assign_points_to_tracts(&locs, None, &tracts, "n").unwrap();
        prop_assert_eq!(a.unassigned, 0);
        for (p, t) in pts.iter().zip(&a.tract_of) {
            prop_assert_eq!(*t, Some(p.source));
        }
        for (k, &v) in intensity.iter().enumerate() {
            if v == 0.0 {
                prop_assert_eq!(a.vector.values()[k], 0.0);
            }
        }
    }
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let (w, x) = cloud(5, 200);
    let inf = Inference::random(999, 17);
    let runs: Vec<_> = [1, 2, 5]
        .iter()
        .map(|&t| pool(t).install(|| (global_moran(&x, &w, &inf).unwrap(), local_moran(&x, &w, &inf, 0.05).unwrap())))
        .collect();
    for r in &runs[1..] {
        assert_eq!(r.0, runs[0].0);
        assert_eq!(r.1, runs[0].1);
    }
}

#[test]
fn sar_without_dependence_is_the_noise() {
    let spec = GridSpec::centered(10, 10, 100.0);
    let w = rook_weights(&spec).unwrap();
    let a = simulate_sar(&w, &SarSpec { rho: 0.0, noise_sd: 2.0, seed: 3 }).unwrap();
    let b = simulate_sar(&w, &SarSpec { rho: 0.0, noise_sd: 1.0, seed: 3 }).unwrap();
    // same draws, scaled
    for (u, v) in a.iter().zip(&b) {
        assert_eq!(*u, 2.0 * v);
    }
    assert_eq!(a, simulate_sar(&w, &SarSpec { rho: 0.0, noise_sd: 2.0, seed: 3 }).unwrap());
}

#[test]
fn sar_solution_satisfies_its_equation() {
    let spec = GridSpec::centered(12, 12, 100.0);
    let w = rook_weights(&spec).unwrap();
    let x = simulate_sar(&w, &SarSpec { rho: 0.7, noise_sd: 1.0, seed: 8 }).unwrap();
    let eps = simulate_sar(&w, &SarSpec { rho: 0.0, noise_sd: 1.0, seed: 8 }).unwrap();
    for i in 0..x.len() {
        let lag: f64 = w.neighbors(i).iter().map(|&(j, v)| v * x[j]).sum();
        assert!((x[i] - 0.7 * lag - eps[i]).abs() < 1e-9);
    }
}

#[test]
fn positive_dependence_raises_moran_on_matched_seeds() {
    let spec = GridSpec::centered(20, 20, 100.0);
    let w = rook_weights(&spec).unwrap();
    let mean_i = |rho: f64| {
        (0..100)
            .map(|s| {
                let x = simulate_sar(&w, &SarSpec { rho, noise_sd: 1.0, seed: s }).unwrap();
                global_moran(&x, &w, &Inference::random(99, s)).unwrap().statistic
            })
            .sum::<f64>()
            / 100.0
    };
    assert!(mean_i(0.5) > mean_i(0.0));
}

#[test]
fn scatter_counts_average_to_intensity() {
    let spec = GridSpec::centered(2, 2, 100.0);
    let tracts = TractSet::new(GeoPoint { lon: 2.0, lat: 41.0 }, generate_grid_tracts(&spec, None).unwrap()).unwrap();
    let intensity = [0.5, 3.0, 12.0, 40.0];
    let seeds = 100;
    let mut sums = [0.0; 4];
    for seed in 0..seeds {
        for p in scatter_points(&intensity, tracts.tracts(), seed).unwrap() {
            sums[p.source] += 1.0;
        }
    }
    for (k, &v) in intensity.iter().enumerate() {
        let mean = sums[k] / seeds as f64;
        // Poisson: standard error of the mean is sqrt(v / seeds)
        assert!((mean - v).abs() < 3.0 * (v / seeds as f64).sqrt(), "tract {k}: {mean} vs {v}");
    }
}

#[test]
fn listings_csv_round_trips() {
    let city = SyntheticCity::generate(CityConfig::default()).unwrap();
    let mut buf = Vec::new();
    write_listings(&mut buf, &city.listings).unwrap();
    let parsed = parse_listings(buf.as_slice(), true).unwrap();
    assert!(parsed.errors.is_empty());
    assert_eq!(parsed.records, city.listings);
}

#[test]
fn tract_geojson_round_trip_preserves_geometry() {
    let city = SyntheticCity::generate(CityConfig::default()).unwrap();
    let mut buf = Vec::new();
    city.tracts.write_geojson(&mut buf, None).unwrap();
    let back = TractSet::from_geojson(buf.as_slice()).unwrap();
    assert_eq!(back.ids(), city.tracts.ids());
    for (a, b) in back.tracts().iter().zip(city.tracts.tracts()) {
        assert_eq!(a.population, b.population);
        // 7 decimal degrees are about a centimeter
        assert!((a.geometry.area_hectares() - b.geometry.area_hectares()).abs() < 1e-3);
        let (ca, cb) = (unproject(a.centroid(), back.origin()), unproject(b.centroid(), city.tracts.origin()));
        assert!((ca.lon - cb.lon).abs() < 1e-7 && (ca.lat - cb.lat).abs() < 1e-7);
    }
}
