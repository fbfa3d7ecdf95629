//! Independent reference implementations used by the integration tests.
//! Nothing here calls into the statistics engine; they are deliberately
//! naive so that agreement means something.
#![allow(dead_code)]

use itertools::Itertools;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tourism_esda::geo::PlanarPoint;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Winding number of a closed ring around `p`; nonzero means inside.
pub fn winding_number(ring: &[PlanarPoint], p: PlanarPoint) -> i32 {
    let mut wn = 0;
    let n = ring.len();
    for k in 0..n {
        let a = ring[k];
        let b = ring[(k + 1) % n];
        let cross = (b.x - a.x) * (p.y - a.y) - (p.x - a.x) * (b.y - a.y);
        if a.y <= p.y {
            if b.y > p.y && cross > 0.0 {
                wn += 1;
            }
        } else if b.y <= p.y && cross < 0.0 {
            wn -= 1;
        }
    }
    wn
}

pub fn segment_distance(p: PlanarPoint, a: PlanarPoint, b: PlanarPoint) -> f64 {
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    let len2 = dx * dx + dy * dy;
    let t = if len2 == 0.0 { 0.0 } else { (((p.x - a.x) * dx + (p.y - a.y) * dy) / len2).clamp(0.0, 1.0) };
    ((p.x - a.x - t * dx).powi(2) + (p.y - a.y - t * dy).powi(2)).sqrt()
}

pub fn ring_distance(ring: &[PlanarPoint], p: PlanarPoint) -> f64 {
    (0..ring.len()).map(|k| segment_distance(p, ring[k], ring[(k + 1) % ring.len()])).fold(f64::INFINITY, f64::min)
}

/// Star-shaped simple polygon around `center`: vertices at sorted angles.
pub fn star_polygon(
    rng: &mut ChaCha8Rng,
    center: PlanarPoint,
    vertices: usize,
    r_min: f64,
    r_max: f64,
) -> Vec<PlanarPoint> {
    let mut angles: Vec<f64> = (0..vertices).map(|_| rng.random_range(0.0..std::f64::consts::TAU)).collect();
    angles.sort_by(f64::total_cmp);
    angles.dedup_by(|a, b| (*a - *b).abs() < 1e-3);
    angles
        .iter()
        .map(|&t| {
            let r = rng.random_range(r_min..r_max);
            PlanarPoint { x: center.x + r * t.cos(), y: center.y + r * t.sin() }
        })
        .collect()
}

/// Dense row-standardized inverse-distance band matrix by brute force.
pub fn dense_band_weights(points: &[PlanarPoint], radius: f64, power: f64) -> Vec<Vec<f64>> {
    let n = points.len();
    let mut w = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let d = ((points[i].x - points[j].x).powi(2) + (points[i].y - points[j].y).powi(2)).sqrt();
            if d <= radius {
                w[i][j] = 1.0 / d.max(1.0).powf(power);
            }
        }
        let s: f64 = w[i].iter().sum();
        if s > 0.0 {
            for v in w[i].iter_mut() {
                *v /= s;
            }
        }
    }
    w
}

pub fn dense_from_rows(n: usize, rows: &[Vec<(usize, f64)>]) -> Vec<Vec<f64>> {
    let mut w = vec![vec![0.0; n]; n];
    for (i, r) in rows.iter().enumerate() {
        for &(j, v) in r {
            w[i][j] = v;
        }
    }
    w
}

fn is_island(w: &[Vec<f64>], i: usize) -> bool {
    w[i].iter().all(|&v| v == 0.0)
}

/// Population z-scores over non-islands, zero at islands (two-pass).
pub fn dense_z(w: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    let active: Vec<usize> = (0..x.len()).filter(|&i| !is_island(w, i)).collect();
    let m = active.len() as f64;
    let mean = active.iter().map(|&i| x[i]).sum::<f64>() / m;
    let var = active.iter().map(|&i| (x[i] - mean).powi(2)).sum::<f64>() / m;
    let sd = var.sqrt();
    (0..x.len()).map(|i| if is_island(w, i) { 0.0 } else { (x[i] - mean) / sd }).collect()
}

/// `(m / S0) * sum_ij w_ij zx_i zy_j / sqrt(sum zx^2 * sum zy^2)` by double loop.
pub fn dense_moran_z(w: &[Vec<f64>], zx: &[f64], zy: &[f64]) -> f64 {
    let n = zx.len();
    let m = (0..n).filter(|&i| !is_island(w, i)).count() as f64;
    let mut s0 = 0.0;
    let mut num = 0.0;
    for i in 0..n {
        for j in 0..n {
            s0 += w[i][j];
            num += w[i][j] * zx[i] * zy[j];
        }
    }
    let sxx: f64 = zx.iter().map(|v| v * v).sum();
    let syy: f64 = zy.iter().map(|v| v * v).sum();
    m / s0 * num / (sxx * syy).sqrt()
}

pub fn dense_moran(w: &[Vec<f64>], x: &[f64], y: &[f64]) -> f64 {
    dense_moran_z(w, &dense_z(w, x), &dense_z(w, y))
}

pub fn dense_local(w: &[Vec<f64>], x: &[f64], y: &[f64]) -> Vec<f64> {
    let zx = dense_z(w, x);
    let zy = dense_z(w, y);
    (0..x.len()).map(|i| zx[i] * (0..x.len()).map(|j| w[i][j] * zy[j]).sum::<f64>()).collect()
}

/// Directional extreme count used by the permutation tests.
pub fn directional_count(reps: &[f64], observed: f64, expected: f64) -> usize {
    let tol = 1e-11 * observed.abs().max(1.0);
    if observed >= expected {
        reps.iter().filter(|&&r| r >= observed - tol).count()
    } else {
        reps.iter().filter(|&&r| r <= observed + tol).count()
    }
}

/// Exact global p-value: every arrangement of `y` over the non-island
/// positions, identity included. `univariate` permutes both sides together.
pub fn exact_global_p(w: &[Vec<f64>], x: &[f64], y: &[f64], univariate: bool) -> f64 {
    let n = x.len();
    let active: Vec<usize> = (0..n).filter(|&i| !is_island(w, i)).collect();
    let zx = dense_z(w, x);
    let zy = dense_z(w, y);
    let observed = dense_moran_z(w, &zx, &zy);
    let m = active.len() as f64;
    let mut reps = Vec::new();
    for perm in active.iter().permutations(active.len()) {
        let mut zp = vec![0.0; n];
        for (&slot, &&src) in active.iter().zip(&perm) {
            zp[slot] = zy[src];
        }
        let zxp = if univariate { zp.clone() } else { zx.clone() };
        reps.push(dense_moran_z(w, &zxp, &zp));
    }
    directional_count(&reps, observed, -1.0 / (m - 1.0)) as f64 / reps.len() as f64
}

/// Exact conditional p-value of observation `i`: every arrangement of the
/// other non-island `y` values over their positions, `x_i` held fixed.
pub fn exact_local_p(w: &[Vec<f64>], x: &[f64], y: &[f64], i: usize) -> f64 {
    let n = x.len();
    let zx = dense_z(w, x);
    let zy = dense_z(w, y);
    let others: Vec<usize> = (0..n).filter(|&j| j != i && !is_island(w, j)).collect();
    let observed = zx[i] * (0..n).map(|j| w[i][j] * zy[j]).sum::<f64>();
    let wi: f64 = w[i].iter().sum();
    let expected = -zx[i] * zy[i] * wi / others.len() as f64;
    let mut reps = Vec::new();
    for perm in others.iter().permutations(others.len()) {
        let mut lag = 0.0;
        for (&slot, &&src) in others.iter().zip(&perm) {
            lag += w[i][slot] * zy[src];
        }
        reps.push(zx[i] * lag);
    }
    directional_count(&reps, observed, expected) as f64 / reps.len() as f64
}

pub fn random_points(rng: &mut ChaCha8Rng, n: usize, extent: f64) -> Vec<PlanarPoint> {
    (0..n).map(|_| PlanarPoint { x: rng.random_range(0.0..extent), y: rng.random_range(0.0..extent) }).collect()
}

pub fn normal_field(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    use rand_distr::{Distribution, StandardNormal};
    (0..n).map(|_| StandardNormal.sample(rng)).collect()
}
