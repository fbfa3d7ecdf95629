//! Sparse spatial weights.
//!
//! The main constructor is an inverse-distance band over tract centroids:
//! every pair of observations closer than the band radius (edge included)
//! interacts with weight `1 / d^power`. Observations with no neighbor in
//! the band are islands. Weights are stored raw and row-standardized on
//! request.

use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geo::PlanarPoint;
use crate::grid::GridIndex;

pub const DEFAULT_RADIUS_M: f64 = 1000.0;
pub const DEFAULT_POWER: f64 = 1.0;

/// Distances below this are clamped, so coincident centroids get finite weights.
pub const MIN_DISTANCE_M: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistanceBand {
    pub radius: f64,
    pub power: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpatialWeights {
    n: usize,
    neighbors: Vec<Vec<(usize, f64)>>,
    row_standardized: bool,
    islands: Vec<usize>,
    s0: f64,
    band: Option<DistanceBand>,
}

impl SpatialWeights {
    /// Builds weights from explicit neighbor lists. Lists are sorted by
    /// neighbor index; self-pairs, duplicates and non-positive weights
    /// are rejected.
    pub fn from_neighbors(mut neighbors: Vec<Vec<(usize, f64)>>, row_standardized: bool) -> Result<Self> {
        let n = neighbors.len();
        for (i, row) in neighbors.iter_mut().enumerate() {
            row.sort_by_key(|&(j, _)| j);
            for k in 0..row.len() {
                let (j, w) = row[k];
                if j >= n {
                    return Err(Error::InvalidWeights(format!("row {i}: neighbor {j} out of range")));
                }
                if j == i {
                    return Err(Error::InvalidWeights(format!("row {i}: self-neighbor")));
                }
                if !(w.is_finite() && w > 0.0) {
                    return Err(Error::InvalidWeights(format!("row {i}: weight {w} must be positive")));
                }
                if k > 0 && row[k - 1].0 == j {
                    return Err(Error::InvalidWeights(format!("row {i}: duplicate neighbor {j}")));
                }
            }
            if row_standardized && !row.is_empty() {
                let sum: f64 = row.iter().map(|&(_, w)| w).sum();
                if (sum - 1.0).abs() > 1e-12 {
                    return Err(Error::InvalidWeights(format!("row {i} sums to {sum}, not 1")));
                }
            }
        }
        Ok(Self::assemble(neighbors, row_standardized, None))
    }

    fn assemble(neighbors: Vec<Vec<(usize, f64)>>, row_standardized: bool, band: Option<DistanceBand>) -> Self {
        let islands = neighbors.iter().enumerate().filter(|(_, r)| r.is_empty()).map(|(i, _)| i).collect();
        let s0 = if row_standardized {
            neighbors.iter().filter(|r| !r.is_empty()).count() as f64
        } else {
            crate::stats::compensated_sum(neighbors.iter().flatten().map(|&(_, w)| w))
        };
        SpatialWeights { n: neighbors.len(), neighbors, row_standardized, islands, s0, band }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn neighbors(&self, i: usize) -> &[(usize, f64)] {
        &self.neighbors[i]
    }

    pub fn rows(&self) -> &[Vec<(usize, f64)>] {
        &self.neighbors
    }

    pub fn is_row_standardized(&self) -> bool {
        self.row_standardized
    }

    pub fn islands(&self) -> &[usize] {
        &self.islands
    }

    pub fn is_island(&self, i: usize) -> bool {
        self.neighbors[i].is_empty()
    }

    /// Sum of all weights.
    pub fn s0(&self) -> f64 {
        self.s0
    }

    pub fn band(&self) -> Option<DistanceBand> {
        self.band
    }

    pub fn nnz(&self) -> usize {
        self.neighbors.iter().map(Vec::len).sum()
    }

    /// Divides every non-island row by its sum. Already standardized
    /// weights are returned unchanged.
    pub fn row_standardize(&self) -> SpatialWeights {
        if self.row_standardized {
            return self.clone();
        }
        let neighbors = self
            .neighbors
            .iter()
            .map(|row| {
                let sum = crate::stats::compensated_sum(row.iter().map(|&(_, w)| w));
                row.iter().map(|&(j, w)| (j, w / sum)).collect()
            })
            .collect();
        Self::assemble(neighbors, true, self.band)
    }

    /// `i,j,weight` triplets.
    pub fn write_triplets<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["i", "j", "weight"])?;
        for (i, row) in self.neighbors.iter().enumerate() {
            for &(j, wij) in row {
                w.write_record([i.to_string(), j.to_string(), wij.to_string()])?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn header(&self) -> WeightsHeader {
        WeightsHeader {
            n: self.n,
            radius: self.band.map(|b| b.radius),
            power: self.band.map(|b| b.power),
            row_standardized: self.row_standardized,
            islands: self.islands.clone(),
        }
    }

    pub fn write_header<W: Write>(&self, out: W) -> Result<()> {
        serde_json::to_writer_pretty(out, &self.header())?;
        Ok(())
    }

    /// Reloads weights written by [`write_triplets`](Self::write_triplets)
    /// and [`write_header`](Self::write_header).
    pub fn read<R1: Read, R2: Read>(header: R1, triplets: R2) -> Result<SpatialWeights> {
        let header: WeightsHeader = serde_json::from_reader(header)?;
        let mut neighbors = vec![Vec::new(); header.n];
        let mut rdr = csv::Reader::from_reader(triplets);
        for rec in rdr.records() {
            let rec = rec?;
            let line = rec.position().map(|p| p.line()).unwrap_or(0);
            let bad = |what: &str| Error::Row { line, message: format!("malformed {what}") };
            let i: usize = rec.get(0).and_then(|s| s.parse().ok()).ok_or_else(|| bad("i"))?;
            let j: usize = rec.get(1).and_then(|s| s.parse().ok()).ok_or_else(|| bad("j"))?;
            let w: f64 = rec.get(2).and_then(|s| s.parse().ok()).ok_or_else(|| bad("weight"))?;
            if i >= header.n {
                return Err(Error::InvalidWeights(format!("row index {i} out of range")));
            }
            neighbors[i].push((j, w));
        }
        let mut w = SpatialWeights::from_neighbors(neighbors, header.row_standardized)?;
        if let (Some(radius), Some(power)) = (header.radius, header.power) {
            w.band = Some(DistanceBand { radius, power });
        }
        if w.islands != header.islands {
            return Err(Error::InvalidWeights("island list in header does not match triplets".into()));
        }
        Ok(w)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightsHeader {
    pub n: usize,
    pub radius: Option<f64>,
    pub power: Option<f64>,
    pub row_standardized: bool,
    pub islands: Vec<usize>,
}

/// Inverse-distance weights for all pairs with `d <= radius`.
/// Coincident points are treated as 1 m apart.
pub fn inverse_distance_band(centroids: &[PlanarPoint], radius: f64, power: f64) -> Result<SpatialWeights> {
    if centroids.len() < 2 {
        return Err(Error::InsufficientObservations { needed: 2, got: centroids.len() });
    }
    if !(radius.is_finite() && radius > 0.0) {
        return Err(Error::InvalidConfig(format!("radius must be positive, got {radius}")));
    }
    if !power.is_finite() {
        return Err(Error::InvalidConfig(format!("power must be finite, got {power}")));
    }
    let mut index = GridIndex::new(radius);
    for (i, &p) in centroids.iter().enumerate() {
        index.insert_point(i, p);
    }
    let neighbors = centroids
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            let mut row: Vec<(usize, f64)> = index
                .around(*p)
                .filter(|&j| j != i)
                .filter_map(|j| {
                    let d = p.distance(&centroids[j]);
                    (d <= radius).then(|| (j, 1.0 / d.max(MIN_DISTANCE_M).powf(power)))
                })
                .collect();
            row.sort_by_key(|&(j, _)| j);
            row
        })
        .collect();
    Ok(SpatialWeights::assemble(neighbors, false, Some(DistanceBand { radius, power })))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(x: f64, y: f64) -> PlanarPoint {
        PlanarPoint { x, y }
    }

    #[test]
    fn collinear_band_edge_is_inclusive() {
        let w = inverse_distance_band(&[pt(0.0, 0.0), pt(500.0, 0.0), pt(1000.0, 0.0)], 1000.0, 1.0).unwrap();
        assert_eq!(w.neighbors(0), &[(1, 1.0 / 500.0), (2, 1.0 / 1000.0)]);
        assert!(w.islands().is_empty());
        assert!(!w.is_row_standardized());
    }

    #[test]
    fn far_point_is_island() {
        let w = inverse_distance_band(&[pt(0.0, 0.0), pt(100.0, 0.0), pt(1600.0, 0.0)], 1000.0, 1.0).unwrap();
        assert_eq!(w.islands(), &[2]);
        assert!(w.neighbors(2).is_empty());
    }

    #[test]
    fn insufficient_observations() {
        assert!(matches!(
            inverse_distance_band(&[pt(0.0, 0.0)], 1000.0, 1.0),
            Err(Error::InsufficientObservations { needed: 2, got: 1 })
        ));
    }

    #[test]
    fn coincident_points_clamped() {
        let w = inverse_distance_band(&[pt(0.0, 0.0), pt(0.0, 0.0)], 1000.0, 2.0).unwrap();
        assert_eq!(w.neighbors(0), &[(1, 1.0)]);
    }

    #[test]
    fn row_standardization() {
        let w = inverse_distance_band(&[pt(0.0, 0.0), pt(500.0, 0.0), pt(1000.0, 0.0), pt(5000.0, 0.0)], 1000.0, 1.0)
            .unwrap();
        let r = w.row_standardize();
        let row0 = r.neighbors(0);
        assert!((row0[0].1 - 2.0 / 3.0).abs() < 1e-15);
        assert!((row0[1].1 - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(r.islands(), &[3]);
        assert_eq!(r.s0(), 3.0);
        assert_eq!(r.row_standardize(), r);

        let single = inverse_distance_band(&[pt(0.0, 0.0), pt(10.0, 0.0)], 1000.0, 1.0).unwrap().row_standardize();
        assert_eq!(single.neighbors(0), &[(1, 1.0)]);
    }

    #[test]
    fn from_neighbors_validation() {
        assert!(SpatialWeights::from_neighbors(vec![vec![(0, 1.0)], vec![]], false).is_err());
        assert!(SpatialWeights::from_neighbors(vec![vec![(1, -1.0)], vec![]], false).is_err());
        assert!(SpatialWeights::from_neighbors(vec![vec![(1, 0.5)], vec![(0, 1.0)]], true).is_err());
        assert!(SpatialWeights::from_neighbors(vec![vec![(2, 1.0)], vec![]], false).is_err());
    }

    #[test]
    fn serialization_reload_is_exact() {
        let pts: Vec<_> = (0..30).map(|k| pt((k as f64 * 137.3) % 2100.0, (k as f64 * 71.9) % 1900.0)).collect();
        let w = inverse_distance_band(&pts, 700.0, 1.0).unwrap().row_standardize();
        let (mut h, mut t) = (Vec::new(), Vec::new());
        w.write_header(&mut h).unwrap();
        w.write_triplets(&mut t).unwrap();
        let back = SpatialWeights::read(h.as_slice(), t.as_slice()).unwrap();
        assert_eq!(back, w);
    }
}
