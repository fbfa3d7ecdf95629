//! Global and local Moran's I, univariate and bivariate, with permutation
//! inference and LISA cluster labels.
//!
//! Values are standardized to population z-scores over the non-island
//! observations; islands take no part in the moments, in `n`, or in the
//! permutation pools, and are reported with the `Island` label.
//!
//! Pseudo p-values are directional: replicates are counted when they are at
//! least as extreme as the observed statistic on the side of its expected
//! value, `(1 + count) / (permutations + 1)`. With [`Inference::Exhaustive`]
//! every arrangement is enumerated instead and the p-value is exact.

mod global;
mod local;
mod permute;

use std::io::Write;

use serde::Serialize;

pub use global::{bivariate_global_moran, global_moran, MoranResult};
pub use local::{bivariate_local_moran, local_moran, LisaResult, LocalMoran};
pub use permute::MAX_EXHAUSTIVE_POOL;

use crate::error::{Error, Result};
use crate::stats::population_zscores;
use crate::weights::SpatialWeights;

pub const DEFAULT_PERMUTATIONS: usize = 999;
pub const DEFAULT_ALPHA: f64 = 0.05;

/// Relative tolerance under which a replicate ties with the observed value.
pub const TIE_TOLERANCE: f64 = 1e-11;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Inference {
    Random {
        permutations: usize,
        seed: u64,
    },
    /// Enumerate every arrangement of the permutation pool.
    Exhaustive,
}

impl Inference {
    pub fn random(permutations: usize, seed: u64) -> Self {
        Inference::Random { permutations, seed }
    }

    fn seed(&self) -> Option<u64> {
        match self {
            Inference::Random { seed, .. } => Some(*seed),
            Inference::Exhaustive => None,
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            Inference::Random { permutations: 0, .. } => {
                Err(Error::InvalidConfig("at least one permutation is required".into()))
            }
            _ => Ok(()),
        }
    }
}

impl Default for Inference {
    fn default() -> Self {
        Inference::random(DEFAULT_PERMUTATIONS, 0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum ClusterLabel {
    HH,
    LL,
    LH,
    HL,
    NotSignificant,
    Island,
}

impl ClusterLabel {
    pub const ALL: [ClusterLabel; 6] = [
        ClusterLabel::HH,
        ClusterLabel::LL,
        ClusterLabel::LH,
        ClusterLabel::HL,
        ClusterLabel::NotSignificant,
        ClusterLabel::Island,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ClusterLabel::HH => "HH",
            ClusterLabel::LL => "LL",
            ClusterLabel::LH => "LH",
            ClusterLabel::HL => "HL",
            ClusterLabel::NotSignificant => "NS",
            ClusterLabel::Island => "Island",
        }
    }

    /// Quadrant of (own value, spatial lag); zero counts as high.
    pub fn quadrant(z: f64, lag: f64) -> ClusterLabel {
        match (z >= 0.0, lag >= 0.0) {
            (true, true) => ClusterLabel::HH,
            (false, false) => ClusterLabel::LL,
            (false, true) => ClusterLabel::LH,
            (true, false) => ClusterLabel::HL,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterRow {
    pub label: &'static str,
    pub count: usize,
    pub percentage: f64,
}

/// Observation counts per cluster type; islands are reported as `Others`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterTable {
    pub rows: Vec<ClusterRow>,
    pub total: usize,
}

impl ClusterTable {
    pub fn count(&self, label: ClusterLabel) -> usize {
        let name = table_name(label);
        self.rows.iter().find(|r| r.label == name).map_or(0, |r| r.count)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["type", "total", "percentage"])?;
        for r in &self.rows {
            w.write_record([r.label.to_string(), r.count.to_string(), format!("{:.1}", r.percentage)])?;
        }
        w.write_record(["Total".to_string(), self.total.to_string(), "100.0".to_string()])?;
        w.flush()?;
        Ok(())
    }
}

fn table_name(label: ClusterLabel) -> &'static str {
    match label {
        ClusterLabel::NotSignificant => "Not Significant",
        ClusterLabel::Island => "Others",
        other => other.as_str(),
    }
}

pub fn cluster_table(results: &[LisaResult]) -> ClusterTable {
    let total = results.len();
    let rows = ClusterLabel::ALL
        .iter()
        .map(|&label| {
            let count = results.iter().filter(|r| r.label == label).count();
            let percentage = if total == 0 { 0.0 } else { 100.0 * count as f64 / total as f64 };
            ClusterRow { label: table_name(label), count, percentage }
        })
        .collect();
    ClusterTable { rows, total }
}

/// Standardized field over the non-island observations.
#[derive(Debug, Clone)]
pub(crate) struct Standardized {
    /// Non-island observation indices, ascending.
    pub active: Vec<usize>,
    /// Z-score per observation; zero at islands.
    pub z: Vec<f64>,
}

pub(crate) fn active_set(w: &SpatialWeights, len: usize) -> Result<Vec<usize>> {
    if len != w.n() {
        return Err(Error::Alignment(format!("{len} values for {} weight rows", w.n())));
    }
    let active: Vec<usize> = (0..w.n()).filter(|&i| !w.is_island(i)).collect();
    if active.is_empty() {
        return Err(Error::DegenerateWeights("every observation is an island".into()));
    }
    if active.len() < 3 {
        return Err(Error::InsufficientObservations { needed: 3, got: active.len() });
    }
    for &i in &active {
        if let Some(&(j, _)) = w.neighbors(i).iter().find(|&&(j, _)| w.is_island(j)) {
            return Err(Error::InvalidWeights(format!(
                "observation {i} lists {j} as a neighbor, but {j} has no neighbors"
            )));
        }
    }
    Ok(active)
}

pub(crate) fn standardize(values: &[f64], active: &[usize], what: &str) -> Result<Standardized> {
    if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
        return Err(Error::InvalidConfig(format!("{what} contains a non-finite value {bad}")));
    }
    let sub: Vec<f64> = active.iter().map(|&i| values[i]).collect();
    let zs = population_zscores(&sub, what)?;
    let mut z = vec![0.0; values.len()];
    for (&i, zi) in active.iter().zip(zs) {
        z[i] = zi;
    }
    Ok(Standardized { active: active.to_vec(), z })
}

/// Counts replicates at least as extreme as `observed` on its side of `expected`.
pub(crate) fn count_extreme(replicates: impl Iterator<Item = f64>, observed: f64, expected: f64) -> usize {
    let tol = TIE_TOLERANCE * observed.abs().max(1.0);
    if observed >= expected {
        replicates.filter(|&r| r >= observed - tol).count()
    } else {
        replicates.filter(|&r| r <= observed + tol).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn obs(label: ClusterLabel) -> LisaResult {
        LisaResult { local_i: Some(0.0), pseudo_p: Some(0.5), z: Some(0.0), lag: Some(0.0), label }
    }

    #[test]
    fn table_all_hh() {
        let t = cluster_table(&vec![obs(ClusterLabel::HH); 4]);
        assert_eq!(t.count(ClusterLabel::HH), 4);
        assert_eq!(t.rows[0].percentage, 100.0);
        assert_eq!(t.total, 4);
    }

    #[test]
    fn table_mixed_percentages() {
        let t = cluster_table(&[
            obs(ClusterLabel::HH),
            obs(ClusterLabel::LL),
            obs(ClusterLabel::NotSignificant),
            obs(ClusterLabel::NotSignificant),
        ]);
        let pct: Vec<f64> = t.rows.iter().map(|r| r.percentage).collect();
        assert_eq!(pct, vec![25.0, 25.0, 0.0, 0.0, 50.0, 0.0]);
        assert_eq!(t.rows.iter().map(|r| r.count).sum::<usize>(), t.total);
    }

    #[test]
    fn quadrants() {
        assert_eq!(ClusterLabel::quadrant(1.0, 2.0), ClusterLabel::HH);
        assert_eq!(ClusterLabel::quadrant(-1.0, -2.0), ClusterLabel::LL);
        assert_eq!(ClusterLabel::quadrant(-1.0, 2.0), ClusterLabel::LH);
        assert_eq!(ClusterLabel::quadrant(1.0, -2.0), ClusterLabel::HL);
    }

    #[test]
    fn extremes_follow_direction() {
        let reps = [0.1, 0.5, 0.9, -0.3];
        assert_eq!(count_extreme(reps.iter().copied(), 0.5, 0.0), 2);
        assert_eq!(count_extreme(reps.iter().copied(), -0.2, 0.0), 1);
    }
}
