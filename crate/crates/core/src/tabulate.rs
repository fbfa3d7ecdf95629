//! Aggregation of point records to tracts and per-tract derived fields.

use std::collections::BTreeSet;
use std::io::{Read, Write};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geo::PlanarPoint;
use crate::grid::GridIndex;
use crate::ingest::Listing;
use crate::stats::{compensated_sum, population_zscores};
use crate::tracts::TractSet;

/// Bin size of the point-location index.
pub const LOCATOR_CELL_M: f64 = 200.0;

/// Default population-density floor for pressure ratios (inhabitants/ha).
pub const DEFAULT_MIN_DENSITY: f64 = 5.0;

/// A per-tract numeric field aligned with a tract set's order.
#[derive(Debug, Clone, PartialEq)]
pub struct VariableVector {
    pub name: String,
    pub units: String,
    tract_ids: Vec<String>,
    values: Vec<f64>,
}

impl VariableVector {
    pub fn new(
        name: impl Into<String>,
        units: impl Into<String>,
        tract_ids: Vec<String>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if tract_ids.len() != values.len() {
            return Err(Error::Alignment(format!("{} ids for {} values", tract_ids.len(), values.len())));
        }
        Ok(VariableVector { name: name.into(), units: units.into(), tract_ids, values })
    }

    pub fn for_tracts(
        name: impl Into<String>,
        units: impl Into<String>,
        tracts: &TractSet,
        values: Vec<f64>,
    ) -> Result<Self> {
        Self::new(name, units, tracts.ids(), values)
    }

    pub fn tract_ids(&self) -> &[String] {
        &self.tract_ids
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn check_aligned(&self, tracts: &TractSet) -> Result<()> {
        let same = self.len() == tracts.len() && self.tract_ids.iter().zip(tracts.tracts()).all(|(a, t)| *a == t.id);
        if same {
            Ok(())
        } else {
            Err(Error::Alignment(format!("`{}` is not aligned with the tract set", self.name)))
        }
    }

    fn check_aligned_with(&self, other: &VariableVector) -> Result<()> {
        if self.tract_ids != other.tract_ids {
            return Err(Error::Alignment(format!("`{}` and `{}` have different tract ids", self.name, other.name)));
        }
        Ok(())
    }

    fn map_values(&self, name: impl Into<String>, units: impl Into<String>, values: Vec<f64>) -> VariableVector {
        VariableVector { name: name.into(), units: units.into(), tract_ids: self.tract_ids.clone(), values }
    }

    /// `tract_id,value` CSV.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["tract_id", "value"])?;
        for (id, v) in self.tract_ids.iter().zip(&self.values) {
            w.write_record([id.as_str(), &v.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R, name: impl Into<String>, units: impl Into<String>) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(input);
        let headers = rdr.headers()?.clone();
        if headers.iter().collect::<Vec<_>>() != ["tract_id", "value"] {
            return Err(Error::Schema("expected header `tract_id,value`".into()));
        }
        let (mut ids, mut values) = (Vec::new(), Vec::new());
        for rec in rdr.records() {
            let rec = rec?;
            let line = rec.position().map(|p| p.line()).unwrap_or(0);
            let v: f64 = rec[1]
                .trim()
                .parse()
                .map_err(|_| Error::Row { line, message: format!("value {:?} is not a number", &rec[1]) })?;
            ids.push(rec[0].to_string());
            values.push(v);
        }
        Self::new(name, units, ids, values)
    }
}

/// Locates points in tracts through a uniform bin index over tract bounds.
pub struct TractLocator<'a> {
    tracts: &'a TractSet,
    index: GridIndex,
}

impl<'a> TractLocator<'a> {
    pub fn new(tracts: &'a TractSet) -> Self {
        let mut index = GridIndex::new(LOCATOR_CELL_M);
        for (i, t) in tracts.tracts().iter().enumerate() {
            index.insert_bounds(i, &t.geometry.bounds());
        }
        TractLocator { tracts, index }
    }

    /// Index of the containing tract; ties on shared edges go to the
    /// lexicographically smallest tract id.
    pub fn locate(&self, p: PlanarPoint) -> Option<usize> {
        let tracts = self.tracts.tracts();
        self.index
            .bin(self.index.cell_of(p))
            .iter()
            .copied()
            .filter(|&i| tracts[i].geometry.contains(p))
            .min_by(|&a, &b| tracts[a].id.cmp(&tracts[b].id))
    }

    pub fn locate_all(&self, points: &[PlanarPoint]) -> Vec<Option<usize>> {
        points.par_iter().map(|&p| self.locate(p)).collect()
    }
}

#[derive(Debug, Clone)]
pub struct Assignment {
    pub vector: VariableVector,
    pub unassigned: usize,
    /// Containing tract for each input point.
    pub tract_of: Vec<Option<usize>>,
}

impl Assignment {
    pub fn assigned(&self) -> usize {
        self.tract_of.len() - self.unassigned
    }
}

/// Counts points per tract, or sums `weights` when given.
pub fn assign_points_to_tracts(
    points: &[PlanarPoint],
    weights: Option<&[f64]>,
    tracts: &TractSet,
    name: &str,
) -> Result<Assignment> {
    if let Some(w) = weights {
        if w.len() != points.len() {
            return Err(Error::Alignment(format!("{} weights for {} points", w.len(), points.len())));
        }
    }
    let tract_of = TractLocator::new(tracts).locate_all(points);
    let mut values = vec![0.0; tracts.len()];
    let mut unassigned = 0;
    for (k, slot) in tract_of.iter().enumerate() {
        match slot {
            Some(i) => values[*i] += weights.map_or(1.0, |w| w[k]),
            None => unassigned += 1,
        }
    }
    let units = if weights.is_some() { "sum" } else { "count" };
    Ok(Assignment { vector: VariableVector::for_tracts(name, units, tracts, values)?, unassigned, tract_of })
}

pub fn density_per_hectare(v: &VariableVector, tracts: &TractSet) -> Result<VariableVector> {
    v.check_aligned(tracts)?;
    let values = v.values.iter().zip(tracts.tracts()).map(|(x, t)| x / t.area_ha).collect();
    Ok(v.map_values(format!("{}_per_ha", v.name), format!("{}/ha", v.units), values))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DescriptiveStats {
    pub count: usize,
    pub minimum: f64,
    pub maximum: f64,
    pub sum: f64,
    pub mean: f64,
    /// Sample standard deviation (n - 1); zero for a single value.
    pub standard_deviation: f64,
    /// Coefficient of variation in percent; `None` when the mean is zero.
    pub cv: Option<f64>,
}

pub fn descriptive_stats(values: &[f64]) -> Result<DescriptiveStats> {
    if values.is_empty() {
        return Err(Error::EmptyInput("descriptive statistics of an empty field"));
    }
    // Welford's update
    let (mut mean, mut m2) = (0.0_f64, 0.0_f64);
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for (k, &x) in values.iter().enumerate() {
        let delta = x - mean;
        mean += delta / (k + 1) as f64;
        m2 += delta * (x - mean);
        lo = lo.min(x);
        hi = hi.max(x);
    }
    let n = values.len();
    let sd = if n > 1 { (m2 / (n - 1) as f64).sqrt() } else { 0.0 };
    Ok(DescriptiveStats {
        count: n,
        minimum: lo,
        maximum: hi,
        sum: compensated_sum(values.iter().copied()),
        mean,
        standard_deviation: sd,
        cv: (mean != 0.0).then(|| 100.0 * sd / mean),
    })
}

/// Z-score normalization with the population standard deviation.
pub fn normalize(v: &VariableVector) -> Result<VariableVector> {
    let z = population_zscores(&v.values, &v.name)?;
    Ok(v.map_values(v.name.clone(), "z", z))
}

/// `hotels_norm - airbnb_norm`: positive where hotels predominate.
pub fn difference_map(hotels_norm: &VariableVector, airbnb_norm: &VariableVector) -> Result<VariableVector> {
    hotels_norm.check_aligned_with(airbnb_norm)?;
    let values = hotels_norm.values.iter().zip(&airbnb_norm.values).map(|(a, b)| a - b).collect();
    Ok(hotels_norm.map_values(format!("{}_minus_{}", hotels_norm.name, airbnb_norm.name), "z", values))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OccupancyComparison {
    pub center_mean: Option<f64>,
    pub rest_mean: Option<f64>,
    pub center_listings: usize,
    pub rest_listings: usize,
}

/// Mean reviews per month inside the center tracts versus the remaining
/// tracts. Listings without a rate or outside every tract are ignored.
pub fn occupancy_proxy_comparison(
    listings: &[Listing],
    tracts: &TractSet,
    center_tract_ids: &BTreeSet<String>,
) -> Result<OccupancyComparison> {
    for id in center_tract_ids {
        if tracts.index_of(id).is_none() {
            return Err(Error::Alignment(format!("center tract {id:?} is not in the tract set")));
        }
    }
    let locator = TractLocator::new(tracts);
    let (mut center, mut rest) = (Vec::new(), Vec::new());
    for l in listings {
        let Some(rate) = l.reviews_per_month else { continue };
        let Ok(p) = tracts.project(l.location) else { continue };
        if let Some(i) = locator.locate(p) {
            if center_tract_ids.contains(&tracts.tracts()[i].id) {
                center.push(rate);
            } else {
                rest.push(rate);
            }
        }
    }
    let mean = |v: &[f64]| (!v.is_empty()).then(|| compensated_sum(v.iter().copied()) / v.len() as f64);
    Ok(OccupancyComparison {
        center_mean: mean(&center),
        rest_mean: mean(&rest),
        center_listings: center.len(),
        rest_listings: rest.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ExclusionReason {
    ZeroPopulation,
    LowDensity,
}

impl ExclusionReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            ExclusionReason::ZeroPopulation => "zero_population",
            ExclusionReason::LowDensity => "low_density",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PressureRow {
    pub tract_id: String,
    /// Places per 1,000 inhabitants; `None` when excluded.
    pub ratio: Option<f64>,
    pub exclusion: Option<ExclusionReason>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PressureResult {
    pub rows: Vec<PressureRow>,
}

impl PressureResult {
    /// `tract_id,ratio,excluded,reason` CSV.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["tract_id", "ratio", "excluded", "reason"])?;
        for r in &self.rows {
            w.write_record([
                r.tract_id.clone(),
                r.ratio.map(|x| x.to_string()).unwrap_or_default(),
                r.exclusion.is_some().to_string(),
                r.exclusion.map(|e| e.as_str().to_string()).unwrap_or_default(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn pressure_ratio(places: &VariableVector, tracts: &TractSet, min_density: f64) -> Result<PressureResult> {
    places.check_aligned(tracts)?;
    let rows = places
        .values
        .iter()
        .zip(tracts.tracts())
        .map(|(&p, t)| {
            let exclusion = if t.population == 0 {
                Some(ExclusionReason::ZeroPopulation)
            } else if t.population_density() < min_density {
                Some(ExclusionReason::LowDensity)
            } else {
                None
            };
            PressureRow {
                tract_id: t.id.clone(),
                ratio: exclusion.is_none().then(|| 1000.0 * p / t.population as f64),
                exclusion,
            }
        })
        .collect();
    Ok(PressureResult { rows })
}
