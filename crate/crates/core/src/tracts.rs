//! Census tracts and their GeoJSON representation.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::io::{Read, Write};

use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::geo::{project, unproject, Bounds, GeoPoint, MultiPolygon, PlanarPoint, Polygon};

#[derive(Debug, Clone)]
pub struct Tract {
    pub id: String,
    pub geometry: MultiPolygon,
    pub population: u64,
    pub area_ha: f64,
}

impl Tract {
    /// Builds a tract; `area_ha` defaults to the geometric area.
    pub fn new(id: impl Into<String>, geometry: MultiPolygon, population: u64, area_ha: Option<f64>) -> Result<Self> {
        let id = id.into();
        let area_ha = area_ha.unwrap_or_else(|| geometry.area_hectares());
        if !(area_ha.is_finite() && area_ha > 0.0) {
            return Err(Error::InvalidGeometry(format!("tract {id}: area_ha must be positive, got {area_ha}")));
        }
        Ok(Tract { id, geometry, population, area_ha })
    }

    pub fn centroid(&self) -> PlanarPoint {
        self.geometry.centroid()
    }

    pub fn population_density(&self) -> f64 {
        self.population as f64 / self.area_ha
    }
}

/// An ordered collection of tracts sharing one projection origin.
#[derive(Debug, Clone)]
pub struct TractSet {
    origin: GeoPoint,
    tracts: Vec<Tract>,
}

impl TractSet {
    pub fn new(origin: GeoPoint, tracts: Vec<Tract>) -> Result<Self> {
        if tracts.is_empty() {
            return Err(Error::InvalidTractSet("no tracts".into()));
        }
        let mut seen = HashSet::with_capacity(tracts.len());
        for t in &tracts {
            if !seen.insert(t.id.as_str()) {
                return Err(Error::InvalidTractSet(format!("duplicate tract id {:?}", t.id)));
            }
        }
        Ok(TractSet { origin, tracts })
    }

    pub fn origin(&self) -> GeoPoint {
        self.origin
    }

    pub fn tracts(&self) -> &[Tract] {
        &self.tracts
    }

    pub fn len(&self) -> usize {
        self.tracts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tracts.is_empty()
    }

    pub fn ids(&self) -> Vec<String> {
        self.tracts.iter().map(|t| t.id.clone()).collect()
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.tracts.iter().position(|t| t.id == id)
    }

    pub fn centroids(&self) -> Vec<PlanarPoint> {
        self.tracts.iter().map(Tract::centroid).collect()
    }

    pub fn bounds(&self) -> Bounds {
        self.tracts[1..].iter().fold(self.tracts[0].geometry.bounds(), |b, t| b.union(&t.geometry.bounds()))
    }

    pub fn project(&self, p: GeoPoint) -> Result<PlanarPoint> {
        project(p, self.origin)
    }

    /// Reads a FeatureCollection of Polygon/MultiPolygon features carrying
    /// `tract_id`, `population` and optionally `area_ha`. The projection
    /// origin is the center of the bounding box of all vertices.
    pub fn from_geojson<R: Read>(reader: R) -> Result<Self> {
        let doc: Value = serde_json::from_reader(reader)?;
        let features = doc
            .get("features")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Schema("GeoJSON document has no `features` array".into()))?;

        let mut parsed = Vec::with_capacity(features.len());
        for (k, feature) in features.iter().enumerate() {
            let props = feature
                .get("properties")
                .and_then(Value::as_object)
                .ok_or_else(|| Error::Schema(format!("feature {k}: missing properties")))?;
            let id = match props.get("tract_id") {
                Some(Value::String(s)) => s.clone(),
                _ => return Err(Error::Schema(format!("feature {k}: `tract_id` must be a string"))),
            };
            let population = props
                .get("population")
                .and_then(Value::as_u64)
                .ok_or_else(|| Error::Schema(format!("feature {k}: `population` must be a non-negative integer")))?;
            let area_ha = match props.get("area_ha") {
                None | Some(Value::Null) => None,
                Some(v) => {
                    Some(v.as_f64().ok_or_else(|| Error::Schema(format!("feature {k}: `area_ha` must be a number")))?)
                }
            };
            let geometry =
                feature.get("geometry").ok_or_else(|| Error::Schema(format!("feature {k}: missing geometry")))?;
            parsed.push((id, population, area_ha, read_lonlat_parts(geometry, k)?));
        }
        if parsed.is_empty() {
            return Err(Error::InvalidTractSet("feature collection is empty".into()));
        }

        let (mut lo_lon, mut lo_lat, mut hi_lon, mut hi_lat) = (f64::MAX, f64::MAX, f64::MIN, f64::MIN);
        for p in parsed.iter().flat_map(|(.., parts)| parts.iter().flatten().flatten()) {
            lo_lon = lo_lon.min(p.lon);
            lo_lat = lo_lat.min(p.lat);
            hi_lon = hi_lon.max(p.lon);
            hi_lat = hi_lat.max(p.lat);
        }
        let origin = GeoPoint::new((lo_lon + hi_lon) / 2.0, (lo_lat + hi_lat) / 2.0)?;

        let mut tracts = Vec::with_capacity(parsed.len());
        for (id, population, area_ha, parts) in parsed {
            let polys = parts
                .into_iter()
                .map(|rings| {
                    let mut rings = rings
                        .into_iter()
                        .map(|ring| ring.into_iter().map(|p| project(p, origin)).collect::<Result<Vec<_>>>());
                    let exterior =
                        rings.next().ok_or_else(|| Error::InvalidGeometry("polygon without rings".into()))??;
                    let holes = rings.collect::<Result<Vec<_>>>()?;
                    Polygon::new(exterior, holes)
                })
                .collect::<Result<Vec<_>>>()
                .map_err(|e| match e {
                    Error::InvalidGeometry(m) => Error::InvalidGeometry(format!("tract {id}: {m}")),
                    other => other,
                })?;
            tracts.push(Tract::new(id, MultiPolygon::new(polys)?, population, area_ha)?);
        }
        TractSet::new(origin, tracts)
    }

    /// Writes the tracts as a FeatureCollection, one feature per line, with
    /// coordinates fixed to 7 decimals. `extra` supplies additional
    /// properties per tract (aligned with tract order).
    pub fn write_geojson<W: Write>(&self, mut out: W, extra: Option<&[Map<String, Value>]>) -> Result<()> {
        if let Some(extra) = extra {
            if extra.len() != self.len() {
                return Err(Error::Alignment(format!("{} property rows for {} tracts", extra.len(), self.len())));
            }
        }
        writeln!(out, "{{\"type\":\"FeatureCollection\",\"features\":[")?;
        for (i, tract) in self.tracts.iter().enumerate() {
            let mut props = Map::new();
            props.insert("tract_id".into(), Value::String(tract.id.clone()));
            props.insert("population".into(), Value::from(tract.population));
            props.insert("area_ha".into(), Value::from(tract.area_ha));
            if let Some(extra) = extra {
                for (k, v) in &extra[i] {
                    props.insert(k.clone(), v.clone());
                }
            }
            let sep = if i + 1 < self.len() { "," } else { "" };
            writeln!(
                out,
                "{{\"type\":\"Feature\",\"properties\":{},\"geometry\":{}}}{sep}",
                serde_json::to_string(&props)?,
                self.geometry_json(&tract.geometry)
            )?;
        }
        writeln!(out, "]}}")?;
        Ok(())
    }

    fn geometry_json(&self, geom: &MultiPolygon) -> String {
        let mut s = String::new();
        let multi = geom.parts().len() > 1;
        s.push_str(if multi {
            "{\"type\":\"MultiPolygon\",\"coordinates\":["
        } else {
            "{\"type\":\"Polygon\",\"coordinates\":"
        });
        for (pi, poly) in geom.parts().iter().enumerate() {
            if pi > 0 {
                s.push(',');
            }
            s.push('[');
            let rings = std::iter::once(poly.exterior()).chain(poly.holes());
            for (ri, ring) in rings.enumerate() {
                if ri > 0 {
                    s.push(',');
                }
                s.push('[');
                for (vi, p) in ring.points().iter().enumerate() {
                    if vi > 0 {
                        s.push(',');
                    }
                    let g = unproject(*p, self.origin);
                    let _ = write!(s, "[{:.7},{:.7}]", g.lon, g.lat);
                }
                s.push(']');
            }
            s.push(']');
        }
        s.push_str(if multi { "]}" } else { "}" });
        s
    }
}

type LonLatRing = Vec<GeoPoint>;

fn read_ring(v: &Value, k: usize) -> Result<LonLatRing> {
    let arr = v.as_array().ok_or_else(|| Error::Schema(format!("feature {k}: ring is not an array")))?;
    arr.iter()
        .map(|pos| {
            let xy = pos.as_array().filter(|a| a.len() >= 2);
            match xy.map(|a| (a[0].as_f64(), a[1].as_f64())) {
                Some((Some(lon), Some(lat))) => GeoPoint::new(lon, lat),
                _ => Err(Error::Schema(format!("feature {k}: malformed position"))),
            }
        })
        .collect()
}

fn read_polygon(v: &Value, k: usize) -> Result<Vec<LonLatRing>> {
    v.as_array()
        .ok_or_else(|| Error::Schema(format!("feature {k}: polygon is not an array")))?
        .iter()
        .map(|r| read_ring(r, k))
        .collect()
}

fn read_lonlat_parts(geometry: &Value, k: usize) -> Result<Vec<Vec<LonLatRing>>> {
    let coords = geometry
        .get("coordinates")
        .ok_or_else(|| Error::Schema(format!("feature {k}: geometry has no coordinates")))?;
    match geometry.get("type").and_then(Value::as_str) {
        Some("Polygon") => Ok(vec![read_polygon(coords, k)?]),
        Some("MultiPolygon") => coords
            .as_array()
            .ok_or_else(|| Error::Schema(format!("feature {k}: multipolygon is not an array")))?
            .iter()
            .map(|p| read_polygon(p, k))
            .collect(),
        other => Err(Error::Schema(format!(
            "feature {k}: unsupported geometry type {other:?} (expected Polygon or MultiPolygon)"
        ))),
    }
}
