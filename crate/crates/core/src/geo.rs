//! Planar geometry for city-scale tract data.
//!
//! Geographic input is mapped to local meters with an equirectangular
//! projection around a fixed origin. At the extent of a municipality the
//! distance error of that projection stays well under 0.1%, which is far
//! below the granularity of a 1 km weighting band.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Mean Earth radius in meters.
pub const EARTH_RADIUS_M: f64 = 6_371_000.0;

/// Largest coordinate offset accepted for a projected point.
pub const PLANAR_BOUND_M: f64 = 1e7;

/// Maximum separation (degrees) between a point and its projection origin.
pub const MAX_PROJECTION_SPAN_DEG: f64 = 2.0;

const BOUNDARY_EPS_M: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoPoint {
    pub lon: f64,
    pub lat: f64,
}

impl GeoPoint {
    pub fn new(lon: f64, lat: f64) -> Result<Self> {
        if !(lon.is_finite() && (-180.0..=180.0).contains(&lon)) {
            return Err(Error::InvalidCoordinate(format!("longitude {lon} outside [-180, 180]")));
        }
        if !(lat.is_finite() && (-90.0..=90.0).contains(&lat)) {
            return Err(Error::InvalidCoordinate(format!("latitude {lat} outside [-90, 90]")));
        }
        Ok(Self { lon, lat })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanarPoint {
    pub x: f64,
    pub y: f64,
}

impl PlanarPoint {
    pub fn new(x: f64, y: f64) -> Result<Self> {
        if !(x.is_finite() && y.is_finite()) || x.abs() >= PLANAR_BOUND_M || y.abs() >= PLANAR_BOUND_M {
            return Err(Error::InvalidCoordinate(format!("planar point ({x}, {y}) out of range")));
        }
        Ok(Self { x, y })
    }

    pub fn distance(&self, other: &PlanarPoint) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        (dx * dx + dy * dy).sqrt()
    }

    pub fn translate(&self, dx: f64, dy: f64) -> PlanarPoint {
        PlanarPoint { x: self.x + dx, y: self.y + dy }
    }
}

/// Projects `p` to meters east/north of `origin`.
pub fn project(p: GeoPoint, origin: GeoPoint) -> Result<PlanarPoint> {
    let p = GeoPoint::new(p.lon, p.lat)?;
    let origin = GeoPoint::new(origin.lon, origin.lat)?;
    let dlon = p.lon - origin.lon;
    let dlat = p.lat - origin.lat;
    if dlon.abs() > MAX_PROJECTION_SPAN_DEG || dlat.abs() > MAX_PROJECTION_SPAN_DEG {
        return Err(Error::InvalidCoordinate(format!(
            "({}, {}) is more than {MAX_PROJECTION_SPAN_DEG} degrees from the projection origin",
            p.lon, p.lat
        )));
    }
    let x = EARTH_RADIUS_M * dlon.to_radians() * origin.lat.to_radians().cos();
    let y = EARTH_RADIUS_M * dlat.to_radians();
    PlanarPoint::new(x, y)
}

/// Inverse of [`project`].
pub fn unproject(p: PlanarPoint, origin: GeoPoint) -> GeoPoint {
    let lat = origin.lat + (p.y / EARTH_RADIUS_M).to_degrees();
    let lon = origin.lon + (p.x / (EARTH_RADIUS_M * origin.lat.to_radians().cos())).to_degrees();
    GeoPoint { lon, lat }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    pub min_x: f64,
    pub min_y: f64,
    pub max_x: f64,
    pub max_y: f64,
}

impl Bounds {
    fn of(points: &[PlanarPoint]) -> Bounds {
        let mut b =
            Bounds { min_x: f64::INFINITY, min_y: f64::INFINITY, max_x: f64::NEG_INFINITY, max_y: f64::NEG_INFINITY };
        for p in points {
            b.min_x = b.min_x.min(p.x);
            b.min_y = b.min_y.min(p.y);
            b.max_x = b.max_x.max(p.x);
            b.max_y = b.max_y.max(p.y);
        }
        b
    }

    pub fn union(&self, other: &Bounds) -> Bounds {
        Bounds {
            min_x: self.min_x.min(other.min_x),
            min_y: self.min_y.min(other.min_y),
            max_x: self.max_x.max(other.max_x),
            max_y: self.max_y.max(other.max_y),
        }
    }

    pub fn contains(&self, p: PlanarPoint) -> bool {
        p.x >= self.min_x - BOUNDARY_EPS_M
            && p.x <= self.max_x + BOUNDARY_EPS_M
            && p.y >= self.min_y - BOUNDARY_EPS_M
            && p.y <= self.max_y + BOUNDARY_EPS_M
    }
}

/// A closed ring: the first vertex is repeated as the last one.
#[derive(Debug, Clone, PartialEq)]
pub struct Ring {
    points: Vec<PlanarPoint>,
}

impl Ring {
    /// Builds a ring, closing it if the input is open.
    pub fn new(mut points: Vec<PlanarPoint>) -> Result<Self> {
        if let (Some(first), Some(last)) = (points.first().copied(), points.last().copied()) {
            if first != last {
                points.push(first);
            }
        }
        let mut distinct: Vec<(u64, u64)> =
            points[..points.len().saturating_sub(1)].iter().map(|p| (p.x.to_bits(), p.y.to_bits())).collect();
        distinct.sort_unstable();
        distinct.dedup();
        if distinct.len() < 3 {
            return Err(Error::InvalidGeometry(format!(
                "ring needs at least 3 distinct vertices, got {}",
                distinct.len()
            )));
        }
        let ring = Ring { points };
        if ring.signed_area() == 0.0 {
            return Err(Error::InvalidGeometry("ring has zero area".into()));
        }
        if ring.self_intersects() {
            return Err(Error::InvalidGeometry("ring is self-intersecting".into()));
        }
        Ok(ring)
    }

    pub fn points(&self) -> &[PlanarPoint] {
        &self.points
    }

    fn edges(&self) -> impl Iterator<Item = (PlanarPoint, PlanarPoint)> + '_ {
        self.points.windows(2).map(|w| (w[0], w[1]))
    }

    /// Shoelace area, positive for counter-clockwise rings.
    pub fn signed_area(&self) -> f64 {
        0.5 * self.edges().map(|(a, b)| a.x * b.y - b.x * a.y).sum::<f64>()
    }

    /// Area-weighted centroid of the enclosed region, with its signed area.
    fn centroid_moment(&self) -> (f64, f64, f64) {
        // Shifting to the first vertex keeps products small for city-scale offsets.
        let o = self.points[0];
        let (mut a2, mut cx, mut cy) = (0.0, 0.0, 0.0);
        for (p, q) in self.edges() {
            let (px, py, qx, qy) = (p.x - o.x, p.y - o.y, q.x - o.x, q.y - o.y);
            let cross = px * qy - qx * py;
            a2 += cross;
            cx += (px + qx) * cross;
            cy += (py + qy) * cross;
        }
        let area = a2 / 2.0;
        (area, o.x * area + cx / 6.0, o.y * area + cy / 6.0)
    }

    fn bounds(&self) -> Bounds {
        Bounds::of(&self.points)
    }

    fn on_boundary(&self, p: PlanarPoint) -> bool {
        self.edges().any(|(a, b)| on_segment(p, a, b))
    }

    /// Even-odd crossing test, boundary excluded.
    fn crossings_odd(&self, p: PlanarPoint) -> bool {
        let mut inside = false;
        for (a, b) in self.edges() {
            if (a.y > p.y) != (b.y > p.y) {
                let x_at = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
                if p.x < x_at {
                    inside = !inside;
                }
            }
        }
        inside
    }

    fn self_intersects(&self) -> bool {
        let edges: Vec<_> = self.edges().collect();
        let m = edges.len();
        for i in 0..m {
            for j in (i + 1)..m {
                let adjacent = j == i + 1 || (i == 0 && j == m - 1);
                if adjacent {
                    continue;
                }
                if segments_intersect(edges[i].0, edges[i].1, edges[j].0, edges[j].1) {
                    return true;
                }
            }
        }
        false
    }
}

fn orient(a: PlanarPoint, b: PlanarPoint, c: PlanarPoint) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

fn on_segment(p: PlanarPoint, a: PlanarPoint, b: PlanarPoint) -> bool {
    let len = a.distance(&b);
    if len == 0.0 {
        return p.distance(&a) <= BOUNDARY_EPS_M;
    }
    let dist = orient(a, b, p).abs() / len;
    dist <= BOUNDARY_EPS_M
        && p.x >= a.x.min(b.x) - BOUNDARY_EPS_M
        && p.x <= a.x.max(b.x) + BOUNDARY_EPS_M
        && p.y >= a.y.min(b.y) - BOUNDARY_EPS_M
        && p.y <= a.y.max(b.y) + BOUNDARY_EPS_M
}

fn segments_intersect(a: PlanarPoint, b: PlanarPoint, c: PlanarPoint, d: PlanarPoint) -> bool {
    let d1 = orient(c, d, a);
    let d2 = orient(c, d, b);
    let d3 = orient(a, b, c);
    let d4 = orient(a, b, d);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    (d1 == 0.0 && on_segment(a, c, d))
        || (d2 == 0.0 && on_segment(b, c, d))
        || (d3 == 0.0 && on_segment(c, a, b))
        || (d4 == 0.0 && on_segment(d, a, b))
}

/// A polygon with an exterior ring and optional holes.
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon {
    exterior: Ring,
    holes: Vec<Ring>,
}

impl Polygon {
    pub fn new(exterior: Vec<PlanarPoint>, holes: Vec<Vec<PlanarPoint>>) -> Result<Self> {
        let exterior = Ring::new(exterior)?;
        let holes = holes.into_iter().map(Ring::new).collect::<Result<Vec<_>>>()?;
        for hole in &holes {
            let strictly_inside = hole.points().iter().all(|&p| exterior.crossings_odd(p) && !exterior.on_boundary(p))
                && !hole.edges().any(|(a, b)| exterior.edges().any(|(c, d)| segments_intersect(a, b, c, d)));
            if !strictly_inside {
                return Err(Error::InvalidGeometry("hole is not strictly inside the exterior ring".into()));
            }
        }
        let poly = Polygon { exterior, holes };
        if poly.area_m2() <= 0.0 {
            return Err(Error::InvalidGeometry("polygon has zero area".into()));
        }
        Ok(poly)
    }

    pub fn exterior(&self) -> &Ring {
        &self.exterior
    }

    pub fn holes(&self) -> &[Ring] {
        &self.holes
    }

    pub fn bounds(&self) -> Bounds {
        self.exterior.bounds()
    }

    /// Even-odd containment; points on any edge or vertex count as inside.
    pub fn contains(&self, p: PlanarPoint) -> bool {
        if self.exterior.on_boundary(p) || self.holes.iter().any(|h| h.on_boundary(p)) {
            return true;
        }
        self.exterior.crossings_odd(p) && !self.holes.iter().any(|h| h.crossings_odd(p))
    }

    /// Exterior area minus hole areas, in square meters.
    pub fn area_m2(&self) -> f64 {
        self.exterior.signed_area().abs() - self.holes.iter().map(|h| h.signed_area().abs()).sum::<f64>()
    }

    pub fn area_hectares(&self) -> f64 {
        self.area_m2() / 10_000.0
    }

    fn moment(&self) -> (f64, f64, f64) {
        let oriented = |ring: &Ring, sign: f64| {
            let (a, mx, my) = ring.centroid_moment();
            let s = sign * a.signum();
            (s * a, s * mx, s * my)
        };
        let (mut a, mut mx, mut my) = oriented(&self.exterior, 1.0);
        for h in &self.holes {
            let (ha, hx, hy) = oriented(h, -1.0);
            a += ha;
            mx += hx;
            my += hy;
        }
        (a, mx, my)
    }

    /// Area-weighted centroid of the exterior minus the holes.
    pub fn centroid(&self) -> PlanarPoint {
        let (a, mx, my) = self.moment();
        PlanarPoint { x: mx / a, y: my / a }
    }
}

/// Union of polygon parts treated as one areal unit.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiPolygon {
    parts: Vec<Polygon>,
}

impl MultiPolygon {
    pub fn new(parts: Vec<Polygon>) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::InvalidGeometry("multipolygon without parts".into()));
        }
        Ok(Self { parts })
    }

    pub fn parts(&self) -> &[Polygon] {
        &self.parts
    }

    pub fn contains(&self, p: PlanarPoint) -> bool {
        self.parts.iter().any(|poly| poly.bounds().contains(p) && poly.contains(p))
    }

    pub fn area_hectares(&self) -> f64 {
        self.parts.iter().map(Polygon::area_hectares).sum()
    }

    pub fn centroid(&self) -> PlanarPoint {
        let (mut a, mut mx, mut my) = (0.0, 0.0, 0.0);
        for part in &self.parts {
            let (pa, px, py) = part.moment();
            a += pa;
            mx += px;
            my += py;
        }
        PlanarPoint { x: mx / a, y: my / a }
    }

    pub fn bounds(&self) -> Bounds {
        self.parts[1..].iter().fold(self.parts[0].bounds(), |b, p| b.union(&p.bounds()))
    }
}

impl From<Polygon> for MultiPolygon {
    fn from(p: Polygon) -> Self {
        MultiPolygon { parts: vec![p] }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(x: f64, y: f64) -> PlanarPoint {
        PlanarPoint { x, y }
    }

    fn square(x0: f64, y0: f64, side: f64) -> Vec<PlanarPoint> {
        vec![pt(x0, y0), pt(x0 + side, y0), pt(x0 + side, y0 + side), pt(x0, y0 + side)]
    }

    #[test]
    fn origin_projects_to_zero() {
        let o = GeoPoint::new(2.17, 41.39).unwrap();
        let p = project(o, o).unwrap();
        assert_eq!(p, pt(0.0, 0.0));
    }

    #[test]
    fn projection_offsets_match_hand_evaluation() {
        let o = GeoPoint::new(2.17, 41.39).unwrap();
        // hand-evaluated: 6371000 * radians(0.01) * cos(radians(41.39)) = 834.2138
        let east = project(GeoPoint::new(2.18, 41.39).unwrap(), o).unwrap();
        assert!((east.x - 834.2138).abs() < 1e-3, "{}", east.x);
        assert!(east.y.abs() < 1e-6);

        let north = project(GeoPoint::new(2.17, 41.40).unwrap(), o).unwrap();
        assert!(north.x.abs() < 1e-9);
        assert!((north.y - 1111.9493).abs() < 1e-3, "{}", north.y);
    }

    #[test]
    fn projection_rejects_bad_coordinates() {
        let o = GeoPoint { lon: 2.0, lat: 41.0 };
        assert!(matches!(project(GeoPoint { lon: 200.0, lat: 0.0 }, o), Err(Error::InvalidCoordinate(_))));
        assert!(matches!(project(GeoPoint { lon: 10.0, lat: 41.0 }, o), Err(Error::InvalidCoordinate(_))));
        assert!(GeoPoint::new(0.0, 91.0).is_err());
    }

    #[test]
    fn unit_square_containment() {
        let sq = Polygon::new(square(0.0, 0.0, 1.0), vec![]).unwrap();
        assert!(sq.contains(pt(0.5, 0.5)));
        assert!(!sq.contains(pt(2.0, 2.0)));
        assert!(sq.contains(pt(1.0, 0.5)), "edge counts as inside");
        assert!(sq.contains(pt(0.0, 0.0)), "vertex counts as inside");
    }

    #[test]
    fn hole_excludes_interior_but_not_its_edge() {
        let poly = Polygon::new(square(0.0, 0.0, 100.0), vec![square(25.0, 25.0, 50.0)]).unwrap();
        assert!(!poly.contains(pt(50.0, 50.0)));
        assert!(poly.contains(pt(25.0, 50.0)));
        assert!(poly.contains(pt(10.0, 10.0)));
        assert!((poly.area_hectares() - 0.75).abs() < 1e-12);
    }

    #[test]
    fn degenerate_rings_rejected() {
        assert!(matches!(Ring::new(vec![pt(0.0, 0.0), pt(1.0, 0.0), pt(0.0, 0.0)]), Err(Error::InvalidGeometry(_))));
        assert!(Ring::new(vec![pt(0.0, 0.0), pt(1.0, 0.0), pt(2.0, 0.0)]).is_err());
        // bow-tie
        assert!(Ring::new(vec![pt(0.0, 0.0), pt(1.0, 1.0), pt(1.0, 0.0), pt(0.0, 1.0)]).is_err());
        let outside_hole = Polygon::new(square(0.0, 0.0, 1.0), vec![square(2.0, 2.0, 1.0)]);
        assert!(outside_hole.is_err());
        // hole vertices sit in both arms of a U, its long edges cross the notch
        let u = vec![
            pt(0.0, 0.0),
            pt(30.0, 0.0),
            pt(30.0, 20.0),
            pt(20.0, 20.0),
            pt(20.0, 10.0),
            pt(10.0, 10.0),
            pt(10.0, 20.0),
            pt(0.0, 20.0),
        ];
        let bridge = vec![pt(2.0, 15.0), pt(28.0, 15.0), pt(28.0, 16.0), pt(2.0, 16.0)];
        assert!(Polygon::new(u, vec![bridge]).is_err());
    }

    #[test]
    fn rings_are_stored_closed() {
        let r = Ring::new(square(0.0, 0.0, 1.0)).unwrap();
        assert_eq!(r.points().len(), 5);
        assert_eq!(r.points()[0], r.points()[4]);
    }

    #[test]
    fn centroid_simple_shapes() {
        let sq = Polygon::new(square(0.0, 0.0, 1.0), vec![]).unwrap();
        let c = sq.centroid();
        assert!((c.x - 0.5).abs() < 1e-12 && (c.y - 0.5).abs() < 1e-12);
        let tri = Polygon::new(vec![pt(0.0, 0.0), pt(3.0, 0.0), pt(0.0, 3.0)], vec![]).unwrap();
        let c = tri.centroid();
        assert!((c.x - 1.0).abs() < 1e-12 && (c.y - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hectare_area_and_orientation() {
        let sq = Polygon::new(square(0.0, 0.0, 100.0), vec![]).unwrap();
        assert!((sq.area_hectares() - 1.0).abs() < 1e-12);
        let mut rev = square(0.0, 0.0, 100.0);
        rev.reverse();
        let sq_rev = Polygon::new(rev, vec![]).unwrap();
        assert_eq!(sq.area_hectares(), sq_rev.area_hectares());
    }

    #[test]
    fn multipolygon_unions_parts() {
        let a = Polygon::new(square(0.0, 0.0, 100.0), vec![]).unwrap();
        let b = Polygon::new(square(300.0, 0.0, 100.0), vec![]).unwrap();
        let mp = MultiPolygon::new(vec![a, b]).unwrap();
        assert!((mp.area_hectares() - 2.0).abs() < 1e-12);
        assert!(mp.contains(pt(350.0, 50.0)));
        assert!(!mp.contains(pt(200.0, 50.0)));
        let c = mp.centroid();
        assert!((c.x - 200.0).abs() < 1e-9 && (c.y - 50.0).abs() < 1e-9);
    }
}
