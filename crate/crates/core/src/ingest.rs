//! CSV ingestion of listings, hotels and photographs, plus per-source
//! summaries (host concentration, availability, photographer classes).
//!
//! Column layouts:
//!
//! ```text
//! listings.csv  id,lon,lat,room_type,price,beds,availability_365,reviews_per_month,host_id
//! hotels.csv    id,lon,lat,rooms,beds,places
//! photos.csv    photo_id,owner_id,lon,lat,taken_at
//! ```
//!
//! Parsers do not look at geometry; points outside the study area survive
//! parsing and are counted as unassigned during aggregation.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use chrono::NaiveDate;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geo::GeoPoint;

/// Owners whose photo span exceeds this many days are residents.
pub const DEFAULT_RESIDENT_THRESHOLD_DAYS: i64 = 30;

/// Hosts with at least this many listings count as large operators.
pub const BIG_HOST_MIN_LISTINGS: usize = 6;

pub const LOW_AVAILABILITY_DAYS: u16 = 90;

const LISTING_COLUMNS: [&str; 9] =
    ["id", "lon", "lat", "room_type", "price", "beds", "availability_365", "reviews_per_month", "host_id"];
const HOTEL_COLUMNS: [&str; 6] = ["id", "lon", "lat", "rooms", "beds", "places"];
const PHOTO_COLUMNS: [&str; 5] = ["photo_id", "owner_id", "lon", "lat", "taken_at"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum RoomType {
    EntireHome,
    PrivateRoom,
    SharedRoom,
}

impl RoomType {
    pub fn as_str(&self) -> &'static str {
        match self {
            RoomType::EntireHome => "Entire home/apt",
            RoomType::PrivateRoom => "Private room",
            RoomType::SharedRoom => "Shared room",
        }
    }
}

impl FromStr for RoomType {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "Entire home/apt" => Ok(RoomType::EntireHome),
            "Private room" => Ok(RoomType::PrivateRoom),
            "Shared room" => Ok(RoomType::SharedRoom),
            other => Err(format!("unknown room_type {other:?}")),
        }
    }
}

impl fmt::Display for RoomType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Listing {
    pub id: String,
    pub location: GeoPoint,
    pub room_type: RoomType,
    pub price_per_night: f64,
    pub beds: u32,
    pub availability_365: u16,
    pub reviews_per_month: Option<f64>,
    pub host_id: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HotelRecord {
    pub id: String,
    pub location: GeoPoint,
    pub rooms: u32,
    pub beds: u32,
    pub places: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhotoRecord {
    pub photo_id: String,
    pub owner_id: String,
    pub location: GeoPoint,
    pub taken_at: NaiveDate,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RowError {
    /// 1-based line number in the file, header included.
    pub line: u64,
    pub message: String,
}

#[derive(Debug, Clone)]
pub struct Parsed<T> {
    pub records: Vec<T>,
    pub errors: Vec<RowError>,
}

struct Row<'a> {
    record: &'a csv::StringRecord,
    columns: &'a HashMap<&'static str, usize>,
}

impl Row<'_> {
    fn raw(&self, name: &str) -> &str {
        self.record.get(self.columns[name]).unwrap_or("").trim()
    }

    fn text(&self, name: &str) -> std::result::Result<String, String> {
        let v = self.raw(name);
        if v.is_empty() {
            return Err(format!("empty {name}"));
        }
        Ok(v.to_string())
    }

    fn float(&self, name: &str) -> std::result::Result<f64, String> {
        let v = self.raw(name);
        match v.parse::<f64>() {
            Ok(x) if x.is_finite() => Ok(x),
            _ => Err(format!("{name}: {v:?} is not a number")),
        }
    }

    fn count(&self, name: &str) -> std::result::Result<u32, String> {
        let v = self.raw(name);
        let n: i64 = v.parse().map_err(|_| format!("{name}: {v:?} is not an integer"))?;
        if n < 0 {
            return Err(format!("{name}: negative count {n}"));
        }
        u32::try_from(n).map_err(|_| format!("{name}: {n} too large"))
    }

    fn location(&self) -> std::result::Result<GeoPoint, String> {
        let lon = self.float("lon")?;
        let lat = self.float("lat")?;
        GeoPoint::new(lon, lat).map_err(|e| e.to_string())
    }
}

fn parse_csv<R, T, F>(reader: R, required: &[&'static str], strict: bool, mut parse_row: F) -> Result<Parsed<T>>
where
    R: Read,
    F: FnMut(&Row<'_>) -> std::result::Result<T, String>,
{
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).flexible(true).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let mut columns = HashMap::new();
    for &name in required {
        let idx = headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| Error::Schema(format!("missing required column `{name}`")))?;
        columns.insert(name, idx);
    }

    let mut out = Parsed { records: Vec::new(), errors: Vec::new() };
    let mut record = csv::StringRecord::new();
    let mut line = 1u64;
    loop {
        let more = match rdr.read_record(&mut record) {
            Ok(more) => more,
            Err(e) if e.is_io_error() => return Err(e.into()),
            Err(e) => {
                line += 1;
                let message = e.to_string();
                if strict {
                    return Err(Error::Row { line, message });
                }
                out.errors.push(RowError { line, message });
                continue;
            }
        };
        if !more {
            break;
        }
        line = record.position().map(|p| p.line()).unwrap_or(line + 1);
        match parse_row(&Row { record: &record, columns: &columns }) {
            Ok(rec) => out.records.push(rec),
            Err(message) if strict => return Err(Error::Row { line, message }),
            Err(message) => out.errors.push(RowError { line, message }),
        }
    }
    Ok(out)
}

pub fn parse_listings<R: Read>(reader: R, strict: bool) -> Result<Parsed<Listing>> {
    parse_csv(reader, &LISTING_COLUMNS, strict, |row| {
        let price_per_night = row.float("price")?;
        if price_per_night < 0.0 {
            return Err(format!("price: negative value {price_per_night}"));
        }
        let availability = row.count("availability_365")?;
        if availability > 365 {
            return Err(format!("availability_365: {availability} outside [0, 365]"));
        }
        let reviews_per_month = match row.raw("reviews_per_month") {
            "" => None,
            _ => {
                let r = row.float("reviews_per_month")?;
                if r < 0.0 {
                    return Err(format!("reviews_per_month: negative value {r}"));
                }
                Some(r)
            }
        };
        Ok(Listing {
            id: row.text("id")?,
            location: row.location()?,
            room_type: row.raw("room_type").parse()?,
            price_per_night,
            beds: row.count("beds")?,
            availability_365: availability as u16,
            reviews_per_month,
            host_id: row.text("host_id")?,
        })
    })
}

pub fn parse_hotels<R: Read>(reader: R, strict: bool) -> Result<Parsed<HotelRecord>> {
    parse_csv(reader, &HOTEL_COLUMNS, strict, |row| {
        let h = HotelRecord {
            id: row.text("id")?,
            location: row.location()?,
            rooms: row.count("rooms")?,
            beds: row.count("beds")?,
            places: row.count("places")?,
        };
        if h.places < h.beds {
            log::warn!("hotel {}: places ({}) below beds ({})", h.id, h.places, h.beds);
        }
        Ok(h)
    })
}

pub fn parse_photos<R: Read>(reader: R, strict: bool) -> Result<Parsed<PhotoRecord>> {
    parse_csv(reader, &PHOTO_COLUMNS, strict, |row| {
        let raw_date = row.raw("taken_at");
        let taken_at = NaiveDate::parse_from_str(raw_date, "%Y-%m-%d")
            .map_err(|_| format!("taken_at: {raw_date:?} is not an ISO-8601 date"))?;
        Ok(PhotoRecord {
            photo_id: row.text("photo_id")?,
            owner_id: row.text("owner_id")?,
            location: row.location()?,
            taken_at,
        })
    })
}

pub fn write_listings<W: Write>(out: W, listings: &[Listing]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(LISTING_COLUMNS)?;
    for l in listings {
        w.write_record([
            l.id.clone(),
            l.location.lon.to_string(),
            l.location.lat.to_string(),
            l.room_type.as_str().to_string(),
            l.price_per_night.to_string(),
            l.beds.to_string(),
            l.availability_365.to_string(),
            l.reviews_per_month.map(|r| r.to_string()).unwrap_or_default(),
            l.host_id.clone(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_hotels<W: Write>(out: W, hotels: &[HotelRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(HOTEL_COLUMNS)?;
    for h in hotels {
        w.write_record([
            h.id.clone(),
            h.location.lon.to_string(),
            h.location.lat.to_string(),
            h.rooms.to_string(),
            h.beds.to_string(),
            h.places.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_photos<W: Write>(out: W, photos: &[PhotoRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(PHOTO_COLUMNS)?;
    for p in photos {
        w.write_record([
            p.photo_id.clone(),
            p.owner_id.clone(),
            p.location.lon.to_string(),
            p.location.lat.to_string(),
            p.taken_at.format("%Y-%m-%d").to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum PhotographerKind {
    Tourist,
    Resident,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PhotographerClass {
    pub owner_id: String,
    pub class: PhotographerKind,
    pub span_days: i64,
}

/// Classifies each owner by the span between their first and last photo.
/// Owners are returned sorted by id.
pub fn classify_photographers(photos: &[PhotoRecord], threshold_days: i64) -> Vec<PhotographerClass> {
    let mut spans: BTreeMap<&str, (NaiveDate, NaiveDate)> = BTreeMap::new();
    for p in photos {
        spans
            .entry(p.owner_id.as_str())
            .and_modify(|(lo, hi)| {
                *lo = (*lo).min(p.taken_at);
                *hi = (*hi).max(p.taken_at);
            })
            .or_insert((p.taken_at, p.taken_at));
    }
    spans
        .into_iter()
        .map(|(owner, (lo, hi))| {
            let span_days = (hi - lo).num_days();
            let class = if span_days > threshold_days { PhotographerKind::Resident } else { PhotographerKind::Tourist };
            PhotographerClass { owner_id: owner.to_string(), class, span_days }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HostConcentration {
    pub distinct_hosts: usize,
    pub pct_multi_hosts: f64,
    pub pct_listings_by_big_hosts: f64,
}

pub fn host_concentration(listings: &[Listing]) -> Result<HostConcentration> {
    if listings.is_empty() {
        return Err(Error::EmptyInput("host_concentration needs at least one listing"));
    }
    let mut per_host: HashMap<&str, usize> = HashMap::new();
    for l in listings {
        *per_host.entry(l.host_id.as_str()).or_default() += 1;
    }
    let multi = per_host.values().filter(|&&c| c >= 2).count();
    let by_big: usize = per_host.values().filter(|&&c| c >= BIG_HOST_MIN_LISTINGS).sum();
    Ok(HostConcentration {
        distinct_hosts: per_host.len(),
        pct_multi_hosts: 100.0 * multi as f64 / per_host.len() as f64,
        pct_listings_by_big_hosts: 100.0 * by_big as f64 / listings.len() as f64,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AvailabilitySummary {
    pub mean_days: f64,
    pub count_below_90: usize,
    pub pct_below_90: f64,
}

pub fn availability_summary(listings: &[Listing]) -> Result<AvailabilitySummary> {
    if listings.is_empty() {
        return Err(Error::EmptyInput("availability_summary needs at least one listing"));
    }
    let n = listings.len() as f64;
    let total: f64 = listings.iter().map(|l| f64::from(l.availability_365)).sum();
    let below = listings.iter().filter(|l| l.availability_365 < LOW_AVAILABILITY_DAYS).count();
    Ok(AvailabilitySummary { mean_days: total / n, count_below_90: below, pct_below_90: 100.0 * below as f64 / n })
}

#[cfg(test)]
mod tests {
    use super::*;

    const LISTINGS: &str = "\
id,lon,lat,room_type,price,beds,availability_365,reviews_per_month,host_id
1,2.17,41.39,Entire home/apt,100,3,300,1.5,h1
2,2.18,41.38,Private room,40,1,200,,h2
3,2.16,41.40,Shared room,25,4,365,0.2,h1
";

    fn photo(owner: &str, date: &str) -> PhotoRecord {
        PhotoRecord {
            photo_id: format!("{owner}-{date}"),
            owner_id: owner.into(),
            location: GeoPoint { lon: 2.17, lat: 41.39 },
            taken_at: NaiveDate::parse_from_str(date, "%Y-%m-%d").unwrap(),
        }
    }

    fn listing(host: &str, availability: u16) -> Listing {
        Listing {
            id: "x".into(),
            location: GeoPoint { lon: 2.17, lat: 41.39 },
            room_type: RoomType::EntireHome,
            price_per_night: 50.0,
            beds: 2,
            availability_365: availability,
            reviews_per_month: None,
            host_id: host.into(),
        }
    }

    #[test]
    fn well_formed_listings_parse() {
        let parsed = parse_listings(LISTINGS.as_bytes(), true).unwrap();
        assert_eq!(parsed.records.len(), 3);
        assert!(parsed.errors.is_empty());
        assert_eq!(parsed.records[1].room_type, RoomType::PrivateRoom);
        assert_eq!(parsed.records[1].reviews_per_month, None);
        assert_eq!(parsed.records[2].room_type, RoomType::SharedRoom);
        assert_eq!(parsed.records[0].id, "1");
    }

    #[test]
    fn malformed_row_skipped_or_fatal() {
        let bad = LISTINGS.replace("2,2.18,41.38", "2,2.18,abc");
        let parsed = parse_listings(bad.as_bytes(), false).unwrap();
        assert_eq!(parsed.records.len(), 2);
        assert_eq!(parsed.errors.len(), 1);
        assert_eq!(parsed.errors[0].line, 3);
        assert!(matches!(parse_listings(bad.as_bytes(), true), Err(Error::Row { line: 3, .. })));
    }

    #[test]
    fn missing_column_is_schema_error() {
        let csv = "id,lon,lat\n1,2,41\n";
        assert!(matches!(parse_listings(csv.as_bytes(), false), Err(Error::Schema(_))));
        assert!(matches!(parse_hotels(csv.as_bytes(), false), Err(Error::Schema(_))));
    }

    #[test]
    fn unknown_room_type_and_availability_range() {
        let csv = "id,lon,lat,room_type,price,beds,availability_365,reviews_per_month,host_id\n\
                   1,2,41,Castle,1,1,10,,h\n2,2,41,Shared room,1,1,366,,h\n";
        let parsed = parse_listings(csv.as_bytes(), false).unwrap();
        assert!(parsed.records.is_empty());
        assert_eq!(parsed.errors.len(), 2);
    }

    #[test]
    fn hotels_reject_negative_counts() {
        let csv = "id,lon,lat,rooms,beds,places\nh1,2.17,41.39,10,20,22\nh2,2.17,41.39,5,8,-1\n";
        let parsed = parse_hotels(csv.as_bytes(), false).unwrap();
        assert_eq!(parsed.records.len(), 1);
        assert_eq!(parsed.records[0].places, 22);
        assert_eq!(parsed.errors.len(), 1);
        assert!(parsed.errors[0].message.contains("negative"));
    }

    #[test]
    fn hotels_two_rows() {
        let csv = "id,lon,lat,rooms,beds,places\nh1,2.17,41.39,10,20,22\nh2,2.16,41.38,5,8,7\n";
        assert_eq!(parse_hotels(csv.as_bytes(), true).unwrap().records.len(), 2);
    }

    #[test]
    fn photo_dates_follow_iso_format() {
        let csv = "photo_id,owner_id,lon,lat,taken_at\n\
                   p1,o1,2.17,41.39,2014-07-15\np2,o1,2.17,41.39,15/07/2014\np3,o2,2.17,41.39,2014-08-01\n\
                   p4,o2,2.17,41.39,2014-08-02\np5,o2,2.17,41.39,2014-08-03\n";
        let parsed = parse_photos(csv.as_bytes(), false).unwrap();
        assert_eq!(parsed.records.len(), 4);
        assert_eq!(parsed.errors.len(), 1);
        assert_eq!(parsed.errors[0].line, 3);
    }

    #[test]
    fn photographer_span_rule() {
        let photos = vec![
            photo("single", "2014-01-01"),
            photo("long", "2014-01-01"),
            photo("long", "2014-02-15"),
            photo("edge", "2014-03-01"),
            photo("edge", "2014-03-31"),
        ];
        let classes = classify_photographers(&photos, DEFAULT_RESIDENT_THRESHOLD_DAYS);
        let by_owner: HashMap<_, _> = classes.iter().map(|c| (c.owner_id.as_str(), c)).collect();
        assert_eq!(by_owner["single"].class, PhotographerKind::Tourist);
        assert_eq!(by_owner["single"].span_days, 0);
        assert_eq!(by_owner["long"].class, PhotographerKind::Resident);
        assert_eq!(by_owner["long"].span_days, 45);
        assert_eq!(by_owner["edge"].span_days, 30);
        assert_eq!(by_owner["edge"].class, PhotographerKind::Tourist);
    }

    #[test]
    fn host_concentration_counts() {
        let mut ls = vec![listing("a", 100)];
        ls.extend((0..2).map(|_| listing("b", 100)));
        ls.extend((0..6).map(|_| listing("c", 100)));
        let hc = host_concentration(&ls).unwrap();
        assert_eq!(hc.distinct_hosts, 3);
        assert!((hc.pct_multi_hosts - 200.0 / 3.0).abs() < 1e-12);
        assert!((hc.pct_listings_by_big_hosts - 600.0 / 9.0).abs() < 1e-12);

        let singles: Vec<_> = ["a", "b", "c"].iter().map(|h| listing(h, 1)).collect();
        let hc = host_concentration(&singles).unwrap();
        assert_eq!((hc.pct_multi_hosts, hc.pct_listings_by_big_hosts), (0.0, 0.0));
        assert!(matches!(host_concentration(&[]), Err(Error::EmptyInput(_))));
    }

    #[test]
    fn availability_threshold_is_strict() {
        let s = availability_summary(&[listing("a", 365), listing("b", 195)]).unwrap();
        assert_eq!(s.mean_days, 280.0);
        assert_eq!(s.count_below_90, 0);
        let s = availability_summary(&[listing("a", 89), listing("b", 90), listing("c", 91)]).unwrap();
        assert_eq!(s.count_below_90, 1);
        assert!(availability_summary(&[]).is_err());
    }
}
