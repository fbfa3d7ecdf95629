//! Run configuration, subcommands and output files.
//!
//! Every subcommand reads the inputs named in a [`RunConfig`], writes its
//! files into `out_dir` and finishes with `manifest.json`, which records
//! the configuration, the SHA-256 digest of every input and the list of
//! files written. Outputs contain no timestamps or thread-dependent data,
//! so re-running a manifest reproduces them byte for byte.
//!
//! | subcommand        | files                                                              |
//! |-------------------|--------------------------------------------------------------------|
//! | `aggregate`       | `stats_<ds>.csv`, `values_<ds>.csv`, `normalized_<ds>.csv`, `difference.csv`, `listing_summary.json` |
//! | `weights`         | `weights.csv`, `weights.json`                                      |
//! | `moran`           | `moran_<ds>.json`                                                  |
//! | `lisa`            | `lisa_<ds>.csv`, `lisa_<ds>.geojson`, `clusters_<ds>.csv`          |
//! | `bivariate`       | `bimoran_<x>_<y>.json`, `bilisa_<x>_<y>.csv/.geojson`, `biclusters_<x>_<y>.csv` |
//! | `pressure`        | `pressure.csv`, `pressure_hotels.csv`, `pressure_airbnb.csv`       |
//! | `classify-photos` | `photographers.csv`, `photo_summary.csv`                           |
//! | `synth`           | `tracts.geojson`, `listings.csv`, `hotels.csv`, `photos.csv`       |
//! | `pipeline`        | everything above except `synth`; steps without their inputs are skipped |

use std::collections::BTreeSet;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::autocorr::{
    bivariate_global_moran, bivariate_local_moran, cluster_table, global_moran, local_moran, Inference, LocalMoran,
    DEFAULT_ALPHA, DEFAULT_PERMUTATIONS,
};
use crate::error::{Error, Result};
use crate::geo::PlanarPoint;
use crate::ingest::{
    availability_summary, classify_photographers, host_concentration, parse_hotels, parse_listings, parse_photos,
    HotelRecord, Listing, Parsed, PhotoRecord, PhotographerClass, PhotographerKind, RowError,
    DEFAULT_RESIDENT_THRESHOLD_DAYS,
};
use crate::synth::{CityConfig, SyntheticCity};
use crate::tabulate::{
    assign_points_to_tracts, density_per_hectare, descriptive_stats, difference_map, normalize,
    occupancy_proxy_comparison, pressure_ratio, VariableVector, DEFAULT_MIN_DENSITY,
};
use crate::tracts::TractSet;
use crate::weights::{inverse_distance_band, SpatialWeights, DEFAULT_POWER, DEFAULT_RADIUS_M};

pub const MIN_PERMUTATIONS: usize = 99;
pub const DEFAULT_SEED: u64 = 42;

/// Which per-tract quantity feeds normalization and the Moran statistics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ValueMode {
    /// Number of listings, hotels or photographs.
    Counts,
    /// Accommodation places (listing beds, hotel places); photographs fall back to counts.
    #[default]
    Places,
    /// Places per hectare.
    Density,
}

impl std::str::FromStr for ValueMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "counts" => Ok(ValueMode::Counts),
            "places" => Ok(ValueMode::Places),
            "density" => Ok(ValueMode::Density),
            other => Err(Error::InvalidConfig(format!("unknown value mode {other:?}"))),
        }
    }
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}
fn default_radius() -> f64 {
    DEFAULT_RADIUS_M
}
fn default_power() -> f64 {
    DEFAULT_POWER
}
fn default_permutations() -> usize {
    DEFAULT_PERMUTATIONS
}
fn default_alpha() -> f64 {
    DEFAULT_ALPHA
}
fn default_seed() -> u64 {
    DEFAULT_SEED
}
fn default_min_density() -> f64 {
    DEFAULT_MIN_DENSITY
}
fn default_true() -> bool {
    true
}
fn default_threshold() -> i64 {
    DEFAULT_RESIDENT_THRESHOLD_DAYS
}

/// Analysis parameters. All fields have defaults, so a TOML file only
/// needs the keys it changes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub tracts: Option<PathBuf>,
    pub listings: Option<PathBuf>,
    pub hotels: Option<PathBuf>,
    pub photos: Option<PathBuf>,
    /// Not recorded in the manifest, so runs into different directories compare equal.
    #[serde(default = "default_out_dir", skip_serializing)]
    pub out_dir: PathBuf,
    #[serde(default = "default_radius")]
    pub radius: f64,
    #[serde(default = "default_power")]
    pub power: f64,
    #[serde(default = "default_permutations")]
    pub permutations: usize,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub value_mode: ValueMode,
    #[serde(default)]
    pub center_tracts: BTreeSet<String>,
    #[serde(default = "default_min_density")]
    pub min_density: f64,
    #[serde(default)]
    pub strict: bool,
    #[serde(default = "default_true")]
    pub row_standardize: bool,
    #[serde(default = "default_threshold")]
    pub resident_threshold_days: i64,
}

impl Default for RunConfig {
    fn default() -> Self {
        toml::from_str("").expect("defaults deserialize")
    }
}

impl RunConfig {
    pub fn from_toml_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        toml::from_str(&text).map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.radius.is_finite() && self.radius > 0.0) {
            return Err(Error::InvalidConfig(format!("radius must be positive, got {}", self.radius)));
        }
        if !self.power.is_finite() {
            return Err(Error::InvalidConfig(format!("power must be finite, got {}", self.power)));
        }
        if self.permutations < MIN_PERMUTATIONS {
            return Err(Error::InvalidConfig(format!(
                "permutations must be at least {MIN_PERMUTATIONS}, got {}",
                self.permutations
            )));
        }
        if !(self.alpha > 0.0 && self.alpha <= 0.5) {
            return Err(Error::InvalidConfig(format!("alpha must be in (0, 0.5], got {}", self.alpha)));
        }
        if !(self.min_density.is_finite() && self.min_density >= 0.0) {
            return Err(Error::InvalidConfig(format!("min_density must be non-negative, got {}", self.min_density)));
        }
        Ok(())
    }

    fn inference(&self) -> Inference {
        Inference::random(self.permutations, self.seed)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subcommand {
    Aggregate,
    Weights,
    Moran,
    Lisa,
    Bivariate,
    Pressure,
    ClassifyPhotos,
    Synth,
    Pipeline,
}

impl Subcommand {
    pub fn name(&self) -> &'static str {
        match self {
            Subcommand::Aggregate => "aggregate",
            Subcommand::Weights => "weights",
            Subcommand::Moran => "moran",
            Subcommand::Lisa => "lisa",
            Subcommand::Bivariate => "bivariate",
            Subcommand::Pressure => "pressure",
            Subcommand::ClassifyPhotos => "classify-photos",
            Subcommand::Synth => "synth",
            Subcommand::Pipeline => "pipeline",
        }
    }
}

/// Files created during a run; removed again if the run fails.
struct Outputs {
    dir: PathBuf,
    written: Vec<String>,
}

impl Outputs {
    fn create(&mut self, name: &str) -> Result<BufWriter<File>> {
        let file = File::create(self.dir.join(name))?;
        if !self.written.iter().any(|w| w == name) {
            self.written.push(name.to_string());
        }
        Ok(BufWriter::new(file))
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut w = self.create(name)?;
        serde_json::to_writer_pretty(&mut w, value)?;
        writeln!(w)?;
        w.flush()?;
        Ok(())
    }

    fn discard(&self) {
        for name in &self.written {
            let _ = fs::remove_file(self.dir.join(name));
        }
    }
}

/// Summary of a completed run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub subcommand: &'static str,
    pub files: Vec<String>,
    pub row_errors: Vec<(String, RowError)>,
}

/// Runs one subcommand. On failure every file written so far is removed.
pub fn run(subcommand: Subcommand, config: &RunConfig) -> Result<RunReport> {
    config.validate()?;
    fs::create_dir_all(&config.out_dir)?;
    let mut out = Outputs { dir: config.out_dir.clone(), written: Vec::new() };
    match execute(subcommand, config, &mut out) {
        Ok(row_errors) => Ok(RunReport { subcommand: subcommand.name(), files: out.written, row_errors }),
        Err(e) => {
            out.discard();
            Err(e)
        }
    }
}

/// Runs one subcommand on a dedicated pool of `threads` workers (0 picks
/// the number of cores). Outputs do not depend on the thread count.
pub fn run_with_threads(subcommand: Subcommand, config: &RunConfig, threads: usize) -> Result<RunReport> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
    pool.install(|| run(subcommand, config))
}

fn execute(subcommand: Subcommand, config: &RunConfig, out: &mut Outputs) -> Result<Vec<(String, RowError)>> {
    let mut inputs_used = Vec::new();
    let mut row_errors = Vec::new();
    if subcommand == Subcommand::Synth {
        let city = SyntheticCity::generate(CityConfig { seed: config.seed, ..CityConfig::default() })?;
        for name in ["tracts.geojson", "listings.csv", "hotels.csv", "photos.csv"] {
            out.written.push(name.to_string());
        }
        city.write_to(&out.dir)?;
    } else {
        let ctx = Context::load(config, &mut inputs_used, &mut row_errors)?;
        let steps: &[Subcommand] = match subcommand {
            Subcommand::Pipeline => &[
                Subcommand::Aggregate,
                Subcommand::Weights,
                Subcommand::Moran,
                Subcommand::Lisa,
                Subcommand::Bivariate,
                Subcommand::Pressure,
                Subcommand::ClassifyPhotos,
            ],
            ref one => std::slice::from_ref(one),
        };
        for step in steps {
            if subcommand == Subcommand::Pipeline && !ctx.has_inputs_for(*step) {
                log::info!("pipeline: skipping {}, its inputs were not given", step.name());
                continue;
            }
            ctx.step(*step, config, out)?;
        }
    }
    write_manifest(subcommand, config, &inputs_used, out)?;
    Ok(row_errors)
}

fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path)?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

fn write_manifest(
    subcommand: Subcommand,
    config: &RunConfig,
    inputs: &[(String, PathBuf)],
    out: &mut Outputs,
) -> Result<()> {
    let inputs: Vec<Value> = inputs
        .iter()
        .map(|(role, path)| {
            Ok(json!({ "role": role, "path": path.display().to_string(), "sha256": sha256_file(path)? }))
        })
        .collect::<Result<_>>()?;
    let mut files = out.written.clone();
    files.push("manifest.json".into());
    let manifest = json!({
        "tool": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "subcommand": subcommand.name(),
        "config": config,
        "seed": config.seed,
        "inputs": inputs,
        "outputs": files,
    });
    out.json("manifest.json", &manifest)
}

/// One analysed point dataset aggregated to tracts.
struct Dataset {
    name: &'static str,
    counts: VariableVector,
    /// `None` for photographs, which carry no places.
    places: Option<VariableVector>,
    unassigned: usize,
    records: usize,
}

impl Dataset {
    fn places_or_counts(&self) -> &VariableVector {
        self.places.as_ref().unwrap_or(&self.counts)
    }
}

struct Context {
    tracts: TractSet,
    listings: Option<Vec<Listing>>,
    photographers: Option<(Vec<PhotoRecord>, Vec<PhotographerClass>)>,
    datasets: Vec<Dataset>,
}

fn open_input(
    role: &str,
    path: &Option<PathBuf>,
    used: &mut Vec<(String, PathBuf)>,
) -> Result<Option<BufReader<File>>> {
    match path {
        None => Ok(None),
        Some(p) => {
            let f =
                File::open(p).map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", p.display()))))?;
            used.push((role.to_string(), p.clone()));
            Ok(Some(BufReader::new(f)))
        }
    }
}

fn keep<T>(role: &str, parsed: Parsed<T>, errors: &mut Vec<(String, RowError)>) -> Vec<T> {
    for e in parsed.errors {
        log::warn!("{role}: line {}: {}", e.line, e.message);
        errors.push((role.to_string(), e));
    }
    parsed.records
}

impl Context {
    fn load(
        config: &RunConfig,
        used: &mut Vec<(String, PathBuf)>,
        errors: &mut Vec<(String, RowError)>,
    ) -> Result<Self> {
        let tracts_reader = open_input("tracts", &config.tracts, used)?
            .ok_or_else(|| Error::InvalidConfig("--tracts is required".into()))?;
        let tracts = TractSet::from_geojson(tracts_reader)?;

        let listings = match open_input("listings", &config.listings, used)? {
            Some(r) => Some(keep("listings", parse_listings(r, config.strict)?, errors)),
            None => None,
        };
        let hotels: Option<Vec<HotelRecord>> = match open_input("hotels", &config.hotels, used)? {
            Some(r) => Some(keep("hotels", parse_hotels(r, config.strict)?, errors)),
            None => None,
        };
        let photographers = match open_input("photos", &config.photos, used)? {
            Some(r) => {
                let photos = keep("photos", parse_photos(r, config.strict)?, errors);
                let classes = classify_photographers(&photos, config.resident_threshold_days);
                Some((photos, classes))
            }
            None => None,
        };

        let mut datasets = Vec::new();
        if let Some(ls) = &hotels {
            let places: Vec<f64> = ls.iter().map(|h| f64::from(h.places)).collect();
            datasets.push(aggregate("hotels", &tracts, ls.iter().map(|h| h.location), Some(places))?);
        }
        if let Some(ls) = &listings {
            let places: Vec<f64> = ls.iter().map(|l| f64::from(l.beds)).collect();
            datasets.push(aggregate("airbnb", &tracts, ls.iter().map(|l| l.location), Some(places))?);
        }
        if let Some((photos, classes)) = &photographers {
            let tourists: BTreeSet<&str> =
                classes.iter().filter(|c| c.class == PhotographerKind::Tourist).map(|c| c.owner_id.as_str()).collect();
            let locs = photos.iter().filter(|p| tourists.contains(p.owner_id.as_str())).map(|p| p.location);
            datasets.push(aggregate("photos", &tracts, locs, None)?);
        }
        Ok(Context { tracts, listings, photographers, datasets })
    }

    fn has_inputs_for(&self, step: Subcommand) -> bool {
        match step {
            Subcommand::Bivariate => self.datasets.len() >= 2,
            Subcommand::Pressure => self.dataset("hotels").is_some() || self.dataset("airbnb").is_some(),
            Subcommand::ClassifyPhotos => self.photographers.is_some(),
            _ => true,
        }
    }

    fn dataset(&self, name: &str) -> Option<&Dataset> {
        self.datasets.iter().find(|d| d.name == name)
    }

    fn analysis_variable(&self, d: &Dataset, mode: ValueMode) -> Result<VariableVector> {
        match mode {
            ValueMode::Counts => Ok(d.counts.clone()),
            ValueMode::Places => Ok(d.places_or_counts().clone()),
            ValueMode::Density => density_per_hectare(d.places_or_counts(), &self.tracts),
        }
    }

    fn weights(&self, config: &RunConfig) -> Result<SpatialWeights> {
        let w = inverse_distance_band(&self.tracts.centroids(), config.radius, config.power)?;
        Ok(if config.row_standardize { w.row_standardize() } else { w })
    }

    fn require_datasets(&self, what: &str) -> Result<()> {
        if self.datasets.is_empty() {
            return Err(Error::InvalidConfig(format!("{what} needs at least one of --listings, --hotels, --photos")));
        }
        Ok(())
    }

    fn step(&self, step: Subcommand, config: &RunConfig, out: &mut Outputs) -> Result<()> {
        match step {
            Subcommand::Aggregate => self.aggregate_outputs(config, out),
            Subcommand::Weights => {
                let w = self.weights(config)?;
                w.write_triplets(out.create("weights.csv")?)?;
                let mut h = out.create("weights.json")?;
                w.write_header(&mut h)?;
                writeln!(h)?;
                h.flush()?;
                Ok(())
            }
            Subcommand::Moran => {
                self.require_datasets("moran")?;
                let w = self.weights(config)?;
                for d in &self.datasets {
                    let v = self.analysis_variable(d, config.value_mode)?;
                    let r = global_moran(v.values(), &w, &config.inference())?;
                    out.json(&format!("moran_{}.json", d.name), &json!({ "variable": d.name, "result": r }))?;
                }
                Ok(())
            }
            Subcommand::Lisa => {
                self.require_datasets("lisa")?;
                let w = self.weights(config)?;
                for d in &self.datasets {
                    let v = self.analysis_variable(d, config.value_mode)?;
                    let lisa = local_moran(v.values(), &w, &config.inference(), config.alpha)?;
                    self.write_lisa(out, &format!("lisa_{}", d.name), &format!("clusters_{}.csv", d.name), &lisa)?;
                }
                Ok(())
            }
            Subcommand::Bivariate => {
                let w = self.weights(config)?;
                let mut any = false;
                for (x, y) in [("hotels", "airbnb"), ("hotels", "photos"), ("airbnb", "photos")] {
                    let (Some(dx), Some(dy)) = (self.dataset(x), self.dataset(y)) else { continue };
                    any = true;
                    let vx = self.analysis_variable(dx, config.value_mode)?;
                    let vy = self.analysis_variable(dy, config.value_mode)?;
                    let g = bivariate_global_moran(vx.values(), vy.values(), &w, &config.inference())?;
                    out.json(&format!("bimoran_{x}_{y}.json"), &json!({ "x": x, "y": y, "result": g }))?;
                    let lisa = bivariate_local_moran(vx.values(), vy.values(), &w, &config.inference(), config.alpha)?;
                    self.write_lisa(out, &format!("bilisa_{x}_{y}"), &format!("biclusters_{x}_{y}.csv"), &lisa)?;
                }
                if !any {
                    return Err(Error::InvalidConfig(
                        "bivariate needs at least two of --listings, --hotels, --photos".into(),
                    ));
                }
                Ok(())
            }
            Subcommand::Pressure => self.pressure_outputs(config, out),
            Subcommand::ClassifyPhotos => self.photo_outputs(out),
            Subcommand::Synth | Subcommand::Pipeline => unreachable!("not a pipeline step"),
        }
    }

    fn aggregate_outputs(&self, config: &RunConfig, out: &mut Outputs) -> Result<()> {
        self.require_datasets("aggregate")?;
        let mut normalized = Vec::new();
        for d in &self.datasets {
            let mut w = csv::Writer::from_writer(out.create(&format!("stats_{}.csv", d.name))?);
            w.write_record(["variable", "count", "minimum", "maximum", "sum", "mean", "standard_deviation", "cv"])?;
            let counts_ha = density_per_hectare(&d.counts, &self.tracts)?;
            let mut rows = vec![("records", &d.counts), ("records_per_ha", &counts_ha)];
            let places_ha = d.places.as_ref().map(|p| density_per_hectare(p, &self.tracts)).transpose()?;
            if let (Some(p), Some(pha)) = (&d.places, &places_ha) {
                rows.push(("places", p));
                rows.push(("places_per_ha", pha));
            }
            for (label, v) in rows {
                let s = descriptive_stats(v.values())?;
                w.write_record([
                    label.to_string(),
                    s.count.to_string(),
                    s.minimum.to_string(),
                    s.maximum.to_string(),
                    s.sum.to_string(),
                    s.mean.to_string(),
                    s.standard_deviation.to_string(),
                    s.cv.map(|c| c.to_string()).unwrap_or_default(),
                ])?;
            }
            w.flush()?;

            self.analysis_variable(d, config.value_mode)?.write_csv(out.create(&format!("values_{}.csv", d.name))?)?;
            let z = normalize(&density_per_hectare(d.places_or_counts(), &self.tracts)?)?;
            z.write_csv(out.create(&format!("normalized_{}.csv", d.name))?)?;
            normalized.push((d.name, z));
        }
        let find = |n: &str| normalized.iter().find(|(k, _)| *k == n).map(|(_, v)| v);
        if let (Some(h), Some(a)) = (find("hotels"), find("airbnb")) {
            difference_map(h, a)?.write_csv(out.create("difference.csv")?)?;
        }

        let mut summary = Map::new();
        let assignment: Vec<Value> = self
            .datasets
            .iter()
            .map(|d| json!({ "dataset": d.name, "records": d.records, "assigned": d.records - d.unassigned, "unassigned": d.unassigned }))
            .collect();
        summary.insert("assignment".into(), Value::from(assignment));
        if let Some(ls) = self.listings.as_ref().filter(|l| !l.is_empty()) {
            summary.insert("host_concentration".into(), serde_json::to_value(host_concentration(ls)?)?);
            summary.insert("availability".into(), serde_json::to_value(availability_summary(ls)?)?);
            if !config.center_tracts.is_empty() {
                let occ = occupancy_proxy_comparison(ls, &self.tracts, &config.center_tracts)?;
                summary.insert("occupancy_proxy".into(), serde_json::to_value(occ)?);
            }
        }
        out.json("listing_summary.json", &summary)
    }

    fn write_lisa(&self, out: &mut Outputs, stem: &str, table: &str, lisa: &LocalMoran) -> Result<()> {
        let mut w = csv::Writer::from_writer(out.create(&format!("{stem}.csv"))?);
        w.write_record(["tract_id", "local_I", "pseudo_p", "label"])?;
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for (t, r) in self.tracts.tracts().iter().zip(&lisa.results) {
            w.write_record([t.id.clone(), opt(r.local_i), opt(r.pseudo_p), r.label.as_str().to_string()])?;
        }
        w.flush()?;

        let props: Vec<Map<String, Value>> = lisa
            .results
            .iter()
            .map(|r| {
                let mut m = Map::new();
                m.insert("local_I".into(), json!(r.local_i));
                m.insert("pseudo_p".into(), json!(r.pseudo_p));
                m.insert("label".into(), json!(r.label.as_str()));
                m
            })
            .collect();
        let mut g = out.create(&format!("{stem}.geojson"))?;
        self.tracts.write_geojson(&mut g, Some(&props))?;
        g.flush()?;

        let mut t = out.create(table)?;
        cluster_table(&lisa.results).write_csv(&mut t)?;
        t.flush()?;
        Ok(())
    }

    fn pressure_outputs(&self, config: &RunConfig, out: &mut Outputs) -> Result<()> {
        let hotels = self.dataset("hotels").and_then(|d| d.places.clone());
        let airbnb = self.dataset("airbnb").and_then(|d| d.places.clone());
        if hotels.is_none() && airbnb.is_none() {
            return Err(Error::InvalidConfig("pressure needs --hotels and/or --listings".into()));
        }
        let zeros = vec![0.0; self.tracts.len()];
        let vals = |v: &Option<VariableVector>| v.as_ref().map_or(zeros.clone(), |v| v.values().to_vec());
        let total: Vec<f64> = vals(&hotels).iter().zip(vals(&airbnb)).map(|(a, b)| a + b).collect();
        let total = VariableVector::for_tracts("places", "count", &self.tracts, total)?;
        pressure_ratio(&total, &self.tracts, config.min_density)?.write_csv(out.create("pressure.csv")?)?;
        for (name, v) in [("hotels", &hotels), ("airbnb", &airbnb)] {
            if let Some(v) = v {
                pressure_ratio(v, &self.tracts, config.min_density)?
                    .write_csv(out.create(&format!("pressure_{name}.csv"))?)?;
            }
        }
        Ok(())
    }

    fn photo_outputs(&self, out: &mut Outputs) -> Result<()> {
        let (photos, classes) =
            self.photographers.as_ref().ok_or_else(|| Error::InvalidConfig("classify-photos needs --photos".into()))?;
        let mut w = csv::Writer::from_writer(out.create("photographers.csv")?);
        w.write_record(["owner_id", "class", "span_days"])?;
        for c in classes {
            let class = match c.class {
                PhotographerKind::Tourist => "tourist",
                PhotographerKind::Resident => "resident",
            };
            w.write_record([c.owner_id.as_str(), class, &c.span_days.to_string()])?;
        }
        w.flush()?;

        let total_ha: f64 = self.tracts.tracts().iter().map(|t| t.area_ha).sum();
        let kind_of: std::collections::HashMap<&str, PhotographerKind> =
            classes.iter().map(|c| (c.owner_id.as_str(), c.class)).collect();
        let mut s = csv::Writer::from_writer(out.create("photo_summary.csv")?);
        s.write_record(["class", "photographers", "photos", "photos_per_ha"])?;
        for (label, kind) in [
            ("tourist", Some(PhotographerKind::Tourist)),
            ("resident", Some(PhotographerKind::Resident)),
            ("all", None),
        ] {
            let owners = classes.iter().filter(|c| kind.is_none_or(|k| c.class == k)).count();
            let n = photos.iter().filter(|p| kind.is_none_or(|k| kind_of[p.owner_id.as_str()] == k)).count();
            s.write_record([label.to_string(), owners.to_string(), n.to_string(), (n as f64 / total_ha).to_string()])?;
        }
        s.flush()?;
        Ok(())
    }
}

fn aggregate(
    name: &'static str,
    tracts: &TractSet,
    locations: impl Iterator<Item = crate::geo::GeoPoint>,
    places: Option<Vec<f64>>,
) -> Result<Dataset> {
    // points too far from the study area to project are unassigned
    let mut points: Vec<PlanarPoint> = Vec::new();
    let mut kept_places = Vec::new();
    let mut records = 0;
    for (k, loc) in locations.enumerate() {
        records += 1;
        if let Ok(p) = tracts.project(loc) {
            points.push(p);
            if let Some(pl) = &places {
                kept_places.push(pl[k]);
            }
        }
    }
    let unprojectable = records - points.len();
    let counts = assign_points_to_tracts(&points, None, tracts, name)?;
    let places = match places {
        Some(_) => {
            Some(assign_points_to_tracts(&points, Some(&kept_places), tracts, &format!("{name}_places"))?.vector)
        }
        None => None,
    };
    Ok(Dataset { name, unassigned: counts.unassigned + unprojectable, counts: counts.vector, places, records })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_validation() {
        let c = RunConfig::default();
        assert_eq!(c.radius, 1000.0);
        assert_eq!(c.permutations, 999);
        assert_eq!(c.alpha, 0.05);
        assert_eq!(c.value_mode, ValueMode::Places);
        assert!(c.row_standardize);
        c.validate().unwrap();
        assert!(RunConfig { permutations: 98, ..c.clone() }.validate().is_err());
        assert!(RunConfig { alpha: 0.6, ..c.clone() }.validate().is_err());
        assert!(RunConfig { radius: 0.0, ..c }.validate().is_err());
    }

    #[test]
    fn toml_overrides() {
        let c: RunConfig =
            toml::from_str("radius = 750.0\nvalue_mode = \"density\"\ncenter_tracts = [\"a\", \"b\"]").unwrap();
        assert_eq!(c.radius, 750.0);
        assert_eq!(c.value_mode, ValueMode::Density);
        assert_eq!(c.center_tracts.len(), 2);
        assert!(toml::from_str::<RunConfig>("radis = 3.0").is_err());
    }
}
