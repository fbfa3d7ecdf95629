//! Exploratory spatial analysis of tourist accommodation at census-tract
//! level.
//!
//! The crate covers the whole chain from raw point files to cluster maps:
//!
//! - [`geo`] and [`tracts`]: local projection, polygons, GeoJSON tract sets
//! - [`ingest`]: listings, hotels and photographs from CSV; photographer
//!   classification, host concentration and availability summaries
//! - [`tabulate`]: point-in-tract aggregation, densities, descriptive
//!   statistics, z-score normalization, difference maps, pressure ratios
//! - [`weights`]: inverse-distance band weights with island detection
//! - [`autocorr`]: univariate and bivariate global/local Moran's I with
//!   permutation inference and HH/LL/LH/HL labels
//! - [`synth`]: synthetic grids, SAR fields and a bundled synthetic city
//! - [`report`]: the run configuration, subcommands and output files used
//!   by the `tourism-esda` binary

pub mod autocorr;
pub mod error;
pub mod geo;
mod grid;
pub mod ingest;
pub mod report;
mod stats;
pub mod synth;
pub mod tabulate;
pub mod tracts;
pub mod weights;

pub use error::{Error, Result};
