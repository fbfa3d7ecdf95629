use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand as ClapSubcommand, ValueEnum};
use serde_json::json;

use tourism_esda::report::{run_with_threads, RunConfig, Subcommand, ValueMode};
use tourism_esda::Error;

#[derive(Parser)]
#[command(version, about = "Exploratory spatial analysis of tourist accommodation and photographs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(ClapSubcommand)]
enum Command {
    /// Aggregate points to tracts and write descriptive statistics
    Aggregate(Opts),
    /// Build the inverse-distance weights matrix
    Weights(Opts),
    /// Global Moran's I for every dataset
    Moran(Opts),
    /// Local Moran's I and cluster maps
    Lisa(Opts),
    /// Bivariate global and local Moran's I for each dataset pair
    Bivariate(Opts),
    /// Tourist places per resident
    Pressure(Opts),
    /// Split photographers into tourists and residents
    ClassifyPhotos(Opts),
    /// Write the synthetic test city
    Synth(Opts),
    /// Run every analysis step
    Pipeline(Opts),
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Counts,
    Places,
    Density,
}

#[derive(Args)]
struct Opts {
    /// TOML file with default settings; flags override it
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    tracts: Option<PathBuf>,
    #[arg(long)]
    listings: Option<PathBuf>,
    #[arg(long)]
    hotels: Option<PathBuf>,
    #[arg(long)]
    photos: Option<PathBuf>,
    /// Distance band in meters
    #[arg(long)]
    radius: Option<f64>,
    /// Inverse-distance exponent
    #[arg(long)]
    power: Option<f64>,
    #[arg(long)]
    permutations: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    value_mode: Option<Mode>,
    /// Residents per hectare below which a tract is left out of pressure ratios
    #[arg(long)]
    min_density: Option<f64>,
    /// Comma-separated tract ids forming the city center
    #[arg(long, value_delimiter = ',')]
    center_tracts: Option<Vec<String>>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Abort on the first malformed row instead of skipping it
    #[arg(long)]
    strict: bool,
    /// Keep raw inverse-distance weights instead of row-standardizing
    #[arg(long)]
    raw_weights: bool,
    /// Worker threads; results do not depend on this
    #[arg(long)]
    threads: Option<usize>,
}

impl Opts {
    fn into_config(self) -> Result<(RunConfig, Option<usize>), Error> {
        let mut c = match &self.config {
            Some(p) => RunConfig::from_toml_file(p)?,
            None => RunConfig::default(),
        };
        macro_rules! set {
            ($($f:ident),*) => { $( if let Some(v) = self.$f { c.$f = v; } )* };
        }
        set!(radius, power, permutations, alpha, seed, min_density, out_dir);
        macro_rules! set_path {
            ($($f:ident),*) => { $( if self.$f.is_some() { c.$f = self.$f; } )* };
        }
        set_path!(tracts, listings, hotels, photos);
        if let Some(m) = self.value_mode {
            c.value_mode = match m {
                Mode::Counts => ValueMode::Counts,
                Mode::Places => ValueMode::Places,
                Mode::Density => ValueMode::Density,
            };
        }
        if let Some(ids) = self.center_tracts {
            c.center_tracts = ids.into_iter().filter(|s| !s.is_empty()).collect();
        }
        c.strict |= self.strict;
        if self.raw_weights {
            c.row_standardize = false;
        }
        Ok((c, self.threads))
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let (sub, opts) = match cli.command {
        Command::Aggregate(o) => (Subcommand::Aggregate, o),
        Command::Weights(o) => (Subcommand::Weights, o),
        Command::Moran(o) => (Subcommand::Moran, o),
        Command::Lisa(o) => (Subcommand::Lisa, o),
        Command::Bivariate(o) => (Subcommand::Bivariate, o),
        Command::Pressure(o) => (Subcommand::Pressure, o),
        Command::ClassifyPhotos(o) => (Subcommand::ClassifyPhotos, o),
        Command::Synth(o) => (Subcommand::Synth, o),
        Command::Pipeline(o) => (Subcommand::Pipeline, o),
    };
    let result = opts.into_config().and_then(|(config, threads)| run_with_threads(sub, &config, threads.unwrap_or(0)));
    match result {
        Ok(report) => {
            for f in &report.files {
                println!("{f}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", json!({ "error": { "kind": e.kind(), "message": e.to_string() } }));
            ExitCode::FAILURE
        }
    }
}
