use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use textline::components::Connectivity;
use textline::energy::SmoothnessScale;
use textline::extract::ExtractParams;
use textline::metrics::{Suite, DEFAULT_IU_THRESHOLD, DEFAULT_MATCH_THRESHOLD};
use textline::prep::{SynthSpec, TileSpec};
use textline::raster::{LabelMode, Polarity};

mod commands;

#[derive(Parser)]
#[command(
    name = "textline",
    version,
    about = "Text line extraction from blob-line masks"
)]
struct Cli {
    /// Print every default parameter as JSON and exit.
    #[arg(long)]
    print_config: bool,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Extract text lines from one page.
    Extract(ExtractArgs),
    /// Extract every page of a directory with a matching mask.
    ExtractBatch(BatchArgs),
    /// Compare predicted lines against ground truth.
    Evaluate(EvaluateArgs),
    /// Generate synthetic pages with ground truth.
    Synth(SynthArgs),
    /// Cut a page into overlapping tiles.
    Tile(TileArgs),
    /// Reassemble a page from tile predictions.
    Stitch(StitchArgs),
    /// Bend a text strip by 90 degrees and mirror it.
    Augment(AugmentArgs),
    /// Turn PAGE XML line polygons into a blob-line mask.
    Genlabels(GenlabelsArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum Switch {
    On,
    Off,
}

impl Switch {
    fn is_on(self) -> bool {
        self == Switch::On
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SuiteArg {
    Icdar2013,
    Icdar2017,
    Both,
}

impl From<SuiteArg> for Suite {
    fn from(s: SuiteArg) -> Suite {
        match s {
            SuiteArg::Icdar2013 => Suite::Icdar2013,
            SuiteArg::Icdar2017 => Suite::Icdar2017,
            SuiteArg::Both => Suite::Both,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum OrientationArg {
    Horizontal,
    Skewed,
    Curved,
}

fn parse_lambda(s: &str) -> Result<SmoothnessScale, String> {
    if s.eq_ignore_ascii_case("auto") {
        return Ok(SmoothnessScale::Auto);
    }
    match s.parse::<f64>() {
        Ok(v) if v >= 0.0 && v.is_finite() => Ok(SmoothnessScale::Fixed(v)),
        _ => Err(format!(
            "expected `auto` or a non-negative number, got {s:?}"
        )),
    }
}

fn parse_connectivity(s: &str) -> Result<Connectivity, String> {
    s.parse::<u8>()
        .ok()
        .and_then(Connectivity::from_number)
        .ok_or_else(|| format!("connectivity must be 4 or 8, got {s:?}"))
}

/// Everything `extract` needs besides paths. Loaded from `--config`, then
/// overridden by flags.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct ExtractConfig {
    params: ExtractParams,
    brush_thickness: u32,
    polarity: Polarity,
    label_mode: LabelMode,
}

impl Default for ExtractConfig {
    fn default() -> Self {
        ExtractConfig {
            params: ExtractParams::default(),
            brush_thickness: textline::blobline::DEFAULT_THICKNESS,
            polarity: Polarity::InkDark,
            label_mode: LabelMode::Indexed,
        }
    }
}

#[derive(Args, Clone)]
struct ParamArgs {
    /// JSON file with extraction parameters; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Neighbours per component in the smoothness graph.
    #[arg(long, env = "TEXTLINE_K")]
    k: Option<usize>,
    /// Smoothness scale: `auto` or a number.
    #[arg(long, env = "TEXTLINE_LAMBDA", value_parser = parse_lambda)]
    lambda: Option<SmoothnessScale>,
    /// Pixel connectivity of components: 4 or 8.
    #[arg(long, env = "TEXTLINE_CONNECTIVITY", value_parser = parse_connectivity)]
    connectivity: Option<Connectivity>,
    #[arg(long, env = "TEXTLINE_SPLIT_TOUCHING")]
    split_touching: Option<Switch>,
    #[arg(long, env = "TEXTLINE_MAX_SWEEPS")]
    max_sweeps: Option<usize>,
    /// Disk radius used to close lines before tracing polygons.
    #[arg(long, env = "TEXTLINE_CLOSING_RADIUS")]
    closing_radius: Option<f64>,
    /// Blob thickness when deriving blob lines from PAGE XML polygons.
    #[arg(long, env = "TEXTLINE_BRUSH_THICKNESS")]
    brush_thickness: Option<u32>,
    /// Treat light pixels as ink.
    #[arg(long)]
    ink_light: bool,
    /// Write color-coded label images instead of 16-bit ids.
    #[arg(long)]
    color_labels: bool,
}

impl ParamArgs {
    fn resolve(&self) -> Result<ExtractConfig, commands::CliError> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text =
                    std::fs::read_to_string(path).map_err(|e| textline::Error::read(path, e))?;
                serde_json::from_str(&text)
                    .map_err(|e| commands::CliError::Config(format!("{}: {e}", path.display())))?
            }
            None => ExtractConfig::default(),
        };
        let p = &mut cfg.params;
        if let Some(k) = self.k {
            p.k = k;
        }
        if let Some(l) = self.lambda {
            p.lambda = l;
        }
        if let Some(c) = self.connectivity {
            p.connectivity = c;
        }
        if let Some(s) = self.split_touching {
            p.split_touching = s.is_on();
        }
        if let Some(m) = self.max_sweeps {
            p.max_sweeps = m;
        }
        if let Some(r) = self.closing_radius {
            p.closing_radius = r;
        }
        if let Some(t) = self.brush_thickness {
            cfg.brush_thickness = t;
        }
        if self.ink_light {
            cfg.polarity = Polarity::InkLight;
        }
        if self.color_labels {
            cfg.label_mode = LabelMode::DistinctColors;
        }
        Ok(cfg)
    }
}

#[derive(Args)]
struct ExtractArgs {
    /// Binarized page image.
    #[arg(long)]
    page: PathBuf,
    /// Blob-line mask image (ink = blob).
    #[arg(
        long,
        conflicts_with = "page_xml",
        required_unless_present = "page_xml"
    )]
    mask: Option<PathBuf>,
    /// PAGE XML whose line polygons are turned into blob lines.
    #[arg(long)]
    page_xml: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    params: ParamArgs,
}

#[derive(Args)]
struct BatchArgs {
    /// Directory of page images.
    #[arg(long)]
    pages: PathBuf,
    /// Directory of masks named like the pages.
    #[arg(long)]
    masks: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Worker threads; 0 uses all cores.
    #[arg(long, default_value_t = 0, env = "TEXTLINE_JOBS")]
    jobs: usize,
    #[command(flatten)]
    params: ParamArgs,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Ground truth: label image or PAGE XML.
    #[arg(long)]
    gt: PathBuf,
    /// Prediction: label image or PAGE XML.
    #[arg(long)]
    pred: PathBuf,
    /// Page image; required for PAGE XML inputs, restricts label images to ink.
    #[arg(long)]
    page: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "both")]
    suite: SuiteArg,
    #[arg(long, env = "TEXTLINE_MATCH_THRESHOLD", default_value_t = DEFAULT_MATCH_THRESHOLD)]
    match_threshold: f64,
    #[arg(long, env = "TEXTLINE_IU_THRESHOLD", default_value_t = DEFAULT_IU_THRESHOLD)]
    iu_threshold: f64,
    /// Unite all polygons of a predicted line instead of keeping the largest.
    #[arg(
        long,
        env = "TEXTLINE_MERGE_PRED_REGIONS",
        value_enum,
        default_value = "off"
    )]
    merge_pred_regions: Switch,
    #[arg(long)]
    ink_light: bool,
    /// Write the JSON report here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long, env = "TEXTLINE_SEED", default_value_t = 0)]
    seed: u64,
    /// Number of pages; page `i` uses seed `seed + i`.
    #[arg(long, default_value_t = 1)]
    count: u64,
    #[arg(long)]
    lines: Option<usize>,
    #[arg(long)]
    width: Option<u32>,
    #[arg(long)]
    height: Option<u32>,
    #[arg(long)]
    line_height: Option<u32>,
    #[arg(long)]
    gap: Option<u32>,
    #[arg(long, value_enum)]
    orientation: Option<OrientationArg>,
    #[arg(long, default_value_t = 30.0)]
    skew_degrees: f64,
    #[arg(long, default_value_t = 16.0)]
    amplitude: f64,
    #[arg(long)]
    diacritic_density: Option<f64>,
    #[arg(long)]
    bridge_probability: Option<f64>,
}

#[derive(Args)]
struct TileArgs {
    #[arg(long)]
    page: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = TileSpec::default().window)]
    window: u32,
    #[arg(long, default_value_t = TileSpec::default().inner)]
    inner: u32,
    #[arg(long)]
    ink_light: bool,
}

#[derive(Args)]
struct StitchArgs {
    /// Directory holding `manifest.json` and one prediction per listed tile.
    #[arg(long)]
    tiles: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct AugmentArgs {
    #[arg(long)]
    strip: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    ink_light: bool,
}

#[derive(Args)]
struct GenlabelsArgs {
    #[arg(long)]
    page_xml: PathBuf,
    /// Blob-line mask to write.
    #[arg(long)]
    out: PathBuf,
    /// Also write the per-line label image.
    #[arg(long)]
    labels: Option<PathBuf>,
    /// Page image giving the size when the XML does not declare it.
    #[arg(long)]
    page: Option<PathBuf>,
    #[arg(long, env = "TEXTLINE_BRUSH_THICKNESS", default_value_t = textline::blobline::DEFAULT_THICKNESS)]
    brush_thickness: u32,
}

#[derive(Serialize)]
struct EvaluateDefaults {
    suite: Suite,
    match_threshold: f64,
    iu_threshold: f64,
    merge_pred_regions: Switch,
}

#[derive(Serialize)]
struct Defaults {
    extract: ExtractConfig,
    evaluate: EvaluateDefaults,
    tile: TileSpec,
    synth: SynthSpec,
}

fn print_config() {
    let defaults = Defaults {
        extract: ExtractConfig::default(),
        evaluate: EvaluateDefaults {
            suite: Suite::Both,
            match_threshold: DEFAULT_MATCH_THRESHOLD,
            iu_threshold: DEFAULT_IU_THRESHOLD,
            merge_pred_regions: Switch::Off,
        },
        tile: TileSpec::default(),
        synth: SynthSpec::default(),
    };
    println!(
        "{}",
        serde_json::to_string_pretty(&defaults).expect("defaults serialize")
    );
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if cli.print_config {
        print_config();
        return ExitCode::SUCCESS;
    }
    let Some(command) = cli.command else {
        eprintln!("error[E_USAGE]: no command given; see --help");
        return ExitCode::from(2);
    };
    let result = match command {
        Command::Extract(a) => commands::extract(a),
        Command::ExtractBatch(a) => commands::extract_batch(a),
        Command::Evaluate(a) => commands::evaluate(a),
        Command::Synth(a) => commands::synth(a),
        Command::Tile(a) => commands::tile(a),
        Command::Stitch(a) => commands::stitch(a),
        Command::Augment(a) => commands::augment(a),
        Command::Genlabels(a) => commands::genlabels(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.code());
            ExitCode::FAILURE
        }
    }
}
