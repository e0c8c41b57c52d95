use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use textline::blobline::{build_blob_line_set, grouped_skeleton_label_raster, BlobLineSet};
use textline::extract::{extract_lines_with_blobs, ExtractionResult};
use textline::metrics::{self, regions_from_label_raster, regions_from_rings, EvalRegion};
use textline::pagexml::{read_page_xml, write_page_xml};
use textline::prep::{
    augment_warp, generate_synthetic_page, stitch_tiles, tile_page, Orientation, Tile,
    TileManifest, TileSpec,
};
use textline::raster::{
    load_binary_page, load_label_raster, render_overlay, save_binary_page, save_label_raster,
    BinaryPage, LabelMode, LabelRaster, Polarity,
};

use crate::{
    AugmentArgs, BatchArgs, EvaluateArgs, ExtractArgs, ExtractConfig, GenlabelsArgs, StitchArgs,
    SynthArgs, TileArgs,
};

#[derive(Debug)]
pub enum CliError {
    Core(textline::Error),
    Config(String),
    Batch { failed: usize, total: usize },
}

impl CliError {
    pub fn code(&self) -> &'static str {
        match self {
            CliError::Core(e) => e.code(),
            CliError::Config(_) => "E_CONFIG",
            CliError::Batch { .. } => "E_BATCH",
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Config(msg) => write!(f, "invalid configuration: {msg}"),
            CliError::Batch { failed, total } => write!(f, "{failed} of {total} pages failed"),
        }
    }
}

impl From<textline::Error> for CliError {
    fn from(e: textline::Error) -> Self {
        CliError::Core(e)
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| textline::Error::write(dir, e).into())
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    fs::write(path, text).map_err(|e| textline::Error::write(path, e).into())
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map_or_else(|| "page".to_string(), |s| s.to_string_lossy().into_owned())
}

fn is_xml(path: &Path) -> bool {
    path.extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("xml"))
}

fn file_name(path: &Path) -> String {
    path.file_name()
        .map_or_else(String::new, |s| s.to_string_lossy().into_owned())
}

/// Reproducibility record written next to the outputs.
#[derive(Serialize)]
struct RunRecord<'a> {
    tool_version: &'static str,
    command: &'static str,
    page: String,
    blob_source: String,
    config: &'a ExtractConfig,
    line_count: usize,
    outputs: Vec<String>,
}

fn blobs_from_page_xml(xml: &Path, size: (u32, u32), thickness: u32) -> Result<BlobLineSet> {
    let lines = read_page_xml(xml)?;
    let labels = grouped_skeleton_label_raster(&lines.grouped(), size, thickness)?;
    Ok(BlobLineSet::from_label_raster(&labels)?)
}

fn run_extraction(
    page_path: &Path,
    blob_source: BlobSource<'_>,
    out: &Path,
    cfg: &ExtractConfig,
) -> Result<ExtractionResult> {
    let page = load_binary_page(page_path, cfg.polarity)?;
    let (blobs, guide) = match blob_source {
        BlobSource::Mask(path) => {
            let mask = load_binary_page(path, cfg.polarity)?;
            page.check_same_size(mask.width(), mask.height())?;
            (build_blob_line_set(&mask)?, mask)
        }
        BlobSource::PageXml(path) => {
            let blobs = blobs_from_page_xml(path, page.size(), cfg.brush_thickness)?;
            let guide = blobs.label_raster().support();
            (blobs, guide)
        }
    };
    let result = extract_lines_with_blobs(&page, &blobs, &cfg.params)?;

    create_dir(out)?;
    let name = stem(page_path);
    let labels_path = out.join(format!("{name}.labels.png"));
    let xml_path = out.join(format!("{name}.xml"));
    let diag_path = out.join(format!("{name}.diagnostics.json"));
    let overlay_path = out.join(format!("{name}.overlay.png"));
    let run_path = out.join(format!("{name}.run.json"));

    save_label_raster(&result.pixel_labels, &labels_path, cfg.label_mode)?;
    write_page_xml(
        &xml_path,
        &file_name(page_path),
        page.size(),
        &result.polygons,
    )?;
    write_json(&diag_path, &result.diagnostics)?;
    let overlay = render_overlay(&page, &result.pixel_labels, Some(&guide))?;
    overlay
        .save(&overlay_path)
        .map_err(|e| textline::Error::write(&overlay_path, e))?;
    let record = RunRecord {
        tool_version: env!("CARGO_PKG_VERSION"),
        command: "extract",
        page: page_path.display().to_string(),
        blob_source: blob_source.describe(),
        config: cfg,
        line_count: result.line_count,
        outputs: [&labels_path, &xml_path, &diag_path, &overlay_path]
            .iter()
            .map(|p| file_name(p))
            .collect(),
    };
    write_json(&run_path, &record)?;
    log::info!(
        "{}: {} lines, energy {:.3}",
        page_path.display(),
        result.line_count,
        result.diagnostics.energy
    );
    Ok(result)
}

#[derive(Clone, Copy)]
enum BlobSource<'a> {
    Mask(&'a Path),
    PageXml(&'a Path),
}

impl BlobSource<'_> {
    fn describe(&self) -> String {
        match self {
            BlobSource::Mask(p) => format!("mask:{}", p.display()),
            BlobSource::PageXml(p) => format!("page-xml:{}", p.display()),
        }
    }
}

pub fn extract(args: ExtractArgs) -> Result<()> {
    let cfg = args.params.resolve()?;
    let source = match (&args.mask, &args.page_xml) {
        (Some(m), None) => BlobSource::Mask(m),
        (None, Some(x)) => BlobSource::PageXml(x),
        _ => {
            return Err(CliError::Config(
                "give exactly one of --mask and --page-xml".into(),
            ))
        }
    };
    let result = run_extraction(&args.page, source, &args.out, &cfg)?;
    println!(
        "{} lines written to {}",
        result.line_count,
        args.out.display()
    );
    Ok(())
}

fn list_images(dir: &Path) -> Result<Vec<PathBuf>> {
    let entries = fs::read_dir(dir).map_err(|e| textline::Error::read(dir, e))?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.extension().is_some_and(|e| {
                ["png", "pgm", "pbm"]
                    .iter()
                    .any(|x| e.eq_ignore_ascii_case(x))
            })
        })
        .collect();
    files.sort();
    Ok(files)
}

pub fn extract_batch(args: BatchArgs) -> Result<()> {
    let cfg = args.params.resolve()?;
    let pages = list_images(&args.pages)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.jobs)
        .build()
        .map_err(|e| CliError::Config(e.to_string()))?;
    let outcomes: Vec<(PathBuf, Result<usize>)> = pool.install(|| {
        pages
            .par_iter()
            .map(|page| {
                let mask = args.masks.join(page.file_name().expect("listed file"));
                let r = run_extraction(page, BlobSource::Mask(&mask), &args.out, &cfg)
                    .map(|r| r.line_count);
                (page.clone(), r)
            })
            .collect()
    });
    let mut failed = 0;
    for (page, r) in &outcomes {
        match r {
            Ok(n) => println!("ok    {} ({n} lines)", page.display()),
            Err(e) => {
                failed += 1;
                eprintln!("error[{}]: {}: {e}", e.code(), page.display());
            }
        }
    }
    if failed > 0 {
        return Err(CliError::Batch {
            failed,
            total: outcomes.len(),
        });
    }
    Ok(())
}

fn load_regions(
    path: &Path,
    page: Option<&BinaryPage>,
    merge: bool,
    size: &mut Option<(u32, u32)>,
) -> Result<Vec<EvalRegion>> {
    if is_xml(path) {
        let page = page.ok_or_else(|| {
            CliError::Config(format!(
                "{} is PAGE XML; --page is required",
                path.display()
            ))
        })?;
        let lines = read_page_xml(path)?;
        return Ok(regions_from_rings(&lines.grouped(), page, merge));
    }
    let mut labels = load_label_raster(path)?;
    if let Some(&(w, h)) = size.as_ref() {
        if labels.size() != (w, h) {
            return Err(textline::Error::DimensionMismatch {
                left_width: w,
                left_height: h,
                right_width: labels.width(),
                right_height: labels.height(),
            }
            .into());
        }
    }
    *size = Some(labels.size());
    if let Some(page) = page {
        labels = restrict_to_ink(&labels, page)?;
    }
    Ok(regions_from_label_raster(&labels))
}

fn restrict_to_ink(labels: &LabelRaster, page: &BinaryPage) -> Result<LabelRaster> {
    let (w, h) = labels.size();
    page.check_same_size(w, h)?;
    let ids = labels
        .labels()
        .iter()
        .zip(page.pixels())
        .map(|(&l, &ink)| if ink { l } else { 0 })
        .collect();
    Ok(LabelRaster::from_labels(w, h, ids)?)
}

pub fn evaluate(args: EvaluateArgs) -> Result<()> {
    let polarity = if args.ink_light {
        Polarity::InkLight
    } else {
        Polarity::InkDark
    };
    let page = args
        .page
        .as_deref()
        .map(|p| load_binary_page(p, polarity))
        .transpose()?;
    let mut size = page.as_ref().map(|p| p.size());
    let gt = load_regions(&args.gt, page.as_ref(), true, &mut size)?;
    let pred = load_regions(
        &args.pred,
        page.as_ref(),
        args.merge_pred_regions.is_on(),
        &mut size,
    )?;
    let report = metrics::evaluate(
        &gt,
        &pred,
        args.suite.into(),
        args.match_threshold,
        args.iu_threshold,
    )?;
    print!("{}", report.to_text());
    if let Some(out) = &args.out {
        write_json(out, &report)?;
    }
    Ok(())
}

pub fn synth(args: SynthArgs) -> Result<()> {
    let mut spec = textline::prep::SynthSpec::default();
    if let Some(v) = args.lines {
        spec.lines = v;
    }
    if let Some(v) = args.width {
        spec.width = v;
    }
    if let Some(v) = args.height {
        spec.height = v;
    }
    if let Some(v) = args.line_height {
        spec.line_height = v;
    }
    if let Some(v) = args.gap {
        spec.gap = v;
    }
    if let Some(v) = args.diacritic_density {
        spec.diacritic_density = v;
    }
    if let Some(v) = args.bridge_probability {
        spec.bridge_probability = v;
    }
    if let Some(o) = args.orientation {
        spec.orientation = match o {
            crate::OrientationArg::Horizontal => Orientation::Horizontal,
            crate::OrientationArg::Skewed => Orientation::Skewed {
                degrees: args.skew_degrees,
            },
            crate::OrientationArg::Curved => Orientation::Curved {
                amplitude: args.amplitude,
            },
        };
    }
    create_dir(&args.out)?;
    let mut pages = Vec::new();
    for i in 0..args.count {
        let seed = args.seed.wrapping_add(i);
        let synth = generate_synthetic_page(seed, &spec)?;
        let name = format!("synth_{seed:06}");
        let page_path = args.out.join(format!("{name}.png"));
        save_binary_page(&synth.page, &page_path)?;
        save_binary_page(&synth.blob_mask, args.out.join(format!("{name}.mask.png")))?;
        save_label_raster(
            &synth.labels,
            args.out.join(format!("{name}.gt.png")),
            LabelMode::Indexed,
        )?;
        write_page_xml(
            args.out.join(format!("{name}.xml")),
            &file_name(&page_path),
            synth.page.size(),
            &synth.polygons,
        )?;
        pages.push(name);
    }
    #[derive(Serialize)]
    struct Corpus<'a> {
        seed: u64,
        count: u64,
        spec: &'a textline::prep::SynthSpec,
        pages: Vec<String>,
    }
    write_json(
        &args.out.join("synth.json"),
        &Corpus {
            seed: args.seed,
            count: args.count,
            spec: &spec,
            pages,
        },
    )?;
    println!("{} pages written to {}", args.count, args.out.display());
    Ok(())
}

fn tile_file(x: u32, y: u32) -> String {
    format!("tile_{x:06}_{y:06}.png")
}

pub fn tile(args: TileArgs) -> Result<()> {
    let polarity = if args.ink_light {
        Polarity::InkLight
    } else {
        Polarity::InkDark
    };
    let page = load_binary_page(&args.page, polarity)?;
    let spec = TileSpec {
        window: args.window,
        inner: args.inner,
    };
    let tiles = tile_page(&page, &spec)?;
    create_dir(&args.out)?;
    for t in &tiles {
        save_binary_page(&t.image, args.out.join(tile_file(t.offset.0, t.offset.1)))?;
    }
    let manifest = TileManifest::new(spec, page.width(), page.height(), tile_file);
    write_json(&args.out.join("manifest.json"), &manifest)?;
    println!("{} tiles written to {}", tiles.len(), args.out.display());
    Ok(())
}

pub fn stitch(args: StitchArgs) -> Result<()> {
    let manifest_path = args.tiles.join("manifest.json");
    let text =
        fs::read_to_string(&manifest_path).map_err(|e| textline::Error::read(&manifest_path, e))?;
    let manifest: TileManifest = serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("{}: {e}", manifest_path.display())))?;
    let tiles = manifest
        .tiles
        .iter()
        .filter_map(|t| {
            let path = args.tiles.join(&t.file);
            path.exists().then(|| {
                Ok(Tile {
                    offset: (t.x, t.y),
                    image: load_binary_page(&path, Polarity::InkDark)?,
                })
            })
        })
        .collect::<Result<Vec<Tile>>>()?;
    let page = stitch_tiles(&tiles, (manifest.width, manifest.height), &manifest.spec)?;
    save_binary_page(&page, &args.out)?;
    Ok(())
}

pub fn augment(args: AugmentArgs) -> Result<()> {
    let polarity = if args.ink_light {
        Polarity::InkLight
    } else {
        Polarity::InkDark
    };
    let strip = load_binary_page(&args.strip, polarity)?;
    let outputs = augment_warp(&strip)?;
    create_dir(&args.out)?;
    let name = stem(&args.strip);
    for (img, suffix) in outputs
        .iter()
        .zip(["warp", "warp_hmirror", "warp_vmirror", "warp_both"])
    {
        save_binary_page(img, args.out.join(format!("{name}.{suffix}.png")))?;
    }
    Ok(())
}

pub fn genlabels(args: GenlabelsArgs) -> Result<()> {
    let lines = read_page_xml(&args.page_xml)?;
    let size = match (&args.page, lines.image_size) {
        (Some(p), _) => load_binary_page(p, Polarity::InkDark)?.size(),
        (None, Some(s)) => s,
        (None, None) => {
            return Err(CliError::Config(format!(
                "{} does not declare the page size; pass --page",
                args.page_xml.display()
            )))
        }
    };
    let labels = grouped_skeleton_label_raster(&lines.grouped(), size, args.brush_thickness)?;
    save_binary_page(&labels.support(), &args.out)?;
    if let Some(path) = &args.labels {
        save_label_raster(&labels, path, LabelMode::Indexed)?;
    }
    println!(
        "{} blob lines written to {}",
        labels.distinct_labels().len(),
        args.out.display()
    );
    Ok(())
}
