//! Text line extraction from binarized handwritten document images.
//!
//! A page is reduced to its connected components. A set of *blob lines*
//! (thick strokes striking through each text line, produced by a detector or
//! derived from ground-truth polygons) guides a labeling of the components:
//! every component receives the blob line that minimizes
//!
//! ```text
//! E(f) = sum_e D(e, f_e) + sum_{e,e' neighbours} w(e,e') * [f_e != f_e']
//! ```
//!
//! where `D` is the distance from the component centroid to the nearest pixel
//! of the blob line and `w = lambda * exp(-beta * |c_e - c_e'|)` with
//! `beta = 1 / (2 * mean neighbour distance)`. The energy is minimized with
//! alpha-expansion moves, each solved as a minimum s-t cut.
//!
//! Module map:
//!
//! - [`raster`]: binary pages and label rasters, PNG/PGM I/O.
//! - [`components`]: connected component labeling.
//! - [`blobline`]: blob-line sets, exact distance queries, labels from polygons.
//! - [`energy`]: neighbour graph, data and smoothness costs.
//! - [`mincut`]: max-flow and alpha-expansion.
//! - [`extract`]: the end-to-end extraction pipeline and polygon tracing.
//! - [`metrics`]: ICDAR 2013 and ICDAR 2017 line segmentation metrics.
//! - [`prep`]: tiling, curved-line augmentation and a synthetic page generator.
//! - [`pagexml`]: reading and writing PAGE XML text line polygons.
//!
//! ```
//! use textline::prep::{generate_synthetic_page, SynthSpec};
//! use textline::extract::{extract_lines, ExtractParams};
//!
//! let synth = generate_synthetic_page(7, &SynthSpec::default()).unwrap();
//! let result = extract_lines(&synth.page, &synth.blob_mask, &ExtractParams::default()).unwrap();
//! assert_eq!(result.line_count, SynthSpec::default().lines);
//! ```

pub mod blobline;
pub mod components;
pub mod energy;
mod error;
pub mod extract;
pub mod geometry;
pub mod metrics;
pub mod mincut;
pub mod morphology;
pub mod pagexml;
pub mod prep;
pub mod raster;

pub use error::{Error, Result};

// The guide under book/src is compiled as doctests so its snippets cannot
// drift from the library.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/components.md")]
    mod components {}
    #[doc = include_str!("../../../book/src/blob_lines.md")]
    mod blob_lines {}
    #[doc = include_str!("../../../book/src/energy.md")]
    mod energy {}
    #[doc = include_str!("../../../book/src/alpha_expansion.md")]
    mod alpha_expansion {}
    #[doc = include_str!("../../../book/src/extraction.md")]
    mod extraction {}
    #[doc = include_str!("../../../book/src/metrics.md")]
    mod metrics {}
    #[doc = include_str!("../../../book/src/preparation.md")]
    mod preparation {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
