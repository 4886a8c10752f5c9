//! Age-stratified curation and fairness evaluation for deepfake detection
//! datasets.
//!
//! The crate is organised by pipeline stage:
//!
//! - [`age`]: domain types, age binning and frame-index selection
//! - [`ingest`]: manifest, descriptor, feature, score and raster readers/writers
//! - [`curation`]: distribution analysis, undersample-to-mean balancing,
//!   top-up and augmentation planning, stratified splitting
//! - [`matching`]: embedding + attribute scoring of source/target pairs
//! - [`quality`]: SSIM / PSNR and quality gating
//! - [`detector`]: reference logistic/MLP detector trained with Adam
//! - [`evaluation`]: ROC, AUC, pAUC, EER and age-disaggregated reports
//! - [`report`]: text/CSV tables and SVG charts
//!
//! Every stochastic step draws from [`rng::Streams`], so a single seed pins
//! the whole run.

pub mod age;
pub mod curation;
pub mod detector;
pub mod error;
pub mod evaluation;
pub mod ingest;
pub mod matching;
pub mod quality;
pub mod reference;
pub mod report;
pub mod rng;

pub use age::{bin_age, select_frame_indices, AgeGroup, CurationConfig, FrameRecord, Label, SourceDataset};
pub use error::{Error, Result};
