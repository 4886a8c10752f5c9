//! Browser bindings: a ROC/metric explorer, a balancing planner and an
//! SSIM/PSNR noise explorer. Each entry point returns a JSON string.
//!
//! The `*_json` functions are plain Rust so they can be tested natively;
//! the `#[wasm_bindgen]` wrappers only convert errors to JS exceptions.

use agefair_core::curation::{
    compute_mean_targets, plan_augmentation, plan_real_topup, plan_undersample, project_undersample,
    DistributionTable, PlanEntry,
};
use agefair_core::evaluation::{auc, eer, pauc, roc_curve, EvalConfig};
use agefair_core::ingest::RasterImage;
use agefair_core::quality::{mse, psnr, ssim, QualityConfig};
use agefair_core::reference::source_distribution;
use agefair_core::rng::Streams;
use agefair_core::{AgeGroup, Label};
use rand::Rng;
use serde::Serialize;
use wasm_bindgen::prelude::*;

#[derive(Debug, Serialize)]
pub struct MetricsView {
    pub n_fake: usize,
    pub n_real: usize,
    pub auc: f64,
    pub pauc: f64,
    pub eer: f64,
    pub roc: Vec<(f64, f64)>,
}

/// Parses `score,label` lines (label `fake`/`real` or `1`/`0`); blank
/// lines, `#` comments and a header line are skipped.
pub fn parse_scored(text: &str) -> Result<(Vec<f64>, Vec<Label>), String> {
    let (mut scores, mut labels) = (Vec::new(), Vec::new());
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with("score") {
            continue;
        }
        let mut parts = line.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty());
        let (Some(s), Some(l), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(format!("line {}: expected `score,label`", i + 1));
        };
        let score: f64 = s.parse().map_err(|_| format!("line {}: bad score {s:?}", i + 1))?;
        if !score.is_finite() {
            return Err(format!("line {}: score must be finite", i + 1));
        }
        let label = match l.to_ascii_lowercase().as_str() {
            "fake" | "1" => Label::Fake,
            "real" | "0" => Label::Real,
            _ => return Err(format!("line {}: bad label {l:?}", i + 1)),
        };
        scores.push(score);
        labels.push(label);
    }
    Ok((scores, labels))
}

pub fn metrics_json(text: &str, max_fpr: f64, normalization: &str) -> Result<String, String> {
    let cfg = EvalConfig { max_fpr, pauc_normalization: normalization.parse().map_err(|e| format!("{e}"))? };
    cfg.validate().map_err(|e| e.to_string())?;
    let (scores, labels) = parse_scored(text)?;
    let roc = roc_curve(&scores, &labels).ok_or("need at least one fake and one real score")?;
    let view = MetricsView {
        n_fake: labels.iter().filter(|&&l| l == Label::Fake).count(),
        n_real: labels.iter().filter(|&&l| l == Label::Real).count(),
        auc: auc(&scores, &labels).unwrap_or(f64::NAN),
        pauc: pauc(&scores, &labels, &cfg).unwrap_or(f64::NAN),
        eer: eer(&scores, &labels).unwrap_or(f64::NAN),
        roc,
    };
    serde_json::to_string(&view).map_err(|e| e.to_string())
}

#[derive(Debug, Serialize)]
pub struct PlanRow {
    pub label: &'static str,
    pub group: &'static str,
    pub current: usize,
    pub target: usize,
    pub action: &'static str,
    pub amount: usize,
    pub shortfall: usize,
}

impl From<&PlanEntry> for PlanRow {
    fn from(e: &PlanEntry) -> Self {
        Self {
            label: e.label.as_str(),
            group: e.group.as_str(),
            current: e.current,
            target: e.target,
            action: e.action.name(),
            amount: e.action.amount(),
            shortfall: e.shortfall,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct BalanceView {
    pub fake_target: Option<usize>,
    pub real_target: Option<usize>,
    pub undersample: Vec<PlanRow>,
    pub topup: Vec<PlanRow>,
    pub synthesize: Vec<PlanRow>,
    /// Per group: `[group, fake after undersampling, real after top-up]`.
    pub after: Vec<(&'static str, usize, usize)>,
}

/// Balancing plan for a distribution CSV (`label,age_group,source,count`).
/// An empty input uses the built-in source table.
pub fn balance_json(dist_csv: &str) -> Result<String, String> {
    let dist = if dist_csv.trim().is_empty() {
        source_distribution()
    } else {
        DistributionTable::from_csv(dist_csv).map_err(|e| e.to_string())?
    };
    let targets = compute_mean_targets(&dist);
    let projected = project_undersample(&dist, &targets);
    let rows = |plan: agefair_core::curation::BalancePlan| plan.entries.iter().map(PlanRow::from).collect::<Vec<_>>();
    let real_target = targets.get(Label::Real);
    let fake_target = targets.get(Label::Fake);
    let topup = real_target.map(|t| plan_real_topup(&projected, t));
    let after = AgeGroup::ALL
        .iter()
        .map(|&g| {
            let real = projected.video_count(Label::Real, g) + topup.as_ref().map_or(0, |p| p.amount_for(Label::Real, g));
            (g.as_str(), projected.video_count(Label::Fake, g), real)
        })
        .collect();
    let view = BalanceView {
        fake_target,
        real_target,
        undersample: rows(plan_undersample(&dist, &targets)),
        topup: topup.map(rows).unwrap_or_default(),
        synthesize: fake_target.map(|t| rows(plan_augmentation(&projected, t))).unwrap_or_default(),
        after,
    };
    serde_json::to_string(&view).map_err(|e| e.to_string())
}

#[derive(Debug, Serialize)]
pub struct NoiseView {
    pub side: usize,
    pub amplitude: u8,
    pub ssim: f64,
    pub psnr_db: f64,
    pub mse: f64,
    pub passes: bool,
    /// Grayscale pixels of the reference and the noisy copy, row-major.
    pub reference: Vec<u8>,
    pub noisy: Vec<u8>,
}

/// A smooth test pattern.
pub fn test_pattern(side: usize) -> RasterImage {
    let c = (side as f64 - 1.0) / 2.0;
    let pixels = (0..side * side)
        .map(|i| {
            let (x, y) = ((i % side) as f64, (i / side) as f64);
            let r = ((x - c).powi(2) + (y - c).powi(2)).sqrt() / side as f64;
            (127.5 + 100.0 * (r * 12.0).cos() * (1.0 - r) + 20.0 * (x / side as f64 - 0.5)).round().clamp(0.0, 255.0) as u8
        })
        .collect();
    RasterImage::gray(side, side, pixels).expect("square buffer")
}

/// SSIM/PSNR between the test pattern and a copy with uniform noise of
/// `±amplitude` grey levels, drawn from a seeded stream.
pub fn noise_json(side: usize, amplitude: u8, seed: u64) -> Result<String, String> {
    let cfg = QualityConfig::default();
    if !(cfg.window..=512).contains(&side) {
        return Err(format!("side must be in {}..=512", cfg.window));
    }
    let reference = test_pattern(side);
    let mut rng = Streams::new(seed).stream("demo.noise");
    let a = i32::from(amplitude);
    let noisy_px: Vec<u8> = reference
        .pixels()
        .iter()
        .map(|&p| (i32::from(p) + rng.gen_range(-a..=a)).clamp(0, 255) as u8)
        .collect();
    let noisy = RasterImage::gray(side, side, noisy_px).map_err(|e| e.to_string())?;
    let s = ssim(&reference, &noisy, &cfg).map_err(|e| e.to_string())?;
    let p = psnr(&reference, &noisy, &cfg).map_err(|e| e.to_string())?;
    let view = NoiseView {
        side,
        amplitude,
        ssim: s,
        psnr_db: p,
        mse: mse(&reference, &noisy).map_err(|e| e.to_string())?,
        passes: s >= cfg.min_ssim && p >= cfg.min_psnr_db,
        reference: reference.pixels().to_vec(),
        noisy: noisy.pixels().to_vec(),
    };
    serde_json::to_string(&view).map_err(|e| e.to_string())
}

#[wasm_bindgen]
pub fn metrics(text: &str, max_fpr: f64, normalization: &str) -> Result<String, JsValue> {
    metrics_json(text, max_fpr, normalization).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn balance(dist_csv: &str) -> Result<String, JsValue> {
    balance_json(dist_csv).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn noise(side: usize, amplitude: u8, seed: u64) -> Result<String, JsValue> {
    noise_json(side, amplitude, seed).map_err(|e| JsValue::from_str(&e))
}

/// The built-in source distribution, for prefilling the planner.
#[wasm_bindgen]
pub fn source_table_csv() -> String {
    source_distribution().to_csv()
}
