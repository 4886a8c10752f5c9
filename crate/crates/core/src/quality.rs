//! SSIM and PSNR between a reference frame and a generated frame, and the
//! threshold gate applied to generated output.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::RasterImage;

/// PSNR reported for identical images.
pub const PSNR_CAP_DB: f64 = 99.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QualityConfig {
    pub k1: f64,
    pub k2: f64,
    pub dynamic_range: f64,
    pub window: usize,
    pub sigma: f64,
    pub min_ssim: f64,
    pub min_psnr_db: f64,
}

impl Default for QualityConfig {
    fn default() -> Self {
        Self {
            k1: 0.01,
            k2: 0.03,
            dynamic_range: 255.0,
            window: 11,
            sigma: 1.5,
            min_ssim: 0.2,
            min_psnr_db: 10.0,
        }
    }
}

impl QualityConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.k1 > 0.0 && self.k2 > 0.0) {
            return Err(Error::Config("K1 and K2 must be positive".into()));
        }
        if self.window == 0 || self.window.is_multiple_of(2) {
            return Err(Error::Config(format!("SSIM window must be odd, got {}", self.window)));
        }
        if !(self.sigma > 0.0 && self.dynamic_range > 0.0) {
            return Err(Error::Config("sigma and dynamic range must be positive".into()));
        }
        Ok(())
    }

    pub fn c1(&self) -> f64 {
        (self.k1 * self.dynamic_range).powi(2)
    }

    pub fn c2(&self) -> f64 {
        (self.k2 * self.dynamic_range).powi(2)
    }
}

/// Normalised 1-D Gaussian taps; the 2-D window is their outer product.
pub fn gaussian_kernel(size: usize, sigma: f64) -> Vec<f64> {
    let half = (size / 2) as f64;
    let mut k: Vec<f64> = (0..size)
        .map(|i| {
            let x = i as f64 - half;
            (-(x * x) / (2.0 * sigma * sigma)).exp()
        })
        .collect();
    let sum: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= sum);
    k
}

fn check_dims(a: &RasterImage, b: &RasterImage) -> Result<()> {
    if a.width() != b.width() || a.height() != b.height() {
        return Err(Error::validation(
            "image pair",
            format!(
                "dimension mismatch: {}x{} vs {}x{}",
                a.width(),
                a.height(),
                b.width(),
                b.height()
            ),
        ));
    }
    Ok(())
}

fn ssim_term(mu_a: f64, mu_b: f64, var_a: f64, var_b: f64, cov: f64, c1: f64, c2: f64) -> f64 {
    ((2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2)) / ((mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2))
}

/// Gaussian-weighted SSIM on luma, averaged over every window that fits
/// inside the image. Images smaller than the window use one global,
/// uniformly weighted window.
pub fn ssim(a: &RasterImage, b: &RasterImage, cfg: &QualityConfig) -> Result<f64> {
    check_dims(a, b)?;
    cfg.validate()?;
    let (w, h) = (a.width(), a.height());
    let (la, lb) = (a.luma(), b.luma());
    let (c1, c2) = (cfg.c1(), cfg.c2());

    if w < cfg.window || h < cfg.window {
        let n = (w * h) as f64;
        let mu_a = la.iter().sum::<f64>() / n;
        let mu_b = lb.iter().sum::<f64>() / n;
        let (mut va, mut vb, mut cov) = (0.0, 0.0, 0.0);
        for (x, y) in la.iter().zip(&lb) {
            va += (x - mu_a) * (x - mu_a);
            vb += (y - mu_b) * (y - mu_b);
            cov += (x - mu_a) * (y - mu_b);
        }
        return Ok(ssim_term(mu_a, mu_b, va / n, vb / n, cov / n, c1, c2));
    }

    let k = gaussian_kernel(cfg.window, cfg.sigma);
    let planes: [Vec<f64>; 5] = [
        la.clone(),
        lb.clone(),
        la.iter().map(|x| x * x).collect(),
        lb.iter().map(|x| x * x).collect(),
        la.iter().zip(&lb).map(|(x, y)| x * y).collect(),
    ];
    let [mu_a, mu_b, ea2, eb2, eab] = planes.map(|p| filter_valid(&p, w, h, &k));
    let n = mu_a.len();
    let total: f64 = (0..n)
        .map(|i| {
            let (ma, mb) = (mu_a[i], mu_b[i]);
            ssim_term(ma, mb, ea2[i] - ma * ma, eb2[i] - mb * mb, eab[i] - ma * mb, c1, c2)
        })
        .sum();
    Ok(total / n as f64)
}

/// Separable "valid" correlation of a `w`x`h` plane with `k` along both axes.
fn filter_valid(plane: &[f64], w: usize, h: usize, k: &[f64]) -> Vec<f64> {
    let size = k.len();
    let ow = w - size + 1;
    let oh = h - size + 1;
    let mut rows = vec![0.0; ow * h];
    for y in 0..h {
        let src = &plane[y * w..(y + 1) * w];
        for x in 0..ow {
            rows[y * ow + x] = k.iter().zip(&src[x..x + size]).map(|(a, b)| a * b).sum();
        }
    }
    let mut out = vec![0.0; ow * oh];
    for y in 0..oh {
        for x in 0..ow {
            out[y * ow + x] = k.iter().enumerate().map(|(i, kv)| kv * rows[(y + i) * ow + x]).sum();
        }
    }
    out
}

pub fn mse(a: &RasterImage, b: &RasterImage) -> Result<f64> {
    check_dims(a, b)?;
    if a.channels() != b.channels() {
        return Err(Error::validation(
            "image pair",
            format!("channel mismatch: {} vs {}", a.channels(), b.channels()),
        ));
    }
    let sum: f64 = a
        .pixels()
        .iter()
        .zip(b.pixels())
        .map(|(&x, &y)| {
            let d = f64::from(x) - f64::from(y);
            d * d
        })
        .sum();
    Ok(sum / a.pixels().len() as f64)
}

/// `10 log10(L^2 / MSE)` over all channels jointly.
pub fn psnr(a: &RasterImage, b: &RasterImage, cfg: &QualityConfig) -> Result<f64> {
    Ok(psnr_from_mse(mse(a, b)?, cfg.dynamic_range))
}

pub fn psnr_from_mse(mse: f64, dynamic_range: f64) -> f64 {
    if mse == 0.0 {
        PSNR_CAP_DB
    } else {
        10.0 * (dynamic_range * dynamic_range / mse).log10()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairQuality {
    pub id: String,
    pub ssim: f64,
    pub psnr_db: f64,
}

impl PairQuality {
    pub fn measure(id: impl Into<String>, reference: &RasterImage, generated: &RasterImage, cfg: &QualityConfig) -> Result<Self> {
        Ok(Self {
            id: id.into(),
            ssim: ssim(reference, generated, cfg)?,
            psnr_db: psnr(reference, generated, cfg)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct QualityReport {
    pub pairs: Vec<(PairQuality, bool)>,
    pub accepted: Vec<String>,
    pub rejected: Vec<String>,
    /// `None` when there are no pairs.
    pub mean_ssim: Option<f64>,
    pub mean_psnr_db: Option<f64>,
}

impl QualityReport {
    /// `id,ssim,psnr_db,pass` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("id,ssim,psnr_db,pass\n");
        for (p, pass) in &self.pairs {
            out.push_str(&format!("{},{},{},{}\n", p.id, p.ssim, p.psnr_db, pass));
        }
        out
    }

    pub fn summary(&self) -> String {
        let fmt = |v: Option<f64>| v.map_or_else(|| "none".to_string(), crate::report::format_metric);
        format!(
            "pairs,{}\naccepted,{}\nrejected,{}\nmean_ssim,{}\nmean_psnr_db,{}\n",
            self.pairs.len(),
            self.accepted.len(),
            self.rejected.len(),
            fmt(self.mean_ssim),
            fmt(self.mean_psnr_db)
        )
    }
}

pub fn gate(pairs: Vec<PairQuality>, cfg: &QualityConfig) -> QualityReport {
    let mut report = QualityReport::default();
    let n = pairs.len();
    let (mut sum_ssim, mut sum_psnr) = (0.0, 0.0);
    for p in pairs {
        let pass = p.ssim >= cfg.min_ssim && p.psnr_db >= cfg.min_psnr_db;
        if pass {
            report.accepted.push(p.id.clone());
        } else {
            report.rejected.push(p.id.clone());
        }
        sum_ssim += p.ssim;
        sum_psnr += p.psnr_db;
        report.pairs.push((p, pass));
    }
    if n > 0 {
        report.mean_ssim = Some(sum_ssim / n as f64);
        report.mean_psnr_db = Some(sum_psnr / n as f64);
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_is_normalised_and_symmetric() {
        let k = gaussian_kernel(11, 1.5);
        assert!((k.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        for i in 0..5 {
            assert_eq!(k[i], k[10 - i]);
        }
    }

    #[test]
    fn flat_black_vs_white() {
        let cfg = QualityConfig::default();
        let a = RasterImage::filled(16, 16, 0);
        let b = RasterImage::filled(16, 16, 255);
        let c1 = cfg.c1();
        let s = ssim(&a, &b, &cfg).unwrap();
        assert!((s - c1 / (255.0 * 255.0 + c1)).abs() < 1e-6);
        assert_eq!(psnr(&a, &b, &cfg).unwrap(), 0.0);
    }

    #[test]
    fn psnr_examples() {
        assert!((psnr_from_mse(650.25, 255.0) - 20.0).abs() < 1e-12);
        let a = RasterImage::filled(3, 3, 17);
        assert_eq!(psnr(&a, &a, &QualityConfig::default()).unwrap(), PSNR_CAP_DB);
    }

    #[test]
    fn small_images_use_global_window() {
        let a = RasterImage::gray(2, 2, vec![0, 50, 100, 150]).unwrap();
        let s = ssim(&a, &a, &QualityConfig::default()).unwrap();
        assert!((s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mismatched_dimensions_rejected() {
        let cfg = QualityConfig::default();
        let a = RasterImage::filled(12, 12, 0);
        let b = RasterImage::filled(12, 13, 0);
        assert!(ssim(&a, &b, &cfg).is_err());
        assert!(psnr(&a, &b, &cfg).is_err());
    }

    #[test]
    fn gate_thresholds() {
        let cfg = QualityConfig { min_ssim: 0.4, ..QualityConfig::default() };
        let pairs = vec![
            PairQuality { id: "a".into(), ssim: 0.5, psnr_db: 30.0 },
            PairQuality { id: "b".into(), ssim: 0.3, psnr_db: 30.0 },
        ];
        let r = gate(pairs, &cfg);
        assert_eq!(r.accepted, vec!["a"]);
        assert_eq!(r.rejected, vec!["b"]);
        assert!((r.mean_ssim.unwrap() - 0.4).abs() < 1e-15);

        let empty = gate(vec![], &cfg);
        assert!(empty.pairs.is_empty());
        assert_eq!(empty.mean_ssim, None);
        assert!(empty.summary().contains("mean_ssim,none"));
    }

    #[test]
    fn aggregate_prints_four_decimals() {
        let pairs = [0.3906, 0.4200]
            .iter()
            .enumerate()
            .map(|(i, &s)| PairQuality { id: i.to_string(), ssim: s, psnr_db: 20.0 })
            .collect();
        let r = gate(pairs, &QualityConfig::default());
        assert!(r.summary().contains("mean_ssim,0.4053"), "{}", r.summary());
    }
}
