//! ROC analysis and age-disaggregated reports.
//!
//! Fake is the positive class and higher scores mean "more fake". Tied
//! scores form a single threshold step everywhere (a diagonal ROC segment,
//! half credit in pair counting). Metrics are `None` whenever either class
//! is missing.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::age::{AgeGroup, Label};
use crate::error::{Error, Result};
use crate::ingest::ScoreRecord;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum PaucNormalization {
    /// Raw area over `[0, max_fpr]`.
    None,
    /// Raw area divided by `max_fpr`.
    #[default]
    Width,
    /// McClish standardisation: 0.5 for a chance-level curve, 1.0 for perfect.
    McClish,
}

impl FromStr for PaucNormalization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "none" | "raw" => Ok(Self::None),
            "width" => Ok(Self::Width),
            "mcclish" => Ok(Self::McClish),
            _ => Err(Error::Config(format!("unknown pAUC normalization {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvalConfig {
    pub max_fpr: f64,
    pub pauc_normalization: PaucNormalization,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            max_fpr: 0.1,
            pauc_normalization: PaucNormalization::Width,
        }
    }
}

impl EvalConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.max_fpr > 0.0 && self.max_fpr <= 1.0) {
            return Err(Error::Config(format!("max_fpr must lie in (0, 1], got {}", self.max_fpr)));
        }
        Ok(())
    }
}

/// Score blocks in descending score order, each with its (positive,
/// negative) counts.
fn tie_blocks(scores: &[f64], labels: &[Label]) -> Vec<(usize, usize)> {
    assert_eq!(scores.len(), labels.len(), "scores and labels differ in length");
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let mut blocks: Vec<(usize, usize)> = Vec::new();
    let mut prev: Option<f64> = None;
    for i in idx {
        let s = scores[i];
        if prev != Some(s) {
            blocks.push((0, 0));
            prev = Some(s);
        }
        let b = blocks.last_mut().expect("pushed above");
        if labels[i].is_positive() {
            b.0 += 1;
        } else {
            b.1 += 1;
        }
    }
    blocks
}

fn class_counts(labels: &[Label]) -> (usize, usize) {
    let pos = labels.iter().filter(|l| l.is_positive()).count();
    (pos, labels.len() - pos)
}

/// ROC vertices from (0,0) to (1,1) as the threshold sweeps downward over
/// distinct scores. Collinear intermediate vertices are dropped.
pub fn roc_curve(scores: &[f64], labels: &[Label]) -> Option<Vec<(f64, f64)>> {
    let (n_pos, n_neg) = class_counts(labels);
    if n_pos == 0 || n_neg == 0 {
        return None;
    }
    let mut counts: Vec<(usize, usize)> = vec![(0, 0)];
    let (mut tp, mut fp) = (0, 0);
    for (p, n) in tie_blocks(scores, labels) {
        tp += p;
        fp += n;
        if counts.len() >= 2 {
            let (fa, ta) = counts[counts.len() - 2];
            let (fb, tb) = counts[counts.len() - 1];
            let collinear = (fb - fa) as u128 * (tp - tb) as u128 == (tb - ta) as u128 * (fp - fb) as u128;
            if collinear {
                counts.pop();
            }
        }
        counts.push((fp, tp));
    }
    Some(
        counts
            .into_iter()
            .map(|(f, t)| (f as f64 / n_neg as f64, t as f64 / n_pos as f64))
            .collect(),
    )
}

/// Mann-Whitney AUC: share of (fake, real) pairs where the fake scores
/// higher, ties counting one half.
pub fn auc(scores: &[f64], labels: &[Label]) -> Option<f64> {
    let (n_pos, n_neg) = class_counts(labels);
    if n_pos == 0 || n_neg == 0 {
        return None;
    }
    // Doubled pair credit, accumulated exactly in integers.
    let mut credit: u128 = 0;
    let mut neg_below = n_neg as u128;
    for (p, n) in tie_blocks(scores, labels) {
        neg_below -= n as u128;
        credit += p as u128 * (2 * neg_below + n as u128);
    }
    Some(credit as f64 / (2 * n_pos as u128 * n_neg as u128) as f64)
}

/// Trapezoidal ROC area over `fpr in [0, max_fpr]`, interpolating
/// linearly at the cutoff.
pub fn partial_area(roc: &[(f64, f64)], max_fpr: f64) -> f64 {
    let mut area = 0.0;
    for w in roc.windows(2) {
        let ((x0, y0), (x1, y1)) = (w[0], w[1]);
        if x0 >= max_fpr {
            break;
        }
        if x1 <= max_fpr {
            area += (x1 - x0) * (y0 + y1) / 2.0;
        } else {
            let y_cut = y0 + (y1 - y0) * (max_fpr - x0) / (x1 - x0);
            area += (max_fpr - x0) * (y0 + y_cut) / 2.0;
        }
    }
    area
}

pub fn pauc(scores: &[f64], labels: &[Label], cfg: &EvalConfig) -> Option<f64> {
    let roc = roc_curve(scores, labels)?;
    let m = cfg.max_fpr;
    let raw = partial_area(&roc, m);
    Some(match cfg.pauc_normalization {
        PaucNormalization::None => raw,
        PaucNormalization::Width => raw / m,
        PaucNormalization::McClish => {
            let min_area = m * m / 2.0;
            0.5 * (1.0 + (raw - min_area) / (m - min_area))
        }
    })
}

/// Error rate where the ROC crosses `fpr == 1 - tpr`, interpolated along
/// the segment that brackets the crossing.
pub fn eer(scores: &[f64], labels: &[Label]) -> Option<f64> {
    let roc = roc_curve(scores, labels)?;
    eer_from_roc(&roc)
}

pub fn eer_from_roc(roc: &[(f64, f64)]) -> Option<f64> {
    // g = fpr - fnr rises monotonically from -1 at (0,0) to +1 at (1,1).
    let g = |(f, t): (f64, f64)| f - (1.0 - t);
    for w in roc.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (ga, gb) = (g(a), g(b));
        if ga == 0.0 {
            return Some(a.0);
        }
        if ga < 0.0 && gb >= 0.0 {
            let s = -ga / (gb - ga);
            return Some(a.0 + s * (b.0 - a.0));
        }
    }
    roc.last().map(|p| p.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Stratum {
    Overall,
    Group(AgeGroup),
}

impl Stratum {
    pub fn as_str(&self) -> &'static str {
        match self {
            Stratum::Overall => "overall",
            Stratum::Group(g) => g.as_str(),
        }
    }
}

impl fmt::Display for Stratum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Stratum {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.trim().eq_ignore_ascii_case("overall") {
            Ok(Stratum::Overall)
        } else {
            Ok(Stratum::Group(s.parse()?))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Auc,
    Pauc,
    Eer,
}

impl Metric {
    pub const ALL: [Metric; 3] = [Metric::Auc, Metric::Pauc, Metric::Eer];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Auc => "AUC",
            Metric::Pauc => "PAUC",
            Metric::Eer => "EER",
        }
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "auc" => Ok(Metric::Auc),
            "pauc" => Ok(Metric::Pauc),
            "eer" => Ok(Metric::Eer),
            _ => Err(Error::Config(format!("unknown metric {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MetricCell {
    pub auc: Option<f64>,
    pub pauc: Option<f64>,
    pub eer: Option<f64>,
    pub n_pos: usize,
    pub n_neg: usize,
}

impl MetricCell {
    pub fn compute(scores: &[f64], labels: &[Label], cfg: &EvalConfig) -> Self {
        let (n_pos, n_neg) = class_counts(labels);
        Self {
            auc: auc(scores, labels),
            pauc: pauc(scores, labels, cfg),
            eer: eer(scores, labels),
            n_pos,
            n_neg,
        }
    }

    pub fn get(&self, metric: Metric) -> Option<f64> {
        match metric {
            Metric::Auc => self.auc,
            Metric::Pauc => self.pauc,
            Metric::Eer => self.eer,
        }
    }

    pub fn is_absent(&self) -> bool {
        self.auc.is_none()
    }
}

/// (model, train set, test set).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Context {
    pub model_id: String,
    pub train_set: String,
    pub test_set: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct MetricReport {
    /// Contexts in order of first appearance.
    pub contexts: Vec<Context>,
    pub cells: BTreeMap<(Context, Stratum), MetricCell>,
}

pub const REPORT_HEADER: &str = "model,train,test,group,auc,pauc,eer,n_pos,n_neg";

impl MetricReport {
    pub fn cell(&self, ctx: &Context, stratum: Stratum) -> Option<&MetricCell> {
        self.cells.get(&(ctx.clone(), stratum))
    }

    pub fn insert(&mut self, ctx: Context, stratum: Stratum, cell: MetricCell) {
        if !self.contexts.contains(&ctx) {
            self.contexts.push(ctx.clone());
        }
        self.cells.insert((ctx, stratum), cell);
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("{REPORT_HEADER}\n");
        let f = |v: Option<f64>| v.map_or_else(|| "none".to_string(), |x| x.to_string());
        for ctx in &self.contexts {
            for ((c, stratum), cell) in self.cells.range((ctx.clone(), Stratum::Overall)..) {
                if c != ctx {
                    break;
                }
                out.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{}\n",
                    c.model_id,
                    c.train_set,
                    c.test_set,
                    stratum,
                    f(cell.auc),
                    f(cell.pauc),
                    f(cell.eer),
                    cell.n_pos,
                    cell.n_neg
                ));
            }
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut report = MetricReport::default();
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, h)) if h.trim() == REPORT_HEADER => {}
            _ => return Err(Error::validation("metric report", format!("expected header {REPORT_HEADER}"))),
        }
        for (i, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let ctx = || format!("metric report line {}", i + 1);
            let f: Vec<&str> = line.split(',').map(str::trim).collect();
            if f.len() != 9 {
                return Err(Error::validation(ctx(), "expected 9 fields"));
            }
            let metric = |s: &str| -> Result<Option<f64>> {
                if s.eq_ignore_ascii_case("none") {
                    return Ok(None);
                }
                let v: f64 = s.parse().map_err(|_| Error::validation(ctx(), format!("bad value {s:?}")))?;
                if !v.is_finite() {
                    return Err(Error::NonFinite(ctx()));
                }
                Ok(Some(v))
            };
            let count = |s: &str| s.parse::<usize>().map_err(|_| Error::validation(ctx(), "bad count"));
            report.insert(
                Context {
                    model_id: f[0].to_string(),
                    train_set: f[1].to_string(),
                    test_set: f[2].to_string(),
                },
                f[3].parse()?,
                MetricCell {
                    auc: metric(f[4])?,
                    pauc: metric(f[5])?,
                    eer: metric(f[6])?,
                    n_pos: count(f[7])?,
                    n_neg: count(f[8])?,
                },
            );
        }
        Ok(report)
    }
}

/// Overall and per-age-group cells for every (model, train, test) context.
/// All five groups are reported; those without both classes are absent.
/// Rows whose age group is `none` count towards the overall cell only.
pub fn evaluate(records: &[ScoreRecord], cfg: &EvalConfig) -> Result<MetricReport> {
    cfg.validate()?;
    let mut report = MetricReport::default();
    let mut grouped: Vec<(Context, Vec<&ScoreRecord>)> = Vec::new();
    for r in records {
        let ctx = Context {
            model_id: r.model_id.clone(),
            train_set: r.train_set.clone(),
            test_set: r.test_set.clone(),
        };
        match grouped.iter_mut().find(|(c, _)| *c == ctx) {
            Some((_, rows)) => rows.push(r),
            None => grouped.push((ctx, vec![r])),
        }
    }
    for (ctx, rows) in grouped {
        let cell_for = |rows: &[&ScoreRecord]| {
            let scores: Vec<f64> = rows.iter().map(|r| r.score).collect();
            let labels: Vec<Label> = rows.iter().map(|r| r.label).collect();
            MetricCell::compute(&scores, &labels, cfg)
        };
        report.insert(ctx.clone(), Stratum::Overall, cell_for(&rows));
        for g in AgeGroup::ALL {
            let sub: Vec<&ScoreRecord> = rows.iter().copied().filter(|r| r.age_group == Some(g)).collect();
            report.insert(ctx.clone(), Stratum::Group(g), cell_for(&sub));
        }
    }
    Ok(report)
}

/// Max minus min of `metric` over the age-group cells of one context that
/// have a value; `None` with fewer than two such cells.
pub fn fairness_gap(report: &MetricReport, ctx: &Context, metric: Metric) -> Option<f64> {
    let values: Vec<f64> = AgeGroup::ALL
        .iter()
        .filter_map(|&g| report.cell(ctx, Stratum::Group(g)))
        .filter_map(|c| c.get(metric))
        .collect();
    if values.len() < 2 {
        return None;
    }
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    Some(max - min)
}
