//! Distribution analysis, undersample-to-mean balancing, top-up and
//! augmentation planning, and stratified splitting.
//!
//! Balancing only touches the video sources (Celeb-DF and FaceForensics++,
//! pooled). UTKFace is a reservoir of real faces used for top-up and as
//! swap sources; synthetic records come back from the generator.

use std::collections::BTreeMap;
use std::fmt;

use rand::seq::index;
use rand::seq::SliceRandom;

use crate::age::{AgeGroup, FrameRecord, Label, SourceDataset};
use crate::error::{Error, Result};
use crate::ingest::Manifest;
use crate::rng::{self, Streams};

/// Exact counts by (label, age group, source).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DistributionTable {
    counts: BTreeMap<(Label, AgeGroup, SourceDataset), usize>,
}

impl DistributionTable {
    pub fn from_counts(cells: impl IntoIterator<Item = ((Label, AgeGroup, SourceDataset), usize)>) -> Self {
        let mut counts = BTreeMap::new();
        for (key, n) in cells {
            if n > 0 {
                *counts.entry(key).or_insert(0) += n;
            }
        }
        Self { counts }
    }

    pub fn count(&self, label: Label, group: AgeGroup, source: SourceDataset) -> usize {
        self.counts.get(&(label, group, source)).copied().unwrap_or(0)
    }

    /// Celeb-DF + FaceForensics++ count for one cell.
    pub fn video_count(&self, label: Label, group: AgeGroup) -> usize {
        self.count(label, group, SourceDataset::CelebDF) + self.count(label, group, SourceDataset::FaceForensicsPP)
    }

    pub fn row_total(&self, label: Label, group: AgeGroup) -> usize {
        SourceDataset::ALL.iter().map(|&s| self.count(label, group, s)).sum()
    }

    pub fn total(&self) -> usize {
        self.counts.values().sum()
    }

    /// Non-zero cells in (label, group, source) order.
    pub fn cells(&self) -> impl Iterator<Item = ((Label, AgeGroup, SourceDataset), usize)> + '_ {
        self.counts.iter().map(|(&k, &v)| (k, v))
    }

    pub fn has_source(&self, source: SourceDataset) -> bool {
        self.counts.keys().any(|&(_, _, s)| s == source)
    }

    /// `label,age_group,source,count` rows for every non-zero cell.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("label,age_group,source,count\n");
        for ((l, g, s), n) in self.cells() {
            out.push_str(&format!("{l},{g},{s},{n}\n"));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let header = text.lines().next().unwrap_or_default().trim();
        if header != "label,age_group,source,count" {
            return Err(Error::validation("distribution line 1", "expected header label,age_group,source,count"));
        }
        let mut cells = Vec::new();
        for (i, line) in text.lines().enumerate().skip(1) {
            if line.trim().is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split(',').map(str::trim).collect();
            if f.len() != 4 {
                return Err(Error::validation(format!("distribution line {}", i + 1), "expected 4 fields"));
            }
            let n = f[3]
                .parse()
                .map_err(|_| Error::validation(format!("distribution line {}", i + 1), "bad count"))?;
            cells.push(((f[0].parse()?, f[1].parse()?, f[2].parse()?), n));
        }
        Ok(Self::from_counts(cells))
    }
}

pub fn analyze_distribution(manifest: &Manifest) -> DistributionTable {
    let mut counts = BTreeMap::new();
    for r in &manifest.records {
        *counts.entry((r.label, r.age_group(), r.source)).or_insert(0) += 1;
    }
    DistributionTable { counts }
}

/// Per-label balancing targets.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MeanTargets {
    pub per_label: BTreeMap<Label, usize>,
    /// Labels with no populated video-source group.
    pub undefined: Vec<Label>,
}

impl MeanTargets {
    pub fn get(&self, label: Label) -> Option<usize> {
        self.per_label.get(&label).copied()
    }
}

/// Floor of the mean video-source count over the groups that have any
/// video-source records. Empty groups are left out of the denominator.
pub fn compute_mean_targets(dist: &DistributionTable) -> MeanTargets {
    let mut out = MeanTargets::default();
    for label in Label::ALL {
        let populated: Vec<usize> = AgeGroup::ALL
            .iter()
            .map(|&g| dist.video_count(label, g))
            .filter(|&n| n > 0)
            .collect();
        if populated.is_empty() {
            out.undefined.push(label);
        } else {
            out.per_label
                .insert(label, populated.iter().sum::<usize>() / populated.len());
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UndersampleResult {
    pub kept: Manifest,
    /// Removed frame ids in manifest order.
    pub removed: Vec<String>,
}

fn stratum_stream(base: &str, label: Label, group: AgeGroup) -> String {
    format!("{base}/{label}/{group}")
}

/// Reduces every over-target video-source cell to exactly `target` records,
/// drawn uniformly without replacement from the pooled Celeb-DF +
/// FaceForensics++ records of that cell. Other sources pass through.
pub fn undersample(manifest: &Manifest, targets: &MeanTargets, seed: u64) -> UndersampleResult {
    let streams = Streams::new(seed);
    let mut pools: BTreeMap<(Label, AgeGroup), Vec<usize>> = BTreeMap::new();
    for (i, r) in manifest.records.iter().enumerate() {
        if r.source.is_video_source() {
            pools.entry((r.label, r.age_group())).or_default().push(i);
        }
    }
    let mut keep = vec![true; manifest.records.len()];
    for ((label, group), pool) in &pools {
        let Some(target) = targets.get(*label) else { continue };
        if pool.len() <= target {
            continue;
        }
        let mut rng = streams.stream(&stratum_stream(rng::UNDERSAMPLE, *label, *group));
        let mut retained = vec![false; pool.len()];
        for j in index::sample(&mut rng, pool.len(), target) {
            retained[j] = true;
        }
        for (&i, &r) in pool.iter().zip(&retained) {
            keep[i] = r;
        }
    }
    let mut kept = Vec::new();
    let mut removed = Vec::new();
    for (r, k) in manifest.records.iter().zip(keep) {
        if k {
            kept.push(r.clone());
        } else {
            removed.push(r.frame_id.clone());
        }
    }
    UndersampleResult {
        kept: Manifest {
            records: kept,
            provenance: manifest.provenance.clone(),
        },
        removed,
    }
}

/// The distribution `undersample` would produce, without drawing. Combined
/// video-source totals are exact; an over-target cell is split across
/// sources in proportion to their counts (largest remainder, ties to the
/// earlier source), which is the expectation of the actual draw rounded.
pub fn project_undersample(dist: &DistributionTable, targets: &MeanTargets) -> DistributionTable {
    let mut counts: BTreeMap<(Label, AgeGroup, SourceDataset), usize> = dist.cells().collect();
    for label in Label::ALL {
        let Some(target) = targets.get(label) else { continue };
        for group in AgeGroup::ALL {
            let total = dist.video_count(label, group);
            if total <= target {
                continue;
            }
            let sources = [SourceDataset::CelebDF, SourceDataset::FaceForensicsPP];
            let mut shares: Vec<(usize, usize, SourceDataset)> = sources
                .iter()
                .map(|&s| {
                    let n = dist.count(label, group, s) * target;
                    (n / total, n % total, s)
                })
                .collect();
            let mut left = target - shares.iter().map(|s| s.0).sum::<usize>();
            let mut order: Vec<usize> = (0..shares.len()).collect();
            order.sort_by(|&a, &b| shares[b].1.cmp(&shares[a].1).then(a.cmp(&b)));
            for i in order {
                if left == 0 {
                    break;
                }
                shares[i].0 += 1;
                left -= 1;
            }
            for (n, _, s) in shares {
                counts.insert((label, group, s), n);
            }
        }
    }
    DistributionTable::from_counts(counts)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BalanceAction {
    Keep,
    Undersample(usize),
    TopUpReal(usize),
    Synthesize(usize),
}

impl BalanceAction {
    pub fn name(&self) -> &'static str {
        match self {
            BalanceAction::Keep => "keep",
            BalanceAction::Undersample(_) => "undersample",
            BalanceAction::TopUpReal(_) => "topup_real",
            BalanceAction::Synthesize(_) => "synthesize",
        }
    }

    pub fn amount(&self) -> usize {
        match *self {
            BalanceAction::Keep => 0,
            BalanceAction::Undersample(n) | BalanceAction::TopUpReal(n) | BalanceAction::Synthesize(n) => n,
        }
    }
}

impl fmt::Display for BalanceAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.name(), self.amount())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlanEntry {
    pub label: Label,
    pub group: AgeGroup,
    pub current: usize,
    pub target: usize,
    pub action: BalanceAction,
    /// Requested amount the available pool could not cover.
    pub shortfall: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BalancePlan {
    pub entries: Vec<PlanEntry>,
}

impl BalancePlan {
    pub fn total(&self, pick: impl Fn(&BalanceAction) -> bool) -> usize {
        self.entries.iter().filter(|e| pick(&e.action)).map(|e| e.action.amount()).sum()
    }

    pub fn amount_for(&self, label: Label, group: AgeGroup) -> usize {
        self.entries
            .iter()
            .filter(|e| e.label == label && e.group == group)
            .map(|e| e.action.amount())
            .sum()
    }

    pub fn extend(&mut self, other: BalancePlan) {
        self.entries.extend(other.entries);
    }

    /// Machine-readable plan consumed by the generation bridge.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("label,age_group,current,target,action,amount,shortfall\n");
        for e in &self.entries {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                e.label,
                e.group,
                e.current,
                e.target,
                e.action.name(),
                e.action.amount(),
                e.shortfall
            ));
        }
        out
    }
}

/// Undersampling actions implied by `targets` on the pre-balancing table.
pub fn plan_undersample(dist: &DistributionTable, targets: &MeanTargets) -> BalancePlan {
    let mut plan = BalancePlan::default();
    for label in Label::ALL {
        let Some(target) = targets.get(label) else { continue };
        for group in AgeGroup::ALL {
            let current = dist.video_count(label, group);
            if current == 0 {
                continue;
            }
            let action = if current > target {
                BalanceAction::Undersample(current - target)
            } else {
                BalanceAction::Keep
            };
            plan.entries.push(PlanEntry { label, group, current, target, action, shortfall: 0 });
        }
    }
    plan
}

/// Real-face top-up from UTKFace, capped by the UTKFace pool of each group.
pub fn plan_real_topup(dist_after_undersample: &DistributionTable, target_real: usize) -> BalancePlan {
    let mut plan = BalancePlan::default();
    for group in AgeGroup::ALL {
        let current = dist_after_undersample.video_count(Label::Real, group);
        let wanted = target_real.saturating_sub(current);
        let pool = dist_after_undersample.count(Label::Real, group, SourceDataset::UTKFace);
        let granted = wanted.min(pool);
        plan.entries.push(PlanEntry {
            label: Label::Real,
            group,
            current,
            target: target_real,
            action: if granted > 0 { BalanceAction::TopUpReal(granted) } else { BalanceAction::Keep },
            shortfall: wanted - granted,
        });
    }
    plan
}

/// Synthetic fakes needed to lift every fake group to `target_fake`.
pub fn plan_augmentation(dist_after_undersample: &DistributionTable, target_fake: usize) -> BalancePlan {
    let mut plan = BalancePlan::default();
    for group in AgeGroup::ALL {
        let current = dist_after_undersample.video_count(Label::Fake, group);
        let need = target_fake.saturating_sub(current);
        plan.entries.push(PlanEntry {
            label: Label::Fake,
            group,
            current,
            target: target_fake,
            action: if need > 0 { BalanceAction::Synthesize(need) } else { BalanceAction::Keep },
            shortfall: 0,
        });
    }
    plan
}

/// Keeps all non-UTKFace rows and, per real group, the number of UTKFace
/// rows granted by `topup`, sampled uniformly with a per-group stream.
pub fn apply_real_topup(manifest: &Manifest, topup: &BalancePlan, seed: u64) -> Manifest {
    let streams = Streams::new(seed);
    let mut pools: BTreeMap<AgeGroup, Vec<usize>> = BTreeMap::new();
    for (i, r) in manifest.records.iter().enumerate() {
        if r.source == SourceDataset::UTKFace && r.label == Label::Real {
            pools.entry(r.age_group()).or_default().push(i);
        }
    }
    let mut keep: Vec<bool> = manifest
        .records
        .iter()
        .map(|r| !(r.source == SourceDataset::UTKFace && r.label == Label::Real))
        .collect();
    for (group, pool) in &pools {
        let n = topup
            .entries
            .iter()
            .filter(|e| e.label == Label::Real && e.group == *group)
            .map(|e| match e.action {
                BalanceAction::TopUpReal(n) => n,
                _ => 0,
            })
            .sum::<usize>()
            .min(pool.len());
        let mut rng = streams.stream(&stratum_stream(rng::TOPUP, Label::Real, *group));
        for j in index::sample(&mut rng, pool.len(), n) {
            keep[pool[j]] = true;
        }
    }
    manifest.filtered({
        let mut it = keep.into_iter();
        move |_| it.next().unwrap_or(false)
    })
}

/// Final (label, group) totals once top-ups and the achieved synthetic
/// counts are added to the undersampled video-source counts.
pub fn final_totals(
    dist_after_undersample: &DistributionTable,
    topup: &BalancePlan,
    achieved_synthetic: &BTreeMap<AgeGroup, usize>,
) -> BTreeMap<(Label, AgeGroup), usize> {
    let mut out = BTreeMap::new();
    for group in AgeGroup::ALL {
        let real = dist_after_undersample.video_count(Label::Real, group) + topup.amount_for(Label::Real, group);
        let fake = dist_after_undersample.video_count(Label::Fake, group)
            + achieved_synthetic.get(&group).copied().unwrap_or(0);
        out.insert((Label::Real, group), real);
        out.insert((Label::Fake, group), fake);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub train: Manifest,
    pub test: Manifest,
}

/// Train size for a stratum of `n`: `round(ratio * n)` with halves up, and
/// at least one record whenever the stratum is non-empty.
pub fn stratum_train_size(n: usize, ratio: f64) -> usize {
    if n == 0 {
        return 0;
    }
    let k = (ratio * n as f64 + 0.5).floor() as usize;
    k.clamp(1, n)
}

/// Per-(label, age group) split; both halves keep the input order.
pub fn stratified_split(manifest: &Manifest, ratio: f64, seed: u64) -> Result<Split> {
    stratified_split_with_stream(manifest, ratio, seed, rng::SPLIT)
}

pub fn stratified_split_with_stream(manifest: &Manifest, ratio: f64, seed: u64, stream: &str) -> Result<Split> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::Config(format!("split ratio must lie in (0, 1), got {ratio}")));
    }
    let streams = Streams::new(seed);
    let mut strata: BTreeMap<(Label, AgeGroup), Vec<usize>> = BTreeMap::new();
    for (i, r) in manifest.records.iter().enumerate() {
        strata.entry((r.label, r.age_group())).or_default().push(i);
    }
    let mut in_train = vec![false; manifest.records.len()];
    for ((label, group), mut members) in strata {
        let k = stratum_train_size(members.len(), ratio);
        let mut rng = streams.stream(&stratum_stream(stream, label, group));
        members.shuffle(&mut rng);
        for &i in &members[..k] {
            in_train[i] = true;
        }
    }
    let pick = |want: bool| -> Vec<FrameRecord> {
        manifest
            .records
            .iter()
            .zip(&in_train)
            .filter(|(_, &t)| t == want)
            .map(|(r, _)| r.clone())
            .collect()
    };
    Ok(Split {
        train: Manifest { records: pick(true), provenance: manifest.provenance.clone() },
        test: Manifest { records: pick(false), provenance: manifest.provenance.clone() },
    })
}
