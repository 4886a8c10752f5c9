//! Source/target face pairing by embedding similarity and attribute
//! compatibility.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Angle normaliser for yaw/pitch differences, in degrees.
pub const ANGLE_RANGE_DEG: f64 = 180.0;

#[derive(Debug, Clone, PartialEq)]
pub struct FaceDescriptor {
    pub embedding: Vec<f64>,
    pub yaw_deg: f64,
    pub pitch_deg: f64,
    pub brightness: f64,
    pub expression: f64,
}

impl FaceDescriptor {
    pub fn new(embedding: Vec<f64>, yaw_deg: f64, pitch_deg: f64, brightness: f64, expression: f64) -> Result<Self> {
        let d = Self {
            embedding,
            yaw_deg,
            pitch_deg,
            brightness,
            expression,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        if self.embedding.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("embedding component".into()));
        }
        if self.embedding.iter().all(|&v| v == 0.0) {
            return Err(Error::validation("descriptor", "embedding is the zero vector"));
        }
        let checks = [
            ("yaw_deg", self.yaw_deg, -90.0, 90.0),
            ("pitch_deg", self.pitch_deg, -90.0, 90.0),
            ("brightness", self.brightness, 0.0, 1.0),
            ("expression", self.expression, 0.0, 1.0),
        ];
        for (name, v, lo, hi) in checks {
            if !v.is_finite() {
                return Err(Error::NonFinite(name.into()));
            }
            if !(lo..=hi).contains(&v) {
                return Err(Error::validation("descriptor", format!("{name} {v} outside [{lo}, {hi}]")));
            }
        }
        Ok(())
    }
}

pub fn cosine_similarity(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            actual: b.len(),
        });
    }
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return Err(Error::validation("cosine_similarity", "zero vector"));
    }
    Ok((dot / (na * nb)).clamp(-1.0, 1.0))
}

/// `1 - mean(|dyaw|/180, |dpitch|/180, |dbrightness|, |dexpression|)`.
pub fn attribute_compatibility(a: &FaceDescriptor, b: &FaceDescriptor) -> Result<f64> {
    a.validate()?;
    b.validate()?;
    let diffs = [
        (a.yaw_deg - b.yaw_deg).abs() / ANGLE_RANGE_DEG,
        (a.pitch_deg - b.pitch_deg).abs() / ANGLE_RANGE_DEG,
        (a.brightness - b.brightness).abs(),
        (a.expression - b.expression).abs(),
    ];
    Ok(1.0 - diffs.iter().sum::<f64>() / diffs.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MatchConfig {
    pub w_sim: f64,
    pub w_attr: f64,
    pub min_cosine: f64,
    pub min_combined: f64,
    /// Each target may be used by at most one source.
    pub one_to_one: bool,
}

impl Default for MatchConfig {
    fn default() -> Self {
        Self {
            w_sim: 0.7,
            w_attr: 0.3,
            min_cosine: 0.2,
            min_combined: 0.5,
            one_to_one: false,
        }
    }
}

impl MatchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.w_sim < 0.0 || self.w_attr < 0.0 || ((self.w_sim + self.w_attr) - 1.0).abs() > 1e-9 {
            return Err(Error::Config(format!(
                "match weights must be non-negative and sum to 1, got {} + {}",
                self.w_sim, self.w_attr
            )));
        }
        if !(-1.0..=1.0).contains(&self.min_cosine) || !(0.0..=1.0).contains(&self.min_combined) {
            return Err(Error::Config("match thresholds out of range".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchEntry {
    pub source_id: String,
    pub target_id: String,
    pub cosine: f64,
    pub attr_score: f64,
    pub combined: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RejectReason {
    BelowMinCosine,
    BelowMinCombined,
    /// Every target was already taken (one-to-one mode) or dimensions differ.
    NoTarget,
}

impl fmt::Display for RejectReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RejectReason::BelowMinCosine => "below_min_cosine",
            RejectReason::BelowMinCombined => "below_min_combined",
            RejectReason::NoTarget => "no_target",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rejection {
    pub source_id: String,
    /// Best candidate seen, if any.
    pub best: Option<MatchEntry>,
    pub reason: RejectReason,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SwapPlan {
    /// Accepted pairs, sorted by combined score descending.
    pub entries: Vec<MatchEntry>,
    pub rejected: Vec<Rejection>,
}

impl SwapPlan {
    /// `source_id,target_id,cosine,attr_score,combined,status` rows; rejected
    /// sources carry their best candidate (if any) and the reason.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("source_id,target_id,cosine,attr_score,combined,status\n");
        for e in &self.entries {
            out.push_str(&format!(
                "{},{},{},{},{},accepted\n",
                e.source_id, e.target_id, e.cosine, e.attr_score, e.combined
            ));
        }
        for r in &self.rejected {
            match &r.best {
                Some(e) => out.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    r.source_id, e.target_id, e.cosine, e.attr_score, e.combined, r.reason
                )),
                None => out.push_str(&format!("{},,,,,{}\n", r.source_id, r.reason)),
            }
        }
        out
    }
}

fn score_pair(
    source_id: &str,
    source: &FaceDescriptor,
    target_id: &str,
    target: &FaceDescriptor,
    cfg: &MatchConfig,
) -> Result<MatchEntry> {
    let cosine = cosine_similarity(&source.embedding, &target.embedding)?;
    let attr_score = attribute_compatibility(source, target)?;
    Ok(MatchEntry {
        source_id: source_id.to_string(),
        target_id: target_id.to_string(),
        cosine,
        attr_score,
        combined: cfg.w_sim * cosine + cfg.w_attr * attr_score,
    })
}

/// Higher combined wins; ties go to the lexicographically smaller target.
fn better(a: &MatchEntry, b: &MatchEntry) -> bool {
    match a.combined.partial_cmp(&b.combined).unwrap_or(Ordering::Equal) {
        Ordering::Greater => true,
        Ordering::Less => false,
        Ordering::Equal => a.target_id < b.target_id,
    }
}

fn verdict(e: &MatchEntry, cfg: &MatchConfig) -> Option<RejectReason> {
    if e.cosine < cfg.min_cosine {
        Some(RejectReason::BelowMinCosine)
    } else if e.combined < cfg.min_combined {
        Some(RejectReason::BelowMinCombined)
    } else {
        None
    }
}

/// Picks the best target for every source.
///
/// With `one_to_one` the assignment is greedy over all candidate pairs in
/// descending combined order; a source whose preferred targets are all
/// taken falls back to the next admissible one.
pub fn best_matches(
    sources: &BTreeMap<String, FaceDescriptor>,
    targets: &BTreeMap<String, FaceDescriptor>,
    cfg: &MatchConfig,
) -> Result<SwapPlan> {
    cfg.validate()?;
    if targets.is_empty() {
        return Err(Error::validation("best_matches", "target set is empty"));
    }
    let mut plan = SwapPlan::default();
    if cfg.one_to_one {
        greedy_one_to_one(sources, targets, cfg, &mut plan)?;
    } else {
        for (sid, s) in sources {
            let mut best: Option<MatchEntry> = None;
            for (tid, t) in targets {
                let e = score_pair(sid, s, tid, t, cfg)?;
                if best.as_ref().is_none_or(|b| better(&e, b)) {
                    best = Some(e);
                }
            }
            let best = best.expect("targets non-empty");
            match verdict(&best, cfg) {
                None => plan.entries.push(best),
                Some(reason) => plan.rejected.push(Rejection {
                    source_id: sid.clone(),
                    best: Some(best),
                    reason,
                }),
            }
        }
    }
    plan.entries.sort_by(|a, b| {
        b.combined
            .partial_cmp(&a.combined)
            .unwrap_or(Ordering::Equal)
            .then_with(|| a.source_id.cmp(&b.source_id))
    });
    Ok(plan)
}

fn greedy_one_to_one(
    sources: &BTreeMap<String, FaceDescriptor>,
    targets: &BTreeMap<String, FaceDescriptor>,
    cfg: &MatchConfig,
    plan: &mut SwapPlan,
) -> Result<()> {
    let mut candidates = Vec::with_capacity(sources.len() * targets.len());
    let mut best_per_source: BTreeMap<&str, MatchEntry> = BTreeMap::new();
    for (sid, s) in sources {
        for (tid, t) in targets {
            let e = score_pair(sid, s, tid, t, cfg)?;
            let slot = best_per_source.entry(sid.as_str());
            match slot {
                std::collections::btree_map::Entry::Vacant(v) => {
                    v.insert(e.clone());
                }
                std::collections::btree_map::Entry::Occupied(mut o) => {
                    if better(&e, o.get()) {
                        o.insert(e.clone());
                    }
                }
            }
            if verdict(&e, cfg).is_none() {
                candidates.push(e);
            }
        }
    }
    candidates.sort_by(|a, b| {
        b.combined
            .partial_cmp(&a.combined)
            .unwrap_or(Ordering::Equal)
            .then_with(|| a.source_id.cmp(&b.source_id))
            .then_with(|| a.target_id.cmp(&b.target_id))
    });
    let mut used_sources = HashSet::new();
    let mut used_targets = HashSet::new();
    for e in candidates {
        if used_sources.contains(&e.source_id) || used_targets.contains(&e.target_id) {
            continue;
        }
        used_sources.insert(e.source_id.clone());
        used_targets.insert(e.target_id.clone());
        plan.entries.push(e);
    }
    for sid in sources.keys() {
        if used_sources.contains(sid) {
            continue;
        }
        let best = best_per_source.remove(sid.as_str());
        let reason = best
            .as_ref()
            .and_then(|b| verdict(b, cfg))
            .unwrap_or(RejectReason::NoTarget);
        plan.rejected.push(Rejection {
            source_id: sid.clone(),
            best,
            reason,
        });
    }
    Ok(())
}
