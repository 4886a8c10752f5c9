//! Domain types shared by every stage: labels, sources, age groups and
//! annotated frame records.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Oldest age accepted from an annotator.
pub const MAX_AGE: i64 = 130;

/// The five age bins, in ascending order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum AgeGroup {
    G0_10,
    G10_18,
    G19_35,
    G36_50,
    G51Plus,
}

impl AgeGroup {
    pub const ALL: [AgeGroup; 5] = [
        AgeGroup::G0_10,
        AgeGroup::G10_18,
        AgeGroup::G19_35,
        AgeGroup::G36_50,
        AgeGroup::G51Plus,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            AgeGroup::G0_10 => "0-10",
            AgeGroup::G10_18 => "10-18",
            AgeGroup::G19_35 => "19-35",
            AgeGroup::G36_50 => "36-50",
            AgeGroup::G51Plus => "51+",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for AgeGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AgeGroup {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        AgeGroup::ALL
            .into_iter()
            .find(|g| g.as_str() == s.trim())
            .ok_or_else(|| Error::validation("age_group", format!("unknown age group {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SourceDataset {
    CelebDF,
    FaceForensicsPP,
    UTKFace,
    Synthetic,
}

impl SourceDataset {
    pub const ALL: [SourceDataset; 4] = [
        SourceDataset::UTKFace,
        SourceDataset::CelebDF,
        SourceDataset::FaceForensicsPP,
        SourceDataset::Synthetic,
    ];

    /// Token used in interchange files.
    pub fn as_str(self) -> &'static str {
        match self {
            SourceDataset::CelebDF => "celeb-df",
            SourceDataset::FaceForensicsPP => "faceforensics++",
            SourceDataset::UTKFace => "utkface",
            SourceDataset::Synthetic => "synthetic",
        }
    }

    /// Column heading used in rendered tables.
    pub fn display_name(self) -> &'static str {
        match self {
            SourceDataset::CelebDF => "Celeb",
            SourceDataset::FaceForensicsPP => "FaceForensics++",
            SourceDataset::UTKFace => "UTKFace",
            SourceDataset::Synthetic => "Synthetic",
        }
    }

    /// Celeb-DF and FaceForensics++ form the pool that balancing operates on.
    pub fn is_video_source(self) -> bool {
        matches!(self, SourceDataset::CelebDF | SourceDataset::FaceForensicsPP)
    }
}

impl fmt::Display for SourceDataset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SourceDataset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "celeb-df" | "celebdf" | "celeb" => Ok(SourceDataset::CelebDF),
            "faceforensics++" | "faceforensicspp" | "ff++" => Ok(SourceDataset::FaceForensicsPP),
            "utkface" | "utk" => Ok(SourceDataset::UTKFace),
            "synthetic" => Ok(SourceDataset::Synthetic),
            _ => Err(Error::validation("source", format!("unknown source dataset {s:?}"))),
        }
    }
}

/// Binary class label. `Fake` is the positive class for all metrics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Label {
    Fake,
    Real,
}

impl Label {
    pub const ALL: [Label; 2] = [Label::Fake, Label::Real];

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Real => "real",
            Label::Fake => "fake",
        }
    }

    pub fn is_positive(self) -> bool {
        self == Label::Fake
    }

    /// 1.0 for fake, 0.0 for real.
    pub fn target(self) -> f64 {
        if self.is_positive() {
            1.0
        } else {
            0.0
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "real" | "0" => Ok(Label::Real),
            "fake" | "1" => Ok(Label::Fake),
            _ => Err(Error::validation("label", format!("unknown label {s:?}"))),
        }
    }
}

/// Curation parameters shared by binning and splitting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CurationConfig {
    /// Lower edges of groups 2..=5; groups are half-open `[lo, hi)`.
    pub bin_boundaries: [i64; 4],
    pub split_ratio: f64,
    pub seed: u64,
}

impl Default for CurationConfig {
    fn default() -> Self {
        Self {
            bin_boundaries: [10, 19, 36, 51],
            split_ratio: 0.7,
            seed: 0,
        }
    }
}

impl CurationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.bin_boundaries[0] <= 0 || self.bin_boundaries.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config(format!(
                "bin boundaries must be positive and strictly increasing, got {:?}",
                self.bin_boundaries
            )));
        }
        if !(self.split_ratio > 0.0 && self.split_ratio < 1.0) {
            return Err(Error::Config(format!(
                "split ratio must lie in (0, 1), got {}",
                self.split_ratio
            )));
        }
        Ok(())
    }
}

/// Maps an integer age to its group using half-open bins; age 10 lands in
/// "10-18".
pub fn bin_age(age: i64, cfg: &CurationConfig) -> Result<AgeGroup> {
    if !(0..=MAX_AGE).contains(&age) {
        return Err(Error::validation(
            "estimated_age",
            format!("age {age} outside [0, {MAX_AGE}]"),
        ));
    }
    let idx = cfg.bin_boundaries.iter().take_while(|&&b| age >= b).count();
    Ok(AgeGroup::ALL[idx])
}

/// Rounds a fractional annotator age half-up to whole years.
pub fn round_age(age: f64) -> Result<i64> {
    if !age.is_finite() {
        return Err(Error::NonFinite(format!("estimated age {age}")));
    }
    Ok((age + 0.5).floor() as i64)
}

/// Picks `k` evenly spaced frame indices from a clip of `total_frames`.
///
/// Index `i` is `round(i * (total - 1) / (k - 1))` with halves rounded up.
/// Clips shorter than `k` yield every frame once.
pub fn select_frame_indices(total_frames: usize, k: usize) -> Vec<usize> {
    assert!(total_frames >= 1 && k >= 1, "total_frames and k must be positive");
    if total_frames <= k {
        return (0..total_frames).collect();
    }
    if k == 1 {
        return vec![0];
    }
    let span = (total_frames - 1) as u128;
    let steps = (k - 1) as u128;
    (0..k as u128)
        .map(|i| ((2 * i * span + steps) / (2 * steps)) as usize)
        .collect()
}

/// One annotated frame.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FrameRecord {
    pub frame_id: String,
    pub video_id: String,
    pub source: SourceDataset,
    pub label: Label,
    estimated_age: i64,
    age_group: AgeGroup,
}

impl FrameRecord {
    pub fn new(
        frame_id: impl Into<String>,
        video_id: impl Into<String>,
        source: SourceDataset,
        label: Label,
        estimated_age: i64,
        cfg: &CurationConfig,
    ) -> Result<Self> {
        let frame_id = frame_id.into();
        let age_group = bin_age(estimated_age, cfg)
            .map_err(|e| Error::validation(format!("record {frame_id}"), e.to_string()))?;
        Ok(Self {
            frame_id,
            video_id: video_id.into(),
            source,
            label,
            estimated_age,
            age_group,
        })
    }

    pub fn estimated_age(&self) -> i64 {
        self.estimated_age
    }

    pub fn age_group(&self) -> AgeGroup {
        self.age_group
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cfg() -> CurationConfig {
        CurationConfig::default()
    }

    #[test]
    fn bins_interior_and_boundaries() {
        assert_eq!(bin_age(5, &cfg()).unwrap(), AgeGroup::G0_10);
        assert_eq!(bin_age(10, &cfg()).unwrap(), AgeGroup::G10_18);
        assert_eq!(bin_age(18, &cfg()).unwrap(), AgeGroup::G10_18);
        assert_eq!(bin_age(19, &cfg()).unwrap(), AgeGroup::G19_35);
        assert_eq!(bin_age(36, &cfg()).unwrap(), AgeGroup::G36_50);
        assert_eq!(bin_age(51, &cfg()).unwrap(), AgeGroup::G51Plus);
        assert_eq!(bin_age(0, &cfg()).unwrap(), AgeGroup::G0_10);
        assert_eq!(bin_age(130, &cfg()).unwrap(), AgeGroup::G51Plus);
    }

    #[test]
    fn rejects_out_of_range_ages() {
        assert!(bin_age(-1, &cfg()).is_err());
        assert!(bin_age(131, &cfg()).is_err());
        let err = FrameRecord::new("f7", "v", SourceDataset::UTKFace, Label::Real, 200, &cfg())
            .unwrap_err();
        assert!(err.to_string().contains("f7"));
    }

    #[test]
    fn canonical_strings_round_trip() {
        let names: Vec<_> = AgeGroup::ALL.iter().map(|g| g.as_str()).collect();
        assert_eq!(names, ["0-10", "10-18", "19-35", "36-50", "51+"]);
        for g in AgeGroup::ALL {
            assert_eq!(g.as_str().parse::<AgeGroup>().unwrap(), g);
        }
        for s in SourceDataset::ALL {
            assert_eq!(s.as_str().parse::<SourceDataset>().unwrap(), s);
        }
    }

    #[test]
    fn fractional_ages_round_half_up() {
        assert_eq!(round_age(18.5).unwrap(), 19);
        assert_eq!(round_age(18.49).unwrap(), 18);
        assert!(round_age(f64::NAN).is_err());
    }

    #[test]
    fn invalid_config_rejected() {
        let mut c = cfg();
        c.bin_boundaries = [10, 10, 36, 51];
        assert!(c.validate().is_err());
        let mut c = cfg();
        c.split_ratio = 1.0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn frame_selection_examples() {
        assert_eq!(select_frame_indices(30, 30), (0..30).collect::<Vec<_>>());
        assert_eq!(
            select_frame_indices(59, 30),
            (0..30).map(|i| 2 * i).collect::<Vec<_>>()
        );
        assert_eq!(select_frame_indices(10, 30), (0..10).collect::<Vec<_>>());
        assert_eq!(select_frame_indices(100, 1), vec![0]);
    }

    proptest! {
        #[test]
        fn binning_is_monotone(a in 0i64..=130, b in 0i64..=130) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(bin_age(lo, &cfg()).unwrap() <= bin_age(hi, &cfg()).unwrap());
        }

        #[test]
        fn frame_selection_is_even(total in 1usize..2000, k in 1usize..64) {
            let idx = select_frame_indices(total, k);
            prop_assert_eq!(idx.len(), total.min(k));
            prop_assert!(idx.windows(2).all(|w| w[0] < w[1]));
            prop_assert_eq!(idx[0], 0);
            if k >= 2 && total >= 2 {
                prop_assert_eq!(*idx.last().unwrap(), total - 1);
            }
            if total >= k && k >= 2 {
                let gaps: Vec<_> = idx.windows(2).map(|w| w[1] - w[0]).collect();
                let lo = gaps.iter().min().unwrap();
                let hi = gaps.iter().max().unwrap();
                prop_assert!(hi - lo <= 1);
            }
        }
    }
}
