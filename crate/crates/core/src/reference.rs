//! Published source-dataset counts and helpers that expand count tables
//! into manifests, used by fixtures, tests and the demo.

use std::collections::BTreeMap;

use crate::age::{AgeGroup, CurationConfig, FrameRecord, Label, SourceDataset};
use crate::curation::DistributionTable;
use crate::ingest::Manifest;

use AgeGroup::*;
use Label::*;
use SourceDataset::*;

/// Source distribution before balancing: (label, group, source, count).
pub const SOURCE_DISTRIBUTION: [(Label, AgeGroup, SourceDataset, usize); 15] = [
    (Fake, G19_35, CelebDF, 427),
    (Fake, G19_35, FaceForensicsPP, 802),
    (Fake, G36_50, CelebDF, 108),
    (Fake, G36_50, FaceForensicsPP, 191),
    (Real, G0_10, UTKFace, 2373),
    (Real, G10_18, UTKFace, 1351),
    (Real, G19_35, UTKFace, 10248),
    (Real, G19_35, CelebDF, 463),
    (Real, G19_35, FaceForensicsPP, 792),
    (Real, G36_50, UTKFace, 3860),
    (Real, G36_50, CelebDF, 122),
    (Real, G36_50, FaceForensicsPP, 193),
    (Real, G51Plus, UTKFace, 4416),
    (Real, G51Plus, CelebDF, 1),
    (Real, G51Plus, FaceForensicsPP, 4),
];

/// Synthetic fakes actually produced per group after match and quality
/// filtering.
pub const ACHIEVED_SYNTHETIC: [(AgeGroup, usize); 5] =
    [(G0_10, 743), (G10_18, 697), (G19_35, 0), (G36_50, 454), (G51Plus, 745)];

pub fn source_distribution() -> DistributionTable {
    DistributionTable::from_counts(SOURCE_DISTRIBUTION.iter().map(|&(l, g, s, n)| ((l, g, s), n)))
}

pub fn achieved_synthetic() -> BTreeMap<AgeGroup, usize> {
    ACHIEVED_SYNTHETIC.into_iter().collect()
}

/// Inclusive age span covered by a group under the default boundaries.
pub fn age_span(group: AgeGroup) -> (i64, i64) {
    match group {
        G0_10 => (0, 9),
        G10_18 => (10, 18),
        G19_35 => (19, 35),
        G36_50 => (36, 50),
        G51Plus => (51, 90),
    }
}

/// Expands a count table into a manifest. Ages cycle through each group's
/// span; every 30 consecutive frames of a cell share a video id.
pub fn manifest_from_counts(cells: &[(Label, AgeGroup, SourceDataset, usize)]) -> Manifest {
    let cfg = CurationConfig::default();
    let mut records = Vec::new();
    for &(label, group, source, n) in cells {
        let (lo, hi) = age_span(group);
        let span = (hi - lo + 1) as usize;
        let tag = format!("{}-{}-{}", source.as_str(), label.as_str(), group.as_str());
        for i in 0..n {
            let age = lo + (i % span) as i64;
            records.push(
                FrameRecord::new(format!("{tag}-{i:05}"), format!("{tag}-v{:04}", i / 30), source, label, age, &cfg)
                    .expect("ages are inside the group span"),
            );
        }
    }
    Manifest::from_records(records).expect("generated ids are unique")
}

pub fn source_manifest() -> Manifest {
    manifest_from_counts(&SOURCE_DISTRIBUTION)
}
