//! All stages in order: ingest, analyse, balance, match, quality-gate,
//! merge synthetic fakes, split, train, score, evaluate, report.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use agefair_core::curation::{analyze_distribution, stratified_split, BalanceAction, BalancePlan};
use agefair_core::evaluation::evaluate;
use agefair_core::ingest::{self, Manifest};
use agefair_core::report::render_distribution;
use agefair_core::{AgeGroup, FrameRecord, Label, SourceDataset};
use anyhow::Result;

use crate::commands::{input, write, write_charts, write_metric_report, Ctx};
use crate::exit::schema;

pub fn run(ctx: &Ctx, out: &Path) -> Result<()> {
    let paths = &ctx.cfg.paths;
    let manifest_path = input(None, &paths.manifest, "manifest")?;
    // fail on missing inputs before writing anything
    for p in [&paths.sources, &paths.targets, &paths.pairs, &paths.synthetic_manifest, &paths.features]
        .into_iter()
        .flatten()
    {
        crate::commands::require(p)?;
    }
    write(&out.join("config.toml"), &ctx.cfg.to_toml())?;

    let manifest = ctx.load_manifest(&manifest_path)?;
    let source_dist = analyze_distribution(&manifest);
    write(&out.join("distribution_source.csv"), &source_dist.to_csv())?;
    write(&out.join("distribution_source.txt"), &render_distribution(&source_dist).render_text())?;
    write_charts(&source_dist, &out.join("charts/source"))?;

    let balanced = ctx.balance_manifest(&manifest)?;
    balanced.write(out)?;

    if let (Some(s), Some(t)) = (&paths.sources, &paths.targets) {
        let plan = ctx.match_plan(s, t)?;
        write(&out.join("swap_plan.csv"), &plan.to_csv())?;
    }

    let accepted_videos = match &paths.pairs {
        Some(p) => {
            let report = ctx.quality_report(p)?;
            write(&out.join("quality.csv"), &report.to_csv())?;
            write(&out.join("quality_summary.csv"), &report.summary())?;
            Some(report.accepted.into_iter().collect::<BTreeSet<_>>())
        }
        None => None,
    };

    let mut records = balanced.manifest.records.clone();
    if let Some(p) = &paths.synthetic_manifest {
        let synthetic = ctx.load_manifest(p)?;
        let kept = admit_synthetic(&synthetic, accepted_videos.as_ref(), &balanced.augmentation)?;
        write(&out.join("synthetic_admitted.csv"), &Manifest::from_records(kept.clone())?.to_csv())?;
        records.extend(kept);
    }
    let final_manifest = Manifest::from_records(records).map_err(|e| schema(e.to_string()))?;
    let final_dist = analyze_distribution(&final_manifest);
    write(&out.join("final_manifest.csv"), &final_manifest.to_csv())?;
    write(&out.join("distribution_final.csv"), &final_dist.to_csv())?;
    write(&out.join("distribution_final.txt"), &render_distribution(&final_dist).render_text())?;
    write_charts(&final_dist, &out.join("charts/final"))?;

    let split = stratified_split(&final_manifest, ctx.cfg.curation.split_ratio, ctx.cfg.seed)?;
    write(&out.join("split_train.csv"), &split.train.to_csv())?;
    write(&out.join("split_test.csv"), &split.test.to_csv())?;

    let Some(features) = &paths.features else {
        eprintln!("note: paths.features not set; stopping before training");
        return Ok(());
    };
    let map = ctx.load_feature_map(features)?;
    let model = ctx.fit(&split.train, &map)?;
    write(&out.join("model.ckpt"), &model.to_checkpoint())?;
    write(&out.join("training_history.csv"), &model.history_csv())?;
    let scores = ctx.score(&model, &split.test, &map)?;
    ingest::write_scores(&scores, &out.join("scores.csv"))?;

    let report = evaluate(&scores, &ctx.cfg.evaluation)?;
    write(&out.join("metrics.csv"), &report.to_csv())?;
    write_metric_report(&report, out)?;
    Ok(())
}

/// Synthetic fakes whose video passed the quality gate, capped per age
/// group at the planned synthesis amount (first rows in file order).
fn admit_synthetic(
    synthetic: &Manifest,
    accepted_videos: Option<&BTreeSet<String>>,
    plan: &BalancePlan,
) -> Result<Vec<FrameRecord>> {
    let mut room: BTreeMap<AgeGroup, usize> = plan
        .entries
        .iter()
        .filter(|e| e.label == Label::Fake)
        .map(|e| {
            let n = match e.action {
                BalanceAction::Synthesize(n) => n,
                _ => 0,
            };
            (e.group, n)
        })
        .collect();
    let mut out = Vec::new();
    for r in &synthetic.records {
        if r.source != SourceDataset::Synthetic || r.label != Label::Fake {
            return Err(schema(format!(
                "synthetic manifest row {} must be a synthetic fake, found {} {}",
                r.frame_id, r.source, r.label
            )));
        }
        if accepted_videos.is_some_and(|ok| !ok.contains(&r.video_id)) {
            continue;
        }
        let slot = room.entry(r.age_group()).or_insert(0);
        if *slot > 0 {
            *slot -= 1;
            out.push(r.clone());
        }
    }
    Ok(out)
}
