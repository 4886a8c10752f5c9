use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use agefair_core::curation::{
    analyze_distribution, apply_real_topup, compute_mean_targets, plan_augmentation, plan_real_topup,
    plan_undersample, project_undersample, stratified_split, stratified_split_with_stream, undersample,
    BalancePlan, DistributionTable,
};
use agefair_core::detector::{self, FeatureVector, TrainedModel};
use agefair_core::evaluation::{evaluate, fairness_gap, Metric, MetricReport};
use agefair_core::ingest::{self, LoadMode, Manifest, ScoreRecord};
use agefair_core::matching::{best_matches, SwapPlan};
use agefair_core::quality::{gate, PairQuality, QualityReport};
use agefair_core::report::{age_share_charts, render_age_metrics, render_distribution, render_metrics, render_plan, write_chart};
use agefair_core::Label;
use anyhow::{Context as _, Result};

use crate::config::RunConfig;
use crate::exit::{missing_input, schema, usage};
use crate::{pipeline, Cli, Command};

/// Stream for carving the early-stopping validation set out of a
/// training split.
pub const VALIDATION_STREAM: &str = "detector.validation";

pub fn run(cli: Cli) -> Result<()> {
    let mut cfg = RunConfig::load(cli.config.as_deref(), &cli.overrides)?;
    if let Some(seed) = cli.seed {
        cfg.set_seed(seed);
    }
    let mode = if cli.lenient { LoadMode::Lenient } else { LoadMode::Strict };
    let ctx = Ctx { cfg, mode };
    match cli.command {
        Command::Analyze(a) => ctx.analyze(a),
        Command::Balance(a) => ctx.balance(a),
        Command::PlanAug(a) => ctx.plan_aug(a),
        Command::Match(a) => ctx.match_faces(a),
        Command::Quality(a) => ctx.quality(a),
        Command::Split(a) => ctx.split(a),
        Command::Train(a) => ctx.train(a),
        Command::Evaluate(a) => ctx.evaluate(a),
        Command::Report(a) => ctx.report(a),
        Command::Pipeline(a) => {
            let out = a
                .out_dir
                .or_else(|| ctx.cfg.paths.out_dir.clone())
                .ok_or_else(|| usage("no output directory (use --out-dir or paths.out_dir)"))?;
            pipeline::run(&ctx, &out)
        }
    }
}

pub struct Ctx {
    pub cfg: RunConfig,
    pub mode: LoadMode,
}

/// Picks the flag value, else the config value, and checks it exists.
pub fn input(flag: Option<PathBuf>, configured: &Option<PathBuf>, what: &str) -> Result<PathBuf> {
    let path = flag
        .or_else(|| configured.clone())
        .ok_or_else(|| usage(format!("no {what} given (use --{what} or paths.{})", what.replace('-', "_"))))?;
    require(&path)?;
    Ok(path)
}

pub fn require(path: &Path) -> Result<()> {
    if path.exists() {
        Ok(())
    } else {
        Err(missing_input(path))
    }
}

pub fn write(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

impl Ctx {
    pub fn load_manifest(&self, path: &Path) -> Result<Manifest> {
        require(path)?;
        let (m, stats) = ingest::load_manifest(path, self.mode, &self.cfg.curation)?;
        for d in &stats.dropped {
            eprintln!("warning: {}: dropped line {}: {}", path.display(), d.line, d.reason);
        }
        Ok(m)
    }

    fn analyze(&self, a: crate::AnalyzeArgs) -> Result<()> {
        let path = input(a.manifest, &self.cfg.paths.manifest, "manifest")?;
        let dist = analyze_distribution(&self.load_manifest(&path)?);
        write(&a.out, &dist.to_csv())?;
        let table = render_distribution(&dist).render_text();
        match a.table {
            Some(p) => write(&p, &table)?,
            None => print!("{table}"),
        }
        if let Some(dir) = a.charts {
            write_charts(&dist, &dir)?;
        }
        Ok(())
    }

    fn balance(&self, a: crate::BalanceArgs) -> Result<()> {
        let path = input(a.manifest, &self.cfg.paths.manifest, "manifest")?;
        let out = a
            .out_dir
            .or_else(|| self.cfg.paths.out_dir.clone())
            .ok_or_else(|| usage("no output directory (use --out-dir or paths.out_dir)"))?;
        let balanced = self.balance_manifest(&self.load_manifest(&path)?)?;
        balanced.write(&out)?;
        print!("{}", render_plan(&balanced.plan, "Balance plan").render_text());
        Ok(())
    }

    pub fn balance_manifest(&self, manifest: &Manifest) -> Result<Balanced> {
        let dist = analyze_distribution(manifest);
        let targets = compute_mean_targets(&dist);
        for l in &targets.undefined {
            eprintln!("warning: no video-source {l} records; {l} groups are left as they are");
        }
        let seed = self.cfg.seed;
        let kept = undersample(manifest, &targets, seed);
        let after = analyze_distribution(&kept.kept);
        let mut plan = plan_undersample(&dist, &targets);
        let mut topup = BalancePlan::default();
        if let Some(t) = targets.get(Label::Real) {
            topup = plan_real_topup(&after, t);
            for e in topup.entries.iter().filter(|e| e.shortfall > 0) {
                eprintln!("warning: real {}: UTKFace pool short by {}", e.group, e.shortfall);
            }
        }
        let balanced = apply_real_topup(&kept.kept, &topup, seed);
        plan.extend(topup);
        let augmentation = match targets.get(Label::Fake) {
            Some(t) => plan_augmentation(&after, t),
            None => BalancePlan::default(),
        };
        Ok(Balanced { manifest: balanced, removed: kept.removed, plan, augmentation })
    }

    fn plan_aug(&self, a: crate::PlanAugArgs) -> Result<()> {
        require(&a.distribution)?;
        let text = fs::read_to_string(&a.distribution)?;
        let dist = DistributionTable::from_csv(&text).with_context(|| a.distribution.display().to_string())?;
        let targets = compute_mean_targets(&dist);
        let target = match a.target.or(targets.get(Label::Fake)) {
            Some(t) => t,
            None => return Err(schema("distribution has no video-source fake records; pass --target")),
        };
        let plan = plan_augmentation(&project_undersample(&dist, &targets), target);
        write(&a.out, &plan.to_csv())?;
        print!("{}", render_plan(&plan, "Augmentation plan").render_text());
        Ok(())
    }

    pub fn match_plan(&self, sources: &Path, targets: &Path) -> Result<SwapPlan> {
        let s = ingest::load_descriptors(sources)?;
        let t = ingest::load_descriptors(targets)?;
        if !s.is_empty() && !t.is_empty() && s.dim != t.dim {
            return Err(schema(format!(
                "descriptor dimensions differ: {} has {}, {} has {}",
                sources.display(),
                s.dim,
                targets.display(),
                t.dim
            )));
        }
        Ok(best_matches(&s.descriptors, &t.descriptors, &self.cfg.matching)?)
    }

    fn match_faces(&self, a: crate::MatchArgs) -> Result<()> {
        let mut ctx_cfg = self.cfg.matching.clone();
        if a.one_to_one {
            ctx_cfg.one_to_one = true;
        }
        if let Some(v) = a.min_cosine {
            ctx_cfg.min_cosine = v;
        }
        if let Some(v) = a.min_combined {
            ctx_cfg.min_combined = v;
        }
        ctx_cfg.validate().map_err(|e| usage(e.to_string()))?;
        let sources = input(a.sources, &self.cfg.paths.sources, "sources")?;
        let targets = input(a.targets, &self.cfg.paths.targets, "targets")?;
        let ctx = Ctx { cfg: RunConfig { matching: ctx_cfg, ..self.cfg.clone() }, mode: self.mode };
        let plan = ctx.match_plan(&sources, &targets)?;
        write(&a.out, &plan.to_csv())?;
        println!("accepted {}, rejected {}", plan.entries.len(), plan.rejected.len());
        Ok(())
    }

    /// Measures every listed pair; a pair's id is the generated file stem.
    pub fn quality_report(&self, pairs: &Path) -> Result<QualityReport> {
        let list = ingest::load_pairs(pairs)?;
        let mut measured = Vec::with_capacity(list.len());
        for p in &list {
            require(&p.reference)?;
            require(&p.generated)?;
            let id = p
                .generated
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            let r = ingest::load_image(&p.reference)?;
            let g = ingest::load_image(&p.generated)?;
            measured.push(PairQuality::measure(id, &r, &g, &self.cfg.quality)?);
        }
        Ok(gate(measured, &self.cfg.quality))
    }

    fn quality(&self, a: crate::QualityArgs) -> Result<()> {
        let mut cfg = self.cfg.clone();
        if let Some(v) = a.min_ssim {
            cfg.quality.min_ssim = v;
        }
        if let Some(v) = a.min_psnr_db {
            cfg.quality.min_psnr_db = v;
        }
        let pairs = input(a.pairs, &self.cfg.paths.pairs, "pairs")?;
        let ctx = Ctx { cfg, mode: self.mode };
        let report = ctx.quality_report(&pairs)?;
        write(&a.out, &report.to_csv())?;
        match a.summary {
            Some(p) => write(&p, &report.summary())?,
            None => print!("{}", report.summary()),
        }
        Ok(())
    }

    fn split(&self, a: crate::SplitArgs) -> Result<()> {
        let path = input(a.manifest, &self.cfg.paths.manifest, "manifest")?;
        let ratio = a.ratio.unwrap_or(self.cfg.curation.split_ratio);
        if !(ratio > 0.0 && ratio < 1.0) {
            return Err(usage(format!("split ratio must lie in (0, 1), got {ratio}")));
        }
        let m = self.load_manifest(&path)?;
        if m.is_empty() {
            eprintln!("warning: {} is empty; both splits will be empty", path.display());
        }
        let split = stratified_split(&m, ratio, self.cfg.seed)?;
        write(&a.train, &split.train.to_csv())?;
        write(&a.test, &split.test.to_csv())?;
        println!("train {}, test {}", split.train.len(), split.test.len());
        Ok(())
    }

    pub fn load_feature_map(&self, path: &Path) -> Result<BTreeMap<String, FeatureVector>> {
        require(path)?;
        let mut map = BTreeMap::new();
        for fv in ingest::load_features(path)? {
            let id = fv.frame_id.clone();
            if map.insert(id.clone(), fv).is_some() {
                return Err(schema(format!("{}: duplicate feature row for {id}", path.display())));
            }
        }
        Ok(map)
    }

    /// Feature rows for every manifest record, in manifest order.
    pub fn features_for(
        &self,
        manifest: &Manifest,
        map: &BTreeMap<String, FeatureVector>,
    ) -> Result<Vec<FeatureVector>> {
        manifest
            .records
            .iter()
            .map(|r| {
                let fv = map
                    .get(&r.frame_id)
                    .ok_or_else(|| schema(format!("no feature vector for frame {}", r.frame_id)))?;
                if fv.label != r.label {
                    return Err(schema(format!(
                        "frame {}: feature label {} disagrees with manifest label {}",
                        r.frame_id, fv.label, r.label
                    )));
                }
                Ok(fv.clone())
            })
            .collect()
    }

    pub fn fit(&self, train_manifest: &Manifest, map: &BTreeMap<String, FeatureVector>) -> Result<TrainedModel> {
        let split = stratified_split_with_stream(
            train_manifest,
            self.cfg.training.fit_ratio,
            self.cfg.seed,
            VALIDATION_STREAM,
        )?;
        let fit = self.features_for(&split.train, map)?;
        let val = self.features_for(&split.test, map)?;
        Ok(detector::train(&fit, &val, &self.cfg.detector)?)
    }

    pub fn score(
        &self,
        model: &TrainedModel,
        manifest: &Manifest,
        map: &BTreeMap<String, FeatureVector>,
    ) -> Result<Vec<ScoreRecord>> {
        let feats = self.features_for(manifest, map)?;
        manifest
            .records
            .iter()
            .zip(&feats)
            .map(|(r, fv)| {
                Ok(ScoreRecord {
                    frame_id: r.frame_id.clone(),
                    model_id: self.cfg.labels.model_id.clone(),
                    train_set: self.cfg.labels.train_set.clone(),
                    test_set: self.cfg.labels.test_set.clone(),
                    label: r.label,
                    age_group: Some(r.age_group()),
                    score: detector::predict(model, &fv.features)?,
                })
            })
            .collect()
    }

    fn train(&self, a: crate::TrainArgs) -> Result<()> {
        let mut cfg = self.cfg.clone();
        if let Some(v) = a.max_epochs {
            cfg.detector.max_epochs = v;
        }
        if let Some(v) = a.learning_rate {
            cfg.detector.learning_rate = v;
        }
        cfg.validate()?;
        let ctx = Ctx { cfg, mode: self.mode };
        let manifest_path = input(a.manifest, &self.cfg.paths.manifest, "manifest")?;
        let features = input(a.features, &self.cfg.paths.features, "features")?;
        let map = ctx.load_feature_map(&features)?;
        let train_manifest = ctx.load_manifest(&manifest_path)?;
        let test_manifest = a.test_manifest.as_deref().map(|p| ctx.load_manifest(p)).transpose()?;
        let model = ctx.fit(&train_manifest, &map)?;
        write(&a.model, &model.to_checkpoint())?;
        if let Some(h) = &a.history {
            write(h, &model.history_csv())?;
        }
        if let (Some(test), Some(out)) = (test_manifest, &a.scores) {
            let scores = ctx.score(&model, &test, &map)?;
            ingest::write_scores(&scores, out)?;
        }
        println!("stopped after epoch {}, best epoch {}", model.stopped_epoch, model.best_epoch);
        Ok(())
    }

    fn evaluate(&self, a: crate::EvaluateArgs) -> Result<()> {
        let mut eval = self.cfg.evaluation.clone();
        if let Some(v) = a.max_fpr {
            eval.max_fpr = v;
        }
        if let Some(v) = &a.pauc_normalization {
            eval.pauc_normalization = v.parse().map_err(|e: agefair_core::Error| usage(e.to_string()))?;
        }
        eval.validate().map_err(|e| usage(e.to_string()))?;
        let mut rows = Vec::new();
        for p in &a.scores {
            require(p)?;
            rows.extend(ingest::load_scores(p)?);
        }
        let report = evaluate(&rows, &eval)?;
        if let Some(out) = &a.out {
            write(out, &report.to_csv())?;
        }
        let text = metric_tables(&report);
        match &a.table {
            Some(p) => write(p, &text)?,
            None => print!("{text}"),
        }
        Ok(())
    }

    fn report(&self, a: crate::ReportArgs) -> Result<()> {
        if a.metrics.is_none() && a.distribution.is_none() {
            return Err(usage("report needs --metrics and/or --distribution"));
        }
        if let Some(p) = &a.metrics {
            require(p)?;
            let text = fs::read_to_string(p)?;
            let report = MetricReport::from_csv(&text).with_context(|| p.display().to_string())?;
            write_metric_report(&report, &a.out_dir)?;
        }
        if let Some(p) = &a.distribution {
            require(p)?;
            let text = fs::read_to_string(p)?;
            let dist = DistributionTable::from_csv(&text).with_context(|| p.display().to_string())?;
            let table = render_distribution(&dist);
            write(&a.out_dir.join("distribution.txt"), &table.render_text())?;
            write(&a.out_dir.join("distribution_table.csv"), &table.render_csv())?;
            write_charts(&dist, &a.out_dir.join("charts"))?;
        }
        Ok(())
    }
}

/// Outcome of undersampling plus real top-up.
pub struct Balanced {
    pub manifest: Manifest,
    pub removed: Vec<String>,
    /// Undersample and top-up entries.
    pub plan: BalancePlan,
    /// Synthesis needed on top of the balanced manifest.
    pub augmentation: BalancePlan,
}

impl Balanced {
    pub fn write(&self, dir: &Path) -> Result<()> {
        write(&dir.join("balanced_manifest.csv"), &self.manifest.to_csv())?;
        write(&dir.join("removed_ids.txt"), &ids_text(&self.removed))?;
        write(&dir.join("balance_plan.csv"), &self.plan.to_csv())?;
        write(&dir.join("balance_plan.txt"), &render_plan(&self.plan, "Balance plan").render_text())?;
        write(&dir.join("augmentation_plan.csv"), &self.augmentation.to_csv())?;
        write(
            &dir.join("augmentation_plan.txt"),
            &render_plan(&self.augmentation, "Augmentation plan").render_text(),
        )?;
        write(&dir.join("distribution_balanced.csv"), &analyze_distribution(&self.manifest).to_csv())
    }
}

pub fn ids_text(ids: &[String]) -> String {
    ids.iter().map(|s| format!("{s}\n")).collect()
}

pub fn write_charts(dist: &DistributionTable, dir: &Path) -> Result<()> {
    for (source, spec) in age_share_charts(dist) {
        write_chart(&spec, &dir.join(format!("age_share_{}.svg", source.as_str())))?;
    }
    Ok(())
}

/// Overall tables (one per training set) followed by age-group tables.
pub fn metric_tables(report: &MetricReport) -> String {
    let mut out = String::new();
    for t in render_metrics(report) {
        out.push_str(&t.render_text());
        out.push('\n');
    }
    out
}

pub fn write_metric_report(report: &MetricReport, dir: &Path) -> Result<()> {
    write(&dir.join("metrics.txt"), &metric_tables(report))?;
    let mut csv = String::new();
    let mut age = String::new();
    let mut train_sets: Vec<&String> = Vec::new();
    for c in &report.contexts {
        if !train_sets.contains(&&c.train_set) {
            train_sets.push(&c.train_set);
        }
    }
    for t in render_metrics(report) {
        csv.push_str(&t.render_csv());
    }
    for ts in train_sets {
        age.push_str(&render_age_metrics(report, ts).render_text());
        age.push('\n');
    }
    write(&dir.join("metrics_table.csv"), &csv)?;
    write(&dir.join("metrics_by_age.txt"), &age)?;
    let mut gaps = String::from("model,train,test,metric,gap\n");
    for c in &report.contexts {
        for m in Metric::ALL {
            let g = fairness_gap(report, c, m).map_or_else(|| "none".to_string(), |v| v.to_string());
            gaps.push_str(&format!("{},{},{},{},{g}\n", c.model_id, c.train_set, c.test_set, m.name()));
        }
    }
    write(&dir.join("fairness_gaps.csv"), &gaps)
}
