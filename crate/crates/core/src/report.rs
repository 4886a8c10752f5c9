//! Plain-text / CSV tables and SVG charts.

use std::fmt::Write as _;
use std::path::Path;

use crate::age::{AgeGroup, Label, SourceDataset};
use crate::curation::{BalancePlan, DistributionTable};
use crate::error::{Error, Result};
use crate::evaluation::{Metric, MetricReport, Stratum};

/// Formats a metric to four decimals, rounding half up on the value's
/// shortest decimal representation (so `0.99995` prints `1.0000`).
pub fn format_metric(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let repr = x.abs().to_string();
    let (int_part, frac_part) = repr.split_once('.').unwrap_or((&repr, ""));
    let mut digits: Vec<u8> = int_part.bytes().map(|b| b - b'0').collect();
    let int_len = digits.len();
    let frac: Vec<u8> = frac_part.bytes().map(|b| b - b'0').collect();
    digits.extend((0..4).map(|i| frac.get(i).copied().unwrap_or(0)));
    if frac.get(4).is_some_and(|&d| d >= 5) {
        let mut i = digits.len();
        loop {
            if i == 0 {
                digits.insert(0, 1);
                break;
            }
            i -= 1;
            if digits[i] == 9 {
                digits[i] = 0;
            } else {
                digits[i] += 1;
                break;
            }
        }
    }
    let split = digits.len() - 4;
    debug_assert!(split >= int_len);
    let text: String = digits.iter().map(|d| char::from(b'0' + d)).collect();
    let out = format!("{}.{}", &text[..split], &text[split..]);
    if x < 0.0 && out.bytes().any(|b| b.is_ascii_digit() && b != b'0') {
        format!("-{out}")
    } else {
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Align {
    Left,
    Right,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableSpec {
    pub title: String,
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub align: Vec<Align>,
}

impl TableSpec {
    pub fn new(title: impl Into<String>, headers: Vec<String>) -> Self {
        let mut align = vec![Align::Right; headers.len()];
        if let Some(first) = align.first_mut() {
            *first = Align::Left;
        }
        Self { title: title.into(), headers, rows: Vec::new(), align }
    }

    pub fn push_row(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.headers.len(), "row arity differs from header");
        self.rows.push(row);
    }

    pub fn render_text(&self) -> String {
        let n = self.headers.len();
        let widths: Vec<usize> = (0..n)
            .map(|c| {
                self.rows
                    .iter()
                    .map(|r| r[c].chars().count())
                    .chain(std::iter::once(self.headers[c].chars().count()))
                    .max()
                    .unwrap_or(0)
            })
            .collect();
        let line = |cells: &[String]| -> String {
            let parts: Vec<String> = cells
                .iter()
                .enumerate()
                .map(|(c, s)| match self.align[c] {
                    Align::Left => format!("{:<w$}", s, w = widths[c]),
                    Align::Right => format!("{:>w$}", s, w = widths[c]),
                })
                .collect();
            parts.join("  ").trim_end().to_string()
        };
        let mut out = String::new();
        if !self.title.is_empty() {
            let _ = writeln!(out, "{}", self.title);
        }
        let _ = writeln!(out, "{}", line(&self.headers));
        let rule: Vec<String> = widths.iter().map(|&w| "-".repeat(w)).collect();
        let _ = writeln!(out, "{}", rule.join("  "));
        for r in &self.rows {
            let _ = writeln!(out, "{}", line(r));
        }
        out
    }

    pub fn render_csv(&self) -> String {
        let mut out = self.headers.join(",");
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.join(","));
            out.push('\n');
        }
        out
    }
}

/// Label-then-group rows with one column per source; empty rows omitted.
pub fn render_distribution(dist: &DistributionTable) -> TableSpec {
    let mut sources = vec![SourceDataset::UTKFace, SourceDataset::CelebDF, SourceDataset::FaceForensicsPP];
    if dist.has_source(SourceDataset::Synthetic) {
        sources.push(SourceDataset::Synthetic);
    }
    let mut headers = vec!["Label & Age Group".to_string()];
    headers.extend(sources.iter().map(|s| s.display_name().to_string()));
    let mut table = TableSpec::new("Age and label distribution by dataset", headers);
    for label in Label::ALL {
        for group in AgeGroup::ALL {
            if dist.row_total(label, group) == 0 {
                continue;
            }
            let mut row = vec![format!("{label} ({group})")];
            row.extend(sources.iter().map(|&s| dist.count(label, group, s).to_string()));
            table.push_row(row);
        }
    }
    table
}

pub fn render_plan(plan: &BalancePlan, title: &str) -> TableSpec {
    let headers = ["Label & Age Group", "Current", "Target", "Action", "Amount", "Shortfall"];
    let mut table = TableSpec::new(title, headers.iter().map(|s| s.to_string()).collect());
    table.align[3] = Align::Left;
    for e in &plan.entries {
        table.push_row(vec![
            format!("{} ({})", e.label, e.group),
            e.current.to_string(),
            e.target.to_string(),
            e.action.name().to_string(),
            e.action.amount().to_string(),
            e.shortfall.to_string(),
        ]);
    }
    table
}

fn metric_text(v: Option<f64>) -> String {
    v.map_or_else(|| "None".to_string(), format_metric)
}

fn ordered_unique<'a>(items: impl Iterator<Item = &'a String>) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for s in items {
        if !out.contains(s) {
            out.push(s.clone());
        }
    }
    out
}

/// One table per training set: a row per test set, an AUC/PAUC/EER column
/// triple per model, taken from the overall cells.
pub fn render_metrics(report: &MetricReport) -> Vec<TableSpec> {
    let train_sets = ordered_unique(report.contexts.iter().map(|c| &c.train_set));
    let mut tables = Vec::new();
    for train in train_sets {
        let ctxs: Vec<_> = report.contexts.iter().filter(|c| c.train_set == train).collect();
        let models = ordered_unique(ctxs.iter().map(|c| &c.model_id));
        let tests = ordered_unique(ctxs.iter().map(|c| &c.test_set));
        let mut headers = vec!["Test Set".to_string()];
        for m in &models {
            headers.extend(Metric::ALL.iter().map(|k| format!("{m} {}", k.name())));
        }
        let mut table = TableSpec::new(format!("Models trained on {train}"), headers);
        for test in &tests {
            let mut row = vec![test.clone()];
            for m in &models {
                let cell = ctxs
                    .iter()
                    .find(|c| &c.model_id == m && &c.test_set == test)
                    .and_then(|c| report.cell(c, Stratum::Overall));
                row.extend(Metric::ALL.iter().map(|&k| metric_text(cell.and_then(|c| c.get(k)))));
            }
            table.push_row(row);
        }
        tables.push(table);
    }
    tables
}

/// Age-disaggregated table for one training set: a row per (stratum,
/// metric), a column per (test set, model).
pub fn render_age_metrics(report: &MetricReport, train_set: &str) -> TableSpec {
    let ctxs: Vec<_> = report.contexts.iter().filter(|c| c.train_set == train_set).collect();
    let tests = ordered_unique(ctxs.iter().map(|c| &c.test_set));
    let models = ordered_unique(ctxs.iter().map(|c| &c.model_id));
    let mut headers = vec!["Age Group".to_string(), "Metric".to_string()];
    let mut columns = Vec::new();
    for t in &tests {
        for m in &models {
            if let Some(c) = ctxs.iter().find(|c| &c.test_set == t && &c.model_id == m) {
                headers.push(format!("{t}/{m}"));
                columns.push(*c);
            }
        }
    }
    let mut table = TableSpec::new(format!("Age-specific evaluation, trained on {train_set}"), headers);
    table.align[1] = Align::Left;
    let strata = std::iter::once(Stratum::Overall).chain(AgeGroup::ALL.map(Stratum::Group));
    for stratum in strata {
        for metric in Metric::ALL {
            let label = match stratum {
                Stratum::Overall => "Overall".to_string(),
                Stratum::Group(g) => g.to_string(),
            };
            let mut row = vec![label, metric.name().to_string()];
            row.extend(
                columns
                    .iter()
                    .map(|c| metric_text(report.cell(c, stratum).and_then(|cell| cell.get(metric)))),
            );
            table.push_row(row);
        }
    }
    table
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChartKind {
    Pie,
    Bar,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChartSpec {
    pub kind: ChartKind,
    pub title: String,
    pub series: Vec<(String, f64)>,
}

const PALETTE: [&str; 8] = [
    "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948", "#b07aa1", "#9c755f",
];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Renders a self-contained SVG document. Pie slices carry their sweep in a
/// `data-angle` attribute (degrees).
pub fn render_chart(spec: &ChartSpec) -> Result<String> {
    if spec.series.is_empty() {
        return Err(Error::validation("chart", "series is empty"));
    }
    if spec.series.iter().any(|(_, v)| !v.is_finite() || *v < 0.0) {
        return Err(Error::validation("chart", "series values must be finite and non-negative"));
    }
    match spec.kind {
        ChartKind::Pie => render_pie(spec),
        ChartKind::Bar => Ok(render_bar(spec)),
    }
}

fn render_pie(spec: &ChartSpec) -> Result<String> {
    let total: f64 = spec.series.iter().map(|(_, v)| v).sum();
    if total <= 0.0 {
        return Err(Error::validation("chart", "pie series sums to zero"));
    }
    let (cx, cy, r) = (160.0, 180.0, 130.0);
    let legend_rows = spec.series.len() as f64;
    let height = (360.0f64).max(60.0 + 22.0 * legend_rows);
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="520" height="{height:.0}" viewBox="0 0 520 {height:.0}">"#
    );
    let _ = writeln!(out, r#"<title>{}</title>"#, escape(&spec.title));
    let _ = writeln!(
        out,
        r#"<text x="260" y="24" text-anchor="middle" font-family="sans-serif" font-size="16">{}</text>"#,
        escape(&spec.title)
    );
    let point = |deg: f64| {
        let rad = (deg - 90.0).to_radians();
        (cx + r * rad.cos(), cy + r * rad.sin())
    };
    let mut start = 0.0;
    for (i, (label, value)) in spec.series.iter().enumerate() {
        let sweep = 360.0 * value / total;
        let color = PALETTE[i % PALETTE.len()];
        let attrs = format!(
            r#"data-label="{}" data-value="{}" data-angle="{:.3}" fill="{color}" stroke="white""#,
            escape(label),
            value,
            sweep
        );
        if sweep >= 360.0 - 1e-9 {
            let _ = writeln!(out, r#"<circle cx="{cx}" cy="{cy}" r="{r}" {attrs}/>"#);
        } else if sweep > 0.0 {
            let (x0, y0) = point(start);
            let (x1, y1) = point(start + sweep);
            let large = u8::from(sweep > 180.0);
            let _ = writeln!(
                out,
                r#"<path d="M {cx:.3} {cy:.3} L {x0:.3} {y0:.3} A {r:.3} {r:.3} 0 {large} 1 {x1:.3} {y1:.3} Z" {attrs}/>"#
            );
        }
        let ly = 60.0 + 22.0 * i as f64;
        let _ = writeln!(out, r#"<rect x="320" y="{:.0}" width="14" height="14" fill="{color}"/>"#, ly - 12.0);
        let _ = writeln!(
            out,
            r#"<text x="340" y="{ly:.0}" font-family="sans-serif" font-size="12">{} ({:.1}%)</text>"#,
            escape(label),
            100.0 * value / total
        );
        start += sweep;
    }
    out.push_str("</svg>\n");
    Ok(out)
}

fn render_bar(spec: &ChartSpec) -> String {
    let n = spec.series.len() as f64;
    let max = spec.series.iter().map(|(_, v)| *v).fold(0.0, f64::max);
    let (left, top, plot_h, bar_w, gap) = (50.0, 40.0, 240.0, 36.0, 16.0);
    let width = left + n * (bar_w + gap) + gap;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="340" viewBox="0 0 {width:.0} 340">"#
    );
    let _ = writeln!(out, r#"<title>{}</title>"#, escape(&spec.title));
    let _ = writeln!(
        out,
        r#"<text x="{:.0}" y="24" text-anchor="middle" font-family="sans-serif" font-size="16">{}</text>"#,
        width / 2.0,
        escape(&spec.title)
    );
    let base = top + plot_h;
    let _ = writeln!(out, r#"<line x1="{left}" y1="{base}" x2="{width:.0}" y2="{base}" stroke="black"/>"#);
    for (i, (label, value)) in spec.series.iter().enumerate() {
        let h = if max > 0.0 { plot_h * value / max } else { 0.0 };
        let x = left + gap + i as f64 * (bar_w + gap);
        let _ = writeln!(
            out,
            r#"<rect x="{x:.3}" y="{:.3}" width="{bar_w}" height="{h:.3}" fill="{}" data-label="{}" data-value="{}"/>"#,
            base - h,
            PALETTE[i % PALETTE.len()],
            escape(label),
            value
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.3}" y="{:.0}" text-anchor="middle" font-family="sans-serif" font-size="11">{}</text>"#,
            x + bar_w / 2.0,
            base + 16.0,
            escape(label)
        );
    }
    out.push_str("</svg>\n");
    out
}

pub fn write_chart(spec: &ChartSpec, path: &Path) -> Result<()> {
    let svg = render_chart(spec)?;
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    std::fs::write(path, svg).map_err(|e| Error::io(path, e))
}

/// Per-source pie of age-group shares, one chart per populated source.
pub fn age_share_charts(dist: &DistributionTable) -> Vec<(SourceDataset, ChartSpec)> {
    SourceDataset::ALL
        .iter()
        .filter(|&&s| dist.has_source(s))
        .map(|&s| {
            let series = AgeGroup::ALL
                .iter()
                .map(|&g| {
                    let n: usize = Label::ALL.iter().map(|&l| dist.count(l, g, s)).sum();
                    (g.to_string(), n as f64)
                })
                .collect();
            (
                s,
                ChartSpec {
                    kind: ChartKind::Pie,
                    title: format!("Age group distribution: {}", s.display_name()),
                    series,
                },
            )
        })
        .collect()
}
