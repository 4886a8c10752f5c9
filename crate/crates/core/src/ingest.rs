//! Interchange file formats.
//!
//! | file        | layout                                                          |
//! |-------------|-----------------------------------------------------------------|
//! | manifest    | header `frame_id,video_id,source,label,estimated_age,age_group` |
//! | descriptors | `frame_id,d,v1..vd,yaw_deg,pitch_deg,brightness,expression`     |
//! | features    | `frame_id,d,f1..fd,label`                                       |
//! | scores      | header `model_id,train_set,test_set,frame_id,label,age_group,score` |
//! | pairs       | `reference,generated` (header optional)                         |
//!
//! All files are UTF-8, comma separated, LF terminated. Descriptor and
//! feature files have no header; lines beginning with `#` are skipped.
//! Rasters are 8-bit PNG (gray or RGB) or binary PGM/PPM (`P5`/`P6`).

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::io::{Cursor, Write};
use std::path::{Path, PathBuf};

use crate::age::{round_age, AgeGroup, CurationConfig, FrameRecord, Label, SourceDataset};
use crate::detector::FeatureVector;
use crate::error::{Error, Result};
use crate::matching::FaceDescriptor;

pub const MANIFEST_VERSION: &str = "agefair-manifest/1";
pub const MANIFEST_HEADER: [&str; 6] = [
    "frame_id",
    "video_id",
    "source",
    "label",
    "estimated_age",
    "age_group",
];
pub const SCORES_HEADER: [&str; 7] = [
    "model_id",
    "train_set",
    "test_set",
    "frame_id",
    "label",
    "age_group",
    "score",
];

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn reader(text: &str, has_headers: bool) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .has_headers(has_headers)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes())
}

fn writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new())
}

fn finish(w: csv::Writer<Vec<u8>>) -> String {
    let bytes = w.into_inner().expect("in-memory writer");
    String::from_utf8(bytes).expect("csv output is utf-8")
}

fn line_of(rec: &csv::StringRecord) -> usize {
    rec.position().map(|p| p.line() as usize).unwrap_or(0)
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
    Error::parse(path, line, e.to_string())
}

fn parse_finite(path: &Path, line: usize, field: &str, what: &str) -> Result<f64> {
    let v: f64 = field
        .parse()
        .map_err(|_| Error::parse(path, line, format!("unparseable {what} {field:?}")))?;
    if !v.is_finite() {
        return Err(Error::parse(path, line, format!("non-finite {what} {field:?}")));
    }
    Ok(v)
}

// ---------------------------------------------------------------------------
// Manifests
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Provenance {
    pub path: Option<PathBuf>,
    pub format_version: String,
}

/// An ordered, validated set of frame records with unique ids.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Manifest {
    pub records: Vec<FrameRecord>,
    pub provenance: Provenance,
}

impl Manifest {
    /// Builds an in-memory manifest, rejecting duplicate frame ids.
    pub fn from_records(records: Vec<FrameRecord>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(records.len());
        for r in &records {
            if !seen.insert(r.frame_id.as_str()) {
                return Err(Error::validation(
                    "manifest",
                    format!("duplicate frame_id {}", r.frame_id),
                ));
            }
        }
        Ok(Self {
            records,
            provenance: Provenance {
                path: None,
                format_version: MANIFEST_VERSION.to_string(),
            },
        })
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Keeps records for which `keep` is true, preserving order.
    pub fn filtered(&self, mut keep: impl FnMut(&FrameRecord) -> bool) -> Manifest {
        Manifest {
            records: self.records.iter().filter(|r| keep(r)).cloned().collect(),
            provenance: self.provenance.clone(),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut w = writer();
        w.write_record(MANIFEST_HEADER).expect("in-memory write");
        for r in &self.records {
            w.write_record([
                r.frame_id.as_str(),
                r.video_id.as_str(),
                r.source.as_str(),
                r.label.as_str(),
                &r.estimated_age().to_string(),
                r.age_group().as_str(),
            ])
            .expect("in-memory write");
        }
        finish(w)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LoadMode {
    /// Abort on the first invalid row.
    #[default]
    Strict,
    /// Drop invalid rows and count them.
    Lenient,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DroppedRow {
    pub line: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LoadStats {
    pub rows: usize,
    pub accepted: usize,
    pub dropped: Vec<DroppedRow>,
}

pub fn load_manifest(path: &Path, mode: LoadMode, cfg: &CurationConfig) -> Result<(Manifest, LoadStats)> {
    let text = read_text(path)?;
    let (mut manifest, stats) = parse_manifest(&text, path, mode, cfg)?;
    manifest.provenance.path = Some(path.to_path_buf());
    Ok((manifest, stats))
}

pub fn parse_manifest(
    text: &str,
    path: &Path,
    mode: LoadMode,
    cfg: &CurationConfig,
) -> Result<(Manifest, LoadStats)> {
    let mut rdr = reader(text, true);
    let headers = rdr.headers().map_err(|e| csv_error(path, e))?.clone();
    let mut columns = [0usize; 6];
    for (slot, name) in columns.iter_mut().zip(MANIFEST_HEADER) {
        *slot = headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::parse(path, 1, format!("missing column {name:?}")))?;
    }

    let mut stats = LoadStats::default();
    let mut records = Vec::new();
    let mut seen = HashSet::new();
    for row in rdr.records() {
        let row = row.map_err(|e| csv_error(path, e))?;
        stats.rows += 1;
        let line = line_of(&row);
        match parse_manifest_row(&row, &columns, cfg, path, line) {
            Ok(rec) if !seen.contains(&rec.frame_id) => {
                seen.insert(rec.frame_id.clone());
                records.push(rec);
            }
            Ok(rec) => {
                let err = Error::parse(path, line, format!("duplicate frame_id {}", rec.frame_id));
                match mode {
                    LoadMode::Strict => return Err(err),
                    LoadMode::Lenient => stats.dropped.push(DroppedRow { line, reason: err.to_string() }),
                }
            }
            Err(err) => match mode {
                LoadMode::Strict => return Err(err),
                LoadMode::Lenient => stats.dropped.push(DroppedRow { line, reason: err.to_string() }),
            },
        }
    }
    stats.accepted = records.len();
    let manifest = Manifest {
        records,
        provenance: Provenance {
            path: None,
            format_version: MANIFEST_VERSION.to_string(),
        },
    };
    Ok((manifest, stats))
}

fn parse_manifest_row(
    row: &csv::StringRecord,
    columns: &[usize; 6],
    cfg: &CurationConfig,
    path: &Path,
    line: usize,
) -> Result<FrameRecord> {
    let field = |i: usize| -> Result<&str> {
        row.get(columns[i])
            .ok_or_else(|| Error::parse(path, line, format!("missing field {:?}", MANIFEST_HEADER[i])))
    };
    let frame_id = field(0)?;
    if frame_id.is_empty() {
        return Err(Error::parse(path, line, "empty frame_id"));
    }
    let source: SourceDataset = field(2)?.parse().map_err(|e: Error| Error::parse(path, line, e.to_string()))?;
    let label: Label = field(3)?.parse().map_err(|e: Error| Error::parse(path, line, e.to_string()))?;
    let age_text = field(4)?;
    let age = age_text
        .parse::<f64>()
        .map_err(|_| Error::parse(path, line, format!("unparseable age {age_text:?}")))
        .and_then(|a| round_age(a).map_err(|e| Error::parse(path, line, e.to_string())))?;
    let stored: AgeGroup = field(5)?.parse().map_err(|e: Error| Error::parse(path, line, e.to_string()))?;
    let rec = FrameRecord::new(frame_id, field(1)?, source, label, age, cfg)
        .map_err(|e| Error::parse(path, line, e.to_string()))?;
    if rec.age_group() != stored {
        return Err(Error::parse(
            path,
            line,
            format!(
                "age {} bins to {} but row stores {}",
                age,
                rec.age_group(),
                stored
            ),
        ));
    }
    Ok(rec)
}

pub fn write_manifest(manifest: &Manifest, path: &Path) -> Result<()> {
    write_text(path, &manifest.to_csv())
}

/// Reads a plain list of ids, one per line.
pub fn load_id_list(path: &Path) -> Result<Vec<String>> {
    Ok(read_text(path)?
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_string)
        .collect())
}

pub fn write_id_list(ids: &[String], path: &Path) -> Result<()> {
    let mut text = String::new();
    for id in ids {
        text.push_str(id);
        text.push('\n');
    }
    write_text(path, &text)
}

// ---------------------------------------------------------------------------
// Descriptors and features
// ---------------------------------------------------------------------------

/// Descriptors keyed by frame id, all sharing one embedding dimension.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DescriptorSet {
    pub dim: usize,
    pub descriptors: BTreeMap<String, FaceDescriptor>,
}

impl DescriptorSet {
    pub fn len(&self) -> usize {
        self.descriptors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.descriptors.is_empty()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (id, d) in &self.descriptors {
            out.push_str(id);
            out.push(',');
            out.push_str(&d.embedding.len().to_string());
            for v in &d.embedding {
                out.push(',');
                out.push_str(&v.to_string());
            }
            for v in [d.yaw_deg, d.pitch_deg, d.brightness, d.expression] {
                out.push(',');
                out.push_str(&v.to_string());
            }
            out.push('\n');
        }
        out
    }
}

/// Splits a `id,d,v1..vd,<tail...>` row, checking the declared dimension.
fn split_vector_row<'a>(
    row: &'a csv::StringRecord,
    tail: usize,
    path: &Path,
    line: usize,
    expected_dim: Option<usize>,
) -> Result<(&'a str, Vec<f64>, Vec<&'a str>)> {
    let id = row.get(0).filter(|s| !s.is_empty()).ok_or_else(|| Error::parse(path, line, "missing id"))?;
    let d: usize = row
        .get(1)
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::parse(path, line, format!("{id}: missing or invalid dimension field")))?;
    if row.len() != 2 + d + tail {
        return Err(Error::parse(
            path,
            line,
            format!("{id}: declared dimension {d} but row has {} fields", row.len()),
        ));
    }
    if let Some(expected) = expected_dim {
        if d != expected {
            return Err(Error::parse(
                path,
                line,
                format!("{id}: dimension {d} differs from {expected} used by earlier rows"),
            ));
        }
    }
    let values = (0..d)
        .map(|i| parse_finite(path, line, &row[2 + i], &format!("{id} component {}", i + 1)))
        .collect::<Result<Vec<_>>>()?;
    let rest = (0..tail).map(|i| &row[2 + d + i]).collect();
    Ok((id, values, rest))
}

pub fn load_descriptors(path: &Path) -> Result<DescriptorSet> {
    parse_descriptors(&read_text(path)?, path)
}

pub fn parse_descriptors(text: &str, path: &Path) -> Result<DescriptorSet> {
    let mut set = DescriptorSet::default();
    let mut dim = None;
    for row in reader(text, false).records() {
        let row = row.map_err(|e| csv_error(path, e))?;
        let line = line_of(&row);
        let (id, embedding, tail) = split_vector_row(&row, 4, path, line, dim)?;
        dim = Some(embedding.len());
        let names = ["yaw", "pitch", "brightness", "expression"];
        let attrs = tail
            .iter()
            .zip(names)
            .map(|(f, n)| parse_finite(path, line, f, &format!("{id} {n}")))
            .collect::<Result<Vec<_>>>()?;
        let desc = FaceDescriptor::new(embedding, attrs[0], attrs[1], attrs[2], attrs[3])
            .map_err(|e| Error::parse(path, line, format!("{id}: {e}")))?;
        if set.descriptors.insert(id.to_string(), desc).is_some() {
            return Err(Error::parse(path, line, format!("duplicate id {id}")));
        }
    }
    set.dim = dim.unwrap_or(0);
    Ok(set)
}

pub fn write_descriptors(set: &DescriptorSet, path: &Path) -> Result<()> {
    write_text(path, &set.to_csv())
}

pub fn load_features(path: &Path) -> Result<Vec<FeatureVector>> {
    parse_features(&read_text(path)?, path)
}

pub fn parse_features(text: &str, path: &Path) -> Result<Vec<FeatureVector>> {
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    let mut dim = None;
    for row in reader(text, false).records() {
        let row = row.map_err(|e| csv_error(path, e))?;
        let line = line_of(&row);
        let (id, features, tail) = split_vector_row(&row, 1, path, line, dim)?;
        dim = Some(features.len());
        let label: Label = tail[0].parse().map_err(|e: Error| Error::parse(path, line, e.to_string()))?;
        if !seen.insert(id.to_string()) {
            return Err(Error::parse(path, line, format!("duplicate id {id}")));
        }
        out.push(FeatureVector {
            frame_id: id.to_string(),
            features,
            label,
        });
    }
    Ok(out)
}

pub fn features_to_csv(features: &[FeatureVector]) -> String {
    let mut out = String::new();
    for f in features {
        out.push_str(&f.frame_id);
        out.push(',');
        out.push_str(&f.features.len().to_string());
        for v in &f.features {
            out.push(',');
            out.push_str(&v.to_string());
        }
        out.push(',');
        out.push_str(f.label.as_str());
        out.push('\n');
    }
    out
}

pub fn write_features(features: &[FeatureVector], path: &Path) -> Result<()> {
    write_text(path, &features_to_csv(features))
}

// ---------------------------------------------------------------------------
// Scores
// ---------------------------------------------------------------------------

/// A detector score for one frame; higher means more likely fake.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreRecord {
    pub frame_id: String,
    pub model_id: String,
    pub train_set: String,
    pub test_set: String,
    pub label: Label,
    /// `None` for rows from a test set that lacks age strata.
    pub age_group: Option<AgeGroup>,
    pub score: f64,
}

pub fn scores_to_csv(records: &[ScoreRecord]) -> String {
    let mut w = writer();
    w.write_record(SCORES_HEADER).expect("in-memory write");
    for r in records {
        w.write_record([
            r.model_id.as_str(),
            r.train_set.as_str(),
            r.test_set.as_str(),
            r.frame_id.as_str(),
            r.label.as_str(),
            r.age_group.map_or("none", AgeGroup::as_str),
            // Shortest round-trip representation, so load(write(x)) == x.
            &r.score.to_string(),
        ])
        .expect("in-memory write");
    }
    finish(w)
}

pub fn write_scores(records: &[ScoreRecord], path: &Path) -> Result<()> {
    for r in records {
        if !r.score.is_finite() {
            return Err(Error::NonFinite(format!("score for {}", r.frame_id)));
        }
    }
    write_text(path, &scores_to_csv(records))
}

pub fn load_scores(path: &Path) -> Result<Vec<ScoreRecord>> {
    parse_scores(&read_text(path)?, path)
}

pub fn parse_scores(text: &str, path: &Path) -> Result<Vec<ScoreRecord>> {
    let mut rdr = reader(text, true);
    let headers = rdr.headers().map_err(|e| csv_error(path, e))?.clone();
    let mut columns = [0usize; 7];
    for (slot, name) in columns.iter_mut().zip(SCORES_HEADER) {
        *slot = headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::parse(path, 1, format!("missing column {name:?}")))?;
    }
    let mut out = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(|e| csv_error(path, e))?;
        let line = line_of(&row);
        let field = |i: usize| -> Result<&str> {
            row.get(columns[i])
                .ok_or_else(|| Error::parse(path, line, format!("missing field {:?}", SCORES_HEADER[i])))
        };
        let label: Label = field(4)?.parse().map_err(|e: Error| Error::parse(path, line, e.to_string()))?;
        let age_group = match field(5)? {
            g if g.eq_ignore_ascii_case("none") => None,
            g => Some(g.parse::<AgeGroup>().map_err(|e| Error::parse(path, line, e.to_string()))?),
        };
        out.push(ScoreRecord {
            model_id: field(0)?.to_string(),
            train_set: field(1)?.to_string(),
            test_set: field(2)?.to_string(),
            frame_id: field(3)?.to_string(),
            label,
            age_group,
            score: parse_finite(path, line, field(6)?, "score")?,
        });
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Rasters
// ---------------------------------------------------------------------------

/// 8-bit gray or RGB image, row-major, channels interleaved.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RasterImage {
    width: usize,
    height: usize,
    channels: usize,
    pixels: Vec<u8>,
}

impl RasterImage {
    pub fn new(width: usize, height: usize, channels: usize, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::validation("image", "width and height must be positive"));
        }
        if channels != 1 && channels != 3 {
            return Err(Error::validation("image", format!("unsupported channel count {channels}")));
        }
        if pixels.len() != width * height * channels {
            return Err(Error::validation(
                "image",
                format!(
                    "expected {} samples for {width}x{height}x{channels}, got {}",
                    width * height * channels,
                    pixels.len()
                ),
            ));
        }
        Ok(Self {
            width,
            height,
            channels,
            pixels,
        })
    }

    pub fn gray(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        Self::new(width, height, 1, pixels)
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Self {
        Self::new(width, height, 1, vec![value; width * height]).expect("valid dimensions")
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    /// Luma plane (ITU-R BT.601 weights) as f64, row-major.
    pub fn luma(&self) -> Vec<f64> {
        match self.channels {
            1 => self.pixels.iter().map(|&p| f64::from(p)).collect(),
            _ => self
                .pixels
                .chunks_exact(3)
                .map(|c| 0.299 * f64::from(c[0]) + 0.587 * f64::from(c[1]) + 0.114 * f64::from(c[2]))
                .collect(),
        }
    }
}

pub fn load_image(path: &Path) -> Result<RasterImage> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_image(&bytes).map_err(|message| Error::Image {
        path: path.to_path_buf(),
        message,
    })
}

pub fn decode_image(bytes: &[u8]) -> std::result::Result<RasterImage, String> {
    if bytes.starts_with(b"\x89PNG\r\n\x1a\n") {
        decode_png(bytes)
    } else if bytes.starts_with(b"P5") || bytes.starts_with(b"P6") {
        decode_pnm(bytes)
    } else {
        Err("unrecognised image format (expected PNG, P5 or P6)".to_string())
    }
}

fn decode_png(bytes: &[u8]) -> std::result::Result<RasterImage, String> {
    let decoder = png::Decoder::new(Cursor::new(bytes));
    let mut reader = decoder.read_info().map_err(|e| e.to_string())?;
    let info = reader.info();
    if info.bit_depth != png::BitDepth::Eight {
        return Err(format!("unsupported bit depth {:?}", info.bit_depth));
    }
    let channels = match info.color_type {
        png::ColorType::Grayscale => 1,
        png::ColorType::Rgb => 3,
        other => return Err(format!("unsupported color type {other:?}")),
    };
    let size = reader.output_buffer_size().ok_or("image too large")?;
    let mut buf = vec![0u8; size];
    let frame = reader.next_frame(&mut buf).map_err(|e| e.to_string())?;
    buf.truncate(frame.buffer_size());
    RasterImage::new(frame.width as usize, frame.height as usize, channels, buf).map_err(|e| e.to_string())
}

fn decode_pnm(bytes: &[u8]) -> std::result::Result<RasterImage, String> {
    let channels = if bytes[1] == b'5' { 1 } else { 3 };
    let mut pos = 2;
    let mut header = [0usize; 3];
    for slot in header.iter_mut() {
        loop {
            match bytes.get(pos) {
                Some(b'#') => {
                    while bytes.get(pos).is_some_and(|&b| b != b'\n') {
                        pos += 1;
                    }
                }
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(_) => break,
                None => return Err("truncated header".to_string()),
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(u8::is_ascii_digit) {
            pos += 1;
        }
        *slot = std::str::from_utf8(&bytes[start..pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or("malformed header field")?;
    }
    // Exactly one whitespace byte separates the header from the raster.
    if !bytes.get(pos).is_some_and(u8::is_ascii_whitespace) {
        return Err("truncated header".to_string());
    }
    pos += 1;
    let [width, height, maxval] = header;
    if maxval == 0 || maxval > 255 {
        return Err(format!("unsupported bit depth (maxval {maxval})"));
    }
    let needed = width * height * channels;
    let data = &bytes[pos..];
    if data.len() < needed {
        return Err(format!("truncated raster: need {needed} bytes, found {}", data.len()));
    }
    RasterImage::new(width, height, channels, data[..needed].to_vec()).map_err(|e| e.to_string())
}

pub fn encode_png(img: &RasterImage) -> Vec<u8> {
    let mut out = Vec::new();
    {
        let mut enc = png::Encoder::new(&mut out, img.width as u32, img.height as u32);
        enc.set_color(if img.channels == 1 {
            png::ColorType::Grayscale
        } else {
            png::ColorType::Rgb
        });
        enc.set_depth(png::BitDepth::Eight);
        let mut w = enc.write_header().expect("in-memory png header");
        w.write_image_data(&img.pixels).expect("in-memory png data");
    }
    out
}

pub fn encode_pnm(img: &RasterImage) -> Vec<u8> {
    let magic = if img.channels == 1 { "P5" } else { "P6" };
    let mut out = format!("{magic}\n{} {}\n255\n", img.width, img.height).into_bytes();
    out.write_all(&img.pixels).expect("in-memory write");
    out
}

/// Writes PNG or PNM depending on the file extension (`.pgm`/`.ppm`/`.pnm`).
pub fn write_image(img: &RasterImage, path: &Path) -> Result<()> {
    let pnm = matches!(
        path.extension().and_then(|e| e.to_str()),
        Some("pgm" | "ppm" | "pnm")
    );
    let bytes = if pnm { encode_pnm(img) } else { encode_png(img) };
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// One reference/generated image pair for quality gating.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImagePair {
    pub reference: PathBuf,
    pub generated: PathBuf,
}

/// Loads a pair list. Relative paths resolve against the list's directory.
pub fn load_pairs(path: &Path) -> Result<Vec<ImagePair>> {
    let text = read_text(path)?;
    let base = path.parent().unwrap_or(Path::new(""));
    let mut out = Vec::new();
    for row in reader(&text, false).records() {
        let row = row.map_err(|e| csv_error(path, e))?;
        let line = line_of(&row);
        if row.len() != 2 {
            return Err(Error::parse(path, line, format!("expected 2 columns, found {}", row.len())));
        }
        if line == 1 && &row[0] == "reference" && &row[1] == "generated" {
            continue;
        }
        out.push(ImagePair {
            reference: base.join(&row[0]),
            generated: base.join(&row[1]),
        });
    }
    Ok(out)
}
