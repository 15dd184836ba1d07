//! Corpus ingestion, expansion, train/test splitting, contaminated-corpus
//! generation and deterministic persistence.
//!
//! On disk a corpus is a payload file plus a JSON manifest stored next to it
//! as `<payload>.json`. Raw payloads are little-endian floats, segment after
//! segment. CSV payloads hold one segment per row and carry no manifest.

use crate::error::{invalid, Error, Result};
use crate::rng::{derive_seed, stream, Domain};
use crate::signal::{
    lambda_for_snr, mix_samples, MixRecord, Segment, SegmentKind, SAMPLE_RATE_HZ, SEGMENT_LEN,
};
use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

pub mod synthetic;

/// Default SNR grid: every integer level from -7 dB to +2 dB.
pub const DEFAULT_SNR_MIN_DB: i32 = -7;
pub const DEFAULT_SNR_MAX_DB: i32 = 2;

pub const CONTAMINATED_MANIFEST: &str = "contaminated.json";
pub const CONTAMINATED_PAYLOAD: &str = "contaminated.f64";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorpusFormat {
    RawF32Le,
    RawF64Le,
    Csv,
}

impl CorpusFormat {
    /// Guess from the file name: `.csv` is CSV, `.f64` is raw f64, anything
    /// else raw f32.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("csv") => CorpusFormat::Csv,
            Some("f64") => CorpusFormat::RawF64Le,
            _ => CorpusFormat::RawF32Le,
        }
    }

    fn bytes_per_sample(self) -> Option<usize> {
        match self {
            CorpusFormat::RawF32Le => Some(4),
            CorpusFormat::RawF64Le => Some(8),
            CorpusFormat::Csv => None,
        }
    }
}

/// JSON manifest stored next to a raw payload.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorpusManifest {
    pub format: CorpusFormat,
    pub n_segments: usize,
    pub segment_len: usize,
    pub sample_rate_hz: f64,
    pub checksum_sha256: String,
}

/// Where a corpus came from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub path: Option<PathBuf>,
    pub count: usize,
    pub checksum_sha256: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Corpus {
    segments: Vec<Segment>,
    kind: SegmentKind,
    source: Provenance,
}

impl Corpus {
    /// In-memory corpus; the checksum covers the samples as f64 LE bytes.
    pub fn new(segments: Vec<Segment>, kind: SegmentKind) -> Result<Self> {
        if segments.is_empty() {
            return Err(invalid("a corpus needs at least one segment"));
        }
        if let Some(i) = segments.iter().position(|s| s.kind() != kind) {
            return Err(Error::InvalidData(format!(
                "segment {i} is {:?}, corpus kind is {kind:?}",
                segments[i].kind()
            )));
        }
        let source = Provenance {
            path: None,
            count: segments.len(),
            checksum_sha256: sha256_hex(&encode_payload(&segments, CorpusFormat::RawF64Le)),
        };
        Ok(Corpus {
            segments,
            kind,
            source,
        })
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn kind(&self) -> SegmentKind {
        self.kind
    }

    pub fn source(&self) -> &Provenance {
        &self.source
    }

    pub fn get(&self, index: usize) -> Option<&Segment> {
        self.segments.get(index)
    }

    fn select(&self, indices: &[usize]) -> Result<Corpus> {
        Corpus::new(
            indices.iter().map(|&i| self.segments[i].clone()).collect(),
            self.kind,
        )
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut out = String::with_capacity(64);
    for b in digest.iter() {
        let _ = write!(out, "{b:02x}");
    }
    out
}

/// Manifest path for a raw payload: `eeg.f32` → `eeg.f32.json`.
pub fn manifest_path(payload: &Path) -> PathBuf {
    let mut name = payload.as_os_str().to_owned();
    name.push(".json");
    PathBuf::from(name)
}

fn encode_payload(segments: &[Segment], format: CorpusFormat) -> Vec<u8> {
    match format {
        CorpusFormat::RawF32Le => segments
            .iter()
            .flat_map(|s| s.samples().iter().flat_map(|&v| (v as f32).to_le_bytes()))
            .collect(),
        CorpusFormat::RawF64Le => segments
            .iter()
            .flat_map(|s| s.samples().iter().flat_map(|&v| v.to_le_bytes()))
            .collect(),
        CorpusFormat::Csv => {
            let mut out = String::new();
            for s in segments {
                for (j, v) in s.samples().iter().enumerate() {
                    if j > 0 {
                        out.push(',');
                    }
                    let _ = write!(out, "{v}");
                }
                out.push('\n');
            }
            out.into_bytes()
        }
    }
}

fn decode_raw(bytes: &[u8], width: usize) -> Vec<f64> {
    match width {
        4 => bytes
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64)
            .collect(),
        _ => bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect(),
    }
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|source| Error::Manifest {
        path: path.to_owned(),
        source,
    })
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).expect("manifest serializes");
    fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

fn segments_from_flat(flat: Vec<f64>, n: usize, kind: SegmentKind) -> Result<Vec<Segment>> {
    flat.chunks_exact(SEGMENT_LEN)
        .take(n)
        .enumerate()
        .map(|(i, chunk)| Segment::new(chunk.to_vec(), kind).map_err(|e| Error::at(i, e)))
        .collect()
}

/// Load a corpus of `kind` segments from `path`.
pub fn load_corpus(path: &Path, format: CorpusFormat, kind: SegmentKind) -> Result<Corpus> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let checksum = sha256_hex(&bytes);
    let segments = match format {
        CorpusFormat::Csv => {
            let text = std::str::from_utf8(&bytes)
                .map_err(|_| Error::InvalidData(format!("{} is not UTF-8", path.display())))?;
            let mut segments = Vec::new();
            for (row, line) in text.lines().filter(|l| !l.trim().is_empty()).enumerate() {
                let values = line
                    .split(',')
                    .map(|f| {
                        f.trim().parse::<f64>().map_err(|_| {
                            Error::InvalidData(format!("row {row}: cannot parse {f:?}"))
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                segments.push(Segment::new(values, kind).map_err(|e| Error::at(row, e))?);
            }
            segments
        }
        raw => {
            let manifest: CorpusManifest = read_json(&manifest_path(path))?;
            if manifest.format != raw {
                return Err(Error::InvalidData(format!(
                    "manifest declares {:?}, loader asked for {raw:?}",
                    manifest.format
                )));
            }
            if manifest.segment_len != SEGMENT_LEN {
                return Err(Error::InvalidData(format!(
                    "manifest segment_len {} != {SEGMENT_LEN}",
                    manifest.segment_len
                )));
            }
            if manifest.n_segments == 0 {
                return Err(Error::InvalidData("manifest declares zero segments".into()));
            }
            let width = raw.bytes_per_sample().unwrap();
            let expected = manifest.n_segments * SEGMENT_LEN * width;
            if bytes.len() != expected {
                return Err(Error::InvalidData(format!(
                    "manifest declares {} segments ({expected} bytes) but payload has {} bytes",
                    manifest.n_segments,
                    bytes.len()
                )));
            }
            if !manifest.checksum_sha256.is_empty() && manifest.checksum_sha256 != checksum {
                return Err(Error::CorruptCorpus {
                    path: path.to_owned(),
                    reason: "payload checksum does not match manifest".into(),
                });
            }
            segments_from_flat(decode_raw(&bytes, width), manifest.n_segments, kind)?
        }
    };
    let mut corpus = Corpus::new(segments, kind)?;
    corpus.source = Provenance {
        path: Some(path.to_owned()),
        count: corpus.len(),
        checksum_sha256: checksum,
    };
    Ok(corpus)
}

/// Write `corpus` to `path` (plus `<path>.json` for raw formats). Returns the
/// payload checksum.
pub fn save_corpus(corpus: &Corpus, path: &Path, format: CorpusFormat) -> Result<String> {
    let bytes = encode_payload(&corpus.segments, format);
    let checksum = sha256_hex(&bytes);
    fs::write(path, &bytes).map_err(|e| Error::io(path, e))?;
    if format != CorpusFormat::Csv {
        let manifest = CorpusManifest {
            format,
            n_segments: corpus.len(),
            segment_len: SEGMENT_LEN,
            sample_rate_hz: SAMPLE_RATE_HZ,
            checksum_sha256: checksum.clone(),
        };
        write_json(&manifest_path(path), &manifest)?;
    }
    Ok(checksum)
}

/// Pad `c` to `target` segments by resampling its own segments uniformly with
/// replacement. The originals keep their positions.
pub fn expand_corpus(c: &Corpus, target: usize, seed: u64) -> Result<Corpus> {
    if target < c.len() {
        return Err(invalid(format!(
            "cannot expand a corpus of {} down to {target}",
            c.len()
        )));
    }
    let mut rng = stream(seed, Domain::Expand, 0);
    let mut segments = c.segments.clone();
    segments.extend((c.len()..target).map(|_| c.segments[rng.random_range(0..c.len())].clone()));
    Corpus::new(segments, c.kind)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitPlan {
    pub train_count: usize,
    pub test_count: usize,
    pub seed: u64,
    /// Shuffle before cutting; otherwise split in corpus order.
    pub shuffle: bool,
}

impl SplitPlan {
    pub fn new(train_count: usize, test_count: usize, seed: u64) -> Self {
        SplitPlan {
            train_count,
            test_count,
            seed,
            shuffle: true,
        }
    }
}

/// Index partition for a corpus of `count` segments.
pub fn split_indices(count: usize, plan: &SplitPlan) -> Result<(Vec<usize>, Vec<usize>)> {
    if plan.train_count == 0 || plan.test_count == 0 {
        return Err(invalid("train and test counts must both be > 0"));
    }
    if plan.train_count + plan.test_count != count {
        return Err(invalid(format!(
            "split {}+{} does not cover {count} segments",
            plan.train_count, plan.test_count
        )));
    }
    let mut order: Vec<usize> = (0..count).collect();
    if plan.shuffle {
        order.shuffle(&mut stream(plan.seed, Domain::Split, 0));
    }
    let test = order.split_off(plan.train_count);
    Ok((order, test))
}

pub fn split_corpus(c: &Corpus, plan: &SplitPlan) -> Result<(Corpus, Corpus)> {
    let (train, test) = split_indices(c.len(), plan)?;
    Ok((c.select(&train)?, c.select(&test)?))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitKind {
    Train,
    Test,
}

/// Integer SNR levels `min..=max`.
pub fn snr_levels(min_db: i32, max_db: i32) -> Result<Vec<i32>> {
    if min_db > max_db {
        return Err(invalid(format!("snr-min {min_db} exceeds snr-max {max_db}")));
    }
    Ok((min_db..=max_db).collect())
}

/// Contaminated corpus for one split; records are level-major, index-minor.
#[derive(Clone, Debug, PartialEq)]
pub struct ContaminatedCorpus {
    pub records: Vec<MixRecord>,
    pub snr_levels: Vec<i32>,
    pub split: SplitKind,
    pub seed: u64,
    pub eeg_source: Provenance,
    pub emg_source: Provenance,
}

impl ContaminatedCorpus {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Number of distinct segments per level.
    pub fn per_level(&self) -> usize {
        self.records.len() / self.snr_levels.len().max(1)
    }

    pub fn records_at(&self, level: i32) -> impl Iterator<Item = &MixRecord> {
        self.records
            .iter()
            .filter(move |r| r.target_snr_db == level as f64)
    }
}

/// Pair `eeg[i]` with `emg[i]` at every level and scale the EMG to hit it.
pub fn generate_contaminated(
    eeg: &Corpus,
    emg: &Corpus,
    levels: &[i32],
    seed: u64,
    split: SplitKind,
) -> Result<ContaminatedCorpus> {
    if eeg.len() != emg.len() {
        return Err(invalid(format!(
            "EEG corpus has {} segments but EMG corpus has {}",
            eeg.len(),
            emg.len()
        )));
    }
    if levels.is_empty() {
        return Err(invalid("at least one SNR level is required"));
    }
    let mut sorted = levels.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != levels.len() {
        return Err(invalid("SNR levels must be distinct"));
    }
    let n = eeg.len();
    let records = (0..levels.len() * n)
        .into_par_iter()
        .map(|k| {
            let (level, i) = (levels[k / n], k % n);
            let x = eeg.segments[i].samples();
            let noise = emg.segments[i].samples();
            let lambda =
                lambda_for_snr(x, noise, level as f64).map_err(|e| Error::at(i, e))?;
            let contaminated = Segment::new(mix_samples(x, noise, lambda)?, SegmentKind::Contaminated)?;
            Ok(MixRecord {
                clean_index: i,
                emg_index: i,
                target_snr_db: level as f64,
                lambda,
                contaminated,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ContaminatedCorpus {
        records,
        snr_levels: levels.to_vec(),
        split,
        seed,
        eeg_source: eeg.source.clone(),
        emg_source: emg.source.clone(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecordEntry {
    pub clean_index: usize,
    pub emg_index: usize,
    pub snr_db: f64,
    pub lambda: f64,
}

/// Manifest of a saved contaminated corpus: the plain corpus fields plus
/// generation provenance and the record table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContaminatedManifest {
    pub format: CorpusFormat,
    pub n_segments: usize,
    pub segment_len: usize,
    pub sample_rate_hz: f64,
    pub checksum_sha256: String,
    pub snr_levels: Vec<i32>,
    pub seed: u64,
    pub eeg_manifest: Provenance,
    pub emg_manifest: Provenance,
    pub split: SplitKind,
    pub records: Vec<RecordEntry>,
}

/// Write `contaminated.json` and `contaminated.f64` into `dir`.
pub fn save_contaminated(c: &ContaminatedCorpus, dir: &Path) -> Result<ContaminatedManifest> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let segments: Vec<Segment> = c.records.iter().map(|r| r.contaminated.clone()).collect();
    let bytes = encode_payload(&segments, CorpusFormat::RawF64Le);
    let payload = dir.join(CONTAMINATED_PAYLOAD);
    fs::write(&payload, &bytes).map_err(|e| Error::io(&payload, e))?;
    let manifest = ContaminatedManifest {
        format: CorpusFormat::RawF64Le,
        n_segments: c.records.len(),
        segment_len: SEGMENT_LEN,
        sample_rate_hz: SAMPLE_RATE_HZ,
        checksum_sha256: sha256_hex(&bytes),
        snr_levels: c.snr_levels.clone(),
        seed: c.seed,
        eeg_manifest: c.eeg_source.clone(),
        emg_manifest: c.emg_source.clone(),
        split: c.split,
        records: c
            .records
            .iter()
            .map(|r| RecordEntry {
                clean_index: r.clean_index,
                emg_index: r.emg_index,
                snr_db: r.target_snr_db,
                lambda: r.lambda,
            })
            .collect(),
    };
    write_json(&dir.join(CONTAMINATED_MANIFEST), &manifest)?;
    Ok(manifest)
}

pub fn read_contaminated_manifest(dir: &Path) -> Result<ContaminatedManifest> {
    read_json(&dir.join(CONTAMINATED_MANIFEST))
}

pub fn load_contaminated(dir: &Path) -> Result<ContaminatedCorpus> {
    let manifest = read_contaminated_manifest(dir)?;
    let payload = dir.join(CONTAMINATED_PAYLOAD);
    let corrupt = |reason: String| Error::CorruptCorpus {
        path: payload.clone(),
        reason,
    };
    let bytes = fs::read(&payload).map_err(|e| Error::io(&payload, e))?;
    let expected = manifest.n_segments * SEGMENT_LEN * 8;
    if bytes.len() != expected {
        return Err(corrupt(format!(
            "payload has {} bytes, manifest implies {expected}",
            bytes.len()
        )));
    }
    if sha256_hex(&bytes) != manifest.checksum_sha256 {
        return Err(corrupt("payload checksum does not match manifest".into()));
    }
    if manifest.records.len() != manifest.n_segments {
        return Err(corrupt(format!(
            "{} record entries for {} segments",
            manifest.records.len(),
            manifest.n_segments
        )));
    }
    let segments = segments_from_flat(
        decode_raw(&bytes, 8),
        manifest.n_segments,
        SegmentKind::Contaminated,
    )?;
    let records = manifest
        .records
        .into_iter()
        .zip(segments)
        .map(|(entry, contaminated)| MixRecord {
            clean_index: entry.clean_index,
            emg_index: entry.emg_index,
            target_snr_db: entry.snr_db,
            lambda: entry.lambda,
            contaminated,
        })
        .collect();
    Ok(ContaminatedCorpus {
        records,
        snr_levels: manifest.snr_levels,
        split: manifest.split,
        seed: manifest.seed,
        eeg_source: manifest.eeg_manifest,
        emg_source: manifest.emg_manifest,
    })
}

/// Full synthesis configuration: expansion, split and SNR grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub expand_to: usize,
    pub train_count: usize,
    pub test_count: usize,
    pub snr_levels: Vec<i32>,
    pub seed: u64,
    pub shuffle: bool,
}

impl SynthConfig {
    /// 5,598 segments split 5,000/598 over -7..=2 dB.
    pub fn standard(seed: u64) -> Self {
        SynthConfig {
            expand_to: 5598,
            train_count: 5000,
            test_count: 598,
            snr_levels: snr_levels(DEFAULT_SNR_MIN_DB, DEFAULT_SNR_MAX_DB).unwrap(),
            seed,
            shuffle: true,
        }
    }
}

pub struct SplitData {
    pub contaminated: ContaminatedCorpus,
    /// Clean references indexed by `MixRecord::clean_index`.
    pub clean: Corpus,
    pub emg: Corpus,
    /// Positions of this split's segments in the expanded corpora.
    pub eeg_indices: Vec<usize>,
    pub emg_indices: Vec<usize>,
}

pub struct SynthOutput {
    pub expanded_eeg_len: usize,
    pub train: SplitData,
    pub test: SplitData,
}

const EEG_SPLIT_TAG: u64 = 0xEE6;
const EMG_SPLIT_TAG: u64 = 0xE36;

/// Expand → split (independently for EEG and EMG) → contaminate each split.
pub fn synthesize(eeg: &Corpus, emg: &Corpus, cfg: &SynthConfig) -> Result<SynthOutput> {
    if emg.len() != cfg.expand_to {
        return Err(Error::InvalidData(format!(
            "EMG corpus has {} segments; the EEG corpus is expanded to {} to match it",
            emg.len(),
            cfg.expand_to
        )));
    }
    let expanded = expand_corpus(eeg, cfg.expand_to, cfg.seed)?;
    let plan = |tag| SplitPlan {
        train_count: cfg.train_count,
        test_count: cfg.test_count,
        seed: derive_seed(cfg.seed, tag),
        shuffle: cfg.shuffle,
    };
    let (eeg_train, eeg_test) = split_indices(expanded.len(), &plan(EEG_SPLIT_TAG))?;
    let (emg_train, emg_test) = split_indices(emg.len(), &plan(EMG_SPLIT_TAG))?;

    let make = |eeg_idx: Vec<usize>, emg_idx: Vec<usize>, split| -> Result<SplitData> {
        let clean = expanded.select(&eeg_idx)?;
        let emg_part = emg.select(&emg_idx)?;
        let mut contaminated =
            generate_contaminated(&clean, &emg_part, &cfg.snr_levels, cfg.seed, split)?;
        contaminated.eeg_source = eeg.source.clone();
        contaminated.emg_source = emg.source.clone();
        Ok(SplitData {
            contaminated,
            clean,
            emg: emg_part,
            eeg_indices: eeg_idx,
            emg_indices: emg_idx,
        })
    };
    Ok(SynthOutput {
        expanded_eeg_len: expanded.len(),
        train: make(eeg_train, emg_train, SplitKind::Train)?,
        test: make(eeg_test, emg_test, SplitKind::Test)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::measure_snr_db;

    fn tiny(n: usize, kind: SegmentKind, offset: f64) -> Corpus {
        let segs = (0..n)
            .map(|i| {
                let v = (0..SEGMENT_LEN)
                    .map(|j| ((j as f64 * 0.1 + i as f64).sin() + offset) * (i + 1) as f64)
                    .collect();
                Segment::new(v, kind).unwrap()
            })
            .collect();
        Corpus::new(segs, kind).unwrap()
    }

    #[test]
    fn csv_load_counts_rows() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("eeg.csv");
        let c = tiny(3, SegmentKind::CleanEeg, 0.0);
        save_corpus(&c, &path, CorpusFormat::Csv).unwrap();
        let back = load_corpus(&path, CorpusFormat::Csv, SegmentKind::CleanEeg).unwrap();
        assert_eq!(back.len(), 3);
        assert_eq!(back.segments(), c.segments());
    }

    #[test]
    fn csv_rejects_short_rows() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        fs::write(&path, "1,2,3\n").unwrap();
        assert!(load_corpus(&path, CorpusFormat::Csv, SegmentKind::CleanEeg).is_err());
    }

    #[test]
    fn raw_load_and_manifest_mismatch() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("emg.f32");
        let c = tiny(2, SegmentKind::Emg, 0.0);
        save_corpus(&c, &path, CorpusFormat::RawF32Le).unwrap();
        let back = load_corpus(&path, CorpusFormat::RawF32Le, SegmentKind::Emg).unwrap();
        assert_eq!(back.len(), 2);

        // Manifest claims more segments than the payload holds.
        let mut m: CorpusManifest = read_json(&manifest_path(&path)).unwrap();
        m.n_segments = 5;
        write_json(&manifest_path(&path), &m).unwrap();
        let err = load_corpus(&path, CorpusFormat::RawF32Le, SegmentKind::Emg).unwrap_err();
        assert!(matches!(err, Error::InvalidData(_)), "{err}");
    }

    #[test]
    fn raw_load_rejects_missing_file_and_nan() {
        let dir = tempfile::tempdir().unwrap();
        let missing = dir.path().join("nope.f32");
        assert!(load_corpus(&missing, CorpusFormat::RawF32Le, SegmentKind::Emg)
            .unwrap_err()
            .is_io());

        let path = dir.path().join("nan.f32");
        let mut bytes: Vec<u8> = (0..SEGMENT_LEN).flat_map(|_| 1.0f32.to_le_bytes()).collect();
        bytes[40..44].copy_from_slice(&f32::NAN.to_le_bytes());
        fs::write(&path, &bytes).unwrap();
        let m = CorpusManifest {
            format: CorpusFormat::RawF32Le,
            n_segments: 1,
            segment_len: SEGMENT_LEN,
            sample_rate_hz: SAMPLE_RATE_HZ,
            checksum_sha256: String::new(),
        };
        write_json(&manifest_path(&path), &m).unwrap();
        assert!(load_corpus(&path, CorpusFormat::RawF32Le, SegmentKind::Emg).is_err());
    }

    #[test]
    fn expand_examples() {
        let c = tiny(5, SegmentKind::CleanEeg, 0.0);
        assert_eq!(expand_corpus(&c, 5, 1).unwrap().segments(), c.segments());
        let a = expand_corpus(&c, 12, 9).unwrap();
        let b = expand_corpus(&c, 12, 9).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 12);
        assert_eq!(&a.segments()[..5], c.segments());
        assert!(a.segments()[5..].iter().all(|s| c.segments().contains(s)));
        assert!(expand_corpus(&c, 4, 0).is_err());
    }

    #[test]
    fn split_examples() {
        let c = tiny(10, SegmentKind::CleanEeg, 0.0);
        let plan = SplitPlan::new(7, 3, 42);
        let (tr, te) = split_indices(10, &plan).unwrap();
        assert_eq!((tr.len(), te.len()), (7, 3));
        let mut all: Vec<usize> = tr.iter().chain(&te).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..10).collect::<Vec<_>>());
        assert_eq!(split_indices(10, &plan).unwrap(), (tr, te));

        assert!(split_corpus(&c, &SplitPlan::new(10, 0, 1)).is_err());
        assert!(split_corpus(&c, &SplitPlan::new(5, 4, 1)).is_err());

        let ordered = SplitPlan {
            shuffle: false,
            ..SplitPlan::new(7, 3, 42)
        };
        assert_eq!(split_indices(10, &ordered).unwrap().1, vec![7, 8, 9]);
    }

    #[test]
    fn generate_pairs_by_index_and_hits_levels() {
        let eeg = tiny(4, SegmentKind::CleanEeg, 0.3);
        let emg = tiny(4, SegmentKind::Emg, -0.2);
        let levels = snr_levels(-7, 2).unwrap();
        let c = generate_contaminated(&eeg, &emg, &levels, 5, SplitKind::Train).unwrap();
        assert_eq!(c.len(), 40);
        assert_eq!(c.per_level(), 4);
        for r in &c.records {
            assert_eq!(r.clean_index, r.emg_index);
            let x = eeg.segments()[r.clean_index].samples();
            let n = emg.segments()[r.emg_index].samples();
            let scaled: Vec<f64> = n.iter().map(|v| r.lambda * v).collect();
            assert!((measure_snr_db(x, &scaled).unwrap() - r.target_snr_db).abs() < 1e-6);
            for ((y, x), s) in r.contaminated.samples().iter().zip(x).zip(&scaled) {
                assert!(((y - x) - s).abs() <= 1e-9 * y.abs().max(s.abs()));
            }
        }
        let wrong = tiny(3, SegmentKind::Emg, 0.0);
        assert!(generate_contaminated(&eeg, &wrong, &levels, 5, SplitKind::Train).is_err());
    }

    #[test]
    fn generate_symmetric_pair_gives_unit_gain() {
        let x = Segment::new(vec![2.0; SEGMENT_LEN], SegmentKind::CleanEeg).unwrap();
        let n = Segment::new(vec![-2.0; SEGMENT_LEN], SegmentKind::Emg).unwrap();
        let eeg = Corpus::new(vec![x], SegmentKind::CleanEeg).unwrap();
        let emg = Corpus::new(vec![n], SegmentKind::Emg).unwrap();
        let c = generate_contaminated(&eeg, &emg, &[0], 0, SplitKind::Test).unwrap();
        assert_eq!(c.records[0].lambda, 1.0);
    }

    #[test]
    fn zero_rms_segment_reports_index() {
        let eeg = tiny(3, SegmentKind::CleanEeg, 0.0);
        let mut segs = tiny(3, SegmentKind::Emg, 0.0).segments().to_vec();
        segs[2] = Segment::zeros(SegmentKind::Emg);
        let emg = Corpus::new(segs, SegmentKind::Emg).unwrap();
        let err = generate_contaminated(&eeg, &emg, &[0], 0, SplitKind::Train).unwrap_err();
        assert!(matches!(err, Error::AtIndex { index: 2, .. }), "{err}");
    }

    #[test]
    fn contaminated_round_trip_and_corruption() {
        let eeg = tiny(3, SegmentKind::CleanEeg, 0.1);
        let emg = tiny(3, SegmentKind::Emg, 0.0);
        let c = generate_contaminated(&eeg, &emg, &[-3, 1], 77, SplitKind::Test).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let manifest = save_contaminated(&c, dir.path()).unwrap();
        assert_eq!(manifest.seed, 77);
        assert_eq!(load_contaminated(dir.path()).unwrap(), c);

        let payload = dir.path().join(CONTAMINATED_PAYLOAD);
        let bytes = fs::read(&payload).unwrap();
        fs::write(&payload, &bytes[..bytes.len() - 8]).unwrap();
        assert!(matches!(
            load_contaminated(dir.path()),
            Err(Error::CorruptCorpus { .. })
        ));

        let mut flipped = bytes.clone();
        flipped[100] ^= 1;
        fs::write(&payload, &flipped).unwrap();
        assert!(matches!(
            load_contaminated(dir.path()),
            Err(Error::CorruptCorpus { .. })
        ));
    }
}
